#include <fracsob/seminorms.hpp>

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace fracsob;

namespace
{
  constexpr double pi = std::numbers::pi;

  Domain unit_disk() { return Domain::ball({0.0, 0.0}, 1.0); }

  QuadratureConfig coarse()
  {
    QuadratureConfig quad;
    quad.outer.radial = 16;
    quad.outer.angular = 32;
    quad.outer.resolution = 24;
    return quad;
  }

  SeminormSpec spec_of(double s, double p, double q, Variant v, double tau = 0.5, double R = 10.0)
  {
    SeminormSpec spec;
    spec.s = s;
    spec.p = p;
    spec.q = q;
    spec.variant = v;
    spec.tau = tau;
    spec.R = v == Variant::hat ? R : std::numeric_limits<double>::infinity();
    return spec;
  }

  // composite Simpson on [a, b] with n (even) intervals
  template <class F> double simpson(F g, double a, double b, int n)
  {
    const double h = (b - a) / n;
    double       sum = g(a) + g(b);
    for (int i = 1; i < n; ++i)
      sum += (i % 2 ? 4.0 : 2.0) * g(a + i * h);
    return sum * h / 3.0;
  }
} // namespace

TEST_CASE("spec validation")
{
  CHECK_NOTHROW(SeminormSpec{}.validate());
  auto bad = [](auto edit) {
    SeminormSpec s;
    edit(s);
    return s;
  };
  CHECK_THROWS_WITH_AS(bad([](SeminormSpec &s) { s.tau = 1.5; }).validate(), doctest::Contains("(0, 1)"),
                       std::invalid_argument);
  CHECK_THROWS(bad([](SeminormSpec &s) { s.s = 1.0; }).validate());
  CHECK_THROWS(bad([](SeminormSpec &s) { s.s = 1.0 - 1e-8; }).validate());
  CHECK_THROWS(bad([](SeminormSpec &s) { s.p = 0.5; }).validate());
  CHECK_THROWS(bad([](SeminormSpec &s) { s.q = std::nan(""); }).validate());
  CHECK_THROWS(bad([](SeminormSpec &s) { s.variant = Variant::hat; }).validate());
  CHECK_NOTHROW(bad([](SeminormSpec &s) {
                  s.variant = Variant::full;
                  s.tau = 7.0;
                }).validate());
  CHECK(variant_from_string("hat") == Variant::hat);
  CHECK_THROWS(variant_from_string("wide"));
}

TEST_CASE("regime flags")
{
  CHECK(regime_flags(2, 2.0, 2.0).a);
  CHECK(regime_flags(2, 3.0, 2.0).a);
  CHECK(regime_flags(2, 2.0, 3.0).b);
  CHECK(regime_flags(2, 1.5, 4.0).b);
  CHECK_FALSE(regime_flags(2, 1.5, 7.0).any());
  CHECK(regime_flags(2, 3.0, 4.0).c);
  CHECK(spec_of(0.5, 1.5, 7.0, Variant::tilde).warnings(2).size() == 1);
  CHECK(spec_of(0.5, 2.0, 2.0, Variant::tilde).warnings(2).empty());
}

TEST_CASE("constant function has zero seminorm")
{
  const auto c = functions::constant(2, 2.0);
  for (auto v : {Variant::full, Variant::tilde, Variant::hat})
    CHECK(seminorm_p(c, unit_disk(), spec_of(0.7, 2.0, 2.0, v), coarse()) == 0.0);
}

TEST_CASE("linear function on the disk: radial closed form")
{
  QuadratureConfig quad;
  const double     tau = 0.5;
  for (double s : {0.5, 0.9, 0.999})
    {
      const double alpha = 2.0 * (1.0 - s);
      // inner(x) = pi (tau (1 - |x|))^alpha / alpha, integrated over the disk in polar form
      const double oracle = simpson([&](double r) { return 2.0 * pi * r * pi * std::pow(tau * (1.0 - r), alpha) / alpha; },
                                    0.0, 1.0, 20000);
      const double got = seminorm_p(functions::linear({1.0, 0.0}), unit_disk(), spec_of(s, 2.0, 2.0, Variant::tilde), quad);
      CHECK(got == doctest::Approx(oracle).epsilon(quad.rel_tol));
    }
}

TEST_CASE("hat with a large cap equals tilde")
{
  const auto f = functions::gaussian({0.1, 0.2}, 0.4);
  for (double s : {0.5, 0.95})
    {
      const auto v = evaluate_variants(f, unit_disk(), spec_of(s, 2.0, 2.0, Variant::hat, 0.5, 0.5), coarse());
      CHECK(std::abs(v.hat - v.tilde) <= 1e-12 * v.tilde);
    }
}

TEST_CASE("variant monotonicity hat <= tilde <= full")
{
  for (const auto &f : {functions::gaussian({0.1, 0.2}, 0.4), functions::monomial_x1sq_x2(2), functions::abs_ridge(2)})
    for (double s : {0.5, 0.9})
      for (double q : {1.0, 2.0})
        {
          const auto v = evaluate_variants(f, unit_disk(), spec_of(s, 2.0, q, Variant::hat, 0.5, 0.05), coarse());
          REQUIRE(v.full);
          CHECK(v.hat <= v.tilde);
          CHECK(v.tilde <= *v.full);
          CHECK(v.hat > 0.0);
        }
  const auto unbounded = evaluate_variants(functions::linear({1.0, 0.0}), Domain::strip(2, 1, 1.0),
                                           spec_of(0.5, 2.0, 2.0, Variant::hat, 0.5, 1.0), [] {
                                             auto q = coarse();
                                             q.outer.truncation_index = 2;
                                             return q;
                                           }());
  CHECK_FALSE(unbounded.full);
  CHECK(unbounded.hat > 0.0);
}

TEST_CASE("full variant on unbounded domains is rejected")
{
  auto quad = coarse();
  quad.outer.truncation_index = 2;
  CHECK_THROWS_AS(seminorm_p(functions::linear({1.0, 0.0}), Domain::strip(2, 1, 1.0), spec_of(0.5, 2, 2, Variant::full),
                             quad),
                  std::invalid_argument);
}

TEST_CASE("results do not depend on the thread count")
{
  const auto f = functions::radial_wave({0.0, 0.0}, 2.0);
  auto       quad = coarse();
  quad.threads = 1;
  const double one = seminorm_p(f, unit_disk(), spec_of(0.8, 3.0, 2.0, Variant::full), quad);
  quad.threads = 3;
  const double three = seminorm_p(f, unit_disk(), spec_of(0.8, 3.0, 2.0, Variant::full), quad);
  CHECK(one == three);
}

TEST_CASE("asymptotic constant")
{
  CHECK(bbm_constant(1, 2.0, 2.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(bbm_constant(2, 2.0, 2.0) == doctest::Approx(pi / 2.0).epsilon(1e-12));
  CHECK(bbm_constant(3, 2.0, 2.0) == doctest::Approx(2.0 * pi / 3.0).epsilon(1e-12));
  CHECK(bbm_constant(2, 2.0, 1.0) == doctest::Approx(16.0).epsilon(1e-12));
  CHECK(sphere_abs_moment(2, 3.0) == doctest::Approx(8.0 / 3.0).epsilon(1e-13));
  const auto mc = sphere_abs_moment_mc(2, 2.0, 1000000, 3);
  CHECK(std::abs(mc.estimate - pi) <= 3.0 * mc.std_error);
  CHECK_THROWS(bbm_constant(4, 2.0, 2.0));
}

TEST_CASE("annulus tail")
{
  const auto lin = functions::linear({1.0, 0.0});
  CHECK(annulus_tail_seminorm_p(lin, unit_disk(), spec_of(0.5, 2, 2, Variant::hat, 0.5, 0.6), coarse()) == 0.0);
  CHECK(annulus_tail_seminorm_p(functions::constant(2, 1.0), unit_disk(), spec_of(0.5, 2, 2, Variant::hat, 0.9, 0.1),
                                coarse()) == 0.0);

  // Monte Carlo over x in the disk with the exact shell integral pi (b - a) (alpha = 1)
  const double  got = annulus_tail_seminorm_p(lin, unit_disk(), spec_of(0.5, 2, 2, Variant::hat, 0.9, 0.1), QuadratureConfig{});
  std::uint64_t state = 99;
  const int     n = 400000;
  double        sum = 0.0, sum2 = 0.0;
  for (int k = 0; k < n; ++k)
    {
      const double r = std::sqrt(random_unit(state));
      const double b = 0.9 * (1.0 - r);
      const double v = b > 0.1 ? pi * (b - 0.1) : 0.0;
      sum += v;
      sum2 += v * v;
    }
  const double mean = sum / n, se = pi * std::sqrt((sum2 / n - mean * mean) / n);
  CHECK(std::abs(got - pi * mean) <= 3.0 * se);
}

TEST_CASE("truncated double integral")
{
  const auto lin = functions::linear({1.0, 0.0});
  auto       quad = coarse();
  CHECK(leoni_spector_truncated_p(lin, unit_disk(), 1.5, 0.5, 2.0, quad) == 0.0);
  CHECK(leoni_spector_truncated_p(functions::constant(2, 1.0), unit_disk(), 0.2, 0.5, 2.0, quad) == 0.0);
  CHECK_THROWS(leoni_spector_truncated_p(lin, unit_disk(), 0.2, spec_of(0.5, 2.0, 3.0, Variant::full), quad));
  // Omega_lambda is the disk of radius 1 - lambda; the double integral scales like rho^{4 - 2s}
  const double s = 0.7;
  const double a = leoni_spector_truncated_p(lin, unit_disk(), 0.2, s, 2.0, quad);
  const double b = leoni_spector_truncated_p(lin, unit_disk(), 0.6, s, 2.0, quad);
  CHECK(a / b == doctest::Approx(std::pow(0.8 / 0.4, 4.0 - 2.0 * s)).epsilon(1e-3));
}
