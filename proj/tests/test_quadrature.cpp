#include <fracsob/quadrature.hpp>
#include <fracsob/rules.hpp>
#include <fracsob/test_functions.hpp>

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace fracsob;

namespace
{
  constexpr double pi = std::numbers::pi;

  Domain unit_disk() { return Domain::ball({0.0, 0.0}, 1.0); }

  // int_{S^{N-1}} |sigma_1|^q, tabulated by hand
  double abs_moment(int dim, double q)
  {
    if (dim == 2 && q == 1.0)
      return 4.0;
    if (dim == 2 && q == 2.0)
      return pi;
    if (dim == 2 && q == 3.0)
      return 8.0 / 3.0;
    if (dim == 3 && q == 2.0)
      return 4.0 * pi / 3.0;
    if (dim == 3 && q == 1.0)
      return 2.0 * pi;
    if (dim == 1)
      return 2.0;
    throw std::logic_error("not tabulated");
  }

  double pairwise(const double *v, std::size_t n)
  {
    if (n == 1)
      return v[0];
    return pairwise(v, n / 2) + pairwise(v + n / 2, n - n / 2);
  }

  // Sub-intervals of (a, inf) along x + r sigma inside the annulus r_in < |y| < r_out (centre 0).
  std::vector<std::pair<double, double>> annulus_chords(const Point &x, const Point &sigma, double r_in, double r_out,
                                                        double a)
  {
    const double b = x.dot(sigma), c = x.norm2();
    const double out = -b + std::sqrt(b * b - c + r_out * r_out);
    std::vector<std::pair<double, double>> seg;
    const double disc = b * b - c + r_in * r_in;
    if (disc > 0.0 && -b - std::sqrt(disc) > 0.0)
      {
        seg.emplace_back(0.0, -b - std::sqrt(disc));
        seg.emplace_back(-b + std::sqrt(disc), out);
      }
    else
      seg.emplace_back(0.0, out);
    std::vector<std::pair<double, double>> clipped;
    for (auto [lo, hi] : seg)
      if (hi > a)
        clipped.emplace_back(std::max(lo, a), hi);
    return clipped;
  }
} // namespace

TEST_CASE("sphere rules")
{
  const auto s1 = sphere_rule(1, 2);
  REQUIRE(s1.size() == 2);
  CHECK(s1[0].dir[0] * s1[1].dir[0] == -1.0);
  CHECK(s1[0].w == 1.0);
  CHECK(s1[1].w == 1.0);
  for (int order : {4, 17, 64})
    {
      double w = 0.0;
      for (const auto &n : sphere_rule(2, order))
        w += n.w;
      CHECK(std::abs(w - 2.0 * pi) <= 1e-10);
    }
  double w3 = 0.0, m3 = 0.0;
  for (const auto &n : sphere_rule(3, 8))
    {
      w3 += n.w;
      m3 += n.w * n.dir[2] * n.dir[2] * n.dir[0] * n.dir[0];
      CHECK(n.dir.norm() == doctest::Approx(1.0).epsilon(1e-14));
    }
  CHECK(w3 == doctest::Approx(4.0 * pi).epsilon(1e-13));
  CHECK(m3 == doctest::Approx(4.0 * pi / 15.0).epsilon(1e-13));
  CHECK_THROWS_AS(sphere_rule(4, 8), std::invalid_argument);
}

TEST_CASE("Gauss-Legendre rule")
{
  const auto g = gauss_legendre(6, 0.0, 2.0);
  double     sum = 0.0;
  for (std::size_t i = 0; i < g.nodes.size(); ++i)
    sum += g.weights[i] * std::pow(g.nodes[i], 11);
  CHECK(sum == doctest::Approx(std::pow(2.0, 12) / 12.0).epsilon(1e-13));
}

TEST_CASE("linear function: closed form for every s with the same nodes")
{
  QuadratureConfig quad;
  struct Case
  {
    Point  a;
    double q, delta;
  };
  const std::vector<Case> cases{{{1.0, 0.0}, 2.0, 1.0},
                                {{0.6, -0.8}, 1.0, 0.3},
                                {{2.0, 1.0}, 3.0, 0.7},
                                {{1.0, 2.0, -1.0}, 2.0, 0.5},
                                {{0.0, 0.0, 3.0}, 1.0, 0.25},
                                {Point{1.5}, 2.0, 0.4}};
  for (const auto &c : cases)
    {
      const int    n = c.a.dim();
      const auto   f = functions::linear(c.a);
      const Domain dom = Domain::ball(Point(n), 1.0);
      InnerIntegrator integ(n, quad);
      for (double s : {0.5, 0.9, 0.99, 0.999, 0.999999})
        {
          const double alpha = c.q * (1.0 - s);
          const double exact = std::pow(c.a.norm(), c.q) * abs_moment(n, c.q) * std::pow(c.delta, alpha) / alpha;
          const double got = inner_integral(f, Point(n), c.delta, s, c.q, quad, dom);
          CHECK(got == doctest::Approx(exact).epsilon(quad.rel_tol));
          CHECK(integ.ball(f, Point(n), c.delta, s, c.q) == got);
        }
    }
  CHECK(inner_integral(functions::linear({1.0, 0.0}), {0.0, 0.0}, 1.0, 0.5, 2.0, quad, unit_disk()) ==
        doctest::Approx(pi).epsilon(1e-10));
}

TEST_CASE("degenerate inputs")
{
  QuadratureConfig quad;
  CHECK(inner_integral(functions::constant(2, 4.0), {0.1, 0.2}, 0.5, 0.7, 2.0, quad, unit_disk()) == 0.0);
  CHECK(inner_integral(functions::linear({1.0, 0.0}), {0.1, 0.2}, 0.0, 0.7, 2.0, quad, unit_disk()) == 0.0);
  CHECK(inner_integral(functions::linear({1.0, 0.0}), {0.1, 0.2}, -1.0, 0.7, 2.0, quad, unit_disk()) == 0.0);
  CHECK_THROWS(inner_integral(functions::linear({1.0, 0.0}), {0.9, 0.0}, 0.5, 0.7, 2.0, quad, unit_disk()));
  CHECK_THROWS(inner_integral(functions::linear({1.0, 0.0}), {1.5, 0.0}, 0.1, 0.7, 2.0, quad, unit_disk()));

  const TestFunction bad("bad", 2, Regularity::smooth_w1p,
                         [](const Point &y) { return y[0] > 0.35 ? std::nan("") : y[0]; });
  CHECK_THROWS_WITH_AS(inner_integral(bad, {0.2, 0.0}, 0.3, 0.7, 2.0, quad, unit_disk()),
                       doctest::Contains("non-finite"), std::runtime_error);

  const auto mc = inner_integral_mc(functions::constant(2, 1.0), {0.0, 0.0}, 0.5, 0.7, 2.0, 1000, 1, unit_disk());
  CHECK(mc.estimate == 0.0);
  CHECK(mc.std_error == 0.0);
}

TEST_CASE("Monte Carlo oracle reproduces the linear closed form")
{
  const auto mc = inner_integral_mc(functions::linear({1.0, 0.0}), {0.0, 0.0}, 1.0, 0.5, 2.0, 1000000, 11, unit_disk());
  CHECK(std::abs(mc.estimate - pi) <= 3.0 * mc.std_error);
  CHECK(mc.std_error < 0.01 * pi);
}

TEST_CASE("homogeneity and space scaling")
{
  QuadratureConfig quad;
  const auto       f = functions::gaussian({0.1, 0.2}, 0.4);
  const Point      x{0.2, -0.1};
  const double     delta = 0.3;
  const Domain     big = Domain::ball({0.0, 0.0}, 10.0);
  for (double s : {0.5, 0.95})
    for (double q : {1.0, 2.0, 3.0})
      {
        const double base = inner_integral(f, x, delta, s, q, quad, big);
        CHECK(inner_integral(f.scaled(-2.5), x, delta, s, q, quad, big) ==
              doctest::Approx(std::pow(2.5, q) * base).epsilon(1e-10));
        for (double lambda : {0.5, 3.0})
          {
            const double scaled = inner_integral(f.dilated(lambda), x * (1.0 / lambda), delta / lambda, s, q, quad, big);
            CHECK(scaled == doctest::Approx(std::pow(lambda, s * q) * base).epsilon(quad.rel_tol));
          }
      }
}

TEST_CASE("shell is the difference of two balls")
{
  QuadratureConfig quad;
  InnerIntegrator  integ(2, quad);
  const auto       f = functions::monomial_x1sq_x2(2);
  const Point      x{0.1, 0.3};
  for (double s : {0.5, 0.99})
    {
      const double diff = integ.ball(f, x, 0.4, s, 2.0) - integ.ball(f, x, 0.1, s, 2.0);
      CHECK(integ.shell(f, x, 0.1, 0.4, s, 2.0) == doctest::Approx(diff).epsilon(quad.rel_tol));
    }
  CHECK(integ.shell(f, x, 0.4, 0.1, 0.5, 2.0) == 0.0);
}

TEST_CASE("integral beyond the ball follows the domain")
{
  QuadratureConfig quad;
  InnerIntegrator  integ(2, quad);
  const auto       f = functions::linear({1.0, 0.0});
  const int        m = 200000;

  SUBCASE("convex: unit disk")
  {
    const Point x{0.5, 0.0};
    for (double s : {0.5, 0.9})
      {
        const double alpha = 2.0 * (1.0 - s);
        double       sum = 0.0;
        for (int k = 0; k < m; ++k)
          {
            const double th = 2.0 * pi * (k + 0.5) / m;
            const Point  sg{std::cos(th), std::sin(th)};
            for (auto [lo, hi] : annulus_chords(x, sg, 0.0, 1.0, 0.5))
              sum += sg[0] * sg[0] * (std::pow(hi, alpha) - std::pow(lo, alpha)) / alpha;
          }
        const double oracle = sum * 2.0 * pi / m;
        CHECK(integ.beyond(f, x, 0.5, s, 2.0, unit_disk()) == doctest::Approx(oracle).epsilon(quad.rel_tol));
      }
  }

  SUBCASE("non-convex: annulus, rays re-enter across the hole")
  {
    const Domain ann = Domain::annulus({0.0, 0.0}, 0.3, 1.0);
    const Point  x{0.0, 0.6};
    for (double s : {0.5, 0.9})
      {
        const double alpha = 2.0 * (1.0 - s);
        double       sum = 0.0;
        for (int k = 0; k < m; ++k)
          {
            const double th = 2.0 * pi * (k + 0.5) / m;
            const Point  sg{std::cos(th), std::sin(th)};
            for (auto [lo, hi] : annulus_chords(x, sg, 0.3, 1.0, 0.3))
              sum += sg[0] * sg[0] * (std::pow(hi, alpha) - std::pow(lo, alpha)) / alpha;
          }
        const double oracle = sum * 2.0 * pi / m;
        CHECK(integ.beyond(f, x, 0.3, s, 2.0, ann) == doctest::Approx(oracle).epsilon(5.0 * quad.rel_tol));
      }
  }
}

TEST_CASE("deterministic quadrature agrees with the Monte Carlo oracle")
{
  QuadratureConfig quad;
  const Domain     dom = unit_disk();
  std::uint64_t    state = 2024;
  int              agree = 0, total = 0;
  for (const auto &f : {functions::gaussian({0.1, 0.2}, 0.4), functions::monomial_x1sq_x2(2),
                        functions::radial_wave({0.0, 0.0}, 2.0)})
    for (double q : {1.0, 2.0, 3.0})
      {
        const double r = 0.8 * std::sqrt(random_unit(state)), th = 2.0 * pi * random_unit(state);
        const Point  x{r * std::cos(th), r * std::sin(th)};
        const double s = 0.5 + 0.499 * random_unit(state);
        const double delta = 0.5 * dom.dist_to_boundary(x);
        const double det = inner_integral(f, x, delta, s, q, quad, dom);
        const auto   mc = inner_integral_mc(f, x, delta, s, q, 200000, 100 + total, dom);
        ++total;
        if (std::abs(det - mc.estimate) <= 3.0 * mc.std_error)
          ++agree;
      }
  CHECK(agree >= total - 1);
}

TEST_CASE("indicator: deterministic quadrature against the Monte Carlo oracle")
{
  QuadratureConfig quad;
  InnerIntegrator  integ(2, quad, true);
  const auto       chi = functions::halfspace_indicator(2);
  const double     delta = 0.3;
  for (double s : {0.3, 0.45})
    for (double x1 : {-0.1, 0.05, 0.2})
      {
        const Point  x{x1, 0.1};
        const double det = integ.ball(chi, x, delta, s, 2.0);
        const auto   mc = inner_integral_mc(chi, x, delta, s, 2.0, 400000, 9, unit_disk());
        CHECK(std::abs(det - mc.estimate) <= 3.0 * mc.std_error);

        // rays cross x1 = 0 at r = |x1| / |cos|; beyond it the quotient is r^{-2}
        const int m = 100000;
        double    sum = 0.0;
        for (int k = 0; k < m; ++k)
          {
            const double c = std::cos(2.0 * pi * (k + 0.5) / m);
            if ((x1 > 0.0 ? -c : c) <= 0.0 || std::abs(x1) / std::abs(c) >= delta)
              continue;
            const double r0 = std::abs(x1) / std::abs(c);
            sum += (std::pow(delta, -2.0 * s) - std::pow(r0, -2.0 * s)) / (-2.0 * s);
          }
        CHECK(det == doctest::Approx(sum * 2.0 * pi / m).epsilon(quad.rel_tol));
      }
}

TEST_CASE("outer aggregation")
{
  std::vector<NodeValue> ones(7, NodeValue{1.0, pi / 7.0});
  for (double r : {0.5, 1.0, 1.5})
    CHECK(outer_lp_aggregate(ones, r) == doctest::Approx(pi).epsilon(1e-14));
  const NodeValue single{2.0, 0.3};
  CHECK(outer_lp_aggregate(std::span<const NodeValue>(&single, 1), 1.5) ==
        doctest::Approx(0.3 * std::pow(2.0, 1.5)).epsilon(1e-15));

  std::uint64_t          state = 77;
  std::vector<NodeValue> values(10001);
  std::vector<double>    products(values.size());
  for (std::size_t i = 0; i < values.size(); ++i)
    {
      values[i] = {std::pow(10.0, 6.0 * random_unit(state) - 3.0), random_unit(state)};
      products[i] = values[i].value * values[i].weight;
    }
  const double ref = pairwise(products.data(), products.size());
  CHECK(std::abs(outer_lp_aggregate(values, 1.0) - ref) <= 1e-12 * ref);

  values[17].value = -1.0;
  CHECK_THROWS_WITH_AS(outer_lp_aggregate(values, 1.0), doctest::Contains("17"), std::invalid_argument);
}
