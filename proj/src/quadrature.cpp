#include <fracsob/quadrature.hpp>
#include <fracsob/summation.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>

namespace fracsob
{

  void QuadratureConfig::validate() const
  {
    if (sphere_order < 2)
      throw std::invalid_argument("quad.sphere_order must be >= 2");
    if (radial_nodes < 4)
      throw std::invalid_argument("quad.radial_nodes must be >= 4");
    if (radial_levels < 1)
      throw std::invalid_argument("quad.radial_levels must be >= 1");
    if (mc_samples == 0)
      throw std::invalid_argument("quad.mc_samples must be positive");
    if (!(rel_tol > 0.0 && rel_tol < 1.0))
      throw std::invalid_argument("quad.rel_tol must lie in (0, 1)");
    if (threads < 0)
      throw std::invalid_argument("quad.threads must be >= 0");
    outer.validate();
  }

  namespace
  {
    inline double powq(double d, double q)
    {
      if (q == 1.0)
        return d;
      if (q == 2.0)
        return d * d;
      if (q == 3.0)
        return d * d * d;
      return std::pow(d, q);
    }

    constexpr double floor_ratio = 1e-7;

    [[noreturn]] void non_finite(const Point &x, const Point &dir, double r)
    {
      std::ostringstream os;
      os.precision(17);
      os << "non-finite integrand at x = " << x.str() << ", direction " << dir.str() << ", r = " << r;
      throw std::runtime_error(os.str());
    }

    void append_panel(const GaussRule &ref, double a, double b, std::vector<double> &nodes,
                      std::vector<double> &weights)
    {
      const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
      for (std::size_t i = 0; i < ref.nodes.size(); ++i)
        {
          nodes.push_back(mid + half * ref.nodes[i]);
          weights.push_back(half * ref.weights[i]);
        }
    }

    void check_args(double s, double q)
    {
      if (!(s > 0.0 && s < 1.0))
        throw std::invalid_argument("s must lie in (0, 1)");
      if (!(q >= 1.0) || !std::isfinite(q))
        throw std::invalid_argument("q must be >= 1");
    }
  } // namespace

  namespace
  {
    int angular_refinement(int dim) { return dim == 2 ? 4 : dim == 3 ? 2 : 1; }
  } // namespace

  InnerIntegrator::InnerIntegrator(int dim, const QuadratureConfig &quad, bool discontinuous)
    : dim_(dim), sphere_(sphere_rule(dim, discontinuous ? angular_refinement(dim) * quad.sphere_order : quad.sphere_order))
  {
    quad.validate();
    const int n = discontinuous ? 2 * quad.radial_nodes : quad.radial_nodes;
    panel_ = gauss_legendre(n, -1.0, 1.0);

    // v in (0, 1): a few panels graded toward 0, many toward 1 where the map
    // v -> v^{1/alpha} concentrates as alpha -> 0.
    const int lower = std::max(2, quad.radial_levels / 4);
    append_panel(panel_, 0.0, std::ldexp(1.0, -lower), v_nodes_, v_weights_);
    for (int k = lower; k >= 2; --k)
      append_panel(panel_, std::ldexp(1.0, -k), std::ldexp(1.0, -k + 1), v_nodes_, v_weights_);
    for (int k = 1; k < quad.radial_levels; ++k)
      append_panel(panel_, 1.0 - std::ldexp(1.0, -k), 1.0 - std::ldexp(1.0, -k - 1), v_nodes_, v_weights_);
    append_panel(panel_, 1.0 - std::ldexp(1.0, -quad.radial_levels), 1.0, v_nodes_, v_weights_);
  }

  double InnerIntegrator::quotient(const TestFunction &f, const Point &x, double fx, const Point &dir, double r,
                                   double r_floor, double q) const
  {
    const double rr = std::max(r, r_floor);
    const double d = std::abs(f(along(x, dir, rr)) - fx) / rr;
    const double g = powq(d, q);
    if (!std::isfinite(g))
      non_finite(x, dir, rr);
    return g;
  }

  double InnerIntegrator::ball(const TestFunction &f, const Point &x, double delta, double s, double q) const
  {
    check_args(s, q);
    if (!(delta > 0.0))
      return 0.0;
    const double alpha = q * (1.0 - s);
    const double r_floor = floor_ratio * delta;
    const double fx = f(x);
    if (!std::isfinite(fx))
      non_finite(x, Point(dim_), 0.0);
    if (f.jump_set())
      {
        // piecewise constant along rays: log-r panels split at the jumps, and
        // the value at the cutoff below r_floor
        CompensatedSum total;
        for (const auto &sn : sphere_)
          {
            const double below = quotient(f, x, fx, sn.dir, r_floor, r_floor, q) * std::pow(r_floor, alpha) / alpha;
            total.add(sn.w * (below + log_segment(f, x, fx, sn.dir, r_floor, delta, alpha, q, nullptr)));
          }
        return total.value();
      }
    std::optional<Point> grad;
    if (f.has_gradient())
      grad = f.gradient(x);

    std::vector<double> radii(v_nodes_.size());
    for (std::size_t j = 0; j < v_nodes_.size(); ++j)
      radii[j] = delta * std::exp(std::log(v_nodes_[j]) / alpha);

    CompensatedSum total;
    for (const auto &sn : sphere_)
      {
        const double slope0 = grad ? powq(std::abs(grad->dot(sn.dir)), q) : quotient(f, x, fx, sn.dir, 0.0, r_floor, q);
        CompensatedSum radial;
        for (std::size_t j = 0; j < radii.size(); ++j)
          {
            const double g = radii[j] < r_floor ? slope0 : quotient(f, x, fx, sn.dir, radii[j], r_floor, q);
            radial.add(v_weights_[j] * g);
          }
        total.add(sn.w * radial.value());
      }
    return std::pow(delta, alpha) / alpha * total.value();
  }

  double InnerIntegrator::log_segment(const TestFunction &f, const Point &x, double fx, const Point &dir, double a,
                                      double b, double alpha, double q, const Domain *reject) const
  {
    if (!(b > a) || !(a > 0.0))
      return 0.0;
    const double la = std::log(a), lb = std::log(b);
    const double width = reject ? std::numbers::ln2 / 4.0 : std::numbers::ln2;
    const int    panels = std::clamp(static_cast<int>(std::ceil((lb - la) / width)), 1, 400);
    const double h = (lb - la) / panels;
    const bool   split_jumps = f.jump_set().has_value();

    CompensatedSum sum;
    auto           integrate = [&](double lo, double hi) {
      const double half = 0.5 * (hi - lo);
      for (std::size_t i = 0; i < panel_.nodes.size(); ++i)
        {
          const double r = std::exp(lo + half * (1.0 + panel_.nodes[i]));
          if (reject && !reject->contains(along(x, dir, r)))
            continue;
          sum.add(half * panel_.weights[i] * quotient(f, x, fx, dir, r, 0.0, q) * std::pow(r, alpha));
        }
    };
    auto value_at = [&](double t) { return f(along(x, dir, std::exp(t))); };

    for (int k = 0; k < panels; ++k)
      {
        double lo = la + k * h;
        const double hi = k + 1 == panels ? lb : lo + h;
        if (split_jumps)
          {
            double f_lo = value_at(lo);
            const double f_hi = value_at(hi);
            for (int jumps = 0; jumps < 4 && value_at(lo) != f_hi; ++jumps)
              {
                double a_t = lo, b_t = hi;
                for (int it = 0; it < 60 && b_t - a_t > 1e-14; ++it)
                  {
                    const double m = 0.5 * (a_t + b_t);
                    (value_at(m) == f_lo ? a_t : b_t) = m;
                  }
                integrate(lo, b_t);
                lo = b_t;
                f_lo = value_at(lo);
              }
          }
        integrate(lo, hi);
      }
    return sum.value();
  }

  double InnerIntegrator::shell(const TestFunction &f, const Point &x, double a, double b, double s, double q) const
  {
    check_args(s, q);
    if (!(b > a) || !(a > 0.0))
      return 0.0;
    const double alpha = q * (1.0 - s);
    const double fx = f(x);
    CompensatedSum total;
    for (const auto &sn : sphere_)
      total.add(sn.w * log_segment(f, x, fx, sn.dir, a, b, alpha, q, nullptr));
    return total.value();
  }

  double InnerIntegrator::beyond(const TestFunction &f, const Point &x, double a, double s, double q,
                                 const Domain &domain) const
  {
    check_args(s, q);
    if (!(a > 0.0))
      throw std::invalid_argument("beyond: inner radius must be positive");
    const double alpha = q * (1.0 - s);
    const double fx = f(x);
    double       r_max = 0.0;
    if (!domain.convex())
      {
        const auto enc = domain.enclosing_ball();
        if (!enc)
          throw std::invalid_argument("inner integral over an unbounded non-convex domain is not supported");
        r_max = (x - enc->center).norm() + enc->radius;
      }
    CompensatedSum total;
    for (const auto &sn : sphere_)
      {
        const double exit = domain.ray_exit(x, sn.dir);
        double       v = 0.0;
        if (exit > a)
          {
            if (!std::isfinite(exit))
              throw std::invalid_argument("inner integral over the whole domain requires a bounded domain");
            v += log_segment(f, x, fx, sn.dir, a, exit, alpha, q, nullptr);
          }
        if (!domain.convex())
          v += log_segment(f, x, fx, sn.dir, std::max(a, exit), r_max, alpha, q, &domain);
        total.add(sn.w * v);
      }
    return total.value();
  }

  namespace
  {
    void check_ball_inside(const Point &x, double delta, const Domain &domain)
    {
      if (!domain.contains(x))
        throw std::invalid_argument("inner integral: x = " + x.str() + " is not in the domain");
      const double d = domain.dist_to_boundary(x);
      if (delta > d * (1.0 + 1e-12))
        throw std::invalid_argument("inner integral: B(x, delta) is not contained in the domain");
    }
  } // namespace

  double inner_integral(const TestFunction &f, const Point &x, double delta, double s, double q,
                        const QuadratureConfig &quad, const Domain &domain)
  {
    if (!(delta > 0.0))
      return 0.0;
    check_ball_inside(x, delta, domain);
    const InnerIntegrator integ(x.dim(), quad, f.discontinuous());
    return integ.ball(f, x, delta, s, q);
  }

  double random_unit(std::uint64_t &state)
  {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return (static_cast<double>(z >> 11) + 1.0) * 0x1.0p-53;
  }

  Point random_direction(int dim, std::uint64_t &state)
  {
    Point d(dim);
    switch (dim)
      {
        case 1: d[0] = random_unit(state) < 0.5 ? -1.0 : 1.0; break;
        case 2:
          {
            const double t = 2.0 * std::numbers::pi * random_unit(state);
            d[0] = std::cos(t);
            d[1] = std::sin(t);
            break;
          }
        case 3:
          {
            const double z = 2.0 * random_unit(state) - 1.0;
            const double t = 2.0 * std::numbers::pi * random_unit(state);
            const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
            d[0] = z;
            d[1] = rho * std::cos(t);
            d[2] = rho * std::sin(t);
            break;
          }
        default: throw std::invalid_argument("random_direction: unsupported dimension");
      }
    return d;
  }

  McEstimate inner_integral_mc(const TestFunction &f, const Point &x, double delta, double s, double q,
                               std::size_t samples, std::uint64_t seed, const Domain &domain)
  {
    check_args(s, q);
    if (samples < 2)
      throw std::invalid_argument("inner_integral_mc: need at least 2 samples");
    if (!(delta > 0.0))
      return {};
    check_ball_inside(x, delta, domain);
    const double  alpha = q * (1.0 - s);
    const double  r_floor = floor_ratio * delta;
    const double  fx = f(x);
    std::uint64_t state = seed ^ 0x5851f42d4c957f2dULL;

    CompensatedSum sum, sum2;
    for (std::size_t i = 0; i < samples; ++i)
      {
        const Point  dir = random_direction(x.dim(), state);
        const double r = std::max(r_floor, delta * std::exp(std::log(random_unit(state)) / alpha));
        const double g = powq(std::abs(f(along(x, dir, r)) - fx) / r, q);
        if (!std::isfinite(g))
          non_finite(x, dir, r);
        sum.add(g);
        sum2.add(g * g);
      }
    const double n = static_cast<double>(samples);
    const double mean = sum.value() / n;
    const double var = std::max(0.0, (sum2.value() / n - mean * mean) * n / (n - 1.0));
    const double scale = sphere_measure(x.dim()) * std::pow(delta, alpha) / alpha;
    return {scale * mean, scale * std::sqrt(var / n)};
  }

  double outer_lp_aggregate(std::span<const NodeValue> values, double p_over_q)
  {
    if (!(p_over_q > 0.0) || !std::isfinite(p_over_q))
      throw std::invalid_argument("outer_lp_aggregate: p/q must be positive");
    CompensatedSum sum;
    for (std::size_t i = 0; i < values.size(); ++i)
      {
        const auto &nv = values[i];
        if (!(nv.value >= 0.0) || !(nv.weight >= 0.0) || !std::isfinite(nv.value) || !std::isfinite(nv.weight))
          throw std::invalid_argument("outer_lp_aggregate: negative or non-finite entry at index " +
                                      std::to_string(i));
        if (nv.value == 0.0 || nv.weight == 0.0)
          continue;
        sum.add(nv.weight * (p_over_q == 1.0 ? nv.value : std::pow(nv.value, p_over_q)));
      }
    return sum.value();
  }

} // namespace fracsob
