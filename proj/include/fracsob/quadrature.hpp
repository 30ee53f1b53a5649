#ifndef FRACSOB_QUADRATURE_HPP
#define FRACSOB_QUADRATURE_HPP

#include <fracsob/geometry.hpp>
#include <fracsob/quadrature_config.hpp>
#include <fracsob/rules.hpp>
#include <fracsob/test_functions.hpp>

#include <cstdint>
#include <span>
#include <vector>

namespace fracsob
{

  /**
   * Evaluates radial-angular integrals of the difference quotient
   *
   *     g(r, sigma) = (|f(x + r sigma) - f(x)| / r)^q
   *
   * against the weight r^{q(1-s)-1} dr dsigma, which is the polar form of
   * |f(x) - f(y)|^q / |x - y|^{N+sq} dy.
   *
   * On a ball B(x, delta) the substitution u = r^{q(1-s)} turns the weight into
   * du / (q(1-s)), leaving a bounded integrand in u. With u = delta^{q(1-s)} v
   * the v-integral over (0, 1) uses Gauss-Legendre on panels graded
   * geometrically toward v = 1; nodes and weights do not depend on s.
   *
   * Radii below 1e-7 * delta are not resolvable in floating point
   * (x + r sigma rounds to x); there the quotient is replaced by its r -> 0
   * limit |grad f(x) . sigma|^q when the gradient is known, and by its value
   * at the cutoff otherwise.
   *
   * For discontinuous f the radial nodes per panel are doubled and the sphere
   * order is multiplied by 4 (N = 2) or 2 (N = 3). When f carries a jump set,
   * each ray is integrated on log-r panels from the cutoff to delta, split at
   * the jumps (located by bisection on f).
   *
   * Rules are built once per integrator; the object is immutable and may be
   * shared between threads.
   */
  class InnerIntegrator
  {
  public:
    InnerIntegrator(int dim, const QuadratureConfig &quad, bool discontinuous = false);

    /// int over B(x, delta); 0 for delta <= 0.
    double ball(const TestFunction &f, const Point &x, double delta, double s, double q) const;

    /// int over the shell a <= |h| <= b (nonsingular); 0 when b <= a.
    double shell(const TestFunction &f, const Point &x, double a, double b, double s, double q) const;

    /// int over {|h| >= a, x + h in domain}: rays are followed to their first
    /// exit; for non-convex domains the remainder up to the enclosing diameter
    /// is integrated with membership rejection.
    double beyond(const TestFunction &f, const Point &x, double a, double s, double q, const Domain &domain) const;

    const std::vector<SphereNode> &sphere() const { return sphere_; }

  private:
    double quotient(const TestFunction &f, const Point &x, double fx, const Point &dir, double r,
                    double r_floor, double q) const;
    double log_segment(const TestFunction &f, const Point &x, double fx, const Point &dir, double a, double b,
                       double alpha, double q, const Domain *reject) const;

    int                     dim_;
    std::vector<SphereNode> sphere_;
    std::vector<double>     v_nodes_, v_weights_;
    GaussRule               panel_;
  };

  /// int_{B(x, delta)} |f(x) - f(y)|^q / |x - y|^{N+sq} dy by the deterministic
  /// rule above. Requires x in domain.
  double inner_integral(const TestFunction &f, const Point &x, double delta, double s, double q,
                        const QuadratureConfig &quad, const Domain &domain);

  struct McEstimate
  {
    double estimate = 0.0;
    double std_error = 0.0;
  };

  /// Monte Carlo estimate of the same integral: radius drawn with density
  /// proportional to r^{q(1-s)-1} on (0, delta) by inverse CDF, direction
  /// uniform on the sphere.
  McEstimate inner_integral_mc(const TestFunction &f, const Point &x, double delta, double s, double q,
                               std::size_t samples, std::uint64_t seed, const Domain &domain);

  struct NodeValue
  {
    double value = 0.0;
    double weight = 0.0;
  };

  /// sum_i weight_i * value_i^{p/q}, compensated, in index order.
  double outer_lp_aggregate(std::span<const NodeValue> values, double p_over_q);

  /// Uniform direction on S^{N-1} from the given engine state.
  Point random_direction(int dim, std::uint64_t &state);

  /// Uniform double in (0, 1] from a splitmix64 state.
  double random_unit(std::uint64_t &state);

} // namespace fracsob

#endif
