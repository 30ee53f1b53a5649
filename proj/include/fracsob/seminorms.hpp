#ifndef FRACSOB_SEMINORMS_HPP
#define FRACSOB_SEMINORMS_HPP

#include <fracsob/geometry.hpp>
#include <fracsob/quadrature.hpp>
#include <fracsob/test_functions.hpp>

#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace fracsob
{

  enum class Variant
  {
    full,  ///< inner integral over all of Omega
    tilde, ///< inner integral over B(x, tau dist(x))
    hat    ///< inner integral over B(x, min(R, tau dist(x)))
  };

  std::string to_string(Variant v);
  Variant     variant_from_string(const std::string &name);

  struct RegimeFlags
  {
    bool a = false; ///< 1 <= q <= p
    bool b = false; ///< 1 < p < q, p <= N, q < Np/(N-p)
    bool c = false; ///< N < p < q

    bool any() const { return a || b || c; }
  };

  RegimeFlags regime_flags(int dim, double p, double q);

  /// Largest s accepted: beyond it r = delta * v^{1/(q(1-s))} underflows for
  /// most of the radial rule.
  constexpr double max_s = 1.0 - 1e-6;

  struct SeminormSpec
  {
    double  s = 0.5;
    double  p = 2.0;
    double  q = 2.0;
    double  tau = 0.5;
    double  R = std::numeric_limits<double>::infinity();
    Variant variant = Variant::tilde;

    /// Throws std::invalid_argument on out-of-range parameters or a hat
    /// spec with infinite R.
    void validate() const;

    RegimeFlags regimes(int dim) const { return regime_flags(dim, p, q); }
    /// Human-readable warnings when no regime flag holds.
    std::vector<std::string> warnings(int dim) const;
  };

  /**
   * Inner integrals at the given outer nodes (one value per node, same order).
   * Nodes are evaluated concurrently; results do not depend on quad.threads.
   */
  std::vector<double> inner_values(const TestFunction &f, const Domain &domain,
                                   const std::vector<WeightedNode> &nodes, const SeminormSpec &spec,
                                   const QuadratureConfig &quad);

  /// [f]^p = int_Omega (inner)^{p/q} dx on explicit nodes.
  double seminorm_p_on(const TestFunction &f, const Domain &domain, const std::vector<WeightedNode> &nodes,
                       const SeminormSpec &spec, const QuadratureConfig &quad);

  /// [f]^p on nodes from quad.outer. The full variant rejects unbounded domains.
  double seminorm_p(const TestFunction &f, const Domain &domain, const SeminormSpec &spec,
                    const QuadratureConfig &quad);

  struct VariantValues
  {
    std::optional<double> full; ///< absent on unbounded domains
    double                tilde = 0.0;
    double                hat = 0.0;
  };

  /// All three variants of the same (s, p, q, tau, R) on shared nodes.
  VariantValues evaluate_variants(const TestFunction &f, const Domain &domain, const SeminormSpec &spec,
                                  const QuadratureConfig &quad);

  /// C_{N,q} = int_{S^{N-1}} |sigma_1|^q dsigma in closed form.
  double sphere_abs_moment(int dim, double q);
  /// The same moment by sphere_rule of the given order.
  double sphere_abs_moment_rule(int dim, double q, int order);
  /// Monte Carlo estimate with uniform directions.
  McEstimate sphere_abs_moment_mc(int dim, double q, std::size_t samples, std::uint64_t seed);

  /// K(N, p, q) = (C_{N,q} / q)^{p/q}. C_{N,q} is evaluated both by a fine
  /// sphere rule and in closed form; std::logic_error if they differ by more
  /// than 1e-6 relative, otherwise the closed form is used.
  double bbm_constant(int dim, double p, double q);

  /// int_Omega (int_{R <= |h| <= tau dist(x)} |f(x+h) - f(x)|^q / |h|^{N+sq} dh)^{p/q} dx
  double annulus_tail_seminorm_p(const TestFunction &f, const Domain &domain, const SeminormSpec &spec,
                                 const QuadratureConfig &quad);

  /// int_{Omega_lambda} int_{Omega_lambda} |f(x) - f(y)|^p / |x - y|^{N+sp} dy dx.
  /// Returns 0 when Omega_lambda is empty at the resolution of quad.outer.
  double leoni_spector_truncated_p(const TestFunction &f, const Domain &domain, double lambda, double s, double p,
                                   const QuadratureConfig &quad);
  /// Same, taking (s, p, q) from a spec; rejects p != q.
  double leoni_spector_truncated_p(const TestFunction &f, const Domain &domain, double lambda,
                                   const SeminormSpec &spec, const QuadratureConfig &quad);

} // namespace fracsob

#endif
