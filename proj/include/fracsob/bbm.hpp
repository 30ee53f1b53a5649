#ifndef FRACSOB_BBM_HPP
#define FRACSOB_BBM_HPP

#include <fracsob/seminorms.hpp>

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace fracsob
{

  enum class Verdict
  {
    converged,
    diverging,
    inconclusive
  };

  enum class DetectorVerdict
  {
    bounded_suggests_w1p,
    diverging_suggests_not_w1p,
    inconclusive
  };

  std::string to_string(Verdict v);
  std::string to_string(DetectorVerdict v);

  /// s_k = 1 - 2^{-k} for k = first..last.
  std::vector<double> dyadic_s_sequence(int first = 1, int last = 10);

  /// Thresholds for verdicts. None of them are derived from theory.
  struct StudyOptions
  {
    double tolerance = 0.01;        ///< relative spread of the last two scaled values
    double divergence_factor = 4.0; ///< last/first ratio signalling growth
    double plateau_ratio = 1.25;    ///< detector: last/first ratio compatible with a plateau
    double flatten_tolerance = 0.1; ///< detector: relative size of the last increment
    int    fit_points = 3;          ///< points used by the extrapolation
  };

  struct LinearFit
  {
    double intercept = 0.0; ///< value at 1 - s = 0
    double slope = 0.0;
    double residual = 0.0; ///< RMS misfit relative to max(|intercept|, tiny)
  };

  /// Least-squares line through (1 - s_k, y_k) for the last `points` pairs.
  LinearFit extrapolate_to_one(const std::vector<double> &s, const std::vector<double> &y, int points = 3);

  using Provenance = std::vector<std::pair<std::string, std::string>>;

  Provenance describe_run(const TestFunction &f, const Domain &domain, const SeminormSpec &spec,
                          const QuadratureConfig &quad);

  struct TailMass
  {
    int    i = 0;
    double mass = 0.0;
  };

  struct StudyReport
  {
    std::vector<double>   s_values;
    std::vector<double>   raw_values;    ///< [f]^p
    std::vector<double>   scaled_values; ///< (1-s)^{p/q} [f]^p
    double                extrapolated_limit = 0.0;
    double                fit_residual = 0.0;
    std::optional<double> reference; ///< K(N,p,q) int |grad f|^p
    std::optional<double> relative_error;
    std::vector<TailMass> tail_masses;
    Verdict               verdict = Verdict::inconclusive;
    std::vector<std::string> warnings;
    Provenance               provenance;
  };

  /// (1-s)^{p/q} [f]^p along s_sequence (shared outer nodes), linear
  /// extrapolation in 1 - s, and the reference K int |grad f|^p when f has a
  /// gradient.
  StudyReport convergence_study(const TestFunction &f, const Domain &domain, const SeminormSpec &spec_template,
                                const std::vector<double> &s_sequence, const QuadratureConfig &quad,
                                const StudyOptions &opts = {});

  struct PointwiseReport
  {
    Point               x;
    double              delta = 0.0;
    std::vector<double> s_values;
    std::vector<double> scaled_values; ///< (1-s) * inner integral
    double              target = 0.0;  ///< (C_{N,q}/q) |grad f(x)|^q
    double              extrapolated_limit = 0.0;
    Verdict             verdict = Verdict::inconclusive;
  };

  /// delta_x = min(R, tau dist(x)) from spec (R may be infinite); spec.s is
  /// ignored. Requires an analytic gradient.
  PointwiseReport pointwise_limit_check(const TestFunction &f, const Domain &domain, const Point &x,
                                        const SeminormSpec &spec, const std::vector<double> &s_sequence,
                                        const QuadratureConfig &quad, const StudyOptions &opts = {});

  struct EmbeddingRow
  {
    double                s = 0.0;
    double                lhs = 0.0; ///< (1-s)^{p/q} [f]^p, hat variant
    double                w1p = 0.0; ///< int |grad f|^p on the same nodes
    std::optional<double> rhs;       ///< q <= p: R^{p(1-s)} / q^{p/q} * w1p
    /// q <= p and sq - q + 1 > 0: the same bound keeping the factors
    /// |S^{N-1}|^{p/q} / (sq - q + 1)^{p/q} that arise in its derivation.
    std::optional<double> rhs_with_sphere;
    std::optional<bool>   satisfied;
    double                ratio = 0.0; ///< lhs / w1p (0 when w1p = 0)
  };

  struct EmbeddingReport
  {
    bool                      explicit_constant = true; ///< false for p < q
    std::vector<EmbeddingRow> rows;
    bool                      satisfied = true; ///< every row, or boundedness for p < q
    std::vector<std::string>  warnings;
  };

  /// Checks the explicit bound for q <= p at every s in s_values (default
  /// {spec.s}); for p < q records lhs / int |grad f|^p and asserts that the
  /// last ratio does not exceed plateau_ratio times the largest earlier one
  /// (default s values {0.5, 0.9, 0.99, 0.999}). spec must be the hat variant.
  EmbeddingReport embedding_bound_check(const TestFunction &f, const Domain &domain, const SeminormSpec &spec,
                                        const QuadratureConfig &quad, std::vector<double> s_values = {},
                                        const StudyOptions &opts = {});

  struct DetectorReport
  {
    std::vector<double>      s_values;
    std::vector<double>      values; ///< int ((1-s) inner)^{p/q}
    double                   growth = 0.0; ///< last / first
    DetectorVerdict          verdict = DetectorVerdict::inconclusive;
    std::vector<std::string> notes;
  };

  /// Default s grid of the detector: 1 - 2^{-k}, k = 6..10. The plateau test
  /// compares values near s = 1 only; from s = 1/2 even smooth functions grow
  /// by the factor delta^{-q(1-s)}.
  std::vector<double> detector_s_sequence();

  DetectorReport main2_detector(const TestFunction &f, const Domain &domain, const SeminormSpec &spec_template,
                                const std::vector<double> &s_sequence, const QuadratureConfig &quad,
                                const StudyOptions &opts = {});

  struct TailReport
  {
    double                s = 0.0;
    double                total = 0.0; ///< scaled mass over all outer nodes
    std::vector<TailMass> tails;       ///< scaled mass over Omega \ Omega_{2i}
    int                   truncation_index = 0;
    std::vector<std::string> warnings;
  };

  /// When quad.outer has no truncation index, 2 * max(i) is used for
  /// unbounded domains.
  TailReport tail_mass_diagnostic(const TestFunction &f, const Domain &domain, const SeminormSpec &spec_template,
                                  double s, const std::vector<int> &i_sequence, const QuadratureConfig &quad);

  struct DoubleLimitStage
  {
    double      lambda = 0.0;
    StudyReport study; ///< s-study of (1-s) times the double integral over Omega_lambda
  };

  struct DoubleLimitReport
  {
    std::vector<DoubleLimitStage> stages;
    std::optional<double>         reference; ///< K int_Omega |grad f|^p
    std::optional<double>         relative_error; ///< last stage limit against reference
    bool                          increasing = false; ///< stage limits increase as lambda decreases
  };

  DoubleLimitReport double_limit_study(const TestFunction &f, const Domain &domain, double p,
                                       const std::vector<double> &lambda_sequence,
                                       const std::vector<double> &s_sequence, const QuadratureConfig &quad,
                                       const StudyOptions &opts = {});

} // namespace fracsob

#endif
