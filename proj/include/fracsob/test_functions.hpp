#ifndef FRACSOB_TEST_FUNCTIONS_HPP
#define FRACSOB_TEST_FUNCTIONS_HPP

#include <fracsob/geometry.hpp>
#include <fracsob/quadrature_config.hpp>

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace fracsob
{

  enum class Regularity
  {
    linear,
    smooth_w1p,
    lipschitz,
    bv_not_w11,
    not_w1p
  };

  std::string to_string(Regularity r);

  /// Jump-set metadata carried by indicator functions in place of a gradient.
  struct JumpSet
  {
    std::string description;
    /// (N-1)-dimensional measure of the jump set inside a domain, when known.
    std::function<std::optional<double>(const Domain &)> measure_in;
  };

  /**
   * A closed-form scalar field on R^N with optional analytic gradient.
   * Instances are immutable and cheap to copy.
   */
  class TestFunction
  {
  public:
    using Eval = std::function<double(const Point &)>;
    using Grad = std::function<Point(const Point &)>;
    using ExactW1p = std::function<std::optional<double>(const Domain &, double)>;

    TestFunction(std::string name, int dim, Regularity regularity, Eval eval,
                 std::optional<Grad> grad = std::nullopt, ExactW1p exact = {},
                 std::optional<JumpSet> jump = std::nullopt);

    const std::string &name() const { return name_; }
    int                dim() const { return dim_; }
    Regularity         regularity() const { return regularity_; }

    double operator()(const Point &x) const { return eval_(x); }

    bool  has_gradient() const { return grad_.has_value(); }
    Point gradient(const Point &x) const;

    /// Closed-form int_Omega |grad f|^p when known.
    std::optional<double> exact_w1p_seminorm(const Domain &domain, double p) const;

    const std::optional<JumpSet> &jump_set() const { return jump_; }

    /// True for indicator-type functions whose difference quotients are
    /// discontinuous in the radius.
    bool discontinuous() const
    {
      return regularity_ == Regularity::bv_not_w11 || regularity_ == Regularity::not_w1p;
    }

    /// c * f
    TestFunction scaled(double c) const;
    /// x -> f(x - shift)
    TestFunction translated(const Point &shift) const;
    /// x -> f(lambda * x)
    TestFunction dilated(double lambda) const;

  private:
    std::string            name_;
    int                    dim_;
    Regularity             regularity_;
    Eval                   eval_;
    std::optional<Grad>    grad_;
    ExactW1p               exact_;
    std::optional<JumpSet> jump_;
  };

  namespace functions
  {
    /// f(x) = a . x
    TestFunction linear(Point a);
    TestFunction constant(int dim, double value);
    /// amplitude * exp(-|x - center|^2 / (2 width^2))
    TestFunction gaussian(Point center, double width, double amplitude = 1.0);
    /// x1^2 x2 (dimension >= 2)
    TestFunction monomial_x1sq_x2(int dim);
    /// cos(omega |x - center|^2): oscillation modulated by distance to center
    TestFunction radial_wave(Point center, double omega);
    /// |x1|: Lipschitz, gradient jumps across x1 = 0
    TestFunction abs_ridge(int dim);
    /// indicator of {x1 > offset}
    TestFunction halfspace_indicator(int dim, double offset = 0.0);
    /// indicator of B(center, radius)
    TestFunction ball_indicator(Point center, double radius);
    /// sum_{k<terms} base^{-k*holder} cos(base^k x1): truncated Weierstrass-type
    /// series, labelled not_w1p and used only for divergence detection
    TestFunction lacunary(int dim, int terms = 8, double base = 4.0, double holder = 0.5);
  } // namespace functions

  /// The standard catalogue in dimension `dim` (1 <= dim <= 3).
  std::vector<TestFunction> catalog(int dim);

  /// int_Omega |grad f|^p over the outer nodes of quad.outer; falls back to
  /// central differences when no analytic gradient exists.
  double w1p_seminorm(const TestFunction &f, const Domain &domain, double p, const QuadratureConfig &quad);

  /// Same as above on explicit nodes.
  double w1p_seminorm_on(const TestFunction &f, const std::vector<WeightedNode> &nodes, double p);

} // namespace fracsob

#endif
