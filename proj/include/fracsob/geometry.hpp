#ifndef FRACSOB_GEOMETRY_HPP
#define FRACSOB_GEOMETRY_HPP

#include <fracsob/point.hpp>

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace fracsob
{

  enum class DomainKind
  {
    ball,
    axis_box,
    annulus,
    half_space,
    strip,
    slit_disk,
    lattice_complement,
    polygon2d,
    intersection,
    complement_restriction,
    truncation
  };

  std::string to_string(DomainKind kind);

  struct Ball
  {
    Point  center;
    double radius = 0.0;
  };

  struct BoundingBox
  {
    Point lo, hi;
    double volume() const;
  };

  namespace internal
  {
    class Shape;
  }

  /**
   * An open set Omega in R^N described by a signed distance function
   * (positive inside, zero on the boundary).
   *
   * Exactness of the interior distance per kind:
   *  - ball, axis_box, annulus, half_space, strip, lattice_complement,
   *    slit_disk, polygon2d: exact Euclidean distance to the boundary.
   *  - truncation {d > lambda} cap B(0, 1/lambda): min of d - lambda (exact
   *    for the superlevel set of a distance function) and 1/lambda - |x|;
   *    exact wherever the nearest boundary point of one part lies in the
   *    closure of the other, a lower bound otherwise.
   *  - intersection, complement_restriction: min of component distances,
   *    same exactness rule. Every min of 1-Lipschitz functions is 1-Lipschitz,
   *    so the Lipschitz property holds for all kinds.
   */
  class Domain
  {
  public:
    static Domain ball(Point center, double radius);
    static Domain axis_box(Point lo, Point hi);
    static Domain annulus(Point center, double r_in, double r_out);
    /// {x : normal . x > offset}; normal is normalised on construction.
    static Domain half_space(Point normal, double offset);
    /// {x : |x[axis]| < half_width}
    static Domain strip(int dim, int axis, double half_width);
    /// Open disk of given radius minus the segment from the origin to the
    /// boundary at angle slit_angle.
    static Domain slit_disk(double radius, double slit_angle);
    /// R^N minus spacing * Z^N.
    static Domain lattice_complement(int dim, double spacing);
    /// Interior of a simple polygon (either orientation).
    static Domain polygon2d(std::vector<Point> vertices);
    static Domain intersection(std::vector<Domain> parts);
    /// base minus the closure of excluded.
    static Domain complement_restriction(Domain base, Domain excluded);
    /// Omega_lambda = {x in parent : dist(x, boundary) > lambda} cap B(0, 1/lambda).
    static Domain truncation(Domain parent, double lambda);

    DomainKind  kind() const;
    int         dim() const;
    bool        bounded() const;
    bool        convex() const;
    std::string describe() const;

    /// Typical size, used to scale geometric tolerances.
    double length_scale() const;

    bool contains(const Point &x) const;

    /// Positive inside, negative outside; magnitude exact per the table above
    /// for interior points.
    double signed_distance(const Point &x) const;

    /// dist(x, boundary); throws std::domain_error if x is not in the domain.
    double dist_to_boundary(const Point &x) const;

    /// min(R, tau * dist(x, boundary)).
    double delta(const Point &x, double R, double tau) const;

    std::optional<Ball>        enclosing_ball() const;
    std::optional<BoundingBox> bounding_box() const;

    /// Closed-form Lebesgue measure when known.
    std::optional<double> measure() const;

    /// Distance from an interior point x along unit direction dir to the first
    /// boundary crossing (infinity if the ray never leaves).
    double ray_exit(const Point &x, const Point &dir) const;

    /// Points with distance below this are treated as boundary points.
    double geometric_epsilon() const { return 1e-12 * length_scale(); }

  private:
    explicit Domain(std::shared_ptr<const internal::Shape> s) : shape_(std::move(s)) {}
    void check_dim(const Point &x) const;

    std::shared_ptr<const internal::Shape> shape_;
  };

  /// Omega_lambda (or Omega_i with lambda = 1/i) viewed as a membership test
  /// on its parent.
  class TruncationSet
  {
  public:
    static TruncationSet by_lambda(Domain parent, double lambda);
    static TruncationSet by_index(Domain parent, int i);

    bool          member(const Point &x) const;
    double        lambda() const { return lambda_; }
    const Domain &parent() const { return parent_; }
    Domain        as_domain() const;

  private:
    TruncationSet(Domain parent, double lambda) : parent_(std::move(parent)), lambda_(lambda) {}

    Domain parent_;
    double lambda_;
  };

  enum class PlanKind
  {
    automatic,
    grid,
    polar,
    monte_carlo
  };

  std::string to_string(PlanKind kind);
  PlanKind    plan_kind_from_string(const std::string &name);

  /// How the outer integral over Omega is discretised.
  struct SamplingPlan
  {
    PlanKind    kind = PlanKind::automatic;
    int         resolution = 64;     ///< grid cells per axis
    int         boundary_refine = 4; ///< sub-cells per axis in boundary cells
    int         radial = 40;         ///< polar: Gauss nodes in radius
    int         angular = 64;        ///< polar: sphere rule order
    std::size_t samples = 100000;    ///< monte_carlo
    /// Required for unbounded domains: integrate over Omega cap B(0, i).
    std::optional<int> truncation_index;

    void validate() const;
  };

  struct WeightedNode
  {
    Point  x;
    double w = 0.0;
  };

  /// The region actually integrated by sample_domain: the domain itself when
  /// bounded, Omega cap B(0, i) for unbounded domains with a truncation index.
  Domain sampled_region(const Domain &domain, const SamplingPlan &plan);

  /**
   * Outer-integral nodes and weights. Deterministic for fixed (plan, seed).
   * Nodes within geometric_epsilon of the boundary are dropped.
   * Throws std::invalid_argument for an unbounded domain without truncation.
   */
  std::vector<WeightedNode> sample_domain(const Domain &domain, const SamplingPlan &plan,
                                          std::uint64_t seed);

} // namespace fracsob

#endif
