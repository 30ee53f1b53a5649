#include <fracsob/geometry.hpp>
#include <fracsob/rules.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

namespace fracsob
{

  std::string to_string(DomainKind kind)
  {
    switch (kind)
      {
        case DomainKind::ball: return "ball";
        case DomainKind::axis_box: return "axis_box";
        case DomainKind::annulus: return "annulus";
        case DomainKind::half_space: return "half_space";
        case DomainKind::strip: return "strip";
        case DomainKind::slit_disk: return "slit_disk";
        case DomainKind::lattice_complement: return "lattice_complement";
        case DomainKind::polygon2d: return "polygon2d";
        case DomainKind::intersection: return "intersection";
        case DomainKind::complement_restriction: return "complement_restriction";
        case DomainKind::truncation: return "truncation";
      }
    return "unknown";
  }

  double BoundingBox::volume() const
  {
    double v = 1.0;
    for (int i = 0; i < lo.dim(); ++i)
      v *= std::max(0.0, hi[i] - lo[i]);
    return v;
  }

  namespace
  {
    constexpr double inf = std::numeric_limits<double>::infinity();

    double unit_ball_volume(int dim)
    {
      switch (dim)
        {
          case 1: return 2.0;
          case 2: return std::numbers::pi;
          default: return 4.0 / 3.0 * std::numbers::pi;
        }
    }

    BoundingBox box_of(const Ball &b)
    {
      BoundingBox bb{b.center, b.center};
      for (int i = 0; i < b.center.dim(); ++i)
        {
          bb.lo[i] -= b.radius;
          bb.hi[i] += b.radius;
        }
      return bb;
    }

    std::string fmt(double v)
    {
      std::ostringstream os;
      os.precision(17);
      os << v;
      return os.str();
    }

    std::string fmt(const Point &p)
    {
      std::string s = "(";
      for (int i = 0; i < p.dim(); ++i)
        s += (i ? ", " : "") + fmt(p[i]);
      return s + ")";
    }

    /// Distance from x to the segment [a, b] in the plane.
    double segment_distance(const Point &x, const Point &a, const Point &b)
    {
      const Point  ab = b - a;
      const double len2 = ab.norm2();
      double       t = len2 > 0.0 ? (x - a).dot(ab) / len2 : 0.0;
      t = std::clamp(t, 0.0, 1.0);
      return (x - along(a, ab, t)).norm();
    }
  } // namespace

  namespace internal
  {
    class Shape
    {
    public:
      virtual ~Shape() = default;

      virtual DomainKind  kind() const = 0;
      virtual int         dim() const = 0;
      virtual bool        bounded() const = 0;
      virtual bool        convex() const = 0;
      virtual std::string describe() const = 0;
      virtual double      scale() const = 0;
      virtual double      sd(const Point &x) const = 0;

      virtual bool contains(const Point &x) const { return sd(x) > 0.0; }

      virtual std::optional<Ball> enclosing_ball() const { return std::nullopt; }

      virtual std::optional<BoundingBox> bounding_box() const
      {
        if (auto b = enclosing_ball())
          return box_of(*b);
        return std::nullopt;
      }

      virtual std::optional<double> measure() const { return std::nullopt; }

      /// Sphere tracing followed by bisection; the default for kinds without
      /// a closed-form ray intersection.
      virtual double ray_exit(const Point &x, const Point &dir) const
      {
        const double tol = 1e-13 * scale();
        double       limit = 1e6 * scale();
        if (auto b = enclosing_ball())
          limit = (x - b->center).norm() + b->radius + scale();

        double t = 0.0;
        for (int it = 0; it < 100000; ++it)
          {
            const Point  y = along(x, dir, t);
            const double d = sd(y);
            if (!contains(y) || d <= tol)
              return refine_exit(x, dir, t);
            t += d;
            if (t > limit)
              return inf;
          }
        return refine_exit(x, dir, t);
      }

    private:
      // Bisect on membership between the last marched point and a point just
      // beyond it, so thin excluded sets (slits) are located exactly.
      double refine_exit(const Point &x, const Point &dir, double t) const
      {
        double lo = 0.0, hi = t + 2e-13 * scale();
        if (contains(along(x, dir, hi)))
          {
            // marched onto the boundary from inside: step until outside
            double step = 1e-13 * scale();
            while (contains(along(x, dir, hi)) && step < scale())
              {
                hi += step;
                step *= 2.0;
              }
          }
        lo = std::max(0.0, std::min(t, hi) - 1e-12 * scale());
        while (lo > 0.0 && !contains(along(x, dir, lo)))
          lo *= 0.5;
        for (int i = 0; i < 200 && hi - lo > 1e-15 * scale(); ++i)
          {
            const double m = 0.5 * (lo + hi);
            (contains(along(x, dir, m)) ? lo : hi) = m;
          }
        return 0.5 * (lo + hi);
      }
    };

    class BallShape final : public Shape
    {
    public:
      BallShape(Point c, double r) : c_(c), r_(r) {}
      DomainKind  kind() const override { return DomainKind::ball; }
      int         dim() const override { return c_.dim(); }
      bool        bounded() const override { return true; }
      bool        convex() const override { return true; }
      std::string describe() const override { return "ball(center=" + fmt(c_) + ", radius=" + fmt(r_) + ")"; }
      double      scale() const override { return r_; }
      double      sd(const Point &x) const override { return r_ - (x - c_).norm(); }
      std::optional<Ball>   enclosing_ball() const override { return Ball{c_, r_}; }
      std::optional<double> measure() const override { return unit_ball_volume(dim()) * std::pow(r_, dim()); }
      double ray_exit(const Point &x, const Point &dir) const override
      {
        const Point  v = x - c_;
        const double b = v.dot(dir);
        const double cc = v.norm2() - r_ * r_;
        return -b + std::sqrt(std::max(0.0, b * b - cc));
      }

    private:
      Point  c_;
      double r_;
    };

    class BoxShape final : public Shape
    {
    public:
      BoxShape(Point lo, Point hi) : lo_(lo), hi_(hi) {}
      DomainKind  kind() const override { return DomainKind::axis_box; }
      int         dim() const override { return lo_.dim(); }
      bool        bounded() const override { return true; }
      bool        convex() const override { return true; }
      std::string describe() const override { return "axis_box(lo=" + fmt(lo_) + ", hi=" + fmt(hi_) + ")"; }
      double      scale() const override
      {
        double s = 0.0;
        for (int i = 0; i < dim(); ++i)
          s = std::max(s, hi_[i] - lo_[i]);
        return s;
      }
      double sd(const Point &x) const override
      {
        // standard exact box SDF, sign flipped to positive inside
        double outside2 = 0.0, inside = -inf;
        for (int i = 0; i < dim(); ++i)
          {
            const double c = 0.5 * (lo_[i] + hi_[i]);
            const double h = 0.5 * (hi_[i] - lo_[i]);
            const double q = std::abs(x[i] - c) - h;
            outside2 += std::max(q, 0.0) * std::max(q, 0.0);
            inside = std::max(inside, q);
          }
        return -(std::sqrt(outside2) + std::min(inside, 0.0));
      }
      std::optional<Ball> enclosing_ball() const override
      {
        const Point c = 0.5 * (lo_ + hi_);
        return Ball{c, (hi_ - c).norm()};
      }
      std::optional<BoundingBox> bounding_box() const override { return BoundingBox{lo_, hi_}; }
      std::optional<double>      measure() const override { return BoundingBox{lo_, hi_}.volume(); }
      double ray_exit(const Point &x, const Point &dir) const override
      {
        double t = inf;
        for (int i = 0; i < dim(); ++i)
          {
            if (dir[i] > 0.0)
              t = std::min(t, (hi_[i] - x[i]) / dir[i]);
            else if (dir[i] < 0.0)
              t = std::min(t, (lo_[i] - x[i]) / dir[i]);
          }
        return t;
      }

    private:
      Point lo_, hi_;
    };

    class AnnulusShape final : public Shape
    {
    public:
      AnnulusShape(Point c, double rin, double rout) : c_(c), rin_(rin), rout_(rout) {}
      DomainKind  kind() const override { return DomainKind::annulus; }
      int         dim() const override { return c_.dim(); }
      bool        bounded() const override { return true; }
      bool        convex() const override { return false; }
      std::string describe() const override
      {
        return "annulus(center=" + fmt(c_) + ", r_in=" + fmt(rin_) + ", r_out=" + fmt(rout_) + ")";
      }
      double scale() const override { return rout_; }
      double sd(const Point &x) const override
      {
        const double r = (x - c_).norm();
        return std::min(r - rin_, rout_ - r);
      }
      std::optional<Ball>   enclosing_ball() const override { return Ball{c_, rout_}; }
      std::optional<double> measure() const override
      {
        return unit_ball_volume(dim()) * (std::pow(rout_, dim()) - std::pow(rin_, dim()));
      }

    private:
      Point  c_;
      double rin_, rout_;
    };

    class HalfSpaceShape final : public Shape
    {
    public:
      HalfSpaceShape(Point n, double off) : n_(n), off_(off) {}
      DomainKind  kind() const override { return DomainKind::half_space; }
      int         dim() const override { return n_.dim(); }
      bool        bounded() const override { return false; }
      bool        convex() const override { return true; }
      std::string describe() const override { return "half_space(normal=" + fmt(n_) + ", offset=" + fmt(off_) + ")"; }
      double      scale() const override { return 1.0; }
      double      sd(const Point &x) const override { return n_.dot(x) - off_; }
      double      ray_exit(const Point &x, const Point &dir) const override
      {
        const double nd = n_.dot(dir);
        return nd < 0.0 ? sd(x) / -nd : inf;
      }

    private:
      Point  n_;
      double off_;
    };

    class StripShape final : public Shape
    {
    public:
      StripShape(int dim, int axis, double hw) : dim_(dim), axis_(axis), hw_(hw) {}
      DomainKind  kind() const override { return DomainKind::strip; }
      int         dim() const override { return dim_; }
      bool        bounded() const override { return false; }
      bool        convex() const override { return true; }
      std::string describe() const override
      {
        return "strip(dim=" + std::to_string(dim_) + ", axis=" + std::to_string(axis_) +
               ", half_width=" + fmt(hw_) + ")";
      }
      double scale() const override { return hw_; }
      double sd(const Point &x) const override { return hw_ - std::abs(x[axis_]); }
      double ray_exit(const Point &x, const Point &dir) const override
      {
        const double v = dir[axis_];
        if (v > 0.0)
          return (hw_ - x[axis_]) / v;
        if (v < 0.0)
          return (-hw_ - x[axis_]) / v;
        return inf;
      }

    private:
      int    dim_, axis_;
      double hw_;
    };

    class SlitDiskShape final : public Shape
    {
    public:
      SlitDiskShape(double r, double angle)
        : r_(r), angle_(angle), tip_{r * std::cos(angle), r * std::sin(angle)}
      {}
      DomainKind  kind() const override { return DomainKind::slit_disk; }
      int         dim() const override { return 2; }
      bool        bounded() const override { return true; }
      bool        convex() const override { return false; }
      std::string describe() const override { return "slit_disk(radius=" + fmt(r_) + ", slit_angle=" + fmt(angle_) + ")"; }
      double      scale() const override { return r_; }
      double      sd(const Point &x) const override
      {
        const double rho = x.norm();
        if (rho >= r_)
          return r_ - rho;
        return std::min(r_ - rho, segment_distance(x, Point{0.0, 0.0}, tip_));
      }
      std::optional<Ball>   enclosing_ball() const override { return Ball{Point{0.0, 0.0}, r_}; }
      std::optional<double> measure() const override { return std::numbers::pi * r_ * r_; }

    private:
      double r_, angle_;
      Point  tip_;
    };

    class LatticeShape final : public Shape
    {
    public:
      LatticeShape(int dim, double h) : dim_(dim), h_(h) {}
      DomainKind  kind() const override { return DomainKind::lattice_complement; }
      int         dim() const override { return dim_; }
      bool        bounded() const override { return false; }
      bool        convex() const override { return false; }
      std::string describe() const override
      {
        return "lattice_complement(dim=" + std::to_string(dim_) + ", spacing=" + fmt(h_) + ")";
      }
      double scale() const override { return h_; }
      double sd(const Point &x) const override
      {
        double s = 0.0;
        for (int i = 0; i < dim_; ++i)
          {
            const double d = x[i] - h_ * std::round(x[i] / h_);
            s += d * d;
          }
        return std::sqrt(s);
      }

    private:
      int    dim_;
      double h_;
    };

    class PolygonShape final : public Shape
    {
    public:
      explicit PolygonShape(std::vector<Point> v) : v_(std::move(v))
      {
        double area2 = 0.0;
        int    pos = 0, neg = 0;
        const std::size_t n = v_.size();
        for (std::size_t i = 0; i < n; ++i)
          {
            const Point &a = v_[i], &b = v_[(i + 1) % n], &c = v_[(i + 2) % n];
            area2 += a[0] * b[1] - b[0] * a[1];
            const double cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]);
            if (cross > 0.0)
              ++pos;
            else if (cross < 0.0)
              ++neg;
          }
        area_ = 0.5 * std::abs(area2);
        convex_ = (pos == 0 || neg == 0);

        Point lo = v_[0], hi = v_[0];
        for (const Point &p : v_)
          for (int i = 0; i < 2; ++i)
            {
              lo[i] = std::min(lo[i], p[i]);
              hi[i] = std::max(hi[i], p[i]);
            }
        box_ = BoundingBox{lo, hi};
      }
      DomainKind  kind() const override { return DomainKind::polygon2d; }
      int         dim() const override { return 2; }
      bool        bounded() const override { return true; }
      bool        convex() const override { return convex_; }
      std::string describe() const override
      {
        std::string s = "polygon2d(";
        for (std::size_t i = 0; i < v_.size(); ++i)
          s += (i ? ", " : "") + fmt(v_[i]);
        return s + ")";
      }
      double scale() const override { return std::max(box_.hi[0] - box_.lo[0], box_.hi[1] - box_.lo[1]); }
      double sd(const Point &x) const override
      {
        double       d = inf;
        bool         inside = false;
        const std::size_t n = v_.size();
        for (std::size_t i = 0, j = n - 1; i < n; j = i++)
          {
            const Point &a = v_[i], &b = v_[j];
            d = std::min(d, segment_distance(x, a, b));
            if ((a[1] > x[1]) != (b[1] > x[1]) &&
                x[0] < (b[0] - a[0]) * (x[1] - a[1]) / (b[1] - a[1]) + a[0])
              inside = !inside;
          }
        return inside ? d : -d;
      }
      std::optional<Ball> enclosing_ball() const override
      {
        const Point c = 0.5 * (box_.lo + box_.hi);
        return Ball{c, (box_.hi - c).norm()};
      }
      std::optional<BoundingBox> bounding_box() const override { return box_; }
      std::optional<double>      measure() const override { return area_; }

    private:
      std::vector<Point> v_;
      BoundingBox        box_;
      double             area_ = 0.0;
      bool               convex_ = false;
    };

    class IntersectionShape final : public Shape
    {
    public:
      explicit IntersectionShape(std::vector<std::shared_ptr<const Shape>> parts) : parts_(std::move(parts)) {}
      DomainKind kind() const override { return DomainKind::intersection; }
      int        dim() const override { return parts_.front()->dim(); }
      bool       bounded() const override
      {
        return std::any_of(parts_.begin(), parts_.end(), [](const auto &p) { return p->bounded(); });
      }
      bool convex() const override
      {
        return std::all_of(parts_.begin(), parts_.end(), [](const auto &p) { return p->convex(); });
      }
      std::string describe() const override
      {
        std::string s = "intersection(";
        for (std::size_t i = 0; i < parts_.size(); ++i)
          s += (i ? ", " : "") + parts_[i]->describe();
        return s + ")";
      }
      double scale() const override
      {
        double s = inf;
        for (const auto &p : parts_)
          if (p->bounded())
            s = std::min(s, p->scale());
        return std::isfinite(s) ? s : parts_.front()->scale();
      }
      double sd(const Point &x) const override
      {
        double d = inf;
        for (const auto &p : parts_)
          d = std::min(d, p->sd(x));
        return d;
      }
      bool contains(const Point &x) const override
      {
        return std::all_of(parts_.begin(), parts_.end(), [&](const auto &p) { return p->contains(x); });
      }
      std::optional<Ball> enclosing_ball() const override
      {
        std::optional<Ball> best;
        for (const auto &p : parts_)
          if (auto b = p->enclosing_ball(); b && (!best || b->radius < best->radius))
            best = b;
        return best;
      }
      std::optional<BoundingBox> bounding_box() const override
      {
        std::optional<BoundingBox> box;
        for (const auto &p : parts_)
          if (auto b = p->bounding_box())
            {
              if (!box)
                box = b;
              else
                for (int i = 0; i < dim(); ++i)
                  {
                    box->lo[i] = std::max(box->lo[i], b->lo[i]);
                    box->hi[i] = std::min(box->hi[i], b->hi[i]);
                  }
            }
        return box;
      }
      double ray_exit(const Point &x, const Point &dir) const override
      {
        double t = inf;
        for (const auto &p : parts_)
          t = std::min(t, p->ray_exit(x, dir));
        return t;
      }

    private:
      std::vector<std::shared_ptr<const Shape>> parts_;
    };

    class ComplementShape final : public Shape
    {
    public:
      ComplementShape(std::shared_ptr<const Shape> base, std::shared_ptr<const Shape> excl)
        : base_(std::move(base)), excl_(std::move(excl))
      {}
      DomainKind  kind() const override { return DomainKind::complement_restriction; }
      int         dim() const override { return base_->dim(); }
      bool        bounded() const override { return base_->bounded(); }
      bool        convex() const override { return false; }
      std::string describe() const override
      {
        return "complement_restriction(" + base_->describe() + ", " + excl_->describe() + ")";
      }
      double scale() const override { return base_->scale(); }
      double sd(const Point &x) const override { return std::min(base_->sd(x), -excl_->sd(x)); }
      bool   contains(const Point &x) const override { return base_->contains(x) && excl_->sd(x) < 0.0; }
      std::optional<Ball>        enclosing_ball() const override { return base_->enclosing_ball(); }
      std::optional<BoundingBox> bounding_box() const override { return base_->bounding_box(); }

    private:
      std::shared_ptr<const Shape> base_, excl_;
    };

    class TruncationShape final : public Shape
    {
    public:
      TruncationShape(std::shared_ptr<const Shape> parent, double lambda)
        : parent_(std::move(parent)), lambda_(lambda)
      {}
      DomainKind  kind() const override { return DomainKind::truncation; }
      int         dim() const override { return parent_->dim(); }
      bool        bounded() const override { return true; }
      bool        convex() const override { return parent_->convex(); }
      std::string describe() const override
      {
        return "truncation(" + parent_->describe() + ", lambda=" + fmt(lambda_) + ")";
      }
      double scale() const override { return std::min(parent_->scale(), 1.0 / lambda_); }
      double sd(const Point &x) const override
      {
        return std::min(parent_->sd(x) - lambda_, 1.0 / lambda_ - x.norm());
      }
      bool contains(const Point &x) const override { return parent_->contains(x) && sd(x) > 0.0; }
      std::optional<Ball> enclosing_ball() const override
      {
        Ball cap{Point(dim()), 1.0 / lambda_};
        if (auto b = parent_->enclosing_ball(); b && b->radius < cap.radius)
          return b;
        return cap;
      }
      std::optional<BoundingBox> bounding_box() const override
      {
        BoundingBox box = box_of(Ball{Point(dim()), 1.0 / lambda_});
        if (auto b = parent_->bounding_box())
          for (int i = 0; i < dim(); ++i)
            {
              box.lo[i] = std::max(box.lo[i], b->lo[i]);
              box.hi[i] = std::min(box.hi[i], b->hi[i]);
            }
        return box;
      }

    private:
      std::shared_ptr<const Shape> parent_;
      double                       lambda_;
    };

  } // namespace internal

  namespace
  {
    void require(bool ok, const std::string &msg)
    {
      if (!ok)
        throw std::invalid_argument(msg);
    }
  } // namespace

  Domain Domain::ball(Point center, double radius)
  {
    require(center.dim() >= 1 && center.finite(), "ball: invalid center");
    require(radius > 0.0 && std::isfinite(radius), "ball: radius must be positive");
    return Domain(std::make_shared<internal::BallShape>(center, radius));
  }

  Domain Domain::axis_box(Point lo, Point hi)
  {
    require(lo.dim() == hi.dim() && lo.dim() >= 1, "axis_box: lo/hi dimension mismatch");
    for (int i = 0; i < lo.dim(); ++i)
      require(lo[i] < hi[i], "axis_box: need lo < hi in every coordinate");
    return Domain(std::make_shared<internal::BoxShape>(lo, hi));
  }

  Domain Domain::annulus(Point center, double r_in, double r_out)
  {
    require(r_in >= 0.0 && r_in < r_out, "annulus: need 0 <= r_in < r_out");
    return Domain(std::make_shared<internal::AnnulusShape>(center, r_in, r_out));
  }

  Domain Domain::half_space(Point normal, double offset)
  {
    const double n = normal.norm();
    require(n > 0.0, "half_space: zero normal");
    return Domain(std::make_shared<internal::HalfSpaceShape>(normal * (1.0 / n), offset));
  }

  Domain Domain::strip(int dim, int axis, double half_width)
  {
    require(dim >= 1 && dim <= max_dim, "strip: unsupported dimension");
    require(axis >= 0 && axis < dim, "strip: axis out of range");
    require(half_width > 0.0, "strip: half_width must be positive");
    return Domain(std::make_shared<internal::StripShape>(dim, axis, half_width));
  }

  Domain Domain::slit_disk(double radius, double slit_angle)
  {
    require(radius > 0.0, "slit_disk: radius must be positive");
    return Domain(std::make_shared<internal::SlitDiskShape>(radius, slit_angle));
  }

  Domain Domain::lattice_complement(int dim, double spacing)
  {
    require(dim >= 1 && dim <= max_dim, "lattice_complement: unsupported dimension");
    require(spacing > 0.0, "lattice_complement: spacing must be positive");
    return Domain(std::make_shared<internal::LatticeShape>(dim, spacing));
  }

  Domain Domain::polygon2d(std::vector<Point> vertices)
  {
    require(vertices.size() >= 3, "polygon2d: need at least three vertices");
    for (const Point &p : vertices)
      require(p.dim() == 2, "polygon2d: vertices must be 2-D");
    return Domain(std::make_shared<internal::PolygonShape>(std::move(vertices)));
  }

  Domain Domain::intersection(std::vector<Domain> parts)
  {
    require(!parts.empty(), "intersection: no parts");
    std::vector<std::shared_ptr<const internal::Shape>> shapes;
    for (const Domain &d : parts)
      {
        require(d.dim() == parts.front().dim(), "intersection: dimension mismatch");
        shapes.push_back(d.shape_);
      }
    return Domain(std::make_shared<internal::IntersectionShape>(std::move(shapes)));
  }

  Domain Domain::complement_restriction(Domain base, Domain excluded)
  {
    require(base.dim() == excluded.dim(), "complement_restriction: dimension mismatch");
    return Domain(std::make_shared<internal::ComplementShape>(base.shape_, excluded.shape_));
  }

  Domain Domain::truncation(Domain parent, double lambda)
  {
    require(lambda > 0.0 && std::isfinite(lambda), "truncation: lambda must be positive");
    // Omega_lambda of a ball is again a ball when the 1/lambda cap is inactive.
    if (parent.kind() == DomainKind::ball)
      {
        const auto b = *parent.enclosing_ball();
        if (b.radius > lambda && b.center.norm() + b.radius - lambda <= 1.0 / lambda)
          return Domain::ball(b.center, b.radius - lambda);
      }
    return Domain(std::make_shared<internal::TruncationShape>(parent.shape_, lambda));
  }

  DomainKind  Domain::kind() const { return shape_->kind(); }
  int         Domain::dim() const { return shape_->dim(); }
  bool        Domain::bounded() const { return shape_->bounded(); }
  bool        Domain::convex() const { return shape_->convex(); }
  std::string Domain::describe() const { return shape_->describe(); }
  double      Domain::length_scale() const { return shape_->scale(); }

  void Domain::check_dim(const Point &x) const
  {
    if (x.dim() != dim())
      throw std::invalid_argument("point of dimension " + std::to_string(x.dim()) +
                                  " used with a domain of dimension " + std::to_string(dim()));
  }

  bool Domain::contains(const Point &x) const
  {
    check_dim(x);
    return shape_->contains(x);
  }

  double Domain::signed_distance(const Point &x) const
  {
    check_dim(x);
    return shape_->sd(x);
  }

  double Domain::dist_to_boundary(const Point &x) const
  {
    check_dim(x);
    if (!shape_->contains(x))
      throw std::domain_error("dist_to_boundary: point " + x.str() + " is not in " + describe());
    return shape_->sd(x);
  }

  double Domain::delta(const Point &x, double R, double tau) const
  {
    if (!(tau > 0.0 && tau < 1.0))
      throw std::invalid_argument("delta: tau must lie in (0, 1)");
    if (!(R > 0.0))
      throw std::invalid_argument("delta: R must be positive");
    return std::min(R, tau * dist_to_boundary(x));
  }

  std::optional<Ball>        Domain::enclosing_ball() const { return shape_->enclosing_ball(); }
  std::optional<BoundingBox> Domain::bounding_box() const { return shape_->bounding_box(); }
  std::optional<double>      Domain::measure() const { return shape_->measure(); }

  double Domain::ray_exit(const Point &x, const Point &dir) const
  {
    check_dim(x);
    return shape_->ray_exit(x, dir);
  }

  TruncationSet TruncationSet::by_lambda(Domain parent, double lambda)
  {
    require(lambda > 0.0 && std::isfinite(lambda), "TruncationSet: lambda must be positive");
    return TruncationSet(std::move(parent), lambda);
  }

  TruncationSet TruncationSet::by_index(Domain parent, int i)
  {
    require(i >= 1, "TruncationSet: index must be a positive integer");
    return TruncationSet(std::move(parent), 1.0 / i);
  }

  bool TruncationSet::member(const Point &x) const
  {
    if (!parent_.contains(x))
      return false;
    return parent_.dist_to_boundary(x) > lambda_ && x.norm() < 1.0 / lambda_;
  }

  Domain TruncationSet::as_domain() const { return Domain::truncation(parent_, lambda_); }

  // ---------------------------------------------------------------------------
  // sampling

  std::string to_string(PlanKind kind)
  {
    switch (kind)
      {
        case PlanKind::automatic: return "auto";
        case PlanKind::grid: return "grid";
        case PlanKind::polar: return "polar";
        case PlanKind::monte_carlo: return "mc";
      }
    return "auto";
  }

  PlanKind plan_kind_from_string(const std::string &name)
  {
    if (name == "auto")
      return PlanKind::automatic;
    if (name == "grid")
      return PlanKind::grid;
    if (name == "polar")
      return PlanKind::polar;
    if (name == "mc")
      return PlanKind::monte_carlo;
    throw std::invalid_argument("unknown sampling plan '" + name + "' (expected auto, grid, polar or mc)");
  }

  void SamplingPlan::validate() const
  {
    require(resolution >= 1, "plan: resolution must be positive");
    require(boundary_refine >= 1, "plan: boundary_refine must be positive");
    require(radial >= 1 && angular >= 2, "plan: radial >= 1 and angular >= 2 required");
    require(samples >= 1, "plan: samples must be positive");
    if (truncation_index)
      require(*truncation_index >= 1, "plan: truncation index must be >= 1");
  }

  Domain sampled_region(const Domain &domain, const SamplingPlan &plan)
  {
    if (domain.bounded())
      return domain;
    if (!plan.truncation_index)
      throw std::invalid_argument("unbounded domain " + domain.describe() +
                                  " needs a truncation index in the sampling plan");
    return Domain::intersection(
      {domain, Domain::ball(Point(domain.dim()), static_cast<double>(*plan.truncation_index))});
  }

  namespace
  {
    std::vector<WeightedNode> polar_nodes(const Point &c, double r_in, double r_out, const SamplingPlan &plan)
    {
      const int       n = c.dim();
      const GaussRule radial = gauss_legendre(plan.radial, r_in, r_out);
      const auto      sphere = sphere_rule(n, plan.angular);

      std::vector<WeightedNode> nodes;
      nodes.reserve(radial.nodes.size() * sphere.size());
      for (std::size_t i = 0; i < radial.nodes.size(); ++i)
        {
          const double rho = radial.nodes[i];
          const double wr = radial.weights[i] * std::pow(rho, n - 1);
          for (const auto &s : sphere)
            nodes.push_back({along(c, s.dir, rho), wr * s.w});
        }
      return nodes;
    }

    std::vector<WeightedNode> grid_nodes(const Domain &region, const SamplingPlan &plan)
    {
      const auto box = region.bounding_box();
      if (!box)
        throw std::invalid_argument("grid plan: no bounding box for " + region.describe());
      const int n = region.dim();

      Point h(n);
      double half_diag2 = 0.0;
      for (int i = 0; i < n; ++i)
        {
          h[i] = (box->hi[i] - box->lo[i]) / plan.resolution;
          half_diag2 += 0.25 * h[i] * h[i];
        }
      if (box->volume() <= 0.0)
        return {};
      const double half_diag = std::sqrt(half_diag2);
      double       cell_volume = 1.0;
      for (int i = 0; i < n; ++i)
        cell_volume *= h[i];

      const int   k = plan.boundary_refine;
      std::size_t ncell = 1, nsub = 1;
      for (int i = 0; i < n; ++i)
        {
          ncell *= static_cast<std::size_t>(plan.resolution);
          nsub *= static_cast<std::size_t>(k);
        }
      const double sub_volume = cell_volume / static_cast<double>(nsub);

      std::vector<WeightedNode> nodes;
      for (std::size_t idx = 0; idx < ncell; ++idx)
        {
          Point       c(n);
          std::size_t rest = idx;
          for (int i = 0; i < n; ++i)
            {
              const std::size_t j = rest % plan.resolution;
              rest /= plan.resolution;
              c[i] = box->lo[i] + (j + 0.5) * h[i];
            }
          const double sd = region.signed_distance(c);
          if (sd > half_diag)
            {
              nodes.push_back({c, cell_volume});
              continue;
            }
          if (sd < -half_diag)
            continue;
          for (std::size_t sidx = 0; sidx < nsub; ++sidx)
            {
              Point       y(n);
              std::size_t r2 = sidx;
              for (int i = 0; i < n; ++i)
                {
                  const std::size_t j = r2 % k;
                  r2 /= k;
                  y[i] = c[i] - 0.5 * h[i] + (j + 0.5) * h[i] / k;
                }
              if (region.contains(y))
                nodes.push_back({y, sub_volume});
            }
        }
      return nodes;
    }

    std::vector<WeightedNode> mc_nodes(const Domain &region, const SamplingPlan &plan, std::uint64_t seed)
    {
      const auto box = region.bounding_box();
      if (!box)
        throw std::invalid_argument("mc plan: no bounding box for " + region.describe());
      const int          n = region.dim();
      const double       w = box->volume() / static_cast<double>(plan.samples);
      std::mt19937_64    rng(seed);
      std::vector<WeightedNode> nodes;
      for (std::size_t i = 0; i < plan.samples; ++i)
        {
          Point y(n);
          for (int j = 0; j < n; ++j)
            {
              const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
              y[j] = box->lo[j] + u * (box->hi[j] - box->lo[j]);
            }
          if (region.contains(y))
            nodes.push_back({y, w});
        }
      return nodes;
    }
  } // namespace

  std::vector<WeightedNode> sample_domain(const Domain &domain, const SamplingPlan &plan, std::uint64_t seed)
  {
    plan.validate();
    const Domain region = sampled_region(domain, plan);

    PlanKind kind = plan.kind;
    if (kind == PlanKind::automatic)
      kind = (region.kind() == DomainKind::ball || region.kind() == DomainKind::annulus) ? PlanKind::polar
                                                                                            : PlanKind::grid;

    std::vector<WeightedNode> raw;
    switch (kind)
      {
        case PlanKind::polar:
          {
            const auto b = region.enclosing_ball();
            if (region.kind() == DomainKind::ball)
              raw = polar_nodes(b->center, 0.0, b->radius, plan);
            else if (region.kind() == DomainKind::annulus)
              {
                // sd(center) = -r_in for an annulus
                const double r_in = -region.signed_distance(b->center);
                raw = polar_nodes(b->center, r_in, b->radius, plan);
              }
            else
              throw std::invalid_argument("polar plan requires a ball or annulus, got " + region.describe());
            break;
          }
        case PlanKind::grid:
          raw = grid_nodes(region, plan);
          break;
        case PlanKind::monte_carlo:
          raw = mc_nodes(region, plan, seed);
          break;
        case PlanKind::automatic:
          break;
      }

    // drop points on (or numerically at) the boundary of the original domain
    std::vector<WeightedNode> nodes;
    nodes.reserve(raw.size());
    const double eps = domain.geometric_epsilon();
    for (auto &nd : raw)
      if (domain.contains(nd.x) && domain.signed_distance(nd.x) > eps)
        nodes.push_back(nd);
    return nodes;
  }

} // namespace fracsob
