#ifndef FRACSOB_POINT_HPP
#define FRACSOB_POINT_HPP

#include <array>
#include <cmath>
#include <initializer_list>
#include <stdexcept>
#include <string>

namespace fracsob
{

  /// Largest spatial dimension supported by the engine.
  inline constexpr int max_dim = 3;

  /// A point (or vector) in R^N with N <= 3, stored inline.
  class Point
  {
  public:
    Point() = default;

    explicit Point(int dim) : n_(dim)
    {
      if (dim < 1 || dim > max_dim)
        throw std::invalid_argument("Point: dimension must be in [1, 3], got " +
                                    std::to_string(dim));
    }

    Point(std::initializer_list<double> coords) : Point(static_cast<int>(coords.size()))
    {
      int i = 0;
      for (double c : coords)
        {
          if (!std::isfinite(c))
            throw std::invalid_argument("Point: non-finite coordinate");
          c_[i++] = c;
        }
    }

    static Point unit(int dim, int axis)
    {
      Point p(dim);
      p[axis] = 1.0;
      return p;
    }

    int dim() const { return n_; }

    double &operator[](int i) { return c_[i]; }
    double operator[](int i) const { return c_[i]; }

    double dot(const Point &o) const
    {
      double s = 0.0;
      for (int i = 0; i < n_; ++i)
        s += c_[i] * o.c_[i];
      return s;
    }

    double norm2() const { return dot(*this); }
    double norm() const { return std::sqrt(norm2()); }

    bool finite() const
    {
      for (int i = 0; i < n_; ++i)
        if (!std::isfinite(c_[i]))
          return false;
      return true;
    }

    Point &operator+=(const Point &o)
    {
      for (int i = 0; i < n_; ++i)
        c_[i] += o.c_[i];
      return *this;
    }
    Point &operator-=(const Point &o)
    {
      for (int i = 0; i < n_; ++i)
        c_[i] -= o.c_[i];
      return *this;
    }
    Point &operator*=(double a)
    {
      for (int i = 0; i < n_; ++i)
        c_[i] *= a;
      return *this;
    }

    friend Point operator+(Point a, const Point &b) { return a += b; }
    friend Point operator-(Point a, const Point &b) { return a -= b; }
    friend Point operator*(Point a, double s) { return a *= s; }
    friend Point operator*(double s, Point a) { return a *= s; }

    friend bool operator==(const Point &a, const Point &b)
    {
      if (a.n_ != b.n_)
        return false;
      for (int i = 0; i < a.n_; ++i)
        if (a.c_[i] != b.c_[i])
          return false;
      return true;
    }

    std::string str() const
    {
      std::string s = "(";
      for (int i = 0; i < n_; ++i)
        {
          if (i)
            s += ", ";
          s += std::to_string(c_[i]);
        }
      return s + ")";
    }

  private:
    std::array<double, max_dim> c_{};
    int n_ = 0;
  };

  /// x + t*dir, the workhorse of every ray evaluation.
  inline Point along(const Point &x, const Point &dir, double t)
  {
    Point y = x;
    for (int i = 0; i < x.dim(); ++i)
      y[i] += t * dir[i];
    return y;
  }

} // namespace fracsob

#endif
