#ifndef FRACSOB_RULES_HPP
#define FRACSOB_RULES_HPP

#include <fracsob/point.hpp>

#include <vector>

namespace fracsob
{

  struct GaussRule
  {
    std::vector<double> nodes;
    std::vector<double> weights;
  };

  /// n-point Gauss-Legendre rule on [a, b]; exact for polynomials of degree 2n-1.
  GaussRule gauss_legendre(int n, double a = -1.0, double b = 1.0);

  struct SphereNode
  {
    Point  dir;
    double w = 0.0;
  };

  /// Surface measure of S^{N-1}: 2, 2*pi, 4*pi for N = 1, 2, 3.
  double sphere_measure(int dim);

  /**
   * Quadrature on S^{N-1}.
   *  N = 1: the two points {-1, +1} with unit weights (exact).
   *  N = 2: `order` equispaced angles, offset by half a step; exact for
   *         trigonometric polynomials of degree < order.
   *  N = 3: Gauss-Legendre in cos(theta) with `order` nodes times a
   *         2*order-point trapezoid in phi; exact for spherical polynomials of
   *         degree <= 2*order - 1.
   * Throws std::invalid_argument for N outside [1, 3] or order < 2.
   */
  std::vector<SphereNode> sphere_rule(int dim, int order);

} // namespace fracsob

#endif
