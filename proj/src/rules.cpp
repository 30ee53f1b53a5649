#include <fracsob/rules.hpp>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace fracsob
{

  GaussRule gauss_legendre(int n, double a, double b)
  {
    if (n < 1)
      throw std::invalid_argument("gauss_legendre: need at least one node");

    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);

    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);

    // Newton iteration on P_n from the Chebyshev-like initial guess; nodes are
    // symmetric so only half of them are computed.
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i)
      {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it)
          {
            double p0 = 1.0, p1 = 0.0;
            for (int k = 1; k <= n; ++k)
              {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
              }
            dp = n * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16)
              break;
          }
        // recompute derivative at the converged node
        double p0 = 1.0, p1 = 0.0;
        for (int k = 1; k <= n; ++k)
          {
            const double p2 = p1;
            p1 = p0;
            p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
          }
        dp = n * (z * p0 - p1) / (z * z - 1.0);
        const double w = 2.0 / ((1.0 - z * z) * dp * dp);

        rule.nodes[i] = mid - half * z;
        rule.nodes[n - 1 - i] = mid + half * z;
        rule.weights[i] = half * w;
        rule.weights[n - 1 - i] = half * w;
      }
    if (n % 2 == 1)
      rule.nodes[n / 2] = mid;
    return rule;
  }

  double sphere_measure(int dim)
  {
    switch (dim)
      {
        case 1:
          return 2.0;
        case 2:
          return 2.0 * std::numbers::pi;
        case 3:
          return 4.0 * std::numbers::pi;
        default:
          throw std::invalid_argument("sphere_measure: unsupported dimension " +
                                      std::to_string(dim));
      }
  }

  std::vector<SphereNode> sphere_rule(int dim, int order)
  {
    if (order < 2)
      throw std::invalid_argument("sphere_rule: order must be >= 2");

    std::vector<SphereNode> rule;
    switch (dim)
      {
        case 1:
          rule.push_back({Point{-1.0}, 1.0});
          rule.push_back({Point{1.0}, 1.0});
          break;

        case 2:
          {
            const double h = 2.0 * std::numbers::pi / order;
            rule.reserve(order);
            for (int k = 0; k < order; ++k)
              {
                const double theta = (k + 0.5) * h;
                rule.push_back({Point{std::cos(theta), std::sin(theta)}, h});
              }
            break;
          }

        case 3:
          {
            const GaussRule gl = gauss_legendre(order);
            const int       nphi = 2 * order;
            const double    hphi = 2.0 * std::numbers::pi / nphi;
            rule.reserve(static_cast<std::size_t>(order) * nphi);
            for (int i = 0; i < order; ++i)
              {
                const double t = gl.nodes[i];
                const double st = std::sqrt(std::max(0.0, 1.0 - t * t));
                for (int j = 0; j < nphi; ++j)
                  {
                    const double phi = (j + 0.5) * hphi;
                    rule.push_back({Point{t, st * std::cos(phi), st * std::sin(phi)},
                                    gl.weights[i] * hphi});
                  }
              }
            break;
          }

        default:
          throw std::invalid_argument("sphere_rule: unsupported dimension " +
                                      std::to_string(dim));
      }
    return rule;
  }

} // namespace fracsob
