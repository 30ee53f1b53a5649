#ifndef FRACSOB_QUADRATURE_CONFIG_HPP
#define FRACSOB_QUADRATURE_CONFIG_HPP

#include <fracsob/geometry.hpp>

#include <cstdint>

namespace fracsob
{

  /// Discretisation parameters shared by every integral in the engine.
  struct QuadratureConfig
  {
    int           sphere_order = 64; ///< angular rule order (see sphere_rule)
    int           radial_nodes = 6;  ///< Gauss nodes per radial panel
    int           radial_levels = 40; ///< geometrically graded radial panels
    SamplingPlan  outer;              ///< outer-integral plan
    std::size_t   mc_samples = 200000;
    std::uint64_t seed = 0;
    double        rel_tol = 1e-3;
    int           threads = 0; ///< 0: hardware concurrency

    void validate() const;
  };

} // namespace fracsob

#endif
