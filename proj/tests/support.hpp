#pragma once

#include <random>

#include "kgp/radial.hpp"
#include "kgp/townes.hpp"

namespace kgp::test {

// Frozen reference values from an independent computation: adaptive DOP853
// shooting (rtol 1e-13) with quadrature carried along the trajectory and the
// K0 tail integrated in closed form.
inline constexpr double kQOrigin = 2.2062008646507;
inline constexpr double kAStar = 11.700896524559;
struct MomentRef {
  double p, m_p, beta, limit;
};
inline constexpr MomentRef kMoments[] = {
    {0.5, 1.2586828801, 0.5895515845, -0.8456395447},
    {1.0, 1.9216734945, 0.7832009451, -1.1287923729},
    {1.5, 4.2606882697, 1.2061585821, -3.5274949022},
};

inline const GridPtr& default_grid() {
  static const GridPtr grid = RadialGrid::make({});
  return grid;
}

inline const GroundStateData& ground_state() {
  static const GroundStateData gs = shoot_q(default_grid());
  return gs;
}

}  // namespace kgp::test
