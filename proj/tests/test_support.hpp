#pragma once

#include "csur/oracles.hpp"

#include <random>

namespace csur::testing {

inline ConvexRegion rectangle(double w, double h) {
  return ConvexRegion::from_vertices({{0, 0}, {w, 0}, {w, h}, {0, h}});
}

inline ConvexRegion unit_square() { return rectangle(1.0, 1.0); }

inline ConvexPolygon square_polygon() { return unit_square().polygon(); }

/// Six agents in the 4 x 2.8 rectangle, kept away from the boundary and each other
/// so that central differences at step 1e-6 never cross a topology change.
inline Configuration random_six(std::mt19937_64& rng) {
  return random_configuration(rectangle(4.0, 2.8), 6, rng, 0.15, 0.3);
}

}  // namespace csur::testing
