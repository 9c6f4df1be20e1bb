#pragma once

#include "csur/geometry.hpp"

#include <cstdint>
#include <random>

namespace csur {

/// Uniform double in [0, 1) built from the top 53 bits, identical on every platform.
inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double uniform(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

/// Uniform point in the region's bounding box, rejected until it lies at least
/// `margin` inside every edge.
inline Vec2 random_interior_point(const ConvexRegion& region, std::mt19937_64& rng, double margin = 0.0) {
  Vec2 lo = region.vertices().front();
  Vec2 hi = lo;
  for (const auto& v : region.vertices()) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  for (;;) {
    const Vec2 p(uniform(rng, lo.x(), hi.x()), uniform(rng, lo.y(), hi.y()));
    if (region.min_h(p) > margin) return p;
  }
}

/// n interior points pairwise separated by at least min_separation.
inline Configuration random_configuration(const ConvexRegion& region, std::size_t n, std::mt19937_64& rng,
                                          double margin, double min_separation) {
  Configuration cfg;
  while (cfg.size() < n) {
    const Vec2 p = random_interior_point(region, rng, margin);
    bool ok = true;
    for (const auto& q : cfg) ok = ok && (p - q).norm() >= min_separation;
    if (ok) cfg.push_back(p);
  }
  return cfg;
}

}  // namespace csur
