#pragma once

// Independent reference computations used by the test and acceptance suites.
// Nothing here shares a code path with the analytic routines it checks.

#include "csur/coverage.hpp"
#include "csur/sampling.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace csur::oracle {

/// Random convex polygon: sorted angles on a jittered ellipse.
inline ConvexPolygon random_convex_polygon(std::mt19937_64& rng, int max_vertices = 9) {
  const int n = 3 + static_cast<int>(uniform01(rng) * (max_vertices - 2));
  const Vec2 center(uniform(rng, -5.0, 5.0), uniform(rng, -5.0, 5.0));
  const double rx = uniform(rng, 0.5, 3.0);
  const double ry = uniform(rng, 0.5, 3.0);
  std::vector<double> angles(static_cast<std::size_t>(n));
  for (auto& a : angles) a = uniform(rng, 0.0, 2.0 * std::numbers::pi);
  std::sort(angles.begin(), angles.end());
  ConvexPolygon poly;
  for (double a : angles) poly.vertices.push_back(center + Vec2(rx * std::cos(a), ry * std::sin(a)));
  poly.edge_tags.assign(poly.vertices.size(), kNoTag);
  // Points on an ellipse in angular order are in convex position; drop near-duplicates.
  ConvexPolygon cleaned;
  for (std::size_t m = 0; m < poly.size(); ++m) {
    if (!cleaned.vertices.empty() && (poly.vertices[m] - cleaned.vertices.back()).norm() < 1e-3) continue;
    cleaned.vertices.push_back(poly.vertices[m]);
  }
  if (cleaned.vertices.size() >= 2 && (cleaned.vertices.front() - cleaned.vertices.back()).norm() < 1e-3)
    cleaned.vertices.pop_back();
  cleaned.edge_tags.assign(cleaned.vertices.size(), kNoTag);
  return cleaned;
}

/// Closed-form triangle-fan area and centroid, written independently of polygon_moments.
inline Moments fan_moments(const ConvexPolygon& poly) {
  double area = 0.0;
  Vec2 first = Vec2::Zero();
  const Vec2& a = poly.vertices[0];
  for (std::size_t m = 1; m + 1 < poly.size(); ++m) {
    const Vec2& b = poly.vertices[m];
    const Vec2& c = poly.vertices[m + 1];
    const double t = 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
    area += t;
    first += t * (a + b + c) / 3.0;
  }
  return {area, first / area};
}

inline bool inside_ccw(const ConvexPolygon& poly, const Vec2& p) {
  for (std::size_t m = 0; m < poly.size(); ++m)
    if (cross2(poly.vertex(m + 1) - poly.vertex(m), p - poly.vertex(m)) < 0.0) return false;
  return true;
}

/// Monte-Carlo mass and centroid by rejection sampling in the bounding box.
inline Moments monte_carlo_moments(const ConvexPolygon& poly, const DensityField& phi, std::size_t samples,
                                   std::mt19937_64& rng) {
  Vec2 lo = poly.vertices.front();
  Vec2 hi = lo;
  for (const auto& v : poly.vertices) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  const double box = (hi - lo).prod();
  double mass = 0.0;
  Vec2 first = Vec2::Zero();
  for (std::size_t s = 0; s < samples; ++s) {
    const Vec2 p(uniform(rng, lo.x(), hi.x()), uniform(rng, lo.y(), hi.y()));
    if (!inside_ccw(poly, p)) continue;
    const double f = phi(p);
    mass += f;
    first += f * p;
  }
  return {mass * box / static_cast<double>(samples), first / mass};
}

/// Index of the nearest center; -1 if the two nearest are within tie_tol.
inline int nearest_center(const Configuration& cfg, const Vec2& p, double tie_tol) {
  int best = -1;
  double d1 = std::numeric_limits<double>::infinity();
  double d2 = d1;
  for (std::size_t k = 0; k < cfg.size(); ++k) {
    const double d = (cfg[k] - p).norm();
    if (d < d1) {
      d2 = d1;
      d1 = d;
      best = static_cast<int>(k);
    } else if (d < d2) {
      d2 = d;
    }
  }
  return d2 - d1 <= tie_tol ? -1 : best;
}

struct OwnershipCheck {
  std::size_t checked = 0;
  std::size_t ties = 0;
  std::size_t mismatches = 0;
};

/// Cell-centred nx x ny grid over the region's bounding box: each non-tie point's
/// containing cell must be its nearest center.
inline OwnershipCheck grid_ownership(const ConvexRegion& region, const VoronoiPartition& part, int nx, int ny) {
  Vec2 lo = region.vertices().front();
  Vec2 hi = lo;
  for (const auto& v : region.vertices()) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  OwnershipCheck out;
  const double tie = 1e-9 * region.diameter();
  for (int ix = 0; ix < nx; ++ix)
    for (int iy = 0; iy < ny; ++iy) {
      const Vec2 p(lo.x() + (ix + 0.5) * (hi.x() - lo.x()) / nx, lo.y() + (iy + 0.5) * (hi.y() - lo.y()) / ny);
      if (!region.strictly_contains(p)) continue;
      const int owner = nearest_center(part.centers, p, tie);
      if (owner < 0) {
        ++out.ties;
        continue;
      }
      ++out.checked;
      int containing = -1;
      for (std::size_t k = 0; k < part.size(); ++k)
        if (inside_ccw(part.cells[k], p)) {
          containing = static_cast<int>(k);
          break;
        }
      if (containing != owner) ++out.mismatches;
    }
  return out;
}

/// Monte-Carlo estimate of H by brute-force nearest-center assignment.
inline double monte_carlo_H(const ConvexRegion& region, const Configuration& cfg, const DensityField& phi,
                            std::size_t samples, std::mt19937_64& rng) {
  const ConvexPolygon& poly = region.polygon();
  Vec2 lo = poly.vertices.front();
  Vec2 hi = lo;
  for (const auto& v : poly.vertices) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  double acc = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    const Vec2 p(uniform(rng, lo.x(), hi.x()), uniform(rng, lo.y(), hi.y()));
    if (!inside_ccw(poly, p)) continue;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& z : cfg) best = std::min(best, (p - z).squaredNorm());
    acc += 0.5 * best * phi(p);
  }
  return acc * (hi - lo).prod() / static_cast<double>(samples);
}

/// Composite Simpson rule for the edge kernels D and P (samples rounded up to even).
inline EdgeKernel simpson_edge_kernel(const Segment& seg, const Vec2& z_k, const Vec2& z_i, const DensityField& phi,
                                      int samples) {
  EdgeKernel out;
  const int n = samples + samples % 2;
  const double ds = seg.length() / n;
  const double sep = (z_k - z_i).norm();
  for (int s = 0; s <= n; ++s) {
    const double weight = (s == 0 || s == n) ? 1.0 : (s % 2 == 1 ? 4.0 : 2.0);
    const Vec2 w = seg.p + (static_cast<double>(s) / n) * (seg.q - seg.p);
    out.D += weight * (w - z_k) * w.transpose() * phi(w);
    out.P += weight * (w - z_k) * phi(w);
  }
  out.D *= ds / (3.0 * sep);
  out.P *= ds / (3.0 * sep);
  return out;
}

/// Central-difference Jacobian of C_i with respect to z_k in the layout
/// J(d, c) = dC_c / dz_{k,d}.
inline Mat2 fd_centroid_jacobian(const ConvexRegion& region, const DensityField& phi, const Configuration& cfg,
                                 std::size_t k, std::size_t i, double step) {
  Mat2 J;
  for (int d = 0; d < 2; ++d) {
    Configuration plus = cfg;
    Configuration minus = cfg;
    plus[k][d] += step;
    minus[k][d] -= step;
    const Vec2 cp = cell_moments(compute_partition(region, plus), phi).centroid[i];
    const Vec2 cm = cell_moments(compute_partition(region, minus), phi).centroid[i];
    J.row(d) = ((cp - cm) / (2.0 * step)).transpose();
  }
  return J;
}

}  // namespace csur::oracle
