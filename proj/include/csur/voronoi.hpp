#pragma once

#include "csur/geometry.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

namespace csur {

/// Voronoi cells of a configuration clipped to the region.
struct VoronoiPartition {
  Configuration centers;
  std::vector<ConvexPolygon> cells;
  /// Shared boundary of cells (i, k), keyed with i < k.
  std::map<std::pair<int, int>, Segment> shared_edges;
  /// Sorted neighbour lists; adjacency[k] never contains k.
  std::vector<std::vector<int>> adjacency;
  /// Length below which a common boundary does not count as shared.
  double edge_tolerance = 0.0;

  std::size_t size() const { return cells.size(); }

  const Segment* shared_edge(int i, int k) const {
    const auto it = shared_edges.find(std::minmax(i, k));
    return it == shared_edges.end() ? nullptr : &it->second;
  }

  bool adjacent(int i, int k) const { return i != k && shared_edge(i, k) != nullptr; }
};

/// Per-cell mass M_k and centroid C_k.
struct CellMoments {
  std::vector<double> mass;
  std::vector<Vec2> centroid;

  std::size_t size() const { return mass.size(); }
};

/// Checks distinctness (beyond 1e-9 x region diameter) and strict interiority.
inline void validate_configuration(const ConvexRegion& region, const Configuration& cfg) {
  if (cfg.empty()) throw CoverageError(ErrorCode::InvalidParameter, "configuration has no agents");
  const double tol = 1e-9 * region.diameter();
  for (std::size_t k = 0; k < cfg.size(); ++k) {
    if (!cfg[k].allFinite())
      throw CoverageError(ErrorCode::OutOfRegion, "agent " + std::to_string(k) + " has a non-finite position");
    if (!region.strictly_contains(cfg[k]))
      throw CoverageError(ErrorCode::OutOfRegion, "agent " + std::to_string(k) + " is not strictly inside the region");
  }
  for (std::size_t i = 0; i < cfg.size(); ++i)
    for (std::size_t k = i + 1; k < cfg.size(); ++k)
      if ((cfg[i] - cfg[k]).norm() <= tol)
        throw CoverageError(ErrorCode::CoincidentAgents,
                            "agents " + std::to_string(i) + " and " + std::to_string(k) + " coincide");
}

namespace detail {

/// Supporting line a^T w = b of a cell edge with the given tag.
inline std::pair<Vec2, double> edge_line(const ConvexRegion& region, const Configuration& cfg, int k, int tag) {
  if (is_region_edge_tag(tag)) {
    const auto j = static_cast<std::size_t>(-1 - tag);
    return {region.edges()[j].normal, region.world_offset(j)};
  }
  const Vec2& zk = cfg[static_cast<std::size_t>(k)];
  const Vec2& zi = cfg[static_cast<std::size_t>(tag)];
  const Vec2 a = (zi - zk) / (zi - zk).norm();
  return {a, a.dot(0.5 * (zi + zk))};
}

/// Recomputes every clipped vertex from its two supporting lines, so the cell no
/// longer depends on the order of the cuts (nor on agents whose bisectors missed it).
inline void canonicalize_vertices(ConvexPolygon& cell, const ConvexRegion& region, const Configuration& cfg, int k) {
  const std::size_t n = cell.size();
  if (n < 3) return;
  const double tol = 1e-9 * region.diameter();
  for (std::size_t m = 0; m < n; ++m) {
    const int t1 = cell.edge_tags[(m + n - 1) % n];
    const int t2 = cell.edge_tags[m];
    if (is_region_edge_tag(t1) && is_region_edge_tag(t2)) continue;  // an original region vertex
    if (t1 == kNoTag || t2 == kNoTag || t1 == t2) continue;
    const auto [a1, b1] = edge_line(region, cfg, k, t1);
    const auto [a2, b2] = edge_line(region, cfg, k, t2);
    const double det = a1.x() * a2.y() - a1.y() * a2.x();
    if (std::abs(det) < 1e-9) continue;
    const Vec2 w((b1 * a2.y() - b2 * a1.y()) / det, (a1.x() * b2 - a2.x() * b1) / det);
    if ((w - cell.vertices[m]).norm() <= tol) cell.vertices[m] = w;
  }
}

/// Cell of agent k: the region clipped by every bisector half-plane that can reach it.
inline ConvexPolygon voronoi_cell(const ConvexRegion& region, const Configuration& cfg, int k) {
  const Vec2& zk = cfg[static_cast<std::size_t>(k)];
  std::vector<int> order(cfg.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const double da = (cfg[static_cast<std::size_t>(a)] - zk).squaredNorm();
    const double db = (cfg[static_cast<std::size_t>(b)] - zk).squaredNorm();
    return da != db ? da < db : a < b;
  });

  ConvexPolygon cell = region.polygon();
  double reach = 0.0;
  for (const auto& v : cell.vertices) reach = std::max(reach, (v - zk).norm());
  for (int i : order) {
    if (i == k) continue;
    const Vec2& zi = cfg[static_cast<std::size_t>(i)];
    const double dist = (zi - zk).norm();
    // Bisectors farther than the cell's circumradius cannot cut it.
    if (dist > 2.0 * reach) break;
    const Vec2 a = (zi - zk) / dist;
    const double b = a.dot(0.5 * (zi + zk));
    cell = halfplane_intersect(cell, a, b, i);
    reach = 0.0;
    for (const auto& v : cell.vertices) reach = std::max(reach, (v - zk).norm());
  }
  canonicalize_vertices(cell, region, cfg, k);
  return cell;
}

}  // namespace detail

inline VoronoiPartition compute_partition(const ConvexRegion& region, const Configuration& cfg) {
  validate_configuration(region, cfg);
  VoronoiPartition part;
  part.centers = cfg;
  part.edge_tolerance = 1e-9 * region.diameter();
  const int n = static_cast<int>(cfg.size());
  part.cells.reserve(cfg.size());
  for (int k = 0; k < n; ++k) part.cells.push_back(detail::voronoi_cell(region, cfg, k));

  part.adjacency.assign(cfg.size(), {});
  for (int k = 0; k < n; ++k) {
    const ConvexPolygon& cell = part.cells[static_cast<std::size_t>(k)];
    if (cell.empty()) throw CoverageError(ErrorCode::DegenerateCell, "cell " + std::to_string(k) + " is empty");
    for (std::size_t m = 0; m < cell.size(); ++m) {
      const int tag = cell.edge_tags[m];
      // The lower-indexed agent owns the segment so both sides integrate the same one.
      if (tag < 0 || tag <= k) continue;
      const Segment seg{cell.vertices[m], cell.vertex(m + 1)};
      if (seg.length() <= part.edge_tolerance) continue;
      part.shared_edges.emplace(std::make_pair(k, tag), seg);
    }
  }
  for (const auto& [key, seg] : part.shared_edges) {
    part.adjacency[static_cast<std::size_t>(key.first)].push_back(key.second);
    part.adjacency[static_cast<std::size_t>(key.second)].push_back(key.first);
  }
  for (auto& adj : part.adjacency) std::sort(adj.begin(), adj.end());
  return part;
}

inline CellMoments cell_moments(const VoronoiPartition& part, const DensityField& phi) {
  CellMoments out;
  out.mass.reserve(part.size());
  out.centroid.reserve(part.size());
  for (std::size_t k = 0; k < part.size(); ++k) {
    const Moments m = polygon_moments(part.cells[k], phi);
    if (!(m.mass > 0.0)) throw CoverageError(ErrorCode::DegenerateCell, "cell " + std::to_string(k) + " has zero mass");
    out.mass.push_back(m.mass);
    out.centroid.push_back(m.centroid);
  }
  return out;
}

/// True iff every agent is within tol of its cell centroid.
inline bool is_loc(const Configuration& cfg, const CellMoments& moments, double tol) {
  if (!(tol > 0.0)) throw CoverageError(ErrorCode::InvalidParameter, "LOC tolerance must be positive");
  for (std::size_t k = 0; k < cfg.size(); ++k)
    if ((cfg[k] - moments.centroid[k]).norm() > tol) return false;
  return true;
}

inline double max_centroid_offset(const Configuration& cfg, const CellMoments& moments) {
  double worst = 0.0;
  for (std::size_t k = 0; k < cfg.size(); ++k) worst = std::max(worst, (cfg[k] - moments.centroid[k]).norm());
  return worst;
}

}  // namespace csur
