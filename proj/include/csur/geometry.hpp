#pragma once

#include "csur/quadrature.hpp"
#include "csur/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace csur {

/// Tag for polygon edges that do not come from a region edge or a bisector.
inline constexpr int kNoTag = std::numeric_limits<int>::min();

/// Region edge j is tagged -1 - j; a bisector with agent i is tagged i.
inline constexpr int region_edge_tag(int j) { return -1 - j; }
inline constexpr bool is_region_edge_tag(int tag) { return tag < 0 && tag != kNoTag; }

/// Convex polygon with counterclockwise vertices. Each edge m (from vertex m to
/// vertex m+1) carries a tag naming the constraint that produced it.
struct ConvexPolygon {
  std::vector<Vec2> vertices;
  std::vector<int> edge_tags;

  bool empty() const { return vertices.size() < 3; }
  std::size_t size() const { return vertices.size(); }

  const Vec2& vertex(std::size_t m) const { return vertices[m % vertices.size()]; }

  double area() const {
    if (empty()) return 0.0;
    double twice = 0.0;
    const Vec2& base = vertices.front();
    for (std::size_t m = 1; m + 1 < vertices.size(); ++m)
      twice += cross2(vertices[m] - base, vertices[m + 1] - base);
    return 0.5 * twice;
  }

  double diameter() const {
    double d = 0.0;
    for (std::size_t i = 0; i < vertices.size(); ++i)
      for (std::size_t j = i + 1; j < vertices.size(); ++j) d = std::max(d, (vertices[i] - vertices[j]).norm());
    return d;
  }

  /// Strict containment with a small inward margin.
  bool contains(const Vec2& p, double margin = 0.0) const {
    if (empty()) return false;
    for (std::size_t m = 0; m < vertices.size(); ++m) {
      const Vec2 e = vertex(m + 1) - vertex(m);
      if (cross2(e, p - vertex(m)) / e.norm() <= margin) return false;
    }
    return true;
  }
};

namespace detail {

/// Removes consecutive vertices closer than tol, merging their edge tags so the
/// surviving vertex keeps the tag of the edge that still has length.
inline void dedup_vertices(ConvexPolygon& poly, double tol) {
  auto& v = poly.vertices;
  auto& t = poly.edge_tags;
  bool changed = true;
  while (changed && v.size() >= 2) {
    changed = false;
    for (std::size_t m = 0; m < v.size(); ++m) {
      const std::size_t next = (m + 1) % v.size();
      if ((v[m] - v[next]).norm() <= tol) {
        // Edge m is degenerate; vertex m inherits the outgoing tag of next.
        t[m] = t[next];
        v.erase(v.begin() + static_cast<std::ptrdiff_t>(next));
        t.erase(t.begin() + static_cast<std::ptrdiff_t>(next));
        changed = true;
        break;
      }
    }
  }
  if (v.size() < 3) {
    v.clear();
    t.clear();
  }
}

}  // namespace detail

/// Returns poly intersected with {w : b - a^T w >= 0}. The new edge created by the
/// cut (if any) carries `tag`. Vertices within 1e-12 x diameter of the line count
/// as inside and are kept unmoved, which makes repeated cuts idempotent.
inline ConvexPolygon halfplane_intersect(const ConvexPolygon& poly, const Vec2& a, double b, int tag = kNoTag) {
  ConvexPolygon out;
  if (poly.empty()) return out;
  const std::size_t n = poly.size();
  const double tol = 1e-12 * poly.diameter() * a.norm();
  out.vertices.reserve(n + 1);
  out.edge_tags.reserve(n + 1);
  for (std::size_t m = 0; m < n; ++m) {
    const Vec2& p = poly.vertices[m];
    const Vec2& q = poly.vertex(m + 1);
    const double sp = b - a.dot(p);
    const double sq = b - a.dot(q);
    const int edge_tag = poly.edge_tags.empty() ? kNoTag : poly.edge_tags[m];
    const bool p_in = sp >= -tol;
    const bool q_in = sq >= -tol;
    if (p_in) {
      out.vertices.push_back(p);
      out.edge_tags.push_back(edge_tag);
      if (!q_in) {
        out.vertices.push_back(p + (sp / (sp - sq)) * (q - p));
        out.edge_tags.push_back(tag);
      }
    } else if (q_in) {
      out.vertices.push_back(p + (sp / (sp - sq)) * (q - p));
      out.edge_tags.push_back(edge_tag);
    }
  }
  detail::dedup_vertices(out, 1e-12 * poly.diameter());
  return out;
}

/// Polygon Omega as half-planes h_j(w) = b_j - a_j^T (w - origin) with |a_j| = 1 and
/// b_j > 0. The public API works in world coordinates; `origin` is the recorded
/// translation that places the half-plane frame's origin inside the region.
class ConvexRegion {
 public:
  struct Edge {
    Vec2 normal;    // a_j, outward unit normal
    double offset;  // b_j, in the origin-shifted frame
  };

  ConvexRegion() = default;

  /// Builds a region from a vertex loop (either orientation). Concave or
  /// collinear-degenerate input raises NonConvex naming the vertex index.
  static ConvexRegion from_vertices(std::vector<Vec2> vertices) {
    if (vertices.size() < 3)
      throw CoverageError(ErrorCode::NonConvex, "region needs at least 3 vertices, got " + std::to_string(vertices.size()));
    for (const auto& v : vertices)
      if (!v.allFinite()) throw CoverageError(ErrorCode::Schema, "region vertex is not finite");

    double twice_area = 0.0;
    for (std::size_t m = 0; m < vertices.size(); ++m)
      twice_area += cross2(vertices[m], vertices[(m + 1) % vertices.size()]);
    bool reversed = false;
    if (twice_area < 0.0) {
      std::reverse(vertices.begin(), vertices.end());
      reversed = true;
    }
    double diam = 0.0;
    for (std::size_t i = 0; i < vertices.size(); ++i)
      for (std::size_t j = i + 1; j < vertices.size(); ++j) diam = std::max(diam, (vertices[i] - vertices[j]).norm());
    if (!(diam > 0.0)) throw CoverageError(ErrorCode::NonConvex, "region has zero extent");

    const std::size_t n = vertices.size();
    for (std::size_t m = 0; m < n; ++m) {
      const Vec2& prev = vertices[(m + n - 1) % n];
      const Vec2& cur = vertices[m];
      const Vec2& next = vertices[(m + 1) % n];
      const double turn = cross2(cur - prev, next - cur);
      const std::size_t original = reversed ? n - 1 - m : m;
      if ((cur - prev).norm() <= 1e-12 * diam)
        throw CoverageError(ErrorCode::NonConvex, "region vertex " + std::to_string(original) + " repeats its predecessor");
      if (turn <= 1e-12 * diam * diam)
        throw CoverageError(ErrorCode::NonConvex, "region vertex " + std::to_string(original) +
                                                      (turn < 0.0 ? " is concave" : " is collinear with its neighbours"));
    }

    ConvexRegion region;
    region.vertices_ = vertices;
    Vec2 mean = Vec2::Zero();
    for (const auto& v : vertices) mean += v;
    region.origin_ = mean / static_cast<double>(n);
    for (std::size_t m = 0; m < n; ++m) {
      const Vec2 e = vertices[(m + 1) % n] - vertices[m];
      const Vec2 normal = Vec2(e.y(), -e.x()).normalized();
      region.edges_.push_back({normal, normal.dot(vertices[m] - region.origin_)});
    }
    region.finish();
    return region;
  }

  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<Vec2>& vertices() const { return vertices_; }
  const Vec2& origin() const { return origin_; }
  std::size_t edge_count() const { return edges_.size(); }

  /// h_j(w) = b_j - a_j^T (w - origin); positive inside.
  double h(std::size_t j, const Vec2& w) const { return edges_[j].offset - edges_[j].normal.dot(w - origin_); }

  double min_h(const Vec2& w) const {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < edges_.size(); ++j) best = std::min(best, h(j, w));
    return best;
  }

  bool strictly_contains(const Vec2& w) const { return min_h(w) > 0.0; }

  /// World-frame half-plane offset: h_j(w) = world_offset(j) - a_j^T w.
  double world_offset(std::size_t j) const { return edges_[j].offset + edges_[j].normal.dot(origin_); }

  double diameter() const { return diameter_; }
  double area() const { return polygon_.area(); }

  /// Region as a tagged polygon; edge tags are region_edge_tag(j).
  const ConvexPolygon& polygon() const { return polygon_; }

  /// Region whose every offset b_j is reduced by eps.
  friend ConvexRegion shrink_region(const ConvexRegion& region, double eps);

 private:
  void finish() {
    polygon_.vertices = vertices_;
    polygon_.edge_tags.clear();
    for (std::size_t j = 0; j < edges_.size(); ++j) polygon_.edge_tags.push_back(region_edge_tag(static_cast<int>(j)));
    diameter_ = polygon_.diameter();
  }

  std::vector<Edge> edges_;
  std::vector<Vec2> vertices_;
  Vec2 origin_ = Vec2::Zero();
  ConvexPolygon polygon_;
  double diameter_ = 0.0;
};

inline ConvexRegion shrink_region(const ConvexRegion& region, double eps) {
  if (!(eps >= 0.0)) throw CoverageError(ErrorCode::InvalidParameter, "shrink distance must be >= 0");
  if (eps == 0.0) return region;
  ConvexRegion out;
  out.origin_ = region.origin_;
  out.edges_ = region.edges_;
  for (auto& e : out.edges_) e.offset -= eps;
  ConvexPolygon poly = region.polygon_;
  for (std::size_t j = 0; j < out.edges_.size(); ++j)
    poly = halfplane_intersect(poly, out.edges_[j].normal, out.world_offset(j), region_edge_tag(static_cast<int>(j)));
  const double scale = region.diameter_;
  if (poly.empty() || poly.area() <= 1e-18 * scale * scale)
    throw CoverageError(ErrorCode::EmptyRegion, "shrinking by " + std::to_string(eps) + " leaves no interior");
  out.polygon_ = std::move(poly);
  out.vertices_ = out.polygon_.vertices;
  out.diameter_ = out.polygon_.diameter();
  return out;
}

/// Event density Phi: uniform, or a Gaussian bump over a positive floor.
class DensityField {
 public:
  enum class Kind { Uniform, GaussianBump };

  static DensityField uniform(double value = 1.0) {
    if (!(value > 0.0)) throw CoverageError(ErrorCode::InvalidParameter, "uniform density must be positive");
    DensityField d;
    d.scale_ = value;
    return d;
  }

  static DensityField gaussian_bump(const Vec2& center, double width, double floor, double scale = 1.0) {
    if (!(width > 0.0) || !(floor > 0.0) || !(scale > 0.0))
      throw CoverageError(ErrorCode::InvalidParameter, "gaussian density needs width > 0, floor > 0, scale > 0");
    DensityField d;
    d.kind_ = Kind::GaussianBump;
    d.center_ = center;
    d.width_ = width;
    d.floor_ = floor;
    d.scale_ = scale;
    return d;
  }

  double operator()(const Vec2& w) const {
    if (kind_ == Kind::Uniform) return scale_;
    return scale_ * (floor_ + std::exp(-(w - center_).squaredNorm() / (2.0 * width_ * width_)));
  }

  /// Same field multiplied by c > 0.
  DensityField scaled(double c) const {
    DensityField d = *this;
    d.scale_ *= c;
    return d;
  }

  Kind kind() const { return kind_; }
  bool is_uniform() const { return kind_ == Kind::Uniform; }
  double scale() const { return scale_; }
  const Vec2& center() const { return center_; }
  double width() const { return width_; }
  double floor() const { return floor_; }

  bool operator==(const DensityField&) const = default;

 private:
  Kind kind_ = Kind::Uniform;
  double scale_ = 1.0;
  Vec2 center_ = Vec2::Zero();
  double width_ = 1.0;
  double floor_ = 1.0;
};

struct Moments {
  double mass = 0.0;
  Vec2 centroid = Vec2::Zero();
};

inline Vec2 vertex_mean(const ConvexPolygon& poly) {
  Vec2 mean = Vec2::Zero();
  for (const auto& v : poly.vertices) mean += v;
  return mean / static_cast<double>(poly.size());
}

/// Mass and centroid of poly under phi. Uniform density uses the closed-form
/// shoelace sums; otherwise a fan about the vertex mean with the adaptive degree-7 rule.
inline Moments polygon_moments(const ConvexPolygon& poly, const DensityField& phi) {
  if (poly.empty()) throw CoverageError(ErrorCode::DegenerateCell, "moments of an empty polygon");
  Moments out;
  const std::size_t n = poly.size();
  if (phi.is_uniform()) {
    const Vec2& base = poly.vertices.front();
    double twice_area = 0.0;
    Vec2 first = Vec2::Zero();
    for (std::size_t m = 0; m < n; ++m) {
      const Vec2 p = poly.vertices[m] - base;
      const Vec2 q = poly.vertex(m + 1) - base;
      const double c = cross2(p, q);
      twice_area += c;
      first += (p + q) * c;
    }
    if (!(twice_area > 0.0)) throw CoverageError(ErrorCode::DegenerateCell, "polygon has zero area");
    out.mass = 0.5 * twice_area * phi.scale();
    out.centroid = base + first / (3.0 * twice_area);
    return out;
  }
  const Vec2 hub = vertex_mean(poly);
  Eigen::Vector3d acc = Eigen::Vector3d::Zero();
  for (std::size_t m = 0; m < n; ++m)
    acc += quadrature::integrate_triangle_adaptive(hub, poly.vertices[m], poly.vertex(m + 1),
                                                   [&](const Vec2& w) -> Eigen::Vector3d {
                                                     const double f = phi(w);
                                                     return {f, (w.x() - hub.x()) * f, (w.y() - hub.y()) * f};
                                                   });
  const double mass = acc[0];
  if (!(mass > 0.0)) throw CoverageError(ErrorCode::DegenerateCell, "polygon has zero mass");
  out.mass = mass;
  out.centroid = hub + acc.tail<2>() / mass;
  return out;
}

/// Integral of |w - p|^2 Phi(w) over poly.
inline double polar_moment(const ConvexPolygon& poly, const DensityField& phi, const Vec2& p) {
  if (poly.empty()) return 0.0;
  const std::size_t n = poly.size();
  double acc = 0.0;
  if (phi.is_uniform()) {
    // Fan from vertex 0; exact for quadratics: A/6 (|a|^2+|b|^2+|c|^2 + a.b + b.c + c.a).
    const Vec2 a = poly.vertices.front() - p;
    for (std::size_t m = 1; m + 1 < n; ++m) {
      const Vec2 b = poly.vertices[m] - p;
      const Vec2 c = poly.vertices[m + 1] - p;
      const double area = 0.5 * cross2(b - a, c - a);
      acc += area / 6.0 * (a.squaredNorm() + b.squaredNorm() + c.squaredNorm() + a.dot(b) + b.dot(c) + c.dot(a));
    }
    return acc * phi.scale();
  }
  const Vec2 hub = vertex_mean(poly);
  for (std::size_t m = 0; m < n; ++m)
    acc += quadrature::integrate_triangle_adaptive(hub, poly.vertices[m], poly.vertex(m + 1),
                                          [&](const Vec2& w) { return (w - p).squaredNorm() * phi(w); });
  return acc;
}

/// Boundary integrals over a shared Voronoi edge:
///   D = int (w - z_k) w^T / |z_k - z_i| Phi ds,   P = int (w - z_k) / |z_k - z_i| Phi ds.
struct EdgeKernel {
  Mat2 D = Mat2::Zero();
  Vec2 P = Vec2::Zero();
};

struct Segment {
  Vec2 p = Vec2::Zero();
  Vec2 q = Vec2::Zero();

  double length() const { return (q - p).norm(); }
};

inline EdgeKernel edge_kernel(const Segment& seg, const Vec2& z_k, const Vec2& z_i, const DensityField& phi) {
  const double separation = (z_k - z_i).norm();
  if (!(separation > 0.0)) throw CoverageError(ErrorCode::CoincidentAgents, "edge kernel with coincident agents");
  EdgeKernel out;
  if (seg.length() == 0.0) return out;

  const Vec2 normal = (z_i - z_k) / separation;
  const Vec2 mid = 0.5 * (z_k + z_i);
  const double tol = 1e-9 * std::max(separation, seg.length());
  if (std::abs(normal.dot(seg.p - mid)) > tol || std::abs(normal.dot(seg.q - mid)) > tol)
    throw CoverageError(ErrorCode::InvalidParameter, "segment is not on the bisector of the two agents");

  out.P = quadrature::integrate_segment(seg.p, seg.q, [&](const Vec2& w) -> Vec2 { return (w - z_k) * phi(w); }) /
          separation;
  out.D = quadrature::integrate_segment(seg.p, seg.q,
                                        [&](const Vec2& w) -> Mat2 { return (w - z_k) * w.transpose() * phi(w); }) /
          separation;
  return out;
}

/// int_seg (w - z_k)(w - c)^T / |z_k - z_i| Phi ds, i.e. D - P c^T, evaluated
/// without forming the translation-dependent D.
inline Mat2 centered_edge_kernel(const Segment& seg, const Vec2& z_k, const Vec2& z_i, const Vec2& c,
                                 const DensityField& phi) {
  const double separation = (z_k - z_i).norm();
  if (!(separation > 0.0)) throw CoverageError(ErrorCode::CoincidentAgents, "edge kernel with coincident agents");
  if (seg.length() == 0.0) return Mat2::Zero();
  return quadrature::integrate_segment(seg.p, seg.q,
                                       [&](const Vec2& w) -> Mat2 { return (w - z_k) * (w - c).transpose() * phi(w); }) /
         separation;
}

}  // namespace csur
