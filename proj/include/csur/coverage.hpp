#pragma once

#include "csur/voronoi.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace csur {

/// Controller parameters of one agent.
struct AgentParams {
  double gamma = 1.0;                 // input gain
  double delta = 2.0;                 // sigmoid boundary layer
  Mat2 Q = Mat2::Identity();          // off-LOC weight, symmetric positive definite
  std::optional<double> u_bar;        // optional bound on |u| (rad/s)

  bool operator==(const AgentParams&) const = default;
};

using ControlParams = std::vector<AgentParams>;

/// Validates gamma, delta and Q; when u_bar is set also requires (1 + gamma)|omega| <= u_bar.
inline void validate_params(const AgentParams& p, double omega, const std::string& where) {
  if (!(p.gamma > 0.0)) throw CoverageError(ErrorCode::InvalidParameter, where + ".gamma must be > 0");
  if (!(p.delta > 0.0)) throw CoverageError(ErrorCode::InvalidParameter, where + ".delta must be > 0");
  if (!p.Q.allFinite() || std::abs(p.Q(0, 1) - p.Q(1, 0)) > 1e-12)
    throw CoverageError(ErrorCode::InvalidParameter, where + ".Q must be symmetric");
  const Eigen::SelfAdjointEigenSolver<Mat2> eig(p.Q);
  if (!(eig.eigenvalues().minCoeff() > 0.0))
    throw CoverageError(ErrorCode::InvalidParameter, where + ".Q must be positive definite");
  if (p.u_bar && (1.0 + p.gamma) * std::abs(omega) > *p.u_bar)
    throw CoverageError(ErrorCode::InvalidParameter, where + ".u_bar is below (1 + gamma)|omega|");
}

// ---------------------------------------------------------------------------
// Conventional coverage cost

/// H = sum_k 1/2 int_{cell k} |w - z_k|^2 Phi dw.
inline double coverage_cost_H(const Configuration& cfg, const VoronoiPartition& part, const DensityField& phi) {
  double h = 0.0;
  for (std::size_t k = 0; k < cfg.size(); ++k) h += 0.5 * polar_moment(part.cells[k], phi, cfg[k]);
  return h;
}

/// grad_k H = M_k (z_k - C_k).
inline Vec2 conventional_gradient(std::size_t k, const Configuration& cfg, const CellMoments& moments) {
  return moments.mass[k] * (cfg[k] - moments.centroid[k]);
}

// ---------------------------------------------------------------------------
// Off-LOC cost and centroid sensitivities

/// W = 1/2 (z - C)^T Q (z - C).
inline double off_loc_cost(const Vec2& z, const Vec2& c, const Mat2& Q) {
  const Vec2 d = z - c;
  return 0.5 * d.dot(Q * d);
}

/// A shared edge of cell k together with the neighbour across it.
struct NeighbourEdge {
  int id = 0;
  Vec2 z = Vec2::Zero();
  Segment segment;
};

// Jacobian layout: J(d, c) = dC_c / dz_{k,d}, so C(z_k + e) ~ C + J^T e.
//
// Moving z_k translates the bisectors of cell k. Seen from neighbour i the shared
// edge moves with outward normal speed -(w - z_k).e / |z_k - z_i|, so
// J = -int (w - z_k)(w - C_i)^T Phi / |z_k - z_i| ds / M_i. For the own cell every
// shared edge r moves outward at +(w - z_k).e / |z_k - z_r|. Region edges are fixed.

/// grad_k C_i for a neighbour i across `edge`.
inline Mat2 cross_centroid_jacobian(const Vec2& z_k, const NeighbourEdge& edge, const Vec2& c_i, double m_i,
                                    const DensityField& phi) {
  if ((z_k - edge.z).norm() == 0.0)
    throw CoverageError(ErrorCode::CoincidentAgents, "centroid jacobian of coincident agents");
  return -centered_edge_kernel(edge.segment, z_k, edge.z, c_i, phi) / m_i;
}

/// grad_k C_k from the shared edges of cell k.
inline Mat2 own_centroid_jacobian(const Vec2& z_k, const Vec2& c_k, double m_k, const std::vector<NeighbourEdge>& edges,
                                  const DensityField& phi) {
  Mat2 acc = Mat2::Zero();
  for (const auto& e : edges) acc += centered_edge_kernel(e.segment, z_k, e.z, c_k, phi);
  return acc / m_k;
}

/// Shared edges of cell k in adjacency order.
inline std::vector<NeighbourEdge> neighbour_edges(const VoronoiPartition& part, int k) {
  std::vector<NeighbourEdge> out;
  for (int r : part.adjacency[static_cast<std::size_t>(k)])
    out.push_back({r, part.centers[static_cast<std::size_t>(r)], *part.shared_edge(k, r)});
  return out;
}

/// grad_k C_i; exact zero when i is neither k nor adjacent to k.
inline Mat2 centroid_jacobian(const VoronoiPartition& part, const CellMoments& moments, const DensityField& phi,
                              int k, int i) {
  const auto uk = static_cast<std::size_t>(k);
  const auto ui = static_cast<std::size_t>(i);
  if (i == k) return own_centroid_jacobian(part.centers[uk], moments.centroid[uk], moments.mass[uk],
                                           neighbour_edges(part, k), phi);
  const Segment* seg = part.shared_edge(k, i);
  if (seg == nullptr) return Mat2::Zero();
  return cross_centroid_jacobian(part.centers[uk], {i, part.centers[ui], *seg}, moments.centroid[ui],
                                 moments.mass[ui], phi);
}

/// grad_k W_k = (I - J_kk) Q_k (z_k - C_k).
inline Vec2 own_off_loc_gradient(const Vec2& z_k, const Vec2& c_k, const Mat2& jac, const Mat2& Q_k) {
  return (Mat2::Identity() - jac) * (Q_k * (z_k - c_k));
}

/// grad_k W_i = -J_ki Q_i (z_i - C_i).
inline Vec2 cross_off_loc_gradient(const Vec2& z_i, const Vec2& c_i, const Mat2& jac, const Mat2& Q_i) {
  return -jac * (Q_i * (z_i - c_i));
}

inline Vec2 off_loc_gradient(std::size_t k, std::size_t i, const Configuration& cfg, const CellMoments& moments,
                             const Mat2& jac, const Mat2& Q_i) {
  if (i == k) return own_off_loc_gradient(cfg[k], moments.centroid[k], jac, Q_i);
  return cross_off_loc_gradient(cfg[i], moments.centroid[i], jac, Q_i);
}

// ---------------------------------------------------------------------------
// Barrier-Lyapunov coverage cost

/// sum_j 1 / h_j(z); throws BoundaryViolation when z is not strictly inside.
inline double barrier_sum(const ConvexRegion& region, const Vec2& z, std::size_t agent = 0) {
  double s = 0.0;
  for (std::size_t j = 0; j < region.edge_count(); ++j) {
    const double h = region.h(j, z);
    if (!(h > 0.0))
      throw CoverageError(ErrorCode::BoundaryViolation,
                          "agent " + std::to_string(agent) + " reached region edge " + std::to_string(j));
    s += 1.0 / h;
  }
  return s;
}

/// sum_j a_j / h_j(z)^2, the gradient of barrier_sum.
inline Vec2 barrier_gradient(const ConvexRegion& region, const Vec2& z) {
  Vec2 g = Vec2::Zero();
  for (std::size_t j = 0; j < region.edge_count(); ++j) {
    const double h = region.h(j, z);
    g += region.edges()[j].normal / (h * h);
  }
  return g;
}

/// V = sum_i sum_j W_i / h_j(z_i).
inline double coverage_cost_V(const Configuration& cfg, const ConvexRegion& region, const CellMoments& moments,
                              const ControlParams& params) {
  double v = 0.0;
  for (std::size_t i = 0; i < cfg.size(); ++i) {
    const double s = barrier_sum(region, cfg[i], i);
    v += off_loc_cost(cfg[i], moments.centroid[i], params[i].Q) * s;
  }
  return v;
}

/// Sparse sensitivities: for every agent k one entry per i in {k} u A_k.
struct GradientBundle {
  struct PairTerm {
    int i = 0;
    Mat2 jac_C = Mat2::Zero();   // grad_k C_i
    Vec2 grad_W = Vec2::Zero();  // grad_k W_i
  };

  std::vector<std::vector<PairTerm>> terms;  // terms[k], own term first
  std::vector<Vec2> grad_V;

  const PairTerm* find(int k, int i) const {
    for (const auto& t : terms[static_cast<std::size_t>(k)])
      if (t.i == i) return &t;
    return nullptr;
  }

  /// Exact zero for pairs outside the closed neighbourhood.
  Mat2 jac_C(int k, int i) const {
    const PairTerm* t = find(k, i);
    return t ? t->jac_C : Mat2::Zero();
  }

  Vec2 grad_W(int k, int i) const {
    const PairTerm* t = find(k, i);
    return t ? t->grad_W : Vec2::Zero();
  }
};

/// What agent k knows about itself and one neighbour: enough to form both
/// sensitivity terms. The centralized and message-passing paths both reduce to this.
struct NeighbourView {
  NeighbourEdge edge;
  double mass = 0.0;
  Vec2 centroid = Vec2::Zero();
  Mat2 Q = Mat2::Identity();
};

/// Terms {grad_k W_i : i in {k} u A_k}, own term first, neighbours in the given order.
inline std::vector<GradientBundle::PairTerm> local_pair_terms(int k, const Vec2& z_k, const Vec2& c_k, double m_k,
                                                              const Mat2& Q_k,
                                                              const std::vector<NeighbourView>& neighbours,
                                                              const DensityField& phi) {
  std::vector<GradientBundle::PairTerm> out;
  out.reserve(neighbours.size() + 1);
  std::vector<NeighbourEdge> edges;
  edges.reserve(neighbours.size());
  for (const auto& n : neighbours) edges.push_back(n.edge);
  GradientBundle::PairTerm own;
  own.i = k;
  own.jac_C = own_centroid_jacobian(z_k, c_k, m_k, edges, phi);
  own.grad_W = own_off_loc_gradient(z_k, c_k, own.jac_C, Q_k);
  out.push_back(own);
  for (const auto& n : neighbours) {
    GradientBundle::PairTerm t;
    t.i = n.edge.id;
    t.jac_C = cross_centroid_jacobian(z_k, n.edge, n.centroid, n.mass, phi);
    t.grad_W = cross_off_loc_gradient(n.edge.z, n.centroid, t.jac_C, n.Q);
    out.push_back(t);
  }
  return out;
}

/// grad_k V = sum_{i in {k} u A_k} grad_k W_i * sum_j 1/h_j(z_i) + W_k sum_j a_j / h_j(z_k)^2.
/// terms[0] is the own term; terms[1..] pair with neighbours[0..].
inline Vec2 local_coverage_gradient(const ConvexRegion& region, int k, const Vec2& z_k, const Vec2& c_k,
                                    const Mat2& Q_k, const std::vector<GradientBundle::PairTerm>& terms,
                                    const std::vector<NeighbourView>& neighbours) {
  const auto uk = static_cast<std::size_t>(k);
  Vec2 g = terms[0].grad_W * barrier_sum(region, z_k, uk);
  for (std::size_t n = 0; n < neighbours.size(); ++n) {
    const auto ui = static_cast<std::size_t>(neighbours[n].edge.id);
    g += terms[n + 1].grad_W * barrier_sum(region, neighbours[n].edge.z, ui);
  }
  g += off_loc_cost(z_k, c_k, Q_k) * barrier_gradient(region, z_k);
  return g;
}

/// The neighbour views of agent k read from a full partition.
inline std::vector<NeighbourView> neighbour_views(const VoronoiPartition& part, const CellMoments& moments,
                                                  const ControlParams& params, int k) {
  std::vector<NeighbourView> out;
  for (const auto& e : neighbour_edges(part, k)) {
    const auto ui = static_cast<std::size_t>(e.id);
    out.push_back({e, moments.mass[ui], moments.centroid[ui], params[ui].Q});
  }
  return out;
}

inline std::vector<GradientBundle::PairTerm> pair_terms(int k, const VoronoiPartition& part,
                                                        const CellMoments& moments, const DensityField& phi,
                                                        const ControlParams& params) {
  const auto uk = static_cast<std::size_t>(k);
  return local_pair_terms(k, part.centers[uk], moments.centroid[uk], moments.mass[uk], params[uk].Q,
                          neighbour_views(part, moments, params, k), phi);
}

inline GradientBundle compute_gradient_bundle(const ConvexRegion& region, const VoronoiPartition& part,
                                              const CellMoments& moments, const DensityField& phi,
                                              const ControlParams& params) {
  GradientBundle bundle;
  const int n = static_cast<int>(part.size());
  bundle.terms.resize(part.size());
  bundle.grad_V.resize(part.size());
  for (int k = 0; k < n; ++k) {
    const auto uk = static_cast<std::size_t>(k);
    const std::vector<NeighbourView> views = neighbour_views(part, moments, params, k);
    bundle.terms[uk] = local_pair_terms(k, part.centers[uk], moments.centroid[uk], moments.mass[uk], params[uk].Q,
                                        views, phi);
    bundle.grad_V[uk] = local_coverage_gradient(region, k, part.centers[uk], moments.centroid[uk], params[uk].Q,
                                                bundle.terms[uk], views);
  }
  return bundle;
}

/// grad_k V re-assembled from a bundle's terms and the configuration.
inline Vec2 coverage_gradient(std::size_t k, const Configuration& cfg, const ConvexRegion& region,
                              const CellMoments& moments, const GradientBundle& bundle, const ControlParams& params) {
  const auto& terms = bundle.terms[k];
  std::vector<NeighbourView> views(terms.size() - 1);
  for (std::size_t n = 1; n < terms.size(); ++n) {
    views[n - 1].edge.id = terms[n].i;
    views[n - 1].edge.z = cfg[static_cast<std::size_t>(terms[n].i)];
  }
  return local_coverage_gradient(region, static_cast<int>(k), cfg[k], moments.centroid[k], params[k].Q, terms, views);
}

// ---------------------------------------------------------------------------
// Finite-difference oracle

using ScalarCost = std::function<double(const Configuration&)>;

/// Central difference of cost with respect to z_k.
inline Vec2 fd_gradient_oracle(const ScalarCost& cost, const Configuration& cfg, std::size_t k, double step) {
  if (!(step > 0.0)) throw CoverageError(ErrorCode::InvalidParameter, "finite-difference step must be > 0");
  Vec2 g;
  for (int d = 0; d < 2; ++d) {
    Configuration plus = cfg;
    Configuration minus = cfg;
    plus[k][d] += step;
    minus[k][d] -= step;
    g[d] = (cost(plus) - cost(minus)) / (2.0 * step);
  }
  return g;
}

/// Same, refusing perturbations that leave the open region.
inline Vec2 fd_gradient_oracle(const ConvexRegion& region, const ScalarCost& cost, const Configuration& cfg,
                               std::size_t k, double step) {
  for (int d = 0; d < 2; ++d)
    for (double sign : {-1.0, 1.0}) {
      Vec2 z = cfg[k];
      z[d] += sign * step;
      if (!region.strictly_contains(z))
        throw CoverageError(ErrorCode::BoundaryViolation,
                            "finite-difference probe of agent " + std::to_string(k) + " leaves the region");
    }
  return fd_gradient_oracle(cost, cfg, k, step);
}

/// V as a function of the configuration alone (partition and moments recomputed).
inline ScalarCost make_cost_V(const ConvexRegion& region, const DensityField& phi, const ControlParams& params) {
  return [&region, phi, params](const Configuration& c) {
    const VoronoiPartition part = compute_partition(region, c);
    const CellMoments mom = cell_moments(part, phi);
    return coverage_cost_V(c, region, mom, params);
  };
}

inline ScalarCost make_cost_H(const ConvexRegion& region, const DensityField& phi) {
  return [&region, phi](const Configuration& c) {
    const VoronoiPartition part = compute_partition(region, c);
    return coverage_cost_H(c, part, phi);
  };
}

/// All grad_k V by central differences; the slow authoritative path.
inline std::vector<Vec2> reference_gradients(const ConvexRegion& region, const DensityField& phi,
                                             const ControlParams& params, const Configuration& cfg,
                                             double step = 1e-6) {
  const ScalarCost cost = make_cost_V(region, phi, params);
  std::vector<Vec2> out;
  out.reserve(cfg.size());
  for (std::size_t k = 0; k < cfg.size(); ++k) out.push_back(fd_gradient_oracle(region, cost, cfg, k, step));
  return out;
}

/// Relative error |a - b| / max(|b|, floor).
inline double relative_error(const Vec2& analytic, const Vec2& reference, double floor = 1e-12) {
  return (analytic - reference).norm() / std::max(reference.norm(), floor);
}

}  // namespace csur
