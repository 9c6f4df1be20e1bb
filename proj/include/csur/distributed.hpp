#pragma once

#include "csur/dynamics.hpp"

#include <algorithm>
#include <cstdio>
#include <string>
#include <vector>

namespace csur {

/// The tuple an agent publishes to its neighbours each round.
struct AgentMessage {
  int sender = 0;
  Vec2 z = Vec2::Zero();
  std::vector<int> adjacency;
  double mass = 0.0;
  Vec2 centroid = Vec2::Zero();
  long round = 0;

  bool operator==(const AgentMessage&) const = default;
};

/// One edge of the node's own cell shared with a neighbour.
struct SharedEdge {
  int neighbour = 0;
  Segment segment;
};

/// Everything one simulated agent owns. There is deliberately no access to the
/// global configuration: neighbour data arrives only through messages.
struct NodeState {
  int id = 0;
  AgentState state;
  AgentParams params;
  /// Static per-agent parameter table; only neighbours' Q entries are read.
  ControlParams params_table;
  long round = 0;

  ConvexPolygon cell;
  std::vector<SharedEdge> shared_edges;  // sorted by neighbour id
  Moments moments;
  long measured_round = -1;

  ControlOutput control;
  Vec2 grad_V = Vec2::Zero();

  std::vector<int> adjacency() const {
    std::vector<int> out;
    out.reserve(shared_edges.size());
    for (const auto& e : shared_edges) out.push_back(e.neighbour);
    return out;
  }
};

inline std::vector<NodeState> make_nodes(const std::vector<AgentState>& states, const ControlParams& params) {
  std::vector<NodeState> nodes(states.size());
  for (std::size_t k = 0; k < states.size(); ++k) {
    nodes[k].id = static_cast<int>(k);
    nodes[k].state = states[k];
    nodes[k].params = params[k];
    nodes[k].params_table = params;
  }
  return nodes;
}

/// Stand-in for a distributed Voronoi service: partitions from the nodes' current
/// virtual centers.
inline VoronoiPartition geometry_service(const ConvexRegion& region, const std::vector<NodeState>& nodes) {
  Configuration cfg;
  cfg.reserve(nodes.size());
  for (const auto& n : nodes) cfg.push_back(virtual_center(n.state));
  return compute_partition(region, cfg);
}

/// Hands node its own cell and shared edges, and measures its own moments.
inline void update_measurements(NodeState& node, const VoronoiPartition& part, const DensityField& phi) {
  const auto k = static_cast<std::size_t>(node.id);
  node.cell = part.cells[k];
  node.shared_edges.clear();
  for (int r : part.adjacency[k]) node.shared_edges.push_back({r, *part.shared_edge(node.id, r)});
  node.moments = polygon_moments(node.cell, phi);
  node.measured_round = node.round;
}

inline AgentMessage publish_state(const NodeState& node) {
  if (node.measured_round != node.round)
    throw CoverageError(ErrorCode::StaleState, "agent " + std::to_string(node.id) + " has no moments for round " +
                                                   std::to_string(node.round));
  return {node.id, virtual_center(node.state), node.adjacency(), node.moments.mass, node.moments.centroid, node.round};
}

/// grad_k V from the node's own measurements and one message per neighbour.
/// Messages from non-neighbours are ignored.
inline Vec2 local_gradient(const NodeState& node, const std::vector<AgentMessage>& inbox, const ConvexRegion& region,
                           const DensityField& phi) {
  if (node.measured_round != node.round)
    throw CoverageError(ErrorCode::StaleState, "agent " + std::to_string(node.id) + " measurements are stale");
  const Vec2 z_k = virtual_center(node.state);
  std::vector<NeighbourView> views;
  views.reserve(node.shared_edges.size());
  for (const auto& e : node.shared_edges) {
    const auto it = std::find_if(inbox.begin(), inbox.end(), [&](const AgentMessage& m) {
      return m.sender == e.neighbour && m.round == node.round;
    });
    if (it == inbox.end())
      throw CoverageError(ErrorCode::IncompleteRound, "agent " + std::to_string(node.id) + " has no round-" +
                                                          std::to_string(node.round) + " message from neighbour " +
                                                          std::to_string(e.neighbour));
    // The shared edge must lie on the bisector implied by the neighbour's reported position.
    const double sep = (it->z - z_k).norm();
    const Vec2 n = (it->z - z_k) / sep;
    const Vec2 mid = 0.5 * (it->z + z_k);
    const double tol = 1e-9 * std::max(sep, e.segment.length());
    if (!(sep > 0.0) || std::abs(n.dot(e.segment.p - mid)) > tol || std::abs(n.dot(e.segment.q - mid)) > tol)
      throw CoverageError(ErrorCode::StaleState, "agent " + std::to_string(node.id) + " cell geometry disagrees with " +
                                                     "the position reported by neighbour " + std::to_string(e.neighbour));
    views.push_back({{e.neighbour, it->z, e.segment},
                     it->mass,
                     it->centroid,
                     node.params_table[static_cast<std::size_t>(e.neighbour)].Q});
  }
  const auto terms =
      local_pair_terms(node.id, z_k, node.moments.centroid, node.moments.mass, node.params.Q, views, phi);
  return local_coverage_gradient(region, node.id, z_k, node.moments.centroid, node.params.Q, terms, views);
}

struct RoundResult {
  long round = 0;
  std::vector<AgentMessage> messages;  // in delivery order
};

/// Phase 1: everyone publishes. Phase 2: each node receives exactly its neighbours'
/// messages. Phase 3: each node computes u and steps its own dynamics.
inline RoundResult synchronous_round(std::vector<NodeState>& nodes, const VoronoiPartition& part,
                                     const ConvexRegion& region, const DensityField& phi, double dt,
                                     Integrator integrator) {
  if (nodes.empty()) throw CoverageError(ErrorCode::ProtocolError, "round with no nodes");
  const long round = nodes.front().round;
  for (const auto& n : nodes)
    if (n.round != round)
      throw CoverageError(ErrorCode::ProtocolError, "agent " + std::to_string(n.id) + " is at round " +
                                                        std::to_string(n.round) + ", expected " + std::to_string(round));
  for (auto& n : nodes) update_measurements(n, part, phi);

  std::vector<AgentMessage> published;
  published.reserve(nodes.size());
  for (const auto& n : nodes) published.push_back(publish_state(n));

  RoundResult result;
  result.round = round;
  std::vector<std::vector<AgentMessage>> inboxes(nodes.size());
  for (const auto& n : nodes)
    for (int r : n.adjacency()) {
      inboxes[static_cast<std::size_t>(n.id)].push_back(published[static_cast<std::size_t>(r)]);
      result.messages.push_back(published[static_cast<std::size_t>(r)]);
    }

  for (auto& n : nodes) {
    n.grad_V = local_gradient(n, inboxes[static_cast<std::size_t>(n.id)], region, phi);
    n.control = control_input(n.state.theta, n.grad_V, n.params, n.state.omega);
  }
  for (auto& n : nodes) {
    n.state = step_csur(n.state, n.control.u, dt, integrator);
    ++n.round;
  }
  return result;
}

inline const char* message_csv_header() { return "round,sender,zx,zy,adj,mass,cx,cy"; }

/// One CSV line; adjacency ids are ';'-separated.
inline std::string message_csv_row(const AgentMessage& m) {
  std::string adj;
  for (std::size_t i = 0; i < m.adjacency.size(); ++i) {
    if (i) adj += ';';
    adj += std::to_string(m.adjacency[i]);
  }
  char buf[256];
  std::snprintf(buf, sizeof buf, "%ld,%d,%.17g,%.17g,", m.round, m.sender, m.z.x(), m.z.y());
  std::string row = buf;
  row += adj;
  std::snprintf(buf, sizeof buf, ",%.17g,%.17g,%.17g", m.mass, m.centroid.x(), m.centroid.y());
  return row + buf;
}

}  // namespace csur
