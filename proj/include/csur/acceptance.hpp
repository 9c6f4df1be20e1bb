#pragma once

#include "csur/oracles.hpp"
#include "csur/simulation.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

namespace csur {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

struct AcceptanceOptions {
  std::string scenario_dir;
  bool large = false;
};

namespace accept {

inline std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

inline Scenario load(const AcceptanceOptions& opt, const std::string& name) {
  return load_scenario(opt.scenario_dir + "/" + name + ".json");
}

inline ConvexRegion case_region() { return ConvexRegion::from_vertices({{0, 0}, {4, 0}, {4, 2.8}, {0, 2.8}}); }

inline double V_at(const std::vector<StepRecord>& trace, double t) {
  for (const auto& r : trace)
    if (std::abs(r.t - t) < 1e-9) return r.V;
  return std::numeric_limits<double>::quiet_NaN();
}

/// Invariants (b)-(d): containment, strict saturation, per-step monotonicity.
inline bool invariants_hold(const RunReport& r, std::string& why) {
  if (r.aborted) why += " aborted: " + *r.aborted + ";";
  if (!(r.min_h > 0.0)) why += " containment broken;";
  if (!(r.max_saturation < 1.0)) why += " saturation reached;";
  if (r.monotonicity_violations) why += fmt(" %zu monotonicity violations;", r.monotonicity_violations);
  return why.empty();
}

inline CriterionResult geometry_oracle() {
  CriterionResult c{1, "polygon moments vs Monte-Carlo and exact fan", true, "", 0};
  std::mt19937_64 rng(101);
  double worst_mc = 0.0, worst_exact = 0.0;
  const DensityField phi = DensityField::uniform();
  for (int p = 0; p < 50; ++p) {
    const ConvexPolygon poly = oracle::random_convex_polygon(rng);
    const Moments m = polygon_moments(poly, phi);
    const Moments exact = oracle::fan_moments(poly);
    const Moments mc = oracle::monte_carlo_moments(poly, phi, 1000000, rng);
    const double scale = std::sqrt(exact.mass);
    worst_exact = std::max({worst_exact, std::abs(m.mass - exact.mass) / exact.mass,
                            (m.centroid - exact.centroid).norm() / scale});
    worst_mc = std::max({worst_mc, std::abs(m.mass - mc.mass) / mc.mass, (m.centroid - mc.centroid).norm() / scale});
  }
  c.passed = worst_mc <= 1e-2 && worst_exact <= 1e-12;
  c.detail = fmt("max rel err vs MC %.2e, vs exact %.2e", worst_mc, worst_exact);
  return c;
}

inline CriterionResult voronoi_oracle() {
  CriterionResult c{2, "Voronoi cells vs nearest-center grid", true, "", 0};
  const ConvexRegion region = case_region();
  std::mt19937_64 rng(202);
  std::size_t mismatches = 0, checked = 0;
  double worst_area = 0.0;
  for (int s = 0; s < 20; ++s) {
    const Configuration cfg = random_configuration(region, 6, rng, 0.05, 0.05);
    const VoronoiPartition part = compute_partition(region, cfg);
    const auto own = oracle::grid_ownership(region, part, 200, 140);
    mismatches += own.mismatches;
    checked += own.checked;
    const CellMoments m = cell_moments(part, DensityField::uniform());
    double area = 0.0;
    for (double x : m.mass) area += x;
    worst_area = std::max(worst_area, std::abs(area - 11.2) / 11.2);
  }
  c.passed = mismatches == 0 && checked > 0 && worst_area <= 1e-9;
  c.detail = fmt("%zu of %zu grid points mismatched, max area rel err %.2e", mismatches, checked, worst_area);
  return c;
}

inline CriterionResult gradient_correctness() {
  CriterionResult c{3, "analytic gradients vs central differences, sparsity", true, "", 0};
  const ConvexRegion region = case_region();
  const DensityField phi = DensityField::uniform();
  const ControlParams params(6);
  std::mt19937_64 rng(303);
  double worst_H = 0.0, worst_V = 0.0;
  std::size_t sparse_pairs = 0, sparse_bad = 0;
  const ScalarCost cost_H = make_cost_H(region, phi);
  const ScalarCost cost_V = make_cost_V(region, phi, params);
  for (int s = 0; s < 20; ++s) {
    const Configuration cfg = random_configuration(region, 6, rng, 0.15, 0.3);
    const VoronoiPartition part = compute_partition(region, cfg);
    const CellMoments m = cell_moments(part, phi);
    const GradientBundle b = compute_gradient_bundle(region, part, m, phi, params);
    for (std::size_t k = 0; k < cfg.size(); ++k) {
      worst_H = std::max(worst_H, relative_error(conventional_gradient(k, cfg, m),
                                                 fd_gradient_oracle(region, cost_H, cfg, k, 1e-6), 1e-6));
      worst_V = std::max(worst_V, relative_error(b.grad_V[k], fd_gradient_oracle(region, cost_V, cfg, k, 1e-6), 1e-6));
      for (std::size_t i = 0; i < cfg.size(); ++i) {
        if (i == k || part.adjacent(static_cast<int>(k), static_cast<int>(i))) continue;
        ++sparse_pairs;
        const int ki = static_cast<int>(k), ii = static_cast<int>(i);
        // Analytic terms are structurally absent and a perturbation of z_k leaves C_i bitwise unchanged.
        const Mat2 fd_jac = oracle::fd_centroid_jacobian(region, phi, cfg, k, i, 1e-6);
        if (b.find(ki, ii) || b.jac_C(ki, ii) != Mat2::Zero() || b.grad_W(ki, ii) != Vec2::Zero() ||
            fd_jac != Mat2::Zero())
          ++sparse_bad;
      }
    }
  }
  c.passed = worst_H <= 1e-4 && worst_V <= 1e-4 && sparse_bad == 0;
  c.detail = fmt("max rel err grad H %.2e, grad V %.2e; %zu non-adjacent pairs, %zu nonzero", worst_H, worst_V,
                 sparse_pairs, sparse_bad);
  return c;
}

inline CriterionResult case_reproduction(const AcceptanceOptions& opt) {
  CriterionResult c{4, "Cases #1-#3: decay by t=100 s and invariants", true, "", 0};
  for (int n = 1; n <= 3; ++n) {
    Scenario sc = load(opt, "case" + std::to_string(n));
    sc.stop_at_loc = false;
    const Run run = run_scenario(sc);
    const double ratio = V_at(run.result.trace, 100.0) / run.report.V0;
    std::string why;
    invariants_hold(run.report, why);
    if (!(ratio <= 1e-2)) why += " V(100)/V(0) too large;";
    c.passed = c.passed && why.empty();
    c.detail += fmt("#%d V(100)/V(0)=%.2e min_h=%.3f sat=%.3f%s; ", n, ratio, run.report.min_h,
                    run.report.max_saturation, why.c_str());
  }
  return c;
}

struct SweepRow {
  std::string label;
  std::string assignment;
  RunReport report;
};

inline std::vector<SweepRow> sweep_rows(const Scenario& base, const std::vector<std::string>& assignments) {
  std::vector<SweepRow> rows;
  for (const auto& a : assignments) {
    Scenario sc = base;
    sc.stop_at_loc = false;
    if (a != "baseline") apply_param_override(sc, a);
    rows.push_back({a, a, run_scenario(sc).report});
  }
  return rows;
}

inline double threshold_time(const RunReport& r) {
  return r.time_to_threshold.value_or(std::numeric_limits<double>::infinity());
}

inline CriterionResult sweep_ordering(const AcceptanceOptions& opt) {
  CriterionResult c{5, "parameter sweep ordering on Case #2", true, "", 0};
  const auto rows = sweep_rows(load(opt, "case2"), {"baseline", "gamma=10", "delta=10", "Q=10"});
  const RunReport& base = rows[0].report;
  const RunReport& g10 = rows[1].report;
  const RunReport& d10 = rows[2].report;
  const RunReport& q10 = rows[3].report;
  const bool order = threshold_time(q10) < threshold_time(base) && threshold_time(base) < threshold_time(d10);
  const bool chatter = g10.max_du > base.max_du && g10.max_du > d10.max_du && g10.max_du > q10.max_du;
  bool saturation = true;
  for (const auto& r : rows) saturation = saturation && r.report.max_saturation < 1.0;
  c.passed = order && chatter && saturation;
  for (const auto& r : rows)
    c.detail += fmt("%s t=%.2f du=%.3g; ", r.label.c_str(), threshold_time(r.report), r.report.max_du);
  if (!order) c.detail += "ordering broken; ";
  if (!chatter) c.detail += "gamma=10 is not the most chattering; ";
  if (!saturation) c.detail += "saturation reached; ";
  return c;
}

inline CriterionResult infeasibility_comparison(const AcceptanceOptions& opt) {
  CriterionResult c{6, "conventional exits, proposed stays inside and converges", true, "", 0};
  Scenario conv = load(opt, "compare");
  conv.controller = Controller::Conventional;
  const Run a = run_scenario(conv);
  Scenario prop = conv;
  prop.controller = Controller::Proposed;
  prop.expect_infeasible = false;
  const Run b = run_scenario(prop);
  const bool exited = a.report.infeasibility.has_value() && !a.report.converged;
  std::string why;
  invariants_hold(b.report, why);
  const bool decayed = b.report.time_to_threshold.has_value();
  c.passed = exited && why.empty() && decayed;
  c.detail = exited ? fmt("conventional: agent %d exits at t=%.2f; ", a.report.infeasibility->agent,
                          a.report.infeasibility->t)
                    : std::string("conventional: no exit; ");
  c.detail += fmt("proposed: min_h=%.2f, V<=1e-2 V0 at t=%.2f, LOC %s%s", b.report.min_h, threshold_time(b.report),
                  b.report.converged ? "reached" : "not reached", why.c_str());
  return c;
}

/// Agents at graph distance >= 3 from k (their moves reach k only through cells two hops away).
inline std::vector<int> far_agents(const VoronoiPartition& part, int k) {
  std::vector<int> dist(part.size(), -1);
  std::vector<int> frontier{k};
  dist[static_cast<std::size_t>(k)] = 0;
  while (!frontier.empty()) {
    std::vector<int> next;
    for (int a : frontier)
      for (int b : part.adjacency[static_cast<std::size_t>(a)])
        if (dist[static_cast<std::size_t>(b)] < 0) {
          dist[static_cast<std::size_t>(b)] = dist[static_cast<std::size_t>(a)] + 1;
          next.push_back(b);
        }
    frontier = std::move(next);
  }
  std::vector<int> out;
  for (std::size_t j = 0; j < dist.size(); ++j)
    if (dist[j] < 0 || dist[j] >= 3) out.push_back(static_cast<int>(j));
  return out;
}

/// Perturbs every agent far from k and checks k's control is bitwise unchanged.
/// Returns {pairs tested, pairs whose u_k changed}.
inline std::pair<std::size_t, std::size_t> locality_probe(const Scenario& sc) {
  const ConvexRegion region = validate_scenario(sc);
  const auto agents = resolve_agents(sc, region);
  const auto base_nodes = make_nodes(initial_states(agents), agent_params(agents));
  const VoronoiPartition part = geometry_service(region, base_nodes);
  auto round_u = [&](std::vector<NodeState> nodes, const VoronoiPartition& p) {
    synchronous_round(nodes, p, region, sc.density, sc.dt, sc.integrator);
    std::vector<double> u;
    for (const auto& n : nodes) u.push_back(n.control.u);
    return u;
  };
  const std::vector<double> u0 = round_u(base_nodes, part);
  std::size_t tested = 0, changed = 0;
  const double nudge = 1e-3 * region.diameter();
  for (int k = 0; k < static_cast<int>(agents.size()); ++k)
    for (int j : far_agents(part, k)) {
      auto nodes = base_nodes;
      nodes[static_cast<std::size_t>(j)].state.zeta += Vec2(nudge, -0.5 * nudge);
      const VoronoiPartition moved = geometry_service(region, nodes);
      if (moved.adjacency != part.adjacency) continue;
      ++tested;
      if (round_u(nodes, moved)[static_cast<std::size_t>(k)] != u0[static_cast<std::size_t>(k)]) ++changed;
    }
  return {tested, changed};
}

inline CriterionResult distributed_equivalence(const AcceptanceOptions& opt) {
  CriterionResult c{7, "distributed vs centralized V traces, locality", true, "", 0};
  double worst = 0.0;
  bool lengths = true;
  for (int n = 1; n <= 3; ++n) {
    Scenario sc = load(opt, "case" + std::to_string(n));
    sc.stop_at_loc = false;
    sc.mode = Mode::Centralized;
    const SimResult central = simulate(sc);
    sc.mode = Mode::Distributed;
    const SimResult dist = simulate(sc);
    lengths = lengths && central.trace.size() == dist.trace.size();
    for (std::size_t s = 0; s < std::min(central.trace.size(), dist.trace.size()); ++s) {
      const double a = central.trace[s].V, b = dist.trace[s].V;
      if (a != b) worst = std::max(worst, std::abs(a - b) / std::max(std::abs(a), 1e-300));
    }
  }
  std::size_t tested = 0, changed = 0;
  for (const char* name : {"case1", "case2", "case3", "scale25"}) {
    const auto [t, ch] = locality_probe(load(opt, name));
    tested += t;
    changed += ch;
  }
  c.passed = lengths && worst <= 1e-10 && tested > 0 && changed == 0;
  c.detail = fmt("max per-step rel diff %.2e; locality: %zu far-agent perturbations, %zu changed u_k", worst, tested,
                 changed);
  return c;
}

inline CriterionResult scale_check(const AcceptanceOptions& opt) {
  CriterionResult c{8, "25-agent LOC within 150 s with invariants", true, "", 0};
  Scenario sc = load(opt, "scale25");
  const Run run = run_scenario(sc);
  std::string why;
  invariants_hold(run.report, why);
  if (!run.report.converged) why += " no LOC (1e-3 m, 2 s dwell) within the horizon;";
  c.passed = why.empty();
  double off = 0.0;
  for (const auto& a : run.result.trace.back().agents) off = std::max(off, (a.z - a.c).norm());
  c.detail = fmt("25 agents: V_end/V0=%.2e, V<=1e-2 V0 at t=%.2f, max |z-C| at end %.3f m, min_h=%.2f%s",
                 run.report.V_final / run.report.V0, threshold_time(run.report), off, run.report.min_h, why.c_str());
  if (opt.large) {
    const Run big = run_scenario(load(opt, "scale100"));
    std::string bwhy;
    invariants_hold(big.report, bwhy);
    if (!(threshold_time(big.report) <= 120.0)) bwhy += " V not within 1e-2 V0 by t=120 s;";
    c.passed = c.passed && bwhy.empty();
    c.detail += fmt("; 100 agents: V<=1e-2 V0 at t=%.2f, min_h=%.2f, sat=%.3f%s", threshold_time(big.report),
                    big.report.min_h, big.report.max_saturation, bwhy.c_str());
  }
  return c;
}

/// A symmetric LOC in the 4 x 2.8 rectangle: quadrant centroids.
inline Scenario loc_start_scenario(double horizon) {
  Scenario sc;
  sc.name = "loc-start";
  sc.region = {{0, 0}, {4, 0}, {4, 2.8}, {0, 2.8}};
  const std::vector<Vec2> centers = {{1.0, 0.7}, {3.0, 0.7}, {1.0, 2.1}, {3.0, 2.1}};
  for (std::size_t k = 0; k < centers.size(); ++k) {
    AgentSpec a;
    a.state.v = 0.16;
    a.state.omega = 0.8;
    a.state.theta = 0.7 * static_cast<double>(k) + 0.3;
    a.state.zeta = orbit_point(centers[k], a.state.theta, a.state.v, a.state.omega);
    sc.agents.push_back(a);
  }
  sc.horizon = horizon;
  sc.stop_at_loc = false;
  return sc;
}

inline CriterionResult orbit_property() {
  CriterionResult c{9, "orbit about the virtual center at a LOC start", true, "", 0};
  const double period = 2.0 * std::numbers::pi / 0.8;
  const Scenario sc = loc_start_scenario(std::ceil(period / 0.05) * 0.05);
  const SimResult res = simulate(sc);
  const double radius = 0.16 / 0.8;
  double worst = 0.0;
  for (const auto& rec : res.trace)
    for (std::size_t k = 0; k < rec.agents.size(); ++k) {
      const Vec2 z0 = res.trace.front().agents[k].z;
      worst = std::max(worst, std::abs((rec.agents[k].zeta - z0).norm() - radius));
    }
  c.passed = !res.aborted && res.trace.size() > 1 && res.trace.back().t >= period && worst <= 1e-3 * radius;
  c.detail = fmt("max radial deviation %.2e m over %.2f s (bound %.2e m)", worst, res.trace.back().t, 1e-3 * radius);
  return c;
}

}  // namespace accept

inline CriterionResult timed(int id, const std::function<CriterionResult()>& f) {
  const auto t0 = std::chrono::steady_clock::now();
  CriterionResult r;
  try {
    r = f();
  } catch (const std::exception& e) {
    r.id = id;
    r.name = "did not complete";
    r.passed = false;
    r.detail = std::string("error: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

/// Runs one criterion by id (1..9).
inline CriterionResult run_criterion(int id, const AcceptanceOptions& opt) {
  using namespace accept;
  switch (id) {
    case 1: return timed(1, geometry_oracle);
    case 2: return timed(2, voronoi_oracle);
    case 3: return timed(3, gradient_correctness);
    case 4: return timed(4, [&] { return case_reproduction(opt); });
    case 5: return timed(5, [&] { return sweep_ordering(opt); });
    case 6: return timed(6, [&] { return infeasibility_comparison(opt); });
    case 7: return timed(7, [&] { return distributed_equivalence(opt); });
    case 8: return timed(8, [&] { return scale_check(opt); });
    case 9: return timed(9, orbit_property);
  }
  throw CoverageError(ErrorCode::InvalidParameter, "no acceptance criterion " + std::to_string(id));
}

inline std::string format_result(const CriterionResult& r) {
  return accept::fmt("criterion %d: %s  %s (%s) [%.1fs]", r.id, r.passed ? "PASS" : "FAIL", r.name.c_str(),
                     r.detail.c_str(), r.seconds);
}

}  // namespace csur
