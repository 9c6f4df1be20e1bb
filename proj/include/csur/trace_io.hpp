#pragma once

#include "csur/simulation.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace csur {

inline const char* trace_csv_header() { return "t,agent,zeta_x,zeta_y,theta,z_x,z_y,c_x,c_y,u,sigma,V,H"; }

inline void write_trace_csv(std::ostream& out, const std::vector<StepRecord>& trace) {
  out << trace_csv_header() << '\n';
  char buf[512];
  for (const auto& rec : trace)
    for (std::size_t k = 0; k < rec.agents.size(); ++k) {
      const AgentRecord& a = rec.agents[k];
      std::snprintf(buf, sizeof buf, "%.17g,%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                    rec.t, k, a.zeta.x(), a.zeta.y(), a.theta, a.z.x(), a.z.y(), a.c.x(), a.c.y(), a.u, a.sigma, rec.V,
                    rec.H);
      out << buf;
    }
}

inline void write_trace_csv(const std::string& file, const std::vector<StepRecord>& trace) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw CoverageError(ErrorCode::Io, file + ": cannot write");
  write_trace_csv(out, trace);
  if (!out) throw CoverageError(ErrorCode::Io, file + ": write failed");
}

/// Parses a trace; rows of one step must be consecutive with agent ids 0..n-1.
inline std::vector<StepRecord> read_trace_csv(std::istream& in, const std::string& name = "trace") {
  std::string line;
  if (!std::getline(in, line) || line != trace_csv_header())
    throw CoverageError(ErrorCode::TraceFormat, name + ":1: header must be '" + std::string(trace_csv_header()) + "'");
  std::vector<StepRecord> trace;
  std::size_t lineno = 1;
  std::size_t agents = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::string where = name + ":" + std::to_string(lineno);
    double f[13];
    std::size_t count = 0;
    const char* p = line.c_str();
    while (count < 13) {
      char* end = nullptr;
      f[count] = std::strtod(p, &end);
      if (end == p) throw CoverageError(ErrorCode::TraceFormat, where + ": field " + std::to_string(count + 1) + " is not a number");
      ++count;
      p = end;
      if (*p == ',') ++p;
      else break;
    }
    if (count != 13 || *p != '\0')
      throw CoverageError(ErrorCode::TraceFormat, where + ": expected 13 comma-separated fields");
    const double agent_field = f[1];
    if (agent_field < 0 || agent_field != static_cast<double>(static_cast<std::size_t>(agent_field)))
      throw CoverageError(ErrorCode::TraceFormat, where + ": agent id must be a non-negative integer");
    const auto agent = static_cast<std::size_t>(agent_field);
    if (agent == 0) {
      if (!trace.empty()) {
        if (agents == 0) agents = trace.back().agents.size();
        if (trace.back().agents.size() != agents)
          throw CoverageError(ErrorCode::TraceFormat, where + ": previous step has " +
                                                          std::to_string(trace.back().agents.size()) + " agents, expected " +
                                                          std::to_string(agents));
        if (!(f[0] > trace.back().t)) throw CoverageError(ErrorCode::TraceFormat, where + ": time is not increasing");
      }
      StepRecord rec;
      rec.t = f[0];
      rec.V = f[11];
      rec.H = f[12];
      trace.push_back(rec);
    } else {
      if (trace.empty() || agent != trace.back().agents.size())
        throw CoverageError(ErrorCode::TraceFormat, where + ": agent rows out of order");
      if (f[0] != trace.back().t || f[11] != trace.back().V || f[12] != trace.back().H)
        throw CoverageError(ErrorCode::TraceFormat, where + ": t, V and H must repeat within a step");
    }
    AgentRecord a;
    a.zeta = {f[2], f[3]};
    a.theta = f[4];
    a.z = {f[5], f[6]};
    a.c = {f[7], f[8]};
    a.u = f[9];
    a.sigma = f[10];
    trace.back().agents.push_back(a);
  }
  if (trace.empty()) throw CoverageError(ErrorCode::TraceFormat, name + ": no rows");
  if (agents != 0 && trace.back().agents.size() != agents)
    throw CoverageError(ErrorCode::TraceFormat, name + ": last step is incomplete");
  return trace;
}

inline std::vector<StepRecord> read_trace_csv(const std::string& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw CoverageError(ErrorCode::Io, file + ": cannot open");
  return read_trace_csv(in, file);
}

// ---------------------------------------------------------------------------
// Post-hoc audit

struct Violation {
  std::string kind;  // containment, saturation, monotonicity, cost, centroid, consistency
  std::size_t step = 0;
  double t = 0.0;
  int agent = -1;
  std::string detail;
};

struct Audit {
  RunReport report;
  std::vector<Violation> violations;
  double max_V_rel_error = 0.0;
};

/// Recomputes every logged V (and centroid) from the logged virtual centers and
/// re-evaluates containment, saturation and monotonicity.
inline Audit check_trace(const std::vector<StepRecord>& trace, const Scenario& sc) {
  const ConvexRegion region = validate_scenario(sc);
  const std::vector<AgentSpec> agents = resolve_agents(sc, region);
  const ControlParams params = agent_params(agents);
  if (trace.front().agents.size() != agents.size())
    throw CoverageError(ErrorCode::TraceFormat, "trace has " + std::to_string(trace.front().agents.size()) +
                                                    " agents but the scenario has " + std::to_string(agents.size()));
  Audit audit;
  SimResult replay;
  replay.trace = trace;
  audit.report = summarize(sc, replay, region, agents);
  const double geo_tol = 1e-9 * region.diameter();
  auto flag = [&](const char* kind, std::size_t s, int agent, std::string detail) {
    audit.violations.push_back({kind, s, trace[s].t, agent, std::move(detail)});
  };

  for (std::size_t s = 0; s < trace.size(); ++s) {
    const StepRecord& rec = trace[s];
    Configuration cfg(rec.agents.size());
    bool inside = true;
    for (std::size_t k = 0; k < rec.agents.size(); ++k) {
      const AgentRecord& a = rec.agents[k];
      const AgentState& a0 = agents[k].state;
      cfg[k] = a.z;
      const Vec2 z = virtual_center({a.zeta, a.theta, a0.v, a0.omega});
      if ((z - a.z).norm() > geo_tol)
        flag("consistency", s, static_cast<int>(k), "logged z differs from the orbit center of logged zeta, theta");
      if (!region.strictly_contains(a.z)) {
        inside = false;
        flag("containment", s, static_cast<int>(k), "virtual center outside the region");
      }
      if (sc.controller == Controller::Proposed &&
          !(std::abs(a.u - a0.omega) < agents[k].params.gamma * std::abs(a0.omega)))
        flag("saturation", s, static_cast<int>(k), "|u - omega| >= gamma |omega|");
    }
    if (sc.controller == Controller::Proposed && s > 0 &&
        rec.V - trace[s - 1].V > kMonotoneSlack * std::max(1.0, trace[s - 1].V))
      flag("monotonicity", s, -1, "V increased beyond the per-step slack");
    if (!inside) continue;
    try {
      const VoronoiPartition part = compute_partition(region, cfg);
      const CellMoments moments = cell_moments(part, sc.density);
      const double V = coverage_cost_V(cfg, region, moments, params);
      const double err = std::abs(V - rec.V) / std::max({std::abs(V), std::abs(rec.V), 1e-300});
      audit.max_V_rel_error = std::max(audit.max_V_rel_error, V == rec.V ? 0.0 : err);
      if (V != rec.V && err > 1e-9) flag("cost", s, -1, "logged V disagrees with the recomputed value");
      for (std::size_t k = 0; k < cfg.size(); ++k)
        if ((moments.centroid[k] - rec.agents[k].c).norm() > geo_tol)
          flag("centroid", s, static_cast<int>(k), "logged centroid disagrees with the recomputed value");
    } catch (const CoverageError& e) {
      flag("cost", s, -1, e.what());
    }
  }
  return audit;
}

// ---------------------------------------------------------------------------
// report.json

inline nlohmann::json report_to_json(const RunReport& r) {
  using nlohmann::json;
  json j;
  j["scenario"] = r.scenario;
  j["controller"] = to_string(r.controller);
  j["mode"] = to_string(r.mode);
  j["agents"] = r.agents;
  j["steps"] = r.steps;
  j["final_time"] = r.final_time;
  j["converged"] = r.converged;
  j["converged_time"] = r.converged ? json(r.converged_time) : json(nullptr);
  j["V0"] = r.V0;
  j["V_final"] = r.V_final;
  j["time_to_threshold"] = r.time_to_threshold ? json(*r.time_to_threshold) : json(nullptr);
  j["min_h"] = r.min_h;
  j["max_saturation_ratio"] = r.max_saturation;
  j["max_du"] = r.max_du;
  j["monotonicity_violations"] = r.monotonicity_violations;
  j["infeasibility"] = r.infeasibility ? json{{"time", r.infeasibility->t}, {"agent", r.infeasibility->agent}}
                                       : json(nullptr);
  j["aborted"] = r.aborted ? json(*r.aborted) : json(nullptr);
  j["startup_gradient_check"] = {{"performed", r.startup_check.performed},
                                 {"max_rel_error", r.startup_check.max_rel_error},
                                 {"passed", r.startup_check.passed}};
  j["message_count"] = r.message_count;
  j["region_translation"] = {r.translation.x(), r.translation.y()};
  return j;
}

inline nlohmann::json audit_to_json(const Audit& a) {
  nlohmann::json j = report_to_json(a.report);
  j["max_V_rel_error"] = a.max_V_rel_error;
  j["violations"] = nlohmann::json::array();
  for (const auto& v : a.violations)
    j["violations"].push_back({{"kind", v.kind}, {"step", v.step}, {"t", v.t}, {"agent", v.agent}, {"detail", v.detail}});
  return j;
}

inline void write_json(const std::string& file, const nlohmann::json& j) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw CoverageError(ErrorCode::Io, file + ": cannot write");
  out << j.dump(2) << '\n';
  if (!out) throw CoverageError(ErrorCode::Io, file + ": write failed");
}

inline void write_messages_csv(const std::string& file, const std::vector<AgentMessage>& messages) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw CoverageError(ErrorCode::Io, file + ": cannot write");
  out << message_csv_header() << '\n';
  for (const auto& m : messages) out << message_csv_row(m) << '\n';
  if (!out) throw CoverageError(ErrorCode::Io, file + ": write failed");
}

}  // namespace csur
