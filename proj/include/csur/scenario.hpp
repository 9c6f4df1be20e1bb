#pragma once

#include "csur/dynamics.hpp"
#include "csur/sampling.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <fstream>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace csur {

enum class Controller { Proposed, Conventional };
enum class Mode { Centralized, Distributed };

inline const char* to_string(Controller c) { return c == Controller::Proposed ? "proposed" : "conventional"; }
inline const char* to_string(Mode m) { return m == Mode::Centralized ? "centralized" : "distributed"; }

struct AgentSpec {
  AgentState state;
  AgentParams params;

  bool operator==(const AgentSpec&) const = default;
};

/// Agents drawn from the scenario seed: virtual centers uniform in the region
/// (margin and pairwise separation enforced), headings uniform in [0, 2 pi).
struct RandomAgents {
  std::size_t count = 0;
  double margin = 0.0;
  double min_separation = 0.0;
  double v = 1.0;
  double omega = 1.0;
  AgentParams params;

  bool operator==(const RandomAgents&) const = default;
};

struct Scenario {
  std::string name;
  std::vector<Vec2> region;
  DensityField density;
  std::vector<AgentSpec> agents;
  std::optional<RandomAgents> random_agents;
  Controller controller = Controller::Proposed;
  Mode mode = Mode::Centralized;
  Integrator integrator = Integrator::Exact;
  double dt = 0.05;
  double horizon = 150.0;
  double loc_tol = 1e-3;
  double loc_dwell = 2.0;
  bool stop_at_loc = true;
  bool reference_gradients = false;
  bool expect_infeasible = false;
  std::uint64_t seed = 0;

  bool operator==(const Scenario&) const = default;
};

/// Explicit agents, or the seeded draw when the scenario uses random_agents.
inline std::vector<AgentSpec> resolve_agents(const Scenario& sc, const ConvexRegion& region) {
  if (!sc.random_agents) return sc.agents;
  const RandomAgents& ra = *sc.random_agents;
  std::mt19937_64 rng(sc.seed);
  const Configuration centers = random_configuration(region, ra.count, rng, ra.margin, ra.min_separation);
  std::vector<AgentSpec> out;
  out.reserve(centers.size());
  for (const auto& z : centers) {
    AgentSpec a;
    a.state.theta = uniform(rng, 0.0, 2.0 * std::numbers::pi);
    a.state.v = ra.v;
    a.state.omega = ra.omega;
    a.state.zeta = orbit_point(z, a.state.theta, ra.v, ra.omega);
    a.params = ra.params;
    out.push_back(a);
  }
  return out;
}

inline std::vector<AgentState> initial_states(const std::vector<AgentSpec>& agents) {
  std::vector<AgentState> out;
  for (const auto& a : agents) out.push_back(a.state);
  return out;
}

inline ControlParams agent_params(const std::vector<AgentSpec>& agents) {
  ControlParams out;
  for (const auto& a : agents) out.push_back(a.params);
  return out;
}

/// Validates everything that does not depend on the run itself; returns the region.
inline ConvexRegion validate_scenario(const Scenario& sc) {
  ConvexRegion region;
  try {
    region = ConvexRegion::from_vertices(sc.region);
  } catch (const CoverageError& e) {
    throw CoverageError(e.code(), std::string("region: ") + e.what());
  }
  if (!(sc.dt > 0.0)) throw CoverageError(ErrorCode::Schema, "dt: must be > 0");
  if (!(sc.horizon > sc.dt)) throw CoverageError(ErrorCode::Schema, "horizon: must exceed dt");
  if (!(sc.loc_tol > 0.0)) throw CoverageError(ErrorCode::Schema, "loc_tol: must be > 0");
  if (!(sc.loc_dwell >= 0.0)) throw CoverageError(ErrorCode::Schema, "loc_dwell: must be >= 0");
  if (sc.random_agents && !sc.agents.empty())
    throw CoverageError(ErrorCode::Schema, "agents: give either agents or random_agents, not both");
  if (sc.reference_gradients && sc.mode == Mode::Distributed)
    throw CoverageError(ErrorCode::Schema, "reference_gradients: only available in centralized mode");
  const std::vector<AgentSpec> agents = resolve_agents(sc, region);
  if (agents.empty()) throw CoverageError(ErrorCode::Schema, "agents: at least one agent is required");
  for (std::size_t k = 0; k < agents.size(); ++k) {
    const std::string where = "agents[" + std::to_string(k) + "]";
    if (!agents[k].state.zeta.allFinite() || !std::isfinite(agents[k].state.theta))
      throw CoverageError(ErrorCode::Schema, where + ".zeta/theta: must be finite");
    validate_speeds(agents[k].state, where);
    validate_params(agents[k].params, agents[k].state.omega, where);
    if (!region.strictly_contains(virtual_center(agents[k].state)))
      throw CoverageError(ErrorCode::OutOfRegion, where + ".zeta: virtual center is not strictly inside the region");
  }
  const double tol = 1e-9 * region.diameter();
  for (std::size_t i = 0; i < agents.size(); ++i)
    for (std::size_t k = i + 1; k < agents.size(); ++k)
      if ((virtual_center(agents[i].state) - virtual_center(agents[k].state)).norm() <= tol)
        throw CoverageError(ErrorCode::CoincidentAgents, "agents[" + std::to_string(i) + "] and agents[" +
                                                             std::to_string(k) + "]: virtual centers coincide");
  return region;
}

// ---------------------------------------------------------------------------
// JSON

namespace detail {

using nlohmann::json;

inline void require_keys(const json& j, const std::string& where, std::initializer_list<const char*> required,
                         std::initializer_list<const char*> optional) {
  if (!j.is_object()) throw CoverageError(ErrorCode::Schema, where + ": expected an object");
  std::set<std::string> known;
  for (const char* k : required) {
    known.insert(k);
    if (!j.contains(k)) throw CoverageError(ErrorCode::Schema, (where.empty() ? "" : where + ".") + k + ": missing");
  }
  for (const char* k : optional) known.insert(k);
  for (const auto& [key, value] : j.items())
    if (!known.count(key))
      throw CoverageError(ErrorCode::Schema, (where.empty() ? "" : where + ".") + key + ": unknown field");
}

inline std::string path(const std::string& where, const char* key) { return where.empty() ? key : where + "." + key; }

inline double get_number(const json& j, const std::string& where, const char* key) {
  const json& v = j.at(key);
  if (!v.is_number()) throw CoverageError(ErrorCode::Schema, path(where, key) + ": expected a number");
  return v.get<double>();
}

inline Vec2 to_vec2(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
    throw CoverageError(ErrorCode::Schema, where + ": expected [x, y]");
  return {v[0].get<double>(), v[1].get<double>()};
}

inline Mat2 to_mat2(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 2) throw CoverageError(ErrorCode::Schema, where + ": expected [[q11,q12],[q21,q22]]");
  Mat2 m;
  for (int r = 0; r < 2; ++r) {
    const Vec2 row = to_vec2(v[static_cast<std::size_t>(r)], where + "[" + std::to_string(r) + "]");
    m(r, 0) = row.x();
    m(r, 1) = row.y();
  }
  return m;
}

inline json from_vec2(const Vec2& v) { return json::array({v.x(), v.y()}); }

inline json from_mat2(const Mat2& m) {
  return json::array({json::array({m(0, 0), m(0, 1)}), json::array({m(1, 0), m(1, 1)})});
}

template <typename E>
E to_enum(const json& j, const std::string& where, std::initializer_list<std::pair<const char*, E>> names) {
  if (!j.is_string()) throw CoverageError(ErrorCode::Schema, where + ": expected a string");
  const std::string s = j.get<std::string>();
  std::string options;
  for (const auto& [name, value] : names) {
    if (s == name) return value;
    options += options.empty() ? name : std::string(", ") + name;
  }
  throw CoverageError(ErrorCode::Schema, where + ": unknown value '" + s + "' (expected one of " + options + ")");
}

inline void read_params(const json& j, const std::string& where, AgentParams& p) {
  p.gamma = get_number(j, where, "gamma");
  p.delta = get_number(j, where, "delta");
  p.Q = to_mat2(j.at("Q"), path(where, "Q"));
  if (j.contains("u_bar") && !j.at("u_bar").is_null()) p.u_bar = get_number(j, where, "u_bar");
}

inline void write_params(json& j, const AgentParams& p) {
  j["gamma"] = p.gamma;
  j["delta"] = p.delta;
  j["Q"] = from_mat2(p.Q);
  if (p.u_bar) j["u_bar"] = *p.u_bar;
}

}  // namespace detail

inline nlohmann::json scenario_to_json(const Scenario& sc) {
  using nlohmann::json;
  json j;
  j["name"] = sc.name;
  j["region"] = json::array();
  for (const auto& v : sc.region) j["region"].push_back(detail::from_vec2(v));
  if (sc.density.is_uniform()) {
    j["density"] = {{"kind", "uniform"}, {"value", sc.density.scale()}};
  } else {
    j["density"] = {{"kind", "gaussian-bump"},
                    {"center", detail::from_vec2(sc.density.center())},
                    {"width", sc.density.width()},
                    {"floor", sc.density.floor()},
                    {"scale", sc.density.scale()}};
  }
  if (sc.random_agents) {
    const RandomAgents& ra = *sc.random_agents;
    json r = {{"count", ra.count},   {"margin", ra.margin}, {"min_separation", ra.min_separation},
              {"v", ra.v},           {"omega", ra.omega}};
    detail::write_params(r, ra.params);
    j["random_agents"] = r;
  } else {
    j["agents"] = json::array();
    for (const auto& a : sc.agents) {
      json r = {{"zeta", detail::from_vec2(a.state.zeta)},
                {"theta", a.state.theta},
                {"v", a.state.v},
                {"omega", a.state.omega}};
      detail::write_params(r, a.params);
      j["agents"].push_back(r);
    }
  }
  j["controller"] = to_string(sc.controller);
  j["mode"] = to_string(sc.mode);
  j["integrator"] = to_string(sc.integrator);
  j["dt"] = sc.dt;
  j["horizon"] = sc.horizon;
  j["loc_tol"] = sc.loc_tol;
  j["loc_dwell"] = sc.loc_dwell;
  j["stop_at_loc"] = sc.stop_at_loc;
  j["reference_gradients"] = sc.reference_gradients;
  j["expect_infeasible"] = sc.expect_infeasible;
  j["seed"] = sc.seed;
  return j;
}

/// Parses and validates. Every diagnostic names the offending field.
inline Scenario scenario_from_json(const nlohmann::json& j) {
  using nlohmann::json;
  detail::require_keys(j, "", {"region", "controller", "dt", "horizon"},
                       {"name", "density", "agents", "random_agents", "mode", "integrator", "loc_tol", "loc_dwell",
                        "stop_at_loc", "reference_gradients", "expect_infeasible", "seed"});
  Scenario sc;
  if (j.contains("name")) {
    if (!j.at("name").is_string()) throw CoverageError(ErrorCode::Schema, "name: expected a string");
    sc.name = j.at("name").get<std::string>();
  }
  const json& reg = j.at("region");
  if (!reg.is_array()) throw CoverageError(ErrorCode::Schema, "region: expected a list of [x, y] vertices");
  for (std::size_t m = 0; m < reg.size(); ++m) sc.region.push_back(detail::to_vec2(reg[m], "region[" + std::to_string(m) + "]"));

  if (j.contains("density")) {
    const json& d = j.at("density");
    if (!d.is_object() || !d.contains("kind")) throw CoverageError(ErrorCode::Schema, "density.kind: missing");
    const std::string kind = d.at("kind").is_string() ? d.at("kind").get<std::string>() : "";
    if (kind == "uniform") {
      detail::require_keys(d, "density", {"kind"}, {"value"});
      const double value = d.contains("value") ? detail::get_number(d, "density", "value") : 1.0;
      if (!(value > 0.0)) throw CoverageError(ErrorCode::Schema, "density.value: must be > 0");
      sc.density = DensityField::uniform(value);
    } else if (kind == "gaussian-bump") {
      detail::require_keys(d, "density", {"kind", "center", "width", "floor"}, {"scale"});
      const double width = detail::get_number(d, "density", "width");
      const double floor = detail::get_number(d, "density", "floor");
      const double scale = d.contains("scale") ? detail::get_number(d, "density", "scale") : 1.0;
      if (!(width > 0.0)) throw CoverageError(ErrorCode::Schema, "density.width: must be > 0");
      if (!(floor > 0.0)) throw CoverageError(ErrorCode::Schema, "density.floor: must be > 0");
      if (!(scale > 0.0)) throw CoverageError(ErrorCode::Schema, "density.scale: must be > 0");
      sc.density = DensityField::gaussian_bump(detail::to_vec2(d.at("center"), "density.center"), width, floor, scale);
    } else {
      throw CoverageError(ErrorCode::Schema, "density.kind: expected 'uniform' or 'gaussian-bump'");
    }
  }

  if (j.contains("agents")) {
    const json& agents = j.at("agents");
    if (!agents.is_array()) throw CoverageError(ErrorCode::Schema, "agents: expected a list");
    for (std::size_t k = 0; k < agents.size(); ++k) {
      const std::string where = "agents[" + std::to_string(k) + "]";
      detail::require_keys(agents[k], where, {"zeta", "theta", "v", "omega", "gamma", "delta", "Q"}, {"u_bar"});
      AgentSpec a;
      a.state.zeta = detail::to_vec2(agents[k].at("zeta"), where + ".zeta");
      a.state.theta = detail::get_number(agents[k], where, "theta");
      a.state.v = detail::get_number(agents[k], where, "v");
      a.state.omega = detail::get_number(agents[k], where, "omega");
      detail::read_params(agents[k], where, a.params);
      sc.agents.push_back(a);
    }
  }
  if (j.contains("random_agents")) {
    const json& r = j.at("random_agents");
    detail::require_keys(r, "random_agents", {"count", "v", "omega", "gamma", "delta", "Q"},
                         {"margin", "min_separation", "u_bar"});
    RandomAgents ra;
    if (!r.at("count").is_number_unsigned() || r.at("count").get<std::size_t>() == 0)
      throw CoverageError(ErrorCode::Schema, "random_agents.count: expected a positive integer");
    ra.count = r.at("count").get<std::size_t>();
    if (r.contains("margin")) ra.margin = detail::get_number(r, "random_agents", "margin");
    if (r.contains("min_separation")) ra.min_separation = detail::get_number(r, "random_agents", "min_separation");
    ra.v = detail::get_number(r, "random_agents", "v");
    ra.omega = detail::get_number(r, "random_agents", "omega");
    detail::read_params(r, "random_agents", ra.params);
    sc.random_agents = ra;
  }

  sc.controller = detail::to_enum<Controller>(j.at("controller"), "controller",
                                              {{"proposed", Controller::Proposed},
                                               {"conventional", Controller::Conventional}});
  if (j.contains("mode"))
    sc.mode = detail::to_enum<Mode>(j.at("mode"), "mode",
                                    {{"centralized", Mode::Centralized}, {"distributed", Mode::Distributed}});
  if (j.contains("integrator"))
    sc.integrator = detail::to_enum<Integrator>(j.at("integrator"), "integrator",
                                                {{"exact", Integrator::Exact}, {"euler", Integrator::Euler}});
  sc.dt = detail::get_number(j, "", "dt");
  sc.horizon = detail::get_number(j, "", "horizon");
  if (j.contains("loc_tol")) sc.loc_tol = detail::get_number(j, "", "loc_tol");
  if (j.contains("loc_dwell")) sc.loc_dwell = detail::get_number(j, "", "loc_dwell");
  for (const auto& [key, field] : {std::pair<const char*, bool*>{"stop_at_loc", &sc.stop_at_loc},
                                   {"reference_gradients", &sc.reference_gradients},
                                   {"expect_infeasible", &sc.expect_infeasible}}) {
    if (!j.contains(key)) continue;
    if (!j.at(key).is_boolean()) throw CoverageError(ErrorCode::Schema, std::string(key) + ": expected true or false");
    *field = j.at(key).get<bool>();
  }
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) throw CoverageError(ErrorCode::Schema, "seed: expected a non-negative integer");
    sc.seed = j.at("seed").get<std::uint64_t>();
  }
  validate_scenario(sc);
  return sc;
}

inline Scenario load_scenario(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw CoverageError(ErrorCode::Io, file + ": cannot open");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw CoverageError(ErrorCode::Schema, file + ": " + e.what());
  }
  return scenario_from_json(j);
}

inline void save_scenario(const Scenario& sc, const std::string& file) {
  std::ofstream out(file);
  if (!out) throw CoverageError(ErrorCode::Io, file + ": cannot write");
  out << scenario_to_json(sc).dump(2) << '\n';
  if (!out) throw CoverageError(ErrorCode::Io, file + ": write failed");
}

/// Applies "key=value" overrides (gamma, delta, Q as a multiple of I, u_bar) to every agent.
inline void apply_param_override(Scenario& sc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw CoverageError(ErrorCode::Schema, "--params " + assignment + ": expected key=value");
  const std::string key = assignment.substr(0, eq);
  double value = 0.0;
  std::istringstream in(assignment.substr(eq + 1));
  if (!(in >> value) || !in.eof())
    throw CoverageError(ErrorCode::Schema, "--params " + assignment + ": value is not a number");
  auto apply = [&](AgentParams& p) {
    if (key == "gamma") p.gamma = value;
    else if (key == "delta") p.delta = value;
    else if (key == "Q" || key == "q") p.Q = value * Mat2::Identity();
    else if (key == "u_bar") p.u_bar = value;
    else throw CoverageError(ErrorCode::Schema, "--params " + key + ": expected gamma, delta, Q or u_bar");
  };
  for (auto& a : sc.agents) apply(a.params);
  if (sc.random_agents) apply(sc.random_agents->params);
}

}  // namespace csur
