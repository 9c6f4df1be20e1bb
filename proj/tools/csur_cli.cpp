#include "csur/acceptance.hpp"
#include "csur/plots.hpp"
#include "csur/trace_io.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#ifndef CSUR_SCENARIO_DIR
#define CSUR_SCENARIO_DIR "scenarios"
#endif

namespace fs = std::filesystem;
using namespace csur;

namespace {

constexpr int kPass = 0;
constexpr int kViolation = 1;
constexpr int kInputError = 2;

struct Overrides {
  std::string controller;
  std::string mode;
  std::optional<double> dt;
  std::optional<double> horizon;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> params;
  bool reference_gradients = false;
  bool expect_infeasible = false;
};

void add_override_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--controller", o.controller, "proposed or conventional")
      ->check(CLI::IsMember({"proposed", "conventional"}));
  cmd->add_option("--mode", o.mode, "centralized or distributed")->check(CLI::IsMember({"centralized", "distributed"}));
  cmd->add_option("--dt", o.dt, "time step [s]");
  cmd->add_option("--horizon", o.horizon, "horizon T [s]");
  cmd->add_option("--seed", o.seed, "seed for randomly placed agents");
  cmd->add_option("--params", o.params, "per-agent parameter override, e.g. gamma=10 (repeatable)");
  cmd->add_flag("--reference-gradients", o.reference_gradients, "use finite-difference gradients (slow)");
  cmd->add_flag("--expect-infeasible", o.expect_infeasible, "pass iff a virtual center leaves the region");
}

Scenario load_with(const std::string& file, const Overrides& o) {
  Scenario sc = load_scenario(file);
  if (!o.controller.empty())
    sc.controller = o.controller == "proposed" ? Controller::Proposed : Controller::Conventional;
  if (!o.mode.empty()) sc.mode = o.mode == "centralized" ? Mode::Centralized : Mode::Distributed;
  if (o.dt) sc.dt = *o.dt;
  if (o.horizon) sc.horizon = *o.horizon;
  if (o.seed) sc.seed = *o.seed;
  for (const auto& p : o.params) apply_param_override(sc, p);
  if (o.reference_gradients) sc.reference_gradients = true;
  if (o.expect_infeasible) sc.expect_infeasible = true;
  validate_scenario(sc);
  return sc;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw CoverageError(ErrorCode::Io, dir + ": " + ec.message());
}

void print_report(const RunReport& r) {
  std::printf("%s: %s/%s, %zu agents, %zu steps to t=%.2f\n", r.scenario.c_str(), to_string(r.controller),
              to_string(r.mode), r.agents, r.steps, r.final_time);
  std::printf("  V0=%.6g V_end=%.6g", r.V0, r.V_final);
  if (r.time_to_threshold) std::printf(" V<=1e-2 V0 at t=%.2f", *r.time_to_threshold);
  std::printf("\n  converged=%s", r.converged ? "yes" : "no");
  if (r.converged) std::printf(" (LOC from t=%.2f)", r.converged_time);
  std::printf(" min_h=%.6g max|u-w|/(gw)=%.4f monotonicity_violations=%zu\n", r.min_h, r.max_saturation,
              r.monotonicity_violations);
  if (r.infeasibility) std::printf("  infeasibility: agent %d left the region at t=%.2f\n", r.infeasibility->agent, r.infeasibility->t);
  if (r.aborted) std::printf("  aborted: %s\n", r.aborted->c_str());
  if (r.startup_check.performed)
    std::printf("  startup gradient check: max rel err %.2e (%s)\n", r.startup_check.max_rel_error,
                r.startup_check.passed ? "ok" : "FAILED");
}

/// Runs sc, writes every output into dir and returns the report.
RunReport run_and_emit(const Scenario& sc, const std::string& dir, bool log_messages, bool plots) {
  ensure_dir(dir);
  SimOptions opt;
  opt.log_messages = log_messages;
  const Run run = run_scenario(sc, opt);
  const ConvexRegion region = validate_scenario(sc);
  save_scenario(sc, dir + "/scenario.json");
  write_trace_csv(dir + "/trace.csv", run.result.trace);
  write_json(dir + "/report.json", report_to_json(run.report));
  if (log_messages) write_messages_csv(dir + "/messages.csv", run.result.messages);
  if (plots) write_plots(dir, run.result.trace, sc, resolve_agents(sc, region));
  return run.report;
}

int cmd_run(const std::string& file, const Overrides& o, const std::string& out, bool log_messages, bool plots) {
  const Scenario sc = load_with(file, o);
  const RunReport r = run_and_emit(sc, out, log_messages, plots);
  print_report(r);
  std::printf("outputs in %s\n", out.c_str());
  return r.passed(sc.expect_infeasible) ? kPass : kViolation;
}

int cmd_check(const std::string& trace_file, const std::string& scenario_file, const std::string& out) {
  const Scenario sc = load_scenario(scenario_file);
  const Audit audit = check_trace(read_trace_csv(trace_file), sc);
  if (!out.empty()) write_json(out, audit_to_json(audit));
  print_report(audit.report);
  std::printf("  max rel error of logged V: %.2e\n", audit.max_V_rel_error);
  for (const auto& v : audit.violations)
    std::printf("  violation: %s at step %zu (t=%.2f)%s: %s\n", v.kind.c_str(), v.step, v.t,
                v.agent >= 0 ? (" agent " + std::to_string(v.agent)).c_str() : "", v.detail.c_str());
  std::printf("%zu violations\n", audit.violations.size());
  return audit.violations.empty() ? kPass : kViolation;
}

int cmd_sweep(const std::string& file, const Overrides& o, const std::vector<std::string>& grid, const std::string& out) {
  const Scenario base = load_with(file, o);
  std::vector<std::string> points{"baseline"};
  points.insert(points.end(), grid.begin(), grid.end());
  const auto rows = accept::sweep_rows(base, points);
  ensure_dir(out);
  std::FILE* csv = std::fopen((out + "/sweep.csv").c_str(), "w");
  if (!csv) throw CoverageError(ErrorCode::Io, out + "/sweep.csv: cannot write");
  std::fprintf(csv, "point,time_to_threshold,max_du,max_saturation_ratio,monotonicity_violations,min_h\n");
  std::printf("%-12s %18s %10s %10s %10s\n", "point", "time_to_threshold", "max_du", "max_sat", "mono_viol");
  bool ok = true;
  for (const auto& r : rows) {
    const double t = accept::threshold_time(r.report);
    std::printf("%-12s %18.2f %10.4g %10.4f %10zu\n", r.label.c_str(), t, r.report.max_du, r.report.max_saturation,
                r.report.monotonicity_violations);
    std::fprintf(csv, "%s,%.17g,%.17g,%.17g,%zu,%.17g\n", r.label.c_str(), t, r.report.max_du,
                 r.report.max_saturation, r.report.monotonicity_violations, r.report.min_h);
    ok = ok && r.report.max_saturation < 1.0 && r.report.min_h > 0.0 && !r.report.aborted;
  }
  std::fclose(csv);
  return ok ? kPass : kViolation;
}

int cmd_compare(const std::string& file, const Overrides& o, const std::string& out, bool plots) {
  Scenario conv = load_with(file, o);
  conv.controller = Controller::Conventional;
  conv.expect_infeasible = true;
  Scenario prop = conv;
  prop.controller = Controller::Proposed;
  prop.expect_infeasible = false;
  const RunReport a = run_and_emit(conv, out + "/conventional", false, plots);
  const RunReport b = run_and_emit(prop, out + "/proposed", false, plots);
  print_report(a);
  print_report(b);
  const bool ok = a.passed(true) && b.passed(false);
  std::printf("comparison: conventional %s, proposed %s\n", a.infeasibility ? "left the region" : "stayed inside",
              b.passed(false) ? "kept every invariant" : "broke an invariant");
  return ok ? kPass : kViolation;
}

int cmd_accept(const std::string& dir, bool large, const std::vector<int>& only) {
  AcceptanceOptions opt{dir, large};
  bool all = true;
  for (int id = 1; id <= 9; ++id) {
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    const CriterionResult r = run_criterion(id, opt);
    std::printf("%s\n", format_result(r).c_str());
    std::fflush(stdout);
    all = all && r.passed;
  }
  return all ? kPass : kViolation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coverage control simulator for constant-speed unicycle robots"};
  app.require_subcommand(1);

  Overrides o;
  std::string scenario, trace, out = "out", report_out, scenario_dir = CSUR_SCENARIO_DIR;
  bool log_messages = false, no_plots = false, large = false;
  std::vector<std::string> grid{"gamma=10", "delta=10", "Q=10"};
  std::vector<int> only;

  CLI::App* run = app.add_subcommand("run", "simulate a scenario and write trace, report and plots");
  run->add_option("scenario", scenario, "scenario JSON")->required();
  add_override_flags(run, o);
  run->add_option("--out", out, "output directory");
  run->add_flag("--log-messages", log_messages, "write messages.csv (distributed mode)");
  run->add_flag("--no-plots", no_plots, "skip the SVG plots");

  CLI::App* check = app.add_subcommand("check", "audit a trace against its scenario");
  check->add_option("trace", trace, "trace.csv")->required();
  check->add_option("scenario", scenario, "scenario JSON the trace was produced from")->required();
  check->add_option("--out", report_out, "write the audit as JSON to this file");

  CLI::App* sweep = app.add_subcommand("sweep", "parameter sweep from a shared initial condition");
  sweep->add_option("scenario", scenario, "base scenario JSON")->required();
  add_override_flags(sweep, o);
  sweep->add_option("--grid", grid, "grid points as key=value (baseline is always included)")->delimiter(',');
  sweep->add_option("--out", out, "output directory");

  CLI::App* compare = app.add_subcommand("compare", "conventional vs proposed controller from the same initials");
  compare->add_option("scenario", scenario, "scenario JSON")->required();
  add_override_flags(compare, o);
  compare->add_option("--out", out, "output directory");
  compare->add_flag("--no-plots", no_plots, "skip the SVG plots");

  CLI::App* acc = app.add_subcommand("accept", "run the acceptance suite");
  acc->add_option("--scenarios", scenario_dir, "directory with the bundled scenarios");
  acc->add_flag("--large", large, "include the 100-agent run");
  acc->add_option("--only", only, "run only these criteria")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kInputError;
  }

  try {
    if (*run) return cmd_run(scenario, o, out, log_messages, !no_plots);
    if (*check) return cmd_check(trace, scenario, report_out);
    if (*sweep) return cmd_sweep(scenario, o, grid, out);
    if (*compare) return cmd_compare(scenario, o, out, !no_plots);
    if (*acc) return cmd_accept(scenario_dir, large, only);
  } catch (const CoverageError& e) {
    std::fprintf(stderr, "error [%s]: %s\n", to_string(e.code()), e.what());
    return kInputError;
  }
  return kInputError;
}
