#include "csur/plots.hpp"
#include "csur/trace_io.hpp"

#include <gtest/gtest.h>

#include <sstream>
#include <string>

using namespace csur;

namespace {

Scenario short_case(const char* name, double horizon) {
  Scenario sc = load_scenario(std::string(CSUR_SCENARIO_DIR) + "/" + name + ".json");
  sc.horizon = horizon;
  return sc;
}

const Run& case1_run() {
  static const Run run = run_scenario(short_case("case1", 5.0));
  return run;
}

std::vector<StepRecord> round_trip(const std::vector<StepRecord>& trace) {
  std::stringstream buf;
  write_trace_csv(buf, trace);
  return read_trace_csv(buf);
}

bool has_violation(const Audit& a, const std::string& kind, std::size_t step, int agent) {
  for (const auto& v : a.violations)
    if (v.kind == kind && v.step == step && v.agent == agent) return true;
  return false;
}

void expect_trace_format(const std::string& csv) {
  std::istringstream in(csv);
  try {
    read_trace_csv(in);
    FAIL() << csv;
  } catch (const CoverageError& e) {
    EXPECT_EQ(e.code(), ErrorCode::TraceFormat);
  }
}

}  // namespace

TEST(TraceCsv, RowCountIsStepsTimesAgents) {
  const auto& trace = case1_run().result.trace;
  std::stringstream buf;
  write_trace_csv(buf, trace);
  std::string line;
  std::size_t rows = 0;
  std::getline(buf, line);
  EXPECT_EQ(line, trace_csv_header());
  while (std::getline(buf, line)) ++rows;
  EXPECT_EQ(trace.size(), 101u);
  EXPECT_EQ(rows, trace.size() * 6);
}

TEST(TraceCsv, RoundTripIsLossless) {
  const auto& trace = case1_run().result.trace;
  const auto back = round_trip(trace);
  ASSERT_EQ(back.size(), trace.size());
  for (std::size_t s = 0; s < trace.size(); ++s) {
    EXPECT_EQ(back[s].t, trace[s].t);
    EXPECT_EQ(back[s].V, trace[s].V);
    EXPECT_EQ(back[s].H, trace[s].H);
    for (std::size_t k = 0; k < trace[s].agents.size(); ++k) {
      const auto& a = back[s].agents[k];
      const auto& b = trace[s].agents[k];
      EXPECT_EQ(a.zeta, b.zeta);
      EXPECT_EQ(a.theta, b.theta);
      EXPECT_EQ(a.z, b.z);
      EXPECT_EQ(a.c, b.c);
      EXPECT_EQ(a.u, b.u);
      EXPECT_EQ(a.sigma, b.sigma);
    }
  }
}

TEST(TraceCsv, CorruptInputIsRejected) {
  const std::string h = std::string(trace_csv_header()) + "\n";
  const std::string row0 = "0,0,1,1,0,1,1.2,1,1,0.8,0,1,1\n";
  const std::string row1 = "0,1,2,1,0,2,1.2,2,1,0.8,0,1,1\n";
  expect_trace_format("");
  expect_trace_format("t,agent\n" + row0);
  expect_trace_format(h);
  expect_trace_format(h + "0,0,1,1,0,1,1.2,1,1,0.8,0,1\n");
  expect_trace_format(h + "0,0,1,1,0,1,1.2,1,1,0.8,0,1,1,7\n");
  expect_trace_format(h + "0,0,1,x,0,1,1.2,1,1,0.8,0,1,1\n");
  expect_trace_format(h + row1);
  expect_trace_format(h + row0 + "0,1,2,1,0,2,1.2,2,1,0.8,0,2,1\n");
  expect_trace_format(h + row0 + row1 + row0);
  expect_trace_format(h + row0 + row1 + "0.05,0,1,1,0,1,1.2,1,1,0.8,0,1,1\n");
}

TEST(TraceCsv, ErrorsNameTheLine) {
  std::istringstream in(std::string(trace_csv_header()) + "\n0,0,1,1,0,1,1.2,1,1,0.8,0,1,1\n0,0,oops\n");
  try {
    read_trace_csv(in, "trace.csv");
    FAIL();
  } catch (const CoverageError& e) {
    EXPECT_NE(std::string(e.what()).find("trace.csv:3"), std::string::npos) << e.what();
  }
}

TEST(CheckTrace, CleanRunHasNoViolations) {
  const Scenario sc = short_case("case1", 5.0);
  const Audit audit = check_trace(round_trip(case1_run().result.trace), sc);
  EXPECT_TRUE(audit.violations.empty());
  EXPECT_LT(audit.max_V_rel_error, 1e-9);
  EXPECT_EQ(audit.report.steps, case1_run().report.steps);
  EXPECT_EQ(audit.report.V_final, case1_run().report.V_final);
}

TEST(CheckTrace, VirtualCenterOutsideIsFlaggedAtItsStep) {
  const Scenario sc = short_case("case1", 5.0);
  auto trace = case1_run().result.trace;
  auto& a = trace[37].agents[2];
  const AgentSpec& spec = sc.agents[2];
  a.z = {4.5, 1.0};
  a.zeta = orbit_point(a.z, a.theta, spec.state.v, spec.state.omega);
  const Audit audit = check_trace(trace, sc);
  EXPECT_TRUE(has_violation(audit, "containment", 37, 2));
  for (const auto& v : audit.violations) EXPECT_EQ(v.step, 37u) << v.kind;
}

TEST(CheckTrace, SaturatedInputIsFlagged) {
  const Scenario sc = short_case("case1", 5.0);
  auto trace = case1_run().result.trace;
  const AgentSpec& spec = sc.agents[4];
  trace[12].agents[4].u = spec.state.omega + spec.params.gamma * spec.state.omega;
  const Audit audit = check_trace(trace, sc);
  EXPECT_TRUE(has_violation(audit, "saturation", 12, 4));
}

TEST(CheckTrace, TamperedCostAndPositionAreFlagged) {
  const Scenario sc = short_case("case1", 5.0);
  auto trace = case1_run().result.trace;
  trace[20].V *= 0.5;
  trace[40].agents[1].zeta.x() += 0.01;
  const Audit audit = check_trace(trace, sc);
  EXPECT_TRUE(has_violation(audit, "cost", 20, -1));
  EXPECT_TRUE(has_violation(audit, "consistency", 40, 1));
}

TEST(CheckTrace, IncreasingCostIsAMonotonicityViolation) {
  const Scenario sc = short_case("case1", 5.0);
  auto trace = case1_run().result.trace;
  for (auto& rec : trace) rec.V = 1.0;
  trace[50].V = 1.1;
  const Audit audit = check_trace(trace, sc);
  EXPECT_TRUE(has_violation(audit, "monotonicity", 50, -1));
}

TEST(CheckTrace, AgentCountMustMatch) {
  auto trace = case1_run().result.trace;
  for (auto& rec : trace) rec.agents.pop_back();
  EXPECT_THROW(check_trace(trace, short_case("case1", 5.0)), CoverageError);
}

TEST(Report, JsonFields) {
  const auto j = report_to_json(case1_run().report);
  for (const char* key : {"converged", "converged_time", "V0", "V_final", "time_to_threshold", "min_h",
                          "max_saturation_ratio", "monotonicity_violations", "infeasibility", "message_count"})
    EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_EQ(j["controller"], "proposed");
  EXPECT_TRUE(j["infeasibility"].is_null());
}

TEST(Determinism, RepeatedRunsAreBitwiseIdentical) {
  const csur::Run again = run_scenario(short_case("case1", 5.0));
  std::stringstream a, b;
  write_trace_csv(a, case1_run().result.trace);
  write_trace_csv(b, again.result.trace);
  EXPECT_EQ(a.str(), b.str());
}

TEST(Plots, SvgIsDeterministic) {
  const Scenario sc = short_case("case1", 5.0);
  const auto& trace = case1_run().result.trace;
  const std::string first = trajectories_svg(trace, sc.region);
  EXPECT_EQ(first, trajectories_svg(round_trip(trace), sc.region));
  EXPECT_EQ(first.rfind("<svg", 0), 0u);
  EXPECT_NE(first.find("</svg>"), std::string::npos);
  const auto agents = resolve_agents(sc, validate_scenario(sc));
  EXPECT_EQ(inputs_svg(trace, agents), inputs_svg(trace, agents));
}

TEST(Plots, CostPlotFollowsTheController) {
  const auto& trace = case1_run().result.trace;
  const std::string v = cost_svg(trace, Controller::Proposed);
  const std::string h = cost_svg(trace, Controller::Conventional);
  EXPECT_NE(v.find(">V</text>"), std::string::npos);
  EXPECT_NE(h.find(">H</text>"), std::string::npos);
  EXPECT_NE(v, h);
}

TEST(Plots, LongTracesAreDecimated) {
  const auto idx = detail::decimate(120001);
  EXPECT_LE(idx.size(), 2001u);
  EXPECT_EQ(idx.front(), 0u);
  EXPECT_EQ(idx.back(), 120000u);
  EXPECT_EQ(detail::decimate(10).size(), 10u);
}

TEST(ConventionalRun, CompareScenarioLeavesTheRegion) {
  const csur::Run run = run_scenario(short_case("compare", 50.0));
  ASSERT_TRUE(run.report.infeasibility.has_value());
  EXPECT_TRUE(run.report.passed(true));
  EXPECT_FALSE(run.report.passed(false));
}
