#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ftsdn/cli.h"

using namespace ftsdn;

namespace {

std::string scenario(const std::string& name) {
  return std::string(FTSDN_SOURCE_DIR) + "/scenarios/" + name + ".yaml";
}

std::string fixture(const std::string& name) {
  return std::string(FTSDN_SOURCE_DIR) + "/tests/data/fixtures/" + name + ".jsonl";
}

std::string temp_file(const std::string& name, const std::string& content = "") {
  const auto path = std::filesystem::temp_directory_path() / ("ftsdn_cli_" + name);
  if (!content.empty()) std::ofstream(path) << content;
  return path.string();
}

std::string last_line(const std::string& text) {
  auto end = text.find_last_not_of('\n');
  auto start = text.rfind('\n', end);
  return text.substr(start == std::string::npos ? 0 : start + 1, end - (start == std::string::npos ? 0 : start + 1) + 1);
}

}  // namespace

TEST(CliRun, PassWritesTraceAndMetrics) {
  CliOptions opts;
  opts.trace_out = temp_file("run.jsonl");
  opts.metrics_out = temp_file("run.json");
  std::ostringstream out, err;
  EXPECT_EQ(cmd_run(scenario("two_switch_mac"), opts, out, err), kExitPass);
  EXPECT_EQ(last_line(out.str()), "RESULT pass P1..P6=++++++");
  const auto trace = load_trace(*opts.trace_out);
  std::ifstream m(*opts.metrics_out);
  const auto metrics = nlohmann::json::parse(m);
  EXPECT_EQ(metrics, to_json(metrics_from_trace(trace)));

  std::ostringstream check_out;
  EXPECT_EQ(cmd_check(*opts.trace_out, check_out, err), kExitPass);
}

TEST(CliRun, SeedOverrideChangesJitteredRun) {
  const auto path = temp_file("jitter.yaml", "name: j\njitter: 3\nswitches:\n  - {id: 1, ports: [1, 2]}\n"
                                             "workload:\n  - {t: 0, switch: 1, in_port: 1, payload: \"0201\"}\n");
  CliOptions a, b;
  a.trace_out = temp_file("seed_a.jsonl");
  b.trace_out = temp_file("seed_b.jsonl");
  b.seed = 99;
  std::ostringstream out, err;
  ASSERT_EQ(cmd_run(path, a, out, err), kExitPass);
  ASSERT_EQ(cmd_run(path, b, out, err), kExitPass);
  const auto ta = load_trace(*a.trace_out);
  const auto tb = load_trace(*b.trace_out);
  EXPECT_EQ(ta.front().get("seed"), "1");
  EXPECT_EQ(tb.front().get("seed"), "99");
}

TEST(CliRun, NaiveViolationExitsOne) {
  const auto path = temp_file("naive_fault.yaml",
                              "name: naive-fault\nvariant: NAIVE\nswitches:\n  - {id: 1, ports: [1, 2, 3]}\n"
                              "workload:\n  - {t: 0, switch: 1, in_port: 1, payload: \"0a01\"}\n"
                              "faults:\n  - {target: 0, at_trace_point: {direction: DELIVERED, kind: PacketOut, occurrence: 1}}\n");
  std::ostringstream out, err;
  EXPECT_EQ(cmd_run(path, {}, out, err), kExitViolation);
  EXPECT_NE(out.str().find("REPEATED_COMMAND"), std::string::npos);
}

TEST(CliRun, MalformedScenarioExitsTwoWithLine) {
  const auto path = temp_file("bad.yaml", "name: bad\nswitches:\n  - {id: 1, ports: [1], colour: red}\n");
  std::ostringstream out, err;
  EXPECT_EQ(cmd_run(path, {}, out, err), kExitError);
  EXPECT_NE(err.str().find("line 3"), std::string::npos) << err.str();
  EXPECT_EQ(cmd_run("/nonexistent.yaml", {}, out, err), kExitError);
}

TEST(CliSweep, BundlesPassNaiveFails) {
  CliOptions opts;
  opts.jobs = 4;
  std::ostringstream out, err;
  EXPECT_EQ(cmd_sweep(scenario("two_switch_mac"), opts, out, err), kExitPass);
  EXPECT_EQ(last_line(out.str()), "RESULT pass P1..P6=++++++");
  std::ostringstream naive;
  EXPECT_EQ(cmd_sweep(scenario("two_switch_mac_naive"), opts, naive, err), kExitViolation);
  EXPECT_NE(naive.str().find("REPEATED_COMMAND"), std::string::npos);
}

TEST(CliSweep, TableOrderIndependentOfJobs) {
  CliOptions one, many;
  many.jobs = 8;
  std::ostringstream a, b, err;
  cmd_sweep(scenario("two_switch_mac_naive"), one, a, err);
  cmd_sweep(scenario("two_switch_mac_naive"), many, b, err);
  EXPECT_EQ(a.str(), b.str());
}

TEST(CliSweep, UsageErrors) {
  const auto path = temp_file("tp.yaml", "name: tp\nswitches:\n  - {id: 1, ports: [1]}\n"
                                         "faults:\n  - {target: 0, at_trace_point: {direction: SEND, occurrence: 1}}\n");
  std::ostringstream out, err;
  EXPECT_EQ(cmd_sweep(path, {}, out, err), kExitError);
  CliOptions bad;
  bad.crash = "replica:7";
  EXPECT_EQ(cmd_sweep(scenario("two_switch_mac"), bad, out, err), kExitError);
  bad.crash = "follower";
  EXPECT_EQ(cmd_sweep(scenario("two_switch_mac"), bad, out, err), kExitError);
  EXPECT_EQ(parse_crash_target("replica:2", 3), 2u);
  EXPECT_EQ(parse_crash_target("leader", 3), 0u);
}

TEST(CliCompare, SideBySide) {
  CliOptions opts;
  opts.jobs = 4;
  std::ostringstream out, err;
  EXPECT_EQ(cmd_compare(scenario("single_event_router"), opts, out, err), kExitPass);
  const auto text = out.str();
  EXPECT_NE(text.find("total deliveries"), std::string::npos);
  EXPECT_NE(text.find("18"), std::string::npos);
  EXPECT_EQ(last_line(text), "RESULT pass P1..P6=++++++");
}

TEST(CliCheck, ExitCodes) {
  std::ostringstream out, err;
  EXPECT_EQ(cmd_check(fixture("pass_basic"), out, err), kExitPass);
  EXPECT_EQ(cmd_check(fixture("fail_p3_duplicate"), out, err), kExitViolation);
  EXPECT_EQ(cmd_check(fixture("truncated"), out, err), kExitError);
  EXPECT_EQ(cmd_check("/nonexistent.jsonl", out, err), kExitError);
  EXPECT_EQ(cmd_check(temp_file("empty.jsonl", "\n"), out, err), kExitError);
}
