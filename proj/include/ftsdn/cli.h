#pragma once

// Scenario runner behind the `ftsdn` tool. Every command returns a process
// exit code: 0 when all properties pass, 1 on a violation, 2 on a usage,
// scenario or trace error.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ftsdn/checker.h"
#include "ftsdn/netsim.h"
#include "ftsdn/scenario.h"

namespace ftsdn {

inline constexpr int kExitPass = 0;
inline constexpr int kExitViolation = 1;
inline constexpr int kExitError = 2;

struct CliOptions {
  std::optional<std::string> trace_out;
  std::optional<std::string> metrics_out;
  unsigned jobs = 1;
  std::optional<std::uint64_t> seed;
  // Sweep target: "leader" (controller 0, the leader of the first view) or "replica:<id>".
  std::string crash = "leader";
};

// Throws ScenarioError on anything else.
ControllerId parse_crash_target(const std::string& text, std::uint32_t n_controllers);

struct SweepRow {
  CrashPoint crash_point;
  std::string name;
  std::vector<Verdict> verdicts;
  std::vector<Anomaly> anomalies;
  MetricsReport metrics;
  bool stalled = false;
  // Set when the run itself aborted (an internal invariant broke).
  std::string error;

  bool pass() const { return error.empty() && all_pass(verdicts); }
};

// Rows come back in crash-point order whatever the number of jobs.
std::vector<SweepRow> sweep(const Scenario& scenario, ControllerId target, unsigned jobs);

// "+" for a property that passed in every row.
std::string sweep_signs(const std::vector<SweepRow>& rows);

int cmd_run(const std::string& scenario_path, const CliOptions& opts, std::ostream& out,
            std::ostream& err);
int cmd_sweep(const std::string& scenario_path, const CliOptions& opts, std::ostream& out,
              std::ostream& err);
int cmd_compare(const std::string& scenario_path, const CliOptions& opts, std::ostream& out,
                std::ostream& err);
int cmd_check(const std::string& trace_path, std::ostream& out, std::ostream& err);

}  // namespace ftsdn
