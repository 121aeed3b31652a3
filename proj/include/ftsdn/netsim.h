#pragma once

// Deterministic discrete-event harness.
//
// Virtual time advances in steps; every hop takes `latency` steps (plus seeded
// jitter). Channels are reliable and FIFO while both endpoints live. Crashing
// a controller drops everything queued on its channels, makes every switch run
// its connection-drop handling, and schedules a failure notice to each
// survivor after `detector_delay` steps.
//
// Trace layout: a META header, the setup phase, a META "setup_done" marker,
// the run, then per-replica META "final" records and a META "end" record.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ftsdn/scenario.h"
#include "ftsdn/trace.h"

namespace ftsdn {

struct MetricsReport {
  std::string variant;
  // DELIVER counts after setup, by message type.
  std::map<std::string, std::uint64_t> deliveries_by_kind;
  std::uint64_t total_deliveries = 0;
  std::uint64_t setup_deliveries = 0;
  // Distinct non-ack events emitted by switches.
  std::uint64_t events = 0;

  double per_event_overhead() const {
    return events ? static_cast<double>(total_deliveries) / static_cast<double>(events) : 0.0;
  }
  bool operator==(const MetricsReport&) const = default;
};

MetricsReport metrics_from_trace(const Trace& trace);
nlohmann::json to_json(const MetricsReport& m);

struct RunResult {
  Trace trace;
  MetricsReport metrics;
  bool quiescent = true;
};

// Throws ScenarioError when the scenario is invalid.
RunResult run(const Scenario& scenario);

// One crash point found by enumerate_crash_points.
struct CrashPoint {
  TracePoint point;
  std::uint64_t step = 0;  // step of the triggering record in the fault-free trace
  std::string message_kind;
};

struct DerivedScenario {
  CrashPoint crash_point;
  Scenario scenario;
};

// Runs `scenario` without faults and yields one derived scenario per record
// where `target` sends a message, receives one, or has one of its messages
// delivered. Throws ScenarioError when the scenario already has trace-point
// faults.
std::vector<DerivedScenario> enumerate_crash_points(const Scenario& scenario, ControllerId target);

// Trace-level checks of channel behaviour; each returns a description of the
// first violation, or an empty string.
std::string check_fifo(const Trace& trace);
std::string check_fence(const Trace& trace);

}  // namespace ftsdn
