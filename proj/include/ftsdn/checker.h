#pragma once

// Consistency properties verdicted over a recorded trace:
//   P1 total order        replicas apply events in prefix-compatible orders
//   P2 at least once      every switch event is applied by every survivor
//   P3 at most once       no replica applies an event twice
//   P4 exactly-once cmds  each committed command batch executes once per switch
//   P5 convergence        survivors end with equal applied index and app state
//   P6 bundle atomicity   bundle effects follow their commit; discarded bundles
//                         have no effects
//
// P2, P4 and P5 need a quiescent trace; P2 and P4 also need at most
// floor(n/2) crashes. When a precondition does not hold the verdict passes
// with a note, except P4, which then still rejects repeated commits.

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ftsdn/trace.h"

namespace ftsdn {

enum class Property { kP1, kP2, kP3, kP4, kP5, kP6 };

inline constexpr Property kAllProperties[] = {Property::kP1, Property::kP2, Property::kP3,
                                              Property::kP4, Property::kP5, Property::kP6};

std::string_view to_string(Property p);
std::string_view describe(Property p);

struct Witness {
  std::vector<std::uint64_t> steps;
  std::string description;
  // P4: executions observed vs. expected for one (index, switch).
  std::optional<std::uint64_t> observed;
  std::optional<std::uint64_t> expected;
};

struct Verdict {
  Property property = Property::kP1;
  bool pass = true;
  std::vector<Witness> witnesses;
  std::string note;
};

// Header and summary facts the properties share. Throws TraceError when the
// trace lacks its header or end record.
struct TraceSummary {
  std::string variant;
  std::uint32_t n_controllers = 0;
  std::set<std::string> switches;
  std::set<std::string> crashed;
  bool quiescent = false;

  bool within_fault_bound() const { return crashed.size() <= n_controllers / 2; }
};

TraceSummary summarize(const Trace& trace);

Verdict check_total_order(const Trace& trace);
Verdict check_at_least_once(const Trace& trace);
Verdict check_at_most_once(const Trace& trace);
Verdict check_exactly_once_commands(const Trace& trace);
Verdict check_replica_convergence(const Trace& trace);
Verdict check_bundle_atomicity(const Trace& trace);

std::vector<Verdict> check_all(const Trace& trace);

// Re-evaluates a witness against the trace: true when the cited steps exist
// and exhibit the violation the witness describes.
bool witness_holds(const Trace& trace, Property property, const Witness& witness);

enum class Anomaly {
  kLostEvent,
  kRepeatedEvent,
  kOrderDivergence,
  kRepeatedCommand,
  kMissingCommand,
  kStateDivergence,
  kNonAtomicBundle,
};

std::string_view to_string(Anomaly a);

std::vector<Anomaly> classify_anomalies(const std::vector<Verdict>& verdicts);

bool all_pass(const std::vector<Verdict>& verdicts);
// "+-++++" in property order.
std::string verdict_signs(const std::vector<Verdict>& verdicts);
// RESULT pass|fail P1..P6=<signs>
std::string summary_line(const std::vector<Verdict>& verdicts);
// One block per property followed by the summary line.
std::string format_report(const std::vector<Verdict>& verdicts);

}  // namespace ftsdn
