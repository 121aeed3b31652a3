#pragma once

// Declarative description of one simulation run, and its YAML form.
//
//   name: two-switch
//   variant: PAPER_A              # NAIVE | PAPER_A | PAPER_B
//   n_controllers: 3
//   app: mac-learner              # mac-learner | static-router
//   routes: []                    # static-router only: {prefix, port, switches?}
//   switches:
//     - {id: 1, ports: [1, 2, 3], flows: []}
//   workload:
//     - {t: 0, switch: 1, in_port: 1, payload: "0201"}
//   faults:
//     - {target: 0, at_time: 5}
//     - {target: 0, at_trace_point: {direction: SEND, kind: "*", occurrence: 3}}
//   detector_delay: 2
//   seed: 1
//   quiesce_limit: 200000
//
// Workload and AtTime fault times are relative to the end of setup.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "ftsdn/app.h"
#include "ftsdn/ofmodel.h"
#include "ftsdn/replica.h"
#include "ftsdn/switchsim.h"

namespace ftsdn {

class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(std::size_t line, const std::string& message, std::string section = {});
  // 1-based; 0 when the error has no source location.
  std::size_t line() const { return line_; }
  // Top-level key the error belongs to, when known.
  const std::string& section() const { return section_; }
  const std::string& message() const { return message_; }

 private:
  std::size_t line_;
  std::string section_;
  std::string message_;
};

struct SwitchSpec {
  SwitchId id = 0;
  std::vector<PortId> ports;
  std::vector<FlowEntry> flows;
};

struct WorkloadItem {
  std::uint64_t t = 0;
  SwitchId sw = 0;
  PortId in_port = 0;
  Bytes payload;
};

// Which trace records a trace-point fault counts, relative to its target:
//   SEND      - the target sends a message;
//   RECV      - a message is delivered to the target (crash before it is processed);
//   DELIVERED - a message from the target is delivered and fully processed.
enum class Direction { kSend, kRecv, kDelivered };

std::string_view to_string(Direction d);
std::optional<Direction> parse_direction(std::string_view text);

struct TracePoint {
  Direction direction = Direction::kSend;
  // Message type name, or "*" for any.
  std::string message_kind = "*";
  // 1-based occurrence among matching records.
  std::uint64_t occurrence = 1;

  bool operator==(const TracePoint&) const = default;
};

struct AtTime {
  std::uint64_t t = 0;
  bool operator==(const AtTime&) const = default;
};

struct FaultSpec {
  ControllerId target = 0;
  std::variant<AtTime, TracePoint> when;

  bool operator==(const FaultSpec&) const = default;
};

struct Scenario {
  std::string name = "scenario";
  Variant variant = Variant::kPaperA;
  std::uint32_t n_controllers = 3;
  std::vector<SwitchSpec> switches;
  std::string app = "mac-learner";
  std::vector<StaticRoute> routes;
  std::vector<WorkloadItem> workload;
  std::vector<FaultSpec> faults;
  std::uint64_t detector_delay = 2;
  std::uint64_t seed = 1;
  std::uint64_t quiesce_limit = 200000;
  // Per-hop delivery latency, plus up to `jitter` extra steps drawn from the seed.
  std::uint64_t latency = 1;
  std::uint64_t jitter = 0;
  // Fixture: slaves never enable PacketIn delivery.
  bool suppress_slave_delivery = false;
};

Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& path);
std::string dump_scenario(const Scenario& s);

// Throws ScenarioError (line 0) when the scenario breaks an invariant.
void validate(const Scenario& s);

AppState initial_app_state(const Scenario& s);

}  // namespace ftsdn
