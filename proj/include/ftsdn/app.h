#pragma once

// Deterministic network applications run by every replica. process_event is a
// pure function of (state, event): no clocks, no randomness, no I/O.

#include <map>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "ftsdn/ofmodel.h"

namespace ftsdn {

// Commands produced for one event, grouped by target switch. Only switches
// with at least one command appear.
using SwitchCommands = std::map<SwitchId, std::vector<BundleInner>>;

// Learning switch keyed on a two-byte payload header: byte 0 is the
// destination address, byte 1 the source address.
struct MacLearnerState {
  std::map<SwitchId, std::vector<PortId>> ports;
  std::map<std::pair<SwitchId, std::uint8_t>, PortId> table;

  bool operator==(const MacLearnerState&) const = default;
};

struct StaticRoute {
  Bytes prefix;
  PortId port = 0;
  // Switches that receive the entry; empty means the event's own switch.
  std::vector<SwitchId> switches;

  bool operator==(const StaticRoute&) const = default;
};

struct StaticRouterState {
  std::vector<StaticRoute> routes;
  std::uint64_t routed = 0;

  bool operator==(const StaticRouterState&) const = default;
};

using AppState = std::variant<MacLearnerState, StaticRouterState>;

inline constexpr int kLearnedFlowPriority = 10;

struct AppResult {
  AppState state;
  SwitchCommands commands;
};

AppResult process_event(const AppState& state, SwitchId sw, PortId in_port, const Bytes& payload);

// 16 hex digits; equal states have equal digests.
std::string digest(const AppState& state);

std::string_view app_name(const AppState& state);

}  // namespace ftsdn
