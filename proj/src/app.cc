#include "ftsdn/app.h"

#include <algorithm>
#include <cstdio>

namespace ftsdn {

namespace {

AppResult process_mac_learner(const MacLearnerState& state, SwitchId sw, PortId in_port,
                              const Bytes& payload) {
  AppResult result{state, {}};
  if (payload.size() < 2) return result;
  auto& next = std::get<MacLearnerState>(result.state);
  const std::uint8_t dst = payload[0];
  const std::uint8_t src = payload[1];
  next.table[{sw, src}] = in_port;

  auto& cmds = result.commands[sw];
  const auto known = next.table.find({sw, dst});
  if (known != next.table.end() && known->second != in_port) {
    FlowMod to_dst;
    to_dst.match.payload_prefix = Bytes{dst};
    to_dst.priority = kLearnedFlowPriority;
    to_dst.actions = {Action::output(known->second)};
    cmds.emplace_back(std::move(to_dst));
    cmds.emplace_back(PacketOut{{Action::output(known->second)}, payload});
    return result;
  }

  // Unknown destination: install the reverse path for the source, flood the packet.
  FlowMod to_src;
  to_src.match.payload_prefix = Bytes{src};
  to_src.priority = kLearnedFlowPriority;
  to_src.actions = {Action::output(in_port)};
  cmds.emplace_back(std::move(to_src));
  PacketOut flood{{}, payload};
  if (auto ports = next.ports.find(sw); ports != next.ports.end()) {
    for (PortId p : ports->second) {
      if (p != in_port) flood.actions.push_back(Action::output(p));
    }
  }
  if (!flood.actions.empty()) cmds.emplace_back(std::move(flood));
  return result;
}

AppResult process_static_router(const StaticRouterState& state, SwitchId sw, PortId,
                                const Bytes& payload) {
  AppResult result{state, {}};
  auto& next = std::get<StaticRouterState>(result.state);
  for (const auto& route : state.routes) {
    if (payload.size() < route.prefix.size() ||
        !std::equal(route.prefix.begin(), route.prefix.end(), payload.begin())) {
      continue;
    }
    FlowMod fm;
    fm.match.payload_prefix = route.prefix;
    fm.priority = static_cast<int>(route.prefix.size());
    fm.actions = {Action::output(route.port)};
    if (route.switches.empty()) {
      result.commands[sw].emplace_back(fm);
    } else {
      for (SwitchId target : route.switches) result.commands[target].emplace_back(fm);
    }
    ++next.routed;
    break;
  }
  return result;
}

// FNV-1a over a canonical byte stream.
class Hasher {
 public:
  void add(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) byte(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void add(const Bytes& b) {
    add(b.size());
    for (auto x : b) byte(x);
  }
  std::uint64_t value() const { return h_; }

 private:
  void byte(std::uint8_t b) {
    h_ ^= b;
    h_ *= 0x100000001b3ULL;
  }
  std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

}  // namespace

AppResult process_event(const AppState& state, SwitchId sw, PortId in_port, const Bytes& payload) {
  if (const auto* mac = std::get_if<MacLearnerState>(&state)) {
    return process_mac_learner(*mac, sw, in_port, payload);
  }
  return process_static_router(std::get<StaticRouterState>(state), sw, in_port, payload);
}

std::string digest(const AppState& state) {
  Hasher h;
  h.add(state.index());
  if (const auto* mac = std::get_if<MacLearnerState>(&state)) {
    h.add(mac->ports.size());
    for (const auto& [sw, ports] : mac->ports) {
      h.add(sw);
      h.add(ports.size());
      for (auto p : ports) h.add(p);
    }
    h.add(mac->table.size());
    for (const auto& [key, port] : mac->table) {
      h.add(key.first);
      h.add(key.second);
      h.add(port);
    }
  } else {
    const auto& router = std::get<StaticRouterState>(state);
    h.add(router.routes.size());
    for (const auto& r : router.routes) {
      h.add(r.prefix);
      h.add(r.port);
      h.add(r.switches.size());
      for (auto s : r.switches) h.add(s);
    }
    h.add(router.routed);
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h.value()));
  return buf;
}

std::string_view app_name(const AppState& state) {
  return std::holds_alternative<MacLearnerState>(state) ? "mac-learner" : "static-router";
}

}  // namespace ftsdn
