#include "ftsdn/scenario.h"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace ftsdn {

namespace {

std::size_t line_of(const YAML::Node& node) {
  const auto mark = node.Mark();
  return mark.line >= 0 ? static_cast<std::size_t>(mark.line) + 1 : 0;
}

[[noreturn]] void fail(const YAML::Node& node, const std::string& message) {
  throw ScenarioError(line_of(node), message);
}

void reject_unknown_keys(const YAML::Node& map, std::initializer_list<std::string_view> allowed,
                         std::string_view where) {
  if (!map.IsMap()) fail(map, std::string(where) + " must be a mapping");
  for (const auto& kv : map) {
    const auto key = kv.first.as<std::string>();
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      fail(kv.first, "unknown key '" + key + "' in " + std::string(where));
    }
  }
}

template <typename T>
T scalar(const YAML::Node& node, std::string_view what) {
  if (!node.IsScalar()) fail(node, std::string(what) + " must be a scalar");
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    fail(node, "invalid value for " + std::string(what) + ": '" + node.Scalar() + "'");
  }
}

// Non-negative integers; yaml-cpp happily converts "-1" to a huge unsigned.
std::uint64_t unsigned_scalar(const YAML::Node& node, std::string_view what) {
  if (node.IsScalar() && !node.Scalar().empty() && node.Scalar().front() == '-') {
    fail(node, std::string(what) + " must be non-negative");
  }
  return scalar<std::uint64_t>(node, what);
}

std::uint32_t u32_scalar(const YAML::Node& node, std::string_view what) {
  const auto v = unsigned_scalar(node, what);
  if (v > 0xffffffffULL) fail(node, std::string(what) + " out of range");
  return static_cast<std::uint32_t>(v);
}

const YAML::Node& require_seq(const YAML::Node& node, std::string_view what) {
  if (!node.IsSequence()) fail(node, std::string(what) + " must be a sequence");
  return node;
}

Bytes hex_scalar(const YAML::Node& node, std::string_view what) {
  auto bytes = from_hex(scalar<std::string>(node, what));
  if (!bytes) fail(node, std::string(what) + " must be an even-length hex string");
  return *bytes;
}

Action parse_action(const YAML::Node& node) {
  const auto text = scalar<std::string>(node, "action");
  if (text == "drop") return Action::drop();
  if (text == "output:controller") return Action::output(kControllerPort);
  if (text.rfind("output:", 0) == 0) {
    try {
      std::size_t used = 0;
      const auto port = std::stoul(text.substr(7), &used);
      if (used == text.size() - 7) return Action::output(static_cast<PortId>(port));
    } catch (const std::exception&) {
    }
  }
  fail(node, "invalid action '" + text + "' (expected drop, output:<port>, output:controller)");
}

std::string action_text(const Action& a) {
  if (a.kind == Action::Kind::kDrop) return "drop";
  if (a.port == kControllerPort) return "output:controller";
  return "output:" + std::to_string(a.port);
}

FlowEntry parse_flow(const YAML::Node& node) {
  reject_unknown_keys(node, {"priority", "in_port", "payload_prefix", "actions"}, "flow");
  FlowEntry flow;
  if (node["priority"]) flow.priority = scalar<int>(node["priority"], "priority");
  if (node["in_port"]) flow.match.in_port = u32_scalar(node["in_port"], "in_port");
  if (node["payload_prefix"]) {
    flow.match.payload_prefix = hex_scalar(node["payload_prefix"], "payload_prefix");
  }
  if (node["actions"]) {
    for (const auto& a : require_seq(node["actions"], "actions")) {
      flow.actions.push_back(parse_action(a));
    }
  }
  return flow;
}

SwitchSpec parse_switch(const YAML::Node& node) {
  reject_unknown_keys(node, {"id", "ports", "flows"}, "switch");
  if (!node["id"]) fail(node, "switch requires 'id'");
  SwitchSpec sw;
  sw.id = u32_scalar(node["id"], "switch id");
  if (node["ports"]) {
    for (const auto& p : require_seq(node["ports"], "ports")) {
      const auto port = u32_scalar(p, "port");
      if (port == kControllerPort) fail(p, "CONTROLLER is not a physical port");
      sw.ports.push_back(port);
    }
  }
  if (node["flows"]) {
    for (const auto& f : require_seq(node["flows"], "flows")) sw.flows.push_back(parse_flow(f));
  }
  return sw;
}

WorkloadItem parse_workload(const YAML::Node& node) {
  reject_unknown_keys(node, {"t", "switch", "in_port", "payload"}, "workload item");
  for (const char* key : {"t", "switch", "in_port", "payload"}) {
    if (!node[key]) fail(node, std::string("workload item requires '") + key + "'");
  }
  WorkloadItem item;
  item.t = unsigned_scalar(node["t"], "t");
  item.sw = u32_scalar(node["switch"], "switch");
  item.in_port = u32_scalar(node["in_port"], "in_port");
  item.payload = hex_scalar(node["payload"], "payload");
  if (starts_with_ack_marker(item.payload)) {
    fail(node["payload"], "workload payload must not start with the ack marker");
  }
  return item;
}

FaultSpec parse_fault(const YAML::Node& node) {
  reject_unknown_keys(node, {"target", "at_time", "at_trace_point"}, "fault");
  if (!node["target"]) fail(node, "fault requires 'target'");
  FaultSpec fault;
  fault.target = u32_scalar(node["target"], "target");
  if (node["at_time"] && node["at_trace_point"]) {
    fail(node, "fault takes exactly one of 'at_time' or 'at_trace_point'");
  }
  if (node["at_time"]) {
    fault.when = AtTime{unsigned_scalar(node["at_time"], "at_time")};
  } else if (const auto& tp = node["at_trace_point"]) {
    reject_unknown_keys(tp, {"direction", "kind", "occurrence"}, "at_trace_point");
    if (!tp["direction"] || !tp["occurrence"]) {
      fail(tp, "at_trace_point requires 'direction' and 'occurrence'");
    }
    TracePoint point;
    const auto dir = parse_direction(scalar<std::string>(tp["direction"], "direction"));
    if (!dir) fail(tp["direction"], "direction must be SEND, RECV or DELIVERED");
    point.direction = *dir;
    if (tp["kind"]) point.message_kind = scalar<std::string>(tp["kind"], "kind");
    point.occurrence = unsigned_scalar(tp["occurrence"], "occurrence");
    if (point.occurrence == 0) fail(tp["occurrence"], "occurrence is 1-based");
    fault.when = point;
  } else {
    fail(node, "fault requires 'at_time' or 'at_trace_point'");
  }
  return fault;
}

StaticRoute parse_route(const YAML::Node& node) {
  reject_unknown_keys(node, {"prefix", "port", "switches"}, "route");
  if (!node["prefix"] || !node["port"]) fail(node, "route requires 'prefix' and 'port'");
  StaticRoute route;
  route.prefix = hex_scalar(node["prefix"], "prefix");
  route.port = u32_scalar(node["port"], "port");
  if (node["switches"]) {
    for (const auto& s : require_seq(node["switches"], "switches")) {
      route.switches.push_back(u32_scalar(s, "switch"));
    }
  }
  return route;
}

}  // namespace

ScenarioError::ScenarioError(std::size_t line, const std::string& message, std::string section)
    : std::runtime_error(line ? "line " + std::to_string(line) + ": " + message : message),
      line_(line),
      section_(std::move(section)),
      message_(message) {}

std::string_view to_string(Direction d) {
  switch (d) {
    case Direction::kSend:
      return "SEND";
    case Direction::kRecv:
      return "RECV";
    case Direction::kDelivered:
      return "DELIVERED";
  }
  return "?";
}

std::optional<Direction> parse_direction(std::string_view text) {
  if (text == "SEND") return Direction::kSend;
  if (text == "RECV") return Direction::kRecv;
  if (text == "DELIVERED") return Direction::kDelivered;
  return std::nullopt;
}

Scenario parse_scenario(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ScenarioError(static_cast<std::size_t>(e.mark.line) + 1, e.msg);
  }
  if (!root.IsMap()) throw ScenarioError(1, "scenario must be a mapping");
  reject_unknown_keys(root,
                      {"name", "variant", "n_controllers", "switches", "app", "routes",
                       "workload", "faults", "detector_delay", "seed", "quiesce_limit",
                       "latency", "jitter", "suppress_slave_delivery"},
                      "scenario");

  Scenario s;
  if (root["name"]) s.name = scalar<std::string>(root["name"], "name");
  if (root["variant"]) {
    const auto v = parse_variant(scalar<std::string>(root["variant"], "variant"));
    if (!v) fail(root["variant"], "variant must be NAIVE, PAPER_A or PAPER_B");
    s.variant = *v;
  }
  if (root["n_controllers"]) s.n_controllers = u32_scalar(root["n_controllers"], "n_controllers");
  if (root["app"]) s.app = scalar<std::string>(root["app"], "app");
  if (root["switches"]) {
    std::set<SwitchId> seen;
    for (const auto& node : require_seq(root["switches"], "switches")) {
      auto sw = parse_switch(node);
      if (!seen.insert(sw.id).second) fail(node, "duplicate switch id " + std::to_string(sw.id));
      s.switches.push_back(std::move(sw));
    }
  }
  if (root["routes"]) {
    for (const auto& node : require_seq(root["routes"], "routes")) {
      s.routes.push_back(parse_route(node));
    }
  }
  if (root["workload"]) {
    for (const auto& node : require_seq(root["workload"], "workload")) {
      s.workload.push_back(parse_workload(node));
    }
  }
  if (root["faults"]) {
    for (const auto& node : require_seq(root["faults"], "faults")) {
      s.faults.push_back(parse_fault(node));
    }
  }
  if (root["detector_delay"]) {
    s.detector_delay = unsigned_scalar(root["detector_delay"], "detector_delay");
  }
  if (root["seed"]) s.seed = unsigned_scalar(root["seed"], "seed");
  if (root["quiesce_limit"]) s.quiesce_limit = unsigned_scalar(root["quiesce_limit"], "quiesce_limit");
  if (root["latency"]) s.latency = unsigned_scalar(root["latency"], "latency");
  if (root["jitter"]) s.jitter = unsigned_scalar(root["jitter"], "jitter");
  if (root["suppress_slave_delivery"]) {
    s.suppress_slave_delivery = scalar<bool>(root["suppress_slave_delivery"], "suppress_slave_delivery");
  }

  // Cross-field checks, anchored at the offending section.
  try {
    validate(s);
  } catch (const ScenarioError& e) {
    const auto& section = root[e.section()];
    throw ScenarioError(section ? line_of(section) : 1, e.message(), e.section());
  }
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError(0, "cannot read scenario file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario(buffer.str());
}

void validate(const Scenario& s) {
  if (s.variant != Variant::kNaive && (s.n_controllers < 3 || s.n_controllers % 2 == 0)) {
    throw ScenarioError(0, "n_controllers must be odd and >= 3 for the bundle variants",
                        "n_controllers");
  }
  if (s.n_controllers == 0) throw ScenarioError(0, "n_controllers must be positive", "n_controllers");
  if (s.app != "mac-learner" && s.app != "static-router") {
    throw ScenarioError(0, "app must be mac-learner or static-router", "app");
  }
  if (s.latency == 0) throw ScenarioError(0, "latency must be at least 1", "latency");
  if (s.quiesce_limit == 0) throw ScenarioError(0, "quiesce_limit must be positive", "quiesce_limit");
  std::set<SwitchId> ids;
  for (const auto& sw : s.switches) {
    if (!ids.insert(sw.id).second) throw ScenarioError(0, "duplicate switch id", "switches");
  }
  for (const auto& w : s.workload) {
    if (!ids.contains(w.sw)) {
      throw ScenarioError(0, "workload references unknown switch " + std::to_string(w.sw),
                          "workload");
    }
    if (starts_with_ack_marker(w.payload)) {
      throw ScenarioError(0, "workload payload starts with the ack marker", "workload");
    }
  }
  for (const auto& r : s.routes) {
    for (auto sw : r.switches) {
      if (!ids.contains(sw)) throw ScenarioError(0, "route references unknown switch", "routes");
    }
  }
  for (const auto& f : s.faults) {
    if (f.target >= s.n_controllers) {
      throw ScenarioError(0, "fault targets unknown controller " + std::to_string(f.target),
                          "faults");
    }
  }
}

AppState initial_app_state(const Scenario& s) {
  if (s.app == "static-router") return StaticRouterState{s.routes, 0};
  MacLearnerState mac;
  for (const auto& sw : s.switches) mac.ports[sw.id] = sw.ports;
  return mac;
}

std::string dump_scenario(const Scenario& s) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "name" << YAML::Value << s.name;
  out << YAML::Key << "variant" << YAML::Value << std::string(to_string(s.variant));
  out << YAML::Key << "n_controllers" << YAML::Value << s.n_controllers;
  out << YAML::Key << "app" << YAML::Value << s.app;
  if (!s.routes.empty()) {
    out << YAML::Key << "routes" << YAML::Value << YAML::BeginSeq;
    for (const auto& r : s.routes) {
      out << YAML::Flow << YAML::BeginMap << YAML::Key << "prefix" << YAML::Value
          << to_hex(r.prefix) << YAML::Key << "port" << YAML::Value << r.port;
      if (!r.switches.empty()) {
        out << YAML::Key << "switches" << YAML::Value << YAML::Flow << r.switches;
      }
      out << YAML::EndMap;
    }
    out << YAML::EndSeq;
  }
  out << YAML::Key << "switches" << YAML::Value << YAML::BeginSeq;
  for (const auto& sw : s.switches) {
    out << YAML::BeginMap << YAML::Key << "id" << YAML::Value << sw.id;
    out << YAML::Key << "ports" << YAML::Value << YAML::Flow << sw.ports;
    if (!sw.flows.empty()) {
      out << YAML::Key << "flows" << YAML::Value << YAML::BeginSeq;
      for (const auto& f : sw.flows) {
        out << YAML::Flow << YAML::BeginMap << YAML::Key << "priority" << YAML::Value
            << f.priority;
        if (f.match.in_port) out << YAML::Key << "in_port" << YAML::Value << *f.match.in_port;
        if (f.match.payload_prefix) {
          out << YAML::Key << "payload_prefix" << YAML::Value << to_hex(*f.match.payload_prefix);
        }
        std::vector<std::string> actions;
        for (const auto& a : f.actions) actions.push_back(action_text(a));
        out << YAML::Key << "actions" << YAML::Value << YAML::Flow << actions << YAML::EndMap;
      }
      out << YAML::EndSeq;
    }
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;
  out << YAML::Key << "workload" << YAML::Value << YAML::BeginSeq;
  for (const auto& w : s.workload) {
    out << YAML::Flow << YAML::BeginMap << YAML::Key << "t" << YAML::Value << w.t << YAML::Key
        << "switch" << YAML::Value << w.sw << YAML::Key << "in_port" << YAML::Value << w.in_port
        << YAML::Key << "payload" << YAML::Value << YAML::DoubleQuoted << to_hex(w.payload)
        << YAML::EndMap;
  }
  out << YAML::EndSeq;
  out << YAML::Key << "faults" << YAML::Value << YAML::BeginSeq;
  for (const auto& f : s.faults) {
    out << YAML::Flow << YAML::BeginMap << YAML::Key << "target" << YAML::Value << f.target;
    if (const auto* at = std::get_if<AtTime>(&f.when)) {
      out << YAML::Key << "at_time" << YAML::Value << at->t;
    } else {
      const auto& tp = std::get<TracePoint>(f.when);
      out << YAML::Key << "at_trace_point" << YAML::Value << YAML::BeginMap << YAML::Key
          << "direction" << YAML::Value << std::string(to_string(tp.direction)) << YAML::Key
          << "kind" << YAML::Value << YAML::DoubleQuoted << tp.message_kind << YAML::Key
          << "occurrence" << YAML::Value << tp.occurrence << YAML::EndMap;
    }
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;
  out << YAML::Key << "detector_delay" << YAML::Value << s.detector_delay;
  out << YAML::Key << "seed" << YAML::Value << s.seed;
  out << YAML::Key << "quiesce_limit" << YAML::Value << s.quiesce_limit;
  out << YAML::Key << "latency" << YAML::Value << s.latency;
  out << YAML::Key << "jitter" << YAML::Value << s.jitter;
  out << YAML::Key << "suppress_slave_delivery" << YAML::Value << s.suppress_slave_delivery;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace ftsdn
