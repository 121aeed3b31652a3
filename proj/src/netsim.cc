#include "ftsdn/netsim.h"

#include <algorithm>
#include <deque>
#include <random>
#include <set>

namespace ftsdn {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

struct Endpoint {
  bool is_switch = false;
  std::uint32_t id = 0;

  std::string name() const { return is_switch ? switch_name(id) : controller_name(id); }
  auto operator<=>(const Endpoint&) const = default;
};

Endpoint ctrl(ControllerId id) { return {false, id}; }
Endpoint sw_ep(SwitchId id) { return {true, id}; }

using Payload = std::variant<ControlMessage, ReplMessage>;

nlohmann::json payload_json(const Payload& p) {
  return std::visit([](const auto& m) { return to_json(m); }, p);
}

std::string payload_kind(const Payload& p) {
  return std::visit([](const auto& m) { return std::string(kind_name(m)); }, p);
}

struct Delivery {
  Endpoint src;
  Endpoint dst;
  Payload msg;
};
struct Inject {
  std::size_t index = 0;
};
struct TimedCrash {
  ControllerId target = 0;
};
struct Notice {
  ControllerId replica = 0;
  ControllerId crashed = 0;
};
using Pending = std::variant<Delivery, Inject, TimedCrash, Notice>;

struct Channel {
  bool alive = true;
  std::uint64_t last_delivery = 0;
};

struct Trigger {
  ControllerId target = 0;
  TracePoint point;
  std::uint64_t count = 0;
  bool fired = false;

  bool matches_kind(const std::string& kind) const {
    return point.message_kind == "*" || point.message_kind == kind;
  }
};

std::string join_commands(const SwitchCommands& cmds) {
  std::string out;
  for (const auto& [sw, list] : cmds) {
    if (!out.empty()) out += ",";
    out += std::to_string(sw) + "=" + std::to_string(list.size());
  }
  return out;
}

bool is_event_packet_in(const nlohmann::json& msg) {
  if (!msg.is_object() || msg.value("type", "") != "PacketIn") return false;
  const auto payload = from_hex(msg.value("payload", ""));
  return payload && !decode_ack(*payload);
}

class Simulator {
 public:
  explicit Simulator(const Scenario& s) : s_(s), rng_(s.seed) {
    validate(s_);
    const auto app = initial_app_state(s_);
    std::vector<SwitchId> switch_ids;
    for (const auto& spec : s_.switches) switch_ids.push_back(spec.id);
    for (ControllerId c = 0; c < s_.n_controllers; ++c) {
      ReplicaConfig cfg;
      cfg.id = c;
      cfg.n_replicas = s_.n_controllers;
      cfg.switches = switch_ids;
      cfg.variant = s_.variant;
      cfg.initial_app = app;
      cfg.suppress_slave_delivery = s_.suppress_slave_delivery;
      replicas_.emplace_back(std::move(cfg));
    }
    crashed_.assign(s_.n_controllers, false);
    for (const auto& spec : s_.switches) {
      SwitchState sw(spec.id, spec.flows, s_.variant == Variant::kPaperB);
      for (ControllerId c = 0; c < s_.n_controllers; ++c) {
        sw.add_connection(c);
        channels_[{ctrl(c), sw_ep(spec.id)}] = {};
        channels_[{sw_ep(spec.id), ctrl(c)}] = {};
      }
      switches_.emplace(spec.id, std::move(sw));
    }
    for (ControllerId a = 0; a < s_.n_controllers; ++a) {
      for (ControllerId b = 0; b < s_.n_controllers; ++b) {
        if (a != b) channels_[{ctrl(a), ctrl(b)}] = {};
      }
    }
    for (const auto& f : s_.faults) {
      if (const auto* tp = std::get_if<TracePoint>(&f.when)) triggers_.push_back({f.target, *tp});
    }
    metrics_.variant = std::string(to_string(s_.variant));
  }

  RunResult run() {
    std::string switch_list;
    for (const auto& spec : s_.switches) {
      if (!switch_list.empty()) switch_list += ",";
      switch_list += std::to_string(spec.id);
    }
    record(RecordKind::kMeta, "sim", "", nullptr,
           {{"record", "header"},
            {"name", s_.name},
            {"variant", std::string(to_string(s_.variant))},
            {"n_controllers", std::to_string(s_.n_controllers)},
            {"switches", switch_list},
            {"app", s_.app},
            {"seed", std::to_string(s_.seed)},
            {"detector_delay", std::to_string(s_.detector_delay)},
            {"latency", std::to_string(s_.latency)},
            {"jitter", std::to_string(s_.jitter)}});

    for (ControllerId c = 0; c < s_.n_controllers; ++c) {
      if (!crashed_[c]) process_effects(c, replicas_[c].start(), std::nullopt);
    }
    drain();
    setup_done_ = true;
    record(RecordKind::kMeta, "sim", "", nullptr, {{"record", "setup_done"}});

    const std::uint64_t base = now_;
    for (const auto& f : s_.faults) {
      if (const auto* at = std::get_if<AtTime>(&f.when)) schedule(base + at->t, TimedCrash{f.target});
    }
    for (std::size_t i = 0; i < s_.workload.size(); ++i) {
      schedule(base + s_.workload[i].t, Inject{i});
    }
    drain();

    for (const auto& r : replicas_) {
      record(RecordKind::kMeta, controller_name(r.id()), "", nullptr,
             {{"record", "final"},
              {"alive", crashed_[r.id()] ? "false" : "true"},
              {"applied_index", std::to_string(r.applied_index())},
              {"commit_index", std::to_string(r.commit_index())},
              {"log_len", std::to_string(r.log().size())},
              {"view", std::to_string(r.view())},
              {"status", std::string(to_string(r.status()))},
              {"digest", digest(r.app())}});
    }
    record(RecordKind::kMeta, "sim", "", nullptr,
           {{"record", "end"},
            {"quiescent", limit_hit_ ? "false" : "true"},
            {"reason", limit_hit_ ? "quiesce_limit" : "quiescent"}});

    return {std::move(trace_), metrics_, !limit_hit_};
  }

 private:
  std::size_t record(RecordKind kind, std::string actor, std::string peer, nlohmann::json msg,
                     std::map<std::string, std::string> detail) {
    TraceRecord r;
    r.step = trace_.size();
    r.t = now_;
    r.kind = kind;
    r.actor = std::move(actor);
    r.peer = std::move(peer);
    r.msg = std::move(msg);
    r.detail = std::move(detail);
    trace_.push_back(std::move(r));
    return trace_.size() - 1;
  }

  void schedule(std::uint64_t when, Pending p) { queue_.emplace(std::make_pair(when, next_seq_++), std::move(p)); }

  void drain() {
    while (!queue_.empty()) {
      if (trace_.size() >= s_.quiesce_limit) {
        limit_hit_ = true;
        return;
      }
      auto node = queue_.extract(queue_.begin());
      now_ = node.key().first;
      std::visit(overloaded{
                     [&](Delivery& d) { deliver(d); },
                     [&](Inject& i) { inject(s_.workload[i.index]); },
                     [&](TimedCrash& c) { crash(c.target); },
                     [&](Notice& n) { notify(n); },
                 },
                 node.mapped());
    }
  }

  bool alive(const Endpoint& e) const { return e.is_switch || !crashed_[e.id]; }

  void send(const Endpoint& src, const Endpoint& dst, Payload msg) {
    auto msg_json = payload_json(msg);
    const auto kind = payload_kind(msg);
    record(RecordKind::kSend, src.name(), dst.name(), msg_json, {});
    if (src.is_switch && is_event_packet_in(msg_json)) {
      events_seen_.insert(msg_json.at("event").get<std::string>());
      metrics_.events = events_seen_.size();
    }
    if (!src.is_switch) fire_triggers(Direction::kSend, src.id, kind);

    auto& channel = channels_.at({src, dst});
    if (!channel.alive || !alive(src) || !alive(dst)) {
      record(RecordKind::kDrop, src.name(), dst.name(), std::move(msg_json),
             {{"reason", "channel closed"}});
      return;
    }
    std::uint64_t delay = s_.latency;
    if (s_.jitter > 0) delay += rng_() % (s_.jitter + 1);
    const auto at = std::max(now_ + delay, channel.last_delivery);
    channel.last_delivery = at;
    schedule(at, Delivery{src, dst, std::move(msg)});
  }

  void deliver(const Delivery& d) {
    const auto kind = payload_kind(d.msg);
    const auto idx = record(RecordKind::kDeliver, d.dst.name(), d.src.name(), payload_json(d.msg), {});
    if (setup_done_) {
      ++metrics_.deliveries_by_kind[kind];
      ++metrics_.total_deliveries;
    } else {
      ++metrics_.setup_deliveries;
    }
    if (!d.dst.is_switch) {
      fire_triggers(Direction::kRecv, d.dst.id, kind);
      if (crashed_[d.dst.id]) return;
    }

    if (d.dst.is_switch) {
      auto& sw = switches_.at(d.dst.id);
      const auto before = sw.exec_log().size();
      auto outs = sw.handle_message(d.src.id, std::get<ControlMessage>(d.msg));
      record_exec(sw, before);
      for (auto& o : outs) send(d.dst, ctrl(o.to), std::move(o.msg));
    } else {
      auto& replica = replicas_[d.dst.id];
      Effects effects = std::visit(overloaded{
                                       [&](const ControlMessage& m) {
                                         return replica.on_switch_message(d.src.id, m);
                                       },
                                       [&](const ReplMessage& m) {
                                         return replica.on_repl_message(d.src.id, m);
                                       },
                                   },
                                   d.msg);
      process_effects(d.dst.id, std::move(effects), idx);
    }

    if (!d.src.is_switch && !crashed_[d.src.id]) fire_triggers(Direction::kDelivered, d.src.id, kind);
  }

  void inject(const WorkloadItem& item) {
    auto& sw = switches_.at(item.sw);
    const auto before = sw.exec_log().size();
    auto outs = sw.inject_data_packet(item.in_port, item.payload);
    record_exec(sw, before);
    for (auto& o : outs) send(sw_ep(item.sw), ctrl(o.to), std::move(o.msg));
  }

  void record_exec(const SwitchState& sw, std::size_t from) {
    const auto& log = sw.exec_log();
    for (std::size_t i = from; i < log.size(); ++i) {
      const auto& e = log[i];
      std::map<std::string, std::string> detail{{"exec", std::string(to_string(e.kind))},
                                                {"xid", std::to_string(e.xid)},
                                                {"detail", e.detail}};
      if (e.bundle_id) detail["bundle_id"] = std::to_string(*e.bundle_id);
      if (e.kind == ExecKind::kBundleCommit) detail["staged"] = std::to_string(e.staged);
      record(RecordKind::kExec, switch_name(sw.id()), e.from ? controller_name(*e.from) : "",
             nullptr, std::move(detail));
    }
  }

  void process_effects(ControllerId id, Effects effects, std::optional<std::size_t> deliver_idx) {
    for (auto& effect : effects) {
      if (crashed_[id]) return;
      std::visit(overloaded{
                     [&](ToSwitch& m) { send(ctrl(id), sw_ep(m.sw), std::move(m.msg)); },
                     [&](ToReplica& m) { send(ctrl(id), ctrl(m.to), std::move(m.msg)); },
                     [&](Applied& a) {
                       std::map<std::string, std::string> detail{
                           {"index", std::to_string(a.entry.index)},
                           {"entry_view", std::to_string(a.entry.view)},
                           {"view", std::to_string(a.view)},
                           {"applied_index", std::to_string(a.applied_index)},
                           {"digest", a.digest},
                           {"cmds", join_commands(a.commands)}};
                       if (const auto* ev = std::get_if<LogEntry::Event>(&a.entry.body)) {
                         detail["entry"] = "EVENT";
                         detail["event"] = to_string(ev->event);
                       } else {
                         detail["entry"] = "VIEW";
                       }
                       record(RecordKind::kApply, controller_name(id), "", nullptr, std::move(detail));
                     },
                     [&](Stalled& s) {
                       record(RecordKind::kStall, controller_name(id), "", nullptr,
                              {{"reason", s.reason}});
                     },
                     [&](Ignored& ig) {
                       if (deliver_idx) trace_[*deliver_idx].detail["ignored"] = ig.reason;
                     },
                 },
                 effect);
    }
  }

  void fire_triggers(Direction dir, ControllerId actor, const std::string& kind) {
    for (auto& t : triggers_) {
      if (t.fired || t.target != actor || t.point.direction != dir || !t.matches_kind(kind)) continue;
      if (++t.count == t.point.occurrence) {
        t.fired = true;
        crash(t.target);
      }
    }
  }

  void crash(ControllerId c) {
    if (crashed_[c]) return;
    crashed_[c] = true;
    record(RecordKind::kCrash, controller_name(c), "", nullptr, {});

    const Endpoint victim = ctrl(c);
    for (auto it = queue_.begin(); it != queue_.end();) {
      const auto* d = std::get_if<Delivery>(&it->second);
      if (d && (d->src == victim || d->dst == victim)) {
        record(RecordKind::kDrop, d->src.name(), d->dst.name(), payload_json(d->msg),
               {{"reason", "crash"}});
        it = queue_.erase(it);
      } else {
        ++it;
      }
    }
    for (auto& [key, channel] : channels_) {
      if (key.first == victim || key.second == victim) channel.alive = false;
    }
    for (auto& [id, sw] : switches_) {
      const auto discarded = sw.on_connection_drop(c);
      std::map<std::string, std::string> detail{{"connection", "closed"}};
      if (!discarded.empty()) {
        std::string ids;
        std::string staged;
        for (const auto& b : discarded) {
          if (!ids.empty()) {
            ids += ",";
            staged += ",";
          }
          ids += std::to_string(b.bundle_id);
          staged += std::to_string(b.staged);
        }
        detail["discarded_bundles"] = ids;
        detail["discarded_staged"] = staged;
      }
      record(RecordKind::kDrop, switch_name(id), controller_name(c), nullptr, std::move(detail));
    }
    for (ControllerId r = 0; r < s_.n_controllers; ++r) {
      if (!crashed_[r]) schedule(now_ + s_.detector_delay, Notice{r, c});
    }
  }

  void notify(const Notice& n) {
    if (crashed_[n.replica]) return;
    record(RecordKind::kDetect, controller_name(n.replica), controller_name(n.crashed), nullptr, {});
    process_effects(n.replica, replicas_[n.replica].on_failure_notice(n.crashed), std::nullopt);
  }

  Scenario s_;
  std::vector<Replica> replicas_;
  std::map<SwitchId, SwitchState> switches_;
  std::vector<bool> crashed_;
  std::map<std::pair<std::uint64_t, std::uint64_t>, Pending> queue_;
  std::uint64_t next_seq_ = 0;
  std::map<std::pair<Endpoint, Endpoint>, Channel> channels_;
  std::vector<Trigger> triggers_;
  std::uint64_t now_ = 0;
  Trace trace_;
  std::mt19937_64 rng_;
  MetricsReport metrics_;
  std::set<std::string> events_seen_;
  bool setup_done_ = false;
  bool limit_hit_ = false;
};

}  // namespace

RunResult run(const Scenario& scenario) { return Simulator(scenario).run(); }

MetricsReport metrics_from_trace(const Trace& trace) {
  MetricsReport m;
  bool setup_done = false;
  std::set<std::string> events;
  for (const auto& r : trace) {
    if (r.kind == RecordKind::kMeta) {
      if (r.get("record") == "header") m.variant = r.get("variant");
      if (r.get("record") == "setup_done") setup_done = true;
    } else if (r.kind == RecordKind::kDeliver) {
      if (setup_done) {
        ++m.deliveries_by_kind[r.msg.value("type", "?")];
        ++m.total_deliveries;
      } else {
        ++m.setup_deliveries;
      }
    } else if (r.kind == RecordKind::kSend && parse_endpoint(r.actor, 's') &&
               is_event_packet_in(r.msg)) {
      events.insert(r.msg.at("event").get<std::string>());
    }
  }
  m.events = events.size();
  return m;
}

nlohmann::json to_json(const MetricsReport& m) {
  nlohmann::json j;
  j["variant"] = m.variant;
  j["deliveries_by_kind"] = m.deliveries_by_kind;
  j["total_deliveries"] = m.total_deliveries;
  j["setup_deliveries"] = m.setup_deliveries;
  j["events"] = m.events;
  j["per_event_overhead"] = m.per_event_overhead();
  return j;
}

std::vector<DerivedScenario> enumerate_crash_points(const Scenario& scenario, ControllerId target) {
  for (const auto& f : scenario.faults) {
    if (std::holds_alternative<TracePoint>(f.when)) {
      throw ScenarioError(0, "crash-point enumeration needs a scenario without trace-point faults",
                          "faults");
    }
  }
  if (target >= scenario.n_controllers) {
    throw ScenarioError(0, "crash target " + std::to_string(target) + " is not a controller");
  }
  Scenario base = scenario;
  base.faults.clear();
  const auto result = run(base);

  const auto me = controller_name(target);
  std::map<Direction, std::uint64_t> counts;
  std::vector<DerivedScenario> out;
  for (const auto& r : result.trace) {
    Direction dir;
    if (r.kind == RecordKind::kSend && r.actor == me) {
      dir = Direction::kSend;
    } else if (r.kind == RecordKind::kDeliver && r.actor == me) {
      dir = Direction::kRecv;
    } else if (r.kind == RecordKind::kDeliver && r.peer == me) {
      dir = Direction::kDelivered;
    } else {
      continue;
    }
    TracePoint point{dir, "*", ++counts[dir]};
    DerivedScenario d{{point, r.step, r.msg.value("type", "?")}, base};
    d.scenario.name = base.name + "@" + std::string(to_string(dir)) + "#" +
                      std::to_string(point.occurrence);
    d.scenario.faults = {FaultSpec{target, point}};
    out.push_back(std::move(d));
  }
  return out;
}

std::string check_fifo(const Trace& trace) {
  // Per channel: messages sent and not yet delivered or dropped, in send order.
  std::map<std::pair<std::string, std::string>, std::deque<std::pair<std::uint64_t, nlohmann::json>>> inflight;
  std::set<std::string> crashed;
  for (const auto& r : trace) {
    if (r.kind == RecordKind::kCrash) crashed.insert(r.actor);
    if (r.kind == RecordKind::kSend) inflight[{r.actor, r.peer}].emplace_back(r.step, r.msg);
    const bool delivered = r.kind == RecordKind::kDeliver;
    const bool dropped = r.kind == RecordKind::kDrop && !r.msg.is_null();
    if (!delivered && !dropped) continue;
    const auto key = delivered ? std::make_pair(r.peer, r.actor) : std::make_pair(r.actor, r.peer);
    auto& q = inflight[key];
    if (q.empty() || q.front().second != r.msg) {
      return "step " + std::to_string(r.step) + ": " + (delivered ? "delivery" : "drop") +
             " on " + key.first + "->" + key.second + " does not match the oldest message in flight";
    }
    if (dropped && !crashed.contains(key.first) && !crashed.contains(key.second)) {
      return "step " + std::to_string(r.step) + ": drop on " + key.first + "->" + key.second +
             " without a crash of either endpoint";
    }
    q.pop_front();
  }
  return {};
}

std::string check_fence(const Trace& trace) {
  // Per switch->controller channel: PacketIns sent but not yet delivered/dropped.
  std::map<std::pair<std::string, std::string>, std::set<std::uint64_t>> pending_packet_ins;
  std::map<std::pair<std::string, std::string>, std::deque<std::uint64_t>> send_steps;
  // RoleReply send step -> PacketIn sends that preceded it on the same channel.
  std::map<std::uint64_t, std::set<std::uint64_t>> must_precede;
  for (const auto& r : trace) {
    const bool from_switch = r.kind == RecordKind::kSend && parse_endpoint(r.actor, 's');
    if (from_switch) {
      const std::pair key{r.actor, r.peer};
      send_steps[key].push_back(r.step);
      const auto type = r.msg.value("type", "");
      if (type == "PacketIn") pending_packet_ins[key].insert(r.step);
      if (type == "RoleReply") must_precede[r.step] = pending_packet_ins[key];
      continue;
    }
    const bool terminal = (r.kind == RecordKind::kDeliver && parse_endpoint(r.peer, 's')) ||
                          (r.kind == RecordKind::kDrop && !r.msg.is_null() &&
                           parse_endpoint(r.actor, 's'));
    if (!terminal) continue;
    const auto key = r.kind == RecordKind::kDeliver ? std::make_pair(r.peer, r.actor)
                                                    : std::make_pair(r.actor, r.peer);
    auto& steps = send_steps[key];
    if (steps.empty()) return "step " + std::to_string(r.step) + ": delivery without a send";
    const auto sent_at = steps.front();
    steps.pop_front();
    pending_packet_ins[key].erase(sent_at);
    if (r.kind == RecordKind::kDeliver && r.msg.value("type", "") == "RoleReply") {
      for (auto pin : must_precede[sent_at]) {
        if (pending_packet_ins[key].contains(pin)) {
          return "step " + std::to_string(r.step) + ": RoleReply on " + key.first + "->" +
                 key.second + " overtook the PacketIn sent at step " + std::to_string(pin);
        }
      }
    }
  }
  return {};
}

}  // namespace ftsdn
