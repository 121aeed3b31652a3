#include "ftsdn/switchsim.h"

#include <algorithm>
#include <stdexcept>

namespace ftsdn {

namespace {

std::string describe_actions(const std::vector<Action>& actions) {
  std::string out;
  for (const auto& a : actions) {
    if (!out.empty()) out += ",";
    if (a.kind == Action::Kind::kDrop) {
      out += "drop";
    } else if (a.port == kControllerPort) {
      out += "output:controller";
    } else {
      out += "output:" + std::to_string(a.port);
    }
  }
  return out.empty() ? "drop" : out;
}

std::string describe(const FlowMod& fm) {
  std::string out = "prio=" + std::to_string(fm.priority);
  if (fm.match.in_port) out += " in_port=" + std::to_string(*fm.match.in_port);
  if (fm.match.payload_prefix) out += " prefix=" + to_hex(*fm.match.payload_prefix);
  return out + " actions=" + describe_actions(fm.actions);
}

std::string describe(const PacketOut& po) {
  return "actions=" + describe_actions(po.actions) + " payload=" + to_hex(po.payload);
}

}  // namespace

std::string_view to_string(ExecKind kind) {
  switch (kind) {
    case ExecKind::kBundleCommit:
      return "BUNDLE_COMMIT";
    case ExecKind::kFlowMod:
      return "FLOWMOD";
    case ExecKind::kPacketOut:
      return "PACKETOUT";
    case ExecKind::kPacketFwd:
      return "PACKET_FWD";
  }
  return "?";
}

SwitchState::SwitchState(SwitchId id, std::vector<FlowEntry> initial_flows,
                         bool clone_acks_to_all)
    : id_(id), flow_table_(std::move(initial_flows)), clone_acks_to_all_(clone_acks_to_all) {}

void SwitchState::add_connection(ControllerId controller) {
  ConnState conn;
  conn.controller = controller;
  conns_[controller] = std::move(conn);
}

std::optional<ControllerId> SwitchState::master() const {
  for (const auto& [id, conn] : conns_) {
    if (conn.role == Role::kMaster) return id;
  }
  return std::nullopt;
}

SwitchOutput SwitchState::error(ControllerId to, ErrorCode code, std::uint64_t xid,
                                std::string_view context) {
  return {to, ControlMessage{ErrorMsg{code, Bytes(context.begin(), context.end())}, xid}};
}

std::vector<SwitchOutput> SwitchState::handle_message(ControllerId from,
                                                      const ControlMessage& msg) {
  auto it = conns_.find(from);
  if (it == conns_.end() || !it->second.alive) {
    throw std::logic_error("switch " + std::to_string(id_) +
                           ": message on dead or unknown connection");
  }
  ConnState& conn = it->second;
  const std::uint64_t xid = msg.xid;

  if (msg.is<Hello>()) return {{from, ControlMessage{Hello{}, xid}}};

  if (msg.is<RoleRequest>()) return handle_role_request(from, msg.as<RoleRequest>(), xid);

  if (msg.is<SetAsyncConfig>()) {
    conn.async_packet_in = msg.as<SetAsyncConfig>().packet_in_enabled;
    return {};
  }

  const bool writes = msg.is<FlowMod>() || msg.is<PacketOut>() || msg.is<BundleCommit>();
  if (writes && conn.role == Role::kSlave) {
    return {error(from, ErrorCode::kIsSlave, xid, kind_name(msg))};
  }

  if (msg.is<FlowMod>()) {
    apply_flow_mod(msg.as<FlowMod>());
    exec_log_.push_back({ExecKind::kFlowMod, std::nullopt, from, xid, 0,
                         describe(msg.as<FlowMod>())});
    return {};
  }

  if (msg.is<PacketOut>()) {
    const auto& po = msg.as<PacketOut>();
    exec_log_.push_back({ExecKind::kPacketOut, std::nullopt, from, xid, 0, describe(po)});
    return run_actions(po.actions, kControllerPort, po.payload);
  }

  if (msg.is<BundleOpen>()) {
    const auto id = msg.as<BundleOpen>().bundle_id;
    if (conn.open_bundles.contains(id)) {
      return {error(from, ErrorCode::kBadBundle, xid, "bundle already open")};
    }
    conn.open_bundles[id];
    return {{from, ControlMessage{BundleCtrlReply{id, BundleReplyKind::kOpenOk}, xid}}};
  }

  if (msg.is<BundleAdd>()) {
    const auto& add = msg.as<BundleAdd>();
    auto staging = conn.open_bundles.find(add.bundle_id);
    if (staging == conn.open_bundles.end()) {
      return {error(from, ErrorCode::kBadBundle, xid, "add to unknown bundle")};
    }
    staging->second.push_back(add.inner);
    return {};
  }

  if (msg.is<BundleCommit>()) return commit_bundle(from, msg.as<BundleCommit>().bundle_id, xid);

  throw std::logic_error("switch " + std::to_string(id_) + ": unexpected " +
                         std::string(kind_name(msg)) + " from controller");
}

std::vector<SwitchOutput> SwitchState::handle_role_request(ControllerId from,
                                                           const RoleRequest& req,
                                                           std::uint64_t xid) {
  ConnState& conn = conns_.at(from);
  switch (req.role) {
    case Role::kMaster:
      if (generation_id_seen_ && req.generation_id <= *generation_id_seen_) {
        return {error(from, ErrorCode::kStaleGeneration, xid, "stale generation_id")};
      }
      for (auto& [id, other] : conns_) {
        if (id != from && other.role == Role::kMaster) other.role = Role::kSlave;
      }
      generation_id_seen_ = req.generation_id;
      break;
    case Role::kSlave:
      if (generation_id_seen_ && req.generation_id < *generation_id_seen_) {
        return {error(from, ErrorCode::kStaleGeneration, xid, "stale generation_id")};
      }
      break;
    case Role::kEqual:
      break;
  }
  conn.role = req.role;
  return {{from, ControlMessage{RoleReply{req.role, req.generation_id}, xid}}};
}

std::vector<SwitchOutput> SwitchState::commit_bundle(ControllerId from, std::uint64_t bundle_id,
                                                     std::uint64_t xid) {
  ConnState& conn = conns_.at(from);
  auto staging = conn.open_bundles.find(bundle_id);
  if (staging == conn.open_bundles.end()) {
    return {error(from, ErrorCode::kBadBundle, xid, "commit of unknown bundle")};
  }
  const std::vector<BundleInner> staged = std::move(staging->second);
  conn.open_bundles.erase(staging);

  exec_log_.push_back({ExecKind::kBundleCommit, bundle_id, from, xid,
                       static_cast<std::uint32_t>(staged.size()), ""});
  std::vector<SwitchOutput> out;
  for (const auto& inner : staged) {
    if (const auto* fm = std::get_if<FlowMod>(&inner)) {
      apply_flow_mod(*fm);
      exec_log_.push_back({ExecKind::kFlowMod, bundle_id, from, xid, 0, describe(*fm)});
    } else {
      const auto& po = std::get<PacketOut>(inner);
      exec_log_.push_back({ExecKind::kPacketOut, bundle_id, from, xid, 0, describe(po)});
      auto emitted = run_actions(po.actions, kControllerPort, po.payload);
      out.insert(out.end(), emitted.begin(), emitted.end());
    }
  }
  out.push_back({from, ControlMessage{BundleCtrlReply{bundle_id, BundleReplyKind::kCommitOk}, xid}});
  return out;
}

void SwitchState::apply_flow_mod(const FlowMod& fm) {
  // OFPFC_ADD: an entry with identical match and priority is replaced.
  auto same = std::find_if(flow_table_.begin(), flow_table_.end(), [&](const FlowEntry& e) {
    return e.priority == fm.priority && e.match == fm.match;
  });
  if (same != flow_table_.end()) {
    same->actions = fm.actions;
  } else {
    flow_table_.push_back({fm.match, fm.priority, fm.actions});
  }
}

std::vector<SwitchOutput> SwitchState::run_actions(const std::vector<Action>& actions,
                                                   PortId in_port, const Bytes& payload) {
  std::vector<SwitchOutput> out;
  for (const auto& action : actions) {
    if (action.kind == Action::Kind::kOutput && action.port == kControllerPort) {
      PacketIn pkt{next_event_id(), PacketInReason::kAction, in_port, payload};
      auto copies = deliver_packet_in(pkt);
      out.insert(out.end(), copies.begin(), copies.end());
    }
  }
  return out;
}

std::vector<SwitchOutput> SwitchState::deliver_packet_in(const PacketIn& pkt) const {
  const bool cloned_ack = clone_acks_to_all_ && decode_ack(pkt.payload).has_value();
  std::vector<SwitchOutput> out;
  for (const auto& [id, conn] : conns_) {
    if (!conn.alive) continue;
    if (cloned_ack || conn.packet_in_enabled()) out.push_back({id, ControlMessage{pkt, 0}});
  }
  return out;
}

std::vector<SwitchOutput> SwitchState::inject_data_packet(PortId in_port, const Bytes& payload) {
  if (starts_with_ack_marker(payload)) {
    throw std::invalid_argument("data packet payload starts with the ack marker");
  }
  const FlowEntry* best = nullptr;
  for (const auto& entry : flow_table_) {
    if (entry.match.matches(in_port, payload) && (!best || entry.priority > best->priority)) {
      best = &entry;
    }
  }
  if (best) {
    exec_log_.push_back({ExecKind::kPacketFwd, std::nullopt, std::nullopt, 0, 0,
                         "in_port=" + std::to_string(in_port) + " actions=" +
                             describe_actions(best->actions) + " payload=" + to_hex(payload)});
    return run_actions(best->actions, in_port, payload);
  }
  PacketIn pkt{next_event_id(), PacketInReason::kNoMatch, in_port, payload};
  return deliver_packet_in(pkt);
}

std::vector<DiscardedBundle> SwitchState::on_connection_drop(ControllerId controller) {
  ConnState& conn = conns_.at(controller);
  std::vector<DiscardedBundle> discarded;
  for (const auto& [id, staged] : conn.open_bundles) discarded.push_back({id, staged.size()});
  conn.open_bundles.clear();
  conn.alive = false;
  return discarded;
}

}  // namespace ftsdn
