#pragma once

// Model of an unmodified OpenFlow 1.4 switch: per-connection roles and async
// configuration, bundles applied atomically at commit, a single flow table,
// and PacketIn generation.
//
// Two rules the controller failover depends on:
//   * messages on one connection are processed serially, in order;
//   * a connection drop discards every bundle still staged on it.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ftsdn/ofmodel.h"

namespace ftsdn {

struct ConnState {
  ControllerId controller = 0;
  Role role = Role::kEqual;
  // Set by SetAsyncConfig; otherwise the role default applies.
  std::optional<bool> async_packet_in;
  std::map<std::uint64_t, std::vector<BundleInner>> open_bundles;
  bool alive = true;

  // MASTER/EQUAL receive PacketIns by default, SLAVE does not.
  bool packet_in_enabled() const { return async_packet_in.value_or(role != Role::kSlave); }
};

struct FlowEntry {
  Match match;
  int priority = 0;
  std::vector<Action> actions;

  bool operator==(const FlowEntry&) const = default;
};

enum class ExecKind { kBundleCommit, kFlowMod, kPacketOut, kPacketFwd };

std::string_view to_string(ExecKind kind);

struct ExecRecord {
  ExecKind kind = ExecKind::kPacketFwd;
  // Set on BUNDLE_COMMIT and on every effect applied from a bundle.
  std::optional<std::uint64_t> bundle_id;
  std::optional<ControllerId> from;
  std::uint64_t xid = 0;
  // BUNDLE_COMMIT: number of staged messages applied after it.
  std::uint32_t staged = 0;
  std::string detail;
};

struct SwitchOutput {
  ControllerId to = 0;
  ControlMessage msg;
};

struct DiscardedBundle {
  std::uint64_t bundle_id = 0;
  std::size_t staged = 0;
};

class SwitchState {
 public:
  explicit SwitchState(SwitchId id, std::vector<FlowEntry> initial_flows = {},
                       bool clone_acks_to_all = false);

  void add_connection(ControllerId controller);

  // Processes one message from `from` to completion. Replies and PacketIns are
  // returned in emission order; effects are appended to exec_log().
  std::vector<SwitchOutput> handle_message(ControllerId from, const ControlMessage& msg);

  // Fan-out of one asynchronous PacketIn to the eligible connections.
  std::vector<SwitchOutput> deliver_packet_in(const PacketIn& pkt) const;

  // A packet arriving from the data plane on `in_port`.
  std::vector<SwitchOutput> inject_data_packet(PortId in_port, const Bytes& payload);

  std::vector<DiscardedBundle> on_connection_drop(ControllerId controller);

  SwitchId id() const { return id_; }
  const std::vector<FlowEntry>& flow_table() const { return flow_table_; }
  const std::map<ControllerId, ConnState>& connections() const { return conns_; }
  const ConnState& connection(ControllerId c) const { return conns_.at(c); }
  const std::vector<ExecRecord>& exec_log() const { return exec_log_; }
  std::uint64_t seq_counter() const { return seq_counter_; }
  std::optional<std::uint64_t> generation_id_seen() const { return generation_id_seen_; }
  bool clone_acks_to_all() const { return clone_acks_to_all_; }
  std::optional<ControllerId> master() const;

 private:
  std::vector<SwitchOutput> handle_role_request(ControllerId from, const RoleRequest& req,
                                                std::uint64_t xid);
  std::vector<SwitchOutput> commit_bundle(ControllerId from, std::uint64_t bundle_id,
                                          std::uint64_t xid);
  void apply_flow_mod(const FlowMod& fm);
  std::vector<SwitchOutput> run_actions(const std::vector<Action>& actions, PortId in_port,
                                        const Bytes& payload);
  EventId next_event_id() { return EventId{id_, ++seq_counter_}; }
  static SwitchOutput error(ControllerId to, ErrorCode code, std::uint64_t xid,
                            std::string_view context);

  SwitchId id_;
  std::vector<FlowEntry> flow_table_;
  std::map<ControllerId, ConnState> conns_;
  std::uint64_t seq_counter_ = 0;
  std::optional<std::uint64_t> generation_id_seen_;
  bool clone_acks_to_all_;
  std::vector<ExecRecord> exec_log_;
};

}  // namespace ftsdn
