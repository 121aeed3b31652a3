#pragma once

// One controller replica.
//
// Replicas receive every switch event directly (slaves register for all
// PacketIns), order them through a leader-based replicated log, and apply
// committed entries to the application. Only the replica that leads the
// current view and holds MASTER on a switch talks to that switch. Commands for
// log index i travel to switch s as bundle i, which also carries a PacketOut
// to CONTROLLER with an ack for (view, i, s); the switch turns that into a
// PacketIn for every controller on commit, so all replicas learn which bundles
// executed.
//
// Failover (new leader):
//   1. collect logs from a majority, adopt the most up-to-date one, append a
//      VIEW entry and replicate it;
//   2. send RoleRequest(MASTER, generation_id = view) to every switch and wait
//      for all RoleReplies. Connections are FIFO, so every ack a switch emitted
//      before the role change has been received by then;
//   3. propose buffered events that are not in the log;
//   4. resend the bundle for every applied index whose ack is missing.
// A bundle the old master left staged was discarded when its connection
// dropped, so the resend in step 4 cannot execute twice.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "ftsdn/app.h"
#include "ftsdn/ofmodel.h"

namespace ftsdn {

enum class Variant {
  kNaive,   // master-only events, plain FlowMods, blind replay on failover
  kPaperA,  // bundles + ack PacketOuts delivered through async config
  kPaperB,  // as kPaperA, plus the switch clones ack PacketIns to all controllers
};

std::string_view to_string(Variant v);
std::optional<Variant> parse_variant(std::string_view text);

struct LogEntry {
  struct Event {
    EventId event;
    Bytes payload;
    PortId in_port = 0;
    bool operator==(const Event&) const = default;
  };
  struct View {
    std::uint64_t view = 0;
    ControllerId leader = 0;
    bool operator==(const View&) const = default;
  };

  std::uint64_t index = 0;
  // View in which the entry was proposed.
  std::uint64_t view = 0;
  std::variant<Event, View> body;

  bool is_event() const { return std::holds_alternative<Event>(body); }
  bool operator==(const LogEntry&) const = default;
};

struct Append {
  std::uint64_t view = 0;
  std::uint64_t prev_index = 0;
  std::vector<LogEntry> entries;
  std::uint64_t commit_index = 0;
  bool operator==(const Append&) const = default;
};

struct AppendAck {
  std::uint64_t view = 0;
  std::uint64_t index = 0;
  bool operator==(const AppendAck&) const = default;
};

struct CommitAdvance {
  std::uint64_t view = 0;
  std::uint64_t commit_index = 0;
  bool operator==(const CommitAdvance&) const = default;
};

// Sent by each surviving replica to the leader of a new view.
struct ViewChange {
  std::uint64_t view = 0;
  std::vector<LogEntry> log;
  std::uint64_t commit_index = 0;
  bool operator==(const ViewChange&) const = default;
};

using ReplMessage = std::variant<Append, AppendAck, CommitAdvance, ViewChange>;

std::string_view kind_name(const ReplMessage& msg);
std::uint64_t view_of(const ReplMessage& msg);

// Effects of one replica step, in the order they happened.
struct ToSwitch {
  SwitchId sw = 0;
  ControlMessage msg;
};
struct ToReplica {
  ControllerId to = 0;
  ReplMessage msg;
};
struct Applied {
  LogEntry entry;
  SwitchCommands commands;
  std::uint64_t applied_index = 0;
  std::string digest;
  std::uint64_t view = 0;
};
struct Stalled {
  std::string reason;
};
struct Ignored {
  std::string reason;
};

using Effect = std::variant<ToSwitch, ToReplica, Applied, Stalled, Ignored>;
using Effects = std::vector<Effect>;

struct ReplicaConfig {
  ControllerId id = 0;
  std::uint32_t n_replicas = 3;
  std::vector<SwitchId> switches;
  Variant variant = Variant::kPaperA;
  AppState initial_app;
  // Fixture: slaves never register for PacketIns even under the bundle variants.
  bool suppress_slave_delivery = false;
};

enum class ReplicaStatus { kNormal, kViewChange, kFencing, kStalled };

std::string_view to_string(ReplicaStatus s);

std::vector<ControlMessage> build_bundle(std::uint64_t view, std::uint64_t index, SwitchId sw,
                                         const std::vector<BundleInner>& cmds);

class Replica {
 public:
  explicit Replica(ReplicaConfig config);

  // Initial role requests and async configuration for view 0.
  Effects start();

  Effects on_switch_message(SwitchId sw, const ControlMessage& msg);
  Effects on_packet_in(SwitchId sw, const PacketIn& pkt);
  Effects on_repl_message(ControllerId from, const ReplMessage& msg);
  Effects on_failure_notice(ControllerId crashed);

  ControllerId id() const { return cfg_.id; }
  std::uint64_t view() const { return view_; }
  ControllerId leader_of(std::uint64_t view) const {
    return static_cast<ControllerId>(view % cfg_.n_replicas);
  }
  bool is_leader() const { return leader_of(view_) == cfg_.id; }
  ReplicaStatus status() const { return status_; }
  const std::vector<LogEntry>& log() const { return log_; }
  std::uint64_t commit_index() const { return commit_index_; }
  std::uint64_t applied_index() const { return applied_index_; }
  const std::map<EventId, LogEntry::Event>& event_buffer() const { return event_buffer_; }
  const std::map<SwitchId, std::set<std::uint64_t>>& ack_table() const { return ack_table_; }
  const AppState& app() const { return app_; }
  const std::set<SwitchId>& master_of() const { return master_of_; }
  const std::map<std::uint64_t, SwitchCommands>& issued_commands() const { return commands_; }
  bool in_log(const EventId& e) const { return logged_events_.contains(e); }

 private:
  std::size_t majority() const { return cfg_.n_replicas / 2 + 1; }
  std::size_t alive_count() const { return cfg_.n_replicas - crashed_.size(); }
  bool uses_bundles() const { return cfg_.variant != Variant::kNaive; }
  std::vector<ControllerId> live_peers() const;

  void append_and_replicate(LogEntry::Event event, Effects& out);
  void append_view_entry(Effects& out);
  void try_advance_commit(Effects& out);
  void apply_committed(Effects& out);
  void apply_entry(const LogEntry& entry, Effects& out);
  void send_commands(std::uint64_t index, SwitchId sw, const std::vector<BundleInner>& cmds,
                     Effects& out);
  void rebuild_event_index();

  void handle_append(ControllerId from, const Append& msg, Effects& out);
  void handle_append_ack(ControllerId from, const AppendAck& msg, Effects& out);
  void handle_commit_advance(const CommitAdvance& msg, Effects& out);
  void handle_view_change(ControllerId from, const ViewChange& msg, Effects& out);

  void start_view_change(std::uint64_t new_view, Effects& out);
  void maybe_finish_view_change(Effects& out);
  void on_role_reply(SwitchId sw, const RoleReply& reply, Effects& out);
  void finish_fence(Effects& out);
  void stall(std::string reason, Effects& out);

  ReplicaConfig cfg_;
  std::uint64_t view_ = 0;
  ReplicaStatus status_ = ReplicaStatus::kNormal;
  std::vector<LogEntry> log_;
  std::uint64_t commit_index_ = 0;
  std::uint64_t applied_index_ = 0;
  std::map<EventId, LogEntry::Event> event_buffer_;
  std::map<SwitchId, std::set<std::uint64_t>> ack_table_;
  AppState app_;
  std::map<std::uint64_t, SwitchCommands> commands_;
  std::set<EventId> logged_events_;
  std::set<EventId> committed_events_;
  std::set<ControllerId> crashed_;

  // Leader bookkeeping.
  std::map<ControllerId, std::uint64_t> match_index_;
  std::map<ControllerId, ViewChange> view_votes_;
  std::set<SwitchId> awaiting_role_;
  std::set<SwitchId> master_of_;

  // Follower: length of the log prefix confirmed by the current leader.
  std::uint64_t verified_len_ = 0;
};

}  // namespace ftsdn
