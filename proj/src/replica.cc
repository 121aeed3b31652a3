#include "ftsdn/replica.h"

#include <algorithm>
#include <stdexcept>

namespace ftsdn {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::uint64_t last_view(const std::vector<LogEntry>& log) {
  return log.empty() ? 0 : log.back().view;
}

}  // namespace

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::kNaive:
      return "NAIVE";
    case Variant::kPaperA:
      return "PAPER_A";
    case Variant::kPaperB:
      return "PAPER_B";
  }
  return "?";
}

std::optional<Variant> parse_variant(std::string_view text) {
  if (text == "NAIVE") return Variant::kNaive;
  if (text == "PAPER_A") return Variant::kPaperA;
  if (text == "PAPER_B") return Variant::kPaperB;
  return std::nullopt;
}

std::string_view to_string(ReplicaStatus s) {
  switch (s) {
    case ReplicaStatus::kNormal:
      return "NORMAL";
    case ReplicaStatus::kViewChange:
      return "VIEW_CHANGE";
    case ReplicaStatus::kFencing:
      return "FENCING";
    case ReplicaStatus::kStalled:
      return "STALLED";
  }
  return "?";
}

std::string_view kind_name(const ReplMessage& msg) {
  return std::visit(overloaded{
                        [](const Append&) { return std::string_view("Append"); },
                        [](const AppendAck&) { return std::string_view("AppendAck"); },
                        [](const CommitAdvance&) { return std::string_view("CommitAdvance"); },
                        [](const ViewChange&) { return std::string_view("ViewChange"); },
                    },
                    msg);
}

std::uint64_t view_of(const ReplMessage& msg) {
  return std::visit([](const auto& m) { return m.view; }, msg);
}

std::vector<ControlMessage> build_bundle(std::uint64_t view, std::uint64_t index, SwitchId sw,
                                         const std::vector<BundleInner>& cmds) {
  if (cmds.empty()) throw std::invalid_argument("build_bundle: empty command list");
  std::vector<ControlMessage> out;
  out.reserve(cmds.size() + 3);
  out.push_back({BundleOpen{index}, index});
  for (const auto& c : cmds) out.push_back({BundleAdd{index, c}, index});
  PacketOut ack{{Action::output(kControllerPort)}, encode_ack(view, index, sw)};
  out.push_back({BundleAdd{index, ack}, index});
  out.push_back({BundleCommit{index}, index});
  return out;
}

Replica::Replica(ReplicaConfig config) : cfg_(std::move(config)), app_(cfg_.initial_app) {
  if (cfg_.id >= cfg_.n_replicas) throw std::invalid_argument("replica id out of range");
}

std::vector<ControllerId> Replica::live_peers() const {
  std::vector<ControllerId> peers;
  for (ControllerId c = 0; c < cfg_.n_replicas; ++c) {
    if (c != cfg_.id && !crashed_.contains(c)) peers.push_back(c);
  }
  return peers;
}

Effects Replica::start() {
  Effects out;
  for (SwitchId sw : cfg_.switches) {
    if (is_leader()) {
      out.push_back(ToSwitch{sw, {RoleRequest{Role::kMaster, view_}, 0}});
      awaiting_role_.insert(sw);
    } else {
      out.push_back(ToSwitch{sw, {RoleRequest{Role::kSlave, view_}, 0}});
      if (uses_bundles() && !cfg_.suppress_slave_delivery) {
        out.push_back(ToSwitch{sw, {SetAsyncConfig{true}, 0}});
      }
    }
  }
  if (is_leader()) {
    status_ = ReplicaStatus::kFencing;
    if (awaiting_role_.empty()) finish_fence(out);
  }
  return out;
}

Effects Replica::on_switch_message(SwitchId sw, const ControlMessage& msg) {
  if (msg.is<PacketIn>()) return on_packet_in(sw, msg.as<PacketIn>());
  Effects out;
  if (msg.is<RoleReply>()) on_role_reply(sw, msg.as<RoleReply>(), out);
  return out;
}

Effects Replica::on_packet_in(SwitchId, const PacketIn& pkt) {
  Effects out;
  if (auto ack = decode_ack(pkt.payload)) {
    ack_table_[ack->target_switch].insert(ack->log_index);
    return out;
  }
  if (committed_events_.contains(pkt.event)) return out;
  event_buffer_.try_emplace(pkt.event, LogEntry::Event{pkt.event, pkt.payload, pkt.in_port});
  if (is_leader() && status_ == ReplicaStatus::kNormal && !in_log(pkt.event)) {
    append_and_replicate(event_buffer_.at(pkt.event), out);
  }
  return out;
}

Effects Replica::on_repl_message(ControllerId from, const ReplMessage& msg) {
  Effects out;
  if (status_ == ReplicaStatus::kStalled) {
    out.push_back(Ignored{"stalled"});
    return out;
  }
  if (view_of(msg) < view_) {
    out.push_back(Ignored{"stale view"});
    return out;
  }
  std::visit(overloaded{
                 [&](const Append& m) { handle_append(from, m, out); },
                 [&](const AppendAck& m) { handle_append_ack(from, m, out); },
                 [&](const CommitAdvance& m) { handle_commit_advance(m, out); },
                 [&](const ViewChange& m) { handle_view_change(from, m, out); },
             },
             msg);
  return out;
}

Effects Replica::on_failure_notice(ControllerId crashed) {
  Effects out;
  if (crashed == cfg_.id || crashed_.contains(crashed)) return out;
  crashed_.insert(crashed);
  if (status_ == ReplicaStatus::kStalled) return out;
  if (alive_count() < majority()) {
    stall("majority of replicas lost", out);
    return out;
  }
  if (leader_of(view_) == crashed) {
    std::uint64_t next = view_ + 1;
    while (crashed_.contains(leader_of(next))) ++next;
    start_view_change(next, out);
  }
  return out;
}

void Replica::append_and_replicate(LogEntry::Event event, Effects& out) {
  LogEntry entry{log_.size() + 1, view_, std::move(event)};
  logged_events_.insert(std::get<LogEntry::Event>(entry.body).event);
  log_.push_back(entry);
  for (ControllerId peer : live_peers()) {
    out.push_back(ToReplica{peer, Append{view_, entry.index - 1, {entry}, commit_index_}});
  }
  try_advance_commit(out);
}

void Replica::append_view_entry(Effects& out) {
  log_.push_back(LogEntry{log_.size() + 1, view_, LogEntry::View{view_, cfg_.id}});
  // The first Append of a view carries the whole log so followers converge on it.
  for (ControllerId peer : live_peers()) {
    match_index_[peer] = 0;
    out.push_back(ToReplica{peer, Append{view_, 0, log_, commit_index_}});
  }
  try_advance_commit(out);
}

void Replica::try_advance_commit(Effects& out) {
  if (!is_leader() || status_ == ReplicaStatus::kViewChange ||
      status_ == ReplicaStatus::kStalled) {
    return;
  }
  for (std::uint64_t i = log_.size(); i > commit_index_; --i) {
    // Entries from older views commit only together with one from this view.
    if (log_[i - 1].view != view_) break;
    std::size_t holders = 1;
    for (const auto& [peer, matched] : match_index_) {
      if (matched >= i) ++holders;
    }
    if (holders >= majority()) {
      commit_index_ = i;
      for (ControllerId peer : live_peers()) {
        out.push_back(ToReplica{peer, CommitAdvance{view_, commit_index_}});
      }
      apply_committed(out);
      return;
    }
  }
}

void Replica::apply_committed(Effects& out) {
  while (applied_index_ < commit_index_) apply_entry(log_[applied_index_], out);
}

void Replica::apply_entry(const LogEntry& entry, Effects& out) {
  if (entry.index != applied_index_ + 1 || entry.index > commit_index_) {
    throw std::logic_error("apply_entry: index " + std::to_string(entry.index) +
                           " out of order (applied " + std::to_string(applied_index_) +
                           ", commit " + std::to_string(commit_index_) + ")");
  }
  applied_index_ = entry.index;
  const auto* ev = std::get_if<LogEntry::Event>(&entry.body);
  if (!ev) {
    out.push_back(Applied{entry, {}, applied_index_, digest(app_), view_});
    return;
  }
  event_buffer_.erase(ev->event);
  committed_events_.insert(ev->event);
  auto result = process_event(app_, ev->event.sw, ev->in_port, ev->payload);
  app_ = std::move(result.state);
  for (auto it = result.commands.begin(); it != result.commands.end();) {
    it = it->second.empty() ? result.commands.erase(it) : std::next(it);
  }
  out.push_back(Applied{entry, result.commands, applied_index_, digest(app_), view_});
  if (result.commands.empty()) return;
  commands_[entry.index] = result.commands;
  if (!is_leader()) return;
  for (const auto& [sw, cmds] : result.commands) {
    if (master_of_.contains(sw)) send_commands(entry.index, sw, cmds, out);
  }
}

void Replica::send_commands(std::uint64_t index, SwitchId sw,
                            const std::vector<BundleInner>& cmds, Effects& out) {
  if (!uses_bundles()) {
    for (const auto& c : cmds) out.push_back(ToSwitch{sw, to_message(c, index)});
    return;
  }
  if (auto acked = ack_table_.find(sw); acked != ack_table_.end() && acked->second.contains(index)) {
    return;
  }
  for (auto& m : build_bundle(view_, index, sw, cmds)) out.push_back(ToSwitch{sw, std::move(m)});
}

void Replica::rebuild_event_index() {
  logged_events_.clear();
  for (const auto& e : log_) {
    if (const auto* ev = std::get_if<LogEntry::Event>(&e.body)) logged_events_.insert(ev->event);
  }
}

void Replica::handle_append(ControllerId from, const Append& msg, Effects& out) {
  if (msg.view > view_ || status_ == ReplicaStatus::kViewChange) {
    view_ = msg.view;
    status_ = ReplicaStatus::kNormal;
    view_votes_.clear();
    master_of_.clear();
    awaiting_role_.clear();
    verified_len_ = 0;
  }
  if (is_leader()) throw std::logic_error("leader received Append for its own view");
  if (msg.prev_index > log_.size()) {
    out.push_back(Ignored{"append gap"});
    return;
  }
  bool truncated = false;
  for (const auto& entry : msg.entries) {
    if (entry.index <= log_.size()) {
      if (log_[entry.index - 1] == entry) continue;
      if (entry.index <= commit_index_) {
        throw std::logic_error("replica " + std::to_string(cfg_.id) +
                               ": Append conflicts with committed index " +
                               std::to_string(entry.index));
      }
      log_.erase(log_.begin() + static_cast<std::ptrdiff_t>(entry.index - 1), log_.end());
      truncated = true;
    }
    log_.push_back(entry);
  }
  if (truncated) {
    rebuild_event_index();
  } else {
    for (const auto& entry : msg.entries) {
      if (const auto* ev = std::get_if<LogEntry::Event>(&entry.body)) logged_events_.insert(ev->event);
    }
  }
  verified_len_ = std::max<std::uint64_t>(verified_len_, msg.prev_index + msg.entries.size());
  const auto new_commit = std::min(msg.commit_index, verified_len_);
  if (new_commit > commit_index_) {
    commit_index_ = new_commit;
    apply_committed(out);
  }
  out.push_back(ToReplica{from, AppendAck{view_, verified_len_}});
}

void Replica::handle_append_ack(ControllerId from, const AppendAck& msg, Effects& out) {
  if (!is_leader() || msg.view != view_ || status_ == ReplicaStatus::kViewChange) {
    out.push_back(Ignored{"ack outside leadership"});
    return;
  }
  auto& matched = match_index_[from];
  matched = std::max(matched, msg.index);
  try_advance_commit(out);
}

void Replica::handle_commit_advance(const CommitAdvance& msg, Effects& out) {
  if (is_leader() || msg.view != view_ || status_ != ReplicaStatus::kNormal) {
    out.push_back(Ignored{"commit outside view"});
    return;
  }
  const auto new_commit = std::min(msg.commit_index, verified_len_);
  if (new_commit > commit_index_) {
    commit_index_ = new_commit;
    apply_committed(out);
  }
}

void Replica::handle_view_change(ControllerId from, const ViewChange& msg, Effects& out) {
  if (leader_of(msg.view) != cfg_.id) {
    out.push_back(Ignored{"view change for another leader"});
    return;
  }
  if (msg.view > view_) start_view_change(msg.view, out);
  if (status_ != ReplicaStatus::kViewChange) {
    out.push_back(Ignored{"view change already complete"});
    return;
  }
  view_votes_[from] = msg;
  maybe_finish_view_change(out);
}

void Replica::start_view_change(std::uint64_t new_view, Effects& out) {
  view_ = new_view;
  status_ = ReplicaStatus::kViewChange;
  view_votes_.clear();
  match_index_.clear();
  master_of_.clear();
  awaiting_role_.clear();
  verified_len_ = 0;
  ViewChange vote{view_, log_, commit_index_};
  if (is_leader()) {
    view_votes_[cfg_.id] = std::move(vote);
    maybe_finish_view_change(out);
  } else {
    out.push_back(ToReplica{leader_of(view_), std::move(vote)});
  }
}

void Replica::maybe_finish_view_change(Effects& out) {
  if (view_votes_.size() < majority()) return;

  // Most up-to-date log: highest view of its last entry, then longest.
  const ViewChange* best = nullptr;
  std::uint64_t commit = commit_index_;
  for (const auto& [id, vote] : view_votes_) {
    commit = std::max(commit, vote.commit_index);
    if (!best || last_view(vote.log) > last_view(best->log) ||
        (last_view(vote.log) == last_view(best->log) && vote.log.size() > best->log.size())) {
      best = &vote;
    }
  }
  if (best->log != log_) {
    if (best->log.size() < commit_index_ ||
        !std::equal(log_.begin(), log_.begin() + static_cast<std::ptrdiff_t>(commit_index_),
                    best->log.begin())) {
      throw std::logic_error("view change would drop a committed entry");
    }
    log_ = best->log;
    rebuild_event_index();
  }
  view_votes_.clear();
  commit_index_ = std::max(commit_index_, std::min<std::uint64_t>(commit, log_.size()));
  apply_committed(out);

  status_ = ReplicaStatus::kFencing;
  append_view_entry(out);
  for (SwitchId sw : cfg_.switches) {
    out.push_back(ToSwitch{sw, {RoleRequest{Role::kMaster, view_}, 0}});
    awaiting_role_.insert(sw);
  }
  if (awaiting_role_.empty()) finish_fence(out);
}

void Replica::on_role_reply(SwitchId sw, const RoleReply& reply, Effects& out) {
  if (reply.role != Role::kMaster || !is_leader() || status_ != ReplicaStatus::kFencing ||
      reply.generation_id != view_) {
    return;
  }
  awaiting_role_.erase(sw);
  if (awaiting_role_.empty()) finish_fence(out);
}

void Replica::finish_fence(Effects& out) {
  status_ = ReplicaStatus::kNormal;
  master_of_.insert(cfg_.switches.begin(), cfg_.switches.end());

  std::vector<LogEntry::Event> pending;
  for (const auto& [id, ev] : event_buffer_) {
    if (!in_log(id)) pending.push_back(ev);
  }
  for (auto& ev : pending) append_and_replicate(std::move(ev), out);

  // Every ack emitted before the role change has arrived by now.
  for (const auto& [index, by_switch] : commands_) {
    for (const auto& [sw, cmds] : by_switch) send_commands(index, sw, cmds, out);
  }
}

void Replica::stall(std::string reason, Effects& out) {
  status_ = ReplicaStatus::kStalled;
  out.push_back(Stalled{std::move(reason)});
}

}  // namespace ftsdn
