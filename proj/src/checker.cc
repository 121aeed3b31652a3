#include "ftsdn/checker.h"

#include <algorithm>
#include <map>
#include <sstream>

namespace ftsdn {

namespace {

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  if (text.empty()) return out;
  std::string::size_type start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    out.push_back(text.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

std::uint64_t to_u64(const std::string& text, const TraceRecord& r, const char* field) {
  try {
    std::size_t used = 0;
    const auto v = std::stoull(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  throw TraceError(r.step + 1, std::string("bad numeric field '") + field + "'");
}

bool is_event_apply(const TraceRecord& r) {
  return r.kind == RecordKind::kApply && r.get("entry") == "EVENT";
}

bool is_switch_event(const TraceRecord& r) {
  if (r.kind != RecordKind::kSend || !parse_endpoint(r.actor, 's')) return false;
  if (r.msg.value("type", "") != "PacketIn") return false;
  const auto payload = from_hex(r.msg.value("payload", ""));
  return payload && !decode_ack(*payload);
}

bool is_bundle_commit(const TraceRecord& r) {
  return r.kind == RecordKind::kExec && r.get("exec") == "BUNDLE_COMMIT";
}

bool is_effect(const TraceRecord& r) {
  return r.kind == RecordKind::kExec && (r.get("exec") == "FLOWMOD" || r.get("exec") == "PACKETOUT");
}

const TraceRecord* at_step(const Trace& trace, std::uint64_t step) {
  // Steps are dense from 0 in simulator output; fall back to a search otherwise.
  if (step < trace.size() && trace[step].step == step) return &trace[step];
  auto it = std::lower_bound(trace.begin(), trace.end(), step,
                             [](const TraceRecord& r, std::uint64_t s) { return r.step < s; });
  return it != trace.end() && it->step == step ? &*it : nullptr;
}

struct ApplySeq {
  std::vector<std::string> events;
  std::vector<std::uint64_t> steps;
};

std::map<std::string, ApplySeq> apply_sequences(const Trace& trace) {
  std::map<std::string, ApplySeq> seqs;
  for (const auto& r : trace) {
    if (!is_event_apply(r)) continue;
    seqs[r.actor].events.push_back(r.get("event"));
    seqs[r.actor].steps.push_back(r.step);
  }
  return seqs;
}

std::map<std::string, const TraceRecord*> final_records(const Trace& trace) {
  std::map<std::string, const TraceRecord*> out;
  for (const auto& r : trace) {
    if (r.kind == RecordKind::kMeta && r.get("record") == "final") out[r.actor] = &r;
  }
  return out;
}

std::vector<std::string> survivors(const TraceSummary& summary) {
  std::vector<std::string> out;
  for (std::uint32_t c = 0; c < summary.n_controllers; ++c) {
    const auto name = controller_name(c);
    if (!summary.crashed.contains(name)) out.push_back(name);
  }
  return out;
}

using BatchKey = std::pair<std::uint64_t, std::string>;  // (log index, switch)

struct CommandAccounting {
  std::map<BatchKey, std::uint64_t> expected;  // commands (NAIVE) or 1 bundle
  std::map<BatchKey, std::uint64_t> apply_step;
  std::map<BatchKey, std::vector<std::uint64_t>> executions;
};

CommandAccounting account_commands(const Trace& trace, const std::string& variant) {
  CommandAccounting acc;
  const bool naive = variant == "NAIVE";
  for (const auto& r : trace) {
    if (is_event_apply(r)) {
      const auto index = to_u64(r.get("index"), r, "index");
      for (const auto& part : split(r.get("cmds"), ',')) {
        const auto eq = part.find('=');
        if (eq == std::string::npos) throw TraceError(r.step + 1, "bad cmds field");
        const BatchKey key{index, "s" + part.substr(0, eq)};
        if (acc.expected.contains(key)) continue;
        acc.expected[key] = naive ? to_u64(part.substr(eq + 1), r, "cmds") : 1;
        acc.apply_step[key] = r.step;
      }
      continue;
    }
    if (r.kind != RecordKind::kExec) continue;
    if (naive) {
      if (is_effect(r) && !r.has("bundle_id")) {
        acc.executions[{to_u64(r.get("xid"), r, "xid"), r.actor}].push_back(r.step);
      }
    } else if (is_bundle_commit(r)) {
      acc.executions[{to_u64(r.get("bundle_id"), r, "bundle_id"), r.actor}].push_back(r.step);
    }
  }
  return acc;
}

}  // namespace

std::string_view to_string(Property p) {
  switch (p) {
    case Property::kP1:
      return "P1";
    case Property::kP2:
      return "P2";
    case Property::kP3:
      return "P3";
    case Property::kP4:
      return "P4";
    case Property::kP5:
      return "P5";
    case Property::kP6:
      return "P6";
  }
  return "?";
}

std::string_view describe(Property p) {
  switch (p) {
    case Property::kP1:
      return "total_order";
    case Property::kP2:
      return "at_least_once";
    case Property::kP3:
      return "at_most_once";
    case Property::kP4:
      return "exactly_once_commands";
    case Property::kP5:
      return "replica_convergence";
    case Property::kP6:
      return "bundle_atomicity";
  }
  return "?";
}

std::string_view to_string(Anomaly a) {
  switch (a) {
    case Anomaly::kLostEvent:
      return "LOST_EVENT";
    case Anomaly::kRepeatedEvent:
      return "REPEATED_EVENT";
    case Anomaly::kOrderDivergence:
      return "ORDER_DIVERGENCE";
    case Anomaly::kRepeatedCommand:
      return "REPEATED_COMMAND";
    case Anomaly::kMissingCommand:
      return "MISSING_COMMAND";
    case Anomaly::kStateDivergence:
      return "STATE_DIVERGENCE";
    case Anomaly::kNonAtomicBundle:
      return "NON_ATOMIC_BUNDLE";
  }
  return "?";
}

TraceSummary summarize(const Trace& trace) {
  if (trace.empty()) throw TraceError(1, "empty trace");
  const auto& head = trace.front();
  if (head.kind != RecordKind::kMeta || head.get("record") != "header") {
    throw TraceError(1, "trace does not start with a header record");
  }
  const auto& tail = trace.back();
  if (tail.kind != RecordKind::kMeta || tail.get("record") != "end") {
    throw TraceError(trace.size(), "trace has no end record (truncated?)");
  }
  TraceSummary s;
  s.variant = head.get("variant");
  if (!parse_variant(s.variant)) throw TraceError(1, "unknown variant in header");
  s.n_controllers = static_cast<std::uint32_t>(to_u64(head.get("n_controllers"), head, "n_controllers"));
  for (const auto& sw : split(head.get("switches"), ',')) s.switches.insert("s" + sw);
  s.quiescent = tail.get("quiescent") == "true";
  for (const auto& r : trace) {
    if (r.kind == RecordKind::kCrash) s.crashed.insert(r.actor);
  }
  return s;
}

Verdict check_total_order(const Trace& trace) {
  Verdict v{Property::kP1};
  const auto seqs = apply_sequences(trace);
  for (auto a = seqs.begin(); a != seqs.end(); ++a) {
    for (auto b = std::next(a); b != seqs.end(); ++b) {
      const auto n = std::min(a->second.events.size(), b->second.events.size());
      for (std::size_t i = 0; i < n; ++i) {
        if (a->second.events[i] == b->second.events[i]) continue;
        v.witnesses.push_back({{a->second.steps[i], b->second.steps[i]},
                               a->first + " applied " + a->second.events[i] + " at position " +
                                   std::to_string(i + 1) + " where " + b->first + " applied " +
                                   b->second.events[i]});
        break;
      }
    }
  }
  v.pass = v.witnesses.empty();
  return v;
}

Verdict check_at_least_once(const Trace& trace) {
  const auto summary = summarize(trace);
  Verdict v{Property::kP2};
  if (!summary.quiescent || !summary.within_fault_bound()) {
    v.note = "not evaluated: requires quiescence and at most floor(n/2) crashes";
    return v;
  }
  std::map<std::string, std::uint64_t> emitted;
  for (const auto& r : trace) {
    if (is_switch_event(r)) emitted.try_emplace(r.msg.at("event").get<std::string>(), r.step);
  }
  const auto seqs = apply_sequences(trace);
  const auto finals = final_records(trace);
  for (const auto& replica : survivors(summary)) {
    std::set<std::string> applied;
    if (auto it = seqs.find(replica); it != seqs.end()) {
      applied.insert(it->second.events.begin(), it->second.events.end());
    }
    const auto fin = finals.find(replica);
    for (const auto& [event, step] : emitted) {
      if (applied.contains(event)) continue;
      Witness w{{step}, "event " + event + " emitted at step " + std::to_string(step) +
                            " was never applied by " + replica};
      if (fin != finals.end()) w.steps.push_back(fin->second->step);
      v.witnesses.push_back(std::move(w));
    }
  }
  v.pass = v.witnesses.empty();
  return v;
}

Verdict check_at_most_once(const Trace& trace) {
  Verdict v{Property::kP3};
  std::map<std::pair<std::string, std::string>, std::uint64_t> first;
  for (const auto& r : trace) {
    if (!is_event_apply(r)) continue;
    auto [it, inserted] = first.try_emplace({r.actor, r.get("event")}, r.step);
    if (!inserted) {
      v.witnesses.push_back({{it->second, r.step},
                             r.actor + " applied event " + r.get("event") + " twice"});
    }
  }
  v.pass = v.witnesses.empty();
  return v;
}

Verdict check_exactly_once_commands(const Trace& trace) {
  const auto summary = summarize(trace);
  Verdict v{Property::kP4};
  const bool full = summary.quiescent && summary.within_fault_bound();
  if (!full) v.note = "committed entries only: repeated executions checked, missing ones not";
  const auto acc = account_commands(trace, summary.variant);
  const auto unit = summary.variant == "NAIVE" ? "command(s)" : "bundle commit(s)";

  std::set<BatchKey> keys;
  for (const auto& [k, n] : acc.expected) keys.insert(k);
  for (const auto& [k, steps] : acc.executions) keys.insert(k);
  for (const auto& key : keys) {
    const auto exp_it = acc.expected.find(key);
    const std::uint64_t expected = exp_it == acc.expected.end() ? 0 : exp_it->second;
    const auto exec_it = acc.executions.find(key);
    const std::uint64_t observed = exec_it == acc.executions.end() ? 0 : exec_it->second.size();
    if (observed == expected || (!full && observed < expected)) continue;
    Witness w;
    if (exec_it != acc.executions.end()) w.steps = exec_it->second;
    if (auto a = acc.apply_step.find(key); a != acc.apply_step.end()) w.steps.insert(w.steps.begin(), a->second);
    w.description = "index " + std::to_string(key.first) + " on " + key.second + ": " +
                    std::to_string(observed) + " " + unit + " executed, expected " +
                    std::to_string(expected);
    w.observed = observed;
    w.expected = expected;
    v.witnesses.push_back(std::move(w));
  }
  v.pass = v.witnesses.empty();
  return v;
}

Verdict check_replica_convergence(const Trace& trace) {
  const auto summary = summarize(trace);
  Verdict v{Property::kP5};
  if (!summary.quiescent) {
    v.note = "not evaluated: trace did not reach quiescence";
    return v;
  }
  const auto finals = final_records(trace);
  const TraceRecord* reference = nullptr;
  for (const auto& replica : survivors(summary)) {
    auto it = finals.find(replica);
    if (it == finals.end()) throw TraceError(trace.size(), "missing final record for " + replica);
    const auto* rec = it->second;
    if (!reference) {
      reference = rec;
      continue;
    }
    if (rec->get("applied_index") != reference->get("applied_index") ||
        rec->get("digest") != reference->get("digest")) {
      v.witnesses.push_back({{reference->step, rec->step},
                             reference->actor + " ended at (" + reference->get("applied_index") +
                                 ", " + reference->get("digest") + "), " + rec->actor + " at (" +
                                 rec->get("applied_index") + ", " + rec->get("digest") + ")"});
    }
  }
  v.pass = v.witnesses.empty();
  return v;
}

Verdict check_bundle_atomicity(const Trace& trace) {
  Verdict v{Property::kP6};
  struct Open {
    std::string bundle;
    std::string from;
    std::uint64_t remaining = 0;
    std::uint64_t commit_step = 0;
  };
  std::map<std::string, Open> open;  // per switch
  // (switch, controller, bundle) -> step of the discard
  std::map<std::tuple<std::string, std::string, std::string>, std::uint64_t> discarded;

  auto close_incomplete = [&](const std::string& sw, std::uint64_t at) {
    auto it = open.find(sw);
    if (it == open.end() || it->second.remaining == 0) return;
    v.witnesses.push_back({{it->second.commit_step},
                           "bundle " + it->second.bundle + " on " + sw + " committed but " +
                               std::to_string(it->second.remaining) +
                               " staged effect(s) missing before step " + std::to_string(at)});
    open.erase(it);
  };

  for (const auto& r : trace) {
    if (r.kind == RecordKind::kDrop && r.has("discarded_bundles")) {
      for (const auto& b : split(r.get("discarded_bundles"), ',')) discarded[{r.actor, r.peer, b}] = r.step;
      continue;
    }
    if (r.kind != RecordKind::kExec) continue;
    if (is_bundle_commit(r)) {
      close_incomplete(r.actor, r.step);
      const auto id = r.get("bundle_id");
      if (auto d = discarded.find({r.actor, r.peer, id}); d != discarded.end()) {
        v.witnesses.push_back({{r.step, d->second},
                               "bundle " + id + " from " + r.peer + " committed on " + r.actor +
                                   " after it was discarded"});
      }
      open[r.actor] = {id, r.peer, to_u64(r.get("staged"), r, "staged"), r.step};
      continue;
    }
    if (!is_effect(r) && r.get("exec") != "PACKET_FWD") continue;
    auto it = open.find(r.actor);
    const bool in_bundle = it != open.end() && it->second.remaining > 0;
    if (!r.has("bundle_id")) {
      if (in_bundle) {
        v.witnesses.push_back({{r.step, it->second.commit_step},
                               "unbundled effect interleaved with bundle " + it->second.bundle +
                                   " on " + r.actor});
      }
      continue;
    }
    const auto id = r.get("bundle_id");
    if (!in_bundle || it->second.bundle != id || it->second.from != r.peer) {
      v.witnesses.push_back({{r.step}, "effect of bundle " + id + " from " + r.peer + " on " +
                                           r.actor + " without its BUNDLE_COMMIT"});
      continue;
    }
    --it->second.remaining;
  }
  std::vector<std::string> switches;
  for (const auto& [sw, o] : open) switches.push_back(sw);
  for (const auto& sw : switches) close_incomplete(sw, trace.back().step);
  v.pass = v.witnesses.empty();
  return v;
}

std::vector<Verdict> check_all(const Trace& trace) {
  return {check_total_order(trace),           check_at_least_once(trace),
          check_at_most_once(trace),          check_exactly_once_commands(trace),
          check_replica_convergence(trace),   check_bundle_atomicity(trace)};
}

bool witness_holds(const Trace& trace, Property property, const Witness& w) {
  std::vector<const TraceRecord*> recs;
  for (auto s : w.steps) {
    const auto* r = at_step(trace, s);
    if (!r) return false;
    recs.push_back(r);
  }
  if (recs.empty()) return false;

  auto position = [&](const TraceRecord& apply) {
    std::size_t pos = 0;
    for (const auto& r : trace) {
      if (r.step > apply.step) break;
      if (is_event_apply(r) && r.actor == apply.actor) ++pos;
    }
    return pos;
  };

  switch (property) {
    case Property::kP1: {
      if (recs.size() != 2 || !is_event_apply(*recs[0]) || !is_event_apply(*recs[1])) return false;
      return recs[0]->actor != recs[1]->actor && recs[0]->get("event") != recs[1]->get("event") &&
             position(*recs[0]) == position(*recs[1]);
    }
    case Property::kP2: {
      if (recs.size() != 2 || !is_switch_event(*recs[0])) return false;
      const auto& fin = *recs[1];
      if (fin.kind != RecordKind::kMeta || fin.get("record") != "final" || fin.get("alive") != "true") {
        return false;
      }
      const auto event = recs[0]->msg.at("event").get<std::string>();
      return std::none_of(trace.begin(), trace.end(), [&](const TraceRecord& r) {
        return is_event_apply(r) && r.actor == fin.actor && r.get("event") == event;
      });
    }
    case Property::kP3:
      return recs.size() == 2 && is_event_apply(*recs[0]) && is_event_apply(*recs[1]) &&
             recs[0]->step != recs[1]->step && recs[0]->actor == recs[1]->actor &&
             recs[0]->get("event") == recs[1]->get("event");
    case Property::kP4: {
      if (!w.observed || !w.expected || *w.observed == *w.expected) return false;
      const auto summary = summarize(trace);
      const auto acc = account_commands(trace, summary.variant);
      // The batch is identified by the cited records: an APPLY or an execution.
      for (const auto& [key, steps] : acc.executions) {
        if (std::find(steps.begin(), steps.end(), recs.back()->step) != steps.end()) {
          const auto exp = acc.expected.contains(key) ? acc.expected.at(key) : 0;
          return steps.size() == *w.observed && exp == *w.expected;
        }
      }
      for (const auto& [key, step] : acc.apply_step) {
        if (step == recs.front()->step && !acc.executions.contains(key)) {
          return *w.observed == 0 && acc.expected.at(key) == *w.expected;
        }
      }
      return false;
    }
    case Property::kP5:
      return recs.size() == 2 && recs[0]->get("record") == "final" &&
             recs[1]->get("record") == "final" &&
             (recs[0]->get("applied_index") != recs[1]->get("applied_index") ||
              recs[0]->get("digest") != recs[1]->get("digest"));
    case Property::kP6: {
      const auto check = check_bundle_atomicity(trace);
      return std::any_of(check.witnesses.begin(), check.witnesses.end(),
                         [&](const Witness& other) { return other.steps == w.steps; });
    }
  }
  return false;
}

std::vector<Anomaly> classify_anomalies(const std::vector<Verdict>& verdicts) {
  std::set<Anomaly> found;
  for (const auto& v : verdicts) {
    if (v.pass) continue;
    switch (v.property) {
      case Property::kP1:
        found.insert(Anomaly::kOrderDivergence);
        break;
      case Property::kP2:
        found.insert(Anomaly::kLostEvent);
        break;
      case Property::kP3:
        found.insert(Anomaly::kRepeatedEvent);
        break;
      case Property::kP4:
        for (const auto& w : v.witnesses) {
          if (w.observed && w.expected && *w.observed > *w.expected) {
            found.insert(Anomaly::kRepeatedCommand);
          } else {
            found.insert(Anomaly::kMissingCommand);
          }
        }
        break;
      case Property::kP5:
        found.insert(Anomaly::kStateDivergence);
        break;
      case Property::kP6:
        found.insert(Anomaly::kNonAtomicBundle);
        break;
    }
  }
  return {found.begin(), found.end()};
}

bool all_pass(const std::vector<Verdict>& verdicts) {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
}

std::string verdict_signs(const std::vector<Verdict>& verdicts) {
  std::string signs;
  for (auto p : kAllProperties) {
    auto it = std::find_if(verdicts.begin(), verdicts.end(),
                           [p](const Verdict& v) { return v.property == p; });
    signs += (it == verdicts.end() || it->pass) ? '+' : '-';
  }
  return signs;
}

std::string summary_line(const std::vector<Verdict>& verdicts) {
  return std::string("RESULT ") + (all_pass(verdicts) ? "pass" : "fail") +
         " P1..P6=" + verdict_signs(verdicts);
}

std::string format_report(const std::vector<Verdict>& verdicts) {
  std::ostringstream out;
  for (const auto& v : verdicts) {
    out << to_string(v.property) << ' ' << describe(v.property) << ": "
        << (v.pass ? "pass" : "FAIL");
    if (!v.note.empty()) out << " (" << v.note << ")";
    out << '\n';
    for (const auto& w : v.witnesses) {
      out << "    steps [";
      for (std::size_t i = 0; i < w.steps.size(); ++i) out << (i ? ", " : "") << w.steps[i];
      out << "] " << w.description << '\n';
    }
  }
  const auto anomalies = classify_anomalies(verdicts);
  if (!anomalies.empty()) {
    out << "anomalies:";
    for (auto a : anomalies) out << ' ' << to_string(a);
    out << '\n';
  }
  out << summary_line(verdicts) << '\n';
  return out.str();
}

}  // namespace ftsdn
