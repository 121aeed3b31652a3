#include "ftsdn/trace.h"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace ftsdn {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr std::pair<RecordKind, std::string_view> kKindNames[] = {
    {RecordKind::kMeta, "META"},       {RecordKind::kSend, "SEND"},
    {RecordKind::kDeliver, "DELIVER"}, {RecordKind::kDrop, "DROP"},
    {RecordKind::kCrash, "CRASH"},     {RecordKind::kDetect, "DETECT"},
    {RecordKind::kApply, "APPLY"},     {RecordKind::kExec, "EXEC"},
    {RecordKind::kStall, "STALL"},
};

nlohmann::json actions_json(const std::vector<Action>& actions) {
  auto out = nlohmann::json::array();
  for (const auto& a : actions) {
    if (a.kind == Action::Kind::kDrop) {
      out.push_back("drop");
    } else if (a.port == kControllerPort) {
      out.push_back("output:controller");
    } else {
      out.push_back("output:" + std::to_string(a.port));
    }
  }
  return out;
}

nlohmann::json inner_json(const BundleInner& inner) { return to_json(to_message(inner)); }

}  // namespace

std::string_view to_string(RecordKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "?";
}

std::optional<RecordKind> parse_record_kind(std::string_view text) {
  for (const auto& [k, name] : kKindNames) {
    if (name == text) return k;
  }
  return std::nullopt;
}

const std::string& TraceRecord::get(const std::string& key) const {
  static const std::string kEmpty;
  auto it = detail.find(key);
  return it == detail.end() ? kEmpty : it->second;
}

TraceError::TraceError(std::size_t line, const std::string& message)
    : std::runtime_error("trace line " + std::to_string(line) + ": " + message), line_(line) {}

std::string controller_name(ControllerId id) { return "c" + std::to_string(id); }
std::string switch_name(SwitchId id) { return "s" + std::to_string(id); }

std::optional<std::uint32_t> parse_endpoint(std::string_view name, char prefix) {
  if (name.size() < 2 || name.front() != prefix) return std::nullopt;
  std::uint32_t id = 0;
  auto [ptr, ec] = std::from_chars(name.data() + 1, name.data() + name.size(), id);
  if (ec != std::errc{} || ptr != name.data() + name.size()) return std::nullopt;
  return id;
}

nlohmann::json to_json(const ControlMessage& msg) {
  nlohmann::json j;
  j["type"] = kind_name(msg);
  j["xid"] = msg.xid;
  std::visit(overloaded{
                 [](const Hello&) {},
                 [&](const RoleRequest& m) {
                   j["role"] = to_string(m.role);
                   j["generation_id"] = m.generation_id;
                 },
                 [&](const RoleReply& m) {
                   j["role"] = to_string(m.role);
                   j["generation_id"] = m.generation_id;
                 },
                 [&](const SetAsyncConfig& m) { j["packet_in_enabled"] = m.packet_in_enabled; },
                 [&](const PacketIn& m) {
                   j["event"] = to_string(m.event);
                   j["reason"] = to_string(m.reason);
                   j["in_port"] = m.in_port;
                   j["payload"] = to_hex(m.payload);
                 },
                 [&](const PacketOut& m) {
                   j["actions"] = actions_json(m.actions);
                   j["payload"] = to_hex(m.payload);
                 },
                 [&](const FlowMod& m) {
                   nlohmann::json match = nlohmann::json::object();
                   if (m.match.in_port) match["in_port"] = *m.match.in_port;
                   if (m.match.payload_prefix) match["payload_prefix"] = to_hex(*m.match.payload_prefix);
                   j["match"] = match;
                   j["priority"] = m.priority;
                   j["actions"] = actions_json(m.actions);
                 },
                 [&](const BundleOpen& m) { j["bundle_id"] = m.bundle_id; },
                 [&](const BundleAdd& m) {
                   j["bundle_id"] = m.bundle_id;
                   j["inner"] = inner_json(m.inner);
                 },
                 [&](const BundleCommit& m) { j["bundle_id"] = m.bundle_id; },
                 [&](const BundleCtrlReply& m) {
                   j["bundle_id"] = m.bundle_id;
                   j["kind"] = to_string(m.kind);
                 },
                 [&](const ErrorMsg& m) {
                   j["code"] = to_string(m.code);
                   j["context"] = to_hex(m.context);
                 },
             },
             msg.body);
  return j;
}

nlohmann::json to_json(const LogEntry& entry) {
  nlohmann::json j;
  j["index"] = entry.index;
  j["view"] = entry.view;
  if (const auto* ev = std::get_if<LogEntry::Event>(&entry.body)) {
    j["kind"] = "EVENT";
    j["event"] = to_string(ev->event);
    j["payload"] = to_hex(ev->payload);
    j["in_port"] = ev->in_port;
  } else {
    const auto& v = std::get<LogEntry::View>(entry.body);
    j["kind"] = "VIEW";
    j["new_view"] = v.view;
    j["leader"] = v.leader;
  }
  return j;
}

nlohmann::json to_json(const ReplMessage& msg) {
  nlohmann::json j;
  j["type"] = kind_name(msg);
  j["view"] = view_of(msg);
  std::visit(overloaded{
                 [&](const Append& m) {
                   j["prev_index"] = m.prev_index;
                   j["commit_index"] = m.commit_index;
                   auto entries = nlohmann::json::array();
                   for (const auto& e : m.entries) entries.push_back(to_json(e));
                   j["entries"] = entries;
                 },
                 [&](const AppendAck& m) { j["index"] = m.index; },
                 [&](const CommitAdvance& m) { j["commit_index"] = m.commit_index; },
                 [&](const ViewChange& m) {
                   j["commit_index"] = m.commit_index;
                   auto entries = nlohmann::json::array();
                   for (const auto& e : m.log) entries.push_back(to_json(e));
                   j["log"] = entries;
                 },
             },
             msg);
  return j;
}

nlohmann::json to_json(const TraceRecord& r) {
  nlohmann::json j;
  j["step"] = r.step;
  j["t"] = r.t;
  j["kind"] = to_string(r.kind);
  j["actor"] = r.actor;
  if (!r.peer.empty()) j["peer"] = r.peer;
  if (!r.msg.is_null()) j["msg"] = r.msg;
  if (!r.detail.empty()) j["detail"] = r.detail;
  return j;
}

TraceRecord record_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("record is not an object");
  TraceRecord r;
  r.step = j.at("step").get<std::uint64_t>();
  r.t = j.at("t").get<std::uint64_t>();
  const auto kind = parse_record_kind(j.at("kind").get<std::string>());
  if (!kind) throw std::invalid_argument("unknown record kind");
  r.kind = *kind;
  r.actor = j.at("actor").get<std::string>();
  if (j.contains("peer")) r.peer = j.at("peer").get<std::string>();
  if (j.contains("msg")) {
    r.msg = j.at("msg");
    if (!r.msg.is_object() || !r.msg.contains("type")) {
      throw std::invalid_argument("msg must be an object with a type");
    }
  }
  if (j.contains("detail")) {
    r.detail = j.at("detail").get<std::map<std::string, std::string>>();
  }
  for (const auto& [key, value] : j.items()) {
    if (key != "step" && key != "t" && key != "kind" && key != "actor" && key != "peer" &&
        key != "msg" && key != "detail") {
      throw std::invalid_argument("unknown field '" + key + "'");
    }
  }
  return r;
}

std::string serialize(const TraceRecord& record) { return to_json(record).dump(); }

std::string serialize(const Trace& trace) {
  std::ostringstream out;
  write_trace(out, trace);
  return out.str();
}

void write_trace(std::ostream& out, const Trace& trace) {
  for (const auto& r : trace) out << serialize(r) << '\n';
}

Trace parse_trace(std::istream& in) {
  Trace trace;
  std::string line;
  std::size_t line_no = 0;
  bool saw_newline_at_end = true;
  while (std::getline(in, line)) {
    ++line_no;
    saw_newline_at_end = !in.eof();
    if (line.empty()) throw TraceError(line_no, "empty line");
    try {
      trace.push_back(record_from_json(nlohmann::json::parse(line)));
    } catch (const std::exception& e) {
      throw TraceError(line_no, e.what());
    }
    if (trace.size() > 1 && trace.back().step <= trace[trace.size() - 2].step) {
      throw TraceError(line_no, "step numbers must strictly increase");
    }
  }
  if (!saw_newline_at_end) throw TraceError(line_no, "truncated final record (no newline)");
  return trace;
}

Trace parse_trace(const std::string& text) {
  std::istringstream in(text);
  return parse_trace(in);
}

Trace load_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw TraceError(0, "cannot read trace file '" + path + "'");
  return parse_trace(in);
}

}  // namespace ftsdn
