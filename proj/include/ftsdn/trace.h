#pragma once

// Trace records and their canonical line format.
//
// A trace file holds one JSON object per line. Keys are sorted and the
// encoding is compact, so two traces are equal iff their files are
// byte-identical. Endpoints are named "c<id>" (controllers) and "s<id>"
// (switches).

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ftsdn/ofmodel.h"
#include "ftsdn/replica.h"

namespace ftsdn {

enum class RecordKind { kMeta, kSend, kDeliver, kDrop, kCrash, kDetect, kApply, kExec, kStall };

std::string_view to_string(RecordKind kind);
std::optional<RecordKind> parse_record_kind(std::string_view text);

struct TraceRecord {
  std::uint64_t step = 0;
  std::uint64_t t = 0;
  RecordKind kind = RecordKind::kMeta;
  std::string actor;
  std::string peer;  // empty when absent
  nlohmann::json msg;  // null when absent
  std::map<std::string, std::string> detail;

  bool operator==(const TraceRecord&) const = default;

  // Detail lookup; empty string when the key is absent.
  const std::string& get(const std::string& key) const;
  bool has(const std::string& key) const { return detail.contains(key); }
};

using Trace = std::vector<TraceRecord>;

class TraceError : public std::runtime_error {
 public:
  TraceError(std::size_t line, const std::string& message);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

std::string controller_name(ControllerId id);
std::string switch_name(SwitchId id);
// Returns the numeric id when `name` has the given prefix ('c' or 's').
std::optional<std::uint32_t> parse_endpoint(std::string_view name, char prefix);

nlohmann::json to_json(const ControlMessage& msg);
nlohmann::json to_json(const ReplMessage& msg);
nlohmann::json to_json(const LogEntry& entry);

nlohmann::json to_json(const TraceRecord& record);
TraceRecord record_from_json(const nlohmann::json& j);

std::string serialize(const TraceRecord& record);
std::string serialize(const Trace& trace);
void write_trace(std::ostream& out, const Trace& trace);
Trace parse_trace(std::istream& in);
Trace parse_trace(const std::string& text);
Trace load_trace(const std::string& path);

}  // namespace ftsdn
