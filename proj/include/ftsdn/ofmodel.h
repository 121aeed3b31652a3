#pragma once

// OpenFlow 1.4 message subset shared by the switch model and the controllers.
// Pure data: nothing in here knows about replication or the simulator.

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace ftsdn {

using ControllerId = std::uint32_t;
using SwitchId = std::uint32_t;
using PortId = std::uint32_t;
using Bytes = std::vector<std::uint8_t>;

// OFPP_CONTROLLER. Never a physical port.
inline constexpr PortId kControllerPort = 0xfffffffdU;

enum class Role { kMaster, kSlave, kEqual };

std::string_view to_string(Role role);

// Identity of an asynchronous switch event. seq is switch-local and starts at 1.
struct EventId {
  SwitchId sw = 0;
  std::uint64_t seq = 0;

  auto operator<=>(const EventId&) const = default;
};

std::string to_string(const EventId& id);
// Parses the "<switch>:<seq>" form produced by to_string.
std::optional<EventId> parse_event_id(std::string_view text);

struct Action {
  enum class Kind { kOutput, kDrop };
  Kind kind = Kind::kDrop;
  PortId port = 0;

  static Action output(PortId p) { return {Kind::kOutput, p}; }
  static Action drop() { return {Kind::kDrop, 0}; }

  auto operator<=>(const Action&) const = default;
};

// Exact match on the optional fields; an empty Match is the table-miss entry.
struct Match {
  std::optional<PortId> in_port;
  std::optional<Bytes> payload_prefix;

  bool matches(PortId port, const Bytes& payload) const;
  bool operator==(const Match&) const = default;
};

struct Hello {
  bool operator==(const Hello&) const = default;
};

struct RoleRequest {
  Role role = Role::kEqual;
  std::uint64_t generation_id = 0;
  bool operator==(const RoleRequest&) const = default;
};

struct RoleReply {
  Role role = Role::kEqual;
  std::uint64_t generation_id = 0;
  bool operator==(const RoleReply&) const = default;
};

struct SetAsyncConfig {
  bool packet_in_enabled = true;
  bool operator==(const SetAsyncConfig&) const = default;
};

enum class PacketInReason { kNoMatch, kAction };

struct PacketIn {
  EventId event;
  PacketInReason reason = PacketInReason::kNoMatch;
  PortId in_port = 0;
  Bytes payload;
  bool operator==(const PacketIn&) const = default;
};

struct PacketOut {
  std::vector<Action> actions;
  Bytes payload;
  bool operator==(const PacketOut&) const = default;
};

struct FlowMod {
  Match match;
  int priority = 0;
  std::vector<Action> actions;
  bool operator==(const FlowMod&) const = default;
};

// The only message kinds a bundle may stage.
using BundleInner = std::variant<FlowMod, PacketOut>;

struct BundleOpen {
  std::uint64_t bundle_id = 0;
  bool operator==(const BundleOpen&) const = default;
};

struct BundleAdd {
  std::uint64_t bundle_id = 0;
  BundleInner inner;
  bool operator==(const BundleAdd&) const = default;
};

struct BundleCommit {
  std::uint64_t bundle_id = 0;
  bool operator==(const BundleCommit&) const = default;
};

enum class BundleReplyKind { kOpenOk, kCommitOk };

struct BundleCtrlReply {
  std::uint64_t bundle_id = 0;
  BundleReplyKind kind = BundleReplyKind::kOpenOk;
  bool operator==(const BundleCtrlReply&) const = default;
};

enum class ErrorCode { kIsSlave, kBadBundle, kStaleGeneration };

struct ErrorMsg {
  ErrorCode code = ErrorCode::kIsSlave;
  Bytes context;
  bool operator==(const ErrorMsg&) const = default;
};

using MessageBody =
    std::variant<Hello, RoleRequest, RoleReply, SetAsyncConfig, PacketIn, PacketOut, FlowMod,
                 BundleOpen, BundleAdd, BundleCommit, BundleCtrlReply, ErrorMsg>;

// One OpenFlow message. xid is the header transaction id: chosen by the
// controller on requests, echoed by the switch on replies, 0 on async messages.
struct ControlMessage {
  MessageBody body;
  std::uint64_t xid = 0;

  template <typename T>
  bool is() const {
    return std::holds_alternative<T>(body);
  }
  template <typename T>
  const T& as() const {
    return std::get<T>(body);
  }

  bool operator==(const ControlMessage&) const = default;
};

ControlMessage to_message(const BundleInner& inner, std::uint64_t xid = 0);

// Message type name as used in traces and trace-point predicates.
std::string_view kind_name(const ControlMessage& msg);
std::string_view kind_name(const BundleInner& inner);
std::string_view to_string(PacketInReason reason);
std::string_view to_string(BundleReplyKind kind);
std::string_view to_string(ErrorCode code);

// Commit notification carried inside the bundle as a PacketOut to CONTROLLER.
struct AckPayload {
  std::uint64_t view = 0;
  std::uint64_t log_index = 0;
  SwitchId target_switch = 0;

  bool operator==(const AckPayload&) const = default;
};

inline constexpr std::uint8_t kAckMarker[4] = {0xFA, 0xCE, 0xAC, 0x4B};
// marker + u64 view + u64 index + u32 switch, big-endian.
inline constexpr std::size_t kAckPayloadSize = 4 + 8 + 8 + 4;

Bytes encode_ack(std::uint64_t view, std::uint64_t index, SwitchId sw);
std::optional<AckPayload> decode_ack(const Bytes& payload);
bool starts_with_ack_marker(const Bytes& payload);

std::string to_hex(const Bytes& bytes);
// Returns nullopt on odd length or non-hex characters.
std::optional<Bytes> from_hex(std::string_view text);

}  // namespace ftsdn
