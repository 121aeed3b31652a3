#include "ftsdn/ofmodel.h"

#include <algorithm>
#include <charconv>

namespace ftsdn {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void put_be(Bytes& out, std::uint64_t value, int width) {
  for (int shift = (width - 1) * 8; shift >= 0; shift -= 8) {
    out.push_back(static_cast<std::uint8_t>((value >> shift) & 0xFF));
  }
}

std::uint64_t get_be(const Bytes& in, std::size_t offset, int width) {
  std::uint64_t value = 0;
  for (int i = 0; i < width; ++i) {
    value = (value << 8) | in[offset + static_cast<std::size_t>(i)];
  }
  return value;
}

}  // namespace

std::string_view to_string(Role role) {
  switch (role) {
    case Role::kMaster:
      return "MASTER";
    case Role::kSlave:
      return "SLAVE";
    case Role::kEqual:
      return "EQUAL";
  }
  return "?";
}

std::string to_string(const EventId& id) {
  return std::to_string(id.sw) + ":" + std::to_string(id.seq);
}

std::optional<EventId> parse_event_id(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) return std::nullopt;
  EventId id;
  const auto sw_part = text.substr(0, colon);
  const auto seq_part = text.substr(colon + 1);
  auto r1 = std::from_chars(sw_part.data(), sw_part.data() + sw_part.size(), id.sw);
  auto r2 = std::from_chars(seq_part.data(), seq_part.data() + seq_part.size(), id.seq);
  if (r1.ec != std::errc{} || r1.ptr != sw_part.data() + sw_part.size()) return std::nullopt;
  if (r2.ec != std::errc{} || r2.ptr != seq_part.data() + seq_part.size()) return std::nullopt;
  if (sw_part.empty() || seq_part.empty()) return std::nullopt;
  return id;
}

bool Match::matches(PortId port, const Bytes& payload) const {
  if (in_port && *in_port != port) return false;
  if (payload_prefix) {
    if (payload.size() < payload_prefix->size()) return false;
    if (!std::equal(payload_prefix->begin(), payload_prefix->end(), payload.begin())) return false;
  }
  return true;
}

ControlMessage to_message(const BundleInner& inner, std::uint64_t xid) {
  return std::visit([xid](const auto& m) { return ControlMessage{m, xid}; }, inner);
}

std::string_view kind_name(const ControlMessage& msg) {
  return std::visit(overloaded{
                        [](const Hello&) { return std::string_view("Hello"); },
                        [](const RoleRequest&) { return std::string_view("RoleRequest"); },
                        [](const RoleReply&) { return std::string_view("RoleReply"); },
                        [](const SetAsyncConfig&) { return std::string_view("SetAsyncConfig"); },
                        [](const PacketIn&) { return std::string_view("PacketIn"); },
                        [](const PacketOut&) { return std::string_view("PacketOut"); },
                        [](const FlowMod&) { return std::string_view("FlowMod"); },
                        [](const BundleOpen&) { return std::string_view("BundleOpen"); },
                        [](const BundleAdd&) { return std::string_view("BundleAdd"); },
                        [](const BundleCommit&) { return std::string_view("BundleCommit"); },
                        [](const BundleCtrlReply&) { return std::string_view("BundleCtrlReply"); },
                        [](const ErrorMsg&) { return std::string_view("ErrorMsg"); },
                    },
                    msg.body);
}

std::string_view kind_name(const BundleInner& inner) {
  return std::holds_alternative<FlowMod>(inner) ? "FlowMod" : "PacketOut";
}

std::string_view to_string(PacketInReason reason) {
  return reason == PacketInReason::kNoMatch ? "NO_MATCH" : "ACTION";
}

std::string_view to_string(BundleReplyKind kind) {
  return kind == BundleReplyKind::kOpenOk ? "OPEN_OK" : "COMMIT_OK";
}

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIsSlave:
      return "IS_SLAVE";
    case ErrorCode::kBadBundle:
      return "BAD_BUNDLE";
    case ErrorCode::kStaleGeneration:
      return "STALE_GENERATION";
  }
  return "?";
}

Bytes encode_ack(std::uint64_t view, std::uint64_t index, SwitchId sw) {
  Bytes out(std::begin(kAckMarker), std::end(kAckMarker));
  out.reserve(kAckPayloadSize);
  put_be(out, view, 8);
  put_be(out, index, 8);
  put_be(out, sw, 4);
  return out;
}

bool starts_with_ack_marker(const Bytes& payload) {
  return payload.size() >= std::size(kAckMarker) &&
         std::equal(std::begin(kAckMarker), std::end(kAckMarker), payload.begin());
}

std::optional<AckPayload> decode_ack(const Bytes& payload) {
  if (payload.size() != kAckPayloadSize || !starts_with_ack_marker(payload)) return std::nullopt;
  AckPayload ack;
  ack.view = get_be(payload, 4, 8);
  ack.log_index = get_be(payload, 12, 8);
  ack.target_switch = static_cast<SwitchId>(get_be(payload, 20, 4));
  return ack;
}

std::string to_hex(const Bytes& bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (auto b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0x0F]);
  }
  return out;
}

std::optional<Bytes> from_hex(std::string_view text) {
  if (text.size() % 2 != 0) return std::nullopt;
  Bytes out;
  out.reserve(text.size() / 2);
  for (std::size_t i = 0; i < text.size(); i += 2) {
    std::uint8_t value = 0;
    auto [ptr, ec] = std::from_chars(text.data() + i, text.data() + i + 2, value, 16);
    if (ec != std::errc{} || ptr != text.data() + i + 2) return std::nullopt;
    out.push_back(value);
  }
  return out;
}

}  // namespace ftsdn
