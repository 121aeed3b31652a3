#include <gtest/gtest.h>

#include <random>

#include "ftsdn/ofmodel.h"

using namespace ftsdn;

namespace {

// Independent big-endian reader used as the decoding oracle.
std::uint64_t read_be(const Bytes& b, std::size_t at, std::size_t width) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < width; ++i) v = (v << 8) | b[at + i];
  return v;
}

}  // namespace

TEST(AckPayload, ZeroTripleIsMarkerThenZeros) {
  const auto b = encode_ack(0, 0, 0);
  Bytes expected = {0xFA, 0xCE, 0xAC, 0x4B};
  expected.resize(24, 0);
  EXPECT_EQ(b, expected);
}

TEST(AckPayload, RandomRoundTrip) {
  std::mt19937_64 rng(20240601);
  for (int i = 0; i < 100; ++i) {
    const std::uint64_t view = rng();
    const std::uint64_t index = rng();
    const auto sw = static_cast<SwitchId>(rng());
    const auto b = encode_ack(view, index, sw);
    ASSERT_EQ(b.size(), 24u);
    EXPECT_EQ(read_be(b, 0, 4), 0xFACEAC4Bu);
    EXPECT_EQ(read_be(b, 4, 8), view);
    EXPECT_EQ(read_be(b, 12, 8), index);
    EXPECT_EQ(read_be(b, 20, 4), sw);
    const auto ack = decode_ack(b);
    ASSERT_TRUE(ack);
    EXPECT_EQ(*ack, (AckPayload{view, index, sw}));
  }
}

TEST(AckPayload, KnownTriple) {
  const auto ack = decode_ack(encode_ack(3, 7, 1));
  ASSERT_TRUE(ack);
  EXPECT_EQ(*ack, (AckPayload{3, 7, 1}));
}

TEST(AckPayload, NotAnAck) {
  EXPECT_FALSE(decode_ack({}));
  EXPECT_FALSE(decode_ack({0x02, 0x01}));
  auto truncated = encode_ack(1, 2, 3);
  truncated.pop_back();
  EXPECT_FALSE(decode_ack(truncated));
  auto longer = encode_ack(1, 2, 3);
  longer.push_back(0);
  EXPECT_FALSE(decode_ack(longer));
  auto bad_marker = encode_ack(1, 2, 3);
  bad_marker[0] ^= 1;
  EXPECT_FALSE(decode_ack(bad_marker));
  EXPECT_TRUE(starts_with_ack_marker(truncated));
}

TEST(Hex, RoundTripAndRejects) {
  const Bytes b = {0x00, 0x0a, 0xff};
  EXPECT_EQ(to_hex(b), "000aff");
  EXPECT_EQ(from_hex("000aff"), b);
  EXPECT_EQ(from_hex("000AFF"), b);
  EXPECT_FALSE(from_hex("abc"));
  EXPECT_FALSE(from_hex("zz"));
}

TEST(EventIdText, RoundTrip) {
  const EventId e{4, 19};
  EXPECT_EQ(to_string(e), "4:19");
  EXPECT_EQ(parse_event_id("4:19"), e);
  EXPECT_FALSE(parse_event_id("4:"));
  EXPECT_FALSE(parse_event_id("x:1"));
}

TEST(MatchSemantics, EmptyMatchesEverything) {
  EXPECT_TRUE(Match{}.matches(7, {0x01}));
  Match m{std::nullopt, Bytes{0x0a}};
  EXPECT_TRUE(m.matches(1, {0x0a, 0x01}));
  EXPECT_FALSE(m.matches(1, {0x01, 0x0a}));
  EXPECT_FALSE(m.matches(1, {}));
  Match p{2, std::nullopt};
  EXPECT_TRUE(p.matches(2, {}));
  EXPECT_FALSE(p.matches(3, {}));
}

TEST(ControlMessageEquality, Structural) {
  const ControlMessage a{FlowMod{Match{1, Bytes{0x0a}}, 5, {Action::output(2)}}, 9};
  const ControlMessage b{FlowMod{Match{1, Bytes{0x0a}}, 5, {Action::output(2)}}, 9};
  EXPECT_EQ(a, b);
  ControlMessage c = b;
  c.xid = 10;
  EXPECT_NE(a, c);
  EXPECT_EQ(kind_name(a), "FlowMod");
  EXPECT_EQ(kind_name(to_message(PacketOut{})), "PacketOut");
}
