#include <gtest/gtest.h>

#include <random>

#include "ftsdn/app.h"

using namespace ftsdn;

namespace {

MacLearnerState mac_state() {
  MacLearnerState s;
  s.ports[1] = {1, 2, 3};
  return s;
}

}  // namespace

TEST(MacLearner, UnknownDestinationFloodsAndLearnsSource) {
  const auto r = process_event(mac_state(), 1, 1, {0x0a, 0x01});
  ASSERT_EQ(r.commands.size(), 1u);
  const auto& cmds = r.commands.at(1);
  ASSERT_EQ(cmds.size(), 2u);
  const auto& fm = std::get<FlowMod>(cmds[0]);
  EXPECT_EQ(fm.match.payload_prefix, Bytes{0x01});
  EXPECT_EQ(fm.actions, std::vector<Action>{Action::output(1)});
  const auto& po = std::get<PacketOut>(cmds[1]);
  EXPECT_EQ(po.actions, (std::vector<Action>{Action::output(2), Action::output(3)}));
  EXPECT_EQ(std::get<MacLearnerState>(r.state).table.at({1, 0x01}), 1u);
}

TEST(MacLearner, KnownDestinationInstallsForwardPath) {
  const auto first = process_event(mac_state(), 1, 1, {0x0a, 0x01});
  const auto second = process_event(first.state, 1, 2, {0x01, 0x0a});
  const auto& cmds = second.commands.at(1);
  ASSERT_EQ(cmds.size(), 2u);
  const auto& fm = std::get<FlowMod>(cmds[0]);
  EXPECT_EQ(fm.match.payload_prefix, Bytes{0x01});
  EXPECT_EQ(fm.actions, std::vector<Action>{Action::output(1)});
  EXPECT_EQ(std::get<PacketOut>(cmds[1]).actions, std::vector<Action>{Action::output(1)});
}

TEST(MacLearner, ShortPayloadIsIgnored) {
  const auto r = process_event(mac_state(), 1, 1, {0x0a});
  EXPECT_TRUE(r.commands.empty());
  EXPECT_EQ(r.state, AppState{mac_state()});
}

TEST(StaticRouter, EmptyRouteTableIsIdentity) {
  const AppState s = StaticRouterState{};
  const auto r = process_event(s, 1, 1, {0x0a, 0x01});
  EXPECT_TRUE(r.commands.empty());
  EXPECT_EQ(r.state, s);
}

TEST(StaticRouter, FirstMatchingRouteTargetsItsSwitches) {
  StaticRouterState s;
  s.routes = {{{0x0a, 0x01}, 4, {2, 3}}, {{0x0a}, 2, {}}};
  auto r = process_event(s, 1, 1, {0x0a, 0x01, 0x05});
  ASSERT_EQ(r.commands.size(), 2u);
  EXPECT_EQ(std::get<FlowMod>(r.commands.at(2)[0]).priority, 2);
  EXPECT_EQ(std::get<StaticRouterState>(r.state).routed, 1u);
  r = process_event(r.state, 1, 1, {0x0a, 0x02});
  ASSERT_EQ(r.commands.size(), 1u);
  EXPECT_EQ(std::get<FlowMod>(r.commands.at(1)[0]).actions, std::vector<Action>{Action::output(2)});
}

TEST(AppPurity, RepeatedInvocationIsIdentical) {
  std::mt19937 rng(11);
  AppState mac = mac_state();
  StaticRouterState router;
  router.routes = {{{0x01}, 2, {}}, {{0x02}, 3, {1}}};
  AppState rs = router;
  for (int i = 0; i < 200; ++i) {
    const Bytes payload = {static_cast<std::uint8_t>(rng() % 6), static_cast<std::uint8_t>(rng() % 6)};
    const PortId port = 1 + rng() % 3;
    for (AppState* s : {&mac, &rs}) {
      const auto a = process_event(*s, 1, port, payload);
      const auto b = process_event(*s, 1, port, payload);
      ASSERT_EQ(a.state, b.state);
      ASSERT_EQ(a.commands, b.commands);
      ASSERT_EQ(digest(a.state), digest(b.state));
      *s = a.state;
    }
  }
}

TEST(AppDigest, TracksState) {
  const AppState a = mac_state();
  const auto b = process_event(a, 1, 1, {0x0a, 0x01}).state;
  EXPECT_EQ(digest(a).size(), 16u);
  EXPECT_EQ(digest(a), digest(AppState{mac_state()}));
  EXPECT_NE(digest(a), digest(b));
  EXPECT_NE(digest(AppState{MacLearnerState{}}), digest(AppState{StaticRouterState{}}));
  EXPECT_EQ(app_name(a), "mac-learner");
  EXPECT_EQ(app_name(AppState{StaticRouterState{}}), "static-router");
}
