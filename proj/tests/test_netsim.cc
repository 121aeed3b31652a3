#include <gtest/gtest.h>

#include "ftsdn/checker.h"
#include "ftsdn/netsim.h"

using namespace ftsdn;

namespace {

Scenario load(const std::string& name) {
  return load_scenario(std::string(FTSDN_SOURCE_DIR) + "/scenarios/" + name + ".yaml");
}

std::size_t count(const Trace& t, RecordKind kind, const std::string& actor = "") {
  std::size_t n = 0;
  for (const auto& r : t) {
    if (r.kind == kind && (actor.empty() || r.actor == actor)) ++n;
  }
  return n;
}

std::size_t count_msg(const Trace& t, RecordKind kind, const std::string& type) {
  std::size_t n = 0;
  for (const auto& r : t) {
    if (r.kind == kind && !r.msg.is_null() && r.msg.value("type", "") == type) ++n;
  }
  return n;
}

}  // namespace

TEST(NetsimRun, ZeroWorkloadIsSetupOnly) {
  auto s = load("two_switch_mac");
  s.workload.clear();
  const auto r = run(s);
  EXPECT_TRUE(r.quiescent);
  EXPECT_EQ(count(r.trace, RecordKind::kApply), 0u);
  EXPECT_EQ(r.metrics.total_deliveries, 0u);
  EXPECT_TRUE(all_pass(check_all(r.trace)));
  // Setup: per switch, 3 role requests + 3 replies + 2 async configs.
  EXPECT_EQ(r.metrics.setup_deliveries, 2u * (3 + 3 + 2));
}

TEST(NetsimRun, SameSeedSameBytes) {
  for (const char* name : {"two_switch_mac", "two_switch_mac_paper_b", "majority_loss"}) {
    auto s = load(name);
    s.jitter = 3;
    EXPECT_EQ(serialize(run(s).trace), serialize(run(s).trace)) << name;
  }
}

TEST(NetsimRun, JitterDependsOnSeedButKeepsFifo) {
  auto s = load("two_switch_mac");
  s.jitter = 4;
  const auto a = run(s);
  s.seed += 1;
  const auto b = run(s);
  EXPECT_NE(serialize(a.trace), serialize(b.trace));
  for (const auto* r : {&a, &b}) {
    EXPECT_EQ(check_fifo(r->trace), "");
    EXPECT_EQ(check_fence(r->trace), "");
    EXPECT_TRUE(all_pass(check_all(r->trace)));
  }
}

TEST(NetsimRun, SerializationIsCanonical) {
  const auto r = run(load("two_switch_mac"));
  const auto text = serialize(r.trace);
  EXPECT_EQ(serialize(parse_trace(text)), text);
}

TEST(NetsimRun, CrashFreeLogsIdentical) {
  const auto r = run(load("two_switch_mac"));
  std::map<std::string, std::vector<std::string>> applied;
  for (const auto& rec : r.trace) {
    if (rec.kind == RecordKind::kApply) applied[rec.actor].push_back(rec.get("index") + "/" + rec.get("event"));
  }
  ASSERT_EQ(applied.size(), 3u);
  EXPECT_EQ(applied["c0"], applied["c1"]);
  EXPECT_EQ(applied["c0"], applied["c2"]);
}

TEST(NetsimMetrics, RecomputedFromTraceEqualsLive) {
  for (const char* name : {"two_switch_mac", "two_switch_mac_naive", "majority_loss", "single_event_router"}) {
    const auto r = run(load(name));
    EXPECT_EQ(metrics_from_trace(r.trace), r.metrics) << name;
    std::uint64_t by_kind = 0;
    for (const auto& [k, n] : r.metrics.deliveries_by_kind) by_kind += n;
    EXPECT_EQ(by_kind, r.metrics.total_deliveries);
  }
}

TEST(NetsimMetrics, SingleEventHandFormula) {
  const std::uint64_t n = 3, k = 1;
  const std::uint64_t fan_out = n, replication = 3 * (n - 1), bundle = k + 3, replies = 2, acks = n;
  const auto r = run(load("single_event_router"));
  EXPECT_EQ(r.metrics.events, 1u);
  EXPECT_EQ(r.metrics.total_deliveries, fan_out + replication + bundle + replies + acks);
  EXPECT_EQ(r.metrics.total_deliveries, 18u);

  auto naive = load("single_event_router");
  naive.variant = Variant::kNaive;
  // Event to the master only, replication, and the bare command.
  const auto rn = run(naive);
  EXPECT_EQ(rn.metrics.total_deliveries, 1 + replication + k);
  EXPECT_LT(rn.metrics.total_deliveries, r.metrics.total_deliveries);
}

TEST(NetsimCrash, FollowerCrashNoViewChange) {
  auto s = load("two_switch_mac");
  s.faults = {FaultSpec{2, AtTime{4}}};
  const auto r = run(s);
  EXPECT_EQ(count(r.trace, RecordKind::kCrash), 1u);
  EXPECT_EQ(count_msg(r.trace, RecordKind::kSend, "ViewChange"), 0u);
  EXPECT_EQ(count(r.trace, RecordKind::kDetect), 2u);
  EXPECT_TRUE(all_pass(check_all(r.trace)));
}

TEST(NetsimCrash, LeaderCrashMidBundleDiscardsStaging) {
  auto s = load("two_switch_mac");
  s.faults = {FaultSpec{0, TracePoint{Direction::kDelivered, "BundleAdd", 1}}};
  const auto r = run(s);
  bool discarded = false;
  for (const auto& rec : r.trace) {
    if (rec.kind == RecordKind::kDrop && rec.actor[0] == 's' && rec.has("discarded_bundles")) {
      discarded = true;
      EXPECT_EQ(rec.peer, "c0");
    }
  }
  EXPECT_TRUE(discarded);
  EXPECT_EQ(check_fifo(r.trace), "");
  EXPECT_EQ(check_fence(r.trace), "");
  EXPECT_TRUE(all_pass(check_all(r.trace)));
}

TEST(NetsimCrash, MajorityLossStalls) {
  const auto r = run(load("majority_loss"));
  EXPECT_GE(count(r.trace, RecordKind::kStall), 1u);
  const auto v = check_all(r.trace);
  for (auto p : {Property::kP1, Property::kP3, Property::kP4, Property::kP6}) {
    EXPECT_TRUE(v[static_cast<int>(p)].pass) << to_string(p);
  }
}

TEST(NetsimCrash, NaiveCrashAfterCommandsRepeatsThem) {
  // The master executes index 1's commands and dies before anyone sees them.
  auto s = load("two_switch_mac_naive");
  s.faults = {FaultSpec{0, TracePoint{Direction::kDelivered, "PacketOut", 1}}};
  const auto r = run(s);
  const auto v = check_exactly_once_commands(r.trace);
  EXPECT_FALSE(v.pass);
  const auto anomalies = classify_anomalies({v});
  EXPECT_EQ(anomalies, std::vector<Anomaly>{Anomaly::kRepeatedCommand});
}

TEST(NetsimCrash, QuiesceLimitReported) {
  auto s = load("two_switch_mac");
  s.quiesce_limit = 40;
  const auto r = run(s);
  EXPECT_FALSE(r.quiescent);
  EXPECT_EQ(r.trace.back().get("quiescent"), "false");
  EXPECT_TRUE(check_at_least_once(r.trace).pass);
  EXPECT_FALSE(check_at_least_once(r.trace).note.empty());
}

TEST(NetsimEnumerate, OnePointPerTargetRecord) {
  const auto s = load("two_switch_mac");
  const auto r = run(s);
  std::size_t expected = 0;
  for (const auto& rec : r.trace) {
    if ((rec.kind == RecordKind::kSend && rec.actor == "c0") ||
        (rec.kind == RecordKind::kDeliver && (rec.actor == "c0" || rec.peer == "c0"))) {
      ++expected;
    }
  }
  const auto points = enumerate_crash_points(s, 0);
  EXPECT_EQ(points.size(), expected);
  std::set<std::string> names;
  for (const auto& p : points) names.insert(p.scenario.name);
  EXPECT_EQ(names.size(), points.size());

  auto with_tp = s;
  with_tp.faults = {FaultSpec{0, TracePoint{}}};
  EXPECT_THROW(enumerate_crash_points(with_tp, 0), ScenarioError);
  EXPECT_THROW(enumerate_crash_points(s, 3), ScenarioError);
}

TEST(NetsimEnumerate, EveryDerivedTraceKeepsFifoAndFence) {
  for (const char* name : {"two_switch_mac", "two_switch_mac_paper_b", "two_switch_mac_naive"}) {
    for (ControllerId target : {0u, 1u}) {
      for (const auto& d : enumerate_crash_points(load(name), target)) {
        const auto r = run(d.scenario);
        ASSERT_EQ(count(r.trace, RecordKind::kCrash), 1u) << d.scenario.name;
        ASSERT_EQ(check_fifo(r.trace), "") << d.scenario.name;
        ASSERT_EQ(check_fence(r.trace), "") << d.scenario.name;
      }
    }
  }
}

TEST(NetsimChecks, FifoViolationDetected) {
  auto trace = run(load("single_event_router")).trace;
  // Swap two deliveries on the same channel.
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (trace[i].kind == RecordKind::kDeliver && trace[i].actor == "s1" && trace[i].peer == "c0") idx.push_back(i);
  }
  ASSERT_GE(idx.size(), 2u);
  std::swap(trace[idx[idx.size() - 2]].msg, trace[idx.back()].msg);
  EXPECT_NE(check_fifo(trace), "");
}
