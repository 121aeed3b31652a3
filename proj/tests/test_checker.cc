#include <gtest/gtest.h>

#include "ftsdn/checker.h"
#include "ftsdn/netsim.h"

using namespace ftsdn;

namespace {

Trace fixture(const std::string& name) {
  return load_trace(std::string(FTSDN_SOURCE_DIR) + "/tests/data/fixtures/" + name + ".jsonl");
}

const Verdict& verdict(const std::vector<Verdict>& vs, Property p) {
  return vs.at(static_cast<std::size_t>(p));
}

struct Case {
  const char* file;
  Property property;
  Anomaly anomaly;
};

const Case kViolations[] = {
    {"fail_p1_order", Property::kP1, Anomaly::kOrderDivergence},
    {"fail_p2_lost", Property::kP2, Anomaly::kLostEvent},
    {"fail_p3_duplicate", Property::kP3, Anomaly::kRepeatedEvent},
    {"fail_p4_repeated", Property::kP4, Anomaly::kRepeatedCommand},
    {"fail_p4_missing", Property::kP4, Anomaly::kMissingCommand},
    {"fail_p4_naive_replay", Property::kP4, Anomaly::kRepeatedCommand},
    {"fail_p5_divergent", Property::kP5, Anomaly::kStateDivergence},
    {"fail_p6_no_commit", Property::kP6, Anomaly::kNonAtomicBundle},
    {"fail_p6_discarded", Property::kP6, Anomaly::kNonAtomicBundle},
};

}  // namespace

TEST(CheckerFixtures, EachViolationFailsOnlyItsProperty) {
  for (const auto& c : kViolations) {
    SCOPED_TRACE(c.file);
    const auto trace = fixture(c.file);
    const auto vs = check_all(trace);
    for (auto p : kAllProperties) {
      EXPECT_EQ(verdict(vs, p).pass, p != c.property) << to_string(p);
    }
    const auto& v = verdict(vs, c.property);
    ASSERT_FALSE(v.witnesses.empty());
    for (const auto& w : v.witnesses) {
      EXPECT_TRUE(witness_holds(trace, c.property, w)) << w.description;
    }
    EXPECT_EQ(classify_anomalies(vs), std::vector<Anomaly>{c.anomaly});
    EXPECT_EQ(summary_line(vs).rfind("RESULT fail P1..P6=", 0), 0u);
  }
}

TEST(CheckerFixtures, PassingFixtures) {
  for (const char* name : {"pass_basic", "pass_discard_resend"}) {
    const auto vs = check_all(fixture(name));
    EXPECT_TRUE(all_pass(vs)) << name;
    EXPECT_TRUE(classify_anomalies(vs).empty());
    EXPECT_EQ(summary_line(vs), "RESULT pass P1..P6=++++++");
  }
}

TEST(CheckerFixtures, RepeatedCommitCounts) {
  const auto v = check_exactly_once_commands(fixture("fail_p4_repeated"));
  ASSERT_EQ(v.witnesses.size(), 1u);
  EXPECT_EQ(v.witnesses[0].observed, 2u);
  EXPECT_EQ(v.witnesses[0].expected, 1u);
  const auto m = check_exactly_once_commands(fixture("fail_p4_missing"));
  ASSERT_EQ(m.witnesses.size(), 1u);
  EXPECT_EQ(m.witnesses[0].observed, 0u);
}

TEST(CheckerWitness, TamperedWitnessesDoNotHold) {
  const auto trace = fixture("fail_p1_order");
  auto w = check_total_order(trace).witnesses.at(0);
  EXPECT_TRUE(witness_holds(trace, Property::kP1, w));
  EXPECT_FALSE(witness_holds(trace, Property::kP3, w));
  w.steps = {w.steps[0], w.steps[0]};
  EXPECT_FALSE(witness_holds(trace, Property::kP1, w));
  w.steps = {9999, 10000};
  EXPECT_FALSE(witness_holds(trace, Property::kP1, w));

  const auto pass = fixture("pass_basic");
  Witness fake{{4, 5}, "made up"};
  for (auto p : kAllProperties) EXPECT_FALSE(witness_holds(pass, p, fake)) << to_string(p);
  Witness fake_p4{{5}, "made up", 2, 1};
  EXPECT_FALSE(witness_holds(pass, Property::kP4, fake_p4));
}

TEST(CheckerEdge, EmptyTrace) {
  const Trace empty;
  EXPECT_TRUE(check_total_order(empty).pass);
  EXPECT_TRUE(check_at_most_once(empty).pass);
  EXPECT_TRUE(check_bundle_atomicity(empty).pass);
  EXPECT_THROW(check_all(empty), TraceError);
}

TEST(CheckerEdge, HeaderAndEndRequired) {
  auto trace = fixture("pass_basic");
  trace.pop_back();
  EXPECT_THROW(summarize(trace), TraceError);
  EXPECT_THROW(load_trace(std::string(FTSDN_SOURCE_DIR) + "/tests/data/fixtures/truncated.jsonl"),
               TraceError);
}

TEST(CheckerEdge, PreconditionsRecordedAsNotes) {
  auto trace = fixture("fail_p2_lost");
  trace.back().detail["quiescent"] = "false";
  const auto p2 = check_at_least_once(trace);
  EXPECT_TRUE(p2.pass);
  EXPECT_FALSE(p2.note.empty());
  // Missing commands are not judged without quiescence; repeated ones still are.
  auto missing = fixture("fail_p4_missing");
  missing.back().detail["quiescent"] = "false";
  EXPECT_TRUE(check_exactly_once_commands(missing).pass);
  auto repeated = fixture("fail_p4_repeated");
  repeated.back().detail["quiescent"] = "false";
  EXPECT_FALSE(check_exactly_once_commands(repeated).pass);
}

TEST(CheckerClassify, Mapping) {
  EXPECT_TRUE(classify_anomalies({}).empty());
  Verdict p2{Property::kP2, false, {{{1}, "x"}}, ""};
  EXPECT_EQ(classify_anomalies({p2}), std::vector<Anomaly>{Anomaly::kLostEvent});
  Verdict p4{Property::kP4, false, {{{1, 2}, "two commits", 2, 1}}, ""};
  EXPECT_EQ(classify_anomalies({p4}), std::vector<Anomaly>{Anomaly::kRepeatedCommand});
  Verdict ok{Property::kP4, true, {}, ""};
  EXPECT_TRUE(classify_anomalies({ok}).empty());
  EXPECT_EQ(verdict_signs({ok}), "++++++");
}

TEST(CheckerOnRuns, SuppressedSlaveDeliveryLosesEvent) {
  auto s = load_scenario(std::string(FTSDN_SOURCE_DIR) + "/scenarios/two_switch_mac.yaml");
  s.suppress_slave_delivery = true;
  s.faults = {FaultSpec{0, TracePoint{Direction::kRecv, "PacketIn", 1}}};
  const auto trace = run(s).trace;
  const auto v = check_at_least_once(trace);
  ASSERT_FALSE(v.pass);
  for (const auto& w : v.witnesses) EXPECT_TRUE(witness_holds(trace, Property::kP2, w));
  EXPECT_EQ(classify_anomalies({v}), std::vector<Anomaly>{Anomaly::kLostEvent});
}

TEST(CheckerOnRuns, DeterministicAndReadOnly) {
  const auto trace = run(load_scenario(std::string(FTSDN_SOURCE_DIR) + "/scenarios/two_switch_mac.yaml")).trace;
  const auto before = serialize(trace);
  const auto a = format_report(check_all(trace));
  const auto b = format_report(check_all(trace));
  EXPECT_EQ(a, b);
  EXPECT_EQ(serialize(trace), before);
}
