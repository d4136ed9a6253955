#include "msp_dst/common/error.hpp"
#include "msp_dst/eval/analysis.hpp"
#include "msp_dst/eval/metrics.hpp"
#include "msp_dst/eval/report.hpp"

#include <random>

#include <gtest/gtest.h>

namespace msp {
namespace {

Schema two_slot_schema() {
  std::vector<SlotDef> slots(2);
  slots[0] = {"train-day", "train", SlotKind::span, {}, {}};
  slots[1] = {"restaurant-day", "restaurant", SlotKind::span, {}, {"train-day"}};
  return Schema(slots);
}

DialogueState state(std::initializer_list<const char*> values) {
  DialogueState s(values.size());
  std::size_t i = 0;
  for (const char* v : values) s.values[i++] = SlotValue::parse(v);
  return s;
}

TEST(SlotMetrics, HandCountedExample) {
  OutcomeCounts c;
  c.tp = 2;
  c.fp = 1;
  c.fn = 1;
  c.plfp = 1;
  const auto r = finalize_slot_report("x", c);
  EXPECT_NEAR(r.precision, 0.6667, 1e-4);
  EXPECT_DOUBLE_EQ(r.recall, 0.5);
  EXPECT_NEAR(r.f1, 0.5714, 1e-4);
  EXPECT_DOUBLE_EQ(r.accuracy, 0.4);
  EXPECT_FALSE(r.precision_undefined || r.recall_undefined || r.f1_undefined);
}

TEST(SlotMetrics, AllTrueNegativesFlagUndefined) {
  OutcomeCounts c;
  c.tn = 10;
  const auto r = finalize_slot_report("x", c);
  EXPECT_DOUBLE_EQ(r.accuracy, 1.0);
  EXPECT_EQ(r.precision, 0.0);
  EXPECT_EQ(r.recall, 0.0);
  EXPECT_EQ(r.f1, 0.0);
  EXPECT_TRUE(r.precision_undefined);
  EXPECT_TRUE(r.recall_undefined);
  EXPECT_TRUE(r.f1_undefined);
  EXPECT_TRUE(finalize_slot_report("x", OutcomeCounts{}).accuracy_undefined);
}

TEST(Classify, EveryOutcome) {
  const Normalizer norm(std::map<std::string, std::string>{{"centre", "center"}});
  auto v = [](const char* s) { return SlotValue::parse(s); };
  EXPECT_EQ(classify(v("center"), v("centre"), norm), Outcome::tp);
  EXPECT_EQ(classify(v("none"), v("none"), norm), Outcome::tn);
  EXPECT_EQ(classify(v("north"), v("none"), norm), Outcome::fp);
  EXPECT_EQ(classify(v("none"), v("north"), norm), Outcome::fn);
  EXPECT_EQ(classify(v("south"), v("north"), norm), Outcome::plfp);
  EXPECT_EQ(classify(v("dontcare"), v("north"), norm), Outcome::plfp);
  EXPECT_EQ(classify(v("dontcare"), v("dontcare"), norm), Outcome::tp);
}

// Random prediction/gold tables checked against a direct recount.
TEST(SlotMetrics, MatchesBruteForceOnRandomTables) {
  const Schema schema = two_slot_schema();
  std::mt19937 rng(31);
  const std::vector<std::string> pool = {"none", "dontcare", "monday", "friday", "sunday"};
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 12);
    std::vector<DialogueState> preds, golds;
    for (int i = 0; i < n; ++i) {
      DialogueState p(2), g(2);
      for (int s = 0; s < 2; ++s) {
        p.values[static_cast<std::size_t>(s)] = SlotValue::parse(pool[rng() % pool.size()]);
        g.values[static_cast<std::size_t>(s)] = SlotValue::parse(pool[rng() % pool.size()]);
      }
      preds.push_back(p);
      golds.push_back(g);
    }
    const auto reports = slot_metrics(preds, golds, schema);
    ASSERT_EQ(reports.size(), 2u);
    int joint = 0;
    for (int i = 0; i < n; ++i) joint += preds[static_cast<std::size_t>(i)].values == golds[static_cast<std::size_t>(i)].values;
    ASSERT_DOUBLE_EQ(joint_goal_accuracy(preds, golds), static_cast<double>(joint) / n);
    for (std::size_t s = 0; s < 2; ++s) {
      long tp = 0, tn = 0, fp = 0, fn = 0, pl = 0;
      for (int i = 0; i < n; ++i) {
        const auto& p = preds[static_cast<std::size_t>(i)].values[s];
        const auto& g = golds[static_cast<std::size_t>(i)].values[s];
        if (g.is_none() && p.is_none()) ++tn;
        else if (g.is_none()) ++fp;
        else if (p.is_none()) ++fn;
        else if (p == g) ++tp;
        else ++pl;
      }
      const auto& r = reports[s];
      ASSERT_EQ(r.counts.tp, tp);
      ASSERT_EQ(r.counts.tn, tn);
      ASSERT_EQ(r.counts.fp, fp);
      ASSERT_EQ(r.counts.fn, fn);
      ASSERT_EQ(r.counts.plfp, pl);
      ASSERT_EQ(r.counts.total(), n);  // the five outcomes partition the rows
      ASSERT_DOUBLE_EQ(r.accuracy, static_cast<double>(tp + tn) / n);
      if (tp + fp) ASSERT_DOUBLE_EQ(r.precision, static_cast<double>(tp) / (tp + fp));
      if (tp + fn + pl) ASSERT_DOUBLE_EQ(r.recall, static_cast<double>(tp) / (tp + fn + pl));
      ASSERT_GE(r.f1, 0.0);
      ASSERT_LE(r.f1, 1.0);
    }
  }
}

TEST(Jga, Examples) {
  const std::vector<DialogueState> g{state({"monday", "none"}), state({"monday", "friday"})};
  EXPECT_DOUBLE_EQ(joint_goal_accuracy(g, g), 1.0);
  const std::vector<DialogueState> half{state({"monday", "none"}), state({"monday", "none"})};
  EXPECT_DOUBLE_EQ(joint_goal_accuracy(half, g), 0.5);
  EXPECT_DOUBLE_EQ(joint_goal_accuracy({}, {}), 0.0);
  EXPECT_THROW(joint_goal_accuracy(half, {g[0]}), DimensionError);
  const Normalizer norm(std::map<std::string, std::string>{{"wed", "wednesday"}});
  EXPECT_DOUBLE_EQ(joint_goal_accuracy({state({"wed", "none"})}, {state({"wednesday", "none"})}, norm), 1.0);
}

TEST(Jga, PerDomainOnlyCountsActiveTurns) {
  const Schema schema = two_slot_schema();
  const std::vector<DialogueState> g{state({"monday", "none"}), state({"monday", "friday"}),
                                     state({"none", "none"})};
  const std::vector<DialogueState> p{state({"monday", "none"}), state({"sunday", "friday"}),
                                     state({"none", "none"})};
  const auto d = domain_jga(p, g, schema);
  ASSERT_EQ(d.count("train"), 1u);
  EXPECT_DOUBLE_EQ(d.at("train"), 0.5);
  EXPECT_DOUBLE_EQ(d.at("restaurant"), 1.0);
  const auto none = domain_jga({g[2]}, {g[2]}, schema);
  EXPECT_TRUE(none.empty());
}

TraceRecord rec(const char* slot, int turn, const char* value, Disposition disp, HitType type = HitType::hit,
                const char* source = "") {
  TraceRecord r;
  r.dialogue_id = "d";
  r.turn = turn;
  r.slot = slot;
  r.value = SlotValue::parse(value);
  r.disposition = disp;
  r.hit_type = type;
  r.mention_source = source;
  if (type == HitType::mentioned) r.mention_index = 0;
  return r;
}

// Four turns: a wrong first extraction, its inheritance, a successful
// revision, and a missed indirect mention.
struct ScriptedCase {
  Schema schema = two_slot_schema();
  Dialogue gold;
  TrackResult track;
  std::vector<PhenomenonEvent> events;

  ScriptedCase() {
    gold.id = "d";
    const std::vector<DialogueState> g{state({"monday", "none"}), state({"monday", "none"}),
                                       state({"monday", "monday"}), state({"friday", "monday"})};
    for (const auto& s : g) {
      Turn t;
      t.gold = s;
      gold.turns.push_back(t);
    }
    track.dialogue_id = "d";
    track.trace = {
        rec("train-day", 1, "friday", Disposition::extracted),
        rec("restaurant-day", 1, "none", Disposition::none, HitType::none),
        rec("train-day", 2, "friday", Disposition::inherited, HitType::mentioned, "train-day"),
        rec("restaurant-day", 2, "none", Disposition::none, HitType::none),
        rec("train-day", 3, "monday", Disposition::revised),
        rec("restaurant-day", 3, "none", Disposition::none, HitType::none),
        rec("train-day", 4, "friday", Disposition::revised),
        rec("restaurant-day", 4, "monday", Disposition::inherited, HitType::mentioned, "restaurant-day"),
    };
    for (int t = 0; t < 4; ++t) {
      DialogueState s(2);
      s.values[0] = track.trace[static_cast<std::size_t>(2 * t)].value;
      s.values[1] = track.trace[static_cast<std::size_t>(2 * t + 1)].value;
      track.states.push_back(s);
    }
    events.push_back({"d", 3, "restaurant-day", EventKind::indirect, "train-day"});
  }
};

TEST(InheritAnalysis, ScriptedFourTurnDialogue) {
  ScriptedCase c;
  const auto k = inherit_analysis({c.track}, {c.gold}, c.events, c.schema);
  EXPECT_EQ(k.error_count, 3);
  EXPECT_EQ(k.inherit_error, 2);
  EXPECT_EQ(k.revision_success, 1);
  EXPECT_EQ(k.indirect_total, 1);
  EXPECT_EQ(k.indirect_tracked, 0);
}

TEST(InheritAnalysis, IndirectTrackedWhenTheSourceEntryIsSelected) {
  ScriptedCase c;
  c.track.trace[5] = rec("restaurant-day", 3, "monday", Disposition::inherited, HitType::mentioned, "train-day");
  const auto k = inherit_analysis({c.track}, {c.gold}, c.events, c.schema);
  EXPECT_EQ(k.indirect_tracked, 1);
  EXPECT_EQ(k.error_count, 2);
}

TEST(InheritAnalysis, MisalignedTraceThrows) {
  ScriptedCase c;
  c.track.trace.pop_back();
  EXPECT_THROW(inherit_analysis({c.track}, {c.gold}, c.events, c.schema), DimensionError);
  ScriptedCase swapped;
  std::swap(swapped.track.trace[0], swapped.track.trace[1]);
  EXPECT_THROW(inherit_analysis({swapped.track}, {swapped.gold}, swapped.events, swapped.schema), DimensionError);
}

TEST(Report, JsonCarriesEverySection) {
  ScriptedCase c;
  const auto r = build_report({c.track}, {c.gold}, c.schema, Strategy::msp, &c.events);
  const auto j = r.to_json();
  EXPECT_EQ(j["strategy"], "msp");
  EXPECT_EQ(j["turns"], 4);
  EXPECT_DOUBLE_EQ(j["jga"].get<double>(), 0.25);
  EXPECT_EQ(j["slots"].size(), 2u);
  EXPECT_EQ(j["inherit"]["revision_success"], 1);
  EXPECT_NE(r.render_text().find("restaurant-day"), std::string::npos);
  EXPECT_TRUE(build_report({c.track}, {c.gold}, c.schema, Strategy::msp).to_json()["inherit"].is_null());
}

TEST(Compare, MediansAndOrdering) {
  EXPECT_DOUBLE_EQ(median({3, 1, 2}), 2.0);
  EXPECT_DOUBLE_EQ(median({4, 1, 2, 3}), 2.5);
  const auto t = compare_strategies({{Strategy::msp, 2, 0.6},
                                     {Strategy::pure_context, 1, 0.3},
                                     {Strategy::msp, 1, 0.5},
                                     {Strategy::msp, 3, 0.9}});
  ASSERT_EQ(t.summary.size(), 2u);
  EXPECT_EQ(t.summary[0].strategy, Strategy::pure_context);
  EXPECT_DOUBLE_EQ(t.find(Strategy::msp)->median, 0.6);
  EXPECT_EQ(t.find(Strategy::full_state), nullptr);
  EXPECT_EQ(t.find(Strategy::msp)->jgas, (std::vector<double>{0.5, 0.6, 0.9}));
  EXPECT_DOUBLE_EQ(t.to_json()["median_jga"]["msp"].get<double>(), 0.6);
}

TEST(Compare, IdenticalRunsGiveIdenticalMedians) {
  std::vector<RunScore> runs;
  for (Strategy s : {Strategy::msp, Strategy::changed_state}) {
    for (std::uint64_t seed : {1, 2, 3}) runs.push_back({s, seed, 0.42});
  }
  const auto t = compare_strategies(runs);
  EXPECT_EQ(t.find(Strategy::msp)->median, t.find(Strategy::changed_state)->median);
}

}  // namespace
}  // namespace msp
