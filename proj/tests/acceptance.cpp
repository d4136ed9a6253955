// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.
#include "cli.hpp"

#include "msp_dst/corpus/generator.hpp"
#include "msp_dst/eval/report.hpp"
#include "msp_dst/msp/pool.hpp"
#include "msp_dst/training/grad_check.hpp"
#include "msp_dst/training/loss.hpp"
#include "msp_dst/training/trainer.hpp"

#include "test_support.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

namespace msp {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Verdict {
  bool pass = false;
  std::string detail;
};

// --- 1: gradients -----------------------------------------------------------

Verdict gradients() {
  const auto t0 = Clock::now();
  double worst = 0;
  std::string where;
  for (Strategy s : {Strategy::msp, Strategy::changed_state, Strategy::full_state, Strategy::pure_context}) {
    auto setup = micro_setup(7, s);
    const auto r = grad_check(setup.model, setup.batch, {}, 1e-4, 100, 3);
    if (r.max_rel_error >= worst) worst = r.max_rel_error, where = to_string(s) + " " + r.worst;
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-5 && secs < 60, fmt::format("max relative error {:.2e} at {} in {:.1f}s", worst, where, secs)};
}

// --- 2: analytic losses -----------------------------------------------------

Verdict analytic_losses() {
  auto setup = micro_setup(7, Strategy::msp, true);
  double worst = 0;
  int type_examples = 0, cat_examples = 0;
  for (const auto& turn : setup.batch) {
    for (std::size_t k = 0; k < turn.examples.size(); ++k) {
      LabeledTurn one = turn;
      one.examples = {turn.examples[k]};
      const LossParts parts = setup.model.turn_loss(one, {}, false);
      worst = std::max(worst, std::abs(parts.type - std::log(4.0)));
      ++type_examples;
      const auto& ex = turn.examples[k];
      if (ex.type == HitType::hit && ex.categorical_label) {
        const double v = static_cast<double>(setup.schema.slot(static_cast<std::size_t>(ex.slot)).ontology.size());
        worst = std::max(worst, std::abs(parts.hit - std::log(v)));
        ++cat_examples;
      }
    }
  }
  const double j = joint_loss(std::log(4.0), 0, std::log(2.0));
  worst = std::max(worst, std::abs(j - 0.970406) > 1e-6 ? 1.0 : 0.0);
  return {worst < 1e-6 && cat_examples > 0,
          fmt::format("{} type and {} categorical examples, max deviation {:.1e}", type_examples, cat_examples, worst)};
}

// --- 3: metric tables -------------------------------------------------------

Verdict metric_tables() {
  std::vector<SlotDef> defs;
  for (const char* n : {"train-day", "train-people", "restaurant-day", "restaurant-area", "restaurant-name"}) {
    defs.push_back({n, std::string(n).substr(0, std::string(n).find('-')), SlotKind::span, {}, {}});
  }
  const Schema schema(defs);
  const std::size_t S = defs.size();
  std::mt19937 rng(31);
  const std::vector<std::string> pool = {"none", "dontcare", "monday", "friday", "north"};
  int bad = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 10);
    std::vector<DialogueState> preds, golds;
    for (int i = 0; i < n; ++i) {
      DialogueState p(S), g(S);
      for (std::size_t s = 0; s < S; ++s) {
        p.values[s] = SlotValue::parse(pool[rng() % pool.size()]);
        g.values[s] = SlotValue::parse(pool[rng() % pool.size()]);
      }
      preds.push_back(p);
      golds.push_back(g);
    }
    int joint = 0;
    for (int i = 0; i < n; ++i) joint += preds[static_cast<std::size_t>(i)].values == golds[static_cast<std::size_t>(i)].values;
    bool ok = joint_goal_accuracy(preds, golds) == static_cast<double>(joint) / n;
    const auto reports = slot_metrics(preds, golds, schema);
    long cells = 0;
    for (std::size_t s = 0; s < S; ++s) {
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
      const double prec = tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
      const double rec = tp + fn + pl ? static_cast<double>(tp) / static_cast<double>(tp + fn + pl) : 0.0;
      const double f1 = prec + rec > 0 ? 2.0 * prec * rec / (prec + rec) : 0.0;
      const auto& r = reports[s];
      cells += r.counts.total();
      ok = ok && r.counts.tp == tp && r.counts.tn == tn && r.counts.fp == fp && r.counts.fn == fn &&
           r.counts.plfp == pl && r.accuracy == static_cast<double>(tp + tn) / n && r.precision == prec &&
           r.recall == rec && r.f1 == f1;
    }
    ok = ok && cells == static_cast<long>(n) * static_cast<long>(S);
    bad += !ok;
  }
  return {bad == 0, fmt::format("{} of 1000 tables (5 slots, up to 10 turns) disagree with the recount", bad)};
}

// --- 4: pool rules ----------------------------------------------------------

Verdict pool_rules() {
  std::vector<SlotDef> defs(4);
  defs[0] = {"restaurant-day", "restaurant", SlotKind::span, {}, {"train-day", "hotel-day", "taxi-day"}};
  defs[1] = {"train-day", "train", SlotKind::span, {}, {}};
  defs[2] = {"hotel-day", "hotel", SlotKind::span, {}, {}};
  defs[3] = {"taxi-day", "taxi", SlotKind::span, {}, {}};
  const Schema schema(defs);
  std::mt19937 rng(17);
  const std::vector<std::string> values = {"none", "dontcare", "monday", "friday"};
  int bad = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    DialogueState prev(4);
    for (std::size_t s = 0; s < 4; ++s) {
      prev.values[s] = SlotValue::parse(values[rng() % values.size()]);
      prev.last_updated[s] = prev.values[s].is_none() ? 0 : 1 + static_cast<int>(rng() % 6);
    }
    // a capacity below the candidate count exercises eviction too
    const int K = trial % 2 ? 4 : 2;
    const SlotPool pool = build_slot_pool(0, prev, schema, K);
    std::vector<PoolEntry> cands;
    for (std::size_t s = 0; s < 4; ++s) {
      if (prev.values[s].is_concrete()) cands.push_back({static_cast<int>(s), prev.values[s], prev.last_updated[s]});
    }
    const auto expect = keep_latest(cands, K);
    bool ok = pool.capacity() == K && static_cast<int>(pool.mask.size()) == K &&
              pool.real_count() == static_cast<int>(expect.size());
    for (int i = 0; ok && i < K; ++i) {
      const auto& e = pool.entries[static_cast<std::size_t>(i)];
      ok = pool.mask[static_cast<std::size_t>(i)] == (i < pool.real_count());
      if (ok && i < pool.real_count()) {
        ok = e.value.is_concrete() && e.source_slot == expect[static_cast<std::size_t>(i)].source_slot;
      }
    }
    // nothing evicted is newer than what was kept
    int min_kept = 1 << 30;
    for (const auto& e : expect) min_kept = std::min(min_kept, e.updated_turn);
    for (const auto& c : cands) {
      const bool kept = std::any_of(expect.begin(), expect.end(),
                                    [&](const PoolEntry& k) { return k.source_slot == c.source_slot; });
      ok = ok && (kept || c.updated_turn <= min_kept);
    }
    bad += !ok;
  }
  SlotPool empty = build_slot_pool(0, DialogueState(4), schema);
  SlotDecision d;
  d.type = HitType::mentioned;
  d.mention_index = 0;
  std::vector<Utterance> ctx{{Speaker::user, 1, {"a", "table", "on", "monday"}}};
  const auto u = update_slot(Strategy::msp, schema.slot(0), SlotValue::none(), d, &empty, tokenize_context(ctx, 32),
                             schema.normalizer());
  const bool empty_ok = u.value.is_none() && u.disposition == Disposition::none;
  return {bad == 0 && empty_ok,
          fmt::format("{} of 10000 pools break the rules; empty-pool mention gives none: {}", bad, empty_ok)};
}

// --- 5: oracle --------------------------------------------------------------

double oracle_jga(const GeneratedCorpus& c, Strategy s) {
  LabelOptions lo;
  lo.strategy = s;
  OraclePredictor oracle(c.schema, lo);
  TrackOptions opts;
  opts.strategy = s;
  return build_report(track_corpus(oracle, c.test, c.schema, opts), c.test, c.schema, s).jga;
}

Verdict oracle(const GeneratedCorpus& c) {
  const double jga = oracle_jga(c, Strategy::msp);
  return {jga == 1.0, fmt::format("oracle msp JGA {:.4f} on {} test dialogues", jga, c.test.size())};
}

// --- 6-8: the comparison matrix --------------------------------------------

struct MatrixRun {
  Strategy strategy;
  std::uint64_t seed;
  double jga = 0;
  InheritCounters clean, noisy;
};

constexpr double kNoiseRate = 0.3;
constexpr std::uint64_t kNoiseSeed = 11;

std::vector<MatrixRun> run_matrix(const GeneratedCorpus& c, double* secs) {
  const auto t0 = Clock::now();
  std::vector<MatrixRun> runs;
  const auto alternatives = noise_alternatives(c.schema, c.test);
  for (Strategy s : {Strategy::pure_context, Strategy::changed_state, Strategy::full_state, Strategy::msp}) {
    for (std::uint64_t seed : {1, 2, 3}) {
      TrainConfig cfg = TrainConfig::preset("toy");
      cfg.model.strategy = s;
      cfg.seed = seed;
      const auto r = train_model(cfg, c.schema, c.train, c.dev);
      ModelPredictor p(r.model);
      TrackOptions opts;
      opts.strategy = s;
      const auto clean = build_report(track_corpus(p, c.test, c.schema, opts), c.test, c.schema, s, &c.events);
      opts.noise.rate = kNoiseRate;
      opts.noise.seed = kNoiseSeed;
      opts.noise.alternatives = alternatives;
      const auto noisy = build_report(track_corpus(p, c.test, c.schema, opts), c.test, c.schema, s, &c.events);
      runs.push_back({s, seed, clean.jga, *clean.inherit, *noisy.inherit});
      std::cout << fmt::format("  trained {} seed {}: test JGA {:.4f}, best epoch {}, {:.0f}s elapsed\n", to_string(s),
                               seed, clean.jga, r.best_epoch, seconds_since(t0))
                << std::flush;
    }
  }
  *secs = seconds_since(t0);
  return runs;
}

Verdict strategy_ordering(const std::vector<MatrixRun>& runs, double secs) {
  std::vector<RunScore> scores;
  for (const auto& r : runs) scores.push_back({r.strategy, r.seed, r.jga});
  const auto table = compare_strategies(scores);
  const double msp = table.find(Strategy::msp)->median;
  const double cs = table.find(Strategy::changed_state)->median;
  const double pc = table.find(Strategy::pure_context)->median;
  const double fs = table.find(Strategy::full_state)->median;
  const bool ok = msp >= cs && cs >= pc && msp - pc >= 0.02 && secs < 1800;
  return {ok, fmt::format("median JGA msp {:.4f}, changed_state {:.4f}, full_state {:.4f}, pure_context {:.4f}; "
                          "{:.0f}s for 12 runs",
                          msp, cs, fs, pc, secs)};
}

Verdict indirect_tracking(const std::vector<MatrixRun>& runs) {
  std::vector<double> ratios;
  std::string each;
  for (const auto& r : runs) {
    if (r.strategy != Strategy::msp) continue;
    const double ratio = r.clean.indirect_total ? static_cast<double>(r.clean.indirect_tracked) / r.clean.indirect_total : 0.0;
    ratios.push_back(ratio);
    each += fmt::format(" {}/{}", r.clean.indirect_tracked, r.clean.indirect_total);
  }
  const double m = median(ratios);
  return {m >= 0.9, fmt::format("median indirect tracked {:.3f} (per seed:{})", m, each)};
}

Verdict revision(const std::vector<MatrixRun>& runs) {
  long msp = 0, cs = 0;
  for (const auto& r : runs) {
    if (r.strategy == Strategy::msp) msp += r.noisy.revision_success;
    if (r.strategy == Strategy::changed_state) cs += r.noisy.revision_success;
  }
  const bool ok = msp > cs && static_cast<double>(msp) >= 1.05 * static_cast<double>(cs);
  return {ok, fmt::format("revision successes over 3 seeds at noise rate {}: msp {}, changed_state {}", kNoiseRate,
                          msp, cs)};
}

// --- 9: reproducibility -----------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

int cli(std::vector<std::string> args) {
  std::istringstream in;
  std::ostringstream out, err;
  const int code = cli::run_cli(args, in, out, err);
  if (code != 0) std::cerr << err.str();
  return code;
}

bool pipeline(const fs::path& dir) {
  const auto c = (dir / "corpus").string();
  const auto m = (dir / "model").string();
  const auto e = (dir / "eval").string();
  return cli({"gen-data", "--out", c, "--dialogues", "60", "--seed", "5"}) == 0 &&
         cli({"train", "--schema", c + "/schema.json", "--train", c + "/train.jsonl", "--dev", c + "/dev.jsonl",
              "--out", m, "--dim", "16", "--heads", "2", "--layers", "1", "--ffn", "32", "--max_len", "64",
              "--epochs", "2", "--seed", "3"}) == 0 &&
         cli({"eval", "--checkpoint", m + "/checkpoint.json", "--test", c + "/test.jsonl", "--events",
              c + "/events.jsonl", "--out", e}) == 0;
}

Verdict reproducibility() {
  const auto a = test::temp_dir("acceptance_repro_a");
  const auto b = test::temp_dir("acceptance_repro_b");
  if (!pipeline(a) || !pipeline(b)) return {false, "pipeline failed"};
  std::vector<std::string> differ;
  const std::vector<fs::path> files = {"corpus/train.jsonl", "corpus/dev.jsonl",    "corpus/test.jsonl",
                                       "corpus/events.jsonl", "model/history.jsonl", "model/checkpoint.json",
                                       "eval/report.json",    "eval/trace.jsonl"};
  for (const auto& f : files) {
    const auto x = slurp(a / f);
    if (x.empty() || x != slurp(b / f)) differ.push_back(f.string());
  }
  std::string list;
  for (const auto& d : differ) list += " " + d;
  return {differ.empty(), differ.empty() ? fmt::format("{} artifacts byte-identical across two runs", files.size())
                                         : "differ:" + list};
}

// --- 10: MultiWOZ-format fixture --------------------------------------------

using Expected = std::map<std::string, std::string>;

// Every slot outside `expected` must be none.
bool states_match(const Dialogue& d, const Schema& schema, const std::vector<Expected>& expected) {
  if (d.turns.size() != expected.size()) return false;
  for (std::size_t t = 0; t < expected.size(); ++t) {
    for (std::size_t s = 0; s < schema.size(); ++s) {
      const auto it = expected[t].find(schema.slot(s).name);
      const std::string want = it == expected[t].end() ? "none" : it->second;
      if (d.turns[t].gold.values[s].str() != want) return false;
    }
  }
  return true;
}

Verdict fixture() {
  const Schema schema = parse_schema(test::data_path("multiwoz_mini_schema.json"));
  const auto dialogues = parse_dialogues(test::data_path("multiwoz_mini_dialogues.jsonl"), schema);
  bool ok = schema.size() == 30 && dialogues.size() == 3 &&
            schema.domains() == std::vector<std::string>{"attraction", "hotel", "restaurant", "taxi", "train"};
  auto relevant = [&](const char* slot) { return schema.slot(schema.index_of(slot)).relevant_slots; };
  ok = ok && relevant("restaurant-book_day") == std::vector<std::string>{"hotel-book_day", "train-day"} &&
       relevant("taxi-destination") == std::vector<std::string>{"restaurant-name", "hotel-name", "attraction-name"} &&
       relevant("taxi-arriveby") == std::vector<std::string>{"restaurant-book_time"};
  if (!ok) return {false, "schema inventory or relevant-slot dictionary differs"};

  const Expected r1 = {{"restaurant-pricerange", "cheap"}, {"restaurant-area", "centre"}};
  Expected r2 = r1;
  r2.insert({{"restaurant-food", "dontcare"},
             {"restaurant-book_people", "2"},
             {"restaurant-book_day", "friday"},
             {"restaurant-book_time", "18:30"}});
  Expected r3 = r2;
  r3.insert({{"restaurant-name", "golden wok"}, {"taxi-destination", "golden wok"}, {"taxi-arriveby", "18:30"}});
  const Expected t1 = {
      {"train-departure", "cambridge"}, {"train-destination", "london kings cross"}, {"train-day", "wednesday"}};
  Expected t2 = t1;
  t2.insert({{"train-leaveat", "09:15"}, {"train-book_people", "3"}});
  Expected t3 = t2;
  t3.insert({{"hotel-type", "guest house"}, {"hotel-book_people", "3"}, {"hotel-book_day", "wednesday"}});
  const Expected a1 = {{"attraction-type", "museum"}, {"attraction-area", "west"}};
  const Expected a3 = {{"attraction-type", "museum"}, {"attraction-area", "east"}};

  const bool states = states_match(dialogues[0], schema, {r1, r2, r3}) &&
                      states_match(dialogues[1], schema, {t1, t2, t3}) &&
                      states_match(dialogues[2], schema, {a1, a1, a3});
  std::size_t turns = 0;
  for (const auto& d : dialogues) turns += d.turns.size();
  return {states, fmt::format("30 slots over 5 domains, relevant-slot dictionary as documented; {} dialogues, {} "
                              "turns {} the expected states",
                              dialogues.size(), turns, states ? "match" : "do not match")};
}

}  // namespace
}  // namespace msp

int main() {
  using namespace msp;
  spdlog::set_level(spdlog::level::warn);
  int failed = 0;
  auto report = [&](int n, const char* name, const Verdict& v) {
    std::cout << fmt::format("criterion {:2d} {:<24} {}  {}\n", n, name, v.pass ? "PASS" : "FAIL", v.detail)
              << std::flush;
    failed += !v.pass;
  };
  auto guarded = [](const std::function<Verdict()>& f) {
    try {
      return f();
    } catch (const std::exception& e) {
      return Verdict{false, std::string("threw: ") + e.what()};
    }
  };

  report(1, "gradient check", guarded(gradients));
  report(2, "analytic losses", guarded(analytic_losses));
  report(3, "metric tables", guarded(metric_tables));
  report(4, "pool rules", guarded(pool_rules));

  GeneratorConfig g;  // 2000 dialogues, default rates
  const auto corpus = generate_synthetic_corpus(g, 7);
  report(5, "oracle tracking", guarded([&] { return oracle(corpus); }));

  double secs = 0;
  std::vector<MatrixRun> runs;
  std::string matrix_error;
  try {
    runs = run_matrix(corpus, &secs);
  } catch (const std::exception& e) {
    matrix_error = e.what();
  }
  if (matrix_error.empty()) {
    report(6, "strategy ordering", strategy_ordering(runs, secs));
    report(7, "indirect mentions", indirect_tracking(runs));
    report(8, "revision", revision(runs));
  } else {
    for (int n : {6, 7, 8}) report(n, "comparison matrix", {false, "threw: " + matrix_error});
  }
  report(9, "reproducibility", guarded(reproducibility));
  report(10, "fixture", guarded(fixture));

  std::cout << (failed ? fmt::format("{} criteria failed\n", failed) : std::string("all criteria passed\n"));
  return failed ? 1 : 0;
}
