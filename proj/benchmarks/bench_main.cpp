#include "msp_dst/corpus/generator.hpp"
#include "msp_dst/eval/metrics.hpp"
#include "msp_dst/msp/fusion.hpp"
#include "msp_dst/training/trainer.hpp"

#include <random>

#include <benchmark/benchmark.h>

namespace msp {
namespace {

const GeneratedCorpus& corpus() {
  static const GeneratedCorpus c = [] {
    GeneratorConfig g;
    g.dialogues = 50;
    return generate_synthetic_corpus(g, 1);
  }();
  return c;
}

Model<float> toy_model(int max_len) {
  ModelConfig mc = TrainConfig::preset("toy").model;
  mc.encoder.max_len = max_len;
  Model<float> m(mc, corpus().schema, Vocabulary::build(corpus().train, corpus().schema));
  m.init(1);
  return m;
}

void BM_EncoderForward(benchmark::State& state) {
  const int len = static_cast<int>(state.range(0));
  Model<float> model = toy_model(len);
  const auto turns = prepare_dialogue(model, corpus().train.front());
  const auto& ctx = turns.back().context;
  for (auto _ : state) {
    benchmark::DoNotOptimize(model.encoder().encode(model.params(), ctx));
  }
  state.SetLabel(std::to_string(ctx.tokens.size() + 1) + " tokens");
}
BENCHMARK(BM_EncoderForward)->Arg(64)->Arg(128)->Arg(256);

void BM_TrainStep(benchmark::State& state) {
  Model<float> model = toy_model(64);
  const auto turns = prepare_dialogue(model, corpus().train.front());
  for (auto _ : state) {
    model.params().zero_grad();
    double loss = 0;
    for (const auto& t : turns) loss += model.turn_loss(t, {}, true).joint({});
    benchmark::DoNotOptimize(loss);
  }
  state.SetItemsProcessed(static_cast<long>(state.iterations() * turns.size()));
}
BENCHMARK(BM_TrainStep);

void BM_Fuse(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937 rng(3);
  std::normal_distribution<float> nd;
  MentionedSlotPool<float> pool;
  pool.pool.entries.resize(4);
  pool.pool.mask = {true, true, true, false};
  pool.reps = Mat<float>(4, n);
  for (long i = 0; i < pool.reps.size(); ++i) pool.reps.data()[i] = nd(rng);
  pool.reps.row(3).setZero();
  Vec<float> rs(n), rc(n);
  Mat<float> W(n, n);
  for (int i = 0; i < n; ++i) rs(i) = nd(rng), rc(i) = nd(rng);
  for (long i = 0; i < W.size(); ++i) W.data()[i] = nd(rng);
  for (auto _ : state) benchmark::DoNotOptimize(fuse<float>(pool, rs, rc, W));
}
BENCHMARK(BM_Fuse)->Arg(32)->Arg(768);

void BM_SlotMetrics(benchmark::State& state) {
  const auto golds = gold_states(corpus().test);
  auto preds = golds;
  std::mt19937 rng(5);
  for (auto& s : preds) {
    for (auto& v : s.values) {
      if (rng() % 5 == 0) v = SlotValue::none();
    }
  }
  for (auto _ : state) benchmark::DoNotOptimize(slot_metrics(preds, golds, corpus().schema));
  state.SetItemsProcessed(static_cast<long>(state.iterations() * golds.size()));
}
BENCHMARK(BM_SlotMetrics);

}  // namespace
}  // namespace msp

BENCHMARK_MAIN();
