#include "msp_dst/common/error.hpp"
#include "msp_dst/corpus/generator.hpp"
#include "msp_dst/training/checkpoint.hpp"
#include "msp_dst/training/grad_check.hpp"
#include "msp_dst/training/loss.hpp"
#include "msp_dst/training/schedule.hpp"
#include "msp_dst/training/trainer.hpp"

#include "test_support.hpp"

#include <cmath>
#include <fstream>

#include <gtest/gtest.h>

namespace msp {
namespace {

const double kLn4 = std::log(4.0);
const double kLn2 = std::log(2.0);

TEST(Loss, TypeExamples) {
  EXPECT_DOUBLE_EQ(loss_type({{{0, 0, 0, 1}, 3}}), 0.0);
  EXPECT_NEAR(loss_type({{{0.25, 0.25, 0.25, 0.25}, 2}}), 1.386294, 1e-6);
  const ClassExample u{{0.25, 0.25, 0.25, 0.25}, 0};
  EXPECT_NEAR(loss_type({u, u}), 2 * kLn4, 1e-12);
  int clamped = 0;
  EXPECT_NEAR(loss_type({{{1, 0, 0, 0}, 3}}, &clamped), -std::log(1e-12), 1e-9);
  EXPECT_EQ(clamped, 1);
}

TEST(Loss, MentionExamples) {
  EXPECT_EQ(loss_mention({}), 0.0);
  EXPECT_NEAR(loss_mention({{{0.8808, 0.1192, 0, 0}, {true, true, false, false}, 0}}), 0.1269, 1e-4);
  EXPECT_DOUBLE_EQ(loss_mention({{{1, 0, 0, 0}, {true, false, false, false}, 0}}), 0.0);
  EXPECT_THROW(loss_mention({{{1, 0, 0, 0}, {true, false, false, false}, 2}}), ConfigError);
}

TEST(Loss, HitExamples) {
  HitBatch perfect;
  perfect.span.push_back({{0, 1, 0}, {0, 0, 1}, Span{1, 2}});
  EXPECT_DOUBLE_EQ(loss_hit(perfect), 0.0);
  HitBatch uniform;
  uniform.span.push_back({std::vector<double>(10, 0.1), std::vector<double>(10, 0.1), Span{3, 4}});
  EXPECT_NEAR(loss_hit(uniform), 2.302585, 1e-6);
  HitBatch cat;
  cat.categorical.push_back({{0.5, 0.5}, 1});
  EXPECT_NEAR(loss_hit(cat), kLn2, 1e-12);
}

TEST(Loss, JointWeighting) {
  EXPECT_DOUBLE_EQ(joint_loss(1, 1, 1), 1.0);
  EXPECT_DOUBLE_EQ(joint_loss(0, 0, 0), 0.0);
  EXPECT_NEAR(joint_loss(kLn4, 0, kLn2), 0.970406, 1e-6);
  EXPECT_DOUBLE_EQ(joint_loss(2, 3, 5), 0.6 * 2 + 0.2 * 3 + 0.2 * 5);
}

TEST(Loss, AdditiveOverBatchPartitions) {
  std::vector<ClassExample> all;
  for (int i = 0; i < 10; ++i) all.push_back({{0.1 + 0.01 * i, 0.9 - 0.01 * i}, i % 2});
  const std::vector<ClassExample> a(all.begin(), all.begin() + 4), b(all.begin() + 4, all.end());
  EXPECT_EQ(loss_type(all), loss_type(a) + loss_type(b));
}

TEST(Schedule, WarmupAndDecay) {
  EXPECT_NEAR(lr_at(50, 1000, 1e-5, 0.1), 5e-6, 1e-18);
  EXPECT_NEAR(lr_at(100, 1000, 1e-5, 0.1), 1e-5, 1e-18);
  EXPECT_NEAR(lr_at(550, 1000, 1e-5, 0.1), 5e-6, 1e-18);
  EXPECT_EQ(lr_at(0, 1000, 1e-5, 0.1), 0.0);
  EXPECT_NEAR(lr_at(1000, 1000, 1e-5, 0.1), 0.0, 1e-18);
  EXPECT_THROW(lr_at(1001, 1000, 1e-5, 0.1), std::out_of_range);
  double peak = 0;
  long at = -1;
  for (long s = 0; s <= 1000; ++s) {
    const double r = lr_at(s, 1000, 1e-5, 0.1);
    if (r > peak) peak = r, at = s;
  }
  EXPECT_EQ(at, 100);
}

TEST(Adam, FirstStepMovesByTheLearningRate) {
  ParameterSet<double> P;
  const int h = P.add("w", 1, 2);
  const int f = P.add("frozen", 1, 1, true);
  P[h].grad << 3.0, -0.5;
  P[f].grad << 1.0;
  Adam<double> adam(P);
  adam.step(P, 0.1);
  // bias-corrected first step is lr * sign(g)
  EXPECT_NEAR(P[h].value(0, 0), -0.1, 1e-6);
  EXPECT_NEAR(P[h].value(0, 1), 0.1, 1e-6);
  EXPECT_EQ(P[f].value(0, 0), 0.0);
}

TEST(GradCheck, MicroModelEveryStrategy) {
  for (Strategy s : {Strategy::msp, Strategy::changed_state, Strategy::full_state, Strategy::pure_context}) {
    auto setup = micro_setup(7, s);
    EXPECT_EQ(setup.model.config().encoder.dim, 8);
    EXPECT_EQ(setup.model.vocab().size(), 50);
    const auto r = grad_check(setup.model, setup.batch, {}, 1e-4, 100, 3);
    EXPECT_EQ(r.checked, 100);
    EXPECT_GT(r.frozen, 0u);
    EXPECT_LT(r.max_rel_error, 1e-5) << to_string(s) << " worst " << r.worst;
  }
}

// Expected component losses under uniform heads, computed from the labels.
LossParts uniform_losses(const LabeledTurn& turn, const Schema& schema, Strategy s) {
  LossParts out;
  const double type_classes = s == Strategy::msp ? 4 : 3;
  for (const auto& ex : turn.examples) {
    out.type += std::log(type_classes);
    const auto& slot = schema.slot(static_cast<std::size_t>(ex.slot));
    if (ex.type == HitType::mentioned) out.mention += std::log(turn.pools[static_cast<std::size_t>(ex.slot)].real_count());
    if (ex.type == HitType::hit && slot.categorical()) out.hit += std::log(static_cast<double>(slot.ontology.size()));
    if (ex.type == HitType::hit && !slot.categorical() && ex.span_label) {
      out.hit += std::log(static_cast<double>(turn.context.tokens.size()));
    }
  }
  return out;
}

TEST(ZeroHeads, AnalyticLossValues) {
  for (Strategy s : {Strategy::msp, Strategy::pure_context}) {
    auto setup = micro_setup(7, s, /*zero_heads=*/true);
    bool saw_cat = false;
    for (const auto& turn : setup.batch) {
      const LossParts got = setup.model.turn_loss(turn, {}, false);
      const LossParts want = uniform_losses(turn, setup.schema, s);
      EXPECT_NEAR(got.type, want.type, 1e-9);
      EXPECT_NEAR(got.mention, want.mention, 1e-9);
      EXPECT_NEAR(got.hit, want.hit, 1e-9);
      for (const auto& ex : turn.examples) saw_cat |= ex.type == HitType::hit && ex.categorical_label.has_value();
    }
    EXPECT_TRUE(saw_cat);
    // one example, four classes
    const auto& t0 = setup.batch.front();
    LabeledTurn single = t0;
    single.examples.resize(1);
    if (s == Strategy::msp) EXPECT_NEAR(setup.model.turn_loss(single, {}, false).type, kLn4, 1e-9);
  }
}

TEST(ZeroHeads, CategoricalHitIsLnOfOntologySize) {
  auto setup = micro_setup(7, Strategy::msp, true);
  for (const auto& turn : setup.batch) {
    for (std::size_t k = 0; k < turn.examples.size(); ++k) {
      const auto& ex = turn.examples[k];
      if (ex.type != HitType::hit || !ex.categorical_label) continue;
      LabeledTurn one = turn;
      for (auto& other : one.examples) {
        if (&other != &one.examples[k]) other.type = HitType::none;
      }
      const auto parts = setup.model.turn_loss(one, {}, false);
      EXPECT_NEAR(parts.hit, std::log(3.0), 1e-9);
      return;
    }
  }
  FAIL() << "micro dialogue has no categorical hit";
}

TEST(Checkpoint, RoundTripAndFingerprintCheck) {
  GeneratorConfig g;
  g.dialogues = 20;
  const auto corpus = generate_synthetic_corpus(g, 1);
  ModelConfig mc;
  mc.encoder = {8, 2, 1, 16, 64};
  Model<float> model(mc, corpus.schema, Vocabulary::build(corpus.train, corpus.schema));
  model.init(4);
  const auto path = test::temp_dir("ckpt") / "c.json";
  save_checkpoint(model, path, {{"seed", 4}});
  const Model<float> back = load_checkpoint(path, &corpus.schema);
  ASSERT_EQ(back.params().size(), model.params().size());
  for (std::size_t i = 0; i < model.params().size(); ++i) {
    const auto& a = *(model.params().begin() + static_cast<long>(i));
    const auto& b = *(back.params().begin() + static_cast<long>(i));
    EXPECT_EQ(a.name, b.name);
    EXPECT_EQ(a.frozen, b.frozen);
    EXPECT_EQ(a.value, b.value) << a.name;
  }
  const Schema other = synthetic_schema({"train", "hotel"});
  EXPECT_THROW(load_checkpoint(path, &other), ConfigError);
  std::ofstream(test::temp_dir("ckpt_bad") / "c.json") << "{\"format\": \"something\"}";
  EXPECT_THROW(load_checkpoint(test::temp_dir("ckpt_bad2") / "missing.json"), ConfigError);
}

TrainConfig tiny_config(Strategy s) {
  TrainConfig cfg;
  cfg.model.strategy = s;
  cfg.model.encoder = {16, 2, 1, 32, 64};
  cfg.epochs = 3;
  cfg.lr = 3e-3;
  return cfg;
}

TEST(Training, SameSeedSameHistory) {
  GeneratorConfig g;
  g.dialogues = 40;
  const auto corpus = generate_synthetic_corpus(g, 2);
  const auto cfg = tiny_config(Strategy::msp);
  const auto a = train_model(cfg, corpus.schema, corpus.train, corpus.dev);
  const auto b = train_model(cfg, corpus.schema, corpus.train, corpus.dev);
  ASSERT_EQ(a.history.size(), b.history.size());
  for (std::size_t i = 0; i < a.history.size(); ++i) EXPECT_EQ(a.history[i].to_json(), b.history[i].to_json());
  EXPECT_EQ(a.best_dev_jga, b.best_dev_jga);
}

TEST(Training, FrozenEmbeddingTableNeverChanges) {
  GeneratorConfig g;
  g.dialogues = 20;
  const auto corpus = generate_synthetic_corpus(g, 3);
  auto cfg = tiny_config(Strategy::msp);
  cfg.epochs = 1;
  const auto short_run = train_model(cfg, corpus.schema, corpus.train, {});
  cfg.epochs = 3;
  const auto long_run = train_model(cfg, corpus.schema, corpus.train, {});
  const auto& a = short_run.model.params();
  const auto& b = long_run.model.params();
  const int h = a.handle("embedding.table");
  EXPECT_TRUE(a[h].frozen);
  EXPECT_EQ(a[h].value, b[h].value);
  // while the trainable tensors kept moving
  bool moved = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& x = *(a.begin() + static_cast<long>(i));
    const auto& y = *(b.begin() + static_cast<long>(i));
    if (!x.frozen && x.value != y.value) moved = true;
  }
  EXPECT_TRUE(moved);
}

TEST(Training, OverfitsASingleDialogue) {
  GeneratorConfig g;
  g.dialogues = 10;
  const auto corpus = generate_synthetic_corpus(g, 12);
  const std::vector<Dialogue> one{corpus.train.front()};
  auto cfg = tiny_config(Strategy::msp);
  cfg.epochs = 600;
  cfg.lr = 2e-2;
  cfg.warmup = 0.02;  // the loss is summed over every slot of every turn
  const auto r = train_model(cfg, corpus.schema, one, {});
  EXPECT_LT(r.history.back().train_loss, 0.01);
}

TEST(Training, EarlyStopsAfterPatienceEpochsOfPlateau) {
  GeneratorConfig g;
  g.dialogues = 30;
  const auto corpus = generate_synthetic_corpus(g, 2);
  auto cfg = tiny_config(Strategy::msp);
  cfg.epochs = 30;
  cfg.lr = 1e-9;  // nothing moves, so dev JGA plateaus from epoch 1
  cfg.patience = 3;
  const auto r = train_model(cfg, corpus.schema, corpus.train, corpus.dev);
  EXPECT_TRUE(r.early_stopped);
  EXPECT_LE(r.history.size(), static_cast<std::size_t>(r.best_epoch + 3));
}

TEST(Training, InvalidConfigsRejected) {
  TrainConfig cfg;
  cfg.weights.alpha = -1;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = TrainConfig{};
  cfg.warmup = 1.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  EXPECT_THROW(TrainConfig::preset("huge"), ConfigError);
  EXPECT_EQ(TrainConfig::preset("paper").lr, 1e-5);
  EXPECT_EQ(TrainConfig::preset("paper").model.encoder.max_len, 512);
}

TEST(Training, FlatJsonRoundTrip) {
  TrainConfig cfg = TrainConfig::preset("toy");
  cfg.model.strategy = Strategy::full_state;
  cfg.seed = 9;
  const TrainConfig back = TrainConfig::from_json(cfg.to_json());
  EXPECT_EQ(back.to_json(), cfg.to_json());
}

}  // namespace
}  // namespace msp
