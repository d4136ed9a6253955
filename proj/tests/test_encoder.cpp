#include "msp_dst/common/error.hpp"
#include "msp_dst/encoder/embedding.hpp"
#include "msp_dst/encoder/encoder.hpp"
#include "msp_dst/encoder/tokenize.hpp"
#include "msp_dst/encoder/vocabulary.hpp"

#include <random>

#include <gtest/gtest.h>

namespace msp {
namespace {

std::vector<Utterance> user_words(int count) {
  Utterance u;
  u.speaker = Speaker::user;
  u.turn = 1;
  for (int i = 0; i < count; ++i) u.tokens.push_back("w" + std::to_string(i));
  return {u};
}

TEST(TokenizeContext, ShortContextGetsClassificationTokenFirst) {
  Utterance u{Speaker::user, 1, {"a", "b", "c"}};
  std::vector<Utterance> ctx{u};
  const auto t = tokenize_context(ctx, 512);
  // separator + three words, plus the classification token
  EXPECT_LE(t.size(), 512);
  EXPECT_EQ(t.tokens.back(), "c");
  EXPECT_EQ(t.tokens.size(), 4u);
  Vocabulary v;
  TokenizedContext enc = t;
  v.encode(enc);
  EXPECT_EQ(enc.ids[0], v.cls_id());
}

TEST(TokenizeContext, LongContextKeepsTheLatestTokens) {
  for (int max_len : {512, 128}) {
    const auto ctx = user_words(600);
    const auto t = tokenize_context(ctx, max_len);
    ASSERT_EQ(t.size(), max_len);
    ASSERT_EQ(t.tokens.size(), static_cast<std::size_t>(max_len - 1));
    // a contiguous suffix of the word stream
    for (int i = 0; i < max_len - 1; ++i) {
      EXPECT_EQ(t.tokens[static_cast<std::size_t>(i)], "w" + std::to_string(600 - (max_len - 1) + i));
    }
  }
}

TEST(TokenizeContext, RejectsEmptyContextAndTinyBudget) {
  EXPECT_THROW(tokenize_context({}, 16), ConfigError);
  EXPECT_THROW(tokenize_context(user_words(2), 1), ConfigError);
}

TEST(TokenizeContext, ProtectedSuffixSurvivesTruncation) {
  const auto ctx = user_words(100);
  Utterance state{Speaker::state, 0, {"train-day", "=", "monday", ";"}};
  std::vector<Utterance> suffix{state};
  const auto t = tokenize_context(ctx, 20, suffix);
  EXPECT_EQ(t.size(), 20);
  EXPECT_EQ(t.tokens.back(), ";");
  EXPECT_EQ(t.tokens[t.tokens.size() - 2], "monday");
}

TEST(TokenizeContext, LengthNeverExceedsBudgetProperty) {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const int max_len = 2 + static_cast<int>(rng() % 40);
    std::vector<Utterance> ctx;
    const int turns = 1 + static_cast<int>(rng() % 4);
    for (int t = 1; t <= turns; ++t) {
      for (Speaker s : {Speaker::agent, Speaker::user}) {
        Utterance u{s, t, {}};
        for (int k = static_cast<int>(rng() % 8); k > 0; --k) u.tokens.push_back("x");
        ctx.push_back(u);
      }
    }
    const auto out = tokenize_context(ctx, max_len);
    EXPECT_LE(out.size(), max_len);
    EXPECT_EQ(out.segments.size(), out.tokens.size());
  }
}

TEST(SerializeState, FormatAndDeterminism) {
  std::vector<SlotDef> slots(2);
  slots[0] = {"train-day", "train", SlotKind::span, {}, {}};
  slots[1] = {"train-people", "train", SlotKind::span, {}, {}};
  const Schema schema(slots);
  DialogueState st(2);
  EXPECT_TRUE(serialize_state_string(st, schema).empty());
  st.values[0] = SlotValue::parse("monday");
  const auto toks = serialize_state_string(st, schema);
  ASSERT_GE(toks.size(), 3u);
  EXPECT_EQ(toks[0], "train-day");
  EXPECT_EQ(toks[1], "=");
  EXPECT_EQ(toks[2], "monday");
  EXPECT_EQ(toks, serialize_state_string(st, schema));
}

TEST(Positions, CountBackFromTheNewestToken) {
  EXPECT_EQ(encoder_positions(4, 10), (std::vector<int>{9, 2, 1, 0}));
  EXPECT_THROW(encoder_positions(11, 10), DimensionError);
}

struct EncoderFixture {
  EncoderConfig cfg{8, 2, 2, 16, 32};
  ParameterSet<double> params;
  TransformerEncoder<double> enc;
  Vocabulary vocab;

  EncoderFixture() {
    for (const char* w : {"i", "need", "a", "train", "on", "monday", "friday"}) vocab.add(w);
    enc = TransformerEncoder<double>(cfg, vocab.size(), params);
    std::mt19937_64 rng(9);
    enc.init(params, rng);
  }

  TokenizedContext context(const std::vector<std::string>& words) const {
    std::vector<Utterance> u{{Speaker::user, 1, words}};
    auto ctx = tokenize_context(u, cfg.max_len);
    vocab.encode(ctx);
    return ctx;
  }
};

TEST(Encoder, ShapesAndDeterminism) {
  EncoderFixture f;
  const auto ctx = f.context({"i", "need", "a", "train"});
  const auto a = f.enc.encode(f.params, ctx);
  const auto b = f.enc.encode(f.params, ctx);
  EXPECT_EQ(a.cls.size(), 8);
  EXPECT_EQ(a.tokens.rows(), static_cast<long>(ctx.tokens.size()));
  EXPECT_EQ(a.tokens.cols(), 8);
  EXPECT_EQ(a.cls, b.cls);
  EXPECT_EQ(a.tokens, b.tokens);
}

TEST(Encoder, PermutingMiddleTokensChangesOutput) {
  EncoderFixture f;
  const auto a = f.enc.encode(f.params, f.context({"i", "need", "a", "train", "on", "monday"}));
  const auto b = f.enc.encode(f.params, f.context({"i", "a", "need", "train", "on", "monday"}));
  EXPECT_GT((a.cls - b.cls).norm(), 1e-6);
}

TEST(Encoder, RejectsIdsOutsideTheVocabulary) {
  EncoderFixture f;
  auto ctx = f.context({"i", "need"});
  ctx.ids[1] = f.vocab.size() + 5;
  EXPECT_THROW(f.enc.encode(f.params, ctx), std::out_of_range);
}

TEST(Encoder, BackwardMatchesFiniteDifferences) {
  EncoderFixture f;
  const auto ctx = f.context({"i", "need", "a", "train", "on", "friday"});
  const auto segs = encoder_segments(ctx);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> nd;
  TransformerEncoder<double>::Cache cache;
  const Mat<double> out = f.enc.forward(f.params, ctx.ids, segs, &cache);
  Mat<double> R(out.rows(), out.cols());
  for (long i = 0; i < R.size(); ++i) R.data()[i] = nd(rng);
  f.params.zero_grad();
  f.enc.backward(f.params, cache, R);

  auto loss = [&] { return f.enc.forward(f.params, ctx.ids, segs, nullptr).cwiseProduct(R).sum(); };
  const double h = 1e-5;
  double worst = 0;
  int checked = 0;
  for (auto& p : f.params) {
    if (p.frozen) continue;
    for (long k = 0; k < p.value.size(); k += 7) {
      double& x = p.value.data()[k];
      const double keep = x;
      x = keep + h;
      const double up = loss();
      x = keep - h;
      const double down = loss();
      x = keep;
      const double num = (up - down) / (2 * h);
      const double ana = p.grad.data()[k];
      worst = std::max(worst, std::abs(num - ana) / std::max({std::abs(num), std::abs(ana), 1e-6}));
      ++checked;
    }
  }
  EXPECT_GT(checked, 100);
  EXPECT_LT(worst, 1e-5);
}

TEST(EmbedText, MeanOfTokenVectors) {
  Vocabulary v;
  v.add("a");
  v.add("b");
  v.add("restaurant");
  v.add("day");
  Mat<double> table = Mat<double>::Zero(v.size(), 2);
  table.row(v.id("a")) << 1, 0;
  table.row(v.id("b")) << 0, 1;
  table.row(v.id("restaurant")) << 2, 4;
  table.row(v.id("day")) << -1, 0.5;
  const EmbeddingTable<double> t{&v, &table, true};

  EXPECT_EQ(embed_text({"a"}, t), table.row(v.id("a")).transpose());
  const Vec<double> ab = embed_text({"a", "b"}, t);
  EXPECT_DOUBLE_EQ(ab(0), 0.5);
  EXPECT_DOUBLE_EQ(ab(1), 0.5);
  const Vec<double> slot = embed_text(split_slot_name("restaurant-day"), t);
  EXPECT_DOUBLE_EQ(slot(0), 0.5);
  EXPECT_DOUBLE_EQ(slot(1), 2.25);
  EXPECT_EQ(embed_text({"b", "b", "b"}, t), table.row(v.id("b")).transpose());
  EXPECT_THROW(embed_text({}, t), std::invalid_argument);
}

}  // namespace
}  // namespace msp
