#pragma once

#include "msp_dst/corpus/labels.hpp"
#include "msp_dst/encoder/embedding.hpp"
#include "msp_dst/encoder/encoder.hpp"
#include "msp_dst/heads/heads.hpp"
#include "msp_dst/msp/fusion.hpp"

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace msp {

struct ModelConfig {
  EncoderConfig encoder;
  Strategy strategy = Strategy::msp;
  int pool_capacity = kDefaultPoolCapacity;
  PoolMode pool_mode = PoolMode::full;
  bool categorical_heads = true;
  bool zero_heads = false;  // heads start at exactly zero (uniform outputs)

  LabelOptions label_options() const {
    return {strategy, encoder.max_len, pool_capacity, pool_mode, categorical_heads};
  }
  nlohmann::json to_json() const;
  static ModelConfig from_json(const nlohmann::json& j);
};

struct LossWeights {
  double alpha = 0.6;  // type
  double beta = 0.2;   // mention
  double gamma = 0.2;  // hit
};

inline constexpr double kLogFloor = 1e-12;

// -log(max(p, 1e-12)); bumps *clamped when the floor was used.
inline double clamped_nll(double p, int* clamped = nullptr) {
  if (!(p >= kLogFloor)) {
    if (clamped) ++*clamped;
    return -std::log(kLogFloor);
  }
  return -std::log(p);
}

struct LossParts {
  double type = 0;
  double mention = 0;
  double hit = 0;
  int clamped = 0;

  double joint(const LossWeights& w) const { return w.alpha * type + w.beta * mention + w.gamma * hit; }
  LossParts& operator+=(const LossParts& o) {
    type += o.type;
    mention += o.mention;
    hit += o.hit;
    clamped += o.clamped;
    return *this;
  }
};

// Head decision for one slot at one turn, before the strategy's update rule.
struct SlotDecision {
  HitType type = HitType::none;
  int mention_index = -1;
  std::optional<int> categorical;  // ontology index
  std::optional<Span> span;        // empty when start > end
  bool reads_span = false;
};

template <class S>
struct SlotForward {
  std::optional<MentionedSlotPool<S>> pool;
  std::optional<FusionResult<S>> fusion;
  Vec<S> z;  // m_fused + r_cls
  Vec<S> p_type;
  std::optional<MentionSelection<S>> mention;
  std::optional<CategoricalPrediction<S>> categorical;
  std::optional<SpanPrediction<S>> span;
};

template <class S>
struct TurnForward {
  typename TransformerEncoder<S>::Cache cache;
  ContextEncoding<S> enc;
  std::vector<SlotForward<S>> slots;
};

// Encoder, per-slot fusion matrices and the four heads over one schema.
template <class S>
class Model {
 public:
  Model() = default;
  Model(const ModelConfig& cfg, const Schema& schema, Vocabulary vocab);

  // Random initialization; the embedding table is drawn from N(0, 1).
  void init(std::uint64_t seed);

  const ModelConfig& config() const { return cfg_; }
  Strategy strategy() const { return cfg_.strategy; }
  const Schema& schema() const { return schema_; }
  const Vocabulary& vocab() const { return vocab_; }
  ParameterSet<S>& params() { return params_; }
  const ParameterSet<S>& params() const { return params_; }
  const TransformerEncoder<S>& encoder() const { return encoder_; }
  EmbeddingTable<S> table() const { return {&vocab_, &params_[encoder_.table_handle()].value, true}; }
  const Vec<S>& slot_rep(std::size_t s) const { return slot_reps_.at(s); }

  // Recomputes slot-name representations after the table changed.
  void refresh_constants();

  // Encoder input ids for a context built with this model's label options.
  void encode_ids(TokenizedContext& ctx) const { vocab_.encode(ctx); }

  TurnForward<S> forward(const TokenizedContext& ctx, const std::vector<SlotPool>& pools, bool keep_cache) const;

  // Loss of one teacher-forced turn; accumulates parameter gradients when
  // `backward` is set.
  LossParts turn_loss(const LabeledTurn& turn, const LossWeights& w, bool backward);

  std::vector<SlotDecision> decide(const TurnForward<S>& f) const;

  template <class T>
  Model<T> cast() const {
    Model<T> out(cfg_, schema_, vocab_);
    out.params().assign_values(params_);
    out.refresh_constants();
    return out;
  }

 private:
  struct SlotHandles {
    int fused = -1, type_w = -1, type_b = -1, mention_w = -1, hit_w = -1, hit_b = -1, span_w = -1, span_b = -1;
  };

  static Eigen::Map<const Vec<S>> as_vec(const Mat<S>& m) { return {m.data(), m.size()}; }
  static Eigen::Map<Vec<S>> as_vec(Mat<S>& m) { return {m.data(), m.size()}; }

  ModelConfig cfg_;
  Schema schema_;
  Vocabulary vocab_;
  ParameterSet<S> params_;
  TransformerEncoder<S> encoder_;
  std::vector<SlotHandles> slots_;
  std::vector<Vec<S>> slot_reps_;
};

template <class S>
Model<S>::Model(const ModelConfig& cfg, const Schema& schema, Vocabulary vocab)
    : cfg_(cfg), schema_(schema), vocab_(std::move(vocab)) {
  if (cfg.pool_capacity < 1) throw ConfigError("pool capacity must be positive");
  encoder_ = TransformerEncoder<S>(cfg.encoder, vocab_.size(), params_);
  const int n = cfg.encoder.dim;
  const int classes = num_type_classes(cfg.strategy);
  const auto opts = cfg.label_options();
  for (const auto& slot : schema_.slots()) {
    const std::string p = "slot." + slot.name + ".";
    SlotHandles h;
    if (uses_pool(cfg.strategy)) {
      h.fused = params_.add(p + "fused", n, n);
      h.mention_w = params_.add(p + "mention.w", n, n);
    }
    h.type_w = params_.add(p + "type.w", classes, n);
    h.type_b = params_.add(p + "type.b", classes, 1);
    if (reads_span(slot, opts)) {
      h.span_w = params_.add(p + "span.w", 2, n);
      h.span_b = params_.add(p + "span.b", 2, 1);
    } else {
      const int v = static_cast<int>(slot.ontology.size());
      h.hit_w = params_.add(p + "hit.w", v, n);
      h.hit_b = params_.add(p + "hit.b", v, 1);
    }
    slots_.push_back(h);
  }
  refresh_constants();
}

template <class S>
void Model<S>::init(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  encoder_.init(params_, rng);
  const double head_std = cfg_.zero_heads ? 0.0 : 0.02;
  const double n = cfg_.encoder.dim;
  for (const auto& h : slots_) {
    if (h.fused >= 0) fill_normal(params_[h.fused].value, 1.0 / n, rng);
    if (h.mention_w >= 0) fill_normal(params_[h.mention_w].value, 1.0 / n, rng);
    for (int w : {h.type_w, h.hit_w, h.span_w}) {
      if (w < 0) continue;
      if (head_std > 0) {
        fill_normal(params_[w].value, head_std, rng);
      } else {
        params_[w].value.setZero();
      }
    }
  }
  refresh_constants();
}

template <class S>
void Model<S>::refresh_constants() {
  slot_reps_.clear();
  const auto tbl = table();
  for (const auto& slot : schema_.slots()) slot_reps_.push_back(embed_text(split_slot_name(slot.name), tbl));
}

template <class S>
TurnForward<S> Model<S>::forward(const TokenizedContext& ctx, const std::vector<SlotPool>& pools,
                                 bool keep_cache) const {
  if (ctx.ids.size() != static_cast<std::size_t>(ctx.size())) throw DimensionError("context ids not encoded");
  const bool pooled = uses_pool(cfg_.strategy);
  if (pooled && pools.size() != schema_.size()) throw DimensionError("one pool per slot expected");
  TurnForward<S> f;
  f.enc = encoder_.encode(params_, ctx, keep_cache ? &f.cache : nullptr);
  const auto tbl = table();
  const int n = cfg_.encoder.dim;
  f.slots.resize(schema_.size());
  for (std::size_t s = 0; s < schema_.size(); ++s) {
    const SlotHandles& h = slots_[s];
    SlotForward<S>& sf = f.slots[s];
    Vec<S> m_fused = Vec<S>::Zero(n);
    if (pooled) {
      sf.pool = attach_representations<S>(pools[s], schema_, tbl);
      sf.fusion = fuse<S>(*sf.pool, slot_reps_[s], f.enc.cls, params_[h.fused].value);
      m_fused = sf.fusion->fused;
      sf.mention = select_mentioned<S>(f.enc.cls, *sf.pool, params_[h.mention_w].value);
    }
    sf.z = m_fused + f.enc.cls;
    sf.p_type = softmax<S>(params_[h.type_w].value * sf.z + as_vec(params_[h.type_b].value));
    if (h.hit_w >= 0) {
      sf.categorical = predict_categorical<S>(m_fused, f.enc.cls, params_[h.hit_w].value, as_vec(params_[h.hit_b].value));
    } else if (f.enc.tokens.rows() > 0) {
      sf.span = predict_span<S>(f.enc.tokens, params_[h.span_w].value, as_vec(params_[h.span_b].value));
    }
  }
  return f;
}

template <class S>
LossParts Model<S>::turn_loss(const LabeledTurn& turn, const LossWeights& w, bool backward) {
  const TurnForward<S> f = forward(turn.context, turn.pools, backward);
  LossParts out;
  Vec<S> d_cls = Vec<S>::Zero(cfg_.encoder.dim);
  Mat<S> d_tokens = Mat<S>::Zero(f.enc.tokens.rows(), cfg_.encoder.dim);
  const S alpha = static_cast<S>(w.alpha), beta = static_cast<S>(w.beta), gamma = static_cast<S>(w.gamma);

  for (const auto& ex : turn.examples) {
    const auto s = static_cast<std::size_t>(ex.slot);
    const SlotHandles& h = slots_[s];
    const SlotForward<S>& sf = f.slots[s];
    Vec<S> dz = Vec<S>::Zero(cfg_.encoder.dim);

    const int cls = type_class(ex.type, cfg_.strategy);
    out.type += clamped_nll(static_cast<double>(sf.p_type(cls)), &out.clamped);
    if (backward) {
      dz += linear_softmax_backward<S>(sf.z, sf.p_type, cls, alpha, params_[h.type_w].value, params_[h.type_w].grad,
                                       as_vec(params_[h.type_b].grad));
    }

    if (ex.type == HitType::mentioned) {
      const int label = ex.mention_index.value_or(-1);
      if (!sf.pool || label < 0 || label >= sf.pool->capacity() || !sf.pool->mask()[static_cast<std::size_t>(label)]) {
        throw ConfigError("mention label does not index a real pool entry");
      }
      out.mention += clamped_nll(static_cast<double>(sf.mention->probs(label)), &out.clamped);
      if (backward) {
        d_cls += mention_backward<S>(f.enc.cls, *sf.pool, sf.mention->probs, label, beta,
                                     params_[h.mention_w].value, params_[h.mention_w].grad);
      }
    }

    if (ex.type == HitType::hit && !ex.unmatched) {
      if (h.hit_w >= 0 && ex.categorical_label) {
        const int label = *ex.categorical_label;
        out.hit += clamped_nll(static_cast<double>(sf.categorical->probs(label)), &out.clamped);
        if (backward) {
          dz += linear_softmax_backward<S>(sf.z, sf.categorical->probs, label, gamma, params_[h.hit_w].value,
                                           params_[h.hit_w].grad, as_vec(params_[h.hit_b].grad));
        }
      } else if (h.span_w >= 0 && ex.span_label && sf.span) {
        const Span lab = *ex.span_label;
        out.hit += 0.5 * (clamped_nll(static_cast<double>(sf.span->start(lab.start)), &out.clamped) +
                          clamped_nll(static_cast<double>(sf.span->end(lab.end)), &out.clamped));
        if (backward) {
          d_tokens += span_backward<S>(f.enc.tokens, *sf.span, lab, gamma, params_[h.span_w].value,
                                       params_[h.span_w].grad, as_vec(params_[h.span_b].grad));
        }
      }
    }

    if (backward) {
      d_cls += dz;
      if (sf.fusion) d_cls += fuse_backward<S>(*sf.pool, *sf.fusion, params_[h.fused].value, dz, params_[h.fused].grad);
    }
  }

  if (backward) {
    Mat<S> dout(d_tokens.rows() + 1, cfg_.encoder.dim);
    dout.row(0) = d_cls.transpose();
    dout.bottomRows(d_tokens.rows()) = d_tokens;
    encoder_.backward(params_, f.cache, dout);
  }
  return out;
}

template <class S>
std::vector<SlotDecision> Model<S>::decide(const TurnForward<S>& f) const {
  std::vector<SlotDecision> out(schema_.size());
  for (std::size_t s = 0; s < schema_.size(); ++s) {
    const SlotForward<S>& sf = f.slots[s];
    SlotDecision& d = out[s];
    d.type = type_from_class(argmax(sf.p_type), cfg_.strategy);
    if (sf.mention) d.mention_index = sf.mention->index;
    d.reads_span = slots_[s].span_w >= 0;
    if (sf.categorical) d.categorical = sf.categorical->index;
    if (sf.span) d.span = sf.span->span;
  }
  return out;
}

extern template class Model<float>;
extern template class Model<double>;

}  // namespace msp
