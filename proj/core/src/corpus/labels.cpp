#include "msp_dst/corpus/labels.hpp"

#include "msp_dst/common/error.hpp"

namespace msp {

std::string to_string(HitType t) {
  switch (t) {
    case HitType::none:
      return "none";
    case HitType::dontcare:
      return "dontcare";
    case HitType::mentioned:
      return "mentioned";
    case HitType::hit:
      return "hit";
  }
  return "none";
}

HitType parse_hit_type(std::string_view s) {
  if (s == "none") return HitType::none;
  if (s == "dontcare") return HitType::dontcare;
  if (s == "mentioned") return HitType::mentioned;
  if (s == "hit") return HitType::hit;
  throw ConfigError("unknown hit type: " + std::string(s));
}

int type_class(HitType t, Strategy s) {
  if (num_type_classes(s) == 4) return static_cast<int>(t);
  switch (t) {
    case HitType::none:
      return 0;
    case HitType::dontcare:
      return 1;
    case HitType::hit:
      return 2;
    case HitType::mentioned:
      break;
  }
  throw std::invalid_argument("mentioned has no class under " + to_string(s));
}

HitType type_from_class(int cls, Strategy s) {
  if (num_type_classes(s) == 4) return static_cast<HitType>(cls);
  static constexpr HitType three[] = {HitType::none, HitType::dontcare, HitType::hit};
  return three[cls];
}

std::optional<Span> find_span(std::string_view value, std::span<const std::string> tokens,
                              const Normalizer& norm, int begin, int end) {
  const auto needle = norm.value_tokens(value);
  if (needle.empty()) return std::nullopt;
  if (end < 0 || end > static_cast<int>(tokens.size())) end = static_cast<int>(tokens.size());
  begin = std::max(begin, 0);
  const int len = static_cast<int>(needle.size());
  for (int start = end - len; start >= begin; --start) {
    bool ok = true;
    for (int k = 0; k < len && ok; ++k) {
      ok = norm.token(tokens[static_cast<std::size_t>(start + k)]) == needle[static_cast<std::size_t>(k)];
    }
    if (ok) return Span{start, start + len - 1};
  }
  return std::nullopt;
}

bool reads_span(const SlotDef& slot, const LabelOptions& opts) {
  return !slot.categorical() || !opts.categorical_heads;
}

TokenizedContext build_turn_context(const Dialogue& dialogue, int t, const DialogueState* prev_state,
                                    const Schema& schema, const LabelOptions& opts) {
  const auto utts = context_utterances(dialogue, t);
  if (opts.strategy == Strategy::full_state) {
    std::vector<Utterance> suffix;
    if (prev_state) {
      suffix.push_back({Speaker::state, t, serialize_state_string(*prev_state, schema)});
    } else {
      suffix.push_back({Speaker::state, t, {}});
    }
    return tokenize_context(utts, opts.max_len, suffix);
  }
  return tokenize_context(utts, opts.max_len);
}

namespace {

void fill_hit(TrainingExample& ex, std::size_t slot, const SlotValue& gold,
              const TokenizedContext& ctx, const Schema& schema, const LabelOptions& opts) {
  ex.type = HitType::hit;
  if (!reads_span(schema.slot(slot), opts)) {
    ex.categorical_label = schema.ontology_index(slot, gold.text());
    ex.unmatched = !ex.categorical_label;
    return;
  }
  ex.span_label = find_span(gold.text(), ctx.tokens, schema.normalizer());
  ex.unmatched = !ex.span_label;
}

}  // namespace

TrainingExample label_slot(std::size_t slot, int turn, const SlotValue& gold,
                           const SlotValue& previous, const SlotPool* pool,
                           const TokenizedContext& ctx, const Schema& schema,
                           const LabelOptions& opts) {
  TrainingExample ex;
  ex.turn = turn;
  ex.slot = static_cast<int>(slot);
  const Normalizer& norm = schema.normalizer();

  switch (opts.strategy) {
    case Strategy::changed_state:
      if (gold.matches(previous, norm) || gold.is_none()) {
        ex.type = HitType::none;
      } else if (gold.is_dontcare()) {
        ex.type = HitType::dontcare;
      } else {
        fill_hit(ex, slot, gold, ctx, schema, opts);
      }
      return ex;
    case Strategy::pure_context:
    case Strategy::full_state:
      if (gold.is_none()) {
        ex.type = HitType::none;
      } else if (gold.is_dontcare()) {
        ex.type = HitType::dontcare;
      } else {
        fill_hit(ex, slot, gold, ctx, schema, opts);
      }
      return ex;
    case Strategy::msp:
      break;
  }

  if (gold.is_none()) {
    ex.type = HitType::none;
    return ex;
  }
  if (gold.is_dontcare()) {
    ex.type = HitType::dontcare;
    return ex;
  }
  const auto [lo, hi] = ctx.turn_range(turn);
  const bool stated_now = hi > lo && find_span(gold.text(), ctx.tokens, norm, lo, hi).has_value();
  if (!stated_now && pool) {
    const int idx = find_in_pool(*pool, slot, gold, norm);
    if (idx >= 0) {
      ex.type = HitType::mentioned;
      ex.mention_index = idx;
      return ex;
    }
  }
  fill_hit(ex, slot, gold, ctx, schema, opts);
  return ex;
}

std::vector<LabeledTurn> label_dialogue(const Dialogue& dialogue, const Schema& schema,
                                        const LabelOptions& opts) {
  std::vector<LabeledTurn> out;
  out.reserve(dialogue.turns.size());
  const DialogueState empty(schema.size());
  for (int t = 1; t <= static_cast<int>(dialogue.turns.size()); ++t) {
    const DialogueState& prev = t > 1 ? dialogue.turns[static_cast<std::size_t>(t - 2)].gold : empty;
    const DialogueState& gold = dialogue.turns[static_cast<std::size_t>(t - 1)].gold;
    LabeledTurn lt;
    lt.turn = t;
    lt.context = build_turn_context(dialogue, t, &prev, schema, opts);
    if (uses_pool(opts.strategy)) {
      for (std::size_t s = 0; s < schema.size(); ++s) {
        lt.pools.push_back(build_slot_pool(s, prev, schema, opts.pool_capacity, opts.pool_mode));
      }
    }
    for (std::size_t s = 0; s < schema.size(); ++s) {
      lt.examples.push_back(label_slot(s, t, gold.values[s], prev.values[s],
                                       lt.pools.empty() ? nullptr : &lt.pools[s], lt.context,
                                       schema, opts));
    }
    out.push_back(std::move(lt));
  }
  return out;
}

std::vector<TrainingExample> derive_labels(const Dialogue& dialogue, const Schema& schema,
                                           const LabelOptions& opts) {
  std::vector<TrainingExample> out;
  for (auto& lt : label_dialogue(dialogue, schema, opts)) {
    for (auto& ex : lt.examples) out.push_back(std::move(ex));
  }
  return out;
}

}  // namespace msp
