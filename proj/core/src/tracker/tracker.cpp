#include "msp_dst/tracker/tracker.hpp"

#include "msp_dst/common/error.hpp"
#include "msp_dst/common/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

namespace msp {

std::string to_string(Disposition d) {
  switch (d) {
    case Disposition::inherited:
      return "inherited";
    case Disposition::revised:
      return "revised";
    case Disposition::extracted:
      return "extracted";
    case Disposition::none:
      return "none";
  }
  return "none";
}

Disposition parse_disposition(std::string_view s) {
  if (s == "inherited") return Disposition::inherited;
  if (s == "revised") return Disposition::revised;
  if (s == "extracted") return Disposition::extracted;
  if (s == "none") return Disposition::none;
  throw ConfigError("unknown disposition: " + std::string(s));
}

nlohmann::json TraceRecord::to_json() const {
  nlohmann::json j = {{"dialogue_id", dialogue_id},
                      {"turn", turn},
                      {"slot", slot},
                      {"hit_type", msp::to_string(hit_type)},
                      {"mention_index", nullptr},
                      {"mention_source", nullptr},
                      {"value", value.str()},
                      {"disposition", msp::to_string(disposition)},
                      {"noised", noised}};
  if (mention_index >= 0) {
    j["mention_index"] = mention_index;
    j["mention_source"] = mention_source;
  }
  return j;
}

TraceRecord TraceRecord::from_json(const nlohmann::json& j) {
  TraceRecord r;
  r.dialogue_id = j.at("dialogue_id").get<std::string>();
  r.turn = j.at("turn").get<int>();
  r.slot = j.at("slot").get<std::string>();
  r.hit_type = parse_hit_type(j.at("hit_type").get<std::string>());
  if (!j.at("mention_index").is_null()) {
    r.mention_index = j.at("mention_index").get<int>();
    r.mention_source = j.at("mention_source").get<std::string>();
  }
  r.value = SlotValue::parse(j.at("value").get<std::string>());
  r.disposition = parse_disposition(j.at("disposition").get<std::string>());
  r.noised = j.value("noised", false);
  return r;
}

std::vector<SlotDecision> ModelPredictor::predict(const Dialogue&, int, TokenizedContext& ctx,
                                                  const std::vector<SlotPool>& pools, const DialogueState&) {
  model_.encode_ids(ctx);
  return model_.decide(model_.forward(ctx, pools, false));
}

std::vector<SlotDecision> OraclePredictor::predict(const Dialogue& history, int t, TokenizedContext& ctx,
                                                   const std::vector<SlotPool>& pools, const DialogueState& prev) {
  const DialogueState& gold = history.turns.at(static_cast<std::size_t>(t - 1)).gold;
  if (gold.size() != schema_.size()) throw ConfigError("oracle tracking needs gold states");
  std::vector<SlotDecision> out(schema_.size());
  for (std::size_t s = 0; s < schema_.size(); ++s) {
    const TrainingExample ex = label_slot(s, t, gold.values[s], prev.values[s], pools.empty() ? nullptr : &pools[s],
                                          ctx, schema_, opts_);
    SlotDecision& d = out[s];
    d.type = ex.type;
    d.mention_index = ex.mention_index.value_or(-1);
    d.categorical = ex.categorical_label;
    d.span = ex.span_label;
    d.reads_span = reads_span(schema_.slot(s), opts_);
  }
  return out;
}

bool NoiseConfig::corrupts(const std::string& dialogue_id, const std::string& slot) const {
  return rate > 0.0 && unit_hash(seed, dialogue_id + '\x1f' + slot) < rate;
}

std::vector<std::vector<std::string>> noise_alternatives(const Schema& schema, const std::vector<Dialogue>& dialogues) {
  std::vector<std::set<std::string>> sets(schema.size());
  for (std::size_t s = 0; s < schema.size(); ++s) sets[s].insert(schema.slot(s).ontology.begin(), schema.slot(s).ontology.end());
  for (const auto& d : dialogues) {
    for (const auto& t : d.turns) {
      for (std::size_t s = 0; s < t.gold.size(); ++s) {
        if (t.gold.values[s].is_concrete()) sets[s].insert(t.gold.values[s].text());
      }
    }
  }
  std::vector<std::vector<std::string>> out;
  for (auto& s : sets) out.emplace_back(s.begin(), s.end());
  return out;
}

SlotValue hit_value(const SlotDef& slot, const SlotDecision& d, const TokenizedContext& ctx) {
  if (!d.reads_span) {
    if (d.categorical && *d.categorical >= 0 && *d.categorical < static_cast<int>(slot.ontology.size())) {
      return SlotValue::parse(slot.ontology[static_cast<std::size_t>(*d.categorical)]);
    }
    return SlotValue::none();
  }
  if (!d.span || d.span->start > d.span->end || d.span->start < 0 ||
      d.span->end >= static_cast<int>(ctx.tokens.size())) {
    return SlotValue::none();
  }
  std::vector<std::string> toks(ctx.tokens.begin() + d.span->start, ctx.tokens.begin() + d.span->end + 1);
  return SlotValue::parse(join(toks));
}

SlotUpdate update_slot(Strategy strategy, const SlotDef& slot, const SlotValue& previous, const SlotDecision& d,
                       const SlotPool* pool, const TokenizedContext& ctx, const Normalizer& norm) {
  SlotUpdate u;
  switch (d.type) {
    case HitType::none:
      // changed_state: "no change" carries the previous value over.
      if (strategy == Strategy::changed_state) u.value = previous;
      break;
    case HitType::dontcare:
      u.value = SlotValue::dontcare();
      break;
    case HitType::mentioned:
      if (pool && d.mention_index >= 0 && d.mention_index < pool->capacity() &&
          pool->mask[static_cast<std::size_t>(d.mention_index)]) {
        const PoolEntry& e = pool->entries[static_cast<std::size_t>(d.mention_index)];
        u.value = e.value;
        u.mention_index = d.mention_index;
        u.mention_source = e.source_slot;
      }
      break;
    case HitType::hit:
      u.value = hit_value(slot, d, ctx);
      break;
  }

  if (d.type == HitType::hit && !previous.is_none() && !u.value.matches(previous, norm)) {
    u.disposition = Disposition::revised;
  } else if (u.value.is_none()) {
    u.disposition = Disposition::none;
  } else if (d.type == HitType::mentioned || d.type == HitType::none) {
    u.disposition = Disposition::inherited;
  } else {
    u.disposition = Disposition::extracted;
  }
  return u;
}

TrackingSession::TrackingSession(TurnPredictor& predictor, const Schema& schema, TrackOptions opts,
                                 std::string dialogue_id)
    : predictor_(predictor), schema_(schema), opts_(std::move(opts)) {
  if (predictor.strategy() != opts_.strategy) {
    throw ConfigError("model was trained for strategy " + to_string(predictor.strategy()) + ", cannot track as " +
                      to_string(opts_.strategy));
  }
  if (opts_.noise.active() && opts_.noise.alternatives.size() != schema.size()) {
    throw ConfigError("noise alternatives must cover every slot");
  }
  reset(std::move(dialogue_id));
}

void TrackingSession::reset(std::string dialogue_id) {
  history_ = Dialogue{std::move(dialogue_id), {}};
  state_ = DialogueState(schema_.size());
  extracted_.assign(schema_.size(), false);
}

std::vector<TraceRecord> TrackingSession::step(const Turn& turn) {
  history_.turns.push_back(turn);
  const int t = static_cast<int>(history_.turns.size());
  const LabelOptions opts = predictor_.options();
  TokenizedContext ctx = build_turn_context(history_, t, &state_, schema_, opts);
  std::vector<SlotPool> pools;
  if (uses_pool(opts.strategy)) {
    for (std::size_t s = 0; s < schema_.size(); ++s) {
      pools.push_back(build_slot_pool(s, state_, schema_, opts.pool_capacity, opts.pool_mode));
    }
  }
  const auto decisions = predictor_.predict(history_, t, ctx, pools, state_);

  DialogueState next = state_;
  std::vector<TraceRecord> records;
  records.reserve(schema_.size());
  const Normalizer& norm = schema_.normalizer();
  for (std::size_t s = 0; s < schema_.size(); ++s) {
    const SlotDef& slot = schema_.slot(s);
    SlotUpdate u = update_slot(opts.strategy, slot, state_.values[s], decisions[s], pools.empty() ? nullptr : &pools[s],
                               ctx, norm);
    bool noised = false;
    if (opts_.noise.active() && u.disposition == Disposition::extracted && u.value.is_concrete() && !extracted_[s]) {
      extracted_[s] = true;
      if (opts_.noise.corrupts(history_.id, slot.name)) {
        std::vector<std::string> alts;
        for (const auto& a : opts_.noise.alternatives[s]) {
          if (!norm.same(a, u.value.text())) alts.push_back(a);
        }
        if (!alts.empty()) {
          const double h = unit_hash(opts_.noise.seed, history_.id + '\x1f' + slot.name + "\x1f" "alt");
          u.value = SlotValue::parse(alts[std::min(alts.size() - 1, static_cast<std::size_t>(h * alts.size()))]);
          noised = true;
        }
      }
    }
    if (!(u.value == state_.values[s])) next.last_updated[s] = t;
    next.values[s] = u.value;

    TraceRecord r;
    r.dialogue_id = history_.id;
    r.turn = t;
    r.slot = slot.name;
    r.hit_type = decisions[s].type;
    r.mention_index = u.mention_index;
    if (u.mention_source >= 0) r.mention_source = schema_.slot(static_cast<std::size_t>(u.mention_source)).name;
    r.value = u.value;
    r.disposition = u.disposition;
    r.noised = noised;
    records.push_back(std::move(r));
  }
  state_ = std::move(next);
  return records;
}

TrackResult track_dialogue(TurnPredictor& predictor, const Dialogue& dialogue, const Schema& schema,
                           const TrackOptions& opts) {
  TrackingSession session(predictor, schema, opts, dialogue.id);
  TrackResult out;
  out.dialogue_id = dialogue.id;
  for (const auto& turn : dialogue.turns) {
    auto recs = session.step(turn);
    out.trace.insert(out.trace.end(), std::make_move_iterator(recs.begin()), std::make_move_iterator(recs.end()));
    out.states.push_back(session.state());
  }
  return out;
}

std::vector<TrackResult> track_corpus(TurnPredictor& predictor, const std::vector<Dialogue>& dialogues,
                                      const Schema& schema, const TrackOptions& opts) {
  std::vector<TrackResult> out;
  out.reserve(dialogues.size());
  for (const auto& d : dialogues) out.push_back(track_dialogue(predictor, d, schema, opts));
  return out;
}

void write_trace(const std::vector<TrackResult>& results, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const auto& r : results) {
    for (const auto& rec : r.trace) out << rec.to_json().dump() << '\n';
  }
}

std::vector<TraceRecord> read_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read trace " + path.string());
  std::vector<TraceRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      out.push_back(TraceRecord::from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("malformed trace line: " + std::string(e.what()));
    }
  }
  return out;
}

}  // namespace msp
