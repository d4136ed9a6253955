#pragma once

#include "msp_dst/corpus/labels.hpp"
#include "msp_dst/model/model.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace msp {

enum class Disposition { inherited, revised, extracted, none };

std::string to_string(Disposition d);
Disposition parse_disposition(std::string_view s);

struct TraceRecord {
  std::string dialogue_id;
  int turn = 0;
  std::string slot;
  HitType hit_type = HitType::none;
  int mention_index = -1;      // -1 unless the slot took the mentioned path
  std::string mention_source;  // slot of the selected entry
  SlotValue value;
  Disposition disposition = Disposition::none;
  bool noised = false;  // value replaced by the forced-noise mode

  nlohmann::json to_json() const;
  static TraceRecord from_json(const nlohmann::json& j);
};

// Produces the head decisions for turn t. `history` holds turns 1..t (gold
// states are only meaningful to oracle predictors).
class TurnPredictor {
 public:
  virtual ~TurnPredictor() = default;
  virtual Strategy strategy() const = 0;
  virtual LabelOptions options() const = 0;
  virtual std::vector<SlotDecision> predict(const Dialogue& history, int t, TokenizedContext& ctx,
                                            const std::vector<SlotPool>& pools, const DialogueState& prev) = 0;
};

class ModelPredictor : public TurnPredictor {
 public:
  explicit ModelPredictor(const Model<float>& model) : model_(model) {}
  Strategy strategy() const override { return model_.strategy(); }
  LabelOptions options() const override { return model_.config().label_options(); }
  std::vector<SlotDecision> predict(const Dialogue& history, int t, TokenizedContext& ctx,
                                    const std::vector<SlotPool>& pools, const DialogueState& prev) override;

 private:
  const Model<float>& model_;
};

// Emits the gold labels of the current turn as decisions.
class OraclePredictor : public TurnPredictor {
 public:
  OraclePredictor(const Schema& schema, LabelOptions opts) : schema_(schema), opts_(opts) {}
  Strategy strategy() const override { return opts_.strategy; }
  LabelOptions options() const override { return opts_; }
  std::vector<SlotDecision> predict(const Dialogue& history, int t, TokenizedContext& ctx,
                                    const std::vector<SlotPool>& pools, const DialogueState& prev) override;

 private:
  const Schema& schema_;
  LabelOptions opts_;
};

// Forced-noise mode: the first extraction of a slot in a dialogue is replaced
// by a wrong alternative with probability `rate`. The choice hashes
// (seed, dialogue id, slot), so every tracker corrupts the same slots.
struct NoiseConfig {
  double rate = 0.0;
  std::uint64_t seed = 0;
  std::vector<std::vector<std::string>> alternatives;  // per slot, sorted

  bool active() const { return rate > 0.0; }
  bool corrupts(const std::string& dialogue_id, const std::string& slot) const;
};

// Ontology values plus every gold value seen in `dialogues`, per slot.
std::vector<std::vector<std::string>> noise_alternatives(const Schema& schema, const std::vector<Dialogue>& dialogues);

struct TrackOptions {
  Strategy strategy = Strategy::msp;
  NoiseConfig noise;
};

// Value a hit decision reads out: ontology entry or the span text.
SlotValue hit_value(const SlotDef& slot, const SlotDecision& d, const TokenizedContext& ctx);

struct SlotUpdate {
  SlotValue value;
  Disposition disposition = Disposition::none;
  int mention_index = -1;
  int mention_source = -1;
};

// The strategy's update rule for one slot.
SlotUpdate update_slot(Strategy strategy, const SlotDef& slot, const SlotValue& previous, const SlotDecision& d,
                       const SlotPool* pool, const TokenizedContext& ctx, const Normalizer& norm);

// Turn-by-turn tracking of one dialogue; keeps the predicted state between
// steps. Batch tracking and the interactive loop both go through here.
class TrackingSession {
 public:
  TrackingSession(TurnPredictor& predictor, const Schema& schema, TrackOptions opts, std::string dialogue_id = "");

  // Feeds the next turn (its gold state is only read by oracle predictors)
  // and returns the trace records of that turn, one per slot.
  std::vector<TraceRecord> step(const Turn& turn);
  void reset(std::string dialogue_id = "");

  const DialogueState& state() const { return state_; }
  int turns() const { return static_cast<int>(history_.turns.size()); }

 private:
  TurnPredictor& predictor_;
  const Schema& schema_;
  TrackOptions opts_;
  Dialogue history_;
  DialogueState state_;
  std::vector<bool> extracted_;
};

struct TrackResult {
  std::string dialogue_id;
  std::vector<DialogueState> states;  // one per turn
  std::vector<TraceRecord> trace;     // turns x slots, schema order within a turn
};

// Throws ConfigError when the predictor was built for another strategy.
TrackResult track_dialogue(TurnPredictor& predictor, const Dialogue& dialogue, const Schema& schema,
                           const TrackOptions& opts);
std::vector<TrackResult> track_corpus(TurnPredictor& predictor, const std::vector<Dialogue>& dialogues,
                                      const Schema& schema, const TrackOptions& opts);

void write_trace(const std::vector<TrackResult>& results, const std::filesystem::path& path);
std::vector<TraceRecord> read_trace(const std::filesystem::path& path);

}  // namespace msp
