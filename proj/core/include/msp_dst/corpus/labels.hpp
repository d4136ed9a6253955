#pragma once

#include "msp_dst/corpus/dialogue.hpp"
#include "msp_dst/encoder/tokenize.hpp"
#include "msp_dst/msp/pool.hpp"
#include "msp_dst/tracker/strategy.hpp"

#include <optional>
#include <span>
#include <vector>

namespace msp {

enum class HitType { none = 0, dontcare = 1, mentioned = 2, hit = 3 };

std::string to_string(HitType t);
HitType parse_hit_type(std::string_view s);

// Class index of a hit type under a strategy's head (3 or 4 classes).
int type_class(HitType t, Strategy s);
HitType type_from_class(int cls, Strategy s);

struct Span {
  int start = 0;
  int end = 0;
  bool operator==(const Span&) const = default;
};

// Most recent occurrence of the normalized value inside tokens[begin, end).
// Indices are absolute positions in `tokens`.
std::optional<Span> find_span(std::string_view value, std::span<const std::string> tokens,
                              const Normalizer& norm = {}, int begin = 0, int end = -1);

struct LabelOptions {
  Strategy strategy = Strategy::msp;
  int max_len = 512;
  int pool_capacity = kDefaultPoolCapacity;
  PoolMode pool_mode = PoolMode::full;
  bool categorical_heads = true;
};

struct TrainingExample {
  int turn = 0;
  int slot = 0;
  HitType type = HitType::none;
  std::optional<int> mention_index;
  std::optional<int> categorical_label;
  std::optional<Span> span_label;
  // Hit example whose value could not be located; kept for the type loss only.
  bool unmatched = false;
};

// Everything needed to train one turn: the encoder input, the teacher-forced
// pools and one example per slot (schema order).
struct LabeledTurn {
  int turn = 0;
  TokenizedContext context;
  std::vector<SlotPool> pools;  // empty unless the strategy uses pools
  std::vector<TrainingExample> examples;
};

// Whether the slot is read from a span under these options (span slots always;
// categorical slots when categorical heads are disabled).
bool reads_span(const SlotDef& slot, const LabelOptions& opts);

// Encoder input for turn t: context utterances, plus the previous state string
// for full_state.
TokenizedContext build_turn_context(const Dialogue& dialogue, int t, const DialogueState* prev_state,
                                    const Schema& schema, const LabelOptions& opts);

// Label of one slot at one turn.
//  msp:           none / dontcare by value; hit if the value is stated in the
//                 latest turn; else mentioned if it is in the pool; else hit.
//  pure_context,
//  full_state:    none / dontcare / hit by the gold value.
//  changed_state: hit (or dontcare) when the value changed at this turn,
//                 none otherwise.
TrainingExample label_slot(std::size_t slot, int turn, const SlotValue& gold,
                           const SlotValue& previous, const SlotPool* pool,
                           const TokenizedContext& ctx, const Schema& schema,
                           const LabelOptions& opts);

// Teacher-forced labeling of every turn (pools and state strings built from
// the gold previous state).
std::vector<LabeledTurn> label_dialogue(const Dialogue& dialogue, const Schema& schema,
                                        const LabelOptions& opts = {});

// Flattened per-(turn, slot) examples of label_dialogue.
std::vector<TrainingExample> derive_labels(const Dialogue& dialogue, const Schema& schema,
                                           const LabelOptions& opts = {});

}  // namespace msp
