#pragma once

#include "msp_dst/corpus/dialogue.hpp"

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace msp {

enum class Outcome { tp, tn, fp, fn, plfp };

std::string to_string(Outcome o);

// TP: gold non-none and matched; TN: both none; FP: gold none, predicted
// non-none; FN: gold non-none, predicted none; PLFP: both non-none, wrong.
// dontcare counts as a non-none value.
Outcome classify(const SlotValue& pred, const SlotValue& gold, const Normalizer& norm);

struct OutcomeCounts {
  long tp = 0, tn = 0, fp = 0, fn = 0, plfp = 0;

  long total() const { return tp + tn + fp + fn + plfp; }
  void add(Outcome o);
  OutcomeCounts& operator+=(const OutcomeCounts& o);
  bool operator==(const OutcomeCounts&) const = default;
};

struct SlotReport {
  std::string slot;
  OutcomeCounts counts;
  double accuracy = 0;   // (TP + TN) / total
  double precision = 0;  // TP / (TP + FP)
  double recall = 0;     // TP / (TP + FN + PLFP)
  double f1 = 0;
  // Zero denominators report 0 and set the flag.
  bool accuracy_undefined = false;
  bool precision_undefined = false;
  bool recall_undefined = false;
  bool f1_undefined = false;

  nlohmann::json to_json() const;
};

SlotReport finalize_slot_report(std::string slot, const OutcomeCounts& counts);

// Fraction of turns with every slot matched; throws DimensionError when the
// sequences differ in length. An empty sequence yields 0.
double joint_goal_accuracy(const std::vector<DialogueState>& preds, const std::vector<DialogueState>& golds,
                           const Normalizer& norm = {});

std::vector<SlotReport> slot_metrics(const std::vector<DialogueState>& preds, const std::vector<DialogueState>& golds,
                                     const Schema& schema);

// Per domain: JGA over that domain's slots on turns where at least one of
// them is non-none in gold. Domains with no such turn are absent.
std::map<std::string, double> domain_jga(const std::vector<DialogueState>& preds,
                                         const std::vector<DialogueState>& golds, const Schema& schema);

// Gold states of every turn, dialogues in order.
std::vector<DialogueState> gold_states(const std::vector<Dialogue>& dialogues);

}  // namespace msp
