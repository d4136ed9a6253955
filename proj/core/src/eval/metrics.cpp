#include "msp_dst/eval/metrics.hpp"

#include "msp_dst/common/error.hpp"

namespace msp {

std::string to_string(Outcome o) {
  switch (o) {
    case Outcome::tp:
      return "TP";
    case Outcome::tn:
      return "TN";
    case Outcome::fp:
      return "FP";
    case Outcome::fn:
      return "FN";
    case Outcome::plfp:
      return "PLFP";
  }
  return "TN";
}

Outcome classify(const SlotValue& pred, const SlotValue& gold, const Normalizer& norm) {
  if (gold.is_none()) return pred.is_none() ? Outcome::tn : Outcome::fp;
  if (pred.is_none()) return Outcome::fn;
  return pred.matches(gold, norm) ? Outcome::tp : Outcome::plfp;
}

void OutcomeCounts::add(Outcome o) {
  switch (o) {
    case Outcome::tp:
      ++tp;
      break;
    case Outcome::tn:
      ++tn;
      break;
    case Outcome::fp:
      ++fp;
      break;
    case Outcome::fn:
      ++fn;
      break;
    case Outcome::plfp:
      ++plfp;
      break;
  }
}

OutcomeCounts& OutcomeCounts::operator+=(const OutcomeCounts& o) {
  tp += o.tp;
  tn += o.tn;
  fp += o.fp;
  fn += o.fn;
  plfp += o.plfp;
  return *this;
}

nlohmann::json SlotReport::to_json() const {
  return {{"slot", slot},
          {"counts", {{"TP", counts.tp}, {"TN", counts.tn}, {"FP", counts.fp}, {"FN", counts.fn}, {"PLFP", counts.plfp}}},
          {"accuracy", accuracy},
          {"precision", precision},
          {"recall", recall},
          {"f1", f1},
          {"undefined",
           {{"accuracy", accuracy_undefined},
            {"precision", precision_undefined},
            {"recall", recall_undefined},
            {"f1", f1_undefined}}}};
}

namespace {

double ratio(long num, long den, bool& undefined) {
  undefined = den == 0;
  return undefined ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

void check_aligned(const std::vector<DialogueState>& preds, const std::vector<DialogueState>& golds) {
  if (preds.size() != golds.size()) throw DimensionError("prediction and gold turn counts differ");
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i].size() != golds[i].size()) throw DimensionError("prediction and gold slot counts differ");
  }
}

}  // namespace

SlotReport finalize_slot_report(std::string slot, const OutcomeCounts& c) {
  SlotReport r;
  r.slot = std::move(slot);
  r.counts = c;
  r.accuracy = ratio(c.tp + c.tn, c.total(), r.accuracy_undefined);
  r.precision = ratio(c.tp, c.tp + c.fp, r.precision_undefined);
  r.recall = ratio(c.tp, c.tp + c.fn + c.plfp, r.recall_undefined);
  const double sum = r.precision + r.recall;
  r.f1_undefined = sum == 0.0;
  r.f1 = r.f1_undefined ? 0.0 : 2.0 * r.precision * r.recall / sum;
  return r;
}

double joint_goal_accuracy(const std::vector<DialogueState>& preds, const std::vector<DialogueState>& golds,
                           const Normalizer& norm) {
  check_aligned(preds, golds);
  if (preds.empty()) return 0.0;
  long correct = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    bool all = true;
    for (std::size_t s = 0; s < preds[i].size() && all; ++s) all = preds[i].values[s].matches(golds[i].values[s], norm);
    correct += all;
  }
  return static_cast<double>(correct) / static_cast<double>(preds.size());
}

std::vector<SlotReport> slot_metrics(const std::vector<DialogueState>& preds, const std::vector<DialogueState>& golds,
                                     const Schema& schema) {
  check_aligned(preds, golds);
  std::vector<OutcomeCounts> counts(schema.size());
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i].size() != schema.size()) throw DimensionError("state does not cover the schema");
    for (std::size_t s = 0; s < schema.size(); ++s) {
      counts[s].add(classify(preds[i].values[s], golds[i].values[s], schema.normalizer()));
    }
  }
  std::vector<SlotReport> out;
  for (std::size_t s = 0; s < schema.size(); ++s) out.push_back(finalize_slot_report(schema.slot(s).name, counts[s]));
  return out;
}

std::map<std::string, double> domain_jga(const std::vector<DialogueState>& preds,
                                         const std::vector<DialogueState>& golds, const Schema& schema) {
  check_aligned(preds, golds);
  std::map<std::string, double> out;
  for (const auto& domain : schema.domains()) {
    std::vector<std::size_t> slots;
    for (std::size_t s = 0; s < schema.size(); ++s) {
      if (schema.slot(s).domain == domain) slots.push_back(s);
    }
    long active = 0, correct = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
      bool is_active = false;
      bool all = true;
      for (std::size_t s : slots) {
        is_active = is_active || !golds[i].values[s].is_none();
        all = all && preds[i].values[s].matches(golds[i].values[s], schema.normalizer());
      }
      if (!is_active) continue;
      ++active;
      correct += all;
    }
    if (active > 0) out[domain] = static_cast<double>(correct) / static_cast<double>(active);
  }
  return out;
}

std::vector<DialogueState> gold_states(const std::vector<Dialogue>& dialogues) {
  std::vector<DialogueState> out;
  for (const auto& d : dialogues) {
    for (const auto& t : d.turns) out.push_back(t.gold);
  }
  return out;
}

}  // namespace msp
