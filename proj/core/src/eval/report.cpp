#include "msp_dst/eval/report.hpp"

#include "msp_dst/common/error.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace msp {

namespace {

std::string fixed(double v, int digits = 4) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

std::string lpad(const std::string& s, std::size_t width) {
  return s.size() < width ? std::string(width - s.size(), ' ') + s : s;
}

}  // namespace

nlohmann::json MetricsReport::to_json() const {
  nlohmann::json slots_json = nlohmann::json::array();
  for (const auto& s : slots) slots_json.push_back(s.to_json());
  nlohmann::json j = {{"strategy", strategy}, {"dialogues", dialogues}, {"turns", turns},
                      {"jga", jga},           {"domain_jga", domain_jga}, {"slots", slots_json}};
  j["inherit"] = inherit ? inherit->to_json() : nlohmann::json(nullptr);
  return j;
}

std::string MetricsReport::render_text() const {
  std::ostringstream out;
  out << "strategy " << strategy << ", " << dialogues << " dialogues, " << turns << " turns\n";
  out << "JGA " << fixed(100 * jga, 2) << "\n";
  for (const auto& [d, v] : domain_jga) out << "  " << pad(d, 24) << fixed(100 * v, 2) << "\n";
  out << "\n" << pad("slot", 28) << lpad("acc", 8) << lpad("prec", 8) << lpad("rec", 8) << lpad("f1", 8)
      << lpad("TP", 7) << lpad("TN", 7) << lpad("FP", 7) << lpad("FN", 7) << lpad("PLFP", 7) << "\n";
  for (const auto& s : slots) {
    out << pad(s.slot, 28) << lpad(fixed(s.accuracy), 8) << lpad(fixed(s.precision), 8) << lpad(fixed(s.recall), 8)
        << lpad(fixed(s.f1), 8) << lpad(std::to_string(s.counts.tp), 7) << lpad(std::to_string(s.counts.tn), 7)
        << lpad(std::to_string(s.counts.fp), 7) << lpad(std::to_string(s.counts.fn), 7)
        << lpad(std::to_string(s.counts.plfp), 7) << "\n";
  }
  if (inherit) {
    out << "\nerrors " << inherit->error_count << ", inherit errors " << inherit->inherit_error
        << ", revision successes " << inherit->revision_success << ", indirect tracked " << inherit->indirect_tracked
        << "/" << inherit->indirect_total << "\n";
  }
  return out.str();
}

MetricsReport build_report(const std::vector<TrackResult>& tracks, const std::vector<Dialogue>& golds,
                           const Schema& schema, Strategy strategy, const std::vector<PhenomenonEvent>* events) {
  if (tracks.size() != golds.size()) throw DimensionError("trace and gold dialogue counts differ");
  std::vector<DialogueState> preds;
  for (const auto& t : tracks) preds.insert(preds.end(), t.states.begin(), t.states.end());
  const auto gold = gold_states(golds);
  MetricsReport r;
  r.strategy = to_string(strategy);
  r.dialogues = static_cast<long>(golds.size());
  r.turns = static_cast<long>(gold.size());
  r.jga = joint_goal_accuracy(preds, gold, schema.normalizer());
  r.domain_jga = domain_jga(preds, gold, schema);
  r.slots = slot_metrics(preds, gold, schema);
  if (events) r.inherit = inherit_analysis(tracks, golds, *events, schema);
  return r;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

const StrategySummary* ComparisonTable::find(Strategy s) const {
  for (const auto& x : summary) {
    if (x.strategy == s) return &x;
  }
  return nullptr;
}

ComparisonTable compare_strategies(std::vector<RunScore> runs) {
  ComparisonTable t;
  std::stable_sort(runs.begin(), runs.end(), [](const RunScore& a, const RunScore& b) {
    return a.strategy != b.strategy ? a.strategy < b.strategy : a.seed < b.seed;
  });
  t.runs = std::move(runs);
  for (Strategy s : {Strategy::pure_context, Strategy::changed_state, Strategy::full_state, Strategy::msp}) {
    StrategySummary sum;
    sum.strategy = s;
    for (const auto& r : t.runs) {
      if (r.strategy == s) sum.jgas.push_back(r.jga);
    }
    if (sum.jgas.empty()) continue;
    sum.median = median(sum.jgas);
    t.summary.push_back(std::move(sum));
  }
  return t;
}

nlohmann::json ComparisonTable::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : runs) rows.push_back({{"strategy", to_string(r.strategy)}, {"seed", r.seed}, {"jga", r.jga}});
  nlohmann::json med = nlohmann::json::object();
  for (const auto& s : summary) med[to_string(s.strategy)] = s.median;
  return {{"runs", rows}, {"median_jga", med}};
}

std::string ComparisonTable::render_text() const {
  std::ostringstream out;
  out << pad("strategy", 16) << lpad("seed", 8) << lpad("JGA", 9) << "\n";
  for (const auto& r : runs) {
    out << pad(to_string(r.strategy), 16) << lpad(std::to_string(r.seed), 8) << lpad(fixed(100 * r.jga, 2), 9) << "\n";
  }
  out << "\n" << pad("strategy", 16) << lpad("median", 17) << "\n";
  for (const auto& s : summary) out << pad(to_string(s.strategy), 16) << lpad(fixed(100 * s.median, 2), 17) << "\n";
  return out.str();
}

}  // namespace msp
