#pragma once

#include "msp_dst/eval/analysis.hpp"
#include "msp_dst/eval/metrics.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace msp {

struct MetricsReport {
  std::string strategy;
  long dialogues = 0;
  long turns = 0;
  double jga = 0;
  std::map<std::string, double> domain_jga;
  std::vector<SlotReport> slots;
  std::optional<InheritCounters> inherit;

  nlohmann::json to_json() const;
  // Per-slot table in the style of an error-distribution listing.
  std::string render_text() const;
};

// Metrics of tracked dialogues against their gold states; the inherit
// counters are filled when `events` is given.
MetricsReport build_report(const std::vector<TrackResult>& tracks, const std::vector<Dialogue>& golds,
                           const Schema& schema, Strategy strategy,
                           const std::vector<PhenomenonEvent>* events = nullptr);

double median(std::vector<double> values);

struct RunScore {
  Strategy strategy = Strategy::msp;
  std::uint64_t seed = 0;
  double jga = 0;
};

struct StrategySummary {
  Strategy strategy = Strategy::msp;
  std::vector<double> jgas;  // in seed order of the runs
  double median = 0;
};

struct ComparisonTable {
  std::vector<RunScore> runs;
  std::vector<StrategySummary> summary;  // pure_context, changed_state, full_state, msp (present ones)

  const StrategySummary* find(Strategy s) const;
  nlohmann::json to_json() const;
  std::string render_text() const;
};

ComparisonTable compare_strategies(std::vector<RunScore> runs);

}  // namespace msp
