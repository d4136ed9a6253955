#pragma once

#include "msp_dst/tracker/tracker.hpp"

#include <nlohmann/json.hpp>

namespace msp {

struct InheritCounters {
  long error_count = 0;       // wrong (turn, slot) predictions
  long inherit_error = 0;     // wrong because a wrong value was inherited or an indirect mention was missed
  long revision_success = 0;  // wrong at t-1, right at t through a revision
  long indirect_tracked = 0;  // indirect events where the gold source entry was selected
  long indirect_total = 0;

  nlohmann::json to_json() const;
  bool operator==(const InheritCounters&) const = default;
};

// Traces must be turn-major with schema-ordered slots (as track_dialogue
// produces). Events of dialogues absent from `tracks` are ignored. Throws
// DimensionError when traces and gold dialogues do not line up.
InheritCounters inherit_analysis(const std::vector<TrackResult>& tracks, const std::vector<Dialogue>& golds,
                                 const std::vector<PhenomenonEvent>& events, const Schema& schema);

}  // namespace msp
