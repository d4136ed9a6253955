#include "msp_dst/eval/analysis.hpp"

#include "msp_dst/common/error.hpp"

#include <map>
#include <tuple>
#include <unordered_map>

namespace msp {

nlohmann::json InheritCounters::to_json() const {
  return {{"error_count", error_count},
          {"inherit_error", inherit_error},
          {"revision_success", revision_success},
          {"indirect_tracked", indirect_tracked},
          {"indirect_total", indirect_total}};
}

InheritCounters inherit_analysis(const std::vector<TrackResult>& tracks, const std::vector<Dialogue>& golds,
                                 const std::vector<PhenomenonEvent>& events, const Schema& schema) {
  if (tracks.size() != golds.size()) throw DimensionError("trace and gold dialogue counts differ");
  using Key = std::tuple<std::string, int, std::string>;
  std::map<Key, std::string> indirect;  // (dialogue, turn, slot) -> source slot
  for (const auto& e : events) {
    if (e.kind == EventKind::indirect) indirect[{e.dialogue_id, e.turn, e.slot}] = e.source;
  }

  const std::size_t S = schema.size();
  const Normalizer& norm = schema.normalizer();
  InheritCounters c;
  for (std::size_t d = 0; d < tracks.size(); ++d) {
    const TrackResult& tr = tracks[d];
    const Dialogue& gold = golds[d];
    const std::size_t T = gold.turns.size();
    if (tr.dialogue_id != gold.id || tr.trace.size() != T * S) {
      throw DimensionError("trace of " + tr.dialogue_id + " does not line up with gold dialogue " + gold.id);
    }
    auto rec = [&](std::size_t t, std::size_t s) -> const TraceRecord& { return tr.trace[(t - 1) * S + s]; };
    auto wrong = [&](std::size_t t, std::size_t s) {
      return !rec(t, s).value.matches(gold.turns[t - 1].gold.values[s], norm);
    };
    for (std::size_t t = 1; t <= T; ++t) {
      for (std::size_t s = 0; s < S; ++s) {
        const TraceRecord& r = rec(t, s);
        if (r.turn != static_cast<int>(t) || r.slot != schema.slot(s).name) {
          throw DimensionError("trace of " + tr.dialogue_id + " is not turn-major in schema order");
        }
        const auto ev = indirect.find({gold.id, static_cast<int>(t), r.slot});
        if (wrong(t, s)) {
          ++c.error_count;
          bool inherited_wrong = false;
          if (r.disposition == Disposition::inherited && t > 1) {
            std::size_t src = s;
            if (!r.mention_source.empty()) src = schema.index_of(r.mention_source);
            inherited_wrong = wrong(t - 1, src);
          }
          if (inherited_wrong || ev != indirect.end()) ++c.inherit_error;
        } else if (t > 1 && r.disposition == Disposition::revised && wrong(t - 1, s)) {
          ++c.revision_success;
        }
        if (ev != indirect.end()) {
          ++c.indirect_total;
          bool tracked = r.hit_type == HitType::mentioned && r.mention_index >= 0;
          if (tracked) {
            tracked = ev->second.empty() ? !wrong(t, s) : r.mention_source == ev->second;
          }
          c.indirect_tracked += tracked;
        }
      }
    }
  }
  return c;
}

}  // namespace msp
