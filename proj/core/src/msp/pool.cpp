#include "msp_dst/msp/pool.hpp"

#include "msp_dst/common/error.hpp"

#include <algorithm>
#include <numeric>

namespace msp {

std::string to_string(PoolMode mode) { return mode == PoolMode::self ? "self" : "full"; }

PoolMode parse_pool_mode(std::string_view s) {
  if (s == "self") return PoolMode::self;
  if (s == "full") return PoolMode::full;
  throw ConfigError("unknown pool mode: " + std::string(s) + " (expected self or full)");
}

int SlotPool::real_count() const {
  return static_cast<int>(std::count(mask.begin(), mask.end(), true));
}

std::vector<PoolEntry> pool_candidates(std::size_t slot, const DialogueState& prev,
                                       const Schema& schema, PoolMode mode) {
  std::vector<PoolEntry> out;
  auto consider = [&](std::size_t s) {
    const auto& v = prev.values[s];
    if (!v.is_concrete()) return;
    out.push_back({static_cast<int>(s), v, prev.last_updated.empty() ? 0 : prev.last_updated[s]});
  };
  consider(slot);
  if (mode == PoolMode::full) {
    for (std::size_t r : schema.relevant(slot)) consider(r);
  }
  return out;
}

std::vector<PoolEntry> keep_latest(std::vector<PoolEntry> candidates, int capacity) {
  if (static_cast<int>(candidates.size()) <= capacity) return candidates;
  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return candidates[a].updated_turn > candidates[b].updated_turn;
  });
  order.resize(static_cast<std::size_t>(std::max(capacity, 0)));
  std::sort(order.begin(), order.end());
  std::vector<PoolEntry> out;
  out.reserve(order.size());
  for (std::size_t i : order) out.push_back(std::move(candidates[i]));
  return out;
}

SlotPool build_slot_pool(std::size_t slot, const DialogueState& prev, const Schema& schema,
                         int capacity, PoolMode mode) {
  if (capacity < 1) throw ConfigError("pool capacity must be positive");
  SlotPool pool;
  pool.entries = keep_latest(pool_candidates(slot, prev, schema, mode), capacity);
  pool.mask.assign(pool.entries.size(), true);
  pool.entries.resize(static_cast<std::size_t>(capacity));
  pool.mask.resize(static_cast<std::size_t>(capacity), false);
  return pool;
}

int find_in_pool(const SlotPool& pool, std::size_t self_slot, const SlotValue& value,
                 const Normalizer& norm) {
  int found = -1;
  for (int i = 0; i < pool.capacity(); ++i) {
    if (!pool.mask[static_cast<std::size_t>(i)]) continue;
    const auto& e = pool.entries[static_cast<std::size_t>(i)];
    if (!e.value.matches(value, norm)) continue;
    if (e.source_slot == static_cast<int>(self_slot)) return i;
    if (found < 0) found = i;
  }
  return found;
}

}  // namespace msp
