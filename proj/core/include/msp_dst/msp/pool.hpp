#pragma once

#include "msp_dst/corpus/dialogue.hpp"

#include <string>
#include <vector>

namespace msp {

inline constexpr int kDefaultPoolCapacity = 4;

// full: the slot's own previous value plus its relevant slots' values.
// self: only the slot's own previous value.
enum class PoolMode { self, full };

std::string to_string(PoolMode mode);
PoolMode parse_pool_mode(std::string_view s);

struct PoolEntry {
  int source_slot = -1;  // -1 for padding
  SlotValue value;
  int updated_turn = 0;

  bool padding() const { return source_slot < 0; }
};

// Text-level mentioned slot pool: exactly `capacity` entries, mask[i] true for
// real entries. Real entries come first (self, then relevant slots in schema
// order), padding after.
struct SlotPool {
  std::vector<PoolEntry> entries;
  std::vector<bool> mask;

  int capacity() const { return static_cast<int>(entries.size()); }
  int real_count() const;
  bool empty() const { return real_count() == 0; }
};

// Candidate entries for `slot` from the previous state: own value (if concrete)
// then relevant slots with concrete values, in schema order. dontcare and none
// never qualify.
std::vector<PoolEntry> pool_candidates(std::size_t slot, const DialogueState& prev,
                                       const Schema& schema, PoolMode mode = PoolMode::full);

// Keeps the `capacity` most recently updated candidates. Ties on updated_turn
// prefer earlier candidates (self first, then schema order). Relative order of
// the survivors is preserved.
std::vector<PoolEntry> keep_latest(std::vector<PoolEntry> candidates, int capacity);

SlotPool build_slot_pool(std::size_t slot, const DialogueState& prev, const Schema& schema,
                         int capacity = kDefaultPoolCapacity, PoolMode mode = PoolMode::full);

// Index of the pool entry matching `value` after normalization; the self entry
// wins ties, then schema order (= entry order). -1 if absent.
int find_in_pool(const SlotPool& pool, std::size_t self_slot, const SlotValue& value,
                 const Normalizer& norm);

}  // namespace msp
