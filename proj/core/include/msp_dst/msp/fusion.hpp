#pragma once

#include "msp_dst/common/error.hpp"
#include "msp_dst/common/tensor.hpp"
#include "msp_dst/encoder/embedding.hpp"
#include "msp_dst/msp/pool.hpp"

namespace msp {

// A text-level pool plus one representation row per entry (zero for pads).
template <class S>
struct MentionedSlotPool {
  SlotPool pool;
  Mat<S> reps;  // K x n

  int capacity() const { return pool.capacity(); }
  const std::vector<bool>& mask() const { return pool.mask; }
};

// Entry representation: mean value embedding plus the mean embedding of the
// source slot's name, so that equal values from different slots stay
// distinguishable to the selection head.
template <class S>
Vec<S> pool_entry_rep(const PoolEntry& e, const Schema& schema, const EmbeddingTable<S>& table) {
  return embed_text(tokenize(e.value.text()), table) +
         embed_text(split_slot_name(schema.slot(static_cast<std::size_t>(e.source_slot)).name), table);
}

template <class S>
MentionedSlotPool<S> attach_representations(SlotPool pool, const Schema& schema, const EmbeddingTable<S>& table) {
  MentionedSlotPool<S> out;
  out.reps = Mat<S>::Zero(pool.capacity(), table.dim());
  for (int i = 0; i < pool.capacity(); ++i) {
    const auto& e = pool.entries[static_cast<std::size_t>(i)];
    if (pool.mask[static_cast<std::size_t>(i)]) out.reps.row(i) = pool_entry_rep(e, schema, table).transpose();
  }
  out.pool = std::move(pool);
  return out;
}

template <class S>
MentionedSlotPool<S> build_msp(std::size_t slot, const DialogueState& prev, const Schema& schema, int capacity,
                               const EmbeddingTable<S>& table, PoolMode mode = PoolMode::full) {
  return attach_representations(build_slot_pool(slot, prev, schema, capacity, mode), schema, table);
}


template <class S>
struct FusionResult {
  Vec<S> fused;
  Vec<S> weights;  // K, zero on pads
  Vec<S> query;    // r_slot + r_cls
};

// Attention over pool entries with scores (r_slot + r_cls)^T W m_i; pads are
// excluded from the normalization. An all-pad pool fuses to zero.
template <class S>
FusionResult<S> fuse(const MentionedSlotPool<S>& pool, const Vec<S>& r_slot, const Vec<S>& r_cls, const Mat<S>& W) {
  const auto n = r_cls.size();
  if (r_slot.size() != n || W.rows() != n || W.cols() != n || pool.reps.cols() != n) {
    throw DimensionError("fuse: dimension mismatch");
  }
  FusionResult<S> r;
  r.query = r_slot + r_cls;
  const Vec<S> scores = pool.reps * (W.transpose() * r.query);
  r.weights = masked_softmax<S>(scores, pool.mask());
  r.fused = pool.reps.transpose() * r.weights;
  return r;
}

// Backward of fuse for dLoss/dfused. Adds to dW and returns dLoss/dr_cls
// (r_slot comes from the frozen table).
template <class S>
Vec<S> fuse_backward(const MentionedSlotPool<S>& pool, const FusionResult<S>& r, const Mat<S>& W,
                     const Vec<S>& dfused, Mat<S>& dW) {
  const Vec<S> dw = pool.reps * dfused;
  const S mean = r.weights.dot(dw);
  const Vec<S> dscores = (r.weights.array() * (dw.array() - mean)).matrix();
  const Vec<S> mix = pool.reps.transpose() * dscores;
  dW.noalias() += r.query * mix.transpose();
  return W * mix;
}

}  // namespace msp
