#pragma once

#include "msp_dst/corpus/labels.hpp"
#include "msp_dst/msp/fusion.hpp"

#include <optional>

namespace msp {

// Class order of the four-way head: none, dontcare, mentioned, hit. The
// pool-free strategies use none, dontcare, hit.
template <class S>
Vec<S> predict_hit_type(const Vec<S>& m_fused, const Vec<S>& r_cls, const Mat<S>& W, const Eigen::Ref<const Vec<S>>& b) {
  if (m_fused.size() != r_cls.size() || W.cols() != r_cls.size() || W.rows() != b.size()) {
    throw DimensionError("predict_hit_type: dimension mismatch");
  }
  return softmax<S>(W * (m_fused + r_cls) + b);
}

template <class S>
struct MentionSelection {
  Vec<S> probs;    // K, exactly zero on pads
  int index = -1;  // -1 when every entry is a pad
};

template <class S>
MentionSelection<S> select_mentioned(const Vec<S>& r_cls, const MentionedSlotPool<S>& pool, const Mat<S>& W) {
  if (W.rows() != r_cls.size() || W.cols() != pool.reps.cols()) {
    throw DimensionError("select_mentioned: dimension mismatch");
  }
  const Vec<S> scores = pool.reps * (W.transpose() * r_cls);
  MentionSelection<S> out;
  out.probs = masked_softmax<S>(scores, pool.mask());
  out.index = masked_argmax<S>(scores, pool.mask());
  return out;
}

template <class S>
struct CategoricalPrediction {
  Vec<S> probs;
  int index = 0;
};

template <class S>
CategoricalPrediction<S> predict_categorical(const Vec<S>& m_fused, const Vec<S>& r_cls, const Mat<S>& W,
                                             const Eigen::Ref<const Vec<S>>& b) {
  if (m_fused.size() != r_cls.size() || W.cols() != r_cls.size() || W.rows() != b.size()) {
    throw DimensionError("predict_categorical: dimension mismatch");
  }
  CategoricalPrediction<S> out;
  out.probs = softmax<S>(W * (m_fused + r_cls) + b);
  out.index = argmax(out.probs);
  return out;
}

template <class S>
struct SpanPrediction {
  Vec<S> start;  // per token
  Vec<S> end;
  int start_index = 0;
  int end_index = 0;
  std::optional<Span> span;  // empty when start > end
};

// W is 2 x n (start row, end row), b has 2 entries.
template <class S>
SpanPrediction<S> predict_span(const Mat<S>& tokens, const Mat<S>& W, const Eigen::Ref<const Vec<S>>& b) {
  if (tokens.rows() == 0) throw DimensionError("predict_span: no tokens");
  if (W.rows() != 2 || W.cols() != tokens.cols() || b.size() != 2) {
    throw DimensionError("predict_span: dimension mismatch");
  }
  const Mat<S> logits = tokens * W.transpose();
  SpanPrediction<S> out;
  out.start = softmax<S>((logits.col(0).array() + b(0)).matrix());
  out.end = softmax<S>((logits.col(1).array() + b(1)).matrix());
  out.start_index = argmax(out.start);
  out.end_index = argmax(out.end);
  if (out.start_index <= out.end_index) out.span = Span{out.start_index, out.end_index};
  return out;
}

// ---- gradients of weight * (-log p[label]) ----

// For softmax(W z + b); returns dLoss/dz.
template <class S>
Vec<S> linear_softmax_backward(const Vec<S>& z, const Vec<S>& probs, int label, S weight, const Mat<S>& W,
                               Mat<S>& dW, Eigen::Ref<Vec<S>> db) {
  Vec<S> dlogits = probs * weight;
  dlogits(label) -= weight;
  dW.noalias() += dlogits * z.transpose();
  db += dlogits;
  return W.transpose() * dlogits;
}

// Returns dLoss/dr_cls.
template <class S>
Vec<S> mention_backward(const Vec<S>& r_cls, const MentionedSlotPool<S>& pool, const Vec<S>& probs, int label,
                        S weight, const Mat<S>& W, Mat<S>& dW) {
  Vec<S> dscores = probs * weight;
  dscores(label) -= weight;
  const Vec<S> mix = pool.reps.transpose() * dscores;
  dW.noalias() += r_cls * mix.transpose();
  return W * mix;
}

// For weight * -(log p_start + log p_end) / 2; returns dLoss/dtokens.
template <class S>
Mat<S> span_backward(const Mat<S>& tokens, const SpanPrediction<S>& pred, const Span& label, S weight,
                     const Mat<S>& W, Mat<S>& dW, Eigen::Ref<Vec<S>> db) {
  Mat<S> dlogits(tokens.rows(), 2);
  const S half = weight / S(2);
  dlogits.col(0) = pred.start * half;
  dlogits.col(1) = pred.end * half;
  dlogits(label.start, 0) -= half;
  dlogits(label.end, 1) -= half;
  dW.noalias() += dlogits.transpose() * tokens;
  db += dlogits.colwise().sum().transpose();
  return dlogits * W;
}

}  // namespace msp
