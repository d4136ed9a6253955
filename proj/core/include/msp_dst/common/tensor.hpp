#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

namespace msp {

// Row-major so that one row is one token / one pool entry.
template <class S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class S>
using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;

// Index of the largest entry; ties resolve to the lowest index.
template <class Derived>
int argmax(const Eigen::MatrixBase<Derived>& v) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(v.size()); ++i) {
    if (v(i) > v(best)) best = i;
  }
  return best;
}

// Numerically stable normalized exponential.
template <class S>
Vec<S> softmax(const Vec<S>& logits) {
  Vec<S> out(logits.size());
  if (logits.size() == 0) return out;
  const S peak = logits.maxCoeff();
  out = (logits.array() - peak).exp().matrix();
  out /= out.sum();
  return out;
}

// Normalized exponential restricted to entries with mask == true. Masked
// entries get probability exactly 0; an all-masked input yields all zeros.
template <class S>
Vec<S> masked_softmax(const Vec<S>& scores, const std::vector<bool>& mask) {
  Vec<S> out = Vec<S>::Zero(scores.size());
  S peak = -std::numeric_limits<S>::infinity();
  for (int i = 0; i < scores.size(); ++i) {
    if (mask[static_cast<std::size_t>(i)] && scores(i) > peak) peak = scores(i);
  }
  if (!std::isfinite(static_cast<double>(peak))) return out;
  S total = 0;
  for (int i = 0; i < scores.size(); ++i) {
    if (mask[static_cast<std::size_t>(i)]) {
      out(i) = std::exp(scores(i) - peak);
      total += out(i);
    }
  }
  out /= total;
  return out;
}

// Argmax over unmasked entries (lowest index on ties), -1 when all masked.
template <class S>
int masked_argmax(const Vec<S>& v, const std::vector<bool>& mask) {
  int best = -1;
  for (int i = 0; i < v.size(); ++i) {
    if (!mask[static_cast<std::size_t>(i)]) continue;
    if (best < 0 || v(i) > v(best)) best = i;
  }
  return best;
}

}  // namespace msp
