#pragma once

#include "msp_dst/corpus/labels.hpp"
#include "msp_dst/model/model.hpp"

#include <vector>

namespace msp {

// Batch-level forms of the three losses over already computed distributions.
// Each sums -log(p[label]) with the probability floored at 1e-12; `clamped`
// (if given) counts floor hits.

struct ClassExample {
  std::vector<double> probs;
  int label = 0;
};

struct MentionExample {
  std::vector<double> probs;
  std::vector<bool> mask;
  int label = 0;
};

struct SpanExample {
  std::vector<double> start;
  std::vector<double> end;
  Span label;
};

struct HitBatch {
  std::vector<ClassExample> categorical;
  std::vector<SpanExample> span;
};

double loss_type(const std::vector<ClassExample>& batch, int* clamped = nullptr);
// Throws ConfigError when a label points at a masked entry.
double loss_mention(const std::vector<MentionExample>& batch, int* clamped = nullptr);
double loss_hit(const HitBatch& batch, int* clamped = nullptr);
double joint_loss(double l_type, double l_mention, double l_hit, const LossWeights& w = {});

}  // namespace msp
