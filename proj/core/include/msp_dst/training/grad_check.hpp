#pragma once

#include "msp_dst/model/model.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace msp {

struct GradCheckResult {
  double max_rel_error = 0;
  int checked = 0;          // sampled trainable scalars
  std::size_t frozen = 0;   // scalars excluded because their tensor is frozen
  std::string worst;        // "name[index]" of the largest error
};

// Analytic gradient of the summed joint loss over `batch` against central
// differences at `samples` trainable scalars drawn without replacement.
// Relative error: |ga - gn| / max(|ga|, |gn|, 1e-8). Throws TrainingError-like
// std::runtime_error on non-finite gradients.
GradCheckResult grad_check(Model<double>& model, const std::vector<LabeledTurn>& batch, const LossWeights& w = {},
                           double h = 1e-4, int samples = 100, std::uint64_t seed = 1);

// Toy setup: n = 8, two slots (categorical with three values, span), a
// 50-token vocabulary and a three-turn dialogue exercising every head.
struct MicroSetup {
  Schema schema;
  Dialogue dialogue;
  Model<double> model;
  std::vector<LabeledTurn> batch;
};

MicroSetup micro_setup(std::uint64_t seed = 7, Strategy strategy = Strategy::msp, bool zero_heads = false);

}  // namespace msp
