#include "msp_dst/training/loss.hpp"

#include "msp_dst/common/error.hpp"

namespace msp {

namespace {

double at(const std::vector<double>& p, int i) {
  if (i < 0 || i >= static_cast<int>(p.size())) throw DimensionError("label outside the distribution");
  return p[static_cast<std::size_t>(i)];
}

}  // namespace

double loss_type(const std::vector<ClassExample>& batch, int* clamped) {
  double total = 0;
  for (const auto& ex : batch) total += clamped_nll(at(ex.probs, ex.label), clamped);
  return total;
}

double loss_mention(const std::vector<MentionExample>& batch, int* clamped) {
  double total = 0;
  for (const auto& ex : batch) {
    if (ex.label < 0 || ex.label >= static_cast<int>(ex.mask.size()) || !ex.mask[static_cast<std::size_t>(ex.label)]) {
      throw ConfigError("mention label points at a padded pool entry");
    }
    total += clamped_nll(at(ex.probs, ex.label), clamped);
  }
  return total;
}

double loss_hit(const HitBatch& batch, int* clamped) {
  double total = 0;
  for (const auto& ex : batch.categorical) total += clamped_nll(at(ex.probs, ex.label), clamped);
  for (const auto& ex : batch.span) {
    total += 0.5 * (clamped_nll(at(ex.start, ex.label.start), clamped) + clamped_nll(at(ex.end, ex.label.end), clamped));
  }
  return total;
}

double joint_loss(double l_type, double l_mention, double l_hit, const LossWeights& w) {
  return w.alpha * l_type + w.beta * l_mention + w.gamma * l_hit;
}

}  // namespace msp
