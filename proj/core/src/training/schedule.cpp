#include "msp_dst/training/schedule.hpp"

#include <stdexcept>
#include <string>

namespace msp {

double lr_at(long step, long total_steps, double peak_lr, double warmup) {
  if (total_steps <= 0) throw std::out_of_range("total_steps must be positive");
  if (step < 0 || step > total_steps) {
    throw std::out_of_range("step " + std::to_string(step) + " outside [0, " + std::to_string(total_steps) + "]");
  }
  const double warm = warmup * static_cast<double>(total_steps);
  const double s = static_cast<double>(step);
  if (s < warm) return peak_lr * s / warm;
  const double span = static_cast<double>(total_steps) - warm;
  if (span <= 0) return peak_lr;
  return peak_lr * (static_cast<double>(total_steps) - s) / span;
}

}  // namespace msp
