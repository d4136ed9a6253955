#pragma once

#include "msp_dst/common/tensor.hpp"
#include "msp_dst/common/parameters.hpp"

#include <cmath>
#include <vector>

namespace msp {

// Linear warmup from 0 to peak over the first warmup * total steps, then
// linear decay to 0 at total. Throws std::out_of_range for step outside
// [0, total].
double lr_at(long step, long total_steps, double peak_lr, double warmup);

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Bias-corrected Adam over every non-frozen parameter.
template <class S>
class Adam {
 public:
  Adam() = default;
  Adam(const ParameterSet<S>& params, AdamConfig cfg = {}) : cfg_(cfg) {
    for (const auto& p : params) {
      m_.push_back(Mat<S>::Zero(p.value.rows(), p.value.cols()));
      v_.push_back(Mat<S>::Zero(p.value.rows(), p.value.cols()));
    }
  }

  void step(ParameterSet<S>& params, double lr) {
    ++t_;
    const S b1 = static_cast<S>(cfg_.beta1), b2 = static_cast<S>(cfg_.beta2);
    const S c1 = static_cast<S>(1.0 - std::pow(cfg_.beta1, static_cast<double>(t_)));
    const S c2 = static_cast<S>(1.0 - std::pow(cfg_.beta2, static_cast<double>(t_)));
    const S rate = static_cast<S>(lr), eps = static_cast<S>(cfg_.eps);
    std::size_t i = 0;
    for (auto& p : params) {
      Mat<S>& m = m_[i];
      Mat<S>& v = v_[i];
      ++i;
      if (p.frozen) continue;
      m = b1 * m + (S(1) - b1) * p.grad;
      v = b2 * v + (S(1) - b2) * p.grad.cwiseAbs2();
      p.value.array() -= rate * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
    }
  }

  long steps() const { return t_; }

 private:
  AdamConfig cfg_;
  long t_ = 0;
  std::vector<Mat<S>> m_, v_;
};

}  // namespace msp
