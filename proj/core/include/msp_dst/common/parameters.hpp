#pragma once

#include "msp_dst/common/error.hpp"
#include "msp_dst/common/tensor.hpp"

#include <random>
#include <string>
#include <unordered_map>
#include <vector>

namespace msp {

template <class S>
struct Parameter {
  std::string name;
  Mat<S> value;
  Mat<S> grad;
  bool frozen = false;
};

// Named tensors in insertion order. Handles are plain indices so that copies
// of a set (and of the models holding one) stay valid.
template <class S>
class ParameterSet {
 public:
  int add(const std::string& name, int rows, int cols, bool frozen = false) {
    if (index_.count(name)) throw std::logic_error("duplicate parameter " + name);
    const int h = static_cast<int>(params_.size());
    params_.push_back({name, Mat<S>::Zero(rows, cols), Mat<S>::Zero(rows, cols), frozen});
    index_.emplace(name, h);
    return h;
  }

  Parameter<S>& operator[](int h) { return params_[static_cast<std::size_t>(h)]; }
  const Parameter<S>& operator[](int h) const { return params_[static_cast<std::size_t>(h)]; }

  int handle(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw ConfigError("unknown parameter " + name);
    return it->second;
  }
  bool contains(const std::string& name) const { return index_.count(name) != 0; }

  std::size_t size() const { return params_.size(); }
  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  void zero_grad() {
    for (auto& p : params_) p.grad.setZero();
  }

  std::size_t trainable_scalars() const {
    std::size_t n = 0;
    for (const auto& p : params_) {
      if (!p.frozen) n += static_cast<std::size_t>(p.value.size());
    }
    return n;
  }

  template <class T>
  ParameterSet<T> cast() const {
    ParameterSet<T> out;
    for (const auto& p : params_) {
      const int h = out.add(p.name, static_cast<int>(p.value.rows()), static_cast<int>(p.value.cols()),
                            p.frozen);
      out[h].value = p.value.template cast<T>();
    }
    return out;
  }

  // Copies values (not gradients) from a set with identical layout.
  template <class T>
  void assign_values(const ParameterSet<T>& other) {
    if (other.size() != params_.size()) throw DimensionError("parameter layout mismatch");
    std::size_t i = 0;
    for (const auto& p : other) params_[i++].value = p.value.template cast<S>();
  }

 private:
  std::vector<Parameter<S>> params_;
  std::unordered_map<std::string, int> index_;
};

template <class S>
void fill_normal(Mat<S>& m, double stddev, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, stddev);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<S>(dist(rng));
}

}  // namespace msp
