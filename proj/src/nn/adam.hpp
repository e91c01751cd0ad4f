// Copyright 2026 The Panelstyle Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <vector>

#include "nn/tensor.hpp"

namespace panelstyle::nn {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

template <typename T>
class Adam {
 public:
  Adam(std::vector<Param<T>*> params, AdamConfig cfg) : params_(std::move(params)), cfg_(cfg) {
    for (auto* p : params_) {
      m_.emplace_back(p->size(), T(0));
      v_.emplace_back(p->size(), T(0));
    }
  }

  // Applies one update from the accumulated gradients scaled by
  // `grad_scale`, then zeroes them.
  void step(double grad_scale = 1.0) {
    ++t_;
    const double c1 = 1.0 - std::pow(cfg_.beta1, double(t_));
    const double c2 = 1.0 - std::pow(cfg_.beta2, double(t_));
    for (std::size_t k = 0; k < params_.size(); ++k) {
      Param<T>& p = *params_[k];
      auto& m = m_[k];
      auto& v = v_[k];
      for (std::size_t i = 0; i < p.size(); ++i) {
        const double g = double(p.grad[i]) * grad_scale;
        const double mi = cfg_.beta1 * double(m[i]) + (1.0 - cfg_.beta1) * g;
        const double vi = cfg_.beta2 * double(v[i]) + (1.0 - cfg_.beta2) * g * g;
        m[i] = T(mi);
        v[i] = T(vi);
        p.value[i] = T(double(p.value[i]) - cfg_.lr * (mi / c1) / (std::sqrt(vi / c2) + cfg_.eps));
      }
      p.zero_grad();
    }
  }

  void zero_grad() {
    for (auto* p : params_) p->zero_grad();
  }

  long steps() const { return t_; }

 private:
  std::vector<Param<T>*> params_;
  AdamConfig cfg_;
  std::vector<std::vector<T>> m_, v_;
  long t_ = 0;
};

}  // namespace panelstyle::nn
