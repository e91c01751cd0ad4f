// Copyright 2026 The Panelstyle Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <string>
#include <vector>

#include "nn/tensor.hpp"

namespace panelstyle::nn {

// Single-layer LSTM, gate order (input, forget, cell, output), one fused
// bias. Only the final hidden state is exposed. The batched entry points
// carry one sequence per column.
template <typename T>
class Lstm {
 public:
  struct Cache {
    std::vector<Matrix<T>> x, h_prev, c_prev, i, f, g, o, c;
  };

  Lstm(std::string name, int input, int hidden);

  int input_size() const { return in_; }
  int hidden_size() const { return hid_; }

  Vector<T> forward(const std::vector<Vector<T>>& seq, Cache* cache) const;
  // Returns d(loss)/d(x_t) for every step; accumulates parameter gradients.
  std::vector<Vector<T>> backward(const Vector<T>& dh_last, const Cache& cache);

  // seq[t] is input_size × batch; returns hidden × batch.
  Matrix<T> forward_batch(const std::vector<Matrix<T>>& seq, Cache* cache) const;
  std::vector<Matrix<T>> backward_batch(const Matrix<T>& dh_last, const Cache& cache);

  void visit(const std::function<void(Param<T>&)>& fn) { fn(w_ih_), fn(w_hh_), fn(bias_); }
  void visit(const std::function<void(const Param<T>&)>& fn) const {
    fn(w_ih_), fn(w_hh_), fn(bias_);
  }

 private:
  int in_, hid_;
  Param<T> w_ih_;  // 4H × I
  Param<T> w_hh_;  // 4H × H
  Param<T> bias_;  // 4H
};

}  // namespace panelstyle::nn
