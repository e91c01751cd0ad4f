// Copyright 2026 The Panelstyle Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "nn/tensor.hpp"

namespace panelstyle::nn {

// A differentiable block. forward() is const and pushes whatever backward()
// needs onto the tape (when one is given); backward() pops it in reverse
// order and accumulates parameter gradients when asked to.
template <typename T>
class Module {
 public:
  virtual ~Module() = default;
  virtual Tensor<T> forward(const Tensor<T>& x, Tape<T>* tape) const = 0;
  virtual Tensor<T> backward(const Tensor<T>& dy, Tape<T>& tape, bool param_grads) = 0;
  virtual void visit(const std::function<void(Param<T>&)>& fn) { (void)fn; }
  virtual void visit(const std::function<void(const Param<T>&)>& fn) const { (void)fn; }
};

enum class PadMode { kZero, kReflect };

template <typename T>
class Conv2d final : public Module<T> {
 public:
  Conv2d(std::string name, int in, int out, int kernel, int stride, int pad, PadMode mode);

  Tensor<T> forward(const Tensor<T>& x, Tape<T>* tape) const override;
  Tensor<T> backward(const Tensor<T>& dy, Tape<T>& tape, bool param_grads) override;
  void visit(const std::function<void(Param<T>&)>& fn) override { fn(weight_), fn(bias_); }
  void visit(const std::function<void(const Param<T>&)>& fn) const override {
    fn(weight_), fn(bias_);
  }

  Param<T>& weight() { return weight_; }
  Param<T>& bias() { return bias_; }
  int in_channels() const { return in_; }
  int out_channels() const { return out_; }
  int kernel() const { return k_; }

 private:
  int out_size(int n) const { return (n + 2 * pad_ - k_) / stride_ + 1; }
  std::vector<int> source_index(int n) const;
  MatrixRM<T> im2col(const Tensor<T>& x, int ho, int wo) const;

  int in_, out_, k_, stride_, pad_;
  PadMode mode_;
  Param<T> weight_;  // out × in × k × k
  Param<T> bias_;
};

template <typename T>
class InstanceNorm final : public Module<T> {
 public:
  InstanceNorm(std::string name, int channels, T eps = T(1e-5));
  Tensor<T> forward(const Tensor<T>& x, Tape<T>* tape) const override;
  Tensor<T> backward(const Tensor<T>& dy, Tape<T>& tape, bool param_grads) override;
  void visit(const std::function<void(Param<T>&)>& fn) override { fn(gamma_), fn(beta_); }
  void visit(const std::function<void(const Param<T>&)>& fn) const override {
    fn(gamma_), fn(beta_);
  }

 private:
  int c_;
  T eps_;
  Param<T> gamma_;
  Param<T> beta_;
};

template <typename T>
class ReLU final : public Module<T> {
 public:
  Tensor<T> forward(const Tensor<T>& x, Tape<T>* tape) const override;
  Tensor<T> backward(const Tensor<T>& dy, Tape<T>& tape, bool param_grads) override;
};

// 2 × 2, stride 2, floor semantics.
template <typename T>
class MaxPool2 final : public Module<T> {
 public:
  Tensor<T> forward(const Tensor<T>& x, Tape<T>* tape) const override;
  Tensor<T> backward(const Tensor<T>& dy, Tape<T>& tape, bool param_grads) override;
};

template <typename T>
class UpsampleNearest2 final : public Module<T> {
 public:
  Tensor<T> forward(const Tensor<T>& x, Tape<T>* tape) const override;
  Tensor<T> backward(const Tensor<T>& dy, Tape<T>& tape, bool param_grads) override;
};

// Output bins follow floor(i·n/s) .. ceil((i+1)·n/s).
template <typename T>
class AdaptiveAvgPool final : public Module<T> {
 public:
  explicit AdaptiveAvgPool(int size) : s_(size) {}
  Tensor<T> forward(const Tensor<T>& x, Tape<T>* tape) const override;
  Tensor<T> backward(const Tensor<T>& dy, Tape<T>& tape, bool param_grads) override;

 private:
  int s_;
};

// Fully connected layer over the flattened input; output is (out, 1, 1).
template <typename T>
class Linear final : public Module<T> {
 public:
  Linear(std::string name, int in, int out);
  Tensor<T> forward(const Tensor<T>& x, Tape<T>* tape) const override;
  Tensor<T> backward(const Tensor<T>& dy, Tape<T>& tape, bool param_grads) override;
  void visit(const std::function<void(Param<T>&)>& fn) override { fn(weight_), fn(bias_); }
  void visit(const std::function<void(const Param<T>&)>& fn) const override {
    fn(weight_), fn(bias_);
  }

  Param<T>& weight() { return weight_; }
  Param<T>& bias() { return bias_; }
  const Param<T>& weight() const { return weight_; }
  const Param<T>& bias() const { return bias_; }
  int in_features() const { return in_; }
  int out_features() const { return out_; }

 private:
  int in_, out_;
  Param<T> weight_;  // out × in
  Param<T> bias_;
};

template <typename T>
class Sequential : public Module<T> {
 public:
  Sequential() = default;
  Sequential(Sequential&&) noexcept = default;
  Sequential& operator=(Sequential&&) noexcept = default;

  template <typename M, typename... Args>
  M& add(Args&&... args) {
    auto m = std::make_unique<M>(std::forward<Args>(args)...);
    M& ref = *m;
    layers_.push_back(std::move(m));
    return ref;
  }

  std::size_t size() const { return layers_.size(); }
  Module<T>& operator[](std::size_t i) { return *layers_[i]; }
  const Module<T>& operator[](std::size_t i) const { return *layers_[i]; }

  Tensor<T> forward(const Tensor<T>& x, Tape<T>* tape) const override;
  Tensor<T> backward(const Tensor<T>& dy, Tape<T>& tape, bool param_grads) override;
  void visit(const std::function<void(Param<T>&)>& fn) override;
  void visit(const std::function<void(const Param<T>&)>& fn) const override;

 private:
  std::vector<std::unique_ptr<Module<T>>> layers_;
};

// y = x + body(x)
template <typename T>
class Residual final : public Module<T> {
 public:
  Sequential<T>& body() { return body_; }
  Tensor<T> forward(const Tensor<T>& x, Tape<T>* tape) const override;
  Tensor<T> backward(const Tensor<T>& dy, Tape<T>& tape, bool param_grads) override;
  void visit(const std::function<void(Param<T>&)>& fn) override { body_.visit(fn); }
  void visit(const std::function<void(const Param<T>&)>& fn) const override { body_.visit(fn); }

 private:
  Sequential<T> body_;
};

// Initializers draw in double from the platform-independent Rng so float
// and double networks built from the same seed hold the same values.
template <typename T>
void init_uniform(Param<T>& p, Rng& rng, double bound) {
  for (auto& v : p.value) v = T(rng.uniform(-bound, bound));
}
template <typename T>
void init_normal(Param<T>& p, Rng& rng, double stddev) {
  for (auto& v : p.value) v = T(rng.normal() * stddev);
}

template <typename T>
std::vector<Param<T>*> collect_params(Module<T>& m) {
  std::vector<Param<T>*> out;
  m.visit([&](Param<T>& p) { out.push_back(&p); });
  return out;
}

}  // namespace panelstyle::nn
