// Copyright 2026 The Panelstyle Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace panelstyle::nn {

template <typename T>
using MatrixRM = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using Vector = Eigen::Matrix<T, Eigen::Dynamic, 1>;
template <typename T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;

// Storage for anything Eigen maps. A fixed alignment keeps vectorized
// reductions in the same summation order from run to run.
template <typename T>
using Buffer = std::vector<T, Eigen::aligned_allocator<T>>;

// Dense C × H × W activation, channel-major.
template <typename T>
struct Tensor {
  int c = 0;
  int h = 0;
  int w = 0;
  Buffer<T> data;

  Tensor() = default;
  Tensor(int channels, int height, int width, T value = T(0))
      : c(channels), h(height), w(width), data(std::size_t(channels) * height * width, value) {}

  std::size_t size() const { return data.size(); }
  std::size_t plane() const { return std::size_t(h) * w; }
  bool same_shape(const Tensor& o) const { return c == o.c && h == o.h && w == o.w; }

  T& at(int ch, int y, int x) { return data[(std::size_t(ch) * h + y) * w + x]; }
  const T& at(int ch, int y, int x) const { return data[(std::size_t(ch) * h + y) * w + x]; }

  // C × (H·W) view.
  Eigen::Map<MatrixRM<T>> mat() { return {data.data(), c, Eigen::Index(plane())}; }
  Eigen::Map<const MatrixRM<T>> mat() const { return {data.data(), c, Eigen::Index(plane())}; }
  Eigen::Map<Vector<T>> vec() { return {data.data(), Eigen::Index(size())}; }
  Eigen::Map<const Vector<T>> vec() const { return {data.data(), Eigen::Index(size())}; }

  template <typename U>
  Tensor<U> cast() const {
    Tensor<U> out(c, h, w);
    for (std::size_t i = 0; i < size(); ++i) out.data[i] = U(data[i]);
    return out;
  }
};

// Trainable parameter with its accumulated gradient.
template <typename T>
struct Param {
  std::string name;
  std::vector<int> shape;
  Buffer<T> value;
  Buffer<T> grad;

  Param() = default;
  Param(std::string n, std::vector<int> s) : name(std::move(n)), shape(std::move(s)) {
    std::size_t count = 1;
    for (int d : shape) count *= std::size_t(d);
    value.assign(count, T(0));
    grad.assign(count, T(0));
  }
  std::size_t size() const { return value.size(); }
  void zero_grad() { std::fill(grad.begin(), grad.end(), T(0)); }
};

// LIFO store of whatever each module needs for its backward pass.
template <typename T>
struct Tape {
  std::vector<Tensor<T>> stack;
  void push(Tensor<T> t) { stack.push_back(std::move(t)); }
  Tensor<T> pop() {
    Tensor<T> t = std::move(stack.back());
    stack.pop_back();
    return t;
  }
  bool empty() const { return stack.empty(); }
};

// Platform-independent random source: mt19937_64 bits with hand-rolled
// uniform and Box-Muller normal draws.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  std::uint64_t bits() { return engine_(); }
  double uniform() { return double(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : engine_() % n; }
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

template <typename T>
bool all_finite(std::span<const T> v) {
  for (T x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace panelstyle::nn
