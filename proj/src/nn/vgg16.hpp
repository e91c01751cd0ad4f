// Copyright 2026 The Panelstyle Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "core/image.hpp"
#include "nn/layers.hpp"

namespace panelstyle::nn {

// 16-weight-layer VGG (13 conv + 3 fc). Parameter names follow the usual
// `features.N` / `classifier.N` state-dict layout so exported ImageNet
// weights load directly; without a weight file the network is initialised
// deterministically from `seed`.
struct Vgg16Config {
  int width_divisor = 1;  // conv widths 64/128/256/512/512 divided by this
  int fc_dim = 4096;
  bool classifier = true;  // build fc6/fc7/fc8
  std::uint64_t seed = 16;
  std::string weights;  // optional blob path

  friend bool operator==(const Vgg16Config&, const Vgg16Config&) = default;
};

inline constexpr std::array<double, 3> kImageNetMean = {0.485, 0.456, 0.406};
inline constexpr std::array<double, 3> kImageNetStd = {0.229, 0.224, 0.225};

// RGB raster → 3 × H × W tensor with values in [0, 1].
template <typename T>
Tensor<T> to_tensor(const Raster& img);
// Inverse of to_tensor with clamping to [0, 255] and rounding.
template <typename T>
Raster to_raster(const Tensor<T>& t);

template <typename T>
Tensor<T> imagenet_normalize(const Tensor<T>& unit_rgb);

template <typename T>
class Vgg16 {
 public:
  explicit Vgg16(const Vgg16Config& cfg);

  const Vgg16Config& config() const { return cfg_; }

  static const std::vector<std::string>& feature_layer_names();
  // Throws ConfigError for names that are not feature layers.
  static int feature_index(std::string_view name);

  // Runs feature layers up to the deepest tap and returns the activation at
  // every tap (taps ascending, unique).
  std::vector<Tensor<T>> features(const Tensor<T>& x, const std::vector<int>& taps,
                                  Tape<T>* tape) const;
  // Backpropagates tap gradients to the network input.
  Tensor<T> features_backward(const std::vector<Tensor<T>>& tap_grads, const std::vector<int>& taps,
                              Tape<T>& tape, bool param_grads);

  // Convolutional trunk through pool5 followed by 7 × 7 adaptive pooling.
  Tensor<T> pooled(const Tensor<T>& x) const;
  int pooled_size() const { return widths_[4] * 49; }

  // fc6 → ReLU → fc7 → ReLU on a pooled tensor.
  Tensor<T> fc7(const Tensor<T>& pooled, Tape<T>* tape) const;
  Tensor<T> fc7_backward(const Tensor<T>& dy, Tape<T>& tape, bool param_grads);

  Sequential<T>& head() { return head_; }
  const Sequential<T>& head() const { return head_; }

  std::vector<Param<T>*> params();
  std::vector<const Param<T>*> params() const;

 private:
  Vgg16Config cfg_;
  std::array<int, 5> widths_{};
  Sequential<T> features_;
  AdaptiveAvgPool<T> avgpool_{7};
  Sequential<T> head_;
  std::unique_ptr<Linear<T>> fc8_;
};

}  // namespace panelstyle::nn
