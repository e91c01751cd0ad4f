// Copyright 2026 The Panelstyle Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "nn/tensor.hpp"
#include "nn/vgg16.hpp"

namespace panelstyle::stylenet {

using nn::MatrixRM;
using nn::Tensor;

template <typename T>
using GramMatrix = MatrixRM<T>;

// G = Ψ Ψᵀ / (C·H·W) with Ψ the C × (H·W) unrolling of f.
template <typename T>
GramMatrix<T> gram(const Tensor<T>& f);

// ‖a − b‖² / (C·H·W)
template <typename T>
T feature_loss(const Tensor<T>& out, const Tensor<T>& content);
template <typename T>
Tensor<T> feature_loss_grad(const Tensor<T>& out, const Tensor<T>& content);

// ‖gram(out) − gram(style)‖²_F; spatial sizes may differ, channels may not.
template <typename T>
T style_loss(const Tensor<T>& out, const Tensor<T>& style);
template <typename T>
T style_loss_to_gram(const Tensor<T>& out, const GramMatrix<T>& target);
template <typename T>
Tensor<T> style_loss_grad(const Tensor<T>& out, const GramMatrix<T>& target);

// Squared-difference total variation over both image axes.
template <typename T>
T total_variation(const Tensor<T>& img);
template <typename T>
Tensor<T> total_variation_grad(const Tensor<T>& img);

struct LossWeights {
  double content = 1.0;
  double style = 1e5;
  double tv = 1e-6;

  friend bool operator==(const LossWeights&, const LossWeights&) = default;
};

struct LayerSelection {
  std::vector<std::string> content = {"relu2_2"};
  std::vector<std::string> style = {"relu1_2", "relu2_2", "relu3_3", "relu4_3"};

  friend bool operator==(const LayerSelection&, const LayerSelection&) = default;
};

// Weighted terms; total is their sum.
struct LossBreakdown {
  double content = 0;
  double style = 0;
  double tv = 0;
  double total = 0;
};

// Perceptual loss over a fixed loss network. Images are 3 × H × W tensors
// in [0, 1]; normalisation for the loss network happens inside.
template <typename T>
class PerceptualLoss {
 public:
  struct ContentTarget {
    std::vector<Tensor<T>> features;
  };
  struct StyleTarget {
    std::vector<GramMatrix<T>> grams;
  };

  PerceptualLoss(const nn::Vgg16Config& net, LayerSelection layers, LossWeights weights);

  ContentTarget content_target(const Tensor<T>& content) const;
  StyleTarget style_target(const Tensor<T>& style) const;

  // Evaluates the loss; when `grad` is non-null it receives d(total)/d(output).
  LossBreakdown evaluate(const Tensor<T>& output, const ContentTarget& content,
                         const StyleTarget& style, Tensor<T>* grad);

  const LossWeights& weights() const { return weights_; }
  const LayerSelection& layers() const { return layers_; }

 private:
  nn::Vgg16<T> net_;
  LayerSelection layers_;
  LossWeights weights_;
  std::vector<int> taps_;           // union of content and style layers, ascending
  std::vector<int> content_slots_;  // index into taps_
  std::vector<int> style_slots_;
};

// One-shot convenience: total loss of `output` against content and style
// images, with its per-term breakdown.
template <typename T>
LossBreakdown total_loss(const Tensor<T>& output, const Tensor<T>& content, const Tensor<T>& style,
                         const LossWeights& weights, const LayerSelection& layers,
                         const nn::Vgg16Config& net, Tensor<T>* grad = nullptr);

}  // namespace panelstyle::stylenet
