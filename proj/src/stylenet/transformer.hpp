// Copyright 2026 The Panelstyle Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "nn/layers.hpp"

namespace panelstyle::stylenet {

// Image transformation network: two strided downsampling convolutions,
// residual blocks, then nearest-neighbour upsampling convolutions back to
// full resolution. Reflection padding throughout. Input and output are
// 3 × H × W tensors in [0, 1] scale with H, W multiples of 4.
struct TransformerConfig {
  int base_channels = 32;
  int residual_blocks = 5;

  friend bool operator==(const TransformerConfig&, const TransformerConfig&) = default;
};

template <typename T>
class TransformerNet {
 public:
  TransformerNet(const TransformerConfig& cfg, std::uint64_t seed);

  nn::Tensor<T> forward(const nn::Tensor<T>& x, nn::Tape<T>* tape) const {
    return body_.forward(x, tape);
  }
  nn::Tensor<T> backward(const nn::Tensor<T>& dy, nn::Tape<T>& tape) {
    return body_.backward(dy, tape, true);
  }

  std::vector<nn::Param<T>*> params() { return nn::collect_params<T>(body_); }
  std::vector<const nn::Param<T>*> params() const;

  const TransformerConfig& config() const { return cfg_; }

 private:
  TransformerConfig cfg_;
  nn::Sequential<T> body_;
};

}  // namespace panelstyle::stylenet
