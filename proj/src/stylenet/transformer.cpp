// Copyright 2026 The Panelstyle Authors
// SPDX-License-Identifier: Apache-2.0

#include "stylenet/transformer.hpp"

#include <cmath>
#include <string>

#include "core/error.hpp"

namespace panelstyle::stylenet {

namespace {

template <typename T>
void conv_block(nn::Sequential<T>& seq, nn::Rng& rng, const std::string& name, int in, int out,
                int kernel, int stride, bool norm_relu) {
  auto& conv = seq.template add<nn::Conv2d<T>>(name, in, out, kernel, stride, kernel / 2,
                                               nn::PadMode::kReflect);
  const double bound = 1.0 / std::sqrt(double(in * kernel * kernel));
  nn::init_uniform(conv.weight(), rng, bound);
  nn::init_uniform(conv.bias(), rng, bound);
  if (norm_relu) {
    seq.template add<nn::InstanceNorm<T>>(name + ".in", out);
    seq.template add<nn::ReLU<T>>();
  }
}

}  // namespace

template <typename T>
TransformerNet<T>::TransformerNet(const TransformerConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
  if (cfg.base_channels < 1 || cfg.residual_blocks < 0)
    throw ConfigError("transformer: base_channels must be >= 1 and residual_blocks >= 0");
  nn::Rng rng(seed);
  const int c = cfg.base_channels;
  conv_block(body_, rng, "down1", 3, c, 9, 1, true);
  conv_block(body_, rng, "down2", c, 2 * c, 3, 2, true);
  conv_block(body_, rng, "down3", 2 * c, 4 * c, 3, 2, true);
  for (int r = 0; r < cfg.residual_blocks; ++r) {
    auto& res = body_.template add<nn::Residual<T>>();
    const std::string n = "res" + std::to_string(r + 1);
    conv_block(res.body(), rng, n + ".conv1", 4 * c, 4 * c, 3, 1, true);
    auto& conv2 = res.body().template add<nn::Conv2d<T>>(n + ".conv2", 4 * c, 4 * c, 3, 1, 1,
                                                          nn::PadMode::kReflect);
    const double bound = 1.0 / std::sqrt(double(4 * c * 9));
    nn::init_uniform(conv2.weight(), rng, bound);
    nn::init_uniform(conv2.bias(), rng, bound);
    res.body().template add<nn::InstanceNorm<T>>(n + ".conv2.in", 4 * c);
  }
  body_.template add<nn::UpsampleNearest2<T>>();
  conv_block(body_, rng, "up1", 4 * c, 2 * c, 3, 1, true);
  body_.template add<nn::UpsampleNearest2<T>>();
  conv_block(body_, rng, "up2", 2 * c, c, 3, 1, true);
  conv_block(body_, rng, "out", c, 3, 9, 1, false);
}

template <typename T>
std::vector<const nn::Param<T>*> TransformerNet<T>::params() const {
  std::vector<const nn::Param<T>*> out;
  body_.visit(std::function<void(const nn::Param<T>&)>([&](const nn::Param<T>& p) { out.push_back(&p); }));
  return out;
}

template class TransformerNet<float>;
template class TransformerNet<double>;

}  // namespace panelstyle::stylenet
