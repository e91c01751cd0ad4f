// Copyright 2026 The Panelstyle Authors
// SPDX-License-Identifier: Apache-2.0

#include "nn/vgg16.hpp"

#include <algorithm>
#include <cmath>

#include "core/error.hpp"
#include "nn/serialize.hpp"

namespace panelstyle::nn {

template <typename T>
Tensor<T> to_tensor(const Raster& img) {
  Tensor<T> t(3, img.height(), img.width());
  const auto b = img.bytes();
  const std::size_t n = img.pixel_count();
  for (std::size_t i = 0; i < n; ++i)
    for (int ch = 0; ch < 3; ++ch) t.data[std::size_t(ch) * n + i] = T(b[i * 3 + std::size_t(ch)]) / T(255);
  return t;
}

template <typename T>
Raster to_raster(const Tensor<T>& t) {
  PANELSTYLE_REQUIRE(t.c == 3, "to_raster expects 3 channels");
  Raster img(t.w, t.h);
  auto b = img.bytes();
  const std::size_t n = t.plane();
  for (std::size_t i = 0; i < n; ++i)
    for (int ch = 0; ch < 3; ++ch) {
      const double v = double(t.data[std::size_t(ch) * n + i]) * 255.0;
      b[i * 3 + std::size_t(ch)] =
          std::uint8_t(std::clamp(std::isfinite(v) ? std::lround(v) : 0L, 0L, 255L));
    }
  return img;
}

template <typename T>
Tensor<T> imagenet_normalize(const Tensor<T>& unit_rgb) {
  Tensor<T> out = unit_rgb;
  auto m = out.mat();
  for (int ch = 0; ch < 3; ++ch)
    m.row(ch) = ((m.row(ch).array() - T(kImageNetMean[std::size_t(ch)])) / T(kImageNetStd[std::size_t(ch)])).matrix();
  return out;
}

template <typename T>
const std::vector<std::string>& Vgg16<T>::feature_layer_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    const int convs[5] = {2, 2, 3, 3, 3};
    for (int b = 1; b <= 5; ++b) {
      for (int c = 1; c <= convs[b - 1]; ++c) {
        n.push_back("conv" + std::to_string(b) + "_" + std::to_string(c));
        n.push_back("relu" + std::to_string(b) + "_" + std::to_string(c));
      }
      n.push_back("pool" + std::to_string(b));
    }
    return n;
  }();
  return names;
}

template <typename T>
int Vgg16<T>::feature_index(std::string_view name) {
  const auto& names = feature_layer_names();
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end())
    throw ConfigError("layer '" + std::string(name) + "' is not a layer of the loss network");
  return int(it - names.begin());
}

template <typename T>
Vgg16<T>::Vgg16(const Vgg16Config& cfg) : cfg_(cfg) {
  PANELSTYLE_REQUIRE(cfg.width_divisor >= 1 && 64 % cfg.width_divisor == 0,
                     "vgg16: width divisor must divide 64");
  PANELSTYLE_REQUIRE(cfg.fc_dim >= 1, "vgg16: fc_dim must be positive");
  const int base[5] = {64, 128, 256, 512, 512};
  const int convs[5] = {2, 2, 3, 3, 3};
  for (int b = 0; b < 5; ++b) widths_[std::size_t(b)] = base[b] / cfg.width_divisor;

  Rng rng(cfg.seed);
  int in = 3, idx = 0;
  for (int b = 0; b < 5; ++b) {
    for (int c = 0; c < convs[b]; ++c) {
      const int out = widths_[std::size_t(b)];
      auto& conv = features_.template add<Conv2d<T>>("features." + std::to_string(idx), in, out, 3,
                                                     1, 1, PadMode::kZero);
      init_normal(conv.weight(), rng, std::sqrt(2.0 / (out * 9)));
      features_.template add<ReLU<T>>();
      idx += 2;
      in = out;
    }
    features_.template add<MaxPool2<T>>();
    idx += 1;
  }

  if (cfg.classifier) {
    auto& fc6 = head_.template add<Linear<T>>("classifier.0", pooled_size(), cfg.fc_dim);
    init_normal(fc6.weight(), rng, std::sqrt(2.0 / pooled_size()));
    head_.template add<ReLU<T>>();
    auto& fc7 = head_.template add<Linear<T>>("classifier.3", cfg.fc_dim, cfg.fc_dim);
    init_normal(fc7.weight(), rng, std::sqrt(2.0 / cfg.fc_dim));
    head_.template add<ReLU<T>>();
    fc8_ = std::make_unique<Linear<T>>("classifier.6", cfg.fc_dim, 1000);
    init_normal(fc8_->weight(), rng, std::sqrt(1.0 / cfg.fc_dim));
  }

  if (!cfg.weights.empty()) load_blob(cfg.weights, params());
}

template <typename T>
std::vector<Tensor<T>> Vgg16<T>::features(const Tensor<T>& x, const std::vector<int>& taps,
                                          Tape<T>* tape) const {
  PANELSTYLE_REQUIRE(!taps.empty() && std::is_sorted(taps.begin(), taps.end()),
                     "vgg16: taps must be non-empty and ascending");
  std::vector<Tensor<T>> out;
  out.reserve(taps.size());
  Tensor<T> cur = x;
  std::size_t next = 0;
  for (int i = 0; i <= taps.back(); ++i) {
    cur = features_[std::size_t(i)].forward(cur, tape);
    while (next < taps.size() && taps[next] == i) {
      out.push_back(cur);
      ++next;
    }
  }
  return out;
}

template <typename T>
Tensor<T> Vgg16<T>::features_backward(const std::vector<Tensor<T>>& tap_grads,
                                      const std::vector<int>& taps, Tape<T>& tape,
                                      bool param_grads) {
  PANELSTYLE_REQUIRE(tap_grads.size() == taps.size(), "vgg16: one gradient per tap");
  Tensor<T> grad(tap_grads.back().c, tap_grads.back().h, tap_grads.back().w);
  std::size_t next = taps.size();
  for (int i = taps.back(); i >= 0; --i) {
    while (next > 0 && taps[next - 1] == i) {
      --next;
      PANELSTYLE_REQUIRE(tap_grads[next].same_shape(grad), "vgg16: tap gradient shape mismatch");
      grad.vec() += tap_grads[next].vec();
    }
    grad = features_[std::size_t(i)].backward(grad, tape, param_grads);
  }
  return grad;
}

template <typename T>
Tensor<T> Vgg16<T>::pooled(const Tensor<T>& x) const {
  const Tensor<T> f = features(x, {int(features_.size()) - 1}, nullptr).front();
  return avgpool_.forward(f, nullptr);
}

template <typename T>
Tensor<T> Vgg16<T>::fc7(const Tensor<T>& pooled, Tape<T>* tape) const {
  PANELSTYLE_REQUIRE(cfg_.classifier, "vgg16: built without classifier");
  return head_.forward(pooled, tape);
}

template <typename T>
Tensor<T> Vgg16<T>::fc7_backward(const Tensor<T>& dy, Tape<T>& tape, bool param_grads) {
  return head_.backward(dy, tape, param_grads);
}

template <typename T>
std::vector<Param<T>*> Vgg16<T>::params() {
  std::vector<Param<T>*> out = collect_params<T>(features_);
  for (auto* p : collect_params<T>(head_)) out.push_back(p);
  if (fc8_) fc8_->visit([&](Param<T>& p) { out.push_back(&p); });
  return out;
}

template <typename T>
std::vector<const Param<T>*> Vgg16<T>::params() const {
  std::vector<const Param<T>*> out;
  auto push = [&](const Param<T>& p) { out.push_back(&p); };
  features_.visit(std::function<void(const Param<T>&)>(push));
  head_.visit(std::function<void(const Param<T>&)>(push));
  if (fc8_) static_cast<const Linear<T>&>(*fc8_).visit(std::function<void(const Param<T>&)>(push));
  return out;
}

template Tensor<float> to_tensor<float>(const Raster&);
template Tensor<double> to_tensor<double>(const Raster&);
template Raster to_raster<float>(const Tensor<float>&);
template Raster to_raster<double>(const Tensor<double>&);
template Tensor<float> imagenet_normalize<float>(const Tensor<float>&);
template Tensor<double> imagenet_normalize<double>(const Tensor<double>&);
template class Vgg16<float>;
template class Vgg16<double>;

}  // namespace panelstyle::nn
