// Copyright 2026 The Panelstyle Authors
// SPDX-License-Identifier: Apache-2.0

#include "stylenet/losses.hpp"

#include <algorithm>
#include <set>

#include "core/error.hpp"

namespace panelstyle::stylenet {

namespace {

template <typename T>
void require_finite(const Tensor<T>& f, const char* what) {
  PANELSTYLE_REQUIRE(f.c >= 1 && f.h >= 1 && f.w >= 1,
                     std::string(what) + ": feature map dimensions must be >= 1");
  PANELSTYLE_REQUIRE(nn::all_finite<T>(f.data), std::string(what) + ": non-finite feature value");
}

template <typename T>
void require_same_shape(const Tensor<T>& a, const Tensor<T>& b, const char* what) {
  PANELSTYLE_REQUIRE(a.same_shape(b), std::string(what) + ": dimension mismatch (" +
                                          std::to_string(a.c) + "x" + std::to_string(a.h) + "x" +
                                          std::to_string(a.w) + " vs " + std::to_string(b.c) + "x" +
                                          std::to_string(b.h) + "x" + std::to_string(b.w) + ")");
}

}  // namespace

template <typename T>
GramMatrix<T> gram(const Tensor<T>& f) {
  require_finite(f, "gram");
  const auto psi = f.mat();
  GramMatrix<T> g = psi * psi.transpose();
  g /= T(f.size());
  // GEMM blocking can leave the two triangles a rounding error apart.
  g.template triangularView<Eigen::StrictlyLower>() = g.transpose();
  return g;
}

template <typename T>
T feature_loss(const Tensor<T>& out, const Tensor<T>& content) {
  require_same_shape(out, content, "feature_loss");
  return (out.vec() - content.vec()).squaredNorm() / T(out.size());
}

template <typename T>
Tensor<T> feature_loss_grad(const Tensor<T>& out, const Tensor<T>& content) {
  require_same_shape(out, content, "feature_loss");
  Tensor<T> g(out.c, out.h, out.w);
  g.vec() = (out.vec() - content.vec()) * (T(2) / T(out.size()));
  return g;
}

template <typename T>
T style_loss_to_gram(const Tensor<T>& out, const GramMatrix<T>& target) {
  PANELSTYLE_REQUIRE(target.rows() == out.c,
                     "style_loss: channel mismatch (" + std::to_string(out.c) + " vs " +
                         std::to_string(target.rows()) + ")");
  return (gram(out) - target).squaredNorm();
}

template <typename T>
T style_loss(const Tensor<T>& out, const Tensor<T>& style) {
  PANELSTYLE_REQUIRE(out.c == style.c, "style_loss: channel mismatch (" + std::to_string(out.c) +
                                           " vs " + std::to_string(style.c) + ")");
  return style_loss_to_gram(out, gram(style));
}

template <typename T>
Tensor<T> style_loss_grad(const Tensor<T>& out, const GramMatrix<T>& target) {
  PANELSTYLE_REQUIRE(target.rows() == out.c, "style_loss: channel mismatch");
  const GramMatrix<T> diff = gram(out) - target;
  Tensor<T> g(out.c, out.h, out.w);
  // d‖G − S‖²/dΨ = 2 (D + Dᵀ) Ψ / N with D = G − S symmetric.
  g.mat().noalias() = (T(4) / T(out.size())) * diff * out.mat();
  return g;
}

template <typename T>
T total_variation(const Tensor<T>& img) {
  T acc = 0;
  for (int ch = 0; ch < img.c; ++ch)
    for (int y = 0; y < img.h; ++y)
      for (int x = 0; x < img.w; ++x) {
        if (y + 1 < img.h) {
          const T d = img.at(ch, y + 1, x) - img.at(ch, y, x);
          acc += d * d;
        }
        if (x + 1 < img.w) {
          const T d = img.at(ch, y, x + 1) - img.at(ch, y, x);
          acc += d * d;
        }
      }
  return acc;
}

template <typename T>
Tensor<T> total_variation_grad(const Tensor<T>& img) {
  Tensor<T> g(img.c, img.h, img.w);
  for (int ch = 0; ch < img.c; ++ch)
    for (int y = 0; y < img.h; ++y)
      for (int x = 0; x < img.w; ++x) {
        if (y + 1 < img.h) {
          const T d = T(2) * (img.at(ch, y + 1, x) - img.at(ch, y, x));
          g.at(ch, y + 1, x) += d;
          g.at(ch, y, x) -= d;
        }
        if (x + 1 < img.w) {
          const T d = T(2) * (img.at(ch, y, x + 1) - img.at(ch, y, x));
          g.at(ch, y, x + 1) += d;
          g.at(ch, y, x) -= d;
        }
      }
  return g;
}

template <typename T>
PerceptualLoss<T>::PerceptualLoss(const nn::Vgg16Config& net, LayerSelection layers,
                                  LossWeights weights)
    : net_([&] {
        nn::Vgg16Config c = net;
        c.classifier = false;
        return c;
      }()),
      layers_(std::move(layers)),
      weights_(weights) {
  if (weights_.content < 0 || weights_.style < 0 || weights_.tv < 0)
    throw ConfigError("loss weights must be non-negative");
  if (weights_.content == 0 && weights_.style == 0 && weights_.tv == 0)
    throw ConfigError("loss weights must not all be zero");
  std::set<int> all;
  std::vector<int> content_idx, style_idx;
  for (const auto& n : layers_.content) content_idx.push_back(nn::Vgg16<T>::feature_index(n));
  for (const auto& n : layers_.style) style_idx.push_back(nn::Vgg16<T>::feature_index(n));
  all.insert(content_idx.begin(), content_idx.end());
  all.insert(style_idx.begin(), style_idx.end());
  if (all.empty()) throw ConfigError("no loss-network layers selected");
  taps_.assign(all.begin(), all.end());
  auto slot = [&](int idx) { return int(std::find(taps_.begin(), taps_.end(), idx) - taps_.begin()); };
  for (int i : content_idx) content_slots_.push_back(slot(i));
  for (int i : style_idx) style_slots_.push_back(slot(i));
}

template <typename T>
typename PerceptualLoss<T>::ContentTarget PerceptualLoss<T>::content_target(
    const Tensor<T>& content) const {
  ContentTarget t;
  if (content_slots_.empty()) return t;
  const auto feats = net_.features(nn::imagenet_normalize(content), taps_, nullptr);
  for (int s : content_slots_) t.features.push_back(feats[std::size_t(s)]);
  return t;
}

template <typename T>
typename PerceptualLoss<T>::StyleTarget PerceptualLoss<T>::style_target(const Tensor<T>& style) const {
  StyleTarget t;
  if (style_slots_.empty()) return t;
  const auto feats = net_.features(nn::imagenet_normalize(style), taps_, nullptr);
  for (int s : style_slots_) t.grams.push_back(gram(feats[std::size_t(s)]));
  return t;
}

template <typename T>
LossBreakdown PerceptualLoss<T>::evaluate(const Tensor<T>& output, const ContentTarget& content,
                                          const StyleTarget& style, Tensor<T>* grad) {
  PANELSTYLE_REQUIRE(output.c == 3, "perceptual loss expects an RGB tensor");
  PANELSTYLE_REQUIRE(content.features.size() == content_slots_.size(),
                     "content target does not match the layer selection");
  PANELSTYLE_REQUIRE(style.grams.size() == style_slots_.size(),
                     "style target does not match the layer selection");
  nn::Tape<T> tape;
  const auto feats = net_.features(nn::imagenet_normalize(output), taps_, grad ? &tape : nullptr);
  std::vector<Tensor<T>> tap_grads;
  if (grad)
    for (const auto& f : feats) tap_grads.emplace_back(f.c, f.h, f.w);

  LossBreakdown b;
  for (std::size_t k = 0; k < content_slots_.size(); ++k) {
    const auto s = std::size_t(content_slots_[k]);
    b.content += double(feature_loss(feats[s], content.features[k]));
    if (grad && weights_.content != 0)
      tap_grads[s].vec() += T(weights_.content) * feature_loss_grad(feats[s], content.features[k]).vec();
  }
  for (std::size_t k = 0; k < style_slots_.size(); ++k) {
    const auto s = std::size_t(style_slots_[k]);
    b.style += double(style_loss_to_gram(feats[s], style.grams[k]));
    if (grad && weights_.style != 0)
      tap_grads[s].vec() += T(weights_.style) * style_loss_grad(feats[s], style.grams[k]).vec();
  }
  b.tv = double(total_variation(output));
  b.content *= weights_.content;
  b.style *= weights_.style;
  b.tv *= weights_.tv;
  b.total = b.content + b.style + b.tv;

  if (grad) {
    Tensor<T> g = net_.features_backward(tap_grads, taps_, tape, false);
    // Undo the per-channel normalisation.
    auto gm = g.mat();
    for (int ch = 0; ch < 3; ++ch) gm.row(ch) /= T(nn::kImageNetStd[std::size_t(ch)]);
    if (weights_.tv != 0) g.vec() += T(weights_.tv) * total_variation_grad(output).vec();
    *grad = std::move(g);
  }
  return b;
}

template <typename T>
LossBreakdown total_loss(const Tensor<T>& output, const Tensor<T>& content, const Tensor<T>& style,
                         const LossWeights& weights, const LayerSelection& layers,
                         const nn::Vgg16Config& net, Tensor<T>* grad) {
  PerceptualLoss<T> loss(net, layers, weights);
  return loss.evaluate(output, loss.content_target(content), loss.style_target(style), grad);
}

#define PANELSTYLE_INSTANTIATE(T)                                                              \
  template GramMatrix<T> gram<T>(const Tensor<T>&);                                            \
  template T feature_loss<T>(const Tensor<T>&, const Tensor<T>&);                              \
  template Tensor<T> feature_loss_grad<T>(const Tensor<T>&, const Tensor<T>&);                 \
  template T style_loss<T>(const Tensor<T>&, const Tensor<T>&);                                \
  template T style_loss_to_gram<T>(const Tensor<T>&, const GramMatrix<T>&);                    \
  template Tensor<T> style_loss_grad<T>(const Tensor<T>&, const GramMatrix<T>&);               \
  template T total_variation<T>(const Tensor<T>&);                                             \
  template Tensor<T> total_variation_grad<T>(const Tensor<T>&);                                \
  template class PerceptualLoss<T>;                                                            \
  template LossBreakdown total_loss<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,   \
                                       const LossWeights&, const LayerSelection&,              \
                                       const nn::Vgg16Config&, Tensor<T>*);

PANELSTYLE_INSTANTIATE(float)
PANELSTYLE_INSTANTIATE(double)

}  // namespace panelstyle::stylenet
