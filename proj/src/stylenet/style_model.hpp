// Copyright 2026 The Panelstyle Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "core/image.hpp"
#include "core/masking.hpp"
#include "stylenet/losses.hpp"
#include "stylenet/transformer.hpp"

namespace panelstyle::stylenet {

struct TrainConfig {
  std::uint64_t seed = 1;
  int iterations = 2000;
  double learning_rate = 1e-3;
  // Content images are resized to image_size × image_size; 0 keeps the
  // native size cropped down to a multiple of 4.
  int image_size = 256;
  int style_size = 0;  // 0 keeps the style image's native size
  LossWeights weights;
  LayerSelection layers;
  TransformerConfig transformer;
  nn::Vgg16Config loss_network{1, 4096, false, 16, ""};

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

nlohmann::json to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const nlohmann::json& j);

struct StyleModel {
  std::string model_id;
  Channel channel = Channel::kWhole;
  std::string style_exemplar_id;
  TrainConfig config;
  TransformerNet<float> net;
  // loss_curve[i] is the loss after i parameter updates.
  std::vector<LossBreakdown> loss_curve;
  // Mean absolute 8-bit error of stylize(first content image) against that
  // image before and after training.
  double content_mae_initial = 0;
  double content_mae_final = 0;

  StyleModel(TrainConfig cfg)
      : config(std::move(cfg)), net(config.transformer, config.seed) {}
};

using TrainProgress = std::function<void(int iteration, const LossBreakdown&)>;

// Trains one transformation network against a fixed style image, cycling
// through the content corpus in order. Deterministic given the seed and
// corpus order. Throws DivergenceError on a non-finite loss.
StyleModel train_style_model(const Raster& style, std::span<const Raster> content_corpus,
                             const TrainConfig& cfg, const TrainProgress& progress = {});

// Output has the input's dimensions; values are clamped to [0, 255].
Raster stylize(const StyleModel& model, const Raster& image);

// Checkpoint directory: `weights` blob, `config.json`, `loss_curve.csv`.
void save_style_model(const StyleModel& model, const std::filesystem::path& dir);
StyleModel load_style_model(const std::filesystem::path& dir);

double mean_abs_error(const Raster& a, const Raster& b);

}  // namespace panelstyle::stylenet
