// Copyright 2026 The Panelstyle Authors
// SPDX-License-Identifier: Apache-2.0

#include "stylenet/style_model.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <utility>

#include "core/error.hpp"
#include "core/log.hpp"
#include "nn/adam.hpp"
#include "nn/serialize.hpp"

namespace panelstyle::stylenet {

using nlohmann::json;

json to_json(const TrainConfig& c) {
  return {
      {"seed", c.seed},
      {"iterations", c.iterations},
      {"learning_rate", c.learning_rate},
      {"image_size", c.image_size},
      {"style_size", c.style_size},
      {"weights", {{"content", c.weights.content}, {"style", c.weights.style}, {"tv", c.weights.tv}}},
      {"layers", {{"content", c.layers.content}, {"style", c.layers.style}}},
      {"transformer",
       {{"base_channels", c.transformer.base_channels},
        {"residual_blocks", c.transformer.residual_blocks}}},
      {"loss_network",
       {{"width_divisor", c.loss_network.width_divisor},
        {"seed", c.loss_network.seed},
        {"weights", c.loss_network.weights}}},
  };
}

TrainConfig train_config_from_json(const json& j) {
  TrainConfig c;
  try {
    c.seed = j.value("seed", c.seed);
    c.iterations = j.value("iterations", c.iterations);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.image_size = j.value("image_size", c.image_size);
    c.style_size = j.value("style_size", c.style_size);
    if (auto it = j.find("weights"); it != j.end()) {
      c.weights.content = it->value("content", c.weights.content);
      c.weights.style = it->value("style", c.weights.style);
      c.weights.tv = it->value("tv", c.weights.tv);
    }
    if (auto it = j.find("layers"); it != j.end()) {
      c.layers.content = it->value("content", c.layers.content);
      c.layers.style = it->value("style", c.layers.style);
    }
    if (auto it = j.find("transformer"); it != j.end()) {
      c.transformer.base_channels = it->value("base_channels", c.transformer.base_channels);
      c.transformer.residual_blocks = it->value("residual_blocks", c.transformer.residual_blocks);
    }
    if (auto it = j.find("loss_network"); it != j.end()) {
      c.loss_network.width_divisor = it->value("width_divisor", c.loss_network.width_divisor);
      c.loss_network.seed = it->value("seed", c.loss_network.seed);
      c.loss_network.weights = it->value("weights", c.loss_network.weights);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("stylenet config: ") + e.what());
  }
  c.loss_network.classifier = false;
  if (c.iterations < 0) throw ConfigError("stylenet config: iterations must be >= 0");
  if (!(c.learning_rate > 0)) throw ConfigError("stylenet config: learning_rate must be > 0");
  if (c.image_size < 0 || c.image_size % 4 != 0)
    throw ConfigError("stylenet config: image_size must be 0 or a positive multiple of 4");
  if (c.style_size < 0) throw ConfigError("stylenet config: style_size must be >= 0");
  return c;
}

double mean_abs_error(const Raster& a, const Raster& b) {
  PANELSTYLE_REQUIRE(a.width() == b.width() && a.height() == b.height(),
                     "mean_abs_error: dimension mismatch");
  const auto x = a.bytes(), y = b.bytes();
  double acc = 0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += std::abs(int(x[i]) - int(y[i]));
  return x.empty() ? 0.0 : acc / double(x.size());
}

namespace {

Raster prepare_content(const Raster& img, int size) {
  if (size > 0) return resize_area(img, size, size);
  const int w = img.width() / 4 * 4, h = img.height() / 4 * 4;
  PANELSTYLE_REQUIRE(w > 0 && h > 0, "content image smaller than 4x4");
  return (w == img.width() && h == img.height()) ? img : crop(img, {0, 0, w, h});
}

// Edge-replicates up to multiples of 4 (at least 8) for the down/up path.
nn::Tensor<float> pad_for_network(const nn::Tensor<float>& x) {
  const int h = std::max(8, (x.h + 3) / 4 * 4), w = std::max(8, (x.w + 3) / 4 * 4);
  if (h == x.h && w == x.w) return x;
  nn::Tensor<float> out(3, h, w);
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < h; ++y)
      for (int xx = 0; xx < w; ++xx) out.at(c, y, xx) = x.at(c, std::min(y, x.h - 1), std::min(xx, x.w - 1));
  return out;
}

bool finite(const LossBreakdown& b) {
  return std::isfinite(b.total) && std::isfinite(b.content) && std::isfinite(b.style) &&
         std::isfinite(b.tv);
}

}  // namespace

StyleModel train_style_model(const Raster& style, std::span<const Raster> content_corpus,
                             const TrainConfig& cfg, const TrainProgress& progress) {
  PANELSTYLE_REQUIRE(!content_corpus.empty(), "train_style_model: content corpus is empty");
  PANELSTYLE_REQUIRE(!style.empty(), "train_style_model: style image is empty");
  StyleModel model(cfg);
  model.config.loss_network.classifier = false;
  PerceptualLoss<float> loss(model.config.loss_network, cfg.layers, cfg.weights);

  const Raster style_img = cfg.style_size > 0 ? resize_area(style, cfg.style_size, cfg.style_size) : style;
  const auto style_target = loss.style_target(nn::to_tensor<float>(style_img));

  std::vector<Raster> corpus;
  corpus.reserve(content_corpus.size());
  for (const auto& img : content_corpus) corpus.push_back(prepare_content(img, cfg.image_size));

  model.content_mae_initial = mean_abs_error(stylize(model, corpus.front()), corpus.front());

  nn::Adam<float> adam(model.net.params(), {cfg.learning_rate, 0.9, 0.999, 1e-8});
  model.loss_curve.reserve(std::size_t(cfg.iterations) + 1);
  for (int it = 0; it <= cfg.iterations; ++it) {
    const Raster& content = corpus[std::size_t(it) % corpus.size()];
    const nn::Tensor<float> x = nn::to_tensor<float>(content);
    const bool update = it < cfg.iterations;
    nn::Tape<float> tape;
    const nn::Tensor<float> y = model.net.forward(x, update ? &tape : nullptr);
    nn::Tensor<float> grad;
    const LossBreakdown b = loss.evaluate(y, loss.content_target(x), style_target, update ? &grad : nullptr);
    if (!finite(b))
      throw DivergenceError("style training diverged at iteration " + std::to_string(it) +
                            " (non-finite loss; try a lower learning rate)");
    model.loss_curve.push_back(b);
    if (progress) progress(it, b);
    if (!update) break;
    model.net.backward(grad, tape);
    adam.step();
  }

  model.content_mae_final = mean_abs_error(stylize(model, corpus.front()), corpus.front());
  return model;
}

Raster stylize(const StyleModel& model, const Raster& image) {
  PANELSTYLE_REQUIRE(!image.empty(), "stylize: empty image");
  const nn::Tensor<float> x = nn::to_tensor<float>(image);
  const nn::Tensor<float> y = model.net.forward(pad_for_network(x), nullptr);
  nn::Tensor<float> out(3, image.height(), image.width());
  for (int c = 0; c < 3; ++c)
    for (int yy = 0; yy < out.h; ++yy)
      for (int xx = 0; xx < out.w; ++xx) out.at(c, yy, xx) = y.at(c, yy, xx);
  return nn::to_raster(out);
}

namespace {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void save_style_model(const StyleModel& model, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  nn::save_blob<float>(dir / "weights", model.net.params());
  json j = {
      {"model_id", model.model_id},
      {"channel", std::string(to_string(model.channel))},
      {"style_exemplar_id", model.style_exemplar_id},
      {"training", to_json(model.config)},
      {"content_mae_initial", model.content_mae_initial},
      {"content_mae_final", model.content_mae_final},
      {"loss_curve", "loss_curve.csv"},
  };
  {
    std::ofstream out(dir / "config.json");
    out << j.dump(2) << '\n';
    if (!out) throw AssetError("cannot write " + (dir / "config.json").string());
  }
  std::ofstream csv(dir / "loss_curve.csv");
  csv << "iteration,total,content,style,tv\n";
  for (std::size_t i = 0; i < model.loss_curve.size(); ++i) {
    const auto& b = model.loss_curve[i];
    csv << i << ',' << format_double(b.total) << ',' << format_double(b.content) << ','
        << format_double(b.style) << ',' << format_double(b.tv) << '\n';
  }
  if (!csv) throw AssetError("cannot write " + (dir / "loss_curve.csv").string());
}

StyleModel load_style_model(const std::filesystem::path& dir) {
  const auto cfg_path = dir / "config.json";
  std::ifstream in(cfg_path);
  if (!in) throw AssetError("style model not found: " + dir.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw SchemaError("corrupt checkpoint " + cfg_path.string() + ": " + e.what());
  }
  if (!j.is_object() || !j.contains("training"))
    throw SchemaError("corrupt checkpoint " + cfg_path.string() + ": missing training config");
  StyleModel model(train_config_from_json(j["training"]));
  try {
    model.model_id = j.value("model_id", "");
    model.channel = parse_channel(j.value("channel", "whole"));
    model.style_exemplar_id = j.value("style_exemplar_id", "");
    model.content_mae_initial = j.value("content_mae_initial", 0.0);
    model.content_mae_final = j.value("content_mae_final", 0.0);
  } catch (const Error& e) {
    throw SchemaError("corrupt checkpoint " + cfg_path.string() + ": " + e.what());
  } catch (const json::exception& e) {
    throw SchemaError("corrupt checkpoint " + cfg_path.string() + ": " + e.what());
  }
  nn::load_blob<float>(dir / "weights", model.net.params());
  for (const auto* p : std::as_const(model.net).params())
    if (!nn::all_finite<float>(p->value))
      throw SchemaError("corrupt checkpoint " + dir.string() + ": non-finite weights in " + p->name);

  if (std::ifstream csv(dir / "loss_curve.csv"); csv) {
    std::string line;
    std::getline(csv, line);
    while (std::getline(csv, line)) {
      LossBreakdown b;
      int idx = 0;
      if (std::sscanf(line.c_str(), "%d,%lf,%lf,%lf,%lf", &idx, &b.total, &b.content, &b.style, &b.tv) == 5)
        model.loss_curve.push_back(b);
    }
  }
  return model;
}

}  // namespace panelstyle::stylenet
