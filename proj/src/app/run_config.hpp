// Copyright 2026 The Panelstyle Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "cloze/model.hpp"
#include "core/image.hpp"
#include "core/masking.hpp"
#include "pipeline/transfer.hpp"
#include "stylenet/style_model.hpp"

namespace panelstyle::app {

namespace fs = std::filesystem;

struct RunPaths {
  std::vector<fs::path> style_corpus;        // comics titles: exemplars, feature_C training
  std::vector<fs::path> content_corpus;      // manga titles: transferred and evaluated
  std::vector<fs::path> manga_train_corpus;  // manga titles for feature_M training
  fs::path art_catalog;                      // exemplar catalog for art-style treatments
  fs::path catalog;                          // comics exemplar catalog (written by ingest)
  fs::path templates;                        // layout template file or directory
  fs::path models;                           // style model store
  fs::path work;                             // crops, masks, cloze sets and models
  fs::path output;                           // transferred panels, pages and reports
};

struct RunConfig {
  std::uint64_t seed = 1;
  int jobs = 0;  // 0: one per logical core
  RunPaths paths;
  double row_overlap = 0.5;
  MaskVariant mask_variant = MaskVariant::kRect;
  Color fill = kDefaultFill;
  Treatment treatment;
  double feather_radius = 0;
  int page_width = 0;
  int gutter = kDefaultGutterPx;
  stylenet::TrainConfig stylenet;
  int content_limit = 8;  // content panels per style model
  cloze::ClozeConfig cloze;
  std::map<cloze::EvalSetting, Treatment> setting_treatments;

  int resolved_jobs() const;
  const Treatment& treatment_for(cloze::EvalSetting s) const;
};

RunConfig default_run_config();

// Relative paths resolve against `base_dir`; the result holds absolute
// paths only. Unknown top-level keys are rejected.
RunConfig run_config_from_json(const nlohmann::json& j, const fs::path& base_dir);
nlohmann::json to_json(const RunConfig& cfg);

RunConfig load_run_config(const fs::path& file);

// Dotted-path override, e.g. set_value(doc, "stylenet.iterations", "200").
// The value is parsed as JSON and falls back to a plain string.
void set_value(nlohmann::json& doc, const std::string& dotted_key, const std::string& value);

// Snapshot = {"command": ..., "args": {...}, "config": resolved config}.
void write_snapshot(const fs::path& file, const std::string& command, const nlohmann::json& args,
                    const RunConfig& cfg);

}  // namespace panelstyle::app
