// Copyright 2026 The Panelstyle Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "core/corpus.hpp"
#include "core/layout.hpp"
#include "core/masking.hpp"
#include "core/style_select.hpp"
#include "stylenet/style_model.hpp"

namespace panelstyle {

using stylenet::StyleModel;

enum class StyleSource { kArtStyle, kComicPanel };
enum class Masking { kNone, kRect, kFit };

struct Treatment {
  StyleSource style_source = StyleSource::kComicPanel;
  Masking masking = Masking::kRect;
  bool composition_select = false;

  // "CP_R_M", "AS_N_M", "CP_F_M_C", ...
  std::string label() const;
  MaskVariant mask_variant() const;
  friend bool operator==(const Treatment&, const Treatment&) = default;
};

// Accepts "CP,R_M", "CP,F_M,C" and the label form "CP_F_M_C". Throws
// ConfigError on unknown parts or on composition selection without masks.
Treatment parse_treatment(std::string_view text);
void validate(const Treatment& t);

// Trained models keyed by (exemplar, channel). Directory layout:
// {root}/{exemplar_id}.{channel}/. Loaded lazily and cached; safe to share
// across threads.
class ModelStore {
 public:
  explicit ModelStore(std::filesystem::path root = {}) : root_(std::move(root)) {}

  static std::filesystem::path model_dir(const std::filesystem::path& root,
                                         const std::string& exemplar_id, Channel channel);

  void insert(const std::string& exemplar_id, Channel channel,
              std::shared_ptr<const StyleModel> model);
  bool contains(const std::string& exemplar_id, Channel channel) const;
  // Throws AssetError naming the exemplar and channel when absent.
  std::shared_ptr<const StyleModel> get(const std::string& exemplar_id, Channel channel) const;

  const std::filesystem::path& root() const { return root_; }

 private:
  static std::string key(const std::string& exemplar_id, Channel channel);

  std::filesystem::path root_;
  mutable std::mutex mu_;
  mutable std::map<std::string, std::shared_ptr<const StyleModel>> cache_;
};

struct ChannelRun {
  Channel channel = Channel::kWhole;
  bool skipped = false;  // empty mask: nothing to stylize
  std::string exemplar_id;
  std::string model_id;
  int distance = 0;
  bool composition_filtered = false;
  double stylize_ms = 0;
};

struct TransferJob {
  std::string panel_id;
  int reading_index = 0;
  Treatment treatment;
  CompositionClass composition;
  std::optional<MaskSet> masks;
  std::vector<ChannelRun> channels;
  std::map<Channel, Raster> outputs;
  std::optional<Raster> blended;
  bool reused = false;
};

struct TransferOptions {
  Color fill = kDefaultFill;
  double feather_radius = 0;
  int jobs = 1;
  // Order in which channel tasks are issued; the blended result must not
  // depend on it.
  std::array<Channel, 3> execution_order = {Channel::kBackground, Channel::kForeground,
                                            Channel::kTextbox};
};

// Hard compositing: background, then foreground over it, then textbox.
// With feather_radius > 0 the foreground and textbox masks are softened by
// a Gaussian before compositing.
Raster blend(const std::map<Channel, Raster>& outputs, const MaskSet& masks,
             double feather_radius = 0);

TransferJob run_panel(const PanelRecord& panel, const Treatment& treatment,
                      std::span<const StyleExemplar> catalog, const ModelStore& store,
                      const TransferOptions& options = {});

struct PageOptions {
  TransferOptions transfer;
  std::uint64_t layout_seed = 0;
  int page_width_px = 0;  // 0: width of the source page, or 800 when unknown
  int gutter_px = kDefaultGutterPx;
  // Returns a previously written output for a panel to skip its stylize calls.
  std::function<std::optional<Raster>(const PanelRecord&)> reuse;
};

struct PageTransfer {
  std::string page_id;
  Treatment treatment;
  std::vector<TransferJob> jobs;  // reading order
  ComposedPage composed;
  double total_ms = 0;
};

PageTransfer run_page(const PageRecord& page, const Treatment& treatment,
                      std::span<const StyleExemplar> catalog, const ModelStore& store,
                      const std::vector<LayoutTemplate>& templates, const PageOptions& options = {});

// The page treated as one panel without annotations (whole-page baseline).
PageRecord as_single_panel(const PageRecord& page);

// Selections, distances, placements and timings. Timings live under
// "timings_ms" keys; strip_timings removes them for comparisons.
nlohmann::json trace_json(const PageTransfer& result);
nlohmann::json strip_timings(nlohmann::json trace);

// Writes {panel_id}.png per panel, page.png and trace.json into `dir`.
void write_page_outputs(const PageTransfer& result, const std::filesystem::path& dir);

}  // namespace panelstyle
