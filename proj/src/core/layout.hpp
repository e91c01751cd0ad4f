// Copyright 2026 The Panelstyle Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "core/corpus.hpp"
#include "core/geometry.hpp"
#include "core/image.hpp"

namespace panelstyle {

// Slot in page-fraction coordinates, [0, 1] on both axes.
struct UnitRect {
  double x = 0, y = 0, w = 0, h = 0;
  friend bool operator==(const UnitRect&, const UnitRect&) = default;
};

struct LayoutTemplate {
  std::string template_id;
  Source source_style = Source::kComics;
  int panel_count = 0;
  std::vector<std::vector<UnitRect>> rows;
  double page_aspect = 1.5;  // height / width

  int slot_count() const;
  // Slots in the reading order of the template's style.
  std::vector<UnitRect> ordered_slots() const;
};

// Throws SchemaError when slot count, bounds or in-row overlap are violated.
void validate(const LayoutTemplate& t);

// A JSON file holding one template, an array of them, or {"templates": [...]};
// a directory loads every *.json inside it (sorted by name).
std::vector<LayoutTemplate> load_template_library(const std::filesystem::path& path);
void save_template(const LayoutTemplate& t, const std::filesystem::path& path);

// Seeded, deterministic choice among templates with exactly `panel_count`
// slots. Otherwise the nearest smaller count is padded with one appended
// full-width row per extra panel; with nothing smaller, the nearest larger
// template is used as is.
LayoutTemplate pick_template(int panel_count, const std::vector<LayoutTemplate>& library,
                             std::uint64_t seed);

inline constexpr int kDefaultGutterPx = 8;

struct Placement {
  std::string panel_id;
  Rect slot;    // page pixels, after the gutter inset
  Rect placed;  // contain-fit rectangle inside the slot
};

struct ComposedPage {
  Raster image;
  std::string template_id;
  std::vector<Placement> placements;
};

// Uniform scale that fits (w, h) inside `slot`, centered.
Rect contain_fit(int width, int height, const Rect& slot);

// Pixel rectangle of a unit slot on a page, inset by half the gutter on
// every side so adjacent slots are at least `gutter_px` apart.
Rect slot_pixels(const UnitRect& slot, int page_width, int page_height, int gutter_px);

struct PanelImage {
  std::string panel_id;
  const Raster* image = nullptr;
};

ComposedPage compose_page(const std::vector<PanelImage>& panels, const LayoutTemplate& layout,
                          int page_width_px, int gutter_px = kDefaultGutterPx);

}  // namespace panelstyle
