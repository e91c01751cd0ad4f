// Copyright 2026 The Panelstyle Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "core/corpus.hpp"
#include "core/layout.hpp"
#include "core/style_select.hpp"

namespace panelstyle::synth {

// Procedurally drawn, fully annotated pages: framed panels with textured
// backgrounds, figures (body and face boxes, body polygons) and speech
// balloons (textbox boxes and polygons).
struct FixtureTitleConfig {
  std::string title = "fixture";
  Source source = Source::kComics;
  int pages = 3;
  int width = 360;
  int height = 540;
  std::uint64_t seed = 1;
};

// Writes {dir}/{title}.json and {dir}/images/{page_id}.png and returns the
// annotation path. Image paths in the document are relative to `dir`.
std::filesystem::path write_fixture_title(const std::filesystem::path& dir,
                                          const FixtureTitleConfig& cfg);

// Row layouts for 1 to 6 panels, two alternatives for 4.
std::vector<LayoutTemplate> make_template_library(Source style = Source::kComics);

// Unannotated painterly images for art-style treatments.
std::vector<StyleExemplar> make_art_exemplars(int count, int size, std::uint64_t seed);

}  // namespace panelstyle::synth
