// Copyright 2026 The Panelstyle Authors
// SPDX-License-Identifier: Apache-2.0

#include "cloze/toy_corpus.hpp"

#include <algorithm>
#include <cmath>

#include "core/error.hpp"
#include "nn/tensor.hpp"

namespace panelstyle::cloze {

namespace {

Color hue_color(double hue) {
  const double h = hue * 6.0;
  const int sector = int(h) % 6;
  const double f = h - std::floor(h);
  const auto up = std::uint8_t(std::lround(40 + 180 * f));
  const auto down = std::uint8_t(std::lround(220 - 180 * f));
  constexpr std::uint8_t hi = 220, lo = 40;
  switch (sector) {
    case 0: return {hi, up, lo};
    case 1: return {down, hi, lo};
    case 2: return {lo, hi, up};
    case 3: return {lo, down, hi};
    case 4: return {up, lo, hi};
    default: return {hi, lo, down};
  }
}

void draw_shape(Raster& img, int shape, int cx, int cy, int r, Color c) {
  for (int y = cy - r; y <= cy + r; ++y)
    for (int x = cx - r; x <= cx + r; ++x) {
      if (x < 0 || y < 0 || x >= img.width() || y >= img.height()) continue;
      const int dx = x - cx, dy = y - cy;
      bool inside = false;
      switch (shape) {
        case 0: inside = true; break;                                  // square
        case 1: inside = dx * dx + dy * dy <= r * r; break;            // disc
        case 2: inside = std::abs(dx) + std::abs(dy) <= r; break;      // diamond
        default: inside = std::abs(dx) <= r / 3 || std::abs(dy) <= r / 3; break;  // cross
      }
      if (inside) img.set(x, y, c);
    }
}

}  // namespace

std::vector<PageRecord> make_toy_corpus(const ToyCorpusConfig& cfg) {
  if (cfg.books < 1 || cfg.pages_per_book < 1 || cfg.panels_per_page < 1 || cfg.panel_size < 16)
    throw ConfigError("toy corpus: counts must be positive and panel_size at least 16");
  nn::Rng rng(cfg.seed);
  const int s = cfg.panel_size;
  std::vector<PageRecord> pages;
  for (int b = 0; b < cfg.books; ++b)
    for (int p = 0; p < cfg.pages_per_book; ++p) {
      PageRecord page;
      page.book_id = "toy" + std::to_string(b);
      page.page_index = p;
      page.page_id = page.book_id + "_pg" + std::to_string(p);
      page.source = Source::kComics;
      const Color fg = hue_color(rng.uniform());
      const int shape = int(rng.below(4));
      const int r = s / 10 + int(rng.below(std::uint64_t(s / 16 + 1)));
      const int n = cfg.panels_per_page;
      const double step = double(s - 2 * r - 4) / double(std::max(1, n - 1));
      const int x0 = r + 2;
      const int cy = r + 2 + int(rng.below(std::uint64_t(std::max(1, s - 2 * r - 4))));
      const auto tint = std::uint8_t(225 + rng.below(25));
      page.image = Raster(s * n, s, Color{tint, tint, tint});
      for (int k = 0; k < n; ++k) {
        PanelRecord panel;
        panel.panel_id = page.page_id + "_p" + std::to_string(k);
        panel.bbox = {k * s, 0, s, s};
        panel.reading_index = k;
        panel.image = Raster(s, s, Color{tint, tint, tint});
        draw_shape(panel.image, shape, x0 + int(std::lround(k * step)), cy, r, fg);
        paste(page.image, panel.image, k * s, 0);
        page.panels.push_back(std::move(panel));
      }
      pages.push_back(std::move(page));
    }
  return pages;
}

}  // namespace panelstyle::cloze
