// Copyright 2026 The Panelstyle Authors
// SPDX-License-Identifier: Apache-2.0

#include "synth/fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include <json.hpp>

#include "core/error.hpp"
#include "nn/tensor.hpp"

namespace panelstyle::synth {

using nlohmann::json;

namespace {

Color random_color(nn::Rng& rng, int lo, int hi) {
  auto c = [&] { return std::uint8_t(lo + int(rng.below(std::uint64_t(hi - lo + 1)))); };
  const auto r = c(), g = c(), b = c();
  return {r, g, b};
}

void fill_ellipse(Raster& img, const Rect& r, Color c) {
  const double cx = r.x + r.w / 2.0, cy = r.y + r.h / 2.0, rx = r.w / 2.0, ry = r.h / 2.0;
  for (int y = std::max(0, r.y); y < std::min(img.height(), r.bottom()); ++y)
    for (int x = std::max(0, r.x); x < std::min(img.width(), r.right()); ++x) {
      const double dx = (x + 0.5 - cx) / rx, dy = (y + 0.5 - cy) / ry;
      if (dx * dx + dy * dy <= 1.0) img.set(x, y, c);
    }
}

void fill_rect(Raster& img, const Rect& r, Color c) {
  for (int y = std::max(0, r.y); y < std::min(img.height(), r.bottom()); ++y)
    for (int x = std::max(0, r.x); x < std::min(img.width(), r.right()); ++x) img.set(x, y, c);
}

void outline(Raster& img, const Rect& r, int t, Color c) {
  fill_rect(img, {r.x, r.y, r.w, t}, c);
  fill_rect(img, {r.x, r.bottom() - t, r.w, t}, c);
  fill_rect(img, {r.x, r.y, t, r.h}, c);
  fill_rect(img, {r.right() - t, r.y, t, r.h}, c);
}

json rect_json(const Rect& r) { return json::array({r.x, r.y, r.w, r.h}); }

json ellipse_polygon(const Rect& r) {
  json pts = json::array();
  const double cx = r.x + r.w / 2.0, cy = r.y + r.h / 2.0;
  for (int k = 0; k < 16; ++k) {
    const double a = 2 * std::numbers::pi * k / 16;
    const double x = std::round((cx + r.w / 2.0 * std::cos(a)) * 10) / 10;
    const double y = std::round((cy + r.h / 2.0 * std::sin(a)) * 10) / 10;
    pts.push_back(json::array({x, y}));
  }
  return pts;
}

Rect clip(const Rect& r, const Rect& bounds) { return r.intersect(bounds); }

const std::vector<std::vector<int>>& row_patterns() {
  static const std::vector<std::vector<int>> p = {{2, 2}, {2, 1, 2}, {1, 2, 2}, {3, 3}, {2, 2, 2}, {1, 3}};
  return p;
}

json draw_panel(Raster& page, const Rect& box, nn::Rng& rng) {
  const Color base = random_color(rng, 90, 230);
  const Color stripe = random_color(rng, 60, 200);
  const int period = 6 + int(rng.below(10));
  for (int y = box.y; y < box.bottom(); ++y)
    for (int x = box.x; x < box.right(); ++x) {
      const double t = double(y - box.y) / box.h;
      Color c{std::uint8_t(base.r * (0.8 + 0.2 * t)), std::uint8_t(base.g * (0.8 + 0.2 * t)),
              std::uint8_t(base.b * (0.8 + 0.2 * t))};
      if (((x + y) / period) % 4 == 0) c = stripe;
      page.set(x, y, c);
    }

  json panel = {{"bbox", rect_json(box)}, {"textboxes", json::array()},
                {"bodies", json::array()}, {"faces", json::array()}};
  const int figures = 1 + int(rng.below(3));
  for (int f = 0; f < figures; ++f) {
    const double frac = 0.35 + 0.5 * rng.uniform();
    const int h = std::max(12, int(box.h * frac));
    const int w = std::max(8, std::min(box.w - 4, int(h * 0.45)));
    const int x = box.x + 2 + int(rng.below(std::uint64_t(std::max(1, box.w - w - 4))));
    const int y = box.bottom() - h - 2 + int(rng.below(std::uint64_t(std::max(1, h / 6))));
    const Rect body = clip({x, y, w, h}, box);
    const int head = std::max(6, w * 2 / 3);
    const Rect face = clip({x + (w - head) / 2, y, head, head}, box);
    const Rect torso = clip({x, y + head * 3 / 4, w, h - head * 3 / 4}, box);
    fill_ellipse(page, torso, random_color(rng, 20, 200));
    fill_ellipse(page, face, Color{236, 200, 170});
    fill_rect(page, {face.x + face.w / 4, face.y + face.h / 3, std::max(1, face.w / 8), 2}, {20, 20, 20});
    fill_rect(page, {face.x + face.w * 5 / 8, face.y + face.h / 3, std::max(1, face.w / 8), 2}, {20, 20, 20});
    panel["bodies"].push_back({{"rect", rect_json(body)}, {"polygon", ellipse_polygon(body)}});
    panel["faces"].push_back({{"rect", rect_json(face)}});
  }
  if (rng.uniform() < 0.75) {
    const int w = std::max(16, int(box.w * (0.35 + 0.15 * rng.uniform())));
    const int h = std::max(10, int(box.h * 0.2));
    const int x = box.x + 4 + int(rng.below(std::uint64_t(std::max(1, box.w - w - 8))));
    const Rect balloon = clip({x, box.y + 4, w, h}, box);
    fill_ellipse(page, balloon, Color{0, 0, 0});
    const Rect inner{balloon.x + 2, balloon.y + 2, balloon.w - 4, balloon.h - 4};
    fill_ellipse(page, inner, Color{255, 255, 255});
    for (int line = 0; line < 2; ++line)
      fill_rect(page,
                {balloon.x + balloon.w / 4, balloon.y + balloon.h * (2 + 2 * line) / 7, balloon.w / 2, 2},
                {30, 30, 30});
    panel["textboxes"].push_back({{"rect", rect_json(balloon)}, {"polygon", ellipse_polygon(balloon)}});
  }
  outline(page, box, 2, Color{0, 0, 0});
  return panel;
}

}  // namespace

std::filesystem::path write_fixture_title(const std::filesystem::path& dir,
                                          const FixtureTitleConfig& cfg) {
  if (cfg.pages < 1 || cfg.width < 120 || cfg.height < 120)
    throw ConfigError("fixture title: need at least one page of 120 × 120 pixels");
  std::filesystem::create_directories(dir / "images");
  nn::Rng rng(cfg.seed);
  json pages = json::array();
  constexpr int margin = 10, gutter = 10;
  for (int p = 0; p < cfg.pages; ++p) {
    const std::string page_id = cfg.title + "_" + std::to_string(p + 1);
    Raster page(cfg.width, cfg.height, Color{255, 255, 255});
    const auto& rows = row_patterns()[std::size_t(rng.below(row_patterns().size()))];
    const int row_h = (cfg.height - 2 * margin - gutter * (int(rows.size()) - 1)) / int(rows.size());
    json panels = json::array();
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const int y = margin + int(r) * (row_h + gutter);
      const int n = rows[r];
      const int avail = cfg.width - 2 * margin - gutter * (n - 1);
      std::vector<int> widths(std::size_t(n), avail / n);
      if (n == 2) {
        widths[0] = int(avail * (0.35 + 0.3 * rng.uniform()));
        widths[1] = avail - widths[0];
      }
      int x = margin;
      for (int k = 0; k < n; ++k) {
        panels.push_back(draw_panel(page, {x, y, widths[std::size_t(k)], row_h}, rng));
        x += widths[std::size_t(k)] + gutter;
      }
    }
    const std::string rel = "images/" + page_id + ".png";
    save_png(page, dir / rel);
    pages.push_back({{"page_id", page_id}, {"image", rel}, {"panels", panels}});
  }
  const auto path = dir / (cfg.title + ".json");
  std::ofstream out(path);
  out << json{{"title", cfg.title}, {"source", std::string(to_string(cfg.source))}, {"pages", pages}}
             .dump(1)
      << '\n';
  if (!out) throw Error(ErrorKind::kInternal, "cannot write " + path.string());
  return path;
}

std::vector<LayoutTemplate> make_template_library(Source style) {
  auto row_layout = [&](const std::string& id, const std::vector<int>& rows) {
    LayoutTemplate t;
    t.template_id = id;
    t.source_style = style;
    const double h = 1.0 / double(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      std::vector<UnitRect> row;
      for (int k = 0; k < rows[r]; ++k)
        row.push_back({double(k) / rows[r], double(r) * h, 1.0 / rows[r], h});
      t.rows.push_back(std::move(row));
      t.panel_count += rows[r];
    }
    return t;
  };
  const std::string prefix = style == Source::kManga ? "manga_" : "comics_";
  return {row_layout(prefix + "1", {1}),          row_layout(prefix + "2", {1, 1}),
          row_layout(prefix + "3", {1, 2}),       row_layout(prefix + "4a", {2, 2}),
          row_layout(prefix + "4b", {1, 2, 1}),   row_layout(prefix + "5", {2, 1, 2}),
          row_layout(prefix + "6", {2, 2, 2})};
}

std::vector<StyleExemplar> make_art_exemplars(int count, int size, std::uint64_t seed) {
  if (count < 1 || size < 8) throw ConfigError("art exemplars: need count ≥ 1 and size ≥ 8");
  nn::Rng rng(seed);
  std::vector<StyleExemplar> out;
  for (int i = 0; i < count; ++i) {
    StyleExemplar ex;
    ex.exemplar_id = "art" + std::to_string(i);
    ex.book_id = "art";
    ex.image = Raster(size, size);
    const Color a = random_color(rng, 0, 255), b = random_color(rng, 0, 255);
    const double fx = 0.05 + 0.3 * rng.uniform(), fy = 0.05 + 0.3 * rng.uniform();
    const double phase = 6.3 * rng.uniform();
    for (int y = 0; y < size; ++y)
      for (int x = 0; x < size; ++x) {
        const double t = 0.5 + 0.5 * std::sin(fx * x + fy * y + phase + 2 * std::sin(0.11 * x * fy * 10));
        ex.image.set(x, y, Color{std::uint8_t(a.r * t + b.r * (1 - t)), std::uint8_t(a.g * t + b.g * (1 - t)),
                                 std::uint8_t(a.b * t + b.b * (1 - t))});
      }
    compute_hashes(ex);
    out.push_back(std::move(ex));
  }
  return out;
}

}  // namespace panelstyle::synth
