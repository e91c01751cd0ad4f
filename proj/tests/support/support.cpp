// Copyright 2026 The Panelstyle Authors
// SPDX-License-Identifier: Apache-2.0

#include "support.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "synth/fixtures.hpp"

namespace panelstyle::testing {

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  path_ = fs::temp_directory_path() /
          ("panelstyle_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
  fs::remove_all(path_);
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

Raster random_raster(int w, int h, nn::Rng& rng) {
  Raster r(w, h);
  for (auto& b : r.bytes()) b = std::uint8_t(rng.below(256));
  return r;
}

Raster solid(int w, int h, Color c) { return Raster(w, h, c); }

Mask random_mask(int w, int h, nn::Rng& rng) {
  Mask m(w, h);
  for (auto& v : m.values()) v = std::uint8_t(rng.below(2));
  return m;
}

MaskSet random_partition(int w, int h, nn::Rng& rng, bool allow_empty) {
  MaskSet s;
  s.panel_id = "rand";
  s.textbox = Mask(w, h);
  s.foreground = Mask(w, h);
  s.background = Mask(w, h);
  const bool no_text = allow_empty && rng.below(4) == 0;
  const bool no_fg = allow_empty && rng.below(4) == 0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      int k = int(rng.below(3));
      if (k == 0 && no_text) k = 2;
      if (k == 1 && no_fg) k = 2;
      (k == 0 ? s.textbox : k == 1 ? s.foreground : s.background).set(x, y, 1);
    }
  return s;
}

PanelRecord make_panel(const std::string& id, int w, int h, std::vector<Rect> textboxes,
                       std::vector<Rect> bodies, std::vector<Rect> faces) {
  PanelRecord p;
  p.panel_id = id;
  p.bbox = {0, 0, w, h};
  nn::Rng rng(std::hash<std::string>{}(id));
  p.image = random_raster(w, h, rng);
  for (const auto& r : textboxes) p.textboxes.push_back({AnnotationKind::kTextbox, r, std::nullopt});
  for (const auto& r : bodies) p.bodies.push_back({AnnotationKind::kBody, r, std::nullopt});
  for (const auto& r : faces) p.faces.push_back({AnnotationKind::kFace, r, std::nullopt});
  return p;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary) << text;
}

const fs::path& fixture_root() {
  static const fs::path root = [] {
    const fs::path dir = fs::temp_directory_path() / ("panelstyle_fixtures_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    synth::write_fixture_title(dir / "comics", {"fixcomics", Source::kComics, 4, 360, 540, 11});
    synth::write_fixture_title(dir / "manga", {"fixmanga", Source::kManga, 3, 360, 540, 12});
    std::atexit([] {
      std::error_code ec;
      fs::remove_all(fs::temp_directory_path() / ("panelstyle_fixtures_" + std::to_string(::getpid())), ec);
    });
    return dir;
  }();
  return root;
}

const std::vector<PageRecord>& fixture_comics() {
  static const auto pages = ingest_title(fixture_root() / "comics" / "fixcomics.json",
                                         fixture_root() / "comics", {Source::kComics, 0.5});
  return pages;
}

const std::vector<PageRecord>& fixture_manga() {
  static const auto pages = ingest_title(fixture_root() / "manga" / "fixmanga.json",
                                         fixture_root() / "manga", {Source::kManga, 0.5});
  return pages;
}

namespace oracle {

std::uint64_t average_hash(const Raster& img) {
  const int w = img.width(), h = img.height();
  std::vector<double> luma(std::size_t(w) * h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const Color c = img.at(x, y);
      luma[std::size_t(y) * w + x] = 0.299 * c.r + 0.587 * c.g + 0.114 * c.b;
    }
  // Cell (i, j) covers source x in [j·w/8, (j+1)·w/8) and likewise for y;
  // each source pixel contributes its overlap length on both axes.
  auto overlap = [](double a0, double a1, double b0, double b1) {
    return std::max(0.0, std::min(a1, b1) - std::max(a0, b0));
  };
  std::array<double, 64> cell{};
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) {
      const double y0 = double(i) * h / 8, y1 = double(i + 1) * h / 8;
      const double x0 = double(j) * w / 8, x1 = double(j + 1) * w / 8;
      double sum = 0, area = 0;
      for (int y = 0; y < h; ++y) {
        const double oy = overlap(y0, y1, y, y + 1);
        if (oy <= 0) continue;
        for (int x = 0; x < w; ++x) {
          const double ox = overlap(x0, x1, x, x + 1);
          if (ox <= 0) continue;
          sum += ox * oy * luma[std::size_t(y) * w + x];
          area += ox * oy;
        }
      }
      cell[std::size_t(i * 8 + j)] = sum / area;
    }
  double mean = 0;
  for (double v : cell) mean += v;
  mean /= 64;
  std::uint64_t bits = 0;
  for (int k = 0; k < 64; ++k)
    if (cell[std::size_t(k)] >= mean) bits |= std::uint64_t{1} << (63 - k);
  return bits;
}

int popcount_distance(std::uint64_t a, std::uint64_t b) {
  int n = 0;
  for (int k = 0; k < 64; ++k) n += int(((a >> k) & 1u) != ((b >> k) & 1u));
  return n;
}

Raster blend(const std::map<Channel, Raster>& outputs, const MaskSet& masks) {
  const int w = masks.width(), h = masks.height();
  Raster out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      Channel c = Channel::kBackground;
      if (masks.textbox.at(x, y)) c = Channel::kTextbox;
      else if (masks.foreground.at(x, y)) c = Channel::kForeground;
      auto it = outputs.find(c);
      out.set(x, y, it == outputs.end() ? Color{} : it->second.at(x, y));
    }
  return out;
}

std::size_t polygon_area_pixels(const Polygon& poly, int w, int h) {
  std::size_t count = 0;
  for (int y = 0; y < h; ++y) {
    const double py = y + 0.5;
    std::vector<double> xs;
    for (std::size_t i = 0; i < poly.size(); ++i) {
      const Point a = poly[i], b = poly[(i + 1) % poly.size()];
      if ((a.y <= py && b.y > py) || (b.y <= py && a.y > py))
        xs.push_back(a.x + (py - a.y) * (b.x - a.x) / (b.y - a.y));
    }
    std::sort(xs.begin(), xs.end());
    for (std::size_t k = 0; k + 1 < xs.size(); k += 2)
      for (int x = 0; x < w; ++x) {
        const double px = x + 0.5;
        if (px >= xs[k] && px < xs[k + 1]) ++count;
      }
  }
  return count;
}

std::array<double, 3> softmax(double a, double b, double c) {
  const double ea = std::exp(a), eb = std::exp(b), ec = std::exp(c);
  const double s = ea + eb + ec;
  return {ea / s, eb / s, ec / s};
}

}  // namespace oracle

}  // namespace panelstyle::testing
