// Copyright 2026 The Panelstyle Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "core/corpus.hpp"
#include "core/image.hpp"
#include "core/masking.hpp"
#include "core/style_select.hpp"
#include "nn/tensor.hpp"

namespace panelstyle::testing {

namespace fs = std::filesystem;

// Fresh directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "t");
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

Raster random_raster(int w, int h, nn::Rng& rng);
Raster solid(int w, int h, Color c);
Mask random_mask(int w, int h, nn::Rng& rng);

template <typename T>
nn::Tensor<T> random_tensor(int c, int h, int w, nn::Rng& rng, double lo = -1, double hi = 1) {
  nn::Tensor<T> t(c, h, w);
  for (auto& v : t.data) v = T(rng.uniform(lo, hi));
  return t;
}

// Random partition of a w × h panel into three channels, textbox and
// foreground possibly empty.
MaskSet random_partition(int w, int h, nn::Rng& rng, bool allow_empty = true);

PanelRecord make_panel(const std::string& id, int w, int h,
                       std::vector<Rect> textboxes = {}, std::vector<Rect> bodies = {},
                       std::vector<Rect> faces = {});

std::string read_file(const fs::path& p);
void write_file(const fs::path& p, const std::string& text);

// Fixture titles written once per process and shared by the tests.
const fs::path& fixture_root();
const std::vector<PageRecord>& fixture_comics();  // 4 annotated pages
const std::vector<PageRecord>& fixture_manga();   // 3 annotated pages

namespace oracle {

// Explicit-loop reference implementations, written independently of the
// library code paths.
template <typename T>
std::vector<std::vector<double>> gram(const nn::Tensor<T>& f) {
  const int c = f.c, n = f.h * f.w;
  std::vector<std::vector<double>> g(c, std::vector<double>(c, 0.0));
  for (int i = 0; i < c; ++i)
    for (int j = 0; j < c; ++j) {
      double s = 0;
      for (int y = 0; y < f.h; ++y)
        for (int x = 0; x < f.w; ++x) s += double(f.at(i, y, x)) * double(f.at(j, y, x));
      g[i][j] = s / double(c * n);
    }
  return g;
}

template <typename T>
double feature_loss(const nn::Tensor<T>& a, const nn::Tensor<T>& b) {
  double s = 0;
  for (int ch = 0; ch < a.c; ++ch)
    for (int y = 0; y < a.h; ++y)
      for (int x = 0; x < a.w; ++x) {
        const double d = double(a.at(ch, y, x)) - double(b.at(ch, y, x));
        s += d * d;
      }
  return s / double(a.c * a.h * a.w);
}

template <typename T>
double style_loss(const nn::Tensor<T>& a, const nn::Tensor<T>& b) {
  const auto ga = gram(a), gb = gram(b);
  double s = 0;
  for (std::size_t i = 0; i < ga.size(); ++i)
    for (std::size_t j = 0; j < ga.size(); ++j) s += (ga[i][j] - gb[i][j]) * (ga[i][j] - gb[i][j]);
  return s;
}

// Luma, exact area-weighted 8 × 8 reduction, ≥-mean threshold, bit 63 for
// the top-left cell.
std::uint64_t average_hash(const Raster& img);

int popcount_distance(std::uint64_t a, std::uint64_t b);

// Per-pixel priority selection: textbox, then foreground, then background.
Raster blend(const std::map<Channel, Raster>& outputs, const MaskSet& masks);

// Scanline even-odd fill at pixel centers.
std::size_t polygon_area_pixels(const Polygon& poly, int w, int h);

std::array<double, 3> softmax(double a, double b, double c);

}  // namespace oracle

}  // namespace panelstyle::testing
