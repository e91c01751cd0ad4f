// Copyright 2026 The Panelstyle Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "core/geometry.hpp"

namespace panelstyle {

struct Color {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Color&, const Color&) = default;
};

// 8-bit interleaved RGB image, row-major.
class Raster {
 public:
  Raster() = default;
  Raster(int width, int height, Color fill = {});

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return width_ == 0 || height_ == 0; }
  std::size_t pixel_count() const { return std::size_t(width_) * height_; }

  std::uint8_t* pixel(int x, int y) { return data_.data() + (std::size_t(y) * width_ + x) * 3; }
  const std::uint8_t* pixel(int x, int y) const {
    return data_.data() + (std::size_t(y) * width_ + x) * 3;
  }
  Color at(int x, int y) const {
    const auto* p = pixel(x, y);
    return {p[0], p[1], p[2]};
  }
  void set(int x, int y, Color c) {
    auto* p = pixel(x, y);
    p[0] = c.r, p[1] = c.g, p[2] = c.b;
  }

  std::span<std::uint8_t> bytes() { return data_; }
  std::span<const std::uint8_t> bytes() const { return data_; }

  friend bool operator==(const Raster&, const Raster&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

// Binary raster; every value is 0 or 1.
class Mask {
 public:
  Mask() = default;
  Mask(int width, int height, std::uint8_t value = 0)
      : width_(width), height_(height), data_(std::size_t(width) * height, value) {}

  int width() const { return width_; }
  int height() const { return height_; }
  std::uint8_t at(int x, int y) const { return data_[std::size_t(y) * width_ + x]; }
  void set(int x, int y, std::uint8_t v) { data_[std::size_t(y) * width_ + x] = v; }
  std::span<std::uint8_t> values() { return data_; }
  std::span<const std::uint8_t> values() const { return data_; }

  std::size_t count() const;
  bool any() const { return count() > 0; }
  void fill_rect(const Rect& r, std::uint8_t v = 1);
  Mask inverted() const;

  friend bool operator==(const Mask&, const Mask&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

// Single-channel floating point plane, used for hashing and resampling.
struct GrayPlane {
  int width = 0;
  int height = 0;
  std::vector<double> values;
  double at(int x, int y) const { return values[std::size_t(y) * width + x]; }
};

Raster crop(const Raster& src, const Rect& r);
void paste(Raster& dst, const Raster& src, int x, int y);

// ITU-R BT.601 luma, unrounded.
GrayPlane to_gray(const Raster& img);

// Box-filter (area-averaging) resample. Each output pixel is the
// area-weighted mean of the source region it covers.
GrayPlane resize_area(const GrayPlane& src, int width, int height);
Raster resize_area(const Raster& src, int width, int height);

Raster load_image(const std::filesystem::path& path);
void save_png(const Raster& img, const std::filesystem::path& path);

// Masks are stored as 1-bit grayscale PNG.
void save_mask_png(const Mask& mask, const std::filesystem::path& path);
Mask load_mask_png(const std::filesystem::path& path);

}  // namespace panelstyle
