// Copyright 2026 The Panelstyle Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/image.hpp"

#include <png.h>
#include <jpeglib.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>

#include "core/error.hpp"

namespace panelstyle {

Raster::Raster(int width, int height, Color fill)
    : width_(width), height_(height), data_(std::size_t(width) * height * 3) {
  PANELSTYLE_REQUIRE(width >= 0 && height >= 0, "raster dimensions must be non-negative");
  for (std::size_t i = 0; i < pixel_count(); ++i) {
    data_[i * 3] = fill.r;
    data_[i * 3 + 1] = fill.g;
    data_[i * 3 + 2] = fill.b;
  }
}

std::size_t Mask::count() const {
  std::size_t n = 0;
  for (auto v : data_) n += v;
  return n;
}

void Mask::fill_rect(const Rect& r, std::uint8_t v) {
  const Rect c = r.intersect({0, 0, width_, height_});
  for (int y = c.y; y < c.bottom(); ++y)
    for (int x = c.x; x < c.right(); ++x) set(x, y, v);
}

Mask Mask::inverted() const {
  Mask out = *this;
  for (auto& v : out.data_) v = v ? 0 : 1;
  return out;
}

Raster crop(const Raster& src, const Rect& r) {
  PANELSTYLE_REQUIRE((!r.empty() && Rect{0, 0, src.width(), src.height()}.contains(r)),
                     "crop rectangle outside image bounds");
  Raster out(r.w, r.h);
  for (int y = 0; y < r.h; ++y)
    std::memcpy(out.pixel(0, y), src.pixel(r.x, r.y + y), std::size_t(r.w) * 3);
  return out;
}

void paste(Raster& dst, const Raster& src, int x, int y) {
  const Rect c = Rect{x, y, src.width(), src.height()}.intersect({0, 0, dst.width(), dst.height()});
  for (int yy = c.y; yy < c.bottom(); ++yy)
    std::memcpy(dst.pixel(c.x, yy), src.pixel(c.x - x, yy - y), std::size_t(c.w) * 3);
}

GrayPlane to_gray(const Raster& img) {
  GrayPlane g{img.width(), img.height(), std::vector<double>(img.pixel_count())};
  const auto b = img.bytes();
  for (std::size_t i = 0; i < g.values.size(); ++i)
    g.values[i] = 0.299 * b[i * 3] + 0.587 * b[i * 3 + 1] + 0.114 * b[i * 3 + 2];
  return g;
}

namespace {

// Sparse overlap weights: for each output index the (source index, overlap)
// pairs of the box [o*scale, (o+1)*scale).
struct AxisWeights {
  std::vector<std::vector<std::pair<int, double>>> taps;
  double norm = 1.0;
};

AxisWeights axis_weights(int src, int dst) {
  AxisWeights w;
  w.taps.resize(dst);
  const double scale = double(src) / dst;
  w.norm = scale;
  for (int o = 0; o < dst; ++o) {
    const double lo = o * scale, hi = (o + 1) * scale;
    for (int s = int(std::floor(lo)); s < int(std::ceil(hi)) && s < src; ++s) {
      const double ov = std::min(hi, s + 1.0) - std::max(lo, double(s));
      if (ov > 0) w.taps[o].emplace_back(s, ov);
    }
  }
  return w;
}

template <typename Get, typename Put>
void resample(int sw, int sh, int dw, int dh, int channels, Get get, Put put) {
  const AxisWeights wx = axis_weights(sw, dw), wy = axis_weights(sh, dh);
  std::vector<double> rows(std::size_t(sh) * dw * channels);
  for (int y = 0; y < sh; ++y)
    for (int ox = 0; ox < dw; ++ox)
      for (int c = 0; c < channels; ++c) {
        double acc = 0;
        for (auto [sx, w] : wx.taps[ox]) acc += w * get(sx, y, c);
        rows[(std::size_t(y) * dw + ox) * channels + c] = acc;
      }
  const double norm = wx.norm * wy.norm;
  for (int oy = 0; oy < dh; ++oy)
    for (int ox = 0; ox < dw; ++ox)
      for (int c = 0; c < channels; ++c) {
        double acc = 0;
        for (auto [sy, w] : wy.taps[oy]) acc += w * rows[(std::size_t(sy) * dw + ox) * channels + c];
        put(ox, oy, c, acc / norm);
      }
}

}  // namespace

GrayPlane resize_area(const GrayPlane& src, int width, int height) {
  PANELSTYLE_REQUIRE(src.width > 0 && src.height > 0 && width > 0 && height > 0,
                     "resize requires non-empty source and target");
  GrayPlane out{width, height, std::vector<double>(std::size_t(width) * height)};
  resample(
      src.width, src.height, width, height, 1, [&](int x, int y, int) { return src.at(x, y); },
      [&](int x, int y, int, double v) { out.values[std::size_t(y) * width + x] = v; });
  return out;
}

Raster resize_area(const Raster& src, int width, int height) {
  PANELSTYLE_REQUIRE(!src.empty() && width > 0 && height > 0,
                     "resize requires non-empty source and target");
  if (src.width() == width && src.height() == height) return src;
  Raster out(width, height);
  resample(
      src.width(), src.height(), width, height, 3,
      [&](int x, int y, int c) { return double(src.pixel(x, y)[c]); },
      [&](int x, int y, int c, double v) {
        out.pixel(x, y)[c] = std::uint8_t(std::clamp(std::lround(v), 0L, 255L));
      });
  return out;
}

namespace {

bool has_png_signature(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  unsigned char sig[8] = {};
  in.read(reinterpret_cast<char*>(sig), 8);
  return in.gcount() == 8 && png_sig_cmp(sig, 0, 8) == 0;
}

Raster load_png(const std::filesystem::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str()))
    throw SchemaError("cannot decode PNG " + path.string() + ": " + image.message);
  image.format = PNG_FORMAT_RGB;
  Raster out(int(image.width), int(image.height));
  if (!png_image_finish_read(&image, nullptr, out.bytes().data(), 0, nullptr)) {
    png_image_free(&image);
    throw SchemaError("cannot decode PNG " + path.string() + ": " + image.message);
  }
  return out;
}

struct JpegErrorManager {
  jpeg_error_mgr pub;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

Raster load_jpeg(const std::filesystem::path& path) {
  std::unique_ptr<FILE, int (*)(FILE*)> file(std::fopen(path.c_str(), "rb"), &std::fclose);
  if (!file) throw AssetError("cannot open image " + path.string());
  jpeg_decompress_struct cinfo;
  JpegErrorManager err;
  cinfo.err = jpeg_std_error(&err.pub);
  err.pub.error_exit = jpeg_error_exit;
  Raster out;
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    throw SchemaError("cannot decode JPEG " + path.string() + ": " + err.message);
  }
  jpeg_create_decompress(&cinfo);
  jpeg_stdio_src(&cinfo, file.get());
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  out = Raster(int(cinfo.output_width), int(cinfo.output_height));
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = out.pixel(0, int(cinfo.output_scanline));
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return out;
}

void write_png(const std::filesystem::path& path, int width, int height, int color_type,
               int bit_depth, const std::vector<std::vector<png_byte>>& rows) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::unique_ptr<FILE, int (*)(FILE*)> file(std::fopen(path.c_str(), "wb"), &std::fclose);
  if (!file) throw AssetError("cannot write " + path.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorKind::kInternal, "PNG encoder failed for " + path.string());
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, png_uint_32(width), png_uint_32(height), bit_depth, color_type,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (const auto& row : rows) png_write_row(png, row.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace

Raster load_image(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw AssetError("image not found: " + path.string());
  return has_png_signature(path) ? load_png(path) : load_jpeg(path);
}

void save_png(const Raster& img, const std::filesystem::path& path) {
  PANELSTYLE_REQUIRE(!img.empty(), "cannot save an empty raster");
  std::vector<std::vector<png_byte>> rows(img.height());
  for (int y = 0; y < img.height(); ++y)
    rows[y].assign(img.pixel(0, y), img.pixel(0, y) + std::size_t(img.width()) * 3);
  write_png(path, img.width(), img.height(), PNG_COLOR_TYPE_RGB, 8, rows);
}

void save_mask_png(const Mask& mask, const std::filesystem::path& path) {
  PANELSTYLE_REQUIRE(mask.width() > 0 && mask.height() > 0, "cannot save an empty mask");
  std::vector<std::vector<png_byte>> rows(mask.height(),
                                          std::vector<png_byte>((mask.width() + 7) / 8, 0));
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x)
      if (mask.at(x, y)) rows[y][x / 8] |= png_byte(0x80 >> (x % 8));
  write_png(path, mask.width(), mask.height(), PNG_COLOR_TYPE_GRAY, 1, rows);
}

Mask load_mask_png(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw AssetError("mask not found: " + path.string());
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str()))
    throw SchemaError("cannot decode mask " + path.string() + ": " + image.message);
  image.format = PNG_FORMAT_GRAY;
  std::vector<png_byte> gray(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, gray.data(), 0, nullptr)) {
    png_image_free(&image);
    throw SchemaError("cannot decode mask " + path.string() + ": " + image.message);
  }
  Mask m(int(image.width), int(image.height));
  for (std::size_t i = 0; i < gray.size(); ++i) m.values()[i] = gray[i] >= 128 ? 1 : 0;
  return m;
}

}  // namespace panelstyle
