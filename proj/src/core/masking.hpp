// Copyright 2026 The Panelstyle Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <string_view>

#include "core/corpus.hpp"
#include "core/image.hpp"

namespace panelstyle {

enum class MaskVariant { kRect, kFit };

// Content channels of a panel. kWhole is the unmasked panel (no-mask
// treatments) and has no mask of its own.
enum class Channel { kTextbox, kForeground, kBackground, kWhole };

inline constexpr std::array<Channel, 3> kMaskChannels = {Channel::kTextbox, Channel::kForeground,
                                                         Channel::kBackground};

std::string_view to_string(MaskVariant v);
std::string_view to_string(Channel c);
MaskVariant parse_mask_variant(std::string_view s);
Channel parse_channel(std::string_view s);

struct MaskSet {
  std::string panel_id;
  MaskVariant variant = MaskVariant::kRect;
  Mask textbox;
  Mask foreground;
  Mask background;

  const Mask& get(Channel c) const;
  int width() const { return background.width(); }
  int height() const { return background.height(); }
};

struct MaskedImage {
  std::string panel_id;
  Channel channel = Channel::kWhole;
  Raster image;
};

inline constexpr Color kDefaultFill{128, 128, 128};

// Rasterizes a polygon with the pixel-center, even-odd rule.
void fill_polygon(Mask& mask, const Polygon& poly, std::uint8_t value = 1);

// Priority textbox > foreground > background; background is whatever the
// other two leave uncovered.
MaskSet build_mask_set(const PanelRecord& panel, MaskVariant variant);

Raster apply_mask(const Raster& image, const Mask& mask, Color fill = kDefaultFill);
MaskedImage apply_mask(const PanelRecord& panel, const MaskSet& masks, Channel channel,
                       Color fill = kDefaultFill);

// Writes `{panel_id}.{variant}.{channel}.png` for the three channels.
void save_mask_set(const MaskSet& masks, const std::filesystem::path& dir);
MaskSet load_mask_set(const std::filesystem::path& dir, const std::string& panel_id,
                      MaskVariant variant);

}  // namespace panelstyle
