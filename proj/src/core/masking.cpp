// Copyright 2026 The Panelstyle Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/masking.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "core/error.hpp"

namespace panelstyle {

std::string_view to_string(MaskVariant v) { return v == MaskVariant::kRect ? "rect" : "fit"; }

std::string_view to_string(Channel c) {
  switch (c) {
    case Channel::kTextbox: return "textbox";
    case Channel::kForeground: return "foreground";
    case Channel::kBackground: return "background";
    case Channel::kWhole: return "whole";
  }
  return "?";
}

MaskVariant parse_mask_variant(std::string_view s) {
  if (s == "rect") return MaskVariant::kRect;
  if (s == "fit") return MaskVariant::kFit;
  throw ConfigError("unknown mask variant '" + std::string(s) + "' (expected rect or fit)");
}

Channel parse_channel(std::string_view s) {
  for (Channel c : {Channel::kTextbox, Channel::kForeground, Channel::kBackground, Channel::kWhole})
    if (s == to_string(c)) return c;
  throw ConfigError("unknown channel '" + std::string(s) + "'");
}

const Mask& MaskSet::get(Channel c) const {
  switch (c) {
    case Channel::kTextbox: return textbox;
    case Channel::kForeground: return foreground;
    case Channel::kBackground: return background;
    case Channel::kWhole: break;
  }
  throw ContractViolation("the whole channel has no mask");
}

void fill_polygon(Mask& mask, const Polygon& poly, std::uint8_t value) {
  const std::size_t n = poly.size();
  if (n < 3) return;
  std::vector<double> xs;
  for (int y = 0; y < mask.height(); ++y) {
    const double yc = y + 0.5;
    xs.clear();
    for (std::size_t i = 0; i < n; ++i) {
      const Point& a = poly[i];
      const Point& b = poly[(i + 1) % n];
      if ((a.y <= yc) != (b.y <= yc)) xs.push_back(a.x + (yc - a.y) * (b.x - a.x) / (b.y - a.y));
    }
    std::sort(xs.begin(), xs.end());
    for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
      // Pixel x is inside iff xs[k] <= x + 0.5 < xs[k + 1].
      const int x0 = std::max(0, int(std::ceil(xs[k] - 0.5)));
      const int x1 = std::min(mask.width(), int(std::ceil(xs[k + 1] - 0.5)));
      for (int x = x0; x < x1; ++x) mask.set(x, y, value);
    }
  }
}

namespace {

void rasterize(Mask& mask, const std::vector<AnnotationBox>& boxes, MaskVariant variant) {
  for (const auto& b : boxes) {
    if (variant == MaskVariant::kFit && b.polygon)
      fill_polygon(mask, *b.polygon);
    else
      mask.fill_rect(b.rect);
  }
}

}  // namespace

MaskSet build_mask_set(const PanelRecord& panel, MaskVariant variant) {
  const int w = panel.bbox.w, h = panel.bbox.h;
  MaskSet set{panel.panel_id, variant, Mask(w, h), Mask(w, h), Mask(w, h)};
  rasterize(set.textbox, panel.textboxes, variant);
  rasterize(set.foreground, panel.bodies, variant);
  rasterize(set.foreground, panel.faces, variant);
  auto tb = set.textbox.values();
  auto fg = set.foreground.values();
  auto bg = set.background.values();
  for (std::size_t i = 0; i < bg.size(); ++i) {
    if (tb[i]) fg[i] = 0;
    bg[i] = (tb[i] | fg[i]) ? 0 : 1;
  }
  return set;
}

Raster apply_mask(const Raster& image, const Mask& mask, Color fill) {
  PANELSTYLE_REQUIRE(image.width() == mask.width() && image.height() == mask.height(),
                     "apply_mask: image is " + std::to_string(image.width()) + "x" +
                         std::to_string(image.height()) + " but mask is " +
                         std::to_string(mask.width()) + "x" + std::to_string(mask.height()));
  Raster out = image;
  const auto m = mask.values();
  auto px = out.bytes();
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m[i]) continue;
    px[i * 3] = fill.r;
    px[i * 3 + 1] = fill.g;
    px[i * 3 + 2] = fill.b;
  }
  return out;
}

MaskedImage apply_mask(const PanelRecord& panel, const MaskSet& masks, Channel channel, Color fill) {
  if (channel == Channel::kWhole) return {panel.panel_id, channel, panel.image};
  return {panel.panel_id, channel, apply_mask(panel.image, masks.get(channel), fill)};
}

void save_mask_set(const MaskSet& masks, const std::filesystem::path& dir) {
  for (Channel c : kMaskChannels) {
    const std::string name = masks.panel_id + "." + std::string(to_string(masks.variant)) + "." +
                             std::string(to_string(c)) + ".png";
    save_mask_png(masks.get(c), dir / name);
  }
}

MaskSet load_mask_set(const std::filesystem::path& dir, const std::string& panel_id,
                      MaskVariant variant) {
  auto path = [&](Channel c) {
    return dir / (panel_id + "." + std::string(to_string(variant)) + "." +
                  std::string(to_string(c)) + ".png");
  };
  return {panel_id, variant, load_mask_png(path(Channel::kTextbox)),
          load_mask_png(path(Channel::kForeground)), load_mask_png(path(Channel::kBackground))};
}

}  // namespace panelstyle
