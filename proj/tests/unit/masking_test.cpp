// Copyright 2026 The Panelstyle Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include "core/error.hpp"
#include "core/masking.hpp"
#include "support.hpp"

using namespace panelstyle;
using namespace panelstyle::testing;

namespace {

bool is_partition(const MaskSet& m) {
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x)
      if (m.textbox.at(x, y) + m.foreground.at(x, y) + m.background.at(x, y) != 1) return false;
  return true;
}

}  // namespace

TEST_SUITE("masking") {
  TEST_CASE("panel without annotations is all background") {
    const auto m = build_mask_set(make_panel("p", 20, 10), MaskVariant::kRect);
    CHECK(m.background.count() == 200);
    CHECK(m.foreground.count() == 0);
    CHECK(m.textbox.count() == 0);
  }

  TEST_CASE("priority example: textbox left half, body overlapping it") {
    const auto p = make_panel("p", 100, 100, {{0, 0, 50, 100}}, {{25, 0, 50, 100}});
    const auto m = build_mask_set(p, MaskVariant::kRect);
    for (int x = 0; x < 100; ++x) {
      CHECK(m.textbox.at(x, 37) == (x < 50));
      CHECK(m.foreground.at(x, 37) == (x >= 50 && x < 75));
      CHECK(m.background.at(x, 37) == (x >= 75));
    }
    CHECK(m.textbox.count() == 5000);
    CHECK(m.foreground.count() == 2500);
    CHECK(m.background.count() == 2500);
  }

  TEST_CASE("fit variant rasterizes the polygon: scanline oracle") {
    auto p = make_panel("p", 64, 48, {}, {{10, 5, 40, 40}});
    const Polygon tri = {{12.3, 6.1}, {48.7, 20.2}, {20.5, 43.9}};
    p.bodies[0].polygon = tri;
    const auto m = build_mask_set(p, MaskVariant::kFit);
    CHECK(m.foreground.count() == oracle::polygon_area_pixels(tri, 64, 48));
    CHECK(is_partition(m));
  }

  TEST_CASE("rect and fit agree on textboxes without polygons") {
    const auto p = make_panel("p", 40, 30, {{2, 2, 10, 8}}, {{5, 5, 20, 20}});
    CHECK(build_mask_set(p, MaskVariant::kRect).textbox == build_mask_set(p, MaskVariant::kFit).textbox);
  }

  TEST_CASE("apply_mask examples") {
    nn::Rng rng(3);
    const Raster img = random_raster(16, 12, rng);
    CHECK(apply_mask(img, Mask(16, 12, 1)) == img);
    CHECK(apply_mask(img, Mask(16, 12, 0), {255, 255, 255}) == solid(16, 12, {255, 255, 255}));
    Raster grad(16, 12);
    Mask checker(16, 12);
    for (int y = 0; y < 12; ++y)
      for (int x = 0; x < 16; ++x) {
        grad.set(x, y, {std::uint8_t(x * 16), std::uint8_t(y * 20), 7});
        checker.set(x, y, (x + y) % 2);
      }
    const Color fill{1, 2, 3};
    const Raster out = apply_mask(grad, checker, fill);
    bool ok = true;
    for (int y = 0; y < 12; ++y)
      for (int x = 0; x < 16; ++x) ok = ok && out.at(x, y) == (checker.at(x, y) ? grad.at(x, y) : fill);
    CHECK(ok);
    CHECK_THROWS_AS(apply_mask(img, Mask(15, 12, 1)), ContractViolation);
  }

  TEST_CASE("fixture panels: partition and additive recomposition, both variants") {
    for (const auto* pages : {&fixture_comics(), &fixture_manga()})
      for (const auto& page : *pages)
        for (const auto& p : page.panels)
          for (auto v : {MaskVariant::kRect, MaskVariant::kFit}) {
            const auto m = build_mask_set(p, v);
            CHECK(is_partition(m));
            CHECK(m.textbox.width() == p.image.width());
            Raster sum(p.image.width(), p.image.height());
            for (Channel c : kMaskChannels) {
              const Raster part = apply_mask(p.image, m.get(c), Color{0, 0, 0});
              for (std::size_t i = 0; i < sum.bytes().size(); ++i) sum.bytes()[i] += part.bytes()[i];
            }
            CHECK(sum == p.image);
            CHECK(build_mask_set(p, v).foreground == m.foreground);
          }
  }

  TEST_CASE("masks round-trip through PNG") {
    TempDir dir("masks");
    const auto p = make_panel("px", 33, 17, {{1, 1, 5, 5}}, {{8, 2, 10, 12}});
    const auto m = build_mask_set(p, MaskVariant::kRect);
    save_mask_set(m, dir.path());
    const auto back = load_mask_set(dir.path(), "px", MaskVariant::kRect);
    CHECK(back.textbox == m.textbox);
    CHECK(back.foreground == m.foreground);
    CHECK(back.background == m.background);
    CHECK_THROWS_AS(load_mask_set(dir.path(), "other", MaskVariant::kRect), AssetError);
  }

  TEST_CASE("channel and variant names") {
    CHECK(parse_channel("foreground") == Channel::kForeground);
    CHECK(parse_mask_variant("fit") == MaskVariant::kFit);
    CHECK_THROWS_AS(parse_channel("sky"), ConfigError);
  }
}
