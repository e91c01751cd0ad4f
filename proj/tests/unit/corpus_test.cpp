// Copyright 2026 The Panelstyle Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <json.hpp>

#include "core/corpus.hpp"
#include "core/error.hpp"
#include "support.hpp"

using namespace panelstyle;
using namespace panelstyle::testing;
using nlohmann::json;

namespace {

PanelRecord boxed(const std::string& id, Rect bbox) {
  PanelRecord p;
  p.panel_id = id;
  p.bbox = bbox;
  return p;
}

std::vector<std::string> ids(const std::vector<PanelRecord>& ps) {
  std::vector<std::string> out;
  for (const auto& p : ps) out.push_back(p.panel_id);
  return out;
}

std::vector<PanelRecord> grid_2x2() {
  return {boxed("bl", {0, 200, 180, 180}), boxed("tr", {200, 0, 180, 180}),
          boxed("br", {200, 200, 180, 180}), boxed("tl", {0, 0, 180, 180})};
}

// Page image with a horizontal stripe pattern, easy to index by hand.
Raster striped(int w, int h) {
  Raster r(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) r.set(x, y, {std::uint8_t(y * 7), std::uint8_t(x * 3), std::uint8_t((x + y) % 2 * 255)});
  return r;
}

fs::path write_title(const TempDir& dir, const json& doc, int w = 400, int h = 300) {
  save_png(striped(w, h), dir / "images" / "page0.png");
  const fs::path file = dir / "title.json";
  write_file(file, doc.dump());
  return file;
}

json four_panel_doc() {
  return {{"title", "t1"},
          {"pages",
           {{{"page_id", "pg0"},
             {"image", "images/page0.png"},
             {"panels",
              {{{"bbox", {10, 10, 180, 130}},
                {"textboxes", {{{"rect", {20, 20, 40, 20}}}}},
                {"bodies", {{{"rect", {60, 40, 50, 90}}}}},
                {"faces", {{{"rect", {70, 40, 20, 20}}}}}},
               {{"bbox", {210, 10, 180, 130}}, {"textboxes", json::array()}, {"bodies", json::array()}, {"faces", json::array()}},
               {{"bbox", {10, 160, 180, 130}}},
               {{"bbox", {210, 160, 180, 130}}}}}}}}};
}

}  // namespace

TEST_SUITE("corpus") {
  TEST_CASE("two panels side by side: manga reads the right one first") {
    std::vector<PanelRecord> ps = {boxed("left", {10, 0, 100, 100}), boxed("right", {400, 0, 100, 100})};
    auto manga = resolve_reading_order(ps, Source::kManga);
    CHECK(manga[0].panel_id == "right");
    CHECK(manga[0].reading_index == 0);
    auto comics = resolve_reading_order(ps, Source::kComics);
    CHECK(comics[0].panel_id == "left");
  }

  TEST_CASE("2x2 grid order per source") {
    CHECK(ids(resolve_reading_order(grid_2x2(), Source::kManga)) ==
          std::vector<std::string>{"tr", "tl", "br", "bl"});
    CHECK(ids(resolve_reading_order(grid_2x2(), Source::kComics)) ==
          std::vector<std::string>{"tl", "tr", "bl", "br"});
  }

  TEST_CASE("single panel is returned unchanged") {
    auto out = resolve_reading_order({boxed("only", {5, 5, 50, 50})}, Source::kManga);
    REQUIRE(out.size() == 1);
    CHECK(out[0].panel_id == "only");
    CHECK(out[0].reading_index == 0);
  }

  TEST_CASE("reading order is an idempotent permutation; manga rows reverse comics rows") {
    nn::Rng rng(41);
    for (int trial = 0; trial < 60; ++trial) {
      std::vector<PanelRecord> ps;
      const int rows = 1 + int(rng.below(4));
      int n = 0;
      for (int r = 0; r < rows; ++r) {
        const int cols = 1 + int(rng.below(4));
        for (int c = 0; c < cols; ++c)
          ps.push_back(boxed("p" + std::to_string(n++), {c * 120 + int(rng.below(10)), r * 150 + int(rng.below(20)), 100, 120}));
      }
      std::vector<PanelRecord> shuffled = ps;
      for (std::size_t i = shuffled.size(); i > 1; --i) std::swap(shuffled[i - 1], shuffled[rng.below(i)]);
      const auto manga = resolve_reading_order(shuffled, Source::kManga);
      const auto comics = resolve_reading_order(shuffled, Source::kComics);
      auto a = ids(manga), b = ids(ps);
      std::sort(a.begin(), a.end());
      std::sort(b.begin(), b.end());
      CHECK(a == b);
      CHECK(ids(resolve_reading_order(manga, Source::kManga)) == ids(manga));
      for (std::size_t i = 0; i < manga.size(); ++i) CHECK(manga[i].reading_index == int(i));
      // Rows are contiguous blocks in both orders; each manga block is the
      // reversed comics block.
      std::size_t i = 0;
      for (int r = 0; r < rows; ++r) {
        std::vector<std::string> mrow, crow;
        const int y = comics[i].bbox.y / 150;
        std::size_t j = i;
        while (j < comics.size() && comics[j].bbox.y / 150 == y) crow.push_back(comics[j++].panel_id);
        for (std::size_t k = i; k < j; ++k) mrow.push_back(manga[k].panel_id);
        std::reverse(crow.begin(), crow.end());
        CHECK(mrow == crow);
        i = j;
      }
    }
  }

  TEST_CASE("ingest: one page with four annotated panels") {
    TempDir dir("ingest");
    std::vector<std::string> warnings;
    const auto pages = ingest_title(write_title(dir, four_panel_doc()), dir.path(), {}, &warnings);
    REQUIRE(pages.size() == 1);
    CHECK(pages[0].panels.size() == 4);
    CHECK(pages[0].book_id == "t1");
    CHECK(warnings.empty());
    const PanelRecord* first = find_panel(pages[0], "pg0_p0");
    REQUIRE(first != nullptr);
    REQUIRE(first->textboxes.size() == 1);
    CHECK(first->textboxes[0].rect == Rect{10, 10, 40, 20});  // panel-local
    CHECK(first->bodies.size() == 1);
    CHECK(first->faces.size() == 1);
  }

  TEST_CASE("manual reading_index wins over geometry") {
    TempDir dir("manual");
    json doc = four_panel_doc();
    auto& panels = doc["pages"][0]["panels"];
    const int order[4] = {3, 2, 1, 0};
    for (int k = 0; k < 4; ++k) panels[k]["reading_index"] = order[k];
    const auto pages = ingest_title(write_title(dir, doc), dir.path());
    CHECK(pages[0].panels[0].panel_id == "pg0_p3");
    CHECK(pages[0].panels[3].panel_id == "pg0_p0");
  }

  TEST_CASE("ingest errors carry their category") {
    TempDir dir("errs");
    CHECK_THROWS_AS(ingest_title(dir / "missing.json", dir.path()), AssetError);
    write_file(dir / "bad.json", "{\"title\": \"x\", \"pages\": [");
    CHECK_THROWS_AS(ingest_title(dir / "bad.json", dir.path()), SchemaError);
    json doc = four_panel_doc();
    doc["pages"][0]["panels"][0]["bbox"] = {300, 200, 200, 200};  // outside the page
    CHECK_THROWS_AS(ingest_title(write_title(dir, doc), dir.path()), SchemaError);
    doc = four_panel_doc();
    doc["pages"][0]["panels"][0]["reading_index"] = 0;  // only some panels
    CHECK_THROWS_AS(ingest_title(write_title(dir, doc), dir.path()), SchemaError);
    doc = four_panel_doc();
    doc["pages"][0]["image"] = "images/none.png";
    CHECK_THROWS_AS(ingest_title(write_title(dir, doc), dir.path()), AssetError);
  }

  TEST_CASE("orphan annotations are attached to the nearest overlapping panel with a warning") {
    TempDir dir("orphan");
    json doc = four_panel_doc();
    doc["pages"][0]["textboxes"] = {{{"rect", {185, 20, 20, 10}}}};  // center in the gutter
    std::vector<std::string> warnings;
    const auto pages = ingest_title(write_title(dir, doc), dir.path(), {}, &warnings);
    CHECK(warnings.size() == 1);
  }

  TEST_CASE("crop_panel examples") {
    PageRecord page;
    page.page_id = "pg";
    page.image = striped(120, 90);
    page.panels = {boxed("a", {0, 0, 50, 40}), boxed("full", {0, 0, 120, 90}), boxed("c", {10, 10, 32, 32})};
    CHECK(crop_panel(page, "a").width() == 50);
    CHECK(crop_panel(page, "a").height() == 40);
    CHECK(crop_panel(page, "full") == page.image);
    const Raster c = crop_panel(page, "c");
    bool same = true;
    for (int y = 0; y < 32; ++y)
      for (int x = 0; x < 32; ++x) same = same && c.at(x, y) == page.image.at(x + 10, y + 10);
    CHECK(same);
    CHECK_THROWS_AS(crop_panel(page, "nope"), NotFoundError);
  }

  TEST_CASE("stitching crops back reproduces the covered page pixels") {
    for (const auto& page : fixture_manga()) {
      Raster canvas(page.image.width(), page.image.height());
      Mask covered(page.image.width(), page.image.height());
      for (const auto& p : page.panels) {
        paste(canvas, crop_panel(page, p.panel_id), p.bbox.x, p.bbox.y);
        covered.fill_rect(p.bbox);
      }
      bool same = true;
      for (int y = 0; y < canvas.height(); ++y)
        for (int x = 0; x < canvas.width(); ++x)
          if (covered.at(x, y)) same = same && canvas.at(x, y) == page.image.at(x, y);
      CHECK(same);
    }
  }
}
