// Copyright 2026 The Panelstyle Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/layout.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include <json.hpp>

#include "core/error.hpp"
#include "nn/tensor.hpp"

namespace panelstyle {

using nlohmann::json;

int LayoutTemplate::slot_count() const {
  int n = 0;
  for (const auto& r : rows) n += int(r.size());
  return n;
}

std::vector<UnitRect> LayoutTemplate::ordered_slots() const {
  std::vector<UnitRect> out;
  for (auto row : rows) {
    std::stable_sort(row.begin(), row.end(), [&](const UnitRect& a, const UnitRect& b) {
      return source_style == Source::kManga ? a.x > b.x : a.x < b.x;
    });
    out.insert(out.end(), row.begin(), row.end());
  }
  return out;
}

void validate(const LayoutTemplate& t) {
  const std::string where = "layout template '" + t.template_id + "': ";
  if (t.panel_count < 1) throw SchemaError(where + "panel_count must be positive");
  if (t.slot_count() != t.panel_count)
    throw SchemaError(where + "slot count " + std::to_string(t.slot_count()) +
                      " differs from panel_count " + std::to_string(t.panel_count));
  if (!(t.page_aspect > 0)) throw SchemaError(where + "page_aspect must be positive");
  constexpr double eps = 1e-9;
  for (const auto& row : t.rows) {
    for (const auto& s : row) {
      if (!(s.w > 0 && s.h > 0) || s.x < -eps || s.y < -eps || s.x + s.w > 1 + eps ||
          s.y + s.h > 1 + eps)
        throw SchemaError(where + "slot outside the unit page or with non-positive size");
    }
    for (std::size_t i = 0; i < row.size(); ++i)
      for (std::size_t j = i + 1; j < row.size(); ++j) {
        const auto& a = row[i];
        const auto& b = row[j];
        const double ox = std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x);
        const double oy = std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y);
        if (ox > eps && oy > eps) throw SchemaError(where + "slots within a row overlap");
      }
  }
}

namespace {

LayoutTemplate template_from_json(const json& j, const std::string& where) {
  try {
    LayoutTemplate t;
    t.template_id = j.at("template_id").get<std::string>();
    t.source_style = parse_source(j.value("source_style", "comics"));
    t.panel_count = j.at("panel_count").get<int>();
    t.page_aspect = j.value("page_aspect", 1.5);
    for (const auto& row : j.at("rows")) {
      std::vector<UnitRect> r;
      for (const auto& s : row)
        r.push_back({s.at("x").get<double>(), s.at("y").get<double>(), s.at("w").get<double>(),
                     s.at("h").get<double>()});
      t.rows.push_back(std::move(r));
    }
    validate(t);
    return t;
  } catch (const json::exception& e) {
    throw SchemaError(where + ": " + e.what());
  } catch (const ConfigError& e) {
    throw SchemaError(where + ": " + e.what());
  }
}

void load_file(const std::filesystem::path& p, std::vector<LayoutTemplate>& out) {
  std::ifstream in(p);
  if (!in) throw AssetError("template file not found: " + p.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError(p.string() + ": malformed JSON: " + e.what());
  }
  const json* list = &doc;
  if (doc.is_object() && doc.contains("templates")) list = &doc["templates"];
  if (list->is_array()) {
    for (std::size_t i = 0; i < list->size(); ++i)
      out.push_back(template_from_json((*list)[i], p.string() + "[" + std::to_string(i) + "]"));
  } else {
    out.push_back(template_from_json(*list, p.string()));
  }
}

}  // namespace

std::vector<LayoutTemplate> load_template_library(const std::filesystem::path& path) {
  std::vector<LayoutTemplate> out;
  if (std::filesystem::is_directory(path)) {
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(path))
      if (e.path().extension() == ".json") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) load_file(f, out);
  } else {
    load_file(path, out);
  }
  if (out.empty()) throw SchemaError("template library " + path.string() + " is empty");
  return out;
}

void save_template(const LayoutTemplate& t, const std::filesystem::path& path) {
  json rows = json::array();
  for (const auto& row : t.rows) {
    json r = json::array();
    for (const auto& s : row) r.push_back({{"x", s.x}, {"y", s.y}, {"w", s.w}, {"h", s.h}});
    rows.push_back(std::move(r));
  }
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  out << json{{"template_id", t.template_id},
              {"source_style", std::string(to_string(t.source_style))},
              {"panel_count", t.panel_count},
              {"page_aspect", t.page_aspect},
              {"rows", rows}}
             .dump(2)
      << '\n';
}

LayoutTemplate pick_template(int panel_count, const std::vector<LayoutTemplate>& library,
                             std::uint64_t seed) {
  PANELSTYLE_REQUIRE(!library.empty(), "pick_template: empty template library");
  PANELSTYLE_REQUIRE(panel_count >= 1, "pick_template: panel count must be positive");

  int chosen_count = -1;
  for (const auto& t : library)
    if (t.panel_count == panel_count) chosen_count = panel_count;
  if (chosen_count < 0)
    for (const auto& t : library)
      if (t.panel_count < panel_count) chosen_count = std::max(chosen_count, t.panel_count);
  if (chosen_count < 0) {
    chosen_count = library.front().panel_count;
    for (const auto& t : library) chosen_count = std::min(chosen_count, t.panel_count);
  }

  std::vector<const LayoutTemplate*> pool;
  for (const auto& t : library)
    if (t.panel_count == chosen_count) pool.push_back(&t);
  std::stable_sort(pool.begin(), pool.end(), [](const auto* a, const auto* b) {
    return a->template_id < b->template_id;
  });
  nn::Rng rng(seed ^ (std::uint64_t(panel_count) * 0x9E3779B97F4A7C15ULL));
  LayoutTemplate t = *pool[std::size_t(rng.below(pool.size()))];
  if (t.panel_count >= panel_count) return t;

  // Pad with uniform full-width rows at the mean existing row height.
  const int extra = panel_count - t.panel_count;
  double mean_h = 0;
  for (const auto& row : t.rows) {
    double h = 0;
    for (const auto& s : row) h = std::max(h, s.h);
    mean_h += h;
  }
  mean_h = t.rows.empty() ? 1.0 : mean_h / double(t.rows.size());
  const double total = 1.0 + extra * mean_h;
  for (auto& row : t.rows)
    for (auto& s : row) s.y /= total, s.h /= total;
  for (int k = 0; k < extra; ++k) t.rows.push_back({{0.0, (1.0 + k * mean_h) / total, 1.0, mean_h / total}});
  t.page_aspect *= total;
  t.panel_count = panel_count;
  t.template_id += "+pad" + std::to_string(extra);
  return t;
}

Rect contain_fit(int width, int height, const Rect& slot) {
  PANELSTYLE_REQUIRE(width > 0 && height > 0, "contain_fit: empty panel");
  PANELSTYLE_REQUIRE(!slot.empty(), "contain_fit: empty slot");
  const double scale = std::min(double(slot.w) / width, double(slot.h) / height);
  const int w = std::clamp(int(std::lround(width * scale)), 1, slot.w);
  const int h = std::clamp(int(std::lround(height * scale)), 1, slot.h);
  return {slot.x + (slot.w - w) / 2, slot.y + (slot.h - h) / 2, w, h};
}

Rect slot_pixels(const UnitRect& s, int page_width, int page_height, int gutter_px) {
  const int half = gutter_px / 2, rest = gutter_px - half;
  const int x0 = int(std::lround(s.x * page_width)) + half;
  const int y0 = int(std::lround(s.y * page_height)) + half;
  const int x1 = int(std::lround((s.x + s.w) * page_width)) - rest;
  const int y1 = int(std::lround((s.y + s.h) * page_height)) - rest;
  return {x0, y0, std::max(1, x1 - x0), std::max(1, y1 - y0)};
}

ComposedPage compose_page(const std::vector<PanelImage>& panels, const LayoutTemplate& layout,
                          int page_width_px, int gutter_px) {
  const auto slots = layout.ordered_slots();
  PANELSTYLE_REQUIRE(panels.size() <= slots.size(),
                     "compose_page: " + std::to_string(panels.size()) + " panels but template '" +
                         layout.template_id + "' has " + std::to_string(slots.size()) + " slots");
  PANELSTYLE_REQUIRE(page_width_px > 0 && gutter_px >= 0, "compose_page: bad page geometry");
  const int page_h = int(std::lround(page_width_px * layout.page_aspect));
  ComposedPage page{Raster(page_width_px, page_h, Color{255, 255, 255}), layout.template_id, {}};
  for (std::size_t i = 0; i < panels.size(); ++i) {
    const Raster& img = *panels[i].image;
    const Rect slot = slot_pixels(slots[i], page_width_px, page_h, gutter_px);
    const Rect placed = contain_fit(img.width(), img.height(), slot);
    paste(page.image, resize_area(img, placed.w, placed.h), placed.x, placed.y);
    page.placements.push_back({panels[i].panel_id, slot, placed});
  }
  return page;
}

}  // namespace panelstyle
