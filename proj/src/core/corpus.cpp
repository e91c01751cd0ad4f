// Copyright 2026 The Panelstyle Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "core/error.hpp"
#include "core/log.hpp"

namespace panelstyle {

using nlohmann::json;

std::string_view to_string(Source s) { return s == Source::kManga ? "manga" : "comics"; }

Source parse_source(std::string_view s) {
  if (s == "manga") return Source::kManga;
  if (s == "comics") return Source::kComics;
  throw ConfigError("unknown source '" + std::string(s) + "' (expected manga or comics)");
}

namespace {

struct RawBox {
  AnnotationKind kind;
  Rect rect;  // page pixels
  std::optional<Polygon> polygon;
  std::string where;
};

class SchemaReader {
 public:
  explicit SchemaReader(std::string file) : file_(std::move(file)) {}

  [[noreturn]] void fail(const std::string& path, const std::string& msg) const {
    throw SchemaError(file_ + ": field '" + path + "': " + msg);
  }

  const json& member(const json& obj, const std::string& key, const std::string& path) const {
    if (!obj.is_object()) fail(path, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) fail(path + "." + key, "required field missing");
    return *it;
  }

  std::string string_field(const json& obj, const std::string& key, const std::string& path) const {
    const json& v = member(obj, key, path);
    if (!v.is_string()) fail(path + "." + key, "expected a string");
    return v.get<std::string>();
  }

  int integer(const json& v, const std::string& path) const {
    if (!v.is_number()) fail(path, "expected a number");
    const double d = v.get<double>();
    if (d != std::floor(d) || std::abs(d) > 1e9) fail(path, "expected an integer pixel value");
    return int(d);
  }

  Rect rect(const json& v, const std::string& path) const {
    if (!v.is_array() || v.size() != 4) fail(path, "expected [x, y, w, h]");
    Rect r{integer(v[0], path + "[0]"), integer(v[1], path + "[1]"), integer(v[2], path + "[2]"),
           integer(v[3], path + "[3]")};
    if (r.empty()) fail(path, "rectangle must have positive area");
    return r;
  }

  Polygon polygon(const json& v, const std::string& path) const {
    if (!v.is_array() || v.size() < 3) fail(path, "expected at least 3 [x, y] points");
    Polygon poly;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const auto& p = v[i];
      const std::string pp = path + "[" + std::to_string(i) + "]";
      if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
        fail(pp, "expected [x, y]");
      poly.push_back({p[0].get<double>(), p[1].get<double>()});
    }
    return poly;
  }

  void boxes(const json& parent, const char* key, AnnotationKind kind, const std::string& path,
             std::vector<RawBox>& out) const {
    auto it = parent.find(key);
    if (it == parent.end()) return;
    const std::string base = path + "." + key;
    if (!it->is_array()) fail(base, "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string bp = base + "[" + std::to_string(i) + "]";
      const json& b = (*it)[i];
      RawBox box{kind, rect(member(b, "rect", bp), bp + ".rect"), std::nullopt, bp};
      if (auto pit = b.find("polygon"); pit != b.end() && !pit->is_null()) {
        Polygon poly = polygon(*pit, bp + ".polygon");
        for (const auto& pt : poly) {
          if (pt.x < box.rect.x - 2 || pt.x > box.rect.right() + 2 || pt.y < box.rect.y - 2 ||
              pt.y > box.rect.bottom() + 2)
            fail(bp + ".polygon", "polygon point lies outside rect inflated by 2 px");
        }
        box.polygon = std::move(poly);
      }
      out.push_back(std::move(box));
    }
  }

 private:
  std::string file_;
};

std::string line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

double distance_to_rect(Point p, const Rect& r) {
  const double dx = std::max({double(r.x) - p.x, 0.0, p.x - r.right()});
  const double dy = std::max({double(r.y) - p.y, 0.0, p.y - r.bottom()});
  return std::hypot(dx, dy);
}

}  // namespace

std::vector<PanelRecord> resolve_reading_order(std::vector<PanelRecord> panels, Source source,
                                               double row_overlap) {
  const std::size_t n = panels.size();
  if (n <= 1) {
    for (auto& p : panels) p.reading_index = 0;
    return panels;
  }
  // Union-find over the "shares a row" relation.
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto root = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const Rect& a = panels[i].bbox;
      const Rect& b = panels[j].bbox;
      const int overlap = std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y);
      const int shorter = std::min(a.h, b.h);
      if (overlap > 0 && overlap >= row_overlap * shorter) parent[root(i)] = root(j);
    }

  struct Row {
    int top = std::numeric_limits<int>::max();
    int left = std::numeric_limits<int>::max();
    std::vector<std::size_t> members;
  };
  std::vector<Row> rows;
  std::vector<int> row_of(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = root(i);
    if (row_of[r] < 0) {
      row_of[r] = int(rows.size());
      rows.emplace_back();
    }
    Row& row = rows[std::size_t(row_of[r])];
    row.top = std::min(row.top, panels[i].bbox.y);
    row.left = std::min(row.left, panels[i].bbox.x);
    row.members.push_back(i);
  }
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return a.top != b.top ? a.top < b.top : a.left < b.left;
  });

  std::vector<PanelRecord> ordered;
  ordered.reserve(n);
  for (auto& row : rows) {
    std::stable_sort(row.members.begin(), row.members.end(), [&](std::size_t a, std::size_t b) {
      const double ca = panels[a].bbox.center().x, cb = panels[b].bbox.center().x;
      return source == Source::kManga ? ca > cb : ca < cb;
    });
    for (std::size_t idx : row.members) ordered.push_back(std::move(panels[idx]));
  }
  for (std::size_t i = 0; i < n; ++i) ordered[i].reading_index = int(i);
  return ordered;
}

std::vector<PageRecord> ingest_title(const std::filesystem::path& annotation_file,
                                     const std::filesystem::path& image_dir,
                                     const IngestOptions& options,
                                     std::vector<std::string>* warnings) {
  std::ifstream in(annotation_file);
  if (!in) throw AssetError("annotation file not found: " + annotation_file.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  const std::string file = annotation_file.string();

  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(file + ": " + line_col(text, e.byte == 0 ? 0 : e.byte - 1) +
                      ": malformed JSON: " + e.what());
  }

  SchemaReader rd(file);
  const std::string title = rd.string_field(doc, "title", "$");
  Source source = options.source;
  if (auto it = doc.find("source"); it != doc.end()) {
    if (!it->is_string()) rd.fail("$.source", "expected a string");
    try {
      source = parse_source(it->get<std::string>());
    } catch (const ConfigError& e) {
      rd.fail("$.source", e.what());
    }
  }
  const json& pages_json = rd.member(doc, "pages", "$");
  if (!pages_json.is_array() || pages_json.empty()) rd.fail("$.pages", "expected a non-empty array");

  auto warn = [&](const std::string& msg) {
    log::warn(msg);
    if (warnings) warnings->push_back(msg);
  };

  std::vector<PageRecord> pages;
  std::set<std::string> page_ids;
  for (std::size_t pi = 0; pi < pages_json.size(); ++pi) {
    const std::string pp = "$.pages[" + std::to_string(pi) + "]";
    const json& pj = pages_json[pi];
    PageRecord page;
    page.page_id = rd.string_field(pj, "page_id", pp);
    if (!page_ids.insert(page.page_id).second) rd.fail(pp + ".page_id", "duplicate page_id");
    page.book_id = title;
    page.page_index = int(pi);
    page.source = source;
    page.image_path = image_dir / rd.string_field(pj, "image", pp);
    if (!std::filesystem::exists(page.image_path))
      throw AssetError(file + ": " + pp + ".image: referenced image not found: " +
                       page.image_path.string());
    page.image = load_image(page.image_path);
    const Rect page_rect{0, 0, page.image.width(), page.image.height()};

    const json& panels_json = rd.member(pj, "panels", pp);
    if (!panels_json.is_array() || panels_json.empty())
      rd.fail(pp + ".panels", "a page needs at least one panel");

    std::vector<RawBox> raw;
    rd.boxes(pj, "textboxes", AnnotationKind::kTextbox, pp, raw);
    rd.boxes(pj, "bodies", AnnotationKind::kBody, pp, raw);
    rd.boxes(pj, "faces", AnnotationKind::kFace, pp, raw);

    std::size_t manual = 0;
    std::set<int> manual_seen;
    std::set<std::string> panel_ids;
    for (std::size_t k = 0; k < panels_json.size(); ++k) {
      const std::string kp = pp + ".panels[" + std::to_string(k) + "]";
      const json& kj = panels_json[k];
      PanelRecord panel;
      panel.bbox = rd.rect(rd.member(kj, "bbox", kp), kp + ".bbox");
      if (!page_rect.contains(panel.bbox)) rd.fail(kp + ".bbox", "panel lies outside page bounds");
      panel.panel_id = page.page_id + "_p" + std::to_string(k);
      if (auto it = kj.find("panel_id"); it != kj.end()) {
        if (!it->is_string()) rd.fail(kp + ".panel_id", "expected a string");
        panel.panel_id = it->get<std::string>();
      }
      if (!panel_ids.insert(panel.panel_id).second) rd.fail(kp + ".panel_id", "duplicate panel_id");
      if (auto it = kj.find("reading_index"); it != kj.end() && !it->is_null()) {
        const int ri = rd.integer(*it, kp + ".reading_index");
        if (ri < 0) rd.fail(kp + ".reading_index", "must be non-negative");
        if (!manual_seen.insert(ri).second) rd.fail(kp + ".reading_index", "duplicate reading_index");
        panel.manual_index = ri;
        ++manual;
      }
      rd.boxes(kj, "textboxes", AnnotationKind::kTextbox, kp, raw);
      rd.boxes(kj, "bodies", AnnotationKind::kBody, kp, raw);
      rd.boxes(kj, "faces", AnnotationKind::kFace, kp, raw);
      panel.image = crop(page.image, panel.bbox);
      page.panels.push_back(std::move(panel));
    }
    if (manual != 0 && manual != page.panels.size())
      rd.fail(pp + ".panels", "reading_index must be given for all panels of a page or none");

    for (auto& box : raw) {
      const Point c = box.rect.center();
      std::ptrdiff_t best = -1;
      for (std::size_t k = 0; k < page.panels.size(); ++k) {
        const Rect& b = page.panels[k].bbox;
        if (b.contains(c) && (best < 0 || b.area() < page.panels[std::size_t(best)].bbox.area()))
          best = std::ptrdiff_t(k);
      }
      if (best < 0) {
        double dmin = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < page.panels.size(); ++k) {
          const double d = distance_to_rect(c, page.panels[k].bbox);
          if (d < dmin) dmin = d, best = std::ptrdiff_t(k);
        }
        PanelRecord& near = page.panels[std::size_t(best)];
        if (!near.bbox.intersects(box.rect)) {
          warn(box.where + ": annotation center lies in no panel and the nearest panel '" +
               near.panel_id + "' does not overlap it; dropped");
          continue;
        }
        warn(box.where + ": annotation center lies in no panel; attached to nearest panel '" +
             near.panel_id + "'");
      }
      PanelRecord& panel = page.panels[std::size_t(best)];
      AnnotationBox local{box.kind, box.rect.translated(-panel.bbox.x, -panel.bbox.y), std::nullopt};
      if (box.polygon) {
        Polygon poly = *box.polygon;
        for (auto& pt : poly) pt.x -= panel.bbox.x, pt.y -= panel.bbox.y;
        local.polygon = std::move(poly);
      }
      switch (box.kind) {
        case AnnotationKind::kTextbox: panel.textboxes.push_back(std::move(local)); break;
        case AnnotationKind::kBody: panel.bodies.push_back(std::move(local)); break;
        case AnnotationKind::kFace: panel.faces.push_back(std::move(local)); break;
      }
    }

    if (manual) {
      std::stable_sort(page.panels.begin(), page.panels.end(),
                       [](const PanelRecord& a, const PanelRecord& b) {
                         return *a.manual_index < *b.manual_index;
                       });
      for (std::size_t k = 0; k < page.panels.size(); ++k) page.panels[k].reading_index = int(k);
    } else {
      page.panels = resolve_reading_order(std::move(page.panels), source, options.row_overlap);
    }
    pages.push_back(std::move(page));
  }
  return pages;
}

const PanelRecord* find_panel(const PageRecord& page, std::string_view panel_id) {
  for (const auto& p : page.panels)
    if (p.panel_id == panel_id) return &p;
  return nullptr;
}

Raster crop_panel(const PageRecord& page, std::string_view panel_id) {
  const PanelRecord* p = find_panel(page, panel_id);
  if (!p) throw NotFoundError("panel '" + std::string(panel_id) + "' not found on page '" +
                              page.page_id + "'");
  return crop(page.image, p->bbox);
}

}  // namespace panelstyle
