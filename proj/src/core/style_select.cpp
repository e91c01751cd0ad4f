// Copyright 2026 The Panelstyle Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/style_select.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <fstream>
#include <map>

#include <json.hpp>

#include "core/error.hpp"

namespace panelstyle {

using nlohmann::json;

std::string to_hex(ImageHash h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h.bits));
  return buf;
}

ImageHash hash_from_hex(std::string_view hex) {
  if (hex.size() != 16) throw SchemaError("hash must be 16 hex digits: '" + std::string(hex) + "'");
  std::uint64_t v = 0;
  for (char c : hex) {
    int d;
    if (c >= '0' && c <= '9') d = c - '0';
    else if (c >= 'a' && c <= 'f') d = c - 'a' + 10;
    else if (c >= 'A' && c <= 'F') d = c - 'A' + 10;
    else throw SchemaError("invalid hex digit in hash '" + std::string(hex) + "'");
    v = (v << 4) | std::uint64_t(d);
  }
  return {v};
}

ImageHash average_hash(const GrayPlane& gray) {
  PANELSTYLE_REQUIRE(gray.width > 0 && gray.height > 0, "average_hash: empty image");
  const GrayPlane small = resize_area(gray, 8, 8);
  double sum = 0;
  for (double v : small.values) sum += v;
  const double mean = sum / 64.0;
  std::uint64_t bits = 0;
  for (int i = 0; i < 64; ++i)
    if (small.values[std::size_t(i)] >= mean) bits |= std::uint64_t{1} << (63 - i);
  return {bits};
}

ImageHash average_hash(const Raster& image) { return average_hash(to_gray(image)); }

int hamming(ImageHash a, ImageHash b) { return std::popcount(a.bits ^ b.bits); }

std::string_view to_string(Shot s) { return s == Shot::kClose ? "close" : "medium"; }

std::string_view to_string(ObjectCount c) {
  switch (c) {
    case ObjectCount::kOne: return "one";
    case ObjectCount::kTwo: return "two";
    case ObjectCount::kMany: return "many";
  }
  return "?";
}

std::string to_string(const CompositionClass& c) {
  return std::string(to_string(c.shot)) + "/" + std::string(to_string(c.count));
}

Shot parse_shot(std::string_view s) {
  if (s == "close") return Shot::kClose;
  if (s == "medium") return Shot::kMedium;
  throw SchemaError("unknown shot '" + std::string(s) + "'");
}

ObjectCount parse_object_count(std::string_view s) {
  if (s == "one") return ObjectCount::kOne;
  if (s == "two") return ObjectCount::kTwo;
  if (s == "many") return ObjectCount::kMany;
  throw SchemaError("unknown object count '" + std::string(s) + "'");
}

CompositionClass classify_composition(const PanelRecord& panel, double close_threshold) {
  const Rect bounds{0, 0, panel.bbox.w, panel.bbox.h};
  std::int64_t largest = 0;
  for (const auto* list : {&panel.bodies, &panel.faces})
    for (const auto& b : *list) largest = std::max(largest, b.rect.intersect(bounds).area());
  CompositionClass c;
  c.shot = bounds.area() > 0 && double(largest) >= close_threshold * double(bounds.area())
               ? Shot::kClose
               : Shot::kMedium;
  switch (panel.bodies.size()) {
    case 1: c.count = ObjectCount::kOne; break;
    case 2: c.count = ObjectCount::kTwo; break;
    default: c.count = ObjectCount::kMany; break;
  }
  return c;
}

Raster exemplar_channel_image(const StyleExemplar& ex, Channel channel, Color fill) {
  if (channel == Channel::kWhole || !ex.masks) return ex.image;
  return apply_mask(ex.image, ex.masks->get(channel), fill);
}

void compute_hashes(StyleExemplar& ex, Color fill) {
  for (Channel c : {Channel::kTextbox, Channel::kForeground, Channel::kBackground, Channel::kWhole})
    ex.hashes[std::size_t(c)] = average_hash(exemplar_channel_image(ex, c, fill));
}

Selection select_style(const MaskedImage& content, std::span<const StyleExemplar> candidates,
                       Channel channel, std::optional<CompositionClass> restrict_to) {
  PANELSTYLE_REQUIRE(!candidates.empty(), "select_style: no candidate exemplars");
  Selection sel;
  if (restrict_to) {
    sel.composition_filtered = std::any_of(candidates.begin(), candidates.end(), [&](const auto& e) {
      return e.composition == *restrict_to;
    });
  }
  const ImageHash h = average_hash(content.image);
  for (const auto& ex : candidates) {
    if (sel.composition_filtered && !(ex.composition == *restrict_to)) continue;
    const int d = hamming(h, ex.hash(channel));
    if (!sel.exemplar || d < sel.distance ||
        (d == sel.distance && ex.exemplar_id < sel.exemplar->exemplar_id)) {
      sel.exemplar = &ex;
      sel.distance = d;
    }
  }
  return sel;
}

std::vector<StyleExemplar> load_catalog(const std::filesystem::path& path, Color fill) {
  std::ifstream in(path);
  if (!in) throw AssetError("exemplar catalog not found: " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError("exemplar catalog " + path.string() + ": malformed JSON: " + e.what());
  }
  const json& list = doc.is_array() ? doc : doc.value("exemplars", json::array());
  if (!list.is_array() || list.empty())
    throw SchemaError("exemplar catalog " + path.string() + ": no exemplars");
  const auto base = path.parent_path();
  std::vector<StyleExemplar> out;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const json& e = list[i];
    const std::string where = path.string() + ": exemplars[" + std::to_string(i) + "]";
    try {
      StyleExemplar ex;
      ex.exemplar_id = e.at("exemplar_id").get<std::string>();
      ex.book_id = e.value("book_id", "");
      if (auto it = e.find("composition"); it != e.end()) {
        ex.composition.shot = parse_shot(it->at("shot").get<std::string>());
        ex.composition.count = parse_object_count(it->at("count").get<std::string>());
      }
      ex.image = load_image(base / e.at("image").get<std::string>());
      if (auto it = e.find("masks"); it != e.end() && !it->is_null()) {
        MaskSet m;
        m.panel_id = ex.exemplar_id;
        m.textbox = load_mask_png(base / it->at("textbox").get<std::string>());
        m.foreground = load_mask_png(base / it->at("foreground").get<std::string>());
        m.background = load_mask_png(base / it->at("background").get<std::string>());
        for (const Mask* mk : {&m.textbox, &m.foreground, &m.background})
          if (mk->width() != ex.image.width() || mk->height() != ex.image.height())
            throw SchemaError("mask dimensions differ from the exemplar image");
        ex.masks = std::move(m);
      }
      compute_hashes(ex, fill);
      if (auto it = e.find("hashes"); it != e.end())
        for (auto& [key, value] : it->items())
          ex.hashes[std::size_t(parse_channel(key))] = hash_from_hex(value.get<std::string>());
      out.push_back(std::move(ex));
    } catch (const json::exception& ex) {
      throw SchemaError(where + ": " + ex.what());
    } catch (const SchemaError& ex) {
      throw SchemaError(where + ": " + ex.what());
    } catch (const ConfigError& ex) {
      throw SchemaError(where + ": " + ex.what());
    }
  }
  return out;
}

void save_catalog(const std::vector<StyleExemplar>& exemplars, const std::filesystem::path& path) {
  const auto base = path.parent_path();
  json list = json::array();
  for (const auto& ex : exemplars) {
    const std::string image_rel = "exemplars/" + ex.exemplar_id + ".png";
    save_png(ex.image, base / image_rel);
    json e = {{"exemplar_id", ex.exemplar_id},
              {"book_id", ex.book_id},
              {"composition",
               {{"shot", std::string(to_string(ex.composition.shot))},
                {"count", std::string(to_string(ex.composition.count))}}},
              {"image", image_rel}};
    if (ex.masks) {
      save_mask_set(*ex.masks, base / "exemplars");
      json masks;
      for (Channel c : kMaskChannels)
        masks[std::string(to_string(c))] = "exemplars/" + ex.masks->panel_id + "." +
                                           std::string(to_string(ex.masks->variant)) + "." +
                                           std::string(to_string(c)) + ".png";
      e["masks"] = masks;
    }
    json hashes;
    for (Channel c : {Channel::kTextbox, Channel::kForeground, Channel::kBackground, Channel::kWhole})
      hashes[std::string(to_string(c))] = to_hex(ex.hash(c));
    e["hashes"] = hashes;
    list.push_back(std::move(e));
  }
  if (!base.empty()) std::filesystem::create_directories(base);
  std::ofstream out(path);
  out << json{{"exemplars", list}}.dump(2) << '\n';
  if (!out) throw AssetError("cannot write " + path.string());
}

std::vector<StyleExemplar> build_catalog(const std::vector<PageRecord>& pages, MaskVariant variant,
                                         Color fill, double close_threshold) {
  std::vector<StyleExemplar> out;
  std::map<std::string, std::vector<CompositionClass>> taken;
  for (const auto& page : pages)
    for (const auto& panel : page.panels) {
      const CompositionClass cls = classify_composition(panel, close_threshold);
      auto& seen = taken[page.book_id];
      if (std::find(seen.begin(), seen.end(), cls) != seen.end()) continue;
      seen.push_back(cls);
      StyleExemplar ex;
      ex.exemplar_id = panel.panel_id;
      ex.book_id = page.book_id;
      ex.composition = cls;
      ex.image = panel.image;
      ex.masks = build_mask_set(panel, variant);
      ex.masks->panel_id = ex.exemplar_id;
      compute_hashes(ex, fill);
      out.push_back(std::move(ex));
    }
  return out;
}

}  // namespace panelstyle
