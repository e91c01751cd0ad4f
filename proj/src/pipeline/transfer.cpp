// Copyright 2026 The Panelstyle Authors
// SPDX-License-Identifier: Apache-2.0

#include "pipeline/transfer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>

#include "core/error.hpp"
#include "core/parallel.hpp"

namespace panelstyle {

using nlohmann::json;

namespace {

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i)
    if (i == s.size() || s[i] == sep) {
      out.emplace_back(s.substr(start, i - start));
      start = i + 1;
    }
  return out;
}

}  // namespace

std::string Treatment::label() const {
  std::string s = style_source == StyleSource::kArtStyle ? "AS" : "CP";
  switch (masking) {
    case Masking::kNone: s += "_N_M"; break;
    case Masking::kRect: s += "_R_M"; break;
    case Masking::kFit: s += "_F_M"; break;
  }
  if (composition_select) s += "_C";
  return s;
}

MaskVariant Treatment::mask_variant() const {
  PANELSTYLE_REQUIRE(masking != Masking::kNone, "treatment " + label() + " has no mask variant");
  return masking == Masking::kFit ? MaskVariant::kFit : MaskVariant::kRect;
}

void validate(const Treatment& t) {
  if (t.composition_select && t.masking == Masking::kNone)
    throw ConfigError("treatment " + t.label() + ": composition selection requires masks");
}

Treatment parse_treatment(std::string_view text) {
  std::vector<std::string> parts = split(text, ',');
  if (parts.size() == 1) {
    // Label form: XX_Y_M[_C]
    const auto t = split(text, '_');
    if (t.size() < 3 || t.size() > 4 || t[2] != "M")
      throw ConfigError("malformed treatment '" + std::string(text) + "'");
    parts = {t[0], t[1] + "_M"};
    if (t.size() == 4) parts.push_back(t[3]);
  }
  if (parts.size() < 2 || parts.size() > 3)
    throw ConfigError("malformed treatment '" + std::string(text) + "'");
  Treatment tr;
  if (parts[0] == "AS") tr.style_source = StyleSource::kArtStyle;
  else if (parts[0] == "CP") tr.style_source = StyleSource::kComicPanel;
  else throw ConfigError("unknown style source '" + parts[0] + "' (expected AS or CP)");
  if (parts[1] == "N_M") tr.masking = Masking::kNone;
  else if (parts[1] == "R_M") tr.masking = Masking::kRect;
  else if (parts[1] == "F_M") tr.masking = Masking::kFit;
  else throw ConfigError("unknown masking '" + parts[1] + "' (expected N_M, R_M or F_M)");
  if (parts.size() == 3) {
    if (parts[2] != "C") throw ConfigError("unknown treatment flag '" + parts[2] + "'");
    tr.composition_select = true;
  }
  validate(tr);
  return tr;
}

std::string ModelStore::key(const std::string& exemplar_id, Channel channel) {
  return exemplar_id + "." + std::string(to_string(channel));
}

std::filesystem::path ModelStore::model_dir(const std::filesystem::path& root,
                                            const std::string& exemplar_id, Channel channel) {
  return root / key(exemplar_id, channel);
}

void ModelStore::insert(const std::string& exemplar_id, Channel channel,
                        std::shared_ptr<const StyleModel> model) {
  std::lock_guard lock(mu_);
  cache_[key(exemplar_id, channel)] = std::move(model);
}

bool ModelStore::contains(const std::string& exemplar_id, Channel channel) const {
  {
    std::lock_guard lock(mu_);
    if (cache_.count(key(exemplar_id, channel))) return true;
  }
  return !root_.empty() &&
         std::filesystem::exists(model_dir(root_, exemplar_id, channel) / "config.json");
}

std::shared_ptr<const StyleModel> ModelStore::get(const std::string& exemplar_id,
                                                  Channel channel) const {
  std::lock_guard lock(mu_);
  const std::string k = key(exemplar_id, channel);
  if (auto it = cache_.find(k); it != cache_.end()) return it->second;
  const auto dir = root_.empty() ? std::filesystem::path() : model_dir(root_, exemplar_id, channel);
  if (dir.empty() || !std::filesystem::exists(dir / "config.json"))
    throw AssetError("no style model for exemplar '" + exemplar_id + "' channel '" +
                     std::string(to_string(channel)) + "'" +
                     (dir.empty() ? std::string() : " (looked in " + dir.string() + ")"));
  auto model = std::make_shared<const StyleModel>(stylenet::load_style_model(dir));
  cache_[k] = model;
  return model;
}

namespace {

std::vector<float> gaussian_kernel(double radius) {
  const int half = int(std::ceil(radius));
  const double sigma = std::max(radius / 2.0, 1e-6);
  std::vector<float> k(std::size_t(2 * half + 1));
  double sum = 0;
  for (int i = -half; i <= half; ++i) sum += k[std::size_t(i + half)] = float(std::exp(-0.5 * i * i / (sigma * sigma)));
  for (auto& v : k) v = float(v / sum);
  return k;
}

std::vector<float> soften(const Mask& m, double radius) {
  const int w = m.width(), h = m.height();
  const auto k = gaussian_kernel(radius);
  const int half = int(k.size() / 2);
  std::vector<float> tmp(std::size_t(w) * h), out(std::size_t(w) * h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      float s = 0;
      for (int i = -half; i <= half; ++i)
        s += k[std::size_t(i + half)] * m.at(std::clamp(x + i, 0, w - 1), y);
      tmp[std::size_t(y) * w + x] = s;
    }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      float s = 0;
      for (int i = -half; i <= half; ++i)
        s += k[std::size_t(i + half)] * tmp[std::size_t(std::clamp(y + i, 0, h - 1)) * w + x];
      out[std::size_t(y) * w + x] = s;
    }
  return out;
}

}  // namespace

Raster blend(const std::map<Channel, Raster>& outputs, const MaskSet& masks, double feather_radius) {
  const int w = masks.width(), h = masks.height();
  PANELSTYLE_REQUIRE(feather_radius >= 0, "blend: negative feather radius");
  for (const auto& [c, img] : outputs) {
    PANELSTYLE_REQUIRE(c != Channel::kWhole, "blend: the whole channel has no mask");
    PANELSTYLE_REQUIRE(img.width() == w && img.height() == h,
                       "blend: " + std::string(to_string(c)) + " output is " +
                           std::to_string(img.width()) + "x" + std::to_string(img.height()) +
                           " but masks are " + std::to_string(w) + "x" + std::to_string(h));
  }
  for (Channel c : kMaskChannels)
    PANELSTYLE_REQUIRE(!masks.get(c).any() || outputs.count(c),
                       "blend: missing output for non-empty channel " + std::string(to_string(c)));

  auto bg = outputs.find(Channel::kBackground);
  Raster out = bg != outputs.end() ? bg->second : Raster(w, h);
  for (Channel c : {Channel::kForeground, Channel::kTextbox}) {
    auto it = outputs.find(c);
    if (it == outputs.end()) continue;
    const Mask& m = masks.get(c);
    const Raster& src = it->second;
    if (feather_radius <= 0) {
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
          if (m.at(x, y)) out.set(x, y, src.at(x, y));
    } else {
      const auto alpha = soften(m, feather_radius);
      auto dst = out.bytes();
      const auto s = src.bytes();
      for (std::size_t i = 0; i < alpha.size(); ++i)
        for (std::size_t ch = 0; ch < 3; ++ch) {
          const float a = alpha[i];
          const float v = dst[3 * i + ch] * (1 - a) + s[3 * i + ch] * a;
          dst[3 * i + ch] = std::uint8_t(std::clamp(std::lround(v), 0L, 255L));
        }
    }
  }
  return out;
}

namespace {

struct PlannedChannel {
  ChannelRun run;
  Raster content;
};

// Masks and per-channel selections; no model is touched.
std::vector<PlannedChannel> plan_panel(const PanelRecord& panel, const Treatment& treatment,
                                       std::span<const StyleExemplar> catalog,
                                       const TransferOptions& options, TransferJob& job) {
  if (catalog.empty()) throw AssetError("empty exemplar catalog");
  PANELSTYLE_REQUIRE(panel.image.width() > 0, "panel " + panel.panel_id + " has no image");
  std::vector<PlannedChannel> plan;
  if (treatment.masking == Masking::kNone) {
    MaskedImage whole{panel.panel_id, Channel::kWhole, panel.image};
    const Selection sel = select_style(whole, catalog, Channel::kWhole);
    plan.push_back({{Channel::kWhole, false, sel.exemplar->exemplar_id, "", sel.distance, false, 0},
                    panel.image});
    return plan;
  }
  job.masks = build_mask_set(panel, treatment.mask_variant());
  job.composition = classify_composition(panel);
  const auto restrict_to =
      treatment.composition_select ? std::optional(job.composition) : std::nullopt;
  for (Channel c : kMaskChannels) {
    PlannedChannel p;
    p.run.channel = c;
    if (!job.masks->get(c).any()) {
      p.run.skipped = true;
      plan.push_back(std::move(p));
      continue;
    }
    MaskedImage content = apply_mask(panel, *job.masks, c, options.fill);
    const Selection sel = select_style(content, catalog, c, restrict_to);
    p.run.exemplar_id = sel.exemplar->exemplar_id;
    p.run.distance = sel.distance;
    p.run.composition_filtered = sel.composition_filtered;
    p.content = std::move(content.image);
    plan.push_back(std::move(p));
  }
  return plan;
}

}  // namespace

TransferJob run_panel(const PanelRecord& panel, const Treatment& treatment,
                      std::span<const StyleExemplar> catalog, const ModelStore& store,
                      const TransferOptions& options) {
  validate(treatment);
  TransferJob job;
  job.panel_id = panel.panel_id;
  job.reading_index = panel.reading_index;
  job.treatment = treatment;
  auto plan = plan_panel(panel, treatment, catalog, options, job);

  // Resolve every model before any stylize call so a missing one fails fast.
  std::vector<std::shared_ptr<const StyleModel>> models(plan.size());
  for (std::size_t i = 0; i < plan.size(); ++i) {
    if (plan[i].run.skipped) continue;
    models[i] = store.get(plan[i].run.exemplar_id, plan[i].run.channel);
    plan[i].run.model_id = models[i]->model_id;
  }

  std::vector<std::size_t> order;
  if (treatment.masking == Masking::kNone) {
    order.push_back(0);
  } else {
    for (Channel c : options.execution_order)
      for (std::size_t i = 0; i < plan.size(); ++i)
        if (plan[i].run.channel == c && !plan[i].run.skipped) order.push_back(i);
  }
  std::vector<Raster> results(plan.size());
  parallel_for(order.size(), options.jobs, [&](std::size_t k) {
    const std::size_t i = order[k];
    const auto t0 = std::chrono::steady_clock::now();
    results[i] = stylenet::stylize(*models[i], plan[i].content);
    plan[i].run.stylize_ms = ms_since(t0);
  });

  for (std::size_t i = 0; i < plan.size(); ++i) {
    if (!plan[i].run.skipped) job.outputs[plan[i].run.channel] = std::move(results[i]);
    job.channels.push_back(plan[i].run);
  }
  if (treatment.masking == Masking::kNone)
    job.blended = job.outputs.at(Channel::kWhole);
  else
    job.blended = blend(job.outputs, *job.masks, options.feather_radius);
  return job;
}

PageRecord as_single_panel(const PageRecord& page) {
  PANELSTYLE_REQUIRE(page.image.width() > 0, "page " + page.page_id + " has no image");
  PageRecord out = page;
  out.panels.clear();
  PanelRecord p;
  p.panel_id = page.page_id + "_page";
  p.bbox = {0, 0, page.image.width(), page.image.height()};
  p.image = page.image;
  out.panels.push_back(std::move(p));
  return out;
}

PageTransfer run_page(const PageRecord& page, const Treatment& treatment,
                      std::span<const StyleExemplar> catalog, const ModelStore& store,
                      const std::vector<LayoutTemplate>& templates, const PageOptions& options) {
  validate(treatment);
  PANELSTYLE_REQUIRE(!page.panels.empty(), "page " + page.page_id + " has no panels");
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<const PanelRecord*> panels;
  for (const auto& p : page.panels) panels.push_back(&p);
  std::stable_sort(panels.begin(), panels.end(), [](const auto* a, const auto* b) {
    return a->reading_index < b->reading_index;
  });

  PageTransfer result;
  result.page_id = page.page_id;
  result.treatment = treatment;
  result.jobs.resize(panels.size());
  TransferOptions inner = options.transfer;
  if (panels.size() > 1) inner.jobs = 1;
  parallel_for(panels.size(), options.transfer.jobs, [&](std::size_t i) {
    const PanelRecord& panel = *panels[i];
    try {
      std::optional<Raster> previous;
      if (options.reuse) previous = options.reuse(panel);
      if (previous) {
        TransferJob job;
        job.panel_id = panel.panel_id;
        job.reading_index = panel.reading_index;
        job.treatment = treatment;
        for (auto& p : plan_panel(panel, treatment, catalog, inner, job)) job.channels.push_back(p.run);
        job.blended = std::move(*previous);
        job.reused = true;
        result.jobs[i] = std::move(job);
      } else {
        result.jobs[i] = run_panel(panel, treatment, catalog, store, inner);
      }
    } catch (const Error& e) {
      rethrow_with_context(e, "page " + page.page_id + " panel " + panel.panel_id);
    }
  });

  const LayoutTemplate layout =
      pick_template(int(panels.size()), templates, options.layout_seed);
  int width = options.page_width_px;
  if (width <= 0) width = page.image.width() > 0 ? page.image.width() : 800;
  std::vector<PanelImage> images;
  for (const auto& job : result.jobs) images.push_back({job.panel_id, &*job.blended});
  result.composed = compose_page(images, layout, width, options.gutter_px);
  result.total_ms = ms_since(t0);
  return result;
}

namespace {

json rect_json(const Rect& r) { return json::array({r.x, r.y, r.w, r.h}); }

}  // namespace

json trace_json(const PageTransfer& result) {
  json panels = json::array();
  for (std::size_t i = 0; i < result.jobs.size(); ++i) {
    const auto& job = result.jobs[i];
    json channels = json::object();
    json timings = json::object();
    for (const auto& c : job.channels) {
      const std::string name(to_string(c.channel));
      if (c.skipped) {
        channels[name] = {{"skipped", true}};
        continue;
      }
      channels[name] = {{"skipped", false},
                        {"exemplar_id", c.exemplar_id},
                        {"hash_distance", c.distance},
                        {"composition_filtered", c.composition_filtered}};
      timings[name] = c.stylize_ms;
    }
    json p = {{"panel_id", job.panel_id}, {"reading_index", job.reading_index},
              {"channels", channels}, {"timings_ms", timings}};
    if (job.masks) p["composition"] = to_string(job.composition);
    if (i < result.composed.placements.size()) {
      p["slot"] = rect_json(result.composed.placements[i].slot);
      p["placed"] = rect_json(result.composed.placements[i].placed);
    }
    panels.push_back(std::move(p));
  }
  return {{"page_id", result.page_id},
          {"treatment", result.treatment.label()},
          {"template_id", result.composed.template_id},
          {"panels", panels},
          {"timings_ms", {{"total", result.total_ms}}}};
}

json strip_timings(json trace) {
  if (trace.is_object()) {
    trace.erase("timings_ms");
    for (auto& [k, v] : trace.items()) v = strip_timings(v);
  } else if (trace.is_array()) {
    for (auto& v : trace) v = strip_timings(v);
  }
  return trace;
}

void write_page_outputs(const PageTransfer& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& job : result.jobs) save_png(*job.blended, dir / (job.panel_id + ".png"));
  save_png(result.composed.image, dir / "page.png");
  std::ofstream out(dir / "trace.json");
  out << trace_json(result).dump(2) << '\n';
  if (!out) throw Error(ErrorKind::kInternal, "cannot write " + (dir / "trace.json").string());
}

}  // namespace panelstyle
