// Copyright 2026 The Panelstyle Authors
// SPDX-License-Identifier: Apache-2.0

#include "app/commands.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "cloze/cloze_set.hpp"
#include "core/error.hpp"
#include "core/layout.hpp"
#include "core/log.hpp"
#include "core/parallel.hpp"
#include "core/style_select.hpp"
#include "synth/fixtures.hpp"

namespace panelstyle::app {

using nlohmann::json;

fs::path crops_dir(const RunConfig& cfg) { return cfg.paths.work / "crops"; }
fs::path treatment_dir(const RunConfig& cfg, const Treatment& t) {
  return cfg.paths.output / t.label();
}
fs::path cloze_dir(const RunConfig& cfg) { return cfg.paths.work / "cloze"; }
fs::path eval_dir(const RunConfig& cfg) { return cfg.paths.output / "cloze"; }

namespace {

void write_text(const fs::path& file, const std::string& text) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::binary);
  out << text;
  if (!out) throw Error(ErrorKind::kInternal, "cannot write " + file.string());
}

std::string read_text(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw AssetError("file not found: " + file.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<PageRecord> content_pages(const RunConfig& cfg) {
  if (cfg.paths.content_corpus.empty()) throw ConfigError("config: paths.content_corpus is empty");
  return load_corpus(cfg.paths.content_corpus, Source::kManga, cfg.row_overlap);
}

std::vector<StyleExemplar> catalog_for(const RunConfig& cfg, const Treatment& t) {
  if (t.style_source == StyleSource::kArtStyle) {
    if (cfg.paths.art_catalog.empty()) throw ConfigError("config: paths.art_catalog is required for AS treatments");
    return load_catalog(cfg.paths.art_catalog, cfg.fill);
  }
  if (!fs::exists(cfg.paths.catalog))
    throw AssetError("exemplar catalog not found: " + cfg.paths.catalog.string() + " (run ingest)");
  return load_catalog(cfg.paths.catalog, cfg.fill);
}

std::vector<Channel> channels_of(const Treatment& t) {
  if (t.masking == Masking::kNone) return {Channel::kWhole};
  return {kMaskChannels.begin(), kMaskChannels.end()};
}

std::vector<const PanelRecord*> reading_order(const PageRecord& page) {
  std::vector<const PanelRecord*> ps;
  for (const auto& p : page.panels) ps.push_back(&p);
  std::stable_sort(ps.begin(), ps.end(), [](auto* a, auto* b) { return a->reading_index < b->reading_index; });
  return ps;
}

std::vector<const PanelRecord*> panels_in_order(const std::vector<PageRecord>& pages) {
  std::vector<const PanelRecord*> out;
  for (const auto& page : pages) {
    const auto ps = reading_order(page);
    out.insert(out.end(), ps.begin(), ps.end());
  }
  return out;
}

}  // namespace

std::vector<PageRecord> load_corpus(const std::vector<fs::path>& titles, Source default_source,
                                    double row_overlap, std::vector<std::string>* warnings) {
  std::vector<PageRecord> pages;
  std::set<std::string> ids;
  for (const auto& t : titles) {
    auto part = ingest_title(t, t.parent_path(), {default_source, row_overlap}, warnings);
    for (auto& p : part) {
      if (!ids.insert(p.page_id).second)
        throw ConfigError("page id '" + p.page_id + "' appears in more than one title");
      pages.push_back(std::move(p));
    }
  }
  return pages;
}

void cmd_ingest(const RunConfig& cfg) {
  std::vector<std::string> warnings;
  std::vector<PageRecord> style, all;
  style = load_corpus(cfg.paths.style_corpus, Source::kComics, cfg.row_overlap, &warnings);
  std::vector<fs::path> manga = cfg.paths.content_corpus;
  manga.insert(manga.end(), cfg.paths.manga_train_corpus.begin(), cfg.paths.manga_train_corpus.end());
  all = load_corpus(manga, Source::kManga, cfg.row_overlap, &warnings);
  std::set<std::string> ids;
  for (const auto& p : all) ids.insert(p.page_id);
  for (const auto& p : style)
    if (!ids.insert(p.page_id).second)
      throw ConfigError("page id '" + p.page_id + "' appears in more than one title");
  all.insert(all.end(), style.begin(), style.end());
  if (all.empty()) throw ConfigError("config: no corpora configured");

  json pages = json::array();
  for (const auto& page : all) {
    json panels = json::array();
    for (const auto* p : reading_order(page)) {
      save_png(p->image, crops_dir(cfg) / page.page_id / (p->panel_id + ".png"));
      panels.push_back({{"panel_id", p->panel_id},
                        {"bbox", {p->bbox.x, p->bbox.y, p->bbox.w, p->bbox.h}},
                        {"reading_index", p->reading_index},
                        {"composition", to_string(classify_composition(*p))},
                        {"textboxes", p->textboxes.size()},
                        {"bodies", p->bodies.size()},
                        {"faces", p->faces.size()}});
    }
    pages.push_back({{"page_id", page.page_id},
                     {"book_id", page.book_id},
                     {"page_index", page.page_index},
                     {"source", std::string(to_string(page.source))},
                     {"panels", panels}});
  }
  write_text(cfg.paths.work / "corpus.json",
             json{{"pages", pages}, {"warnings", warnings}}.dump(2) + "\n");
  if (!style.empty()) {
    const auto exemplars = build_catalog(style, cfg.mask_variant, cfg.fill);
    save_catalog(exemplars, cfg.paths.catalog);
    log::info("ingest: catalog with " + std::to_string(exemplars.size()) + " exemplars");
  }
  log::info("ingest: " + std::to_string(all.size()) + " pages");
  write_snapshot(cfg.paths.work / "ingest.config.json", "ingest", json::object(), cfg);
}

void cmd_mask(const RunConfig& cfg) {
  const auto pages = content_pages(cfg);
  const fs::path root = cfg.paths.work / "masks" / std::string(to_string(cfg.mask_variant));
  for (const auto& page : pages)
    for (const auto& p : page.panels) save_mask_set(build_mask_set(p, cfg.mask_variant), root / page.page_id);
  write_snapshot(root / "mask.config.json", "mask", json::object(), cfg);
}

void cmd_train_style(const RunConfig& cfg, bool force, const std::string& which) {
  if (which != "needed" && which != "all")
    throw ConfigError("train-style: channels must be 'needed' or 'all'");
  const auto exemplars = catalog_for(cfg, cfg.treatment);
  std::vector<Channel> channels = channels_of(cfg.treatment);
  if (which == "all") channels = {Channel::kTextbox, Channel::kForeground, Channel::kBackground, Channel::kWhole};
  const MaskVariant variant =
      cfg.treatment.masking == Masking::kNone ? cfg.mask_variant : cfg.treatment.mask_variant();

  const auto pages = content_pages(cfg);
  auto ordered = panels_in_order(pages);
  PANELSTYLE_REQUIRE(!ordered.empty(), "train-style: content corpus has no panels");
  std::vector<MaskSet> masks;
  for (std::size_t i = 0; i < ordered.size(); ++i) masks.push_back(build_mask_set(*ordered[i], variant));

  struct Task {
    const StyleExemplar* ex;
    Channel channel;
  };
  std::vector<Task> tasks;
  for (const auto& ex : exemplars)
    for (Channel c : channels) {
      const auto dir = ModelStore::model_dir(cfg.paths.models, ex.exemplar_id, c);
      if (!force && fs::exists(dir / "config.json")) continue;
      tasks.push_back({&ex, c});
    }
  parallel_for(tasks.size(), cfg.resolved_jobs(), [&](std::size_t k) {
    const auto& [ex, channel] = tasks[k];
    std::vector<Raster> content;
    for (std::size_t i = 0; i < ordered.size() && int(content.size()) < cfg.content_limit; ++i) {
      if (channel == Channel::kWhole) {
        content.push_back(ordered[i]->image);
      } else if (masks[i].get(channel).any()) {
        content.push_back(apply_mask(*ordered[i], masks[i], channel, cfg.fill).image);
      }
    }
    if (content.empty()) content.push_back(ordered.front()->image);
    const Raster style = exemplar_channel_image(*ex, channel, cfg.fill);
    try {
      auto model = stylenet::train_style_model(style, content, cfg.stylenet);
      model.model_id = ex->exemplar_id + "." + std::string(to_string(channel));
      model.channel = channel;
      model.style_exemplar_id = ex->exemplar_id;
      stylenet::save_style_model(model, ModelStore::model_dir(cfg.paths.models, ex->exemplar_id, channel));
      log::info("train-style: " + model.model_id + " done");
    } catch (const Error& e) {
      rethrow_with_context(e, "style model " + ex->exemplar_id + "." + std::string(to_string(channel)));
    }
  });
  write_snapshot(cfg.paths.models / ("train_style." + cfg.treatment.label() + ".config.json"),
                 "train-style", {{"channels", which}}, cfg);
}

void cmd_transfer(const RunConfig& cfg, bool force) {
  const auto pages = content_pages(cfg);
  const auto catalog = catalog_for(cfg, cfg.treatment);
  if (cfg.paths.templates.empty()) throw ConfigError("config: paths.templates is required");
  const auto templates = load_template_library(cfg.paths.templates);
  ModelStore store(cfg.paths.models);
  const fs::path root = treatment_dir(cfg, cfg.treatment);
  for (const auto& page : pages) {
    const fs::path dir = root / page.page_id;
    PageOptions opt;
    opt.transfer.fill = cfg.fill;
    opt.transfer.feather_radius = cfg.feather_radius;
    opt.transfer.jobs = cfg.resolved_jobs();
    opt.layout_seed = cfg.seed;
    opt.page_width_px = cfg.page_width;
    opt.gutter_px = cfg.gutter;
    if (!force)
      opt.reuse = [&](const PanelRecord& p) -> std::optional<Raster> {
        const auto file = dir / (p.panel_id + ".png");
        if (!fs::exists(file)) return std::nullopt;
        return load_image(file);
      };
    const auto result = run_page(page, cfg.treatment, catalog, store, templates, opt);
    write_page_outputs(result, dir);
    log::info("transfer: " + page.page_id + " (" + std::to_string(result.jobs.size()) + " panels)");
  }
  write_snapshot(root / "transfer.config.json", "transfer", json::object(), cfg);
}

void cmd_compose(const RunConfig& cfg) {
  const auto pages = content_pages(cfg);
  if (cfg.paths.templates.empty()) throw ConfigError("config: paths.templates is required");
  const auto templates = load_template_library(cfg.paths.templates);
  const fs::path root = treatment_dir(cfg, cfg.treatment);
  for (const auto& page : pages) {
    const fs::path dir = root / page.page_id;
    std::vector<Raster> images;
    std::vector<PanelImage> panels;
    const auto ordered = reading_order(page);
    images.reserve(ordered.size());
    for (const auto* p : ordered) {
      const auto file = dir / (p->panel_id + ".png");
      if (!fs::exists(file)) throw AssetError("transferred panel not found: " + file.string() + " (run transfer)");
      images.push_back(load_image(file));
    }
    for (std::size_t i = 0; i < ordered.size(); ++i) panels.push_back({ordered[i]->panel_id, &images[i]});
    const auto layout = pick_template(int(panels.size()), templates, cfg.seed);
    const int width = cfg.page_width > 0 ? cfg.page_width : (page.image.width() > 0 ? page.image.width() : 800);
    const auto composed = compose_page(panels, layout, width, cfg.gutter);
    save_png(composed.image, dir / "page.png");
    json placements = json::array();
    for (const auto& pl : composed.placements)
      placements.push_back({{"panel_id", pl.panel_id},
                            {"slot", {pl.slot.x, pl.slot.y, pl.slot.w, pl.slot.h}},
                            {"placed", {pl.placed.x, pl.placed.y, pl.placed.w, pl.placed.h}}});
    write_text(dir / "layout.json",
               json{{"template_id", composed.template_id}, {"placements", placements}}.dump(2) + "\n");
  }
  write_snapshot(root / "compose.config.json", "compose", json::object(), cfg);
}

namespace {

fs::path train_set_path(const RunConfig& cfg, cloze::EncoderId e) {
  return cloze_dir(cfg) / ("train_" + std::string(cloze::to_string(e)) + ".json");
}

}  // namespace

void cmd_cloze_build(const RunConfig& cfg) {
  std::vector<std::string> skipped;
  const auto content = content_pages(cfg);
  const auto style = load_corpus(cfg.paths.style_corpus, Source::kComics, cfg.row_overlap);
  const auto manga = load_corpus(cfg.paths.manga_train_corpus, Source::kManga, cfg.row_overlap);
  std::set<std::string> eval_books;
  for (const auto& p : content) eval_books.insert(p.book_id);
  for (const auto* train : {&style, &manga})
    for (const auto& p : *train)
      if (eval_books.count(p.book_id))
        throw ConfigError("book '" + p.book_id + "' is in both a training corpus and the evaluation corpus");
  const int n = cfg.cloze.n_context;
  const auto eval = cloze::build_cloze_set(content, n, cfg.seed, &skipped);
  const auto train_c = cloze::build_cloze_set(style, n, cfg.seed, &skipped);
  const auto train_m = cloze::build_cloze_set(manga, n, cfg.seed, &skipped);
  cloze::save_cloze_set(eval, cloze_dir(cfg) / "eval.json");
  cloze::save_cloze_set(train_c, train_set_path(cfg, cloze::EncoderId::kFeatureC));
  cloze::save_cloze_set(train_m, train_set_path(cfg, cloze::EncoderId::kFeatureM));
  cloze::save_cloze_set(train_m, train_set_path(cfg, cloze::EncoderId::kFrozen));
  std::string log_text;
  for (const auto& s : skipped) log_text += s + "\n";
  write_text(cloze_dir(cfg) / "skipped.txt", log_text);
  log::info("cloze build: " + std::to_string(eval.size()) + " eval, " + std::to_string(train_c.size()) +
            " comics and " + std::to_string(train_m.size()) + " manga training instances");
  write_snapshot(cloze_dir(cfg) / "build.config.json", "cloze build", json::object(), cfg);
}

void cmd_cloze_train(const RunConfig& cfg, cloze::EncoderId encoder) {
  const auto set = cloze::load_cloze_set(train_set_path(cfg, encoder));
  if (set.empty())
    throw AssetError("no training instances for encoder " + std::string(cloze::to_string(encoder)));
  const auto bank = cloze::PanelBank::from_directory(crops_dir(cfg), set);
  auto [train, dev] = cloze::split_by_book(set, cfg.cloze.dev_fraction, cfg.seed);
  const auto model = cloze::train_cloze_model(train, dev, bank, encoder, cfg.cloze, {}, cfg.resolved_jobs());
  const fs::path dir = cloze_dir(cfg) / "models" / std::string(cloze::to_string(encoder));
  cloze::save_cloze_model(model, dir);
  write_snapshot(dir / "train.config.json", "cloze train",
                 {{"encoder", std::string(cloze::to_string(encoder))}}, cfg);
}

void cmd_cloze_eval(const RunConfig& cfg, cloze::EvalSetting setting, cloze::EncoderId encoder) {
  const auto set = cloze::load_cloze_set(cloze_dir(cfg) / "eval.json");
  if (set.empty()) throw ContractViolation("cloze eval: the evaluation set is empty");
  const auto model =
      cloze::load_cloze_model(cloze_dir(cfg) / "models" / std::string(cloze::to_string(encoder)));
  const fs::path images = setting == cloze::EvalSetting::kNoTransfer
                              ? crops_dir(cfg)
                              : treatment_dir(cfg, cfg.treatment_for(setting));
  const auto bank = cloze::PanelBank::from_directory(images, set);
  const auto report = cloze::evaluate(model, set, bank, setting, nullptr, cfg.resolved_jobs());
  const std::string stem = std::string(cloze::to_string(setting)) + "." + std::string(cloze::to_string(encoder));
  write_text(eval_dir(cfg) / (stem + ".csv"), cloze::report_csv({report}));
  write_snapshot(eval_dir(cfg) / (stem + ".config.json"), "cloze eval",
                 {{"setting", std::string(cloze::to_string(setting))},
                  {"encoder", std::string(cloze::to_string(encoder))}},
                 cfg);
}

void cmd_report(const RunConfig& cfg) {
  std::vector<cloze::EvalReport> reports;
  for (auto s : cloze::kAllSettings)
    for (auto e : {cloze::EncoderId::kFeatureC, cloze::EncoderId::kFeatureM, cloze::EncoderId::kFrozen}) {
      const auto file = eval_dir(cfg) / (std::string(cloze::to_string(s)) + "." + std::string(cloze::to_string(e)) + ".csv");
      if (!fs::exists(file)) continue;
      for (const auto& r : cloze::parse_report_csv(read_text(file))) reports.push_back(r);
    }
  write_text(cfg.paths.output / "report" / "cloze_report.csv", cloze::report_csv(reports));
  write_text(cfg.paths.output / "report" / "cloze_grid.csv", cloze::grid_csv(reports));
  write_snapshot(cfg.paths.output / "report" / "report.config.json", "report", json::object(), cfg);
}

void rerun(const fs::path& snapshot, bool force) {
  std::ifstream in(snapshot);
  if (!in) throw AssetError("snapshot not found: " + snapshot.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError(snapshot.string() + ": " + e.what());
  }
  if (!doc.is_object() || !doc.contains("command") || !doc.contains("config"))
    throw SchemaError(snapshot.string() + ": not a run snapshot");
  const RunConfig cfg = run_config_from_json(doc["config"], fs::absolute(snapshot).parent_path());
  const std::string cmd = doc["command"].get<std::string>();
  const json args = doc.value("args", json::object());
  if (cmd == "ingest") cmd_ingest(cfg);
  else if (cmd == "mask") cmd_mask(cfg);
  else if (cmd == "train-style") cmd_train_style(cfg, force, args.value("channels", "needed"));
  else if (cmd == "transfer") cmd_transfer(cfg, force);
  else if (cmd == "compose") cmd_compose(cfg);
  else if (cmd == "cloze build") cmd_cloze_build(cfg);
  else if (cmd == "cloze train") cmd_cloze_train(cfg, cloze::parse_encoder_id(args.at("encoder").get<std::string>()));
  else if (cmd == "cloze eval")
    cmd_cloze_eval(cfg, cloze::parse_eval_setting(args.at("setting").get<std::string>()),
                   cloze::parse_encoder_id(args.at("encoder").get<std::string>()));
  else if (cmd == "report") cmd_report(cfg);
  else throw SchemaError(snapshot.string() + ": unknown command '" + cmd + "'");
}

fs::path write_demo_project(const fs::path& dir, std::uint64_t seed) {
  fs::create_directories(dir);
  synth::write_fixture_title(dir / "comics", {"comicsA", Source::kComics, 8, 360, 540, seed});
  synth::write_fixture_title(dir / "manga", {"mangaA", Source::kManga, 3, 360, 540, seed + 1});
  synth::write_fixture_title(dir / "manga_train", {"mangaB", Source::kManga, 8, 360, 540, seed + 2});
  fs::create_directories(dir / "templates");
  for (const auto& t : synth::make_template_library(Source::kComics))
    save_template(t, dir / "templates" / (t.template_id + ".json"));
  save_catalog(synth::make_art_exemplars(3, 64, seed + 3), dir / "art" / "catalog.json");

  RunConfig cfg = default_run_config();
  cfg.seed = seed;
  cfg.stylenet.iterations = 40;
  cfg.stylenet.image_size = 32;
  cfg.stylenet.style_size = 64;
  cfg.stylenet.transformer = {8, 2};
  cfg.stylenet.loss_network.width_divisor = 8;
  cfg.content_limit = 4;
  cfg.cloze.epochs = 3;
  cfg.cloze.encoder.input_size = 64;
  cfg.cloze.encoder.vgg.width_divisor = 8;
  json doc = to_json(cfg);
  doc["paths"] = {{"style_corpus", {"comics/comicsA.json"}},
                  {"content_corpus", {"manga/mangaA.json"}},
                  {"manga_train_corpus", {"manga_train/mangaB.json"}},
                  {"art_catalog", "art/catalog.json"},
                  {"catalog", "work/catalog/catalog.json"},
                  {"templates", "templates"},
                  {"models", "work/models"},
                  {"work", "work"},
                  {"output", "out"}};
  doc.erase("jobs");
  const fs::path file = dir / "panelstyle.json";
  write_text(file, doc.dump(2) + "\n");
  return file;
}

}  // namespace panelstyle::app
