// Copyright 2026 The Panelstyle Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <json.hpp>

#include "app/commands.hpp"
#include "cloze/cloze_set.hpp"
#include "cloze/toy_corpus.hpp"
#include "core/error.hpp"
#include "support.hpp"
#include "synth/fixtures.hpp"

using namespace panelstyle;
using namespace panelstyle::testing;
using namespace panelstyle::app;
using nlohmann::json;

namespace {

// One four-panel manga page, a comics style title, a template library and
// a stylenet configuration small enough for unit tests.
json tiny_project(const fs::path& dir) {
  synth::write_fixture_title(dir / "comics", {"styleA", Source::kComics, 2, 240, 360, 3});
  // Search for a seed whose single page has exactly four panels.
  for (std::uint64_t seed = 1;; ++seed) {
    const auto path = synth::write_fixture_title(dir / "manga", {"contentA", Source::kManga, 1, 240, 360, seed});
    if (json::parse(read_file(path))["pages"][0]["panels"].size() == 4) break;
    REQUIRE(seed < 200);
  }
  for (const auto& t : synth::make_template_library(Source::kComics))
    save_template(t, dir / "templates" / (t.template_id + ".json"));
  RunConfig cfg = default_run_config();
  cfg.jobs = 2;
  cfg.stylenet.iterations = 2;
  cfg.stylenet.image_size = 16;
  cfg.stylenet.style_size = 16;
  cfg.stylenet.transformer = {4, 1};
  cfg.stylenet.loss_network.width_divisor = 16;
  cfg.content_limit = 2;
  json doc = to_json(cfg);
  doc["paths"] = {{"style_corpus", "comics/styleA.json"},
                  {"content_corpus", {"manga/contentA.json"}},
                  {"templates", "templates"}};
  return doc;
}

fs::path write_config(const fs::path& dir, const json& doc) {
  write_file(dir / "run.json", doc.dump(2));
  return dir / "run.json";
}

}  // namespace

TEST_SUITE("app") {
  TEST_CASE("config: defaults, relative paths, unknown keys, overrides") {
    TempDir dir("cfg");
    const RunConfig c = run_config_from_json(json::object(), dir.path());
    CHECK(c.paths.work == dir / "work");
    CHECK(c.paths.models == dir / "work" / "models");
    CHECK(c.treatment_for(cloze::EvalSetting::kMaskedTransfer).label() == "CP_R_M");
    CHECK(c.resolved_jobs() >= 1);

    CHECK_THROWS_AS(run_config_from_json(json{{"sede", 1}}, dir.path()), ConfigError);
    CHECK_THROWS_AS(run_config_from_json(json{{"paths", {{"wrok", "x"}}}}, dir.path()), ConfigError);
    CHECK_THROWS_AS(run_config_from_json(json{{"treatment", "CP,N_M,C"}}, dir.path()), ConfigError);
    CHECK_THROWS_AS(run_config_from_json(json{{"jobs", -1}}, dir.path()), ConfigError);

    json doc = {{"seed", 3}, {"paths", {{"output", "results"}}}};
    set_value(doc, "stylenet.iterations", "25");
    set_value(doc, "treatment", "CP,F_M");
    set_value(doc, "seed", "9");
    const RunConfig o = run_config_from_json(doc, dir.path());
    CHECK(o.seed == 9);
    CHECK(o.stylenet.iterations == 25);
    CHECK(o.treatment.label() == "CP_F_M");
    CHECK(o.paths.output == dir / "results");
    CHECK_THROWS_AS(set_value(doc, "a..b", "1"), ConfigError);
  }

  TEST_CASE("config files allow comments and snapshots load as configs") {
    TempDir dir("cfgfile");
    write_file(dir / "c.json", "{\n  // seed for everything\n  \"seed\": 4\n}\n");
    const RunConfig c = load_run_config(dir / "c.json");
    CHECK(c.seed == 4);
    write_snapshot(dir / "snap" / "s.json", "mask", json::object(), c);
    const RunConfig s = load_run_config(dir / "snap" / "s.json");
    CHECK(to_json(s) == to_json(c));
    write_file(dir / "bad.json", "{ seed: }");
    CHECK_THROWS_AS(load_run_config(dir / "bad.json"), ConfigError);
    CHECK_THROWS_AS(load_run_config(dir / "missing.json"), AssetError);
  }

  TEST_CASE("transfer CP,R_M over a four-panel page: panels, trace, snapshot, restart, rerun") {
    TempDir dir("transfer");
    json doc = tiny_project(dir.path());
    doc["treatment"] = "CP,R_M";
    const RunConfig cfg = load_run_config(write_config(dir.path(), doc));
    cmd_ingest(cfg);
    cmd_train_style(cfg, false);
    cmd_transfer(cfg, false);

    const fs::path page_dir = cfg.paths.output / "CP_R_M" / "contentA_1";
    int pngs = 0;
    for (const auto& e : fs::directory_iterator(page_dir))
      if (e.path().extension() == ".png" && e.path().filename() != "page.png") ++pngs;
    CHECK(pngs == 4);
    CHECK(fs::exists(page_dir / "page.png"));
    const json trace = json::parse(read_file(page_dir / "trace.json"));
    CHECK(trace["panels"].size() == 4);
    CHECK(trace["treatment"] == "CP_R_M");
    const fs::path snapshot = cfg.paths.output / "CP_R_M" / "transfer.config.json";
    REQUIRE(fs::exists(snapshot));

    std::vector<std::string> ids;
    for (const auto& p : trace["panels"]) ids.push_back(p["panel_id"]);
    const std::string panel0 = read_file(page_dir / (ids[0] + ".png"));
    const std::string page = read_file(page_dir / "page.png");
    // Restart: an existing panel output is reused as is.
    fs::remove(page_dir / (ids[1] + ".png"));
    cmd_transfer(cfg, false);
    CHECK(fs::exists(page_dir / (ids[1] + ".png")));
    CHECK(read_file(page_dir / "page.png") == page);
    // Forced rerun from the snapshot reproduces the bytes.
    rerun(snapshot, true);
    CHECK(read_file(page_dir / (ids[0] + ".png")) == panel0);
    CHECK(read_file(page_dir / "page.png") == page);

    cmd_compose(cfg);
    CHECK(fs::exists(page_dir / "layout.json"));
  }

  TEST_CASE("missing assets surface as asset errors") {
    TempDir dir("assets");
    json doc = tiny_project(dir.path());
    const RunConfig cfg = load_run_config(write_config(dir.path(), doc));
    CHECK_THROWS_AS(cmd_transfer(cfg, false), AssetError);  // no catalog yet
    cmd_ingest(cfg);
    CHECK_THROWS_AS(cmd_transfer(cfg, false), AssetError);  // no models yet
    CHECK_THROWS_AS(cmd_cloze_eval(cfg, cloze::EvalSetting::kNoTransfer, cloze::EncoderId::kFeatureC), AssetError);
  }

  TEST_CASE("cloze eval N_T on a ten-instance set writes one row with the hand count") {
    TempDir dir("eval");
    const auto pages = cloze::make_toy_corpus({2, 5, 5, 32, 4});
    RunConfig cfg = run_config_from_json(json::object(), dir.path());
    cfg.cloze.hidden = 6;
    cfg.cloze.proj_dim = 4;
    cfg.cloze.epochs = 1;
    cfg.cloze.encoder.input_size = 32;
    cfg.cloze.encoder.vgg = {16, 16, true, 16, ""};
    auto set = cloze::build_cloze_set(pages, 3, 8);
    REQUIRE(set.size() >= 10);
    set.resize(10);
    cloze::save_cloze_set(set, cloze_dir(cfg) / "eval.json");
    for (const auto& p : pages)
      for (const auto& panel : p.panels) save_png(panel.image, crops_dir(cfg) / p.page_id / (panel.panel_id + ".png"));
    const auto bank = cloze::PanelBank::from_directory(crops_dir(cfg), set);
    const auto model = cloze::train_cloze_model(set, {}, bank, cloze::EncoderId::kFeatureC, cfg.cloze);
    cloze::save_cloze_model(model, cloze_dir(cfg) / "models" / "feature_C");

    int correct = 0;
    const auto probs = cloze::score_set(model, set, bank);
    for (std::size_t i = 0; i < set.size(); ++i) {
      int best = 0;
      for (int k = 1; k < 3; ++k)
        if (probs[i][std::size_t(k)] > probs[i][std::size_t(best)]) best = k;
      correct += best == set[i].answer_index;
    }
    cmd_cloze_eval(cfg, cloze::EvalSetting::kNoTransfer, cloze::EncoderId::kFeatureC);
    const std::string csv = read_file(eval_dir(cfg) / "N_T.feature_C.csv");
    char expected[96];
    std::snprintf(expected, sizeof expected, "setting,encoder,n_instances,accuracy_pct\nN_T,feature_C,10,%.2f\n",
                  correct * 10.0);
    CHECK(csv == expected);
  }

  TEST_CASE("report emits the 4 x 2 grid even when cells are missing") {
    TempDir dir("report");
    const RunConfig cfg = run_config_from_json(json::object(), dir.path());
    write_file(eval_dir(cfg) / "T_M.feature_M.csv", "setting,encoder,n_instances,accuracy_pct\nT_M,feature_M,30,40.00\n");
    cmd_report(cfg);
    CHECK(read_file(cfg.paths.output / "report" / "cloze_grid.csv") ==
          "setting,feature_C,feature_M\nN_T,,\nT_W,,\nT_M,,40.00\nT_C,,\n");
  }
}
