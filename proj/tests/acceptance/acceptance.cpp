// Copyright 2026 The Panelstyle Authors
// SPDX-License-Identifier: Apache-2.0

// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails. Arguments select criteria by
// number; no arguments runs all ten.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include "app/commands.hpp"
#include "cloze/cloze_set.hpp"
#include "cloze/model.hpp"
#include "cloze/toy_corpus.hpp"
#include "core/layout.hpp"
#include "core/log.hpp"
#include "core/masking.hpp"
#include "core/parallel.hpp"
#include "core/style_select.hpp"
#include "pipeline/transfer.hpp"
#include "stylenet/losses.hpp"
#include "stylenet/style_model.hpp"
#include "support.hpp"
#include "synth/fixtures.hpp"

using namespace panelstyle;
using namespace panelstyle::testing;
using nlohmann::json;

namespace {

// Collects failed checks for one criterion; the first few are reported.
class Verdict {
 public:
  void check(bool ok, const std::string& what) {
    ++checks_;
    if (!ok && failures_.size() < 5) failures_.push_back(what);
    failed_ += !ok;
  }
  void note(const std::string& text) { notes_.push_back(text); }
  bool passed() const { return failed_ == 0 && checks_ > 0; }
  std::string summary() const {
    std::ostringstream out;
    out << checks_ << " checks";
    for (const auto& n : notes_) out << "; " << n;
    if (failed_ > 0) {
      out << "; " << failed_ << " failed:";
      for (const auto& f : failures_) out << " [" << f << "]";
    }
    return out.str();
  }

 private:
  long checks_ = 0;
  long failed_ = 0;
  std::vector<std::string> failures_;
  std::vector<std::string> notes_;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

// 1. Loss math against explicit loops.
void loss_oracles(Verdict& v) {
  nn::Rng rng(101);
  double worst = 0;
  for (int t = 0; t < 200; ++t) {
    const int c = 1 + int(rng.below(8)), h = 1 + int(rng.below(7)), w = 1 + int(rng.below(7));
    const auto a = random_tensor<double>(c, h, w, rng);
    const auto b = random_tensor<double>(c, h, w, rng);
    const auto s = random_tensor<double>(c, 1 + int(rng.below(7)), 1 + int(rng.below(7)), rng);
    const auto g = stylenet::gram(a);
    const auto go = oracle::gram(a);
    for (int i = 0; i < c; ++i)
      for (int j = 0; j < c; ++j) {
        const double e = std::abs(g(i, j) - go[std::size_t(i)][std::size_t(j)]) /
                         std::max(std::abs(go[std::size_t(i)][std::size_t(j)]), 1e-12);
        worst = std::max(worst, e);
        v.check(e <= 1e-6, "gram entry");
      }
    const double fl = rel_err(stylenet::feature_loss(a, b), oracle::feature_loss(a, b));
    const double sl = rel_err(stylenet::style_loss(a, s), oracle::style_loss(a, s));
    worst = std::max({worst, fl, sl});
    v.check(fl <= 1e-6, "feature_loss");
    v.check(sl <= 1e-6, "style_loss");
    v.check((g - g.transpose()).cwiseAbs().maxCoeff() == 0.0, "gram symmetry");
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Eigen::MatrixXd(g.cast<double>()));
    v.check(eig.eigenvalues().minCoeff() >= -1e-12 * std::max(1.0, eig.eigenvalues().maxCoeff()), "gram PSD");
  }
  v.note("worst relative error " + fmt("%.2e", worst));
}

// 2. Gradient of the full perceptual loss.
void gradient_check(Verdict& v) {
  nn::Rng rng(202);
  const nn::Vgg16Config net{4, 4096, false, 16, ""};
  for (int setting = 0; setting < 3; ++setting) {
    const stylenet::LossWeights w{std::pow(10.0, rng.uniform(-1, 1)), std::pow(10.0, rng.uniform(1, 4)),
                                  std::pow(10.0, rng.uniform(-4, -1))};
    const auto out = random_tensor<double>(3, 8, 8, rng, 0, 1);
    const auto content = random_tensor<double>(3, 8, 8, rng, 0, 1);
    const auto style = random_tensor<double>(3, 8, 8, rng, 0, 1);
    nn::Tensor<double> grad;
    stylenet::total_loss(out, content, style, w, stylenet::LayerSelection{}, net, &grad);
    const double h = 1e-5;
    double num2 = 0, diff2 = 0;
    for (std::size_t i = 0; i < out.size(); ++i) {
      auto p = out, m = out;
      p.data[i] += h;
      m.data[i] -= h;
      const double fd = (stylenet::total_loss(p, content, style, w, stylenet::LayerSelection{}, net).total -
                         stylenet::total_loss(m, content, style, w, stylenet::LayerSelection{}, net).total) /
                        (2 * h);
      num2 += fd * fd;
      diff2 += (fd - grad.data[i]) * (fd - grad.data[i]);
    }
    const double rel = std::sqrt(diff2 / num2);
    v.check(rel < 1e-3, "setting " + std::to_string(setting) + " relative error " + fmt("%.2e", rel));
    v.note("setting " + std::to_string(setting) + ": " + fmt("%.2e", rel));
  }
}

// Smooth content and a striped, high-frequency style image.
std::pair<Raster, Raster> overfit_pair() {
  Raster content(64, 64), style(64, 64);
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x) {
      content.set(x, y, {std::uint8_t(x * 4), std::uint8_t(y * 4), std::uint8_t(((x / 16 + y / 16) % 2) * 200)});
      style.set(x, y, {std::uint8_t((x + y) % 16 < 8 ? 230 : 20), std::uint8_t(120 + 100 * std::sin(x * 0.5)),
                       std::uint8_t(y % 8 < 4 ? 200 : 40)});
    }
  return {content, style};
}

// 3. Overfit one content/style pair with the full-width loss network.
void overfit(Verdict& v) {
  const auto [content, style] = overfit_pair();
  const std::vector<Raster> corpus{content};
  stylenet::TrainConfig cfg;
  cfg.iterations = 500;
  cfg.image_size = 64;
  cfg.style_size = 64;
  const auto m = stylenet::train_style_model(style, corpus, cfg);
  const double ratio = m.loss_curve.back().total / m.loss_curve.front().total;
  v.check(m.loss_curve.size() == 501, "loss curve length");
  v.check(ratio <= 0.10, "final/initial loss " + fmt("%.4f", ratio));
  v.note("final/initial loss " + fmt("%.4f", ratio));

  cfg.weights.style = 0;
  const auto c = stylenet::train_style_model(style, corpus, cfg);
  const double before = stylenet::mean_abs_error(stylenet::stylize(stylenet::StyleModel(cfg), content), content);
  const double after = stylenet::mean_abs_error(stylenet::stylize(c, content), content);
  v.check(std::abs(before - c.content_mae_initial) < 1e-9, "initial MAE bookkeeping");
  v.check(after < before, "content MAE " + fmt("%.2f", before) + " -> " + fmt("%.2f", after));
  v.note("style_weight=0 MAE " + fmt("%.2f", before) + " -> " + fmt("%.2f", after));
}

// 4. Masks partition every fixture panel and recompose it exactly.
void mask_partition(Verdict& v) {
  int panels = 0;
  for (const auto* pages : {&fixture_comics(), &fixture_manga()})
    for (const auto& page : *pages)
      for (const auto& p : page.panels)
        for (auto variant : {MaskVariant::kRect, MaskVariant::kFit}) {
          ++panels;
          const auto m = build_mask_set(p, variant);
          bool partition = true;
          for (int y = 0; y < p.image.height(); ++y)
            for (int x = 0; x < p.image.width(); ++x)
              partition = partition && m.textbox.at(x, y) + m.foreground.at(x, y) + m.background.at(x, y) == 1;
          v.check(partition, p.panel_id + " partition");
          Raster sum(p.image.width(), p.image.height());
          for (Channel c : kMaskChannels) {
            const Raster part = apply_mask(p.image, m.get(c), Color{0, 0, 0});
            for (std::size_t i = 0; i < sum.bytes().size(); ++i) sum.bytes()[i] += part.bytes()[i];
          }
          v.check(sum == p.image, p.panel_id + " recomposition");
        }
  v.note(std::to_string(panels) + " panel/variant pairs");
}

StyleExemplar exemplar_with_hash(const std::string& id, std::uint64_t bits) {
  StyleExemplar e;
  e.exemplar_id = id;
  e.image = Raster(8, 8);
  for (auto& h : e.hashes) h = ImageHash{bits};
  return e;
}

// 5. Hashing, the Hamming metric and nearest-exemplar selection.
void hash_suite(Verdict& v) {
  nn::Rng rng(505);
  for (int t = 0; t < 100; ++t) {
    const Raster img = random_raster(1 + int(rng.below(120)), 1 + int(rng.below(120)), rng);
    v.check(average_hash(img).bits == oracle::average_hash(img), "average_hash " + std::to_string(t));
  }
  for (int t = 0; t < 1000; ++t) {
    const ImageHash a{rng.bits()}, b{t % 3 == 0 ? a.bits : rng.bits()}, c{rng.bits() & rng.bits()};
    const int ab = hamming(a, b), bc = hamming(b, c), ac = hamming(a, c);
    v.check(ab == oracle::popcount_distance(a.bits, b.bits), "hamming oracle");
    v.check(ab >= 0 && ab <= 64, "range");
    v.check((ab == 0) == (a == b), "identity");
    v.check(ab == hamming(b, a), "symmetry");
    v.check(ac <= ab + bc, "triangle");
  }
  for (int t = 0; t < 50; ++t) {
    const Raster content = random_raster(8 + int(rng.below(40)), 8 + int(rng.below(40)), rng);
    const std::uint64_t ch = oracle::average_hash(content);
    std::vector<StyleExemplar> cands;
    const int n = 1 + int(rng.below(20));
    for (int k = 0; k < n; ++k) {
      // Mix of random hashes and near-copies so ties and small distances occur.
      std::uint64_t bits = rng.bits();
      if (rng.below(2)) bits = ch ^ (std::uint64_t{1} << rng.below(64)) ^ (std::uint64_t{1} << rng.below(64));
      cands.push_back(exemplar_with_hash("ex" + std::to_string(rng.below(1000)) + "_" + std::to_string(k), bits));
    }
    const StyleExemplar* best = nullptr;
    int best_d = 65;
    for (const auto& c : cands) {
      const int d = oracle::popcount_distance(ch, c.hash(Channel::kWhole).bits);
      if (d < best_d || (d == best_d && c.exemplar_id < best->exemplar_id)) best = &c, best_d = d;
    }
    const auto sel = select_style(MaskedImage{"content", Channel::kWhole, content}, cands, Channel::kWhole);
    v.check(sel.exemplar == best && sel.distance == best_d, "select_style catalog " + std::to_string(t));
  }
}

// 6. Blending against the priority oracle; channel execution order.
void blend_suite(Verdict& v) {
  nn::Rng rng(606);
  for (int t = 0; t < 100; ++t) {
    const int w = 1 + int(rng.below(40)), h = 1 + int(rng.below(40));
    const MaskSet m = random_partition(w, h, rng);
    std::map<Channel, Raster> outs;
    for (Channel c : kMaskChannels)
      if (m.get(c).any()) outs[c] = random_raster(w, h, rng);
    v.check(blend(outs, m) == oracle::blend(outs, m), "blend case " + std::to_string(t));
  }

  stylenet::TrainConfig tiny;
  tiny.image_size = 16;
  tiny.transformer = {4, 1};
  const auto catalog = build_catalog(fixture_comics(), MaskVariant::kRect);
  ModelStore store;
  for (const auto& ex : catalog)
    for (Channel c : {Channel::kTextbox, Channel::kForeground, Channel::kBackground, Channel::kWhole}) {
      auto cfg = tiny;
      cfg.seed = std::hash<std::string>{}(ex.exemplar_id + std::string(to_string(c)));
      auto model = std::make_shared<stylenet::StyleModel>(cfg);
      model->channel = c;
      model->style_exemplar_id = ex.exemplar_id;
      store.insert(ex.exemplar_id, c, model);
    }
  int panels = 0;
  for (const auto& page : fixture_manga())
    for (const auto& panel : page.panels) {
      ++panels;
      for (const char* treatment : {"CP,R_M", "CP,F_M,C"}) {
        TransferOptions base;
        base.jobs = 3;
        const auto ref = run_panel(panel, parse_treatment(treatment), catalog, store, base);
        std::array<Channel, 3> order = kMaskChannels;
        std::sort(order.begin(), order.end());
        do {
          TransferOptions o = base;
          o.execution_order = order;
          o.jobs = 1;
          v.check(*run_panel(panel, parse_treatment(treatment), catalog, store, o).blended == *ref.blended,
                  panel.panel_id + " order permutation");
        } while (std::next_permutation(order.begin(), order.end()));
      }
    }
  v.note(std::to_string(panels) + " fixture panels x 6 orders x 2 treatments");
}

// 7. Layout engine over the whole fixture template library.
void layout_suite(Verdict& v) {
  nn::Rng rng(707);
  int templates = 0;
  for (auto style : {Source::kComics, Source::kManga})
    for (const auto& t : synth::make_template_library(style)) {
      ++templates;
      std::vector<Raster> images;
      for (int i = 0; i < t.panel_count; ++i)
        images.push_back(Raster(10 + int(rng.below(300)), 10 + int(rng.below(300))));
      std::vector<PanelImage> panels;
      for (int i = 0; i < t.panel_count; ++i) panels.push_back({"p" + std::to_string(i), &images[std::size_t(i)]});
      const int width = 400 + int(rng.below(600));
      const auto page = compose_page(panels, t, width);
      v.check(page.placements.size() == images.size(), t.template_id + " placement count");
      const Rect bounds{0, 0, page.image.width(), page.image.height()};

      // Expected reading order straight from the rows: top to bottom, and
      // left to right (comics) or right to left (manga) inside a row.
      std::vector<std::pair<std::size_t, double>> expected;  // (row, x)
      for (std::size_t r = 0; r < t.rows.size(); ++r) {
        std::vector<double> xs;
        for (const auto& s : t.rows[r]) xs.push_back(s.x);
        std::sort(xs.begin(), xs.end());
        if (style == Source::kManga) std::reverse(xs.begin(), xs.end());
        for (double x : xs) expected.push_back({r, x});
      }
      for (std::size_t i = 0; i < page.placements.size(); ++i) {
        const auto& a = page.placements[i];
        const Raster& src = images[i];
        v.check(bounds.contains(a.placed) && a.slot.contains(a.placed), t.template_id + " in bounds");
        for (std::size_t j = i + 1; j < page.placements.size(); ++j)
          v.check(!a.placed.intersects(page.placements[j].placed), t.template_id + " overlap");
        const double scale = std::min(double(a.slot.w) / src.width(), double(a.slot.h) / src.height());
        v.check(std::abs(a.placed.w - src.width() * scale) <= 1.0 && std::abs(a.placed.h - src.height() * scale) <= 1.0,
                t.template_id + " aspect");
        if (i < expected.size()) {
          const auto [row, x] = expected[i];
          const Rect want = slot_pixels({x, 0, 0, 0}, page.image.width(), page.image.height(), kDefaultGutterPx);
          v.check(a.slot.x == want.x, t.template_id + " slot order");
          if (i > 0) {
            const auto [prev_row, prev_x] = expected[i - 1];
            v.check(prev_row < row || (style == Source::kManga ? prev_x > x : prev_x < x), t.template_id + " monotone");
            v.check(prev_row == row || page.placements[i - 1].slot.y <= a.slot.y, t.template_id + " rows top-down");
          }
        }
      }
    }
  v.check(contain_fit(200, 100, {0, 0, 100, 100}) == Rect{0, 25, 100, 50}, "200x100 -> 100x50 centered");
  v.note(std::to_string(templates) + " templates");
}

// 8. Cloze learning on the synthetic pattern-progression corpus.
void toy_cloze(Verdict& v) {
  cloze::ToyCorpusConfig tc;
  tc.books = 24;
  tc.pages_per_book = 25;
  const auto pages = cloze::make_toy_corpus(tc);
  const auto set = cloze::build_cloze_set(pages, 3, 11);
  const auto bank = cloze::PanelBank::from_pages(pages);
  cloze::ClozeConfig cfg;
  cfg.encoder.input_size = 128;
  cfg.encoder.vgg.width_divisor = 8;
  cfg.epochs = 8;
  cfg.dev_fraction = 0.5;
  const int jobs = default_jobs();
  v.check(set.size() >= 500, "instances");

  auto simplex = [&](const std::vector<std::array<double, 3>>& probs) {
    for (const auto& p : probs) {
      const double sum = p[0] + p[1] + p[2];
      v.check(std::abs(sum - 1) < 1e-6 && *std::min_element(p.begin(), p.end()) >= 0 &&
                  *std::max_element(p.begin(), p.end()) <= 1,
              "simplex");
    }
  };

  const auto [train, dev] = cloze::split_by_book(set, cfg.dev_fraction, 5);
  const auto model = cloze::train_cloze_model(train, dev, bank, cloze::EncoderId::kFrozen, cfg, {}, jobs);
  std::vector<std::array<double, 3>> probs;
  const auto real = cloze::evaluate(model, dev, bank, cloze::EvalSetting::kNoTransfer, &probs, jobs);
  simplex(probs);
  v.check(real.accuracy_pct >= 90.0, "dev accuracy " + fmt("%.2f", real.accuracy_pct));

  // Control: labels shuffled across the whole set before splitting.
  const auto shuffled = cloze::shuffle_labels(set, 99);
  const auto [strain, sdev] = cloze::split_by_book(shuffled, cfg.dev_fraction, 5);
  const auto control = cloze::train_cloze_model(strain, sdev, bank, cloze::EncoderId::kFrozen, cfg, {}, jobs);
  std::vector<std::array<double, 3>> sprobs;
  const auto ctrl = cloze::evaluate(control, sdev, bank, cloze::EvalSetting::kNoTransfer, &sprobs, jobs);
  simplex(sprobs);
  v.check(std::abs(ctrl.accuracy_pct - 100.0 / 3) <= 5.0, "shuffled control " + fmt("%.2f", ctrl.accuracy_pct));
  v.note(std::to_string(set.size()) + " instances, dev " + std::to_string(dev.size()) + ", accuracy " +
         fmt("%.2f", real.accuracy_pct) + "%, shuffled " + fmt("%.2f", ctrl.accuracy_pct) + "%");
}

// Full pipeline on the three-page demo corpus; shared by 9 and 10.
struct DemoRun {
  TempDir dir{"acceptance"};
  fs::path config;
  app::RunConfig cfg;
};

DemoRun& demo_run() {
  static DemoRun* run = [] {
    auto* r = new DemoRun;
    r->config = app::write_demo_project(r->dir.path(), 3);
    r->cfg = app::load_run_config(r->config);
    const auto& cfg = r->cfg;
    app::cmd_ingest(cfg);
    app::cmd_mask(cfg);
    app::cmd_train_style(cfg, false, "all");
    for (auto s : cloze::kAllSettings) {
      if (s == cloze::EvalSetting::kNoTransfer) continue;
      auto t = cfg;
      t.treatment = cfg.treatment_for(s);
      app::cmd_transfer(t, false);
      app::cmd_compose(t);
    }
    app::cmd_cloze_build(cfg);
    for (auto e : cloze::kReportEncoders) {
      app::cmd_cloze_train(cfg, e);
      for (auto s : cloze::kAllSettings) app::cmd_cloze_eval(cfg, s, e);
    }
    app::cmd_report(cfg);
    return r;
  }();
  return *run;
}

// 9. Report grid shape and a populated end-to-end grid.
void report_grid(Verdict& v) {
  auto& run = demo_run();
  const auto& cfg = run.cfg;
  const std::string grid = read_file(cfg.paths.output / "report" / "cloze_grid.csv");
  std::istringstream in(grid);
  std::vector<std::vector<std::string>> rows;
  for (std::string line; std::getline(in, line);) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.push_back("");
    rows.push_back(cells);
  }
  v.check(rows.size() == 5, "grid has a header and four setting rows");
  v.check(!rows.empty() && rows[0] == std::vector<std::string>{"setting", "feature_C", "feature_M"}, "grid header");
  const std::vector<std::string> settings = {"N_T", "T_W", "T_M", "T_C"};
  for (std::size_t r = 1; r < rows.size() && r <= 4; ++r) {
    v.check(rows[r].size() == 3 && rows[r][0] == settings[r - 1], "grid row " + settings[r - 1]);
    for (std::size_t c = 1; c < rows[r].size(); ++c) {
      const bool filled = !rows[r][c].empty();
      v.check(filled, "cell " + settings[r - 1] + "/" + std::to_string(c));
      if (filled) {
        const double a = std::stod(rows[r][c]);
        v.check(a >= 0 && a <= 100, "accuracy range");
      }
    }
  }

  // N_T must score the unmodified panels: crops equal the source panels and
  // an independent evaluation over them reproduces the reported cells.
  const auto pages = app::load_corpus(cfg.paths.content_corpus, Source::kManga, cfg.row_overlap);
  v.check(pages.size() == 3, "three content pages");
  for (const auto& page : pages)
    for (const auto& p : page.panels)
      v.check(load_image(app::crops_dir(cfg) / page.page_id / (p.panel_id + ".png")) == p.image,
              "crop " + p.panel_id + " is the original panel");
  const auto eval_set = cloze::load_cloze_set(app::cloze_dir(cfg) / "eval.json");
  const auto bank = cloze::PanelBank::from_pages(pages);
  const auto reports = cloze::parse_report_csv(read_file(cfg.paths.output / "report" / "cloze_report.csv"));
  for (auto e : cloze::kReportEncoders) {
    const auto model = cloze::load_cloze_model(app::cloze_dir(cfg) / "models" / std::string(cloze::to_string(e)));
    const auto expect = cloze::evaluate(model, eval_set, bank, cloze::EvalSetting::kNoTransfer);
    bool found = false;
    for (const auto& r : reports)
      if (r.setting == cloze::EvalSetting::kNoTransfer && r.encoder_id == e) {
        found = true;
        v.check(r.n_instances == expect.n_instances && r.n_correct == expect.n_correct,
                "N_T/" + std::string(cloze::to_string(e)) + " from originals");
      }
    v.check(found, "N_T row present");
  }
  v.note(std::to_string(eval_set.size()) + " eval instances");
}

// Every file under the project's work and output trees, with trace timings
// removed since they are wall-clock measurements.
std::map<std::string, std::string> artifact_state(const app::RunConfig& cfg) {
  std::map<std::string, std::string> state;
  for (const auto& root : {cfg.paths.work, cfg.paths.output})
    for (const auto& e : fs::recursive_directory_iterator(root)) {
      if (!e.is_regular_file()) continue;
      std::string bytes = read_file(e.path());
      if (e.path().filename() == "trace.json") bytes = strip_timings(json::parse(bytes)).dump();
      state[fs::relative(e.path(), root.parent_path()).string()] = std::move(bytes);
    }
  return state;
}

// 10. Re-running every stage from its snapshot reproduces its artifacts.
void determinism(Verdict& v) {
  auto& run = demo_run();
  const auto before = artifact_state(run.cfg);
  std::vector<fs::path> snapshots;
  std::set<std::string> commands;
  for (const auto& [rel, bytes] : before) {
    if (rel.size() < 12 || rel.compare(rel.size() - 12, 12, ".config.json") != 0) continue;
    const json j = json::parse(bytes);
    if (!j.contains("command")) continue;
    snapshots.push_back(run.cfg.paths.work.parent_path() / rel);
    commands.insert(j["command"].get<std::string>());
  }
  for (const char* stage : {"ingest", "mask", "train-style", "transfer", "compose", "cloze build", "cloze train",
                            "cloze eval", "report"})
    v.check(commands.count(stage) == 1, std::string("snapshot for ") + stage);
  for (const auto& s : snapshots) {
    app::rerun(s, true);
    const auto after = artifact_state(run.cfg);
    v.check(after.size() == before.size(), "artifact set after " + s.filename().string());
    for (const auto& [rel, bytes] : before) {
      const auto it = after.find(rel);
      v.check(it != after.end() && it->second == bytes, rel + " after rerun of " + s.filename().string());
    }
  }
  v.note(std::to_string(snapshots.size()) + " snapshots, " + std::to_string(before.size()) + " artifacts");
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;  // 0: no runtime bound
  std::function<void(Verdict&)> run;
};

}  // namespace

int main(int argc, char** argv) {
  log::set_min_level(log::Level::kWarn);
  const std::vector<Criterion> all = {
      {1, "loss math matches loop oracles", 60, loss_oracles},
      {2, "total_loss gradient matches central differences", 120, gradient_check},
      {3, "overfit smoke training", 600, overfit},
      {4, "mask partition and exact recomposition", 0, mask_partition},
      {5, "hash, hamming and selection suite", 0, hash_suite},
      {6, "blend oracle and execution-order invariance", 0, blend_suite},
      {7, "layout suite", 0, layout_suite},
      {8, "toy cloze learns; shuffled control at chance", 900, toy_cloze},
      {9, "report grid shape and end-to-end population", 0, report_grid},
      {10, "snapshot reruns are byte-identical", 0, determinism},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const auto& c : all) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    Verdict v;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.run(v);
    } catch (const std::exception& e) {
      v.check(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.budget_s > 0) v.check(secs < c.budget_s, "runtime " + fmt("%.0f", secs) + "s over budget");
    const bool ok = v.passed();
    failed += !ok;
    std::printf("criterion %2d: %s  %s (%.1fs; %s)\n", c.id, ok ? "PASS" : "FAIL", c.name, secs, v.summary().c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
