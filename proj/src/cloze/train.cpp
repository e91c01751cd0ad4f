// Copyright 2026 The Panelstyle Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "cloze/model.hpp"
#include "core/error.hpp"
#include "core/log.hpp"
#include "core/parallel.hpp"
#include "nn/adam.hpp"
#include "nn/serialize.hpp"

namespace panelstyle::cloze {

using nlohmann::json;

namespace {

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9E3779B97F4A7C15ULL + (b << 6) + (b >> 2);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

template <class V>
void seeded_shuffle(V& v, std::uint64_t seed) {
  nn::Rng rng(seed);
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[std::size_t(rng.below(i))]);
}

// Unique panels of one or more sets, in first-seen order.
struct PanelIndex {
  std::map<std::string, int> column;
  std::vector<std::string> ids;

  void add(const std::vector<ClozeInstance>& set) {
    auto put = [&](const PanelRef& r) {
      if (column.emplace(r.panel_id, int(ids.size())).second) ids.push_back(r.panel_id);
    };
    for (const auto& inst : set) {
      for (const auto& r : inst.context) put(r);
      for (const auto& r : inst.candidates) put(r);
    }
  }
  int at(const PanelRef& r) const { return column.at(r.panel_id); }
};

nn::Matrix<float> pooled_table(const PanelEncoder& enc, const PanelIndex& index,
                               const PanelBank& bank, int jobs) {
  nn::Matrix<float> x(enc.pooled_dim(), Eigen::Index(index.ids.size()));
  parallel_for(index.ids.size(), jobs, [&](std::size_t i) {
    x.col(Eigen::Index(i)) = enc.pooled(bank.get(index.ids[i]));
  });
  return x;
}

// Normalized embeddings of every pooled column.
nn::Matrix<float> embed_table(const ClozeModel& model, const nn::Matrix<float>& pooled) {
  constexpr Eigen::Index kChunk = 256;
  nn::Matrix<float> e(model.encoder.embedding_dim(), pooled.cols());
  for (Eigen::Index c = 0; c < pooled.cols(); c += kChunk) {
    const Eigen::Index n = std::min(kChunk, pooled.cols() - c);
    e.middleCols(c, n) = model.normalize(model.encoder.embed_pooled(pooled.middleCols(c, n), nullptr));
  }
  return e;
}

// Mean embedding and the scale that gives centered training embeddings this
// RMS norm. Raw fc7 vectors share a large common component and have norms
// near 80, which saturates the LSTM gates and the softmax.
constexpr double kEmbeddingNorm = 2.0;

void fit_normalization(ClozeModel& model, const nn::Matrix<float>& pooled, int train_columns) {
  model.feature_mean.value.assign(model.feature_mean.size(), 0.0f);
  model.feature_scale.value[0] = 1.0f;
  const nn::Matrix<float> e = embed_table(model, pooled.leftCols(train_columns));
  const nn::Vector<double> mean = e.cast<double>().rowwise().mean();
  const double ms = (e.cast<double>().colwise() - mean).squaredNorm() / double(e.size());
  for (Eigen::Index i = 0; i < mean.size(); ++i) model.feature_mean.value[std::size_t(i)] = float(mean[i]);
  model.feature_scale.value[0] =
      float(kEmbeddingNorm / std::sqrt(std::max(ms * double(e.rows()), 1e-12)));
}

struct Batch {
  std::vector<nn::Matrix<float>> context;
  std::array<nn::Matrix<float>, 3> candidates;
  std::vector<int> answers;
};

// Gathers embedding columns; `col_of` maps a panel to a column of `table`.
template <class ColOf>
Batch gather(const std::vector<ClozeInstance>& set, const std::vector<std::size_t>& members,
             const nn::Matrix<float>& table, int n_context, ColOf col_of) {
  const Eigen::Index D = table.rows(), B = Eigen::Index(members.size());
  Batch b;
  b.context.assign(std::size_t(n_context), nn::Matrix<float>(D, B));
  for (auto& c : b.candidates) c.resize(D, B);
  for (Eigen::Index j = 0; j < B; ++j) {
    const auto& inst = set[members[std::size_t(j)]];
    PANELSTYLE_REQUIRE(int(inst.context.size()) == n_context,
                       "cloze: instance context length differs from the model's");
    for (int t = 0; t < n_context; ++t) b.context[t].col(j) = table.col(col_of(inst.context[t]));
    for (int k = 0; k < 3; ++k) b.candidates[k].col(j) = table.col(col_of(inst.candidates[k]));
    b.answers.push_back(inst.answer_index);
  }
  return b;
}

std::vector<std::array<double, 3>> score_with_table(const ClozeHead<float>& head,
                                                    const std::vector<ClozeInstance>& set,
                                                    const nn::Matrix<float>& table,
                                                    const PanelIndex& index, int n_context,
                                                    int batch_size) {
  std::vector<std::array<double, 3>> probs(set.size());
  const std::size_t bs = std::size_t(std::max(1, batch_size));
  for (std::size_t s = 0; s < set.size(); s += bs) {
    std::vector<std::size_t> members;
    for (std::size_t i = s; i < std::min(set.size(), s + bs); ++i) members.push_back(i);
    const Batch b = gather(set, members, table, n_context, [&](const PanelRef& r) { return index.at(r); });
    const auto l = head.logits(b.context, b.candidates, nullptr);
    for (std::size_t j = 0; j < members.size(); ++j)
      probs[members[j]] = softmax3(l(0, Eigen::Index(j)), l(1, Eigen::Index(j)), l(2, Eigen::Index(j)));
  }
  return probs;
}

void validate(const ClozeConfig& cfg) {
  if (cfg.n_context < 1) throw ConfigError("cloze n_context must be positive");
  if (cfg.epochs < 0) throw ConfigError("cloze epochs must be non-negative");
  if (cfg.batch_size < 1) throw ConfigError("cloze batch_size must be positive");
  if (!(cfg.learning_rate > 0) || !(cfg.encoder_learning_rate >= 0))
    throw ConfigError("cloze learning rates must be positive");
  if (!(cfg.dev_fraction >= 0 && cfg.dev_fraction < 1))
    throw ConfigError("cloze dev_fraction must lie in [0, 1)");
}

}  // namespace

std::pair<std::vector<ClozeInstance>, std::vector<ClozeInstance>> split_by_book(
    const std::vector<ClozeInstance>& set, double dev_fraction, std::uint64_t seed) {
  std::vector<std::string> books;
  for (const auto& inst : set)
    if (std::find(books.begin(), books.end(), inst.provenance.book_id) == books.end())
      books.push_back(inst.provenance.book_id);
  std::sort(books.begin(), books.end());
  std::vector<ClozeInstance> train, dev;
  const std::size_t want = std::size_t(std::llround(dev_fraction * double(set.size())));
  if (books.size() >= 2) {
    seeded_shuffle(books, mix(seed, 0xB00C));
    std::set<std::string> dev_books;
    std::size_t taken = 0;
    for (const auto& b : books) {
      if (taken >= want || dev_books.size() + 1 == books.size()) break;
      dev_books.insert(b);
      for (const auto& inst : set) taken += inst.provenance.book_id == b;
    }
    for (const auto& inst : set)
      (dev_books.count(inst.provenance.book_id) ? dev : train).push_back(inst);
  } else {
    std::vector<std::size_t> order(set.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    seeded_shuffle(order, mix(seed, 0xDE7));
    std::vector<bool> in_dev(set.size(), false);
    for (std::size_t i = 0; i < std::min(want, order.size()); ++i) in_dev[order[i]] = true;
    for (std::size_t i = 0; i < set.size(); ++i) (in_dev[i] ? dev : train).push_back(set[i]);
  }
  return {std::move(train), std::move(dev)};
}

ClozeModel train_cloze_model(const std::vector<ClozeInstance>& train,
                             const std::vector<ClozeInstance>& dev, const PanelBank& bank,
                             EncoderId encoder_id, const ClozeConfig& cfg,
                             const EpochCallback& on_epoch, int jobs) {
  validate(cfg);
  PANELSTYLE_REQUIRE(!train.empty(), "train_cloze_model: empty training set");
  ClozeModel model(encoder_id, cfg);
  const bool tune = encoder_id != EncoderId::kFrozen && cfg.encoder_learning_rate > 0;

  PanelIndex index;
  index.add(train);
  const int train_columns = int(index.ids.size());
  index.add(dev);
  const nn::Matrix<float> pooled = pooled_table(model.encoder, index, bank, jobs);
  fit_normalization(model, pooled, train_columns);
  nn::Matrix<float> table = embed_table(model, pooled);

  nn::Adam<float> head_opt(model.head.params(), {cfg.learning_rate});
  std::unique_ptr<nn::Adam<float>> enc_opt;
  if (tune)
    enc_opt = std::make_unique<nn::Adam<float>>(model.encoder.head_params(),
                                                nn::AdamConfig{cfg.encoder_learning_rate});

  std::vector<std::size_t> order(train.size());
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    seeded_shuffle(order, mix(cfg.seed, std::uint64_t(epoch)));
    double loss_sum = 0;
    for (std::size_t s = 0; s < order.size(); s += std::size_t(cfg.batch_size)) {
      const std::vector<std::size_t> members(
          order.begin() + std::ptrdiff_t(s),
          order.begin() + std::ptrdiff_t(std::min(order.size(), s + std::size_t(cfg.batch_size))));
      Batch b;
      PanelEncoder::HeadCache hc;
      std::map<int, int> local;  // table column → batch column
      if (tune) {
        for (auto m : members) {
          for (const auto& r : train[m].context) local.emplace(index.at(r), 0);
          for (const auto& r : train[m].candidates) local.emplace(index.at(r), 0);
        }
        nn::Matrix<float> x(pooled.rows(), Eigen::Index(local.size()));
        int j = 0;
        for (auto& [col, l] : local) {
          l = j;
          x.col(j++) = pooled.col(col);
        }
        const nn::Matrix<float> e = model.normalize(model.encoder.embed_pooled(x, &hc));
        b = gather(train, members, e, cfg.n_context,
                   [&](const PanelRef& r) { return local.at(index.at(r)); });
      } else {
        b = gather(train, members, table, cfg.n_context,
                   [&](const PanelRef& r) { return index.at(r); });
      }
      ClozeHead<float>::Cache cache;
      const auto logits = model.head.logits(b.context, b.candidates, &cache);
      nn::Matrix<float> dl;
      const double loss = cross_entropy(logits, b.answers, &dl);
      if (!std::isfinite(loss))
        throw DivergenceError("cloze training diverged at epoch " + std::to_string(epoch));
      loss_sum += loss * double(members.size());
      if (tune) {
        std::vector<nn::Matrix<float>> dctx;
        std::array<nn::Matrix<float>, 3> dcand;
        model.head.backward(dl, cache, &dctx, &dcand);
        nn::Matrix<float> de = nn::Matrix<float>::Zero(table.rows(), Eigen::Index(local.size()));
        for (std::size_t j = 0; j < members.size(); ++j) {
          const auto& inst = train[members[j]];
          for (int t = 0; t < cfg.n_context; ++t)
            de.col(local.at(index.at(inst.context[t]))) += dctx[t].col(Eigen::Index(j));
          for (int k = 0; k < 3; ++k)
            de.col(local.at(index.at(inst.candidates[k]))) += dcand[k].col(Eigen::Index(j));
        }
        model.encoder.backward_head(de * model.feature_scale.value[0], hc);
        enc_opt->step();
      } else {
        model.head.backward(dl, cache, nullptr, nullptr);
      }
      head_opt.step();
    }
    if (tune) table = embed_table(model, pooled);

    EpochLog log_entry{epoch, loss_sum / double(train.size()), 0.0};
    if (!dev.empty()) {
      const auto probs = score_with_table(model.head, dev, table, index, cfg.n_context, 64);
      int correct = 0;
      for (std::size_t i = 0; i < dev.size(); ++i)
        correct += predicted_index(probs[i]) == dev[i].answer_index;
      log_entry.dev_accuracy = double(correct) / double(dev.size());
    }
    model.history.push_back(log_entry);
    char line[160];
    std::snprintf(line, sizeof line, "cloze epoch %d: train loss %.4f, dev accuracy %.3f", epoch,
                  log_entry.train_loss, log_entry.dev_accuracy);
    log::info(line);
    if (on_epoch) on_epoch(log_entry);
  }
  return model;
}

int predicted_index(const std::array<double, 3>& probs) {
  int best = 0;
  for (int k = 1; k < 3; ++k)
    if (probs[k] > probs[best]) best = k;
  return best;
}

EvalReport score_report(const std::vector<ClozeInstance>& set,
                        const std::vector<std::array<double, 3>>& probs, EvalSetting setting,
                        EncoderId encoder_id) {
  PANELSTYLE_REQUIRE(!set.empty(), "evaluate: empty evaluation set");
  PANELSTYLE_REQUIRE(set.size() == probs.size(), "evaluate: one probability triple per instance");
  EvalReport r{setting, encoder_id, int(set.size()), 0, 0.0};
  for (std::size_t i = 0; i < set.size(); ++i) r.n_correct += predicted_index(probs[i]) == set[i].answer_index;
  r.accuracy_pct = 100.0 * r.n_correct / r.n_instances;
  return r;
}

std::vector<std::array<double, 3>> score_set(const ClozeModel& model,
                                             const std::vector<ClozeInstance>& set,
                                             const PanelBank& bank, int jobs, int batch_size) {
  PanelIndex index;
  index.add(set);
  const nn::Matrix<float> table =
      embed_table(model, pooled_table(model.encoder, index, bank, jobs));
  return score_with_table(model.head, set, table, index, model.config.n_context, batch_size);
}

EvalReport evaluate(const ClozeModel& model, const std::vector<ClozeInstance>& set,
                    const PanelBank& bank, EvalSetting setting,
                    std::vector<std::array<double, 3>>* probs, int jobs) {
  PANELSTYLE_REQUIRE(!set.empty(), "evaluate: empty evaluation set");
  auto p = score_set(model, set, bank, jobs);
  const EvalReport r = score_report(set, p, setting, model.encoder_id);
  if (probs) *probs = std::move(p);
  return r;
}

namespace {

std::string format_pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

std::string report_csv(const std::vector<EvalReport>& reports) {
  std::string out = "setting,encoder,n_instances,accuracy_pct\n";
  for (const auto& r : reports)
    out += std::string(to_string(r.setting)) + "," + std::string(to_string(r.encoder_id)) + "," +
           std::to_string(r.n_instances) + "," + format_pct(r.accuracy_pct) + "\n";
  return out;
}

std::string grid_csv(const std::vector<EvalReport>& reports) {
  std::string out = "setting";
  for (auto e : kReportEncoders) out += "," + std::string(to_string(e));
  out += "\n";
  for (auto s : kAllSettings) {
    out += std::string(to_string(s));
    for (auto e : kReportEncoders) {
      out += ",";
      for (const auto& r : reports)
        if (r.setting == s && r.encoder_id == e) {
          out += format_pct(r.accuracy_pct);
          break;
        }
    }
    out += "\n";
  }
  return out;
}

std::vector<EvalReport> parse_report_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<EvalReport> out;
  if (!std::getline(in, line) || line.rfind("setting,encoder,n_instances,accuracy_pct", 0) != 0)
    throw SchemaError("report CSV: unexpected header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) f.push_back(cell);
    if (f.size() != 4) throw SchemaError("report CSV: expected 4 fields in '" + line + "'");
    try {
      EvalReport r;
      r.setting = parse_eval_setting(f[0]);
      r.encoder_id = parse_encoder_id(f[1]);
      r.n_instances = std::stoi(f[2]);
      r.accuracy_pct = std::stod(f[3]);
      r.n_correct = int(std::lround(r.accuracy_pct * r.n_instances / 100.0));
      out.push_back(r);
    } catch (const std::exception& e) {
      throw SchemaError("report CSV: bad row '" + line + "': " + e.what());
    }
  }
  return out;
}

json to_json(const ClozeConfig& c) {
  return {{"n_context", c.n_context},
          {"hidden", c.hidden},
          {"proj_dim", c.proj_dim},
          {"seed", c.seed},
          {"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"learning_rate", c.learning_rate},
          {"encoder_learning_rate", c.encoder_learning_rate},
          {"dev_fraction", c.dev_fraction},
          {"encoder",
           {{"input_size", c.encoder.input_size},
            {"width_divisor", c.encoder.vgg.width_divisor},
            {"fc_dim", c.encoder.vgg.fc_dim},
            {"seed", c.encoder.vgg.seed},
            {"weights", c.encoder.vgg.weights}}}};
}

ClozeConfig cloze_config_from_json(const json& j) {
  try {
    ClozeConfig c;
    c.n_context = j.value("n_context", c.n_context);
    c.hidden = j.value("hidden", c.hidden);
    c.proj_dim = j.value("proj_dim", c.proj_dim);
    c.seed = j.value("seed", c.seed);
    c.epochs = j.value("epochs", c.epochs);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.encoder_learning_rate = j.value("encoder_learning_rate", c.encoder_learning_rate);
    c.dev_fraction = j.value("dev_fraction", c.dev_fraction);
    if (j.contains("encoder")) {
      const auto& e = j["encoder"];
      c.encoder.input_size = e.value("input_size", c.encoder.input_size);
      c.encoder.vgg.width_divisor = e.value("width_divisor", c.encoder.vgg.width_divisor);
      c.encoder.vgg.fc_dim = e.value("fc_dim", c.encoder.vgg.fc_dim);
      c.encoder.vgg.seed = e.value("seed", c.encoder.vgg.seed);
      c.encoder.vgg.weights = e.value("weights", c.encoder.vgg.weights);
    }
    validate(c);
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("cloze config: ") + e.what());
  }
}

void save_cloze_model(const ClozeModel& model, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto params = model.head.params();
  params.push_back(&model.feature_mean);
  params.push_back(&model.feature_scale);
  const bool tuned = model.encoder_id != EncoderId::kFrozen;
  if (tuned)
    for (const auto* p : model.encoder.head_params()) params.push_back(p);
  nn::save_blob(dir / "weights", params);
  std::ofstream cfg(dir / "config.json");
  cfg << json{{"encoder_id", std::string(to_string(model.encoder_id))},
              {"encoder_head_saved", tuned},
              {"config", to_json(model.config)}}
             .dump(2)
      << '\n';
  std::ofstream hist(dir / "history.csv");
  hist << "epoch,train_loss,dev_accuracy\n";
  char line[96];
  for (const auto& h : model.history) {
    std::snprintf(line, sizeof line, "%d,%.17g,%.17g\n", h.epoch, h.train_loss, h.dev_accuracy);
    hist << line;
  }
  if (!cfg || !hist) throw Error(ErrorKind::kInternal, "cannot write model files in " + dir.string());
}

ClozeModel load_cloze_model(const std::filesystem::path& dir) {
  std::ifstream in(dir / "config.json");
  if (!in) throw AssetError("cloze model not found: " + dir.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError((dir / "config.json").string() + ": " + e.what());
  }
  EncoderId id;
  ClozeConfig cfg;
  bool tuned = false;
  try {
    id = parse_encoder_id(doc.at("encoder_id").get<std::string>());
    cfg = cloze_config_from_json(doc.at("config"));
    tuned = doc.value("encoder_head_saved", false);
  } catch (const json::exception& e) {
    throw SchemaError((dir / "config.json").string() + ": " + e.what());
  } catch (const ConfigError& e) {
    throw SchemaError((dir / "config.json").string() + ": " + e.what());
  }
  ClozeModel model(id, cfg);
  auto params = model.head.params();
  params.push_back(&model.feature_mean);
  params.push_back(&model.feature_scale);
  if (tuned)
    for (auto* p : model.encoder.head_params()) params.push_back(p);
  nn::load_blob(dir / "weights", params);
  std::ifstream hist(dir / "history.csv");
  std::string line;
  std::getline(hist, line);
  while (std::getline(hist, line)) {
    EpochLog h;
    if (std::sscanf(line.c_str(), "%d,%lf,%lf", &h.epoch, &h.train_loss, &h.dev_accuracy) == 3)
      model.history.push_back(h);
  }
  return model;
}

}  // namespace panelstyle::cloze
