// Copyright 2026 The Panelstyle Authors
// SPDX-License-Identifier: Apache-2.0

#include "app/run_config.hpp"

#include <fstream>
#include <set>

#include "core/error.hpp"
#include "core/parallel.hpp"

namespace panelstyle::app {

using nlohmann::json;

RunConfig default_run_config() {
  RunConfig c;
  using cloze::EvalSetting;
  c.setting_treatments[EvalSetting::kWholeTransfer] = parse_treatment("CP,N_M");
  c.setting_treatments[EvalSetting::kMaskedTransfer] = parse_treatment("CP,R_M");
  c.setting_treatments[EvalSetting::kCompositionTransfer] = parse_treatment("CP,R_M,C");
  return c;
}

int RunConfig::resolved_jobs() const { return jobs > 0 ? jobs : default_jobs(); }

const Treatment& RunConfig::treatment_for(cloze::EvalSetting s) const {
  auto it = setting_treatments.find(s);
  if (it == setting_treatments.end())
    throw ConfigError("no treatment configured for setting " + std::string(cloze::to_string(s)));
  return it->second;
}

namespace {

fs::path resolve(const fs::path& base, const json& v, const std::string& key) {
  if (!v.is_string()) throw ConfigError("config: " + key + " must be a path string");
  const fs::path p = v.get<std::string>();
  if (p.empty()) return {};
  return (p.is_absolute() ? p : base / p).lexically_normal();
}

std::vector<fs::path> resolve_list(const fs::path& base, const json& v, const std::string& key) {
  std::vector<fs::path> out;
  if (v.is_string()) {
    out.push_back(resolve(base, v, key));
    return out;
  }
  if (!v.is_array()) throw ConfigError("config: " + key + " must be a path or a list of paths");
  for (const auto& e : v) out.push_back(resolve(base, e, key));
  return out;
}

json path_list(const std::vector<fs::path>& v) {
  json a = json::array();
  for (const auto& p : v) a.push_back(p.string());
  return a;
}

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
  for (const auto& [k, v] : j.items())
    if (!known.count(k)) throw ConfigError("config: unknown key '" + where + k + "'");
}

}  // namespace

RunConfig run_config_from_json(const json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  reject_unknown(j, {"seed", "jobs", "paths", "ingest", "masking", "treatment", "transfer",
                     "stylenet", "content_limit", "cloze"},
                 "");
  const fs::path base = fs::absolute(base_dir);
  RunConfig c = default_run_config();
  try {
    c.seed = j.value("seed", c.seed);
    c.jobs = j.value("jobs", c.jobs);
    if (c.jobs < 0) throw ConfigError("config: jobs must be >= 0");
    if (auto it = j.find("paths"); it != j.end()) {
      const json& p = *it;
      reject_unknown(p, {"style_corpus", "content_corpus", "manga_train_corpus", "art_catalog",
                         "catalog", "templates", "models", "work", "output"},
                     "paths.");
      auto one = [&](const char* k, fs::path& dst) {
        if (p.contains(k)) dst = resolve(base, p[k], std::string("paths.") + k);
      };
      auto many = [&](const char* k, std::vector<fs::path>& dst) {
        if (p.contains(k)) dst = resolve_list(base, p[k], std::string("paths.") + k);
      };
      many("style_corpus", c.paths.style_corpus);
      many("content_corpus", c.paths.content_corpus);
      many("manga_train_corpus", c.paths.manga_train_corpus);
      one("art_catalog", c.paths.art_catalog);
      one("catalog", c.paths.catalog);
      one("templates", c.paths.templates);
      one("models", c.paths.models);
      one("work", c.paths.work);
      one("output", c.paths.output);
    }
    if (c.paths.work.empty()) c.paths.work = base / "work";
    if (c.paths.output.empty()) c.paths.output = base / "out";
    if (c.paths.models.empty()) c.paths.models = c.paths.work / "models";
    if (c.paths.catalog.empty()) c.paths.catalog = c.paths.work / "catalog" / "catalog.json";

    if (auto it = j.find("ingest"); it != j.end()) c.row_overlap = it->value("row_overlap", c.row_overlap);
    if (!(c.row_overlap > 0 && c.row_overlap <= 1))
      throw ConfigError("config: ingest.row_overlap must lie in (0, 1]");
    if (auto it = j.find("masking"); it != j.end()) {
      c.mask_variant = parse_mask_variant(it->value("variant", std::string("rect")));
      if (it->contains("fill")) {
        const auto f = (*it)["fill"].get<std::vector<int>>();
        if (f.size() != 3) throw ConfigError("config: masking.fill must be [r, g, b]");
        for (int v : f)
          if (v < 0 || v > 255) throw ConfigError("config: masking.fill values must lie in 0..255");
        c.fill = {std::uint8_t(f[0]), std::uint8_t(f[1]), std::uint8_t(f[2])};
      }
    }
    if (auto it = j.find("treatment"); it != j.end())
      c.treatment = parse_treatment(it->get<std::string>());
    if (auto it = j.find("transfer"); it != j.end()) {
      c.feather_radius = it->value("feather_radius", c.feather_radius);
      c.page_width = it->value("page_width", c.page_width);
      c.gutter = it->value("gutter", c.gutter);
    }
    if (c.feather_radius < 0) throw ConfigError("config: transfer.feather_radius must be >= 0");
    if (c.page_width < 0 || c.gutter < 0)
      throw ConfigError("config: transfer.page_width and transfer.gutter must be >= 0");
    if (auto it = j.find("stylenet"); it != j.end()) c.stylenet = stylenet::train_config_from_json(*it);
    c.content_limit = j.value("content_limit", c.content_limit);
    if (c.content_limit < 1) throw ConfigError("config: content_limit must be positive");
    if (auto it = j.find("cloze"); it != j.end()) {
      json core = *it;
      if (auto st = it->find("settings"); st != it->end()) {
        for (const auto& [k, v] : st->items())
          c.setting_treatments[cloze::parse_eval_setting(k)] = parse_treatment(v.get<std::string>());
        core.erase("settings");
      }
      c.cloze = cloze::cloze_config_from_json(core);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (!c.stylenet.loss_network.weights.empty())
    c.stylenet.loss_network.weights =
        (base / c.stylenet.loss_network.weights).lexically_normal().string();
  if (!c.cloze.encoder.vgg.weights.empty() && fs::path(c.cloze.encoder.vgg.weights).is_relative() &&
      fs::exists(base / c.cloze.encoder.vgg.weights))
    c.cloze.encoder.vgg.weights = (base / c.cloze.encoder.vgg.weights).lexically_normal().string();
  c.cloze.encoder.vgg.weights = cloze::resolve_encoder_weights(c.cloze.encoder.vgg.weights);
  return c;
}

json to_json(const RunConfig& c) {
  json settings = json::object();
  for (const auto& [s, t] : c.setting_treatments)
    settings[std::string(cloze::to_string(s))] = t.label();
  json cl = cloze::to_json(c.cloze);
  cl["settings"] = settings;
  return {{"seed", c.seed},
          {"jobs", c.jobs},
          {"paths",
           {{"style_corpus", path_list(c.paths.style_corpus)},
            {"content_corpus", path_list(c.paths.content_corpus)},
            {"manga_train_corpus", path_list(c.paths.manga_train_corpus)},
            {"art_catalog", c.paths.art_catalog.string()},
            {"catalog", c.paths.catalog.string()},
            {"templates", c.paths.templates.string()},
            {"models", c.paths.models.string()},
            {"work", c.paths.work.string()},
            {"output", c.paths.output.string()}}},
          {"ingest", {{"row_overlap", c.row_overlap}}},
          {"masking",
           {{"variant", std::string(to_string(c.mask_variant))},
            {"fill", {c.fill.r, c.fill.g, c.fill.b}}}},
          {"treatment", c.treatment.label()},
          {"transfer",
           {{"feather_radius", c.feather_radius}, {"page_width", c.page_width}, {"gutter", c.gutter}}},
          {"stylenet", stylenet::to_json(c.stylenet)},
          {"content_limit", c.content_limit},
          {"cloze", cl}};
}

RunConfig load_run_config(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw AssetError("config file not found: " + file.string());
  json doc;
  try {
    doc = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError(file.string() + ": malformed config: " + e.what());
  }
  // Snapshots carry the config under "config".
  if (doc.is_object() && doc.contains("command") && doc.contains("config")) doc = doc["config"];
  return run_config_from_json(doc, fs::absolute(file).parent_path());
}

void set_value(json& doc, const std::string& dotted_key, const std::string& value) {
  if (dotted_key.empty()) throw ConfigError("override: empty key");
  json parsed;
  try {
    parsed = json::parse(value);
  } catch (const json::parse_error&) {
    parsed = value;
  }
  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = dotted_key.find('.', start);
    const std::string part = dotted_key.substr(start, dot - start);
    if (part.empty()) throw ConfigError("override: malformed key '" + dotted_key + "'");
    if (!node->is_object()) *node = json::object();
    if (dot == std::string::npos) {
      (*node)[part] = parsed;
      return;
    }
    node = &(*node)[part];
    start = dot + 1;
  }
}

void write_snapshot(const fs::path& file, const std::string& command, const json& args,
                    const RunConfig& cfg) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
  std::ofstream out(file);
  out << json{{"command", command}, {"args", args}, {"config", to_json(cfg)}}.dump(2) << '\n';
  if (!out) throw Error(ErrorKind::kInternal, "cannot write snapshot " + file.string());
}

}  // namespace panelstyle::app
