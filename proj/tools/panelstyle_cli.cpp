// Copyright 2026 The Panelstyle Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line driver. Precedence of settings, lowest first: built-in
// defaults, the --config file, --set overrides, dedicated flags.

#include <cstdint>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "panelstyle/panelstyle.h"

namespace {

int report(ps_status status) {
  if (status != PS_OK)
    std::fprintf(stderr, "error[%s]: %s\n", ps_status_name(status), ps_last_error());
  return static_cast<int>(status);
}

struct Globals {
  std::string config;
  std::vector<std::string> sets;
  std::int64_t seed = -1;
  int jobs = -1;
  std::string treatment;
  bool verbose = false;
  bool quiet = false;
};

// Builds the effective config; on failure returns the status and leaves
// *out null.
ps_status make_config(const Globals& g, ps_config** out) {
  ps_status s = g.config.empty() ? ps_config_new(out) : ps_config_load(g.config.c_str(), out);
  if (s != PS_OK) return s;
  auto set = [&](const std::string& key, const std::string& value) {
    if (s == PS_OK) s = ps_config_set(*out, key.c_str(), value.c_str());
  };
  for (const auto& kv : g.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) {
      ps_config_free(*out);
      *out = nullptr;
      std::fprintf(stderr, "error[config]: --set expects key=value, got '%s'\n", kv.c_str());
      return PS_ERR_CONFIG;
    }
    set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (g.seed >= 0) set("seed", std::to_string(g.seed));
  if (g.jobs >= 0) set("jobs", std::to_string(g.jobs));
  if (!g.treatment.empty()) set("treatment", "\"" + g.treatment + "\"");
  if (s != PS_OK) {
    ps_config_free(*out);
    *out = nullptr;
  }
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Comics-to-manga panel style transfer and visual cloze evaluation", "panelstyle"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("-c,--config", g.config, "Config file (JSON, comments allowed)");
  app.add_option("--set", g.sets, "Override a config value: key.path=value")->take_all();
  app.add_option("--seed", g.seed, "Override the run seed")->check(CLI::NonNegativeNumber);
  app.add_option("-j,--jobs", g.jobs, "Worker threads (0 = all logical cores)")->check(CLI::NonNegativeNumber);
  app.add_option("-t,--treatment", g.treatment, "Treatment, e.g. CP,R_M or AS,N_M");
  app.add_flag("-v,--verbose", g.verbose, "Debug logging");
  app.add_flag("-q,--quiet", g.quiet, "Warnings and errors only");

  std::function<ps_status(const ps_config*)> action;
  bool force = false;

  auto with_config = [&](CLI::App* sub, std::function<ps_status(const ps_config*)> fn) {
    sub->callback([&action, fn] { action = fn; });
  };

  with_config(app.add_subcommand("ingest", "Parse annotations, crop panels, build the exemplar catalog"),
              [](const ps_config* c) { return ps_cmd_ingest(c); });
  with_config(app.add_subcommand("mask", "Write channel masks for the content corpus"),
              [](const ps_config* c) { return ps_cmd_mask(c); });

  auto* train = app.add_subcommand("train-style", "Train one style model per exemplar and channel");
  std::string channels = "needed";
  train->add_flag("-f,--force", force, "Retrain models that already exist");
  train->add_option("--channels", channels, "needed | all")->check(CLI::IsMember({"needed", "all"}));
  with_config(train, [&](const ps_config* c) { return ps_cmd_train_style(c, force, channels.c_str()); });

  auto* transfer = app.add_subcommand("transfer", "Stylize, blend and recompose the content pages");
  transfer->add_flag("-f,--force", force, "Recompute panels whose outputs already exist");
  with_config(transfer, [&](const ps_config* c) { return ps_cmd_transfer(c, force); });

  with_config(app.add_subcommand("compose", "Recompose pages from transferred panels"),
              [](const ps_config* c) { return ps_cmd_compose(c); });

  auto* cloze = app.add_subcommand("cloze", "Visual cloze evaluation");
  cloze->require_subcommand(1);
  with_config(cloze->add_subcommand("build", "Build cloze instance sets"),
              [](const ps_config* c) { return ps_cmd_cloze_build(c); });
  std::string encoder, setting;
  auto* ctrain = cloze->add_subcommand("train", "Train a cloze model");
  ctrain->add_option("-e,--encoder", encoder, "feature_C | feature_M | frozen")->required();
  with_config(ctrain, [&](const ps_config* c) { return ps_cmd_cloze_train(c, encoder.c_str()); });
  auto* ceval = cloze->add_subcommand("eval", "Score a cloze model on one evaluation setting");
  ceval->add_option("-s,--setting", setting, "N_T | T_W | T_M | T_C")->required();
  ceval->add_option("-e,--encoder", encoder, "feature_C | feature_M | frozen")->default_val("feature_M");
  with_config(ceval, [&](const ps_config* c) { return ps_cmd_cloze_eval(c, setting.c_str(), encoder.c_str()); });

  with_config(app.add_subcommand("report", "Aggregate cloze evaluations into the report grid"),
              [](const ps_config* c) { return ps_cmd_report(c); });

  auto* show = app.add_subcommand("config", "Print the resolved config");
  with_config(show, [](const ps_config* c) {
    char* text = nullptr;
    const ps_status s = ps_config_to_json(c, &text);
    if (s == PS_OK) std::printf("%s\n", text);
    ps_string_free(text);
    return s;
  });

  std::function<ps_status()> standalone;
  auto* rerun = app.add_subcommand("rerun", "Re-execute a stage from its config snapshot");
  std::string snapshot;
  rerun->add_option("snapshot", snapshot, "Snapshot file written by an earlier run")->required();
  rerun->add_flag("-f,--force", force, "Recompute outputs that already exist");
  rerun->callback([&] { standalone = [&] { return ps_rerun(snapshot.c_str(), force); }; });

  auto* demo = app.add_subcommand("demo", "Write a small synthetic project");
  std::string demo_dir;
  demo->add_option("dir", demo_dir, "Target directory")->required();
  demo->callback([&] {
    standalone = [&] {
      char* path = nullptr;
      const ps_status s = ps_demo_project(demo_dir.c_str(), g.seed >= 0 ? std::uint64_t(g.seed) : 1, &path);
      if (s == PS_OK) std::printf("%s\n", path);
      ps_string_free(path);
      return s;
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "error[config]: %s\n", e.what());
    return PS_ERR_CONFIG;
  }

  ps_set_log_level(g.verbose ? PS_LOG_DEBUG : g.quiet ? PS_LOG_WARN : PS_LOG_INFO);
  if (standalone) return report(standalone());
  if (!action) return report(PS_ERR_CONFIG);

  ps_config* cfg = nullptr;
  const ps_status s = make_config(g, &cfg);
  if (s != PS_OK) return report(s);
  const ps_status r = action(cfg);
  ps_config_free(cfg);
  return report(r);
}
