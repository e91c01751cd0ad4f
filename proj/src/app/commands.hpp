// Copyright 2026 The Panelstyle Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "app/run_config.hpp"
#include "core/corpus.hpp"

namespace panelstyle::app {

// Every command writes a snapshot of its resolved config and arguments
// beside its outputs; rerun() executes such a snapshot again.
void cmd_ingest(const RunConfig& cfg);
void cmd_mask(const RunConfig& cfg);
// channels: "needed" (those of the configured treatment) or "all".
void cmd_train_style(const RunConfig& cfg, bool force, const std::string& channels = "needed");
void cmd_transfer(const RunConfig& cfg, bool force);
void cmd_compose(const RunConfig& cfg);
void cmd_cloze_build(const RunConfig& cfg);
void cmd_cloze_train(const RunConfig& cfg, cloze::EncoderId encoder);
void cmd_cloze_eval(const RunConfig& cfg, cloze::EvalSetting setting, cloze::EncoderId encoder);
void cmd_report(const RunConfig& cfg);

void rerun(const fs::path& snapshot, bool force);

// Small synthetic project: comics and manga titles, a template library, an
// art catalog and a config tuned for a quick CPU run. Returns the config.
fs::path write_demo_project(const fs::path& dir, std::uint64_t seed);

std::vector<PageRecord> load_corpus(const std::vector<fs::path>& titles, Source default_source,
                                    double row_overlap, std::vector<std::string>* warnings = nullptr);

// Output locations shared by the commands and their tests.
fs::path crops_dir(const RunConfig& cfg);
fs::path treatment_dir(const RunConfig& cfg, const Treatment& t);
fs::path cloze_dir(const RunConfig& cfg);
fs::path eval_dir(const RunConfig& cfg);

}  // namespace panelstyle::app
