// Copyright 2026 The Panelstyle Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "core/corpus.hpp"

namespace panelstyle::cloze {

// Synthetic pages whose panels continue a visual pattern: a shape with a
// page-specific colour and form that moves a fixed step to the right from
// panel to panel. Pages and books are numbered from zero.
struct ToyCorpusConfig {
  int books = 8;
  int pages_per_book = 20;
  int panels_per_page = 6;
  int panel_size = 64;
  std::uint64_t seed = 3;
};

std::vector<PageRecord> make_toy_corpus(const ToyCorpusConfig& cfg);

}  // namespace panelstyle::cloze
