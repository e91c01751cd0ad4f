// Copyright 2026 The Panelstyle Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "core/corpus.hpp"
#include "core/image.hpp"

namespace panelstyle::cloze {

struct PanelRef {
  std::string panel_id;
  std::string page_id;
  std::string book_id;
  friend bool operator==(const PanelRef&, const PanelRef&) = default;
};

struct Provenance {
  std::string book_id;
  std::string page_id;
  int first_panel = 0;  // reading-order span of context + answer, inclusive
  int last_panel = 0;
  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct ClozeInstance {
  std::vector<PanelRef> context;
  std::array<PanelRef, 3> candidates;
  int answer_index = 0;
  Provenance provenance;
  friend bool operator==(const ClozeInstance&, const ClozeInstance&) = default;
};

inline constexpr int kDefaultContext = 3;
// Distractor pages must be at least this many pages away from the context.
inline constexpr int kMinDistractorPageGap = 2;

// Sliding windows of n_context + 1 panels over each page's reading order;
// two distractors from the same book at least two pages away, and the
// answer position, are drawn from a generator seeded per window. Pages or
// windows that cannot form an instance are skipped and described in
// `skipped` (also logged).
std::vector<ClozeInstance> build_cloze_set(const std::vector<PageRecord>& pages, int n_context,
                                           std::uint64_t seed,
                                           std::vector<std::string>* skipped = nullptr);

// Manifest JSON: {"n_context", "instances": [{context: [ref], candidates:
// [ref], answer_index, provenance}]}, ref = {panel_id, page_id, book_id}.
void save_cloze_set(const std::vector<ClozeInstance>& set, const std::filesystem::path& path);
std::vector<ClozeInstance> load_cloze_set(const std::filesystem::path& path);

// Panel images by panel_id.
class PanelBank {
 public:
  PanelBank() = default;
  static PanelBank from_pages(const std::vector<PageRecord>& pages);
  // Reads {root}/{page_id}/{panel_id}.png for every panel the set refers to.
  static PanelBank from_directory(const std::filesystem::path& root,
                                  const std::vector<ClozeInstance>& set);

  void add(const std::string& panel_id, Raster image);
  bool contains(const std::string& panel_id) const { return images_.count(panel_id) > 0; }
  // Throws NotFoundError for unknown panels.
  const Raster& get(const std::string& panel_id) const;
  std::size_t size() const { return images_.size(); }

 private:
  std::map<std::string, Raster> images_;
};

// Copy of `set` whose answer indices are replaced by seeded random
// positions: the chance-level control.
std::vector<ClozeInstance> shuffle_labels(std::vector<ClozeInstance> set, std::uint64_t seed);

}  // namespace panelstyle::cloze
