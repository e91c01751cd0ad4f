// Copyright 2026 The Panelstyle Authors
// SPDX-License-Identifier: Apache-2.0

#include "cloze/cloze_set.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>

#include <json.hpp>

#include "core/error.hpp"
#include "core/log.hpp"
#include "nn/tensor.hpp"

namespace panelstyle::cloze {

using nlohmann::json;

namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) h = (h ^ c) * 1099511628211ULL;
  return h;
}

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9E3779B97F4A7C15ULL + (b << 6) + (b >> 2);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

PanelRef ref_of(const PageRecord& page, const PanelRecord& panel) {
  return {panel.panel_id, page.page_id, page.book_id};
}

std::vector<const PanelRecord*> reading_order(const PageRecord& page) {
  std::vector<const PanelRecord*> out;
  for (const auto& p : page.panels) out.push_back(&p);
  std::stable_sort(out.begin(), out.end(), [](const auto* a, const auto* b) {
    return a->reading_index < b->reading_index;
  });
  return out;
}

}  // namespace

std::vector<ClozeInstance> build_cloze_set(const std::vector<PageRecord>& pages, int n_context,
                                           std::uint64_t seed, std::vector<std::string>* skipped) {
  PANELSTYLE_REQUIRE(n_context >= 1, "build_cloze_set: n_context must be positive");
  auto skip = [&](const std::string& why) {
    log::info("cloze: skipped " + why);
    if (skipped) skipped->push_back(why);
  };

  std::map<std::string, std::vector<const PageRecord*>> books;
  for (const auto& p : pages) books[p.book_id].push_back(&p);

  std::vector<ClozeInstance> out;
  for (auto& [book_id, book_pages] : books) {
    std::stable_sort(book_pages.begin(), book_pages.end(), [](const auto* a, const auto* b) {
      return a->page_index < b->page_index;
    });
    for (const PageRecord* page : book_pages) {
      const auto panels = reading_order(*page);
      const int k = int(panels.size());
      if (k < n_context + 1) {
        skip("page " + page->page_id + ": " + std::to_string(k) + " panels, need " +
             std::to_string(n_context + 1));
        continue;
      }
      std::vector<PanelRef> pool;
      for (const PageRecord* other : book_pages)
        if (std::abs(other->page_index - page->page_index) >= kMinDistractorPageGap)
          for (const auto* p : reading_order(*other)) pool.push_back(ref_of(*other, *p));

      for (int s = 0; s + n_context < k; ++s) {
        if (pool.size() < 2) {
          skip("page " + page->page_id + " window " + std::to_string(s) +
               ": fewer than 2 distractor panels in book " + book_id);
          continue;
        }
        nn::Rng rng(mix(mix(seed, fnv1a(page->page_id)), std::uint64_t(s)));
        const std::size_t a = rng.below(pool.size());
        std::size_t b = rng.below(pool.size() - 1);
        if (b >= a) ++b;
        ClozeInstance inst;
        for (int t = 0; t < n_context; ++t) inst.context.push_back(ref_of(*page, *panels[s + t]));
        inst.answer_index = int(rng.below(3));
        const PanelRef distractors[2] = {pool[a], pool[b]};
        for (int c = 0, d = 0; c < 3; ++c)
          inst.candidates[c] = c == inst.answer_index ? ref_of(*page, *panels[s + n_context])
                                                      : distractors[d++];
        inst.provenance = {book_id, page->page_id, s, s + n_context};
        out.push_back(std::move(inst));
      }
    }
  }
  return out;
}

namespace {

json ref_json(const PanelRef& r) {
  return {{"panel_id", r.panel_id}, {"page_id", r.page_id}, {"book_id", r.book_id}};
}

PanelRef ref_from(const json& j) {
  return {j.at("panel_id").get<std::string>(), j.at("page_id").get<std::string>(),
          j.at("book_id").get<std::string>()};
}

}  // namespace

void save_cloze_set(const std::vector<ClozeInstance>& set, const std::filesystem::path& path) {
  json items = json::array();
  int n_context = set.empty() ? kDefaultContext : int(set.front().context.size());
  for (const auto& inst : set) {
    json ctx = json::array(), cands = json::array();
    for (const auto& r : inst.context) ctx.push_back(ref_json(r));
    for (const auto& r : inst.candidates) cands.push_back(ref_json(r));
    items.push_back({{"context", ctx},
                     {"candidates", cands},
                     {"answer_index", inst.answer_index},
                     {"provenance",
                      {{"book_id", inst.provenance.book_id},
                       {"page_id", inst.provenance.page_id},
                       {"first_panel", inst.provenance.first_panel},
                       {"last_panel", inst.provenance.last_panel}}}});
  }
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  out << json{{"n_context", n_context}, {"instances", items}}.dump(2) << '\n';
  if (!out) throw Error(ErrorKind::kInternal, "cannot write " + path.string());
}

std::vector<ClozeInstance> load_cloze_set(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw AssetError("cloze manifest not found: " + path.string());
  try {
    const json doc = json::parse(in);
    std::vector<ClozeInstance> out;
    for (const auto& j : doc.at("instances")) {
      ClozeInstance inst;
      for (const auto& r : j.at("context")) inst.context.push_back(ref_from(r));
      const auto& cands = j.at("candidates");
      if (cands.size() != 3) throw SchemaError(path.string() + ": an instance needs 3 candidates");
      for (int c = 0; c < 3; ++c) inst.candidates[c] = ref_from(cands[c]);
      inst.answer_index = j.at("answer_index").get<int>();
      if (inst.answer_index < 0 || inst.answer_index > 2)
        throw SchemaError(path.string() + ": answer_index out of range");
      const auto& p = j.at("provenance");
      inst.provenance = {p.at("book_id").get<std::string>(), p.at("page_id").get<std::string>(),
                         p.at("first_panel").get<int>(), p.at("last_panel").get<int>()};
      out.push_back(std::move(inst));
    }
    return out;
  } catch (const json::exception& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

PanelBank PanelBank::from_pages(const std::vector<PageRecord>& pages) {
  PanelBank bank;
  for (const auto& page : pages)
    for (const auto& p : page.panels) bank.add(p.panel_id, p.image);
  return bank;
}

PanelBank PanelBank::from_directory(const std::filesystem::path& root,
                                    const std::vector<ClozeInstance>& set) {
  PanelBank bank;
  auto load = [&](const PanelRef& r) {
    if (bank.contains(r.panel_id)) return;
    const auto file = root / r.page_id / (r.panel_id + ".png");
    if (!std::filesystem::exists(file)) throw AssetError("panel image not found: " + file.string());
    bank.add(r.panel_id, load_image(file));
  };
  for (const auto& inst : set) {
    for (const auto& r : inst.context) load(r);
    for (const auto& r : inst.candidates) load(r);
  }
  return bank;
}

void PanelBank::add(const std::string& panel_id, Raster image) {
  images_[panel_id] = std::move(image);
}

const Raster& PanelBank::get(const std::string& panel_id) const {
  auto it = images_.find(panel_id);
  if (it == images_.end()) throw NotFoundError("no image for panel " + panel_id);
  return it->second;
}

std::vector<ClozeInstance> shuffle_labels(std::vector<ClozeInstance> set, std::uint64_t seed) {
  nn::Rng rng(seed);
  for (auto& inst : set) inst.answer_index = int(rng.below(3));
  return set;
}

}  // namespace panelstyle::cloze
