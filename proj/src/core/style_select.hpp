// Copyright 2026 The Panelstyle Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "core/corpus.hpp"
#include "core/image.hpp"
#include "core/masking.hpp"

namespace panelstyle {

// 8 × 8 average hash. Pixel i of the row-major 8 × 8 grid maps to bit
// (63 − i), so the hex form reads top-left first.
struct ImageHash {
  std::uint64_t bits = 0;
  bool bit(int pixel) const { return (bits >> (63 - pixel)) & 1u; }
  friend bool operator==(const ImageHash&, const ImageHash&) = default;
};

std::string to_hex(ImageHash h);
ImageHash hash_from_hex(std::string_view hex);

// grayscale → 8 × 8 area resample → bit = pixel ≥ mean.
ImageHash average_hash(const GrayPlane& gray);
ImageHash average_hash(const Raster& image);

int hamming(ImageHash a, ImageHash b);

enum class Shot { kClose, kMedium };
enum class ObjectCount { kOne, kTwo, kMany };

struct CompositionClass {
  Shot shot = Shot::kMedium;
  ObjectCount count = ObjectCount::kMany;
  friend bool operator==(const CompositionClass&, const CompositionClass&) = default;
};

std::string to_string(const CompositionClass& c);
std::string_view to_string(Shot s);
std::string_view to_string(ObjectCount c);
Shot parse_shot(std::string_view s);
ObjectCount parse_object_count(std::string_view s);

inline constexpr double kCloseShotThreshold = 0.4;

// close iff the largest face/body box covers ≥ threshold of the panel;
// count bucket from body boxes (0 counts as many: a scene shot).
CompositionClass classify_composition(const PanelRecord& panel,
                                      double close_threshold = kCloseShotThreshold);

struct StyleExemplar {
  std::string exemplar_id;
  std::string book_id;
  CompositionClass composition;
  Raster image;
  std::optional<MaskSet> masks;  // absent for unannotated (art-style) exemplars
  std::array<ImageHash, 4> hashes{};  // indexed by Channel

  ImageHash hash(Channel c) const { return hashes[std::size_t(c)]; }
};

// Style image fed to training for one channel: the masked exemplar, or the
// whole image when the exemplar carries no masks.
Raster exemplar_channel_image(const StyleExemplar& ex, Channel channel, Color fill = kDefaultFill);

void compute_hashes(StyleExemplar& ex, Color fill = kDefaultFill);

struct Selection {
  const StyleExemplar* exemplar = nullptr;
  int distance = 0;
  bool composition_filtered = false;  // candidates were restricted to one class
};

// argmin over candidates of hamming(average_hash(content), candidate hash
// for the channel); ties go to the lowest exemplar_id. With `restrict_to`,
// candidates of that class are used when at least one exists.
Selection select_style(const MaskedImage& content, std::span<const StyleExemplar> candidates,
                       Channel channel, std::optional<CompositionClass> restrict_to = std::nullopt);

// Exemplar catalog JSON: {"exemplars": [{exemplar_id, book_id,
// composition: {shot, count}, image, masks: {textbox, foreground,
// background}, hashes: {channel: hex}}]}. Paths are relative to the file.
// Missing hashes are computed from the image and masks.
std::vector<StyleExemplar> load_catalog(const std::filesystem::path& path, Color fill = kDefaultFill);
void save_catalog(const std::vector<StyleExemplar>& exemplars, const std::filesystem::path& path);

// Picks, per book, the first panel (reading order) of every composition
// class as that class's exemplar.
std::vector<StyleExemplar> build_catalog(const std::vector<PageRecord>& pages, MaskVariant variant,
                                         Color fill = kDefaultFill,
                                         double close_threshold = kCloseShotThreshold);

}  // namespace panelstyle
