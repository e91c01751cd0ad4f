// Copyright 2026 The Panelstyle Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "core/geometry.hpp"
#include "core/image.hpp"

namespace panelstyle {

enum class Source { kComics, kManga };

std::string_view to_string(Source s);
Source parse_source(std::string_view s);

enum class AnnotationKind { kTextbox, kBody, kFace };

struct AnnotationBox {
  AnnotationKind kind = AnnotationKind::kTextbox;
  Rect rect;                        // panel-local pixels
  std::optional<Polygon> polygon;   // panel-local, used by fit masks
};

struct PanelRecord {
  std::string panel_id;
  Rect bbox;  // page pixels
  Raster image;
  std::vector<AnnotationBox> textboxes;
  std::vector<AnnotationBox> bodies;
  std::vector<AnnotationBox> faces;
  int reading_index = 0;
  std::optional<int> manual_index;  // reading_index given by the annotation file
};

struct PageRecord {
  std::string page_id;
  std::string book_id;
  int page_index = 0;  // position of the page inside its book
  Source source = Source::kManga;
  std::filesystem::path image_path;
  Raster image;
  std::vector<PanelRecord> panels;  // reading order

  int width_px() const { return image.width(); }
  int height_px() const { return image.height(); }
};

struct IngestOptions {
  Source source = Source::kManga;
  // Row clustering threshold: minimum vertical overlap relative to the
  // shorter of the two panel heights.
  double row_overlap = 0.5;
};

// Parses one title's annotation document and loads the referenced page
// images. Annotation boxes are given in page pixels and re-attached to the
// panel containing their center. Warnings (e.g. orphan annotations) are
// logged and, if `warnings` is non-null, appended there.
std::vector<PageRecord> ingest_title(const std::filesystem::path& annotation_file,
                                     const std::filesystem::path& image_dir,
                                     const IngestOptions& options = {},
                                     std::vector<std::string>* warnings = nullptr);

inline std::vector<PageRecord> ingest_manga_title(const std::filesystem::path& annotation_file,
                                                  const std::filesystem::path& image_dir,
                                                  std::vector<std::string>* warnings = nullptr) {
  return ingest_title(annotation_file, image_dir, {Source::kManga, 0.5}, warnings);
}

// Geometric reading order: rows by vertical-overlap clustering, top to
// bottom; manga rows right to left, comics rows left to right. Reassigns
// reading_index to 0..n-1.
std::vector<PanelRecord> resolve_reading_order(std::vector<PanelRecord> panels, Source source,
                                               double row_overlap = 0.5);

Raster crop_panel(const PageRecord& page, std::string_view panel_id);

const PanelRecord* find_panel(const PageRecord& page, std::string_view panel_id);

}  // namespace panelstyle
