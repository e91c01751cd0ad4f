// Copyright 2026 The Panelstyle Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "nn/tensor.hpp"

namespace panelstyle::nn {

// Weight blob: "PSWBLOB1", u32 count, then per tensor
// u32 name length, name, u32 element size (4 or 8), u32 rank, u32 dims[rank],
// raw little-endian values. Values are written bit-exactly.
struct BlobTensor {
  std::string name;
  std::vector<int> shape;
  int elem_size = 4;
  std::vector<double> values;  // widened copy for loading
};

template <typename T>
void save_blob(const std::filesystem::path& path, const std::vector<const Param<T>*>& params);

std::vector<BlobTensor> read_blob(const std::filesystem::path& path);

// Loads values by name; every param must be present with a matching shape.
template <typename T>
void load_blob(const std::filesystem::path& path, const std::vector<Param<T>*>& params);

// FNV-1a over the raw parameter bytes, used for determinism checks.
template <typename T>
std::uint64_t checksum(const std::vector<const Param<T>*>& params);

}  // namespace panelstyle::nn
