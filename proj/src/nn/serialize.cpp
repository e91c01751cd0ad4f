// Copyright 2026 The Panelstyle Authors
// SPDX-License-Identifier: Apache-2.0

#include "nn/serialize.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>

#include "core/error.hpp"

namespace panelstyle::nn {

static_assert(std::endian::native == std::endian::little, "weight blobs assume a little-endian host");

namespace {

constexpr char kMagic[8] = {'P', 'S', 'W', 'B', 'L', 'O', 'B', '1'};

void put_u32(std::ostream& out, std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); }

std::uint32_t get_u32(std::istream& in, const std::filesystem::path& path) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), 4);
  if (!in) throw SchemaError("truncated weight blob " + path.string());
  return v;
}

}  // namespace

template <typename T>
void save_blob(const std::filesystem::path& path, const std::vector<const Param<T>*>& params) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw AssetError("cannot write " + path.string());
  out.write(kMagic, 8);
  put_u32(out, std::uint32_t(params.size()));
  for (const auto* p : params) {
    put_u32(out, std::uint32_t(p->name.size()));
    out.write(p->name.data(), std::streamsize(p->name.size()));
    put_u32(out, sizeof(T));
    put_u32(out, std::uint32_t(p->shape.size()));
    for (int d : p->shape) put_u32(out, std::uint32_t(d));
    out.write(reinterpret_cast<const char*>(p->value.data()), std::streamsize(p->size() * sizeof(T)));
  }
  if (!out) throw AssetError("failed writing " + path.string());
}

std::vector<BlobTensor> read_blob(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw AssetError("weight blob not found: " + path.string());
  char magic[8] = {};
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMagic, 8) != 0)
    throw SchemaError("not a weight blob (bad magic): " + path.string());
  const std::uint32_t count = get_u32(in, path);
  std::vector<BlobTensor> out;
  for (std::uint32_t k = 0; k < count; ++k) {
    BlobTensor t;
    const std::uint32_t len = get_u32(in, path);
    if (len > 4096) throw SchemaError("corrupt weight blob (name length) " + path.string());
    t.name.resize(len);
    in.read(t.name.data(), len);
    t.elem_size = int(get_u32(in, path));
    if (t.elem_size != 4 && t.elem_size != 8)
      throw SchemaError("corrupt weight blob (element size) " + path.string());
    const std::uint32_t rank = get_u32(in, path);
    if (rank > 8) throw SchemaError("corrupt weight blob (rank) " + path.string());
    std::size_t n = 1;
    for (std::uint32_t r = 0; r < rank; ++r) {
      t.shape.push_back(int(get_u32(in, path)));
      n *= std::size_t(t.shape.back());
    }
    t.values.resize(n);
    if (t.elem_size == 4) {
      std::vector<float> buf(n);
      in.read(reinterpret_cast<char*>(buf.data()), std::streamsize(n * 4));
      for (std::size_t i = 0; i < n; ++i) t.values[i] = buf[i];
    } else {
      in.read(reinterpret_cast<char*>(t.values.data()), std::streamsize(n * 8));
    }
    if (!in) throw SchemaError("truncated weight blob " + path.string());
    out.push_back(std::move(t));
  }
  return out;
}

template <typename T>
void load_blob(const std::filesystem::path& path, const std::vector<Param<T>*>& params) {
  std::map<std::string, BlobTensor> by_name;
  for (auto& t : read_blob(path)) by_name.emplace(t.name, std::move(t));
  for (auto* p : params) {
    auto it = by_name.find(p->name);
    if (it == by_name.end())
      throw SchemaError("weight blob " + path.string() + " lacks tensor '" + p->name + "'");
    if (it->second.shape != p->shape)
      throw SchemaError("weight blob " + path.string() + ": shape mismatch for '" + p->name + "'");
    for (std::size_t i = 0; i < p->size(); ++i) p->value[i] = T(it->second.values[i]);
  }
}

template <typename T>
std::uint64_t checksum(const std::vector<const Param<T>*>& params) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const auto* p : params) {
    const auto* bytes = reinterpret_cast<const unsigned char*>(p->value.data());
    for (std::size_t i = 0; i < p->size() * sizeof(T); ++i) {
      h ^= bytes[i];
      h *= 1099511628211ULL;
    }
  }
  return h;
}

template void save_blob<float>(const std::filesystem::path&, const std::vector<const Param<float>*>&);
template void save_blob<double>(const std::filesystem::path&, const std::vector<const Param<double>*>&);
template void load_blob<float>(const std::filesystem::path&, const std::vector<Param<float>*>&);
template void load_blob<double>(const std::filesystem::path&, const std::vector<Param<double>*>&);
template std::uint64_t checksum<float>(const std::vector<const Param<float>*>&);
template std::uint64_t checksum<double>(const std::vector<const Param<double>*>&);

}  // namespace panelstyle::nn
