#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "zel/autodiff/params.hpp"
#include "zel/common/binio.hpp"
#include "zel/common/errors.hpp"

namespace zel::autodiff {

// Versioned binary checkpoint: header (magic, version, config hash), then one
// record per parameter: name, shape, raw 32-bit values. Values are stored as
// float32 regardless of the in-memory scalar type.

struct RawTensor {
  Shape shape;
  std::vector<float> values;
};

using RawCheckpoint = std::map<std::string, RawTensor>;

namespace detail {
inline constexpr char kCkptMagic[8] = {'Z', 'E', 'L', 'C', 'K', 'P', 'T', '1'};
inline constexpr std::uint32_t kCkptVersion = 1;
}  // namespace detail

inline void save_raw_checkpoint(const RawCheckpoint& params, const std::filesystem::path& path,
                                std::uint64_t config_hash) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write checkpoint " + path.string());
  out.write(detail::kCkptMagic, sizeof(detail::kCkptMagic));
  binio::write_u32(out, detail::kCkptVersion);
  binio::write_u64(out, config_hash);
  binio::write_u32(out, static_cast<std::uint32_t>(params.size()));
  for (const auto& [name, tensor] : params) {
    binio::write_string(out, name);
    binio::write_u32(out, static_cast<std::uint32_t>(tensor.shape.size()));
    for (auto d : tensor.shape) binio::write_u64(out, static_cast<std::uint64_t>(d));
    for (float v : tensor.values) binio::write_f32(out, v);
  }
}

inline RawCheckpoint load_raw_checkpoint(const std::filesystem::path& path,
                                         std::uint64_t* config_hash = nullptr) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingArtifactError("checkpoint not found: " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (in.gcount() != sizeof(magic) || !std::equal(magic, magic + 8, detail::kCkptMagic))
    throw ValidationError("not a checkpoint file: " + path.string());
  const auto version = binio::read_u32(in);
  if (version != detail::kCkptVersion)
    throw ValidationError("checkpoint version mismatch in " + path.string());
  const auto hash = binio::read_u64(in);
  if (config_hash) *config_hash = hash;

  RawCheckpoint params;
  const auto count = binio::read_u32(in);
  for (std::uint32_t i = 0; i < count; ++i) {
    auto name = binio::read_string(in);
    RawTensor t;
    const auto ndim = binio::read_u32(in);
    for (std::uint32_t d = 0; d < ndim; ++d)
      t.shape.push_back(static_cast<std::int64_t>(binio::read_u64(in)));
    t.values.resize(static_cast<std::size_t>(numel(t.shape)));
    for (auto& v : t.values) v = binio::read_f32(in);
    params.emplace(std::move(name), std::move(t));
  }
  return params;
}

template <typename T>
RawCheckpoint to_raw(const ParameterStore<T>& store) {
  RawCheckpoint raw;
  for (const auto& [name, tensor] : store) {
    RawTensor t;
    t.shape = tensor.shape();
    t.values.reserve(tensor.size());
    for (auto v : tensor.values()) t.values.push_back(static_cast<float>(v));
    raw.emplace(name, std::move(t));
  }
  return raw;
}

template <typename T>
void save_checkpoint(const ParameterStore<T>& store, const std::filesystem::path& path,
                     std::uint64_t config_hash) {
  save_raw_checkpoint(to_raw(store), path, config_hash);
}

// Loads values into an existing store. Every store parameter must be present
// with a matching shape; config hash must equal expected_hash.
template <typename T>
void load_checkpoint(ParameterStore<T>& store, const std::filesystem::path& path,
                     std::uint64_t expected_hash) {
  std::uint64_t hash = 0;
  auto raw = load_raw_checkpoint(path, &hash);
  if (hash != expected_hash)
    throw ValidationError("checkpoint config hash mismatch for " + path.string() +
                          ": artifact was produced by a different configuration");
  for (auto& [name, tensor] : store) {
    auto it = raw.find(name);
    if (it == raw.end())
      throw ValidationError("checkpoint " + path.string() + " is missing parameter '" + name +
                            "'");
    if (it->second.shape != tensor.shape())
      throw ValidationError("checkpoint parameter '" + name + "' has shape " +
                            shape_str(it->second.shape) + ", expected " +
                            shape_str(tensor.shape()));
    auto& values = tensor.mutable_values();
    for (std::size_t i = 0; i < values.size(); ++i)
      values[i] = static_cast<T>(it->second.values[i]);
    tensor.clear_grad();
  }
}

}  // namespace zel::autodiff
