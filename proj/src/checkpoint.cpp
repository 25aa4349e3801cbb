/*
 * Copyright (c) 2026 The corra authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include "corra/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "corra/errors.hpp"

namespace corra {

namespace {

template <typename T>
void write_raw(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_raw(std::ifstream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw IoError("checkpoint: truncated file");
  return v;
}

}  // namespace

void Checkpoint::add(const std::string& name, TensorBuffer tensor) {
  tensor.validate();
  blocks.emplace_back(name, std::move(tensor));
}

const TensorBuffer& Checkpoint::get(const std::string& name) const {
  for (const auto& [n, t] : blocks)
    if (n == name) return t;
  throw IoError("checkpoint: missing block " + name);
}

bool Checkpoint::has(const std::string& name) const {
  for (const auto& [n, t] : blocks)
    if (n == name) return true;
  return false;
}

void Checkpoint::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("checkpoint: cannot open " + path + " for writing");
  write_raw(out, kMagic);
  write_raw(out, kVersion);
  write_raw(out, config_hash);
  write_raw(out, system_hash);
  write_raw(out, episode);
  write_raw(out, static_cast<std::uint32_t>(blocks.size()));
  for (const auto& [name, tensor] : blocks) {
    write_raw(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_raw(out, static_cast<std::uint32_t>(tensor.shape.size()));
    for (auto d : tensor.shape) write_raw(out, d);
    out.write(reinterpret_cast<const char*>(tensor.values.data()),
              static_cast<std::streamsize>(tensor.values.size() * sizeof(double)));
  }
  if (!out) throw IoError("checkpoint: write failed for " + path);
}

Checkpoint Checkpoint::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("checkpoint: cannot open " + path);
  if (read_raw<std::uint64_t>(in) != kMagic)
    throw IoError("checkpoint: bad magic in " + path);
  const auto version = read_raw<std::uint32_t>(in);
  if (version != kVersion)
    throw IoError("checkpoint: unsupported format version " +
                  std::to_string(version));
  Checkpoint ckpt;
  ckpt.config_hash = read_raw<std::uint64_t>(in);
  ckpt.system_hash = read_raw<std::uint64_t>(in);
  ckpt.episode = read_raw<std::uint64_t>(in);
  const auto count = read_raw<std::uint32_t>(in);
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto name_len = read_raw<std::uint32_t>(in);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    TensorBuffer tensor;
    const auto ndim = read_raw<std::uint32_t>(in);
    for (std::uint32_t d = 0; d < ndim; ++d)
      tensor.shape.push_back(read_raw<std::int64_t>(in));
    tensor.values.resize(static_cast<std::size_t>(tensor.element_count()));
    in.read(reinterpret_cast<char*>(tensor.values.data()),
            static_cast<std::streamsize>(tensor.values.size() * sizeof(double)));
    if (!in) throw IoError("checkpoint: truncated block in " + path);
    ckpt.blocks.emplace_back(std::move(name), std::move(tensor));
  }
  return ckpt;
}

}  // namespace corra
