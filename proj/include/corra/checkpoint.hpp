/*
 * Copyright (c) 2026 The corra authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#ifndef CORRA_CHECKPOINT_HPP
#define CORRA_CHECKPOINT_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "corra/nn.hpp"

namespace corra {

/// On-disk layout (little-endian):
///   u64 magic "CORRACKP"  u32 version  u64 config_hash  u64 system_hash
///   u64 episode           u32 block_count
///   per block: u32 name_len, name bytes, u32 ndim, i64 dims[ndim],
///              f64 values (row-major)
struct Checkpoint {
  static constexpr std::uint64_t kMagic = 0x504b434152524f43ULL;  // "CORRACKP"
  static constexpr std::uint32_t kVersion = 1;

  std::uint64_t config_hash = 0;
  std::uint64_t system_hash = 0;
  std::uint64_t episode = 0;
  std::vector<std::pair<std::string, TensorBuffer>> blocks;

  void add(const std::string& name, TensorBuffer tensor);
  const TensorBuffer& get(const std::string& name) const;
  bool has(const std::string& name) const;

  void save(const std::string& path) const;
  static Checkpoint load(const std::string& path);
};

}  // namespace corra

#endif  // CORRA_CHECKPOINT_HPP
