/*
 * Copyright (c) 2026 The corra authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#ifndef CORRA_CONFIG_HPP
#define CORRA_CONFIG_HPP

#include <cstdint>
#include <string>

#include "corra/system_config.hpp"
#include "corra/trainer.hpp"
#include "corra/users.hpp"

namespace corra {

struct RunBlock {
  std::uint64_t seed = 0;
  long episodes = 1000;
  int workers = 1;
  std::string out_dir = "out";
  std::string method = "decomposed";  // or mappo | ippo | a heuristic tag
  long checkpoint_every = 0;          // 0: only initial and final
  double eval_duration_min = 30.0;
  double max_cpu_hours = 0.0;         // 0: unlimited
};

/// Fully resolved run description: strict schema, unknown keys rejected,
/// env-var overrides (CORRA_<SECTION>_<KEY>, dots as underscores) applied
/// before validation.
struct RunConfig {
  SystemConfig system;
  DynamicsConfig dynamics;
  TrainerConfig trainer;
  RunBlock run;

  static RunConfig parse_file(const std::string& path);
  static RunConfig parse_string(const std::string& text);

  void validate() const;

  /// Canonical key-sorted text; identical configs hash identically and any
  /// semantic change alters the hash.
  std::string canonical_text() const;
  std::uint64_t config_hash() const;
  /// Hash of the [system] block only; checkpoints carry it so evaluation
  /// rejects incompatible scenarios.
  std::uint64_t system_hash() const;
};

std::uint64_t fnv1a64(const std::string& text);

}  // namespace corra

#endif  // CORRA_CONFIG_HPP
