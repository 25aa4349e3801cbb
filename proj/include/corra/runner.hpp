/*
 * Copyright (c) 2026 The corra authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#ifndef CORRA_RUNNER_HPP
#define CORRA_RUNNER_HPP

#include <cstdint>
#include <optional>
#include <string>

#include "corra/config.hpp"

namespace corra {

/// Runs training per the config: writes metrics.csv, config.resolved.cfg,
/// and a checkpoint series under run.out_dir. Throws ConfigError on bad
/// input and TrainingCollapsed after flushing partial metrics.
void run_train(RunConfig config, std::optional<std::uint64_t> seed_override,
               std::optional<std::string> out_override);

/// Continuous-time scenario evaluation of a trained checkpoint with greedy
/// action selection; emits one metrics row per simulated second.
void run_eval(const std::string& checkpoint_path, RunConfig scenario,
              std::optional<double> duration_min_override,
              std::optional<std::uint64_t> seed_override,
              std::optional<std::string> out_override);

/// Re-shapes a metrics file into per-panel CSVs ready for plotting.
void run_export_plots(const std::string& metrics_csv, const std::string& out_dir);

std::string run_identifier(const RunConfig& config);

}  // namespace corra

#endif  // CORRA_RUNNER_HPP
