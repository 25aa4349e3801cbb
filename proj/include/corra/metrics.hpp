/*
 * Copyright (c) 2026 The corra authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#ifndef CORRA_METRICS_HPP
#define CORRA_METRICS_HPP

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

namespace corra {

/// One metrics record: an episode (train phase) or a simulated second
/// (eval phase). `wall_time_s` is the only non-reproducible column.
struct MetricsRow {
  std::string run_id;
  double wall_time_s = 0.0;
  long index = 0;  // episode or second
  std::string phase = "train";
  double shaped_reward = 0.0;
  double raw_reward_bps = 0.0;
  double mean_cost_bps = 0.0;
  double lambda_mean = 0.0;
  double lambda_max = 0.0;
  double qos_miss_per_step = 0.0;
  double throughput_bps = 0.0;
  double active_users = 0.0;
};

/// RFC 4180 CSV with a versioned schema column; readers reject files whose
/// schema tag they do not understand.
class MetricsWriter {
 public:
  static constexpr const char* kSchema = "corra.metrics.v1";

  explicit MetricsWriter(const std::string& path);
  void write(const MetricsRow& row);
  void flush();

  static std::string header();

 private:
  std::ofstream out_;
};

class MetricsReader {
 public:
  /// Loads and validates a metrics file; throws IoError on malformed input
  /// or unknown schema.
  static std::vector<MetricsRow> read_file(const std::string& path);
};

std::string csv_quote(const std::string& field);

}  // namespace corra

#endif  // CORRA_METRICS_HPP
