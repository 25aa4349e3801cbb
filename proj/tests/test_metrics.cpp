/*
 * Copyright (c) 2026 The corra authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include <filesystem>
#include <fstream>

#include "corra/errors.hpp"
#include "corra/metrics.hpp"
#include "doctest.h"

using namespace corra;

namespace {

std::string temp_file(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("metrics rows round-trip through the file") {
  const std::string path = temp_file("corra_metrics_rt.csv");
  {
    MetricsWriter writer(path);
    MetricsRow row;
    row.run_id = "abc-decomposed-s1";
    row.wall_time_s = 1.25;
    row.index = 3;
    row.phase = "train";
    row.shaped_reward = 4.5;
    row.raw_reward_bps = 4.5e6;
    row.mean_cost_bps = 1.0e5;
    row.lambda_mean = 0.5;
    row.lambda_max = 2.0;
    row.qos_miss_per_step = 1.5;
    row.throughput_bps = 4.05e7;
    row.active_users = 9.0;
    writer.write(row);
    writer.flush();
  }
  const auto rows = MetricsReader::read_file(path);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].run_id == "abc-decomposed-s1");
  CHECK(rows[0].index == 3);
  CHECK(rows[0].phase == "train");
  CHECK(rows[0].shaped_reward == 4.5);
  CHECK(rows[0].raw_reward_bps == 4.5e6);
  CHECK(rows[0].throughput_bps == 4.05e7);
  std::filesystem::remove(path);
}

TEST_CASE("quoting handles commas and embedded quotes") {
  CHECK(csv_quote("plain") == "plain");
  CHECK(csv_quote("a,b") == "\"a,b\"");
  CHECK(csv_quote("say \"hi\"") == "\"say \"\"hi\"\"\"");

  const std::string path = temp_file("corra_metrics_quote.csv");
  {
    MetricsWriter writer(path);
    MetricsRow row;
    row.run_id = "weird,\"id\"";
    writer.write(row);
  }
  const auto rows = MetricsReader::read_file(path);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].run_id == "weird,\"id\"");
  std::filesystem::remove(path);
}

TEST_CASE("unknown schemas are rejected") {
  const std::string path = temp_file("corra_metrics_schema.csv");
  {
    std::ofstream out(path);
    out << MetricsWriter::header() << "\r\n";
    out << "corra.metrics.v999,x,0,0,train,0,0,0,0,0,0,0,0\r\n";
  }
  CHECK_THROWS_AS(MetricsReader::read_file(path), IoError);
  std::filesystem::remove(path);
}

TEST_CASE("malformed headers and rows are rejected") {
  const std::string path = temp_file("corra_metrics_bad.csv");
  {
    std::ofstream out(path);
    out << "nope,header\r\n";
  }
  CHECK_THROWS_AS(MetricsReader::read_file(path), IoError);
  {
    std::ofstream out(path);
    out << MetricsWriter::header() << "\r\n";
    out << "corra.metrics.v1,x,0,0\r\n";
  }
  CHECK_THROWS_AS(MetricsReader::read_file(path), IoError);
  std::filesystem::remove(path);
}

TEST_CASE("an empty body reads as zero rows") {
  const std::string path = temp_file("corra_metrics_empty.csv");
  { MetricsWriter writer(path); }
  CHECK(MetricsReader::read_file(path).empty());
  std::filesystem::remove(path);
}
