/*
 * Copyright (c) 2026 The corra authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include "corra/metrics.hpp"

#include <sstream>

#include "corra/errors.hpp"

namespace corra {

namespace {

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

// splits one RFC 4180 record; the input must contain a whole logical line
std::vector<std::string> split_csv(const std::string& line, int line_no) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(field);
      field.clear();
    } else {
      field += c;
    }
  }
  if (quoted)
    throw IoError("metrics: unbalanced quote on line " + std::to_string(line_no));
  fields.push_back(field);
  return fields;
}

double to_double(const std::string& s, int line_no) {
  try {
    return std::stod(s);
  } catch (const std::exception&) {
    throw IoError("metrics: bad number '" + s + "' on line " +
                  std::to_string(line_no));
  }
}

}  // namespace

std::string csv_quote(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

std::string MetricsWriter::header() {
  return "schema,run_id,wall_time_s,index,phase,shaped_reward,raw_reward_bps,"
         "mean_cost_bps,lambda_mean,lambda_max,qos_miss_per_step,"
         "throughput_bps,active_users";
}

MetricsWriter::MetricsWriter(const std::string& path)
    : out_(path, std::ios::trunc) {
  if (!out_) throw IoError("metrics: cannot open " + path + " for writing");
  out_ << header() << "\r\n";
}

void MetricsWriter::write(const MetricsRow& row) {
  out_ << kSchema << ',' << csv_quote(row.run_id) << ',' << fmt(row.wall_time_s)
       << ',' << row.index << ',' << csv_quote(row.phase) << ','
       << fmt(row.shaped_reward) << ',' << fmt(row.raw_reward_bps) << ','
       << fmt(row.mean_cost_bps) << ',' << fmt(row.lambda_mean) << ','
       << fmt(row.lambda_max) << ',' << fmt(row.qos_miss_per_step) << ','
       << fmt(row.throughput_bps) << ',' << fmt(row.active_users) << "\r\n";
}

void MetricsWriter::flush() { out_.flush(); }

std::vector<MetricsRow> MetricsReader::read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("metrics: cannot open " + path);
  std::string line;
  int line_no = 0;
  std::vector<MetricsRow> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv(line, line_no);
    if (line_no == 1) {
      if (line != MetricsWriter::header())
        throw IoError("metrics: unrecognized header in " + path);
      continue;
    }
    if (fields.size() != 13)
      throw IoError("metrics: wrong field count on line " +
                    std::to_string(line_no));
    if (fields[0] != MetricsWriter::kSchema)
      throw IoError("metrics: unknown schema '" + fields[0] + "' on line " +
                    std::to_string(line_no));
    MetricsRow row;
    row.run_id = fields[1];
    row.wall_time_s = to_double(fields[2], line_no);
    row.index = static_cast<long>(to_double(fields[3], line_no));
    row.phase = fields[4];
    row.shaped_reward = to_double(fields[5], line_no);
    row.raw_reward_bps = to_double(fields[6], line_no);
    row.mean_cost_bps = to_double(fields[7], line_no);
    row.lambda_mean = to_double(fields[8], line_no);
    row.lambda_max = to_double(fields[9], line_no);
    row.qos_miss_per_step = to_double(fields[10], line_no);
    row.throughput_bps = to_double(fields[11], line_no);
    row.active_users = to_double(fields[12], line_no);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace corra
