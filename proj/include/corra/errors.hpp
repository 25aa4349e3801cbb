/*
 * Copyright (c) 2026 The corra authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#ifndef CORRA_ERRORS_HPP
#define CORRA_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace corra {

/// Invalid value fed to a numeric primitive (distance 0, W <= 0, ...).
class DomainError : public std::invalid_argument {
 public:
  explicit DomainError(const std::string& what) : std::invalid_argument(what) {}
};

/// Malformed or inconsistent run configuration.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what
                                    : what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_ = 0;
};

/// A caller broke an API contract (shape mismatch, inactive-user action, ...).
class ContractError : public std::logic_error {
 public:
  explicit ContractError(const std::string& what) : std::logic_error(what) {}
};

/// File format / IO failures (checkpoints, metrics).
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

/// Training produced non-finite values it could not recover from.
class TrainingCollapsed : public std::runtime_error {
 public:
  explicit TrainingCollapsed(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace corra

#endif  // CORRA_ERRORS_HPP
