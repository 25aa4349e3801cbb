/*
 * Copyright (c) 2026 The corra authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include <cstdint>
#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "corra.h"

namespace {

int map_exit(int status) {
  switch (status) {
    case CORRA_OK: return 0;
    case CORRA_ERR_CONFIG: return 2;
    case CORRA_ERR_COLLAPSE: return 3;
    default: return 1;
  }
}

int report_failure(int status) {
  std::fprintf(stderr, "error: %s\n", corra_last_error());
  return map_exit(status);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"corra: constrained multi-agent resource allocation trainer"};
  app.require_subcommand(1);

  std::string config_path, out_dir, checkpoint, scenario, scope, metrics;
  std::int64_t seed = -1;
  double duration_min = -1.0;

  CLI::App* train = app.add_subcommand("train", "train per a run config");
  train->add_option("--config", config_path, "run configuration file")->required();
  train->add_option("--seed", seed, "override run.seed");
  train->add_option("--out", out_dir, "override run.out_dir");

  CLI::App* eval = app.add_subcommand(
      "eval", "evaluate a checkpoint on a continuous-time scenario");
  eval->add_option("--checkpoint", checkpoint, "trained checkpoint")->required();
  eval->add_option("--scenario", scenario, "scenario configuration file")->required();
  eval->add_option("--duration-min", duration_min, "simulated minutes");
  eval->add_option("--seed", seed, "override run.seed");
  eval->add_option("--out", out_dir, "override run.out_dir");

  CLI::App* verify = app.add_subcommand(
      "verify", "run the theory and invariant verification suites");
  verify->add_option("--scope", scope,
                     "single suite: lemma1|lemma2|theorem1|proposition1|"
                     "assumptions|gradients|physics");

  CLI::App* plots = app.add_subcommand(
      "export-plots", "write per-panel plot data from a metrics file");
  plots->add_option("metrics", metrics, "metrics CSV path")->required();
  plots->add_option("--out", out_dir, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  if (train->parsed()) {
    const int status =
        corra_train(config_path.c_str(), seed, out_dir.empty() ? nullptr : out_dir.c_str());
    if (status != CORRA_OK) return report_failure(status);
    return 0;
  }

  if (eval->parsed()) {
    const int status =
        corra_eval(checkpoint.c_str(), scenario.c_str(), duration_min, seed,
                   out_dir.empty() ? nullptr : out_dir.c_str());
    if (status != CORRA_OK) return report_failure(status);
    return 0;
  }

  if (verify->parsed()) {
    char* report = nullptr;
    int failures = 0;
    const int status = corra_verify(scope.empty() ? nullptr : scope.c_str(),
                                    &report, &failures);
    if (report) {
      std::fputs(report, stdout);
      corra_string_free(report);
    }
    if (status == CORRA_ERR_VERIFY_FAILED) {
      std::fprintf(stderr, "%d suite(s) failed\n", failures);
      return 1;
    }
    if (status != CORRA_OK) return report_failure(status);
    return 0;
  }

  if (plots->parsed()) {
    const int status = corra_export_plots(metrics.c_str(), out_dir.c_str());
    if (status != CORRA_OK) return report_failure(status);
    return 0;
  }

  return 1;
}
