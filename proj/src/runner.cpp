/*
 * Copyright (c) 2026 The corra authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include "corra/runner.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>

#include "corra/baselines.hpp"
#include "corra/errors.hpp"
#include "corra/metrics.hpp"
#include "corra/runner.hpp"

namespace corra {

namespace {

namespace fs = std::filesystem;

double wall_seconds_since(const std::chrono::steady_clock::time_point& start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

double cpu_seconds() {
  return static_cast<double>(std::clock()) / CLOCKS_PER_SEC;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return std::string(buf);
}

void write_resolved_config(const RunConfig& config, const fs::path& dir) {
  std::ofstream out(dir / "config.resolved.cfg");
  if (!out) throw IoError("cannot write resolved config");
  out << "# canonical resolved configuration, hash "
      << hex64(config.config_hash()) << "\n";
  out << config.canonical_text();
}

std::string checkpoint_name(std::uint64_t episode) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "checkpoint_%08llu.ckpt",
                static_cast<unsigned long long>(episode));
  return std::string(buf);
}

bool is_heuristic(const std::string& method) {
  return method == "full-activation-uniform" || method == "random-assignment";
}

void run_heuristic_train(const RunConfig& config, const fs::path& out_dir,
                         const std::string& run_id) {
  const HeuristicKind kind = heuristic_from_string(config.run.method);
  Environment env(config.system, config.dynamics, Environment::Mode::kEpisodic,
                  config.run.seed);
  MetricsWriter metrics((out_dir / "metrics.csv").string());
  const auto start = std::chrono::steady_clock::now();

  for (long episode = 0; episode < config.run.episodes; ++episode) {
    env.reset(static_cast<std::uint64_t>(episode));
    CounterRng rng(config.run.seed, {90, static_cast<std::uint64_t>(episode)});
    MetricsRow row;
    row.run_id = run_id;
    row.index = episode;
    double reward = 0.0, cost = 0.0, miss = 0.0, tput = 0.0, active = 0.0;
    for (int t = 0; t < config.system.episode_length; ++t) {
      const StepOutcome out = env.step(heuristic_joint_action(kind, env, &rng));
      reward += out.reward;
      double c = 0.0;
      for (double v : out.cost_bps) c += v;
      cost += c / std::max(out.active_users, 1);
      for (auto q : out.qos_miss) miss += q;
      tput += out.throughput_bps;
      active += out.active_users;
    }
    const double t_count = config.system.episode_length;
    row.wall_time_s = wall_seconds_since(start);
    row.shaped_reward = reward / t_count * config.trainer.reward_scale;
    row.raw_reward_bps = reward / t_count;
    row.mean_cost_bps = cost / t_count;
    row.qos_miss_per_step = miss / t_count;
    row.throughput_bps = tput / t_count;
    row.active_users = active / t_count;
    metrics.write(row);
  }
  metrics.flush();
}

}  // namespace

std::string run_identifier(const RunConfig& config) {
  return hex64(config.config_hash()) + "-" + config.run.method + "-s" +
         std::to_string(config.run.seed);
}

void run_train(RunConfig config, std::optional<std::uint64_t> seed_override,
               std::optional<std::string> out_override) {
  if (seed_override) config.run.seed = *seed_override;
  if (out_override) config.run.out_dir = *out_override;
  config.validate();

  const fs::path out_dir(config.run.out_dir);
  fs::create_directories(out_dir);
  write_resolved_config(config, out_dir);
  const std::string run_id = run_identifier(config);

  if (is_heuristic(config.run.method)) {
    run_heuristic_train(config, out_dir, run_id);
    return;
  }

  const Method method = method_from_string(config.run.method);
  Trainer trainer(config.system, config.dynamics, config.trainer, method,
                  config.run.seed, config.run.workers);

  const std::uint64_t cfg_hash = config.config_hash();
  const std::uint64_t sys_hash = config.system_hash();
  trainer.make_checkpoint(cfg_hash, sys_hash)
      .save((out_dir / checkpoint_name(0)).string());

  MetricsWriter metrics((out_dir / "metrics.csv").string());
  const auto start = std::chrono::steady_clock::now();
  const double cpu_start = cpu_seconds();
  const double cpu_budget_s = config.run.max_cpu_hours * 3600.0;
  std::uint64_t last_checkpoint = 0;

  try {
    while (trainer.episodes_done() < static_cast<std::uint64_t>(config.run.episodes)) {
      if (cpu_budget_s > 0.0 && cpu_seconds() - cpu_start >= cpu_budget_s) break;
      const std::vector<EpisodeMetrics> episodes = trainer.run_iteration();
      for (const EpisodeMetrics& em : episodes) {
        MetricsRow row;
        row.run_id = run_id;
        row.wall_time_s = wall_seconds_since(start);
        row.index = static_cast<long>(em.episode);
        row.phase = "train";
        row.shaped_reward = em.shaped_reward;
        row.raw_reward_bps = em.raw_reward_bps;
        row.mean_cost_bps = em.mean_cost_bps;
        row.lambda_mean = em.lambda_mean;
        row.lambda_max = em.lambda_max;
        row.qos_miss_per_step = em.qos_miss_per_step;
        row.throughput_bps = em.throughput_bps;
        row.active_users = em.active_users;
        metrics.write(row);
      }
      if (config.run.checkpoint_every > 0 &&
          trainer.episodes_done() - last_checkpoint >=
              static_cast<std::uint64_t>(config.run.checkpoint_every)) {
        trainer.make_checkpoint(cfg_hash, sys_hash)
            .save((out_dir / checkpoint_name(trainer.episodes_done())).string());
        last_checkpoint = trainer.episodes_done();
      }
    }
  } catch (const TrainingCollapsed&) {
    metrics.flush();
    throw;
  }

  metrics.flush();
  trainer.make_checkpoint(cfg_hash, sys_hash)
      .save((out_dir / "checkpoint_final.ckpt").string());
}

void run_eval(const std::string& checkpoint_path, RunConfig scenario,
              std::optional<double> duration_min_override,
              std::optional<std::uint64_t> seed_override,
              std::optional<std::string> out_override) {
  if (seed_override) scenario.run.seed = *seed_override;
  if (out_override) scenario.run.out_dir = *out_override;
  if (duration_min_override) scenario.run.eval_duration_min = *duration_min_override;
  scenario.validate();
  if (is_heuristic(scenario.run.method))
    throw ConfigError("eval: run.method must be a trained method");

  const Checkpoint ckpt = Checkpoint::load(checkpoint_path);
  if (ckpt.system_hash != scenario.system_hash())
    throw ConfigError("eval: checkpoint system hash " + hex64(ckpt.system_hash) +
                      " does not match the scenario system block " +
                      hex64(scenario.system_hash()));

  const Method method = method_from_string(scenario.run.method);
  MlpConfig actor_cfg;
  actor_cfg.input_dim = method == Method::kDecomposed
                            ? Environment::obs_dim(scenario.system)
                            : Environment::bs_obs_dim(scenario.system);
  actor_cfg.hidden = scenario.trainer.hidden;
  actor_cfg.output_dim =
      (method == Method::kDecomposed ? scenario.system.srb_size()
                                     : scenario.system.subchannels) *
      scenario.system.action_classes();
  actor_cfg.activation = scenario.trainer.activation;
  CounterRng init_rng(0);
  Mlp actor(actor_cfg, init_rng);
  actor.import_blocks("actor", ckpt.blocks);

  const fs::path out_dir(scenario.run.out_dir);
  fs::create_directories(out_dir);
  write_resolved_config(scenario, out_dir);
  MetricsWriter metrics((out_dir / "metrics_eval.csv").string());
  const std::string run_id = run_identifier(scenario);
  const auto start = std::chrono::steady_clock::now();

  Environment env(scenario.system, scenario.dynamics,
                  Environment::Mode::kContinuous, scenario.run.seed);
  env.reset(0);

  const int frames_per_second =
      std::max(1, static_cast<int>(std::lround(1.0 / scenario.system.frame_duration_s)));
  const long seconds = std::lround(scenario.run.eval_duration_min * 60.0);

  for (long second = 0; second < seconds; ++second) {
    double reward = 0.0, cost = 0.0, miss = 0.0, tput = 0.0, active = 0.0;
    for (int frame = 0; frame < frames_per_second; ++frame) {
      const JointAction joint = greedy_joint_action(env, actor, method);
      const StepOutcome out = env.step(joint);
      reward += out.reward;
      double c = 0.0;
      for (double v : out.cost_bps) c += v;
      cost += c / std::max(out.active_users, 1);
      for (auto q : out.qos_miss) miss += q;
      tput += out.throughput_bps;
      active += out.active_users;
    }
    MetricsRow row;
    row.run_id = run_id;
    row.wall_time_s = wall_seconds_since(start);
    row.index = second;
    row.phase = "eval";
    row.shaped_reward = reward / frames_per_second * scenario.trainer.reward_scale;
    row.raw_reward_bps = reward / frames_per_second;
    row.mean_cost_bps = cost / frames_per_second;
    row.qos_miss_per_step = miss / frames_per_second;
    row.throughput_bps = tput / frames_per_second;
    row.active_users = active / frames_per_second;
    metrics.write(row);
  }
  metrics.flush();
}

void run_export_plots(const std::string& metrics_csv, const std::string& out_dir) {
  const std::vector<MetricsRow> rows = MetricsReader::read_file(metrics_csv);
  const fs::path dir(out_dir);
  fs::create_directories(dir);

  auto open_panel = [&](const std::string& name, const std::string& header) {
    std::ofstream out(dir / name, std::ios::trunc);
    if (!out) throw IoError("export-plots: cannot write " + name);
    out << header << "\r\n";
    return out;
  };

  bool any_train = false, any_eval = false;
  for (const MetricsRow& r : rows) {
    if (r.phase == "train") any_train = true;
    if (r.phase == "eval") any_eval = true;
  }

  if (any_train || !any_eval) {
    auto reward = open_panel("reward_vs_episode.csv",
                             "episode,raw_reward_bps,shaped_reward");
    auto cost = open_panel("cost_vs_episode.csv",
                           "episode,mean_cost_bps,lambda_mean");
    for (const MetricsRow& r : rows) {
      if (r.phase != "train") continue;
      reward << r.index << ',' << r.raw_reward_bps << ',' << r.shaped_reward
             << "\r\n";
      cost << r.index << ',' << r.mean_cost_bps << ',' << r.lambda_mean
           << "\r\n";
    }
  }
  if (any_eval) {
    auto users = open_panel("active_users_vs_time.csv", "second,active_users");
    auto misses = open_panel("qos_misses_vs_time.csv", "second,qos_miss_per_step");
    auto tput = open_panel("throughput_vs_time.csv", "second,throughput_bps");
    for (const MetricsRow& r : rows) {
      if (r.phase != "eval") continue;
      users << r.index << ',' << r.active_users << "\r\n";
      misses << r.index << ',' << r.qos_miss_per_step << "\r\n";
      tput << r.index << ',' << r.throughput_bps << "\r\n";
    }
  }
}

}  // namespace corra
