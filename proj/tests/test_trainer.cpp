/*
 * Copyright (c) 2026 The corra authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include <cmath>

#include "corra/errors.hpp"
#include "corra/trainer.hpp"
#include "doctest.h"

using namespace corra;

namespace {

SystemConfig tiny_system() {
  SystemConfig cfg;
  cfg.bs = {BsSite{BsKind::kTbs, {250.0, 500.0, 25.0}},
            BsSite{BsKind::kTbs, {750.0, 500.0, 25.0}}};
  cfg.users_per_bs = 2;
  cfg.subchannels = 4;
  cfg.srb_count = 2;
  cfg.episode_length = 8;
  return cfg;
}

TrainerConfig tiny_trainer() {
  TrainerConfig cfg;
  cfg.hidden = {8};
  cfg.minibatch_size = 16;
  cfg.epochs_per_batch = 2;
  return cfg;
}

}  // namespace

TEST_CASE("gae base case matches the one-step formula") {
  const std::vector<double> rewards{2.0};
  const std::vector<double> values{1.0, 3.0};
  std::vector<double> adv(1), ret(1);

  std::vector<std::uint8_t> nonterminal{0};
  compute_gae(rewards, values, nonterminal, 0.9, 0.95, adv, ret);
  CHECK(adv[0] == doctest::Approx(2.0 + 0.9 * 3.0 - 1.0).epsilon(1e-15));

  std::vector<std::uint8_t> terminal{1};
  compute_gae(rewards, values, terminal, 0.9, 0.95, adv, ret);
  CHECK(adv[0] == doctest::Approx(2.0 - 1.0).epsilon(1e-15));
  CHECK(ret[0] == doctest::Approx(adv[0] + 1.0).epsilon(1e-15));
}

TEST_CASE("gae with lambda zero reduces to one-step TD errors") {
  CounterRng rng(60);
  const int t_count = 16;
  std::vector<double> rewards(t_count), values(t_count + 1);
  std::vector<std::uint8_t> done(t_count, 0);
  done[t_count - 1] = 1;
  for (double& r : rewards) r = rng.uniform(-1.0, 1.0);
  for (double& v : values) v = rng.uniform(-1.0, 1.0);
  std::vector<double> adv(t_count), ret(t_count);
  compute_gae(rewards, values, done, 0.9, 0.0, adv, ret);
  for (int t = 0; t < t_count; ++t) {
    const double nonterminal = done[t] ? 0.0 : 1.0;
    const double td = rewards[t] + 0.9 * values[t + 1] * nonterminal - values[t];
    CHECK(adv[t] == doctest::Approx(td).epsilon(1e-12));
  }
}

TEST_CASE("gae with lambda one and zero values is the discounted return") {
  CounterRng rng(61);
  const int t_count = 12;
  const double gamma = 0.9;
  std::vector<double> rewards(t_count), values(t_count + 1, 0.0);
  std::vector<std::uint8_t> done(t_count, 0);
  done[t_count - 1] = 1;
  for (double& r : rewards) r = rng.uniform(-1.0, 1.0);
  std::vector<double> adv(t_count), ret(t_count);
  compute_gae(rewards, values, done, gamma, 1.0, adv, ret);
  for (int t = 0; t < t_count; ++t) {
    double expected = 0.0;  // independent discounted-sum oracle
    double factor = 1.0;
    for (int i = t; i < t_count; ++i) {
      expected += factor * rewards[i];
      factor *= gamma;
    }
    CHECK(adv[t] == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("multiplier update follows the projected subgradient rule") {
  Multipliers duals(3, 1e-3, 100.0);
  duals.lambda = {0.5, 0.0, 99.95};
  const std::vector<double> costs{100.0, 0.0, 100.0};
  duals.update(costs);
  CHECK(duals.lambda[0] == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(duals.lambda[1] == 0.0);
  CHECK(duals.lambda[2] == 100.0);  // capped
}

TEST_CASE("constant costs accumulate linearly until the cap") {
  Multipliers duals(1, 1e-3, 100.0);
  const std::vector<double> costs{7.0};
  const double lambda0 = 0.0;
  const int t_count = 500;
  for (int t = 0; t < t_count; ++t) duals.update(costs);
  CHECK(duals.lambda[0] ==
        doctest::Approx(std::min(lambda0 + 1e-3 * 7.0 * t_count, 100.0))
            .epsilon(1e-9));
}

TEST_CASE("dual variables stay non-negative and monotone under violation") {
  Multipliers duals(2, 0.1, 100.0);
  CounterRng rng(62);
  double prev0 = 0.0;
  for (int i = 0; i < 100; ++i) {
    const std::vector<double> costs{rng.uniform(0.0, 5.0), 0.0};
    duals.update(costs);
    CHECK(duals.lambda[0] >= prev0);
    CHECK(duals.lambda[1] == 0.0);
    prev0 = duals.lambda[0];
  }
}

TEST_CASE("ppo solves a two-armed bandit") {
  // arm 1 pays 1, arm 0 pays 0; the policy must concentrate on arm 1
  MlpConfig actor_cfg;
  actor_cfg.input_dim = 1;
  actor_cfg.hidden = {8};
  actor_cfg.output_dim = 2;
  actor_cfg.output_gain = 0.01;
  CounterRng init(70);
  Mlp actor(actor_cfg, init);
  MlpConfig critic_cfg = actor_cfg;
  critic_cfg.output_dim = 1;
  Mlp critic(critic_cfg, init);

  TrainerConfig cfg;
  cfg.learning_rate = 0.01;
  cfg.entropy_coef = 0.0;
  cfg.minibatch_size = 64;
  cfg.epochs_per_batch = 4;
  AdamOptimizer actor_opt(actor, cfg.learning_rate);
  AdamOptimizer critic_opt(critic, cfg.learning_rate);

  CounterRng rng(71);
  const std::vector<std::uint8_t> mask{1, 1};
  const int batch_size = 64;
  for (int update = 0; update < 2000; ++update) {
    PpoBatch batch;
    batch.slots = 1;
    batch.classes = 2;
    batch.obs = Mat::Ones(1, batch_size);
    batch.critic_obs = Mat::Ones(1, 1);
    batch.critic_target = {0.5};
    std::vector<double> rewards(batch_size);
    for (int i = 0; i < batch_size; ++i) {
      const Vec logits = actor.forward(Vec::Ones(1));
      MaskedCategorical dist(std::span<const double>(logits.data(), 2), mask);
      const int a = dist.sample(rng);
      batch.actions.push_back(a);
      batch.masks.insert(batch.masks.end(), {1, 1});
      batch.logp_old.push_back(dist.log_prob(a));
      rewards[i] = a == 1 ? 1.0 : 0.0;
    }
    double mean = 0.0;
    for (double r : rewards) mean += r;
    mean /= batch_size;
    for (int i = 0; i < batch_size; ++i)
      batch.advantages.push_back(rewards[i] - mean);
    CounterRng shuffle(72, {static_cast<std::uint64_t>(update)});
    ppo_update(batch, actor, actor_opt, critic, critic_opt, cfg, shuffle);
  }

  const Vec logits = actor.forward(Vec::Ones(1));
  MaskedCategorical dist(std::span<const double>(logits.data(), 2), mask);
  CHECK(dist.probabilities()[1] >= 0.95);
}

TEST_CASE("zero advantages with zero entropy leave the actor untouched") {
  MlpConfig net_cfg;
  net_cfg.input_dim = 2;
  net_cfg.hidden = {4};
  net_cfg.output_dim = 3;
  CounterRng init(73);
  Mlp actor(net_cfg, init);
  MlpConfig critic_cfg = net_cfg;
  critic_cfg.output_dim = 1;
  Mlp critic(critic_cfg, init);

  const Mat w0 = actor.layers()[0].weight;

  TrainerConfig cfg;
  cfg.entropy_coef = 0.0;
  cfg.minibatch_size = 8;
  cfg.epochs_per_batch = 2;
  AdamOptimizer actor_opt(actor, cfg.learning_rate);
  AdamOptimizer critic_opt(critic, cfg.learning_rate);

  PpoBatch batch;
  batch.slots = 1;
  batch.classes = 3;
  const int n = 8;
  batch.obs = Mat::Random(2, n);
  CounterRng rng(74);
  for (int i = 0; i < n; ++i) {
    const Vec logits = actor.forward(Vec(batch.obs.col(i)));
    const std::vector<std::uint8_t> mask{1, 1, 1};
    MaskedCategorical dist(std::span<const double>(logits.data(), 3), mask);
    const int a = dist.sample(rng);
    batch.actions.push_back(a);
    batch.masks.insert(batch.masks.end(), {1, 1, 1});
    batch.logp_old.push_back(dist.log_prob(a));
    batch.advantages.push_back(0.0);
  }
  // critic targets equal to current predictions: no value movement either
  batch.critic_obs = batch.obs;
  for (int i = 0; i < n; ++i)
    batch.critic_target.push_back(critic.forward(Vec(batch.obs.col(i)))(0));

  CounterRng shuffle(75);
  ppo_update(batch, actor, actor_opt, critic, critic_opt, cfg, shuffle);
  CHECK(actor.layers()[0].weight == w0);
}

TEST_CASE("importance ratios equal one at the first epoch") {
  SystemConfig sys = tiny_system();
  TrainerConfig cfg = tiny_trainer();
  cfg.minibatch_size = 4096;  // one minibatch covers the whole batch
  Trainer trainer(sys, DynamicsConfig{}, cfg, Method::kDecomposed, 99);
  trainer.run_iteration();
  CHECK(trainer.last_stats().max_first_epoch_ratio_error <= 1e-9);
}

TEST_CASE("with zero multipliers the shaped reward equals the group reward") {
  SystemConfig sys = tiny_system();
  Trainer trainer(sys, DynamicsConfig{}, tiny_trainer(), Method::kDecomposed, 3);
  trainer.run_iteration();
  for (const Trainer::Rollout& r : trainer.last_rollouts())
    for (std::size_t i = 0; i < r.reward.size(); ++i)
      CHECK(r.reward[i] == r.group_reward[i]);
}

TEST_CASE("stored samples satisfy the shaped-reward identity") {
  SystemConfig sys = tiny_system();
  TrainerConfig cfg = tiny_trainer();
  Trainer trainer(sys, DynamicsConfig{}, cfg, Method::kDecomposed, 4);
  // pre-load non-trivial duals
  for (std::size_t k = 0; k < trainer.multipliers().lambda.size(); ++k)
    trainer.multipliers().lambda[k] = 0.25 * (k + 1);
  trainer.run_iteration();

  const std::vector<double>& lambda = trainer.collection_lambda();
  const double one_minus_gamma = 1.0 - cfg.gamma;
  const int slots = sys.total_user_slots();
  for (const Trainer::Rollout& r : trainer.last_rollouts()) {
    for (int t = 0; t < r.steps; ++t) {
      double penalty = 0.0;
      for (int u = 0; u < slots; ++u)
        penalty += lambda[u] * one_minus_gamma *
                   r.step_costs[static_cast<std::size_t>(t) * slots + u];
      for (int a = 0; a < r.agents; ++a) {
        const std::size_t idx = static_cast<std::size_t>(t) * r.agents + a;
        CHECK(std::abs(r.reward[idx] + penalty - r.group_reward[idx]) <= 1e-12);
      }
    }
  }
}

TEST_CASE("single-step hand check of the shaped reward") {
  // r-bar = 5, lambda = {2, 3}, costs = {0.5, 1.5}, gamma = 0.9
  const double shaped =
      5.0 - (2.0 * 0.1 * 0.5 + 3.0 * 0.1 * 1.5);
  CHECK(shaped == doctest::Approx(5.0 - 0.55).epsilon(1e-15));
}

TEST_CASE("training iterations are deterministic under a fixed seed") {
  SystemConfig sys = tiny_system();
  auto run = [&] {
    Trainer trainer(sys, DynamicsConfig{}, tiny_trainer(), Method::kDecomposed, 5);
    std::vector<EpisodeMetrics> all;
    for (int i = 0; i < 3; ++i)
      for (const EpisodeMetrics& m : trainer.run_iteration()) all.push_back(m);
    return std::make_pair(all, trainer.actor().layers()[0].weight);
  };
  const auto [metrics_a, weights_a] = run();
  const auto [metrics_b, weights_b] = run();
  REQUIRE(metrics_a.size() == metrics_b.size());
  for (std::size_t i = 0; i < metrics_a.size(); ++i) {
    CHECK(metrics_a[i].shaped_reward == metrics_b[i].shaped_reward);
    CHECK(metrics_a[i].raw_reward_bps == metrics_b[i].raw_reward_bps);
    CHECK(metrics_a[i].mean_cost_bps == metrics_b[i].mean_cost_bps);
  }
  CHECK(weights_a == weights_b);
}

TEST_CASE("all three methods run an iteration end to end") {
  SystemConfig sys = tiny_system();
  for (Method method : {Method::kDecomposed, Method::kMappo, Method::kIppo}) {
    Trainer trainer(sys, DynamicsConfig{}, tiny_trainer(), method, 6);
    const auto metrics = trainer.run_iteration();
    REQUIRE(metrics.size() == 1);
    CHECK(std::isfinite(metrics[0].shaped_reward));
    CHECK(metrics[0].raw_reward_bps >= 0.0);
    CHECK(trainer.episodes_done() == 1);
  }
}

TEST_CASE("checkpoints restore the trainer state") {
  SystemConfig sys = tiny_system();
  Trainer a(sys, DynamicsConfig{}, tiny_trainer(), Method::kDecomposed, 7);
  a.run_iteration();
  a.multipliers().lambda[0] = 1.5;
  const Checkpoint ckpt = a.make_checkpoint(111, 222);
  CHECK(ckpt.config_hash == 111);
  CHECK(ckpt.system_hash == 222);

  Trainer b(sys, DynamicsConfig{}, tiny_trainer(), Method::kDecomposed, 8);
  b.restore(ckpt);
  CHECK(b.actor().layers()[0].weight == a.actor().layers()[0].weight);
  CHECK(b.critic().layers()[0].weight == a.critic().layers()[0].weight);
  CHECK(b.multipliers().lambda[0] == 1.5);
  CHECK(b.episodes_done() == a.episodes_done());
}

TEST_CASE("trainer config invariants are enforced") {
  TrainerConfig cfg;
  cfg.clip_epsilon = 1.5;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = TrainerConfig{};
  cfg.learning_rate = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = TrainerConfig{};
  cfg.hidden.clear();
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("greedy actions are deterministic and legal") {
  SystemConfig sys = tiny_system();
  Trainer trainer(sys, DynamicsConfig{}, tiny_trainer(), Method::kDecomposed, 9);
  trainer.run_iteration();
  Environment env(sys, DynamicsConfig{}, Environment::Mode::kEpisodic, 10);
  env.reset(0);
  const JointAction a = greedy_joint_action(env, trainer.actor(), Method::kDecomposed);
  const JointAction b = greedy_joint_action(env, trainer.actor(), Method::kDecomposed);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    CHECK(a[i].assignment == b[i].assignment);
  CHECK_NOTHROW(env.evaluate(a));
}
