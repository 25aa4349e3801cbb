/*
 * Copyright (c) 2026 The corra authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#ifndef CORRA_TRAINER_HPP
#define CORRA_TRAINER_HPP

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "corra/checkpoint.hpp"
#include "corra/env.hpp"
#include "corra/nn.hpp"

namespace corra {

/// Learning methods: the SRB-decomposed formulation with sequential per-BS
/// agents, and the undecomposed one-agent-per-BS baselines.
enum class Method { kDecomposed, kMappo, kIppo };

Method method_from_string(const std::string& name);
std::string method_to_string(Method method);

struct TrainerConfig {
  double learning_rate = 5e-5;
  double gamma = 0.9;
  int minibatch_size = 64;
  double clip_epsilon = 0.2;
  double gae_lambda = 0.95;
  double entropy_coef = 0.01;
  double dual_rate = 1e-3;
  int epochs_per_batch = 4;
  int rollout_episodes = 1;  // episodes per worker per update
  double lambda_max = 100.0;
  double grad_norm_clip = 0.5;
  double reward_scale = 1e-6;  // internal rate unit relative to bits/s
  std::vector<int> hidden{256, 256};
  Activation activation = Activation::kTanh;

  void validate() const;
  bool operator==(const TrainerConfig&) const = default;
};

/// Non-negative per-user dual variables with projected subgradient ascent.
struct Multipliers {
  std::vector<double> lambda;
  double dual_rate = 1e-3;
  double lambda_max = 100.0;

  Multipliers() = default;
  Multipliers(int user_slots, double rate, double max)
      : lambda(user_slots, 0.0), dual_rate(rate), lambda_max(max) {}

  /// lambda_k <- clip(lambda_k + rate * mean_cost_k, 0, lambda_max).
  void update(std::span<const double> mean_costs);
  double mean() const;
  double max() const;
};

/// Raw generalized-advantage recursion over one trajectory. `values` has
/// T + 1 entries (bootstrap last); `done[t]` = 1 cuts the bootstrap chain.
/// Outputs are unnormalized; returns[t] = advantage[t] + values[t].
void compute_gae(std::span<const double> rewards,
                 std::span<const double> values,
                 std::span<const std::uint8_t> done, double gamma,
                 double gae_lambda, std::span<double> advantages,
                 std::span<double> returns);

/// Flattened on-policy batch for one update: factorized categorical actions
/// over `slots` heads of `classes` classes sharing a per-sample mask.
struct PpoBatch {
  int slots = 0;
  int classes = 0;
  Mat obs;                          // obs_dim x NA
  std::vector<int> actions;         // NA * slots
  std::vector<std::uint8_t> masks;  // NA * classes
  std::vector<double> logp_old;     // NA
  std::vector<double> advantages;   // NA

  Mat critic_obs;                    // critic_dim x NC
  std::vector<double> critic_target; // NC

  int sample_count() const { return static_cast<int>(logp_old.size()); }
  int critic_count() const { return static_cast<int>(critic_target.size()); }
};

struct PpoStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
  int skipped_minibatches = 0;
  int applied_minibatches = 0;
  double max_first_epoch_ratio_error = 0.0;  // |ratio - 1| before any update
};

/// Clipped-surrogate PPO epoch loop with per-minibatch advantage
/// normalization, entropy bonus, gradient-norm clipping, and non-finite
/// minibatch skipping. Deterministic given the shuffle stream.
PpoStats ppo_update(const PpoBatch& batch, Mlp& actor, AdamOptimizer& actor_opt,
                    Mlp& critic, AdamOptimizer& critic_opt,
                    const TrainerConfig& cfg, CounterRng& shuffle_rng);

struct EpisodeMetrics {
  std::uint64_t episode = 0;
  double shaped_reward = 0.0;     // scaled units, lagrangian-shaped
  double raw_reward_bps = 0.0;    // bits/s per active user
  double mean_cost_bps = 0.0;     // bits/s per active user
  double lambda_mean = 0.0;
  double lambda_max = 0.0;
  double qos_miss_per_step = 0.0;
  double throughput_bps = 0.0;
  double active_users = 0.0;
};

/// Constrained multi-agent PPO driver: sequential rollout collection,
/// Lagrangian reward shaping, clipped updates, and dual ascent, on either
/// the decomposed or a baseline formulation.
class Trainer {
 public:
  /// One collected episode, flattened (t, agent)-major.
  struct Rollout {
    int steps = 0;
    int agents = 0;
    int critic_per_step = 0;
    std::vector<double> obs;
    std::vector<int> actions;
    std::vector<std::uint8_t> masks;
    std::vector<double> logp;
    std::vector<double> reward;        // shaped, scaled units
    std::vector<double> value;
    std::vector<double> group_reward;  // raw per-sample group reward, scaled
    std::vector<double> step_costs;    // [t][user_slot], scaled
    std::vector<double> critic_obs;
    std::vector<double> critic_value;
    std::vector<double> cost_mean;     // per user slot, scaled
  };

  Trainer(const SystemConfig& sys, const DynamicsConfig& dyn,
          const TrainerConfig& cfg, Method method, std::uint64_t seed,
          int workers = 1);

  /// One collect -> GAE -> PPO -> dual-update cycle; returns the metrics of
  /// the episodes collected this iteration (workers * rollout_episodes).
  std::vector<EpisodeMetrics> run_iteration();

  std::uint64_t episodes_done() const { return episodes_done_; }
  Method method() const { return method_; }
  const TrainerConfig& config() const { return cfg_; }
  const Multipliers& multipliers() const { return multipliers_; }
  Multipliers& multipliers() { return multipliers_; }
  const Mlp& actor() const { return actor_; }
  const Mlp& critic() const { return critic_; }
  const PpoStats& last_stats() const { return last_stats_; }

  Checkpoint make_checkpoint(std::uint64_t config_hash,
                             std::uint64_t system_hash) const;
  void restore(const Checkpoint& ckpt);

  int obs_dim() const;
  int critic_dim() const;
  int action_slots() const;

  /// Rollouts of the most recent iteration, kept for inspection.
  const std::vector<Rollout>& last_rollouts() const { return last_rollouts_; }
  /// Dual variables as they were when the last rollouts were collected.
  const std::vector<double>& collection_lambda() const {
    return collection_lambda_;
  }

 private:
  void collect_episode(Environment& env, std::uint64_t episode, Rollout* out,
                       EpisodeMetrics* metrics) const;
  void build_batch(const std::vector<Rollout>& rollouts, PpoBatch* batch);

  SystemConfig sys_;
  DynamicsConfig dyn_;
  TrainerConfig cfg_;
  Method method_;
  std::uint64_t seed_ = 0;
  int workers_ = 1;
  std::uint64_t episodes_done_ = 0;
  std::uint64_t updates_done_ = 0;

  std::vector<std::unique_ptr<Environment>> envs_;
  Mlp actor_;
  Mlp critic_;
  AdamOptimizer actor_opt_;
  AdamOptimizer critic_opt_;
  Multipliers multipliers_;
  PpoStats last_stats_;
  std::vector<Rollout> last_rollouts_;
  std::vector<double> collection_lambda_;
};

/// Deterministic (argmax) joint action of a trained actor on the current
/// environment state, following the same sequential protocol as training.
JointAction greedy_joint_action(const Environment& env, const Mlp& actor,
                                Method method);

}  // namespace corra

#endif  // CORRA_TRAINER_HPP
