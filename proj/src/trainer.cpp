/*
 * Copyright (c) 2026 The corra authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include "corra/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "corra/errors.hpp"

namespace corra {

namespace {
constexpr std::uint64_t kStreamInitActor = 10;
constexpr std::uint64_t kStreamInitCritic = 11;
constexpr std::uint64_t kStreamAct = 12;
constexpr std::uint64_t kStreamShuffle = 13;
}  // namespace

Method method_from_string(const std::string& name) {
  if (name == "decomposed") return Method::kDecomposed;
  if (name == "mappo") return Method::kMappo;
  if (name == "ippo") return Method::kIppo;
  throw ConfigError("unknown method: " + name);
}

std::string method_to_string(Method method) {
  switch (method) {
    case Method::kDecomposed: return "decomposed";
    case Method::kMappo: return "mappo";
    case Method::kIppo: return "ippo";
  }
  return "?";
}

void TrainerConfig::validate() const {
  if (learning_rate <= 0.0) throw ConfigError("trainer: learning_rate must be > 0");
  if (gamma <= 0.0 || gamma >= 1.0)
    throw ConfigError("trainer: gamma must be in (0, 1)");
  if (minibatch_size < 1) throw ConfigError("trainer: minibatch_size must be >= 1");
  if (clip_epsilon <= 0.0 || clip_epsilon >= 1.0)
    throw ConfigError("trainer: clip_epsilon must be in (0, 1)");
  if (gae_lambda < 0.0 || gae_lambda > 1.0)
    throw ConfigError("trainer: gae_lambda must be in [0, 1]");
  if (entropy_coef < 0.0) throw ConfigError("trainer: entropy_coef must be >= 0");
  if (dual_rate <= 0.0) throw ConfigError("trainer: dual_rate must be > 0");
  if (epochs_per_batch < 1) throw ConfigError("trainer: epochs_per_batch must be >= 1");
  if (rollout_episodes < 1) throw ConfigError("trainer: rollout_episodes must be >= 1");
  if (lambda_max <= 0.0) throw ConfigError("trainer: lambda_max must be > 0");
  if (grad_norm_clip <= 0.0) throw ConfigError("trainer: grad_norm_clip must be > 0");
  if (reward_scale <= 0.0) throw ConfigError("trainer: reward_scale must be > 0");
  if (hidden.empty()) throw ConfigError("trainer: at least one hidden layer");
  for (int h : hidden)
    if (h < 1) throw ConfigError("trainer: hidden widths must be >= 1");
}

void Multipliers::update(std::span<const double> mean_costs) {
  if (mean_costs.size() != lambda.size())
    throw ContractError("multipliers: cost vector size mismatch");
  for (std::size_t k = 0; k < lambda.size(); ++k) {
    lambda[k] = std::clamp(lambda[k] + dual_rate * mean_costs[k], 0.0, lambda_max);
  }
}

double Multipliers::mean() const {
  if (lambda.empty()) return 0.0;
  double s = 0.0;
  for (double v : lambda) s += v;
  return s / static_cast<double>(lambda.size());
}

double Multipliers::max() const {
  double s = 0.0;
  for (double v : lambda) s = std::max(s, v);
  return s;
}

void compute_gae(std::span<const double> rewards, std::span<const double> values,
                 std::span<const std::uint8_t> done, double gamma,
                 double gae_lambda, std::span<double> advantages,
                 std::span<double> returns) {
  const int t_count = static_cast<int>(rewards.size());
  if (static_cast<int>(values.size()) != t_count + 1 ||
      static_cast<int>(done.size()) != t_count ||
      static_cast<int>(advantages.size()) != t_count ||
      static_cast<int>(returns.size()) != t_count)
    throw ContractError("compute_gae: span sizes inconsistent");
  double carry = 0.0;
  for (int t = t_count - 1; t >= 0; --t) {
    const double nonterminal = done[t] ? 0.0 : 1.0;
    const double delta =
        rewards[t] + gamma * values[t + 1] * nonterminal - values[t];
    carry = delta + gamma * gae_lambda * nonterminal * carry;
    advantages[t] = carry;
    returns[t] = carry + values[t];
  }
}

// ---------------------------------------------------------------------------
// PPO update
// ---------------------------------------------------------------------------

namespace {

void shuffle_indices(std::vector<int>& idx, CounterRng& rng) {
  for (int i = static_cast<int>(idx.size()) - 1; i > 0; --i) {
    const int j = static_cast<int>(rng.below(static_cast<std::uint64_t>(i) + 1));
    std::swap(idx[i], idx[j]);
  }
}

}  // namespace

PpoStats ppo_update(const PpoBatch& batch, Mlp& actor, AdamOptimizer& actor_opt,
                    Mlp& critic, AdamOptimizer& critic_opt,
                    const TrainerConfig& cfg, CounterRng& shuffle_rng) {
  const int na = batch.sample_count();
  const int nc = batch.critic_count();
  const int slots = batch.slots;
  const int classes = batch.classes;
  if (na == 0) throw ContractError("ppo_update: empty batch");

  PpoStats stats;
  Mlp::Grads actor_grads = actor.zero_grads();
  Mlp::Grads critic_grads = critic.zero_grads();

  std::vector<int> actor_idx(na);
  for (int i = 0; i < na; ++i) actor_idx[i] = i;
  std::vector<int> critic_idx(nc);
  for (int i = 0; i < nc; ++i) critic_idx[i] = i;

  double policy_loss_sum = 0.0, entropy_sum = 0.0, clip_sum = 0.0;
  long policy_terms = 0;
  bool first_minibatch = true;

  for (int epoch = 0; epoch < cfg.epochs_per_batch; ++epoch) {
    shuffle_indices(actor_idx, shuffle_rng);
    for (int start = 0; start < na; start += cfg.minibatch_size) {
      const int b = std::min(cfg.minibatch_size, na - start);

      Mat x(actor.input_dim(), b);
      for (int i = 0; i < b; ++i) x.col(i) = batch.obs.col(actor_idx[start + i]);

      Mlp::Cache cache;
      Mat logits = actor.forward(x, &cache);

      // per-sample probabilities, log-probs, entropies
      Mat probs(slots * classes, b);
      std::vector<double> logp_new(b, 0.0), ent(b, 0.0);
      for (int i = 0; i < b; ++i) {
        const int s_idx = actor_idx[start + i];
        const std::uint8_t* mask = &batch.masks[static_cast<std::size_t>(s_idx) * classes];
        for (int s = 0; s < slots; ++s) {
          MaskedCategorical dist(
              std::span<const double>(logits.col(i).data() + s * classes, classes),
              std::span<const std::uint8_t>(mask, classes));
          const int a = batch.actions[static_cast<std::size_t>(s_idx) * slots + s];
          logp_new[i] += dist.log_prob(a);
          ent[i] += dist.entropy();
          for (int c = 0; c < classes; ++c)
            probs(s * classes + c, i) = dist.probabilities()[c];
        }
      }

      // minibatch advantage normalization
      double adv_mean = 0.0, adv_sq = 0.0;
      for (int i = 0; i < b; ++i) adv_mean += batch.advantages[actor_idx[start + i]];
      adv_mean /= b;
      for (int i = 0; i < b; ++i) {
        const double d = batch.advantages[actor_idx[start + i]] - adv_mean;
        adv_sq += d * d;
      }
      const double adv_std = std::sqrt(adv_sq / b) + 1e-8;

      Mat dlogits = Mat::Zero(slots * classes, b);
      double mb_loss = 0.0;
      for (int i = 0; i < b; ++i) {
        const int s_idx = actor_idx[start + i];
        const double adv =
            (batch.advantages[s_idx] - adv_mean) / adv_std;
        const double ratio = std::exp(logp_new[i] - batch.logp_old[s_idx]);
        if (first_minibatch && epoch == 0)
          stats.max_first_epoch_ratio_error =
              std::max(stats.max_first_epoch_ratio_error, std::abs(ratio - 1.0));
        const double clipped =
            std::clamp(ratio, 1.0 - cfg.clip_epsilon, 1.0 + cfg.clip_epsilon);
        const double pg1 = ratio * adv;
        const double pg2 = clipped * adv;
        mb_loss += -std::min(pg1, pg2) - cfg.entropy_coef * ent[i];
        if (std::abs(ratio - 1.0) > cfg.clip_epsilon) clip_sum += 1.0;
        ++policy_terms;
        entropy_sum += ent[i];

        const double coef = pg1 <= pg2 ? -adv * ratio : 0.0;
        for (int s = 0; s < slots; ++s) {
          const int a = batch.actions[static_cast<std::size_t>(s_idx) * slots + s];
          double h_slot = 0.0;
          for (int c = 0; c < classes; ++c) {
            const double p = probs(s * classes + c, i);
            if (p > 0.0) h_slot -= p * std::log(p);
          }
          for (int c = 0; c < classes; ++c) {
            const double p = probs(s * classes + c, i);
            double g = coef * ((c == a ? 1.0 : 0.0) - p);
            if (p > 0.0)
              g += cfg.entropy_coef * p * (std::log(p) + h_slot);
            dlogits(s * classes + c, i) = g / b;
          }
        }
      }
      policy_loss_sum += mb_loss / b;

      if (!std::isfinite(mb_loss) || !dlogits.allFinite()) {
        ++stats.skipped_minibatches;
        first_minibatch = false;
        continue;
      }

      actor_grads.set_zero();
      actor.backward(cache, dlogits, &actor_grads);
      if (!actor_grads.all_finite()) {
        ++stats.skipped_minibatches;
        first_minibatch = false;
        continue;
      }
      clip_grad_norm(actor_grads, cfg.grad_norm_clip);
      actor_opt.step(actor, actor_grads);
      ++stats.applied_minibatches;
      first_minibatch = false;
    }

    // critic regression on the grouped targets
    shuffle_indices(critic_idx, shuffle_rng);
    for (int start = 0; start < nc; start += cfg.minibatch_size) {
      const int b = std::min(cfg.minibatch_size, nc - start);
      Mat x(critic.input_dim(), b);
      for (int i = 0; i < b; ++i) x.col(i) = batch.critic_obs.col(critic_idx[start + i]);
      Mlp::Cache cache;
      Mat v = critic.forward(x, &cache);
      Mat dv(1, b);
      double loss = 0.0;
      for (int i = 0; i < b; ++i) {
        const double err = v(0, i) - batch.critic_target[critic_idx[start + i]];
        loss += 0.5 * err * err;
        dv(0, i) = err / b;
      }
      stats.value_loss += loss / b;
      if (!std::isfinite(loss)) {
        ++stats.skipped_minibatches;
        continue;
      }
      critic_grads.set_zero();
      critic.backward(cache, dv, &critic_grads);
      if (!critic_grads.all_finite()) {
        ++stats.skipped_minibatches;
        continue;
      }
      clip_grad_norm(critic_grads, cfg.grad_norm_clip);
      critic_opt.step(critic, critic_grads);
      ++stats.applied_minibatches;
    }
  }

  if (policy_terms > 0) {
    stats.entropy = entropy_sum / policy_terms;
    stats.clip_fraction = clip_sum / policy_terms;
  }
  stats.policy_loss = policy_loss_sum;
  return stats;
}

// ---------------------------------------------------------------------------
// Trainer
// ---------------------------------------------------------------------------

Trainer::Trainer(const SystemConfig& sys, const DynamicsConfig& dyn,
                 const TrainerConfig& cfg, Method method, std::uint64_t seed,
                 int workers)
    : sys_(sys), dyn_(dyn), cfg_(cfg), method_(method), seed_(seed),
      workers_(std::max(1, workers)) {
  sys_.validate();
  cfg_.validate();
  if (sys_.gamma != cfg_.gamma) sys_.gamma = cfg_.gamma;

  for (int w = 0; w < workers_; ++w)
    envs_.push_back(std::make_unique<Environment>(
        sys_, dyn_, Environment::Mode::kEpisodic, seed_));

  MlpConfig actor_cfg;
  actor_cfg.input_dim = obs_dim();
  actor_cfg.hidden = cfg_.hidden;
  actor_cfg.output_dim = action_slots() * sys_.action_classes();
  actor_cfg.activation = cfg_.activation;
  actor_cfg.output_gain = 0.01;
  CounterRng actor_rng = CounterRng(seed_).child(kStreamInitActor);
  actor_ = Mlp(actor_cfg, actor_rng);

  MlpConfig critic_cfg;
  critic_cfg.input_dim = critic_dim();
  critic_cfg.hidden = cfg_.hidden;
  critic_cfg.output_dim = 1;
  critic_cfg.activation = cfg_.activation;
  critic_cfg.output_gain = 1.0;
  CounterRng critic_rng = CounterRng(seed_).child(kStreamInitCritic);
  critic_ = Mlp(critic_cfg, critic_rng);

  actor_opt_ = AdamOptimizer(actor_, cfg_.learning_rate);
  critic_opt_ = AdamOptimizer(critic_, cfg_.learning_rate);
  multipliers_ = Multipliers(sys_.total_user_slots(), cfg_.dual_rate,
                             cfg_.lambda_max);
}

int Trainer::obs_dim() const {
  return method_ == Method::kDecomposed ? Environment::obs_dim(sys_)
                                        : Environment::bs_obs_dim(sys_);
}

int Trainer::critic_dim() const {
  switch (method_) {
    case Method::kDecomposed:
      return Environment::state_dim(sys_) + sys_.srb_count;
    case Method::kMappo:
      return Environment::state_dim(sys_);
    case Method::kIppo:
      return Environment::bs_obs_dim(sys_);
  }
  return 0;
}

int Trainer::action_slots() const {
  return method_ == Method::kDecomposed ? sys_.srb_size() : sys_.subchannels;
}

void Trainer::collect_episode(Environment& env, std::uint64_t episode,
                              Rollout* out, EpisodeMetrics* metrics) const {
  const int n_bs = sys_.bs_count();
  const int m_count = sys_.srb_count;
  const int classes = sys_.action_classes();
  const int slots = action_slots();
  const int t_count = sys_.episode_length;
  const int agents = method_ == Method::kDecomposed ? n_bs * m_count : n_bs;
  const int odim = obs_dim();
  const int cdim = critic_dim();
  const int critic_per_step = method_ == Method::kDecomposed
                                  ? m_count
                                  : (method_ == Method::kIppo ? n_bs : 1);
  const double scale = cfg_.reward_scale;
  const double one_minus_gamma = 1.0 - cfg_.gamma;

  env.reset(episode);
  CounterRng act_rng = CounterRng(seed_).child(kStreamAct).child(episode);

  out->steps = t_count;
  out->agents = agents;
  out->critic_per_step = critic_per_step;
  const std::size_t na = static_cast<std::size_t>(t_count) * agents;
  out->obs.assign(na * odim, 0.0);
  out->actions.assign(na * slots, 0);
  out->masks.assign(na * classes, 0);
  out->logp.assign(na, 0.0);
  out->reward.assign(na, 0.0);
  out->value.assign(na, 0.0);
  out->critic_obs.assign(static_cast<std::size_t>(t_count) * critic_per_step * cdim, 0.0);
  out->critic_value.assign(static_cast<std::size_t>(t_count) * critic_per_step, 0.0);
  out->cost_mean.assign(sys_.total_user_slots(), 0.0);
  out->group_reward.assign(na, 0.0);
  out->step_costs.assign(static_cast<std::size_t>(t_count) * sys_.total_user_slots(), 0.0);

  metrics->episode = episode;
  double shaped_sum = 0.0, raw_sum = 0.0, cost_sum = 0.0, miss_sum = 0.0;
  double tput_sum = 0.0, active_sum = 0.0;

  for (int t = 0; t < t_count; ++t) {
    JointAction joint(static_cast<std::size_t>(n_bs) * m_count);
    const std::vector<double> state = env.state_features();

    auto sample_agent = [&](int agent_index, const Observation& obs,
                            const std::vector<std::uint8_t>& mask,
                            const Vec& logits) -> AgentAction {
      AgentAction action;
      action.assignment.resize(slots);
      const std::size_t base = static_cast<std::size_t>(t) * agents + agent_index;
      double logp = 0.0;
      for (int s = 0; s < slots; ++s) {
        MaskedCategorical dist(
            std::span<const double>(logits.data() + s * classes, classes),
            std::span<const std::uint8_t>(mask.data(), classes));
        const int a = dist.sample(act_rng);
        action.assignment[s] = a;
        logp += dist.log_prob(a);
        out->actions[base * slots + s] = a;
      }
      std::copy(obs.features.begin(), obs.features.end(),
                out->obs.begin() + base * odim);
      std::copy(mask.begin(), mask.end(), out->masks.begin() + base * classes);
      out->logp[base] = logp;
      return action;
    };

    if (method_ == Method::kDecomposed) {
      std::vector<std::vector<AgentAction>> prior(n_bs);
      for (int m = 0; m < m_count; ++m) {
        Mat obs_batch(odim, n_bs);
        std::vector<Observation> observations(n_bs);
        for (int n = 0; n < n_bs; ++n) {
          observations[n] = env.observe(
              n, m, std::span<const AgentAction>(prior[n].data(), prior[n].size()));
          obs_batch.col(n) = Eigen::Map<const Vec>(
              observations[n].features.data(), odim);
        }
        const Mat logits = actor_.forward(obs_batch);
        for (int n = 0; n < n_bs; ++n) {
          const std::vector<std::uint8_t> mask = env.action_mask(n);
          const AgentAction action =
              sample_agent(m * n_bs + n, observations[n], mask, logits.col(n));
          prior[n].push_back(action);
          joint[static_cast<std::size_t>(n) * m_count + m] = action;
        }
      }
      // one centralized critic evaluation per (step, group)
      Mat cobs(cdim, m_count);
      for (int m = 0; m < m_count; ++m) {
        Vec col = Vec::Zero(cdim);
        std::copy(state.begin(), state.end(), col.data());
        col[static_cast<int>(state.size()) + m] = 1.0;
        cobs.col(m) = col;
      }
      const Mat values = critic_.forward(cobs);
      for (int m = 0; m < m_count; ++m) {
        const std::size_t c_base = static_cast<std::size_t>(t) * critic_per_step + m;
        std::copy(cobs.col(m).data(), cobs.col(m).data() + cdim,
                  out->critic_obs.begin() + c_base * cdim);
        out->critic_value[c_base] = values(0, m);
        for (int n = 0; n < n_bs; ++n)
          out->value[static_cast<std::size_t>(t) * agents + m * n_bs + n] =
              values(0, m);
      }
    } else {
      Mat obs_batch(odim, n_bs);
      std::vector<Observation> observations(n_bs);
      for (int n = 0; n < n_bs; ++n) {
        observations[n] = env.observe_bs(n);
        obs_batch.col(n) =
            Eigen::Map<const Vec>(observations[n].features.data(), odim);
      }
      const Mat logits = actor_.forward(obs_batch);
      for (int n = 0; n < n_bs; ++n) {
        const std::vector<std::uint8_t> mask = env.action_mask(n);
        const AgentAction full = sample_agent(n, observations[n], mask,
                                              logits.col(n));
        // split the full-band assignment into the M per-SRB actions
        for (int m = 0; m < m_count; ++m) {
          AgentAction part;
          part.assignment.assign(
              full.assignment.begin() + static_cast<std::size_t>(m) * sys_.srb_size(),
              full.assignment.begin() + static_cast<std::size_t>(m + 1) * sys_.srb_size());
          joint[static_cast<std::size_t>(n) * m_count + m] = std::move(part);
        }
      }

      if (method_ == Method::kMappo) {
        const Vec cobs = Eigen::Map<const Vec>(state.data(), cdim);
        const double v = critic_.forward(cobs)(0);
        std::copy(state.begin(), state.end(),
                  out->critic_obs.begin() + static_cast<std::size_t>(t) * cdim);
        out->critic_value[t] = v;
        for (int n = 0; n < n_bs; ++n)
          out->value[static_cast<std::size_t>(t) * agents + n] = v;
      } else {  // IPPO: local critics
        const Mat values = critic_.forward(obs_batch);
        for (int n = 0; n < n_bs; ++n) {
          const std::size_t c_base = static_cast<std::size_t>(t) * critic_per_step + n;
          std::copy(obs_batch.col(n).data(), obs_batch.col(n).data() + cdim,
                    out->critic_obs.begin() + c_base * cdim);
          out->critic_value[c_base] = values(0, n);
          out->value[static_cast<std::size_t>(t) * agents + n] = values(0, n);
        }
      }
    }

    const StepOutcome outcome = env.step(joint);

    double penalty = 0.0;
    double cost_total = 0.0;
    for (int u = 0; u < sys_.total_user_slots(); ++u) {
      const double c = outcome.cost_bps[u] * scale;
      penalty += multipliers_.lambda[u] * one_minus_gamma * c;
      out->cost_mean[u] += c;
      out->step_costs[static_cast<std::size_t>(t) * sys_.total_user_slots() + u] = c;
      cost_total += outcome.cost_bps[u];
    }

    if (method_ == Method::kDecomposed) {
      for (int m = 0; m < m_count; ++m) {
        const double raw = outcome.group_reward[m] * scale;
        const double shaped = raw - penalty;
        for (int n = 0; n < n_bs; ++n) {
          const std::size_t idx = static_cast<std::size_t>(t) * agents + m * n_bs + n;
          out->reward[idx] = shaped;
          out->group_reward[idx] = raw;
        }
      }
    } else {
      const double raw = outcome.reward * scale;
      const double shaped = raw - penalty;
      for (int n = 0; n < n_bs; ++n) {
        const std::size_t idx = static_cast<std::size_t>(t) * agents + n;
        out->reward[idx] = shaped;
        out->group_reward[idx] = raw;
      }
    }

    const double active = std::max(outcome.active_users, 1);
    shaped_sum += outcome.reward * scale - penalty;
    raw_sum += outcome.reward;
    cost_sum += cost_total / active;
    for (int u = 0; u < sys_.total_user_slots(); ++u)
      miss_sum += outcome.qos_miss[u];
    tput_sum += outcome.throughput_bps;
    active_sum += outcome.active_users;
  }

  for (double& c : out->cost_mean) c /= t_count;

  metrics->shaped_reward = shaped_sum / t_count;
  metrics->raw_reward_bps = raw_sum / t_count;
  metrics->mean_cost_bps = cost_sum / t_count;
  metrics->lambda_mean = multipliers_.mean();
  metrics->lambda_max = multipliers_.max();
  metrics->qos_miss_per_step = miss_sum / t_count;
  metrics->throughput_bps = tput_sum / t_count;
  metrics->active_users = active_sum / t_count;
}

void Trainer::build_batch(const std::vector<Rollout>& rollouts, PpoBatch* batch) {
  const int slots = action_slots();
  const int classes = sys_.action_classes();
  const int odim = obs_dim();
  const int cdim = critic_dim();

  std::size_t na = 0, nc = 0;
  for (const Rollout& r : rollouts) {
    na += static_cast<std::size_t>(r.steps) * r.agents;
    nc += static_cast<std::size_t>(r.steps) * r.critic_per_step;
  }

  batch->slots = slots;
  batch->classes = classes;
  batch->obs.resize(odim, static_cast<Eigen::Index>(na));
  batch->actions.resize(na * slots);
  batch->masks.resize(na * classes);
  batch->logp_old.resize(na);
  batch->advantages.resize(na);
  batch->critic_obs.resize(cdim, static_cast<Eigen::Index>(nc));
  batch->critic_target.resize(nc);

  std::size_t a_at = 0, c_at = 0;
  std::vector<double> rew, val, adv, ret;
  std::vector<std::uint8_t> done;
  for (const Rollout& r : rollouts) {
    const int t_count = r.steps;
    const int agents = r.agents;
    rew.resize(t_count);
    val.resize(t_count + 1);
    adv.resize(t_count);
    ret.resize(t_count);
    done.assign(t_count, 0);
    done[t_count - 1] = 1;  // episodes terminate at the horizon

    // per-agent trajectories
    std::vector<double> agent_adv(static_cast<std::size_t>(t_count) * agents);
    std::vector<double> agent_ret(static_cast<std::size_t>(t_count) * agents);
    for (int a = 0; a < agents; ++a) {
      for (int t = 0; t < t_count; ++t) {
        rew[t] = r.reward[static_cast<std::size_t>(t) * agents + a];
        val[t] = r.value[static_cast<std::size_t>(t) * agents + a];
      }
      val[t_count] = 0.0;
      compute_gae(rew, val, done, cfg_.gamma, cfg_.gae_lambda, adv, ret);
      for (int t = 0; t < t_count; ++t) {
        agent_adv[static_cast<std::size_t>(t) * agents + a] = adv[t];
        agent_ret[static_cast<std::size_t>(t) * agents + a] = ret[t];
      }
    }

    for (std::size_t i = 0; i < static_cast<std::size_t>(t_count) * agents; ++i) {
      batch->obs.col(static_cast<Eigen::Index>(a_at)) =
          Eigen::Map<const Vec>(&r.obs[i * odim], odim);
      std::copy(&r.actions[i * slots], &r.actions[i * slots] + slots,
                batch->actions.begin() + a_at * slots);
      std::copy(&r.masks[i * classes], &r.masks[i * classes] + classes,
                batch->masks.begin() + a_at * classes);
      batch->logp_old[a_at] = r.logp[i];
      batch->advantages[a_at] = agent_adv[i];
      ++a_at;
    }

    // critic targets from a representative agent of each grouped sample
    for (int t = 0; t < t_count; ++t) {
      for (int c = 0; c < r.critic_per_step; ++c) {
        const std::size_t c_idx = static_cast<std::size_t>(t) * r.critic_per_step + c;
        batch->critic_obs.col(static_cast<Eigen::Index>(c_at)) =
            Eigen::Map<const Vec>(&r.critic_obs[c_idx * cdim], cdim);
        int rep_agent = 0;
        if (method_ == Method::kDecomposed) rep_agent = c * sys_.bs_count();
        else if (method_ == Method::kIppo) rep_agent = c;
        batch->critic_target[c_at] =
            agent_ret[static_cast<std::size_t>(t) * agents + rep_agent];
        ++c_at;
      }
    }
  }
}

std::vector<EpisodeMetrics> Trainer::run_iteration() {
  const int per_worker = cfg_.rollout_episodes;
  const int episode_count = workers_ * per_worker;
  std::vector<Rollout> rollouts(episode_count);
  std::vector<EpisodeMetrics> metrics(episode_count);
  collection_lambda_ = multipliers_.lambda;

  auto collect_worker = [&](int w) {
    for (int e = 0; e < per_worker; ++e) {
      const int slot = w * per_worker + e;
      collect_episode(*envs_[w], episodes_done_ + slot, &rollouts[slot],
                      &metrics[slot]);
    }
  };

  if (workers_ == 1) {
    collect_worker(0);
  } else {
    std::vector<std::thread> threads;
    threads.reserve(workers_);
    for (int w = 0; w < workers_; ++w) threads.emplace_back(collect_worker, w);
    for (auto& t : threads) t.join();
  }

  PpoBatch batch;
  build_batch(rollouts, &batch);

  CounterRng shuffle_rng =
      CounterRng(seed_).child(kStreamShuffle).child(updates_done_);
  last_stats_ = ppo_update(batch, actor_, actor_opt_, critic_, critic_opt_,
                           cfg_, shuffle_rng);

  if (!actor_.parameters_finite() || !critic_.parameters_finite())
    throw TrainingCollapsed("non-finite parameters after update");
  if (last_stats_.applied_minibatches == 0)
    throw TrainingCollapsed("every minibatch skipped as non-finite");

  // dual ascent on the rollout-averaged costs, once per batch
  std::vector<double> mean_costs(sys_.total_user_slots(), 0.0);
  for (const Rollout& r : rollouts)
    for (std::size_t u = 0; u < mean_costs.size(); ++u)
      mean_costs[u] += r.cost_mean[u];
  for (double& c : mean_costs) c /= episode_count;
  multipliers_.update(mean_costs);

  episodes_done_ += episode_count;
  ++updates_done_;
  last_rollouts_ = std::move(rollouts);
  return metrics;
}

Checkpoint Trainer::make_checkpoint(std::uint64_t config_hash,
                                    std::uint64_t system_hash) const {
  Checkpoint ckpt;
  ckpt.config_hash = config_hash;
  ckpt.system_hash = system_hash;
  ckpt.episode = episodes_done_;
  for (auto& [name, tensor] : actor_.export_blocks("actor"))
    ckpt.add(name, std::move(tensor));
  for (auto& [name, tensor] : critic_.export_blocks("critic"))
    ckpt.add(name, std::move(tensor));
  TensorBuffer duals;
  duals.shape = {static_cast<std::int64_t>(multipliers_.lambda.size())};
  duals.values = multipliers_.lambda;
  ckpt.add("duals.lambda", std::move(duals));
  return ckpt;
}

void Trainer::restore(const Checkpoint& ckpt) {
  actor_.import_blocks("actor", ckpt.blocks);
  critic_.import_blocks("critic", ckpt.blocks);
  const TensorBuffer& duals = ckpt.get("duals.lambda");
  if (duals.values.size() != multipliers_.lambda.size())
    throw IoError("checkpoint: dual variable count mismatch");
  multipliers_.lambda = duals.values;
  episodes_done_ = ckpt.episode;
}

JointAction greedy_joint_action(const Environment& env, const Mlp& actor,
                                Method method) {
  const SystemConfig& sys = env.config();
  const int n_bs = sys.bs_count();
  const int m_count = sys.srb_count;
  const int classes = sys.action_classes();
  JointAction joint(static_cast<std::size_t>(n_bs) * m_count);

  auto pick = [&](const Vec& logits, const std::vector<std::uint8_t>& mask,
                  int slots) {
    AgentAction action;
    action.assignment.resize(slots);
    for (int s = 0; s < slots; ++s) {
      MaskedCategorical dist(
          std::span<const double>(logits.data() + s * classes, classes),
          std::span<const std::uint8_t>(mask.data(), classes));
      action.assignment[s] = dist.argmax();
    }
    return action;
  };

  if (method == Method::kDecomposed) {
    const int slots = sys.srb_size();
    std::vector<std::vector<AgentAction>> prior(n_bs);
    for (int m = 0; m < m_count; ++m) {
      for (int n = 0; n < n_bs; ++n) {
        const Observation obs = env.observe(
            n, m, std::span<const AgentAction>(prior[n].data(), prior[n].size()));
        const Vec input = Eigen::Map<const Vec>(obs.features.data(),
                                                static_cast<Eigen::Index>(obs.features.size()));
        const Vec logits = actor.forward(input);
        const AgentAction action = pick(logits, env.action_mask(n), slots);
        prior[n].push_back(action);
        joint[static_cast<std::size_t>(n) * m_count + m] = action;
      }
    }
  } else {
    const int slots = sys.subchannels;
    for (int n = 0; n < n_bs; ++n) {
      const Observation obs = env.observe_bs(n);
      const Vec input = Eigen::Map<const Vec>(obs.features.data(),
                                              static_cast<Eigen::Index>(obs.features.size()));
      const Vec logits = actor.forward(input);
      const AgentAction full = pick(logits, env.action_mask(n), slots);
      for (int m = 0; m < m_count; ++m) {
        AgentAction part;
        part.assignment.assign(
            full.assignment.begin() + static_cast<std::size_t>(m) * sys.srb_size(),
            full.assignment.begin() + static_cast<std::size_t>(m + 1) * sys.srb_size());
        joint[static_cast<std::size_t>(n) * m_count + m] = std::move(part);
      }
    }
  }
  return joint;
}

}  // namespace corra
