/*
 * Copyright (c) 2026 The corra authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include "corra/env.hpp"

#include <algorithm>
#include <cmath>

#include "corra/errors.hpp"

namespace corra {

namespace {
constexpr double kUserHeightM = 1.5;
constexpr std::uint64_t kStreamPop = 1;
constexpr std::uint64_t kStreamFade = 2;
constexpr std::uint64_t kStreamDyn = 3;
}  // namespace

void SystemConfig::validate() const {
  if (bs.empty()) throw ConfigError("system: at least one BS required");
  if (users_per_bs < 1) throw ConfigError("system: users_per_bs must be >= 1");
  if (subchannels < 1) throw ConfigError("system: subchannels must be >= 1");
  if (srb_count < 1 || subchannels % srb_count != 0)
    throw ConfigError("system: subchannels must be divisible by srb_count");
  if (subchannel_bandwidth_hz <= 0.0)
    throw ConfigError("system: subchannel bandwidth must be > 0");
  if (p_max_w <= 0.0) throw ConfigError("system: p_max must be > 0");
  if (qos_rate_bps < 0.0) throw ConfigError("system: qos rate must be >= 0");
  if (noise_density_w_hz <= 0.0)
    throw ConfigError("system: noise density must be > 0");
  if (gamma <= 0.0 || gamma >= 1.0)
    throw ConfigError("system: gamma must be in (0, 1)");
  if (episode_length < 1) throw ConfigError("system: episode_length must be >= 1");
  if (area_x_m <= 0.0 || area_y_m <= 0.0)
    throw ConfigError("system: deployment area must be positive");
  if (frame_duration_s <= 0.0)
    throw ConfigError("system: frame duration must be > 0");
}

SrbPartition build_partition(int subchannels, int srb_count) {
  if (srb_count < 1 || subchannels < 1 || subchannels % srb_count != 0)
    throw ConfigError("partition: subchannels must be divisible by srb_count");
  return SrbPartition{subchannels, srb_count, subchannels / srb_count};
}

std::vector<double> decode_power(const AgentAction& action, double p_max_w,
                                 int srb_count) {
  const int size = static_cast<int>(action.assignment.size());
  std::vector<double> power(size, 0.0);
  int active = 0;
  for (int s = 0; s < size; ++s)
    if (action.assignment[s] != 0) ++active;
  if (active == 0) return power;
  const double p = p_max_w / (static_cast<double>(active) * srb_count);
  for (int s = 0; s < size; ++s)
    if (action.assignment[s] != 0) power[s] = p;
  return power;
}

double subchannel_rate(double h_gain, double power_w, double interference_w,
                       double bandwidth_hz, double noise_density_w_hz) {
  if (h_gain < 0.0 || power_w < 0.0 || interference_w < 0.0)
    throw DomainError("rate: inputs must be non-negative");
  const double noise = noise_power(bandwidth_hz, noise_density_w_hz);
  return bandwidth_hz *
         std::log2(1.0 + h_gain * power_w / (interference_w + noise));
}

double StepOutcome::user_rate(int user_slot) const {
  double sum = 0.0;
  for (int f = 0; f < subchannels; ++f) sum += rate(user_slot, f);
  return sum;
}

ObsLayout ObsLayout::of(const SystemConfig& cfg) {
  ObsLayout l;
  const int n = cfg.bs_count();
  const int slots = cfg.total_user_slots();
  l.own_gains = 0;
  l.pathloss = l.own_gains + cfg.srb_size() * cfg.users_per_bs;
  l.psi_rate = l.pathloss + n * slots;
  l.presence = l.psi_rate + cfg.users_per_bs;
  l.bs_onehot = l.presence + slots;
  l.srb_onehot = l.bs_onehot + n;
  l.total = l.srb_onehot + cfg.srb_count;
  return l;
}

int Environment::obs_dim(const SystemConfig& cfg) { return ObsLayout::of(cfg).total; }

int Environment::bs_obs_dim(const SystemConfig& cfg) {
  // full-band gains + pathloss + presence + BS one-hot
  return cfg.subchannels * cfg.users_per_bs +
         cfg.bs_count() * cfg.total_user_slots() + cfg.total_user_slots() +
         cfg.bs_count();
}

int Environment::state_dim(const SystemConfig& cfg) {
  const int slots = cfg.total_user_slots();
  return cfg.bs_count() * slots * cfg.subchannels + cfg.bs_count() * slots +
         slots;
}

Environment::Environment(const SystemConfig& cfg, const DynamicsConfig& dyn,
                         Mode mode, std::uint64_t seed)
    : cfg_(cfg),
      dyn_(dyn),
      mode_(mode),
      seed_(seed),
      partition_(build_partition(cfg.subchannels, cfg.srb_count)),
      population_(cfg, dyn),
      user_slots_(cfg.total_user_slots()),
      noise_w_(noise_power(cfg.subchannel_bandwidth_hz, cfg.noise_density_w_hz)) {
  cfg_.validate();
  const std::size_t links = static_cast<std::size_t>(cfg_.bs_count()) * user_slots_;
  pathloss_db_.assign(links, 0.0);
  link_los_.assign(links, 0);
  fading_.assign(links * cfg_.subchannels, FadingState{});
  gain_.assign(links * cfg_.subchannels, 0.0);
  reset(0);
}

void Environment::reset(std::uint64_t episode) {
  episode_ = episode;
  t_ = 0;
  events_.clear();
  population_ = Population(cfg_, dyn_);
  if (mode_ == Mode::kEpisodic) {
    CounterRng pop_rng = CounterRng(seed_).child(kStreamPop).child(episode);
    population_.sample_training_population(pop_rng);
  }
  rebuild_links();
}

void Environment::rebuild_links() {
  CounterRng rng = CounterRng(seed_).child(kStreamFade).child(episode_).child(0);
  for (int tx = 0; tx < cfg_.bs_count(); ++tx)
    for (int u = 0; u < user_slots_; ++u) refresh_link(tx, u, rng, true);
}

void Environment::refresh_link(int tx, int user_slot, CounterRng& rng,
                               bool fresh_fading) {
  const UserRecord& user = population_.users()[user_slot];
  const BsSite& site = cfg_.bs[tx];
  const LinkGeometry geom(site.position, {user.x, user.y, kUserHeightM});
  const std::size_t link = static_cast<std::size_t>(tx) * user_slots_ + user_slot;

  LinkClass cls = LinkClass::kTerrestrial;
  const PathlossModel* model = &cfg_.terrestrial_pl;
  double tx_gain = cfg_.tbs_tx_gain_db;
  if (site.kind == BsKind::kNtbs) {
    if (fresh_fading) {
      const double p_los = los_probability(geom.elevation_deg, cfg_.fading);
      link_los_[link] = rng.uniform01() < p_los ? 1 : 0;
    }
    cls = link_los_[link] ? LinkClass::kAerialLos : LinkClass::kAerialNlos;
    model = link_los_[link] ? &cfg_.aerial_los_pl : &cfg_.aerial_nlos_pl;
    tx_gain = cfg_.ntbs_tx_gain_db;
  }

  const double pl = pathloss_db(geom, *model) - tx_gain;
  pathloss_db_[link] = pl;
  const double attenuation = std::pow(10.0, -pl / 10.0);

  FadingState* states = &fading_[link * cfg_.subchannels];
  double* gains = &gain_[link * cfg_.subchannels];
  for (int f = 0; f < cfg_.subchannels; ++f) {
    states[f] = fresh_fading
                    ? init_small_scale(rng, cls, cfg_.fading)
                    : sample_small_scale(rng, cls, cfg_.fading, states[f]);
    gains[f] = attenuation * std::norm(states[f].value);
  }
}

void Environment::advance_frame() {
  ++t_;
  if (mode_ == Mode::kContinuous) {
    std::vector<std::uint8_t> was_active(user_slots_);
    for (int u = 0; u < user_slots_; ++u)
      was_active[u] = population_.users()[u].active;

    CounterRng dyn_rng =
        CounterRng(seed_).child(kStreamDyn).child(episode_).child(t_);
    population_.advance(cfg_.frame_duration_s, dyn_rng, &events_);

    CounterRng rng =
        CounterRng(seed_).child(kStreamFade).child(episode_).child(t_);
    for (int tx = 0; tx < cfg_.bs_count(); ++tx) {
      for (int u = 0; u < user_slots_; ++u) {
        const UserRecord& user = population_.users()[u];
        if (!user.active) continue;
        refresh_link(tx, u, rng, !was_active[u]);
      }
    }
    return;
  }

  // episodic: positions are fixed, only fading evolves
  CounterRng rng = CounterRng(seed_).child(kStreamFade).child(episode_).child(t_);
  for (int tx = 0; tx < cfg_.bs_count(); ++tx) {
    for (int u = 0; u < user_slots_; ++u) {
      if (!population_.users()[u].active) continue;
      const std::size_t link = static_cast<std::size_t>(tx) * user_slots_ + u;
      const LinkClass cls =
          cfg_.bs[tx].kind == BsKind::kNtbs
              ? (link_los_[link] ? LinkClass::kAerialLos : LinkClass::kAerialNlos)
              : LinkClass::kTerrestrial;
      const double attenuation = std::pow(10.0, -pathloss_db_[link] / 10.0);
      FadingState* states = &fading_[link * cfg_.subchannels];
      double* gains = &gain_[link * cfg_.subchannels];
      for (int f = 0; f < cfg_.subchannels; ++f) {
        states[f] = sample_small_scale(rng, cls, cfg_.fading, states[f]);
        gains[f] = attenuation * std::norm(states[f].value);
      }
    }
  }
}

StepOutcome Environment::evaluate(const JointAction& joint) const {
  const int n_bs = cfg_.bs_count();
  const int m_count = cfg_.srb_count;
  const int srb = partition_.srb_size;
  const int f_count = cfg_.subchannels;
  const int k_max = cfg_.users_per_bs;

  if (static_cast<int>(joint.size()) != n_bs * m_count)
    throw ContractError("step: expected one action per (BS, SRB) agent");

  // decode assignments and powers
  std::vector<double> power(static_cast<std::size_t>(n_bs) * f_count, 0.0);
  std::vector<int> serving(static_cast<std::size_t>(n_bs) * f_count, -1);
  for (int n = 0; n < n_bs; ++n) {
    for (int m = 0; m < m_count; ++m) {
      const AgentAction& action = joint[n * m_count + m];
      if (static_cast<int>(action.assignment.size()) != srb)
        throw ContractError("step: assignment length must equal the SRB size");
      const std::vector<double> p = decode_power(action, cfg_.p_max_w, m_count);
      for (int s = 0; s < srb; ++s) {
        const int j = action.assignment[s];
        if (j < 0 || j > k_max)
          throw ContractError("step: action class out of range");
        if (j == 0) continue;
        if (!population_.user(n, j - 1).active)
          throw ContractError("step: action selects an inactive user");
        const int f = partition_.first(m) + s;
        power[static_cast<std::size_t>(n) * f_count + f] = p[s];
        serving[static_cast<std::size_t>(n) * f_count + f] = j - 1;
      }
    }
  }

  StepOutcome out;
  out.user_slots = user_slots_;
  out.subchannels = f_count;
  out.rate_bps.assign(static_cast<std::size_t>(user_slots_) * f_count, 0.0);
  out.interference_w.assign(static_cast<std::size_t>(user_slots_) * f_count, 0.0);
  out.group_reward.assign(m_count, 0.0);
  out.cost_bps.assign(user_slots_, 0.0);
  out.qos_miss.assign(user_slots_, 0);

  const double bandwidth = cfg_.subchannel_bandwidth_hz;
  std::vector<double> user_sum(user_slots_, 0.0);
  std::vector<double> group_sum(m_count, 0.0);
  double flat_sum = 0.0;

  for (int n = 0; n < n_bs; ++n) {
    for (int f = 0; f < f_count; ++f) {
      const int k = serving[static_cast<std::size_t>(n) * f_count + f];
      if (k < 0) continue;
      const int u = n * k_max + k;
      double interference = 0.0;
      for (int l = 0; l < n_bs; ++l) {
        if (l == n) continue;
        interference +=
            gain(l, u, f) * power[static_cast<std::size_t>(l) * f_count + f];
      }
      const double p = power[static_cast<std::size_t>(n) * f_count + f];
      const double rate =
          bandwidth * std::log2(1.0 + gain(n, u, f) * p /
                                          (interference + noise_w_));
      out.rate_bps[static_cast<std::size_t>(u) * f_count + f] = rate;
      out.interference_w[static_cast<std::size_t>(u) * f_count + f] = interference;
      user_sum[u] += rate;
      group_sum[partition_.srb_of(f)] += rate;
      flat_sum += rate;
    }
  }

  const int active = population_.active_count_total();
  const double k_norm = std::max(active, 1);
  for (int m = 0; m < m_count; ++m) out.group_reward[m] = group_sum[m] / k_norm;
  out.reward = flat_sum / k_norm;
  out.throughput_bps = flat_sum;
  out.active_users = active;

  for (int u = 0; u < user_slots_; ++u) {
    const UserRecord& user = population_.users()[u];
    if (!user.active) continue;
    const double deficit = user.eta_bps - user_sum[u];
    out.cost_bps[u] = std::max(deficit, 0.0);
    out.qos_miss[u] = user_sum[u] < user.eta_bps ? 1 : 0;
  }
  return out;
}

StepOutcome Environment::step(const JointAction& joint) {
  StepOutcome out = evaluate(joint);
  advance_frame();
  return out;
}

double Environment::scaled_gain_db(int tx, int user_slot, int f) const {
  const double g = gain(tx, user_slot, f);
  const double floor_db = cfg_.obs.gain_db_floor;
  const double ceil_db = cfg_.obs.gain_db_ceil;
  double db = g > 0.0 ? 10.0 * std::log10(g) : floor_db;
  db = std::clamp(db, floor_db, ceil_db);
  return 2.0 * (db - floor_db) / (ceil_db - floor_db) - 1.0;
}

double Environment::scaled_pathloss(int tx, int user_slot) const {
  const double floor_db = cfg_.obs.pathloss_db_floor;
  const double ceil_db = cfg_.obs.pathloss_db_ceil;
  const double db = std::clamp(link_pathloss_db(tx, user_slot), floor_db, ceil_db);
  return 2.0 * (db - floor_db) / (ceil_db - floor_db) - 1.0;
}

Observation Environment::observe(int n, int m,
                                 std::span<const AgentAction> prior) const {
  if (n < 0 || n >= cfg_.bs_count() || m < 0 || m >= cfg_.srb_count)
    throw ContractError("observe: agent index out of range");
  if (static_cast<int>(prior.size()) != m)
    throw ContractError("observe: need exactly the m preceding actions");

  const ObsLayout layout = ObsLayout::of(cfg_);
  Observation obs;
  obs.features.assign(layout.total, 0.0);
  const int srb = partition_.srb_size;
  const int k_max = cfg_.users_per_bs;

  // own-SRB channel gains to associated users, inactive slots zeroed
  for (int k = 0; k < k_max; ++k) {
    if (!population_.user(n, k).active) continue;
    const int u = n * k_max + k;
    for (int s = 0; s < srb; ++s) {
      obs.features[layout.own_gains + k * srb + s] =
          scaled_gain_db(n, u, partition_.first(m) + s);
    }
  }

  // pathloss of all BSs to all users
  for (int tx = 0; tx < cfg_.bs_count(); ++tx) {
    for (int u = 0; u < user_slots_; ++u) {
      if (!population_.users()[u].active) continue;
      obs.features[layout.pathloss + tx * user_slots_ + u] =
          scaled_pathloss(tx, u);
    }
  }

  // accumulated-rate approximation from the preceding agents of this BS,
  // computed with inter-BS interference taken as zero
  for (int mp = 0; mp < m; ++mp) {
    const std::vector<double> p = decode_power(prior[mp], cfg_.p_max_w,
                                               cfg_.srb_count);
    for (int s = 0; s < srb; ++s) {
      const int j = prior[mp].assignment[s];
      if (j == 0) continue;
      const int u = n * k_max + (j - 1);
      const int f = partition_.first(mp) + s;
      const double rate =
          cfg_.subchannel_bandwidth_hz *
          std::log2(1.0 + gain(n, u, f) * p[s] / noise_w_);
      obs.features[layout.psi_rate + (j - 1)] += rate;
    }
  }
  for (int k = 0; k < k_max; ++k) {
    if (cfg_.qos_rate_bps > 0.0)
      obs.features[layout.psi_rate + k] /= cfg_.qos_rate_bps;
    else
      obs.features[layout.psi_rate + k] /= cfg_.subchannel_bandwidth_hz;
  }

  for (int u = 0; u < user_slots_; ++u)
    obs.features[layout.presence + u] = population_.users()[u].active ? 1.0 : 0.0;
  obs.features[layout.bs_onehot + n] = 1.0;
  obs.features[layout.srb_onehot + m] = 1.0;
  return obs;
}

Observation Environment::observe_bs(int n) const {
  if (n < 0 || n >= cfg_.bs_count())
    throw ContractError("observe_bs: BS index out of range");
  Observation obs;
  obs.features.assign(bs_obs_dim(cfg_), 0.0);
  const int k_max = cfg_.users_per_bs;
  int at = 0;

  for (int k = 0; k < k_max; ++k) {
    const bool active = population_.user(n, k).active;
    const int u = n * k_max + k;
    for (int f = 0; f < cfg_.subchannels; ++f)
      obs.features[at++] = active ? scaled_gain_db(n, u, f) : 0.0;
  }
  for (int tx = 0; tx < cfg_.bs_count(); ++tx)
    for (int u = 0; u < user_slots_; ++u)
      obs.features[at++] =
          population_.users()[u].active ? scaled_pathloss(tx, u) : 0.0;
  for (int u = 0; u < user_slots_; ++u)
    obs.features[at++] = population_.users()[u].active ? 1.0 : 0.0;
  obs.features[at + n] = 1.0;
  return obs;
}

std::vector<double> Environment::state_features() const {
  std::vector<double> state(state_dim(cfg_), 0.0);
  int at = 0;
  for (int tx = 0; tx < cfg_.bs_count(); ++tx) {
    for (int u = 0; u < user_slots_; ++u) {
      const bool active = population_.users()[u].active;
      for (int f = 0; f < cfg_.subchannels; ++f)
        state[at++] = active ? scaled_gain_db(tx, u, f) : 0.0;
    }
  }
  for (int tx = 0; tx < cfg_.bs_count(); ++tx)
    for (int u = 0; u < user_slots_; ++u)
      state[at++] =
          population_.users()[u].active ? scaled_pathloss(tx, u) : 0.0;
  for (int u = 0; u < user_slots_; ++u)
    state[at++] = population_.users()[u].active ? 1.0 : 0.0;
  return state;
}

std::vector<std::uint8_t> Environment::action_mask(int n) const {
  std::vector<std::uint8_t> mask(cfg_.users_per_bs + 1, 0);
  mask[0] = 1;
  for (int k = 0; k < cfg_.users_per_bs; ++k)
    mask[k + 1] = population_.user(n, k).active ? 1 : 0;
  return mask;
}

}  // namespace corra
