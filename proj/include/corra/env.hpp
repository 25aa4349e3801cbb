/*
 * Copyright (c) 2026 The corra authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#ifndef CORRA_ENV_HPP
#define CORRA_ENV_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "corra/channel.hpp"
#include "corra/rng.hpp"
#include "corra/system_config.hpp"
#include "corra/users.hpp"

namespace corra {

/// Equal-cardinality, frequency-aligned, contiguous subchannel partition:
/// block m covers [m*size, (m+1)*size) at every BS.
struct SrbPartition {
  int subchannels = 0;
  int srb_count = 0;
  int srb_size = 0;

  int first(int m) const { return m * srb_size; }
  int srb_of(int f) const { return f / srb_size; }
};

/// Throws ConfigError unless subchannels is divisible by srb_count.
SrbPartition build_partition(int subchannels, int srb_count);

/// Per-SRB assignment vector; entry f in {0, 1, ..., K_n} where 0 is the
/// `unactivated` action and j >= 1 selects local user j-1.
struct AgentAction {
  std::vector<int> assignment;
};

/// All N*M agent actions for one step, indexed n * M + m.
using JointAction = std::vector<AgentAction>;

/// Uniform power over the activated subchannels of one SRB: each active
/// entry gets p_max / (A * M), inactive entries 0. A = 0 is legal (all off).
std::vector<double> decode_power(const AgentAction& action, double p_max_w,
                                 int srb_count);

/// Shannon rate of one subchannel: W * log2(1 + |h|^2 p / (g + W N0)).
double subchannel_rate(double h_gain, double power_w, double interference_w,
                       double bandwidth_hz, double noise_density_w_hz);

struct StepOutcome {
  int user_slots = 0;
  int subchannels = 0;
  std::vector<double> rate_bps;        // [user_slot][f], own-BS rates
  std::vector<double> interference_w;  // [user_slot][f], on assigned pairs
  std::vector<double> group_reward;    // size M, bits/s per user
  double reward = 0.0;                 // global r, bits/s per user
  std::vector<double> cost_bps;        // size user_slots, 0 when inactive
  std::vector<std::uint8_t> qos_miss;  // size user_slots
  double throughput_bps = 0.0;         // raw sum of all rates
  int active_users = 0;

  double rate(int user_slot, int f) const {
    return rate_bps[static_cast<std::size_t>(user_slot) * subchannels + f];
  }
  double interference(int user_slot, int f) const {
    return interference_w[static_cast<std::size_t>(user_slot) * subchannels + f];
  }
  double user_rate(int user_slot) const;
};

struct Observation {
  std::vector<double> features;
};

/// Feature offsets of the per-agent observation vector for one config.
struct ObsLayout {
  int own_gains = 0;      // srb_size * K_max, dB-scaled, inactive zeroed
  int pathloss = 0;       // N * (N * K_max)
  int psi_rate = 0;       // K_max, accumulated-rate approximation / eta
  int presence = 0;       // N * K_max activity bits
  int bs_onehot = 0;      // N
  int srb_onehot = 0;     // M
  int total = 0;

  static ObsLayout of(const SystemConfig& cfg);
};

/// Decomposed Dec-POMDP over the SRB partition: sequential per-BS agents,
/// indirect power allocation, inter-BS interference on aligned frequencies,
/// per-group rewards and truncated QoS costs.
class Environment {
 public:
  enum class Mode { kEpisodic, kContinuous };

  Environment(const SystemConfig& cfg, const DynamicsConfig& dyn, Mode mode,
              std::uint64_t seed);

  /// Fresh global state: resamples population (episodic mode) or clears it
  /// (continuous mode), regenerates pathloss and fading. `episode` keys the
  /// random streams, so (seed, episode) fully determines the state sequence.
  void reset(std::uint64_t episode);

  /// Pure evaluation of a joint action against the current state.
  StepOutcome evaluate(const JointAction& joint) const;

  /// evaluate(), then advance: fading (and, in continuous mode, the user
  /// population and pathloss) move to the next frame.
  StepOutcome step(const JointAction& joint);

  /// Observation of agent (n, m) given the already-decided actions of
  /// agents 0..m-1 of BS n this step.
  Observation observe(int n, int m, std::span<const AgentAction> prior) const;

  /// Whole-BS observation for the undecomposed (one-agent-per-BS) view.
  Observation observe_bs(int n) const;

  /// Global state features for centralized critics: all dB-scaled gains,
  /// pathloss, and presence bits.
  std::vector<double> state_features() const;

  /// Valid action classes at BS n: class 0 plus one class per active user.
  std::vector<std::uint8_t> action_mask(int n) const;

  static int obs_dim(const SystemConfig& cfg);
  static int bs_obs_dim(const SystemConfig& cfg);
  static int state_dim(const SystemConfig& cfg);

  const SystemConfig& config() const { return cfg_; }
  const SrbPartition& partition() const { return partition_; }
  const Population& population() const { return population_; }
  const std::vector<UserEvent>& events() const { return events_; }
  int step_index() const { return t_; }
  double now_s() const { return population_.now_s(); }
  double noise_w() const { return noise_w_; }

  /// |h_{user,tx,f}|^2, linear.
  double gain(int tx, int user_slot, int f) const {
    return gain_[(static_cast<std::size_t>(tx) * user_slots_ + user_slot) *
                     cfg_.subchannels +
                 f];
  }
  double link_pathloss_db(int tx, int user_slot) const {
    return pathloss_db_[static_cast<std::size_t>(tx) * user_slots_ + user_slot];
  }

 private:
  void rebuild_links();
  void refresh_link(int tx, int user_slot, CounterRng& rng, bool fresh_fading);
  void advance_frame();
  double scaled_gain_db(int tx, int user_slot, int f) const;
  double scaled_pathloss(int tx, int user_slot) const;

  SystemConfig cfg_;
  DynamicsConfig dyn_;
  Mode mode_;
  std::uint64_t seed_ = 0;
  std::uint64_t episode_ = 0;
  SrbPartition partition_;
  Population population_;
  int user_slots_ = 0;
  double noise_w_ = 0.0;
  int t_ = 0;

  std::vector<double> pathloss_db_;    // [tx][user_slot]
  std::vector<std::uint8_t> link_los_; // [tx][user_slot], aerial links only
  std::vector<FadingState> fading_;    // [tx][user_slot][f]
  std::vector<double> gain_;           // [tx][user_slot][f]
  std::vector<UserEvent> events_;
};

}  // namespace corra

#endif  // CORRA_ENV_HPP
