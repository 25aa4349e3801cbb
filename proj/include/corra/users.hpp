/*
 * Copyright (c) 2026 The corra authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#ifndef CORRA_USERS_HPP
#define CORRA_USERS_HPP

#include <cstdint>
#include <vector>

#include "corra/rng.hpp"
#include "corra/system_config.hpp"

namespace corra {

struct UserRecord {
  int id = 0;       // global slot: home_bs * K_max + local index
  int home_bs = 0;
  double x = 0.0;   // meters, inside the deployment rectangle
  double y = 0.0;
  bool active = false;
  double spawn_time_s = 0.0;
  double dwell_remaining_s = 0.0;
  double eta_bps = 0.0;
};

struct DynamicsConfig {
  double arrival_rate_per_min = 3.0;   // per BS
  double dwell_mean_min = 3.0;
  double walk_speed_mps = 1.0;
  double training_mean_fraction = 0.5;  // Poisson mean as a fraction of K_max
};

enum class UserEventKind { kArrival, kDeparture };

struct UserEvent {
  double time_s = 0.0;
  UserEventKind kind = UserEventKind::kArrival;
  int bs = 0;
  int slot = 0;  // local user index within the BS
};

/// Fixed slot table (K_max per BS); activity toggles per episode or over
/// continuous time.
class Population {
 public:
  Population() = default;
  Population(const SystemConfig& cfg, const DynamicsConfig& dyn);

  /// Per-episode randomization: active count per BS ~ Poisson(fraction*K_max)
  /// conditioned on [1, K_max]; active slots chosen uniformly; positions
  /// uniform over the deployment area.
  void sample_training_population(CounterRng& rng);

  /// Continuous-time advance by dt: Poisson arrivals (dropped beyond K_max),
  /// exponential dwell countdown, fixed-speed random-walk with boundary
  /// reflection. Appends arrival/departure events to `events`.
  void advance(double dt_s, CounterRng& rng, std::vector<UserEvent>* events);

  /// psi bit-vector for one BS: length K_max + 1, slot 0 unused (it mirrors
  /// the `unactivated` action class), slot j = user j-1 active.
  std::vector<std::uint8_t> presence_metadata(int bs) const;

  int active_count(int bs) const;
  int active_count_total() const;

  const UserRecord& user(int bs, int slot) const {
    return users_[bs * users_per_bs_ + slot];
  }
  UserRecord& user(int bs, int slot) { return users_[bs * users_per_bs_ + slot]; }
  const std::vector<UserRecord>& users() const { return users_; }

  double now_s() const { return now_s_; }
  int bs_count() const { return bs_count_; }
  int users_per_bs() const { return users_per_bs_; }

 private:
  void spawn(int bs, int slot, double now, CounterRng& rng);

  int bs_count_ = 0;
  int users_per_bs_ = 0;
  double area_x_ = 0.0;
  double area_y_ = 0.0;
  double eta_bps_ = 0.0;
  DynamicsConfig dyn_{};
  double now_s_ = 0.0;
  std::vector<UserRecord> users_;
};

/// Mean of Poisson(mean) conditioned on [1, k_max]; reference for tests.
double truncated_poisson_mean(double mean, int k_max);

}  // namespace corra

#endif  // CORRA_USERS_HPP
