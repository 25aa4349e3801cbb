/*
 * Copyright (c) 2026 The corra authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include "corra/users.hpp"

#include <algorithm>
#include <cmath>

#include "corra/errors.hpp"

namespace corra {

Population::Population(const SystemConfig& cfg, const DynamicsConfig& dyn)
    : bs_count_(cfg.bs_count()),
      users_per_bs_(cfg.users_per_bs),
      area_x_(cfg.area_x_m),
      area_y_(cfg.area_y_m),
      eta_bps_(cfg.qos_rate_bps),
      dyn_(dyn) {
  users_.resize(static_cast<std::size_t>(bs_count_) * users_per_bs_);
  for (int n = 0; n < bs_count_; ++n) {
    for (int k = 0; k < users_per_bs_; ++k) {
      UserRecord& u = user(n, k);
      u.id = n * users_per_bs_ + k;
      u.home_bs = n;
      u.eta_bps = eta_bps_;
    }
  }
}

void Population::spawn(int bs, int slot, double now, CounterRng& rng) {
  UserRecord& u = user(bs, slot);
  u.active = true;
  u.spawn_time_s = now;
  u.dwell_remaining_s = rng.exponential(dyn_.dwell_mean_min * 60.0);
  u.x = rng.uniform(0.0, area_x_);
  u.y = rng.uniform(0.0, area_y_);
}

void Population::sample_training_population(CounterRng& rng) {
  now_s_ = 0.0;
  const double mean = dyn_.training_mean_fraction * users_per_bs_;
  for (int n = 0; n < bs_count_; ++n) {
    int count;
    do {
      count = rng.poisson(mean);
    } while (count < 1 || count > users_per_bs_);

    // uniformly random subset of `count` slots (partial Fisher-Yates)
    std::vector<int> slots(users_per_bs_);
    for (int k = 0; k < users_per_bs_; ++k) slots[k] = k;
    for (int i = 0; i < count; ++i) {
      const int j = i + static_cast<int>(rng.below(users_per_bs_ - i));
      std::swap(slots[i], slots[j]);
    }

    for (int k = 0; k < users_per_bs_; ++k) user(n, k).active = false;
    for (int i = 0; i < count; ++i) {
      UserRecord& u = user(n, slots[i]);
      u.active = true;
      u.spawn_time_s = 0.0;
      u.dwell_remaining_s = 1.0;  // unused in episodic mode
      u.x = rng.uniform(0.0, area_x_);
      u.y = rng.uniform(0.0, area_y_);
    }
  }
}

void Population::advance(double dt_s, CounterRng& rng,
                         std::vector<UserEvent>* events) {
  if (dt_s <= 0.0) throw DomainError("Population::advance: dt must be > 0");
  now_s_ += dt_s;

  for (int n = 0; n < bs_count_; ++n) {
    // dwell expiry
    for (int k = 0; k < users_per_bs_; ++k) {
      UserRecord& u = user(n, k);
      if (!u.active) continue;
      u.dwell_remaining_s -= dt_s;
      if (u.dwell_remaining_s <= 0.0) {
        u.active = false;
        u.dwell_remaining_s = 0.0;
        if (events) events->push_back({now_s_, UserEventKind::kDeparture, n, k});
      }
    }

    // random walk with reflection
    for (int k = 0; k < users_per_bs_; ++k) {
      UserRecord& u = user(n, k);
      if (!u.active) continue;
      const double heading = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
      double nx = u.x + dyn_.walk_speed_mps * dt_s * std::cos(heading);
      double ny = u.y + dyn_.walk_speed_mps * dt_s * std::sin(heading);
      if (nx < 0.0) nx = -nx;
      if (nx > area_x_) nx = 2.0 * area_x_ - nx;
      if (ny < 0.0) ny = -ny;
      if (ny > area_y_) ny = 2.0 * area_y_ - ny;
      u.x = std::clamp(nx, 0.0, area_x_);
      u.y = std::clamp(ny, 0.0, area_y_);
    }

    // arrivals, blocked once all slots are busy
    const int arrivals = rng.poisson(dyn_.arrival_rate_per_min * dt_s / 60.0);
    for (int a = 0; a < arrivals; ++a) {
      int slot = -1;
      for (int k = 0; k < users_per_bs_; ++k) {
        if (!user(n, k).active) {
          slot = k;
          break;
        }
      }
      if (slot < 0) break;  // at K_max, drop the arrival
      spawn(n, slot, now_s_, rng);
      if (events) events->push_back({now_s_, UserEventKind::kArrival, n, slot});
    }
  }
}

std::vector<std::uint8_t> Population::presence_metadata(int bs) const {
  std::vector<std::uint8_t> psi(users_per_bs_ + 1, 0);
  for (int k = 0; k < users_per_bs_; ++k)
    psi[k + 1] = user(bs, k).active ? 1 : 0;
  return psi;
}

int Population::active_count(int bs) const {
  int c = 0;
  for (int k = 0; k < users_per_bs_; ++k)
    if (user(bs, k).active) ++c;
  return c;
}

int Population::active_count_total() const {
  int c = 0;
  for (const auto& u : users_)
    if (u.active) ++c;
  return c;
}

double truncated_poisson_mean(double mean, int k_max) {
  double norm = 0.0;
  double acc = 0.0;
  double p = std::exp(-mean);  // P(X = 0)
  for (int x = 1; x <= k_max; ++x) {
    p *= mean / x;
    norm += p;
    acc += x * p;
  }
  return acc / norm;
}

}  // namespace corra
