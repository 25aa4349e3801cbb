/*
 * Copyright (c) 2026 The corra authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#ifndef CORRA_SYSTEM_CONFIG_HPP
#define CORRA_SYSTEM_CONFIG_HPP

#include <array>
#include <vector>

#include "corra/channel.hpp"

namespace corra {

enum class BsKind { kTbs, kNtbs };

struct BsSite {
  BsKind kind = BsKind::kTbs;
  std::array<double, 3> position{0.0, 0.0, 25.0};  // meters
};

/// Affine dB -> [-1, 1] mapping bounds for observation features.
struct ObsScaling {
  double gain_db_floor = -140.0;
  double gain_db_ceil = -85.0;
  double pathloss_db_floor = 85.0;
  double pathloss_db_ceil = 140.0;
};

/// Static description of the radio system: topology, spectrum, power and
/// QoS budgets, and the equal-cardinality subchannel partition.
struct SystemConfig {
  std::vector<BsSite> bs;
  int users_per_bs = 6;               // K_max
  int subchannels = 24;               // F, per BS
  int srb_count = 3;                  // M
  double subchannel_bandwidth_hz = 125e3;  // W
  double p_max_w = 39.810717055349734;     // 46 dBm
  double qos_rate_bps = 2e6;          // eta, uniform across users
  double noise_density_w_hz = 3.9810717055349695e-21;  // -174 dBm/Hz
  double gamma = 0.9;
  int episode_length = 100;
  double area_x_m = 1000.0;
  double area_y_m = 1000.0;
  double frame_duration_s = 0.01;
  double tbs_tx_gain_db = 0.0;
  double ntbs_tx_gain_db = 0.0;

  PathlossModel terrestrial_pl{128.1, 37.6, 1000.0};
  PathlossModel aerial_los_pl{98.4, 20.0, 1000.0};
  PathlossModel aerial_nlos_pl{118.4, 23.0, 1000.0};
  FadingParams fading{};
  ObsScaling obs{};

  int bs_count() const { return static_cast<int>(bs.size()); }
  int total_user_slots() const { return bs_count() * users_per_bs; }
  int srb_size() const { return subchannels / srb_count; }
  double total_band_hz() const { return subchannels * subchannel_bandwidth_hz; }
  /// Power class, selecting among 1 + K_max actions per subchannel.
  int action_classes() const { return users_per_bs + 1; }

  /// Throws ConfigError on violated invariants (F mod M, positive budgets,
  /// gamma range, area extents).
  void validate() const;
};

}  // namespace corra

#endif  // CORRA_SYSTEM_CONFIG_HPP
