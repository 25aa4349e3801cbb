/*
 * Copyright (c) 2026 The corra authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#ifndef CORRA_CHANNEL_HPP
#define CORRA_CHANNEL_HPP

#include <array>
#include <complex>

#include "corra/rng.hpp"

namespace corra {

enum class LinkClass { kTerrestrial, kAerialLos, kAerialNlos };

/// Transmitter/receiver geometry of one link. Distance and elevation are
/// derived from the endpoints on construction.
struct LinkGeometry {
  std::array<double, 3> tx_position{};
  std::array<double, 3> rx_position{};
  double distance = 0.0;       // meters, Euclidean
  double elevation_deg = 0.0;  // 0 for ground-level links

  LinkGeometry() = default;
  LinkGeometry(const std::array<double, 3>& tx, const std::array<double, 3>& rx);
};

/// Log-distance pathloss: PL(d) = intercept + slope * log10(d / d0).
struct PathlossModel {
  double intercept_db = 128.1;
  double slope_db_per_decade = 37.6;
  double reference_distance_m = 1000.0;
};

/// Elevation-gated LoS probability and small-scale fading parameters.
struct FadingParams {
  double los_a = 9.61;        // logistic offset
  double los_b = 0.16;        // logistic steepness, 1/deg
  double rician_k_db = 10.0;  // dominant-to-scatter ratio for LoS links
  double rho = 0.0;           // frame-to-frame correlation of the scatter part
};

/// Small-scale state of one link component (one subchannel).
/// `value` is the coefficient used by the environment; `scatter` is the
/// diffuse part the AR(1) recursion evolves; `dominant` is the fixed
/// line-of-sight phasor (zero for Rayleigh links).
struct FadingState {
  std::complex<double> value{0.0, 0.0};
  std::complex<double> scatter{0.0, 0.0};
  std::complex<double> dominant{0.0, 0.0};
};

/// PL in dB for a link; rejects zero distance.
double pathloss_db(const LinkGeometry& geometry, const PathlossModel& model);

/// P(LoS) as a non-decreasing logistic in elevation: 1/(1 + a e^{-b(e-a)}).
double los_probability(double elevation_deg, const FadingParams& params);

/// Initial small-scale draw for a link component.
FadingState init_small_scale(CounterRng& rng, LinkClass link_class,
                             const FadingParams& params);

/// One frame advance: scatter' = rho*scatter + sqrt(1-rho^2)*w, value
/// recombined with the dominant component. rho = 0 gives i.i.d. frames,
/// rho = 1 freezes the state.
FadingState sample_small_scale(CounterRng& rng, LinkClass link_class,
                               const FadingParams& params,
                               const FadingState& prev);

/// h = 10^(-PL/20) * g, so |h|^2 = 10^(-PL/10) |g|^2.
std::complex<double> channel_coefficient(double pathloss_db,
                                         std::complex<double> small_scale);

/// Thermal noise over bandwidth W: W * N0. Rejects W <= 0.
double noise_power(double bandwidth_hz, double noise_density_w_hz);

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }
inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

}  // namespace corra

#endif  // CORRA_CHANNEL_HPP
