/*
 * Copyright (c) 2026 The corra authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include "corra/channel.hpp"

#include <cmath>

#include "corra/errors.hpp"

namespace corra {

LinkGeometry::LinkGeometry(const std::array<double, 3>& tx,
                           const std::array<double, 3>& rx) {
  tx_position = tx;
  rx_position = rx;
  const double dx = tx[0] - rx[0];
  const double dy = tx[1] - rx[1];
  const double dz = tx[2] - rx[2];
  distance = std::sqrt(dx * dx + dy * dy + dz * dz);
  const double ground = std::sqrt(dx * dx + dy * dy);
  const double height = std::abs(dz);
  elevation_deg = (height > 0.0 || ground > 0.0)
                      ? std::atan2(height, ground) * 180.0 / 3.14159265358979323846
                      : 0.0;
}

double pathloss_db(const LinkGeometry& geometry, const PathlossModel& model) {
  if (geometry.distance <= 0.0)
    throw DomainError("pathloss_db: distance must be > 0");
  return model.intercept_db +
         model.slope_db_per_decade *
             std::log10(geometry.distance / model.reference_distance_m);
}

double los_probability(double elevation_deg, const FadingParams& params) {
  if (elevation_deg < 0.0 || elevation_deg > 90.0)
    throw DomainError("los_probability: elevation must be in [0, 90]");
  return 1.0 / (1.0 + params.los_a *
                          std::exp(-params.los_b *
                                   (elevation_deg - params.los_a)));
}

namespace {

FadingState recombine(LinkClass link_class, const FadingParams& params,
                      std::complex<double> dominant,
                      std::complex<double> scatter) {
  FadingState s;
  s.scatter = scatter;
  s.dominant = dominant;
  if (link_class == LinkClass::kAerialLos) {
    const double k = db_to_linear(params.rician_k_db);
    s.value = std::sqrt(k / (k + 1.0)) * dominant +
              std::sqrt(1.0 / (k + 1.0)) * scatter;
  } else {
    s.value = scatter;
  }
  return s;
}

}  // namespace

FadingState init_small_scale(CounterRng& rng, LinkClass link_class,
                             const FadingParams& params) {
  std::complex<double> dominant{1.0, 0.0};
  if (link_class == LinkClass::kAerialLos) {
    const double phase = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
    dominant = {std::cos(phase), std::sin(phase)};
  }
  return recombine(link_class, params, dominant, rng.complex_normal_unit());
}

FadingState sample_small_scale(CounterRng& rng, LinkClass link_class,
                               const FadingParams& params,
                               const FadingState& prev) {
  const double rho = params.rho;
  const std::complex<double> w = rng.complex_normal_unit();
  const std::complex<double> scatter =
      rho * prev.scatter + std::sqrt(1.0 - rho * rho) * w;
  return recombine(link_class, params, prev.dominant, scatter);
}

std::complex<double> channel_coefficient(double pathloss_db,
                                         std::complex<double> small_scale) {
  return std::pow(10.0, -pathloss_db / 20.0) * small_scale;
}

double noise_power(double bandwidth_hz, double noise_density_w_hz) {
  if (bandwidth_hz <= 0.0) throw DomainError("noise_power: bandwidth must be > 0");
  return bandwidth_hz * noise_density_w_hz;
}

}  // namespace corra
