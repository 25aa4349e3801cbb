/*
 * Copyright (c) 2026 The corra authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#ifndef CORRA_RNG_HPP
#define CORRA_RNG_HPP

#include <cmath>
#include <complex>
#include <cstdint>
#include <initializer_list>

namespace corra {

/// Counter-based random stream: every output is a pure function of
/// (key, counter), so independent streams can be derived by key and
/// replayed exactly regardless of thread scheduling.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : key_(mix(seed ^ kKeyInit)) {}

  CounterRng(std::uint64_t seed, std::initializer_list<std::uint64_t> stream)
      : CounterRng(seed) {
    for (auto id : stream) key_ = mix(key_ ^ mix(id + kStreamSalt));
  }

  /// Derive an independent child stream without consuming state.
  CounterRng child(std::uint64_t id) const {
    CounterRng r(*this);
    r.key_ = mix(key_ ^ mix(id + kStreamSalt));
    r.counter_ = 0;
    return r;
  }

  std::uint64_t next_u64() { return mix(key_ + kGolden * ++counter_); }

  /// Uniform on [0, 1) with 53-bit resolution.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

  /// Standard normal pair (Box-Muller).
  void normal_pair(double& a, double& b) {
    double u1 = uniform01();
    double u2 = uniform01();
    // avoid log(0)
    double r = std::sqrt(-2.0 * std::log1p(-u1));
    a = r * std::cos(2.0 * kPi * u2);
    b = r * std::sin(2.0 * kPi * u2);
  }

  double normal() {
    double a, b;
    normal_pair(a, b);
    return a;
  }

  /// Circularly-symmetric complex Gaussian, unit variance: E[|z|^2] = 1.
  std::complex<double> complex_normal_unit() {
    double a, b;
    normal_pair(a, b);
    return {a * kInvSqrt2, b * kInvSqrt2};
  }

  double exponential(double mean) { return -mean * std::log1p(-uniform01()); }

  /// Poisson by inversion-by-multiplication; fine for the small means
  /// used here (<= ~30).
  int poisson(double mean) {
    if (mean <= 0.0) return 0;
    const double limit = std::exp(-mean);
    double p = 1.0;
    int k = 0;
    do {
      ++k;
      p *= uniform01();
    } while (p > limit);
    return k - 1;
  }

 private:
  static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
  static constexpr std::uint64_t kKeyInit = 0x6a09e667f3bcc908ULL;
  static constexpr std::uint64_t kStreamSalt = 0xbb67ae8584caa73bULL;
  static constexpr double kPi = 3.14159265358979323846;
  static constexpr double kInvSqrt2 = 0.70710678118654752440;

  // splitmix64 finalizer
  static std::uint64_t mix(std::uint64_t z) {
    z += kGolden;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace corra

#endif  // CORRA_RNG_HPP
