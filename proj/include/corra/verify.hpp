/*
 * Copyright (c) 2026 The corra authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#ifndef CORRA_VERIFY_HPP
#define CORRA_VERIFY_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "corra/env.hpp"
#include "corra/rng.hpp"

namespace corra {

/// Deterministic single-step instance small enough to enumerate every joint
/// action. The partition is stored explicitly (frequency indices per BS and
/// SRB) so tests can inject frequency-misaligned variants.
struct MicroInstance {
  int bs_count = 2;
  int users_per_bs = 2;  // all active
  int subchannels = 4;
  int srb_count = 2;
  double bandwidth_hz = 1.0;
  double p_max_w = 1.0;
  double noise_w = 1.0;
  std::vector<double> gain;  // [tx][user][f], |h|^2 linear
  std::vector<std::vector<std::vector<int>>> partition;  // [n][m] -> freqs

  static MicroInstance random(int bs, int users, int subchannels, int srbs,
                              CounterRng& rng);

  /// Swap two SRB index sets at one BS, breaking frequency alignment.
  void misalign(int bs, int m1, int m2);

  double gain_at(int tx, int user_global, int f) const {
    return gain[(static_cast<std::size_t>(tx) * bs_count * users_per_bs +
                 user_global) *
                    subchannels +
                f];
  }
  int total_users() const { return bs_count * users_per_bs; }
  double joint_space_size() const;
  double group_space_size() const;  // one group, all BSs
};

/// Flat single-step evaluation of full-band assignments (one vector of
/// length F per BS, classes 0..K). Independent of the Environment path.
struct MicroOutcome {
  double objective = 0.0;                // r = sum rates / K
  std::vector<double> group_objective;   // per SRB index m
};
MicroOutcome evaluate_micro(const MicroInstance& inst,
                            const std::vector<std::vector<int>>& assignment);

struct OptimumReport {
  double objective = 0.0;
  std::vector<std::vector<int>> assignment;
};

/// Exhaustive argmax over every BS's full action space. Throws DomainError
/// with a size estimate when the joint space exceeds 1e7.
OptimumReport brute_force_joint_optimum(const MicroInstance& inst);

struct SequentialReport {
  std::vector<double> group_values;  // J-bar per group, in decision order
  double total = 0.0;                // sum of group values
  double composed_objective = 0.0;   // J of the composed assignment
  std::vector<std::vector<int>> assignment;
};

/// Greedy per-group exhaustive optimization, groups decided in order with
/// earlier groups held fixed.
SequentialReport sequential_group_optimum(const MicroInstance& inst);

struct CheckReport {
  bool passed = false;
  double max_deviation = 0.0;
  std::string detail;
};

/// For every conditioning action of groups < m, the optimal group-m value
/// must be constant (checked for every m >= 1).
CheckReport check_lemma2(const MicroInstance& inst, double tolerance = 1e-9);

/// Additive reward decomposition and cross-group invariance on random
/// assignments of a micro instance.
CheckReport check_assumptions_micro(const MicroInstance& inst, int samples,
                                    int resamples, CounterRng& rng);

/// Tabular MDP for the discounted-occupancy identity.
struct TinyMdp {
  int states = 0;
  int actions = 0;
  std::vector<double> transition;  // [s][a][s']
  double gamma = 0.9;
  std::vector<double> mu;          // initial state distribution

  static TinyMdp random(int states, int actions, double gamma, CounterRng& rng);
  void validate() const;  // rows sum to 1 within 1e-12, gamma < 1
  double p(int s, int a, int s2) const {
    return transition[(static_cast<std::size_t>(s) * actions + a) * states + s2];
  }
};

/// Exact check that the discounted return of any f equals
/// 1/(1-gamma) times its expectation under the occupancy measure,
/// via two independent linear solves, for `f_tables` random f.
CheckReport check_proposition1(const TinyMdp& mdp,
                               const std::vector<double>& policy,
                               int f_tables, CounterRng& rng,
                               double tolerance = 1e-8);

/// Production-path assumption checks: reward additivity within tolerance and
/// bit-identical group rewards under other-group resampling.
CheckReport check_assumptions_env(Environment& env, int samples, int resamples,
                                  std::uint64_t seed);

/// Named verification suites behind the `verify` CLI subcommand.
struct SuiteResult {
  std::string name;
  bool passed = false;
  std::string detail;
};
std::vector<SuiteResult> run_verification(const std::string& scope);

}  // namespace corra

#endif  // CORRA_VERIFY_HPP
