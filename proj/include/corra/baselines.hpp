/*
 * Copyright (c) 2026 The corra authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#ifndef CORRA_BASELINES_HPP
#define CORRA_BASELINES_HPP

#include <string>
#include <vector>

#include "corra/env.hpp"
#include "corra/trainer.hpp"

namespace corra {

enum class HeuristicKind { kFullActivationUniform, kRandomAssignment };

HeuristicKind heuristic_from_string(const std::string& name);

/// Full-band assignment (length F) for BS n. Full-activation assigns the
/// active users round-robin over every subchannel; random samples uniformly
/// over the legal classes per subchannel. `rng` may be null for the
/// deterministic kinds.
std::vector<int> heuristic_assignment(HeuristicKind kind, const Environment& env,
                                      int n, CounterRng* rng);

JointAction heuristic_joint_action(HeuristicKind kind, const Environment& env,
                                   CounterRng* rng);

/// Undecomposed (RL1) view: one agent per BS whose action is the full-band
/// assignment vector. Physics is shared with the decomposed path, so both
/// views of the same joint action produce identical outcomes.
class MonolithicView {
 public:
  explicit MonolithicView(Environment& env) : env_(&env) {}

  Observation observe(int n) const { return env_->observe_bs(n); }

  /// Splits each BS's full-band vector into its M per-SRB actions.
  static JointAction to_joint(const SystemConfig& cfg,
                              const std::vector<std::vector<int>>& assignments);

  StepOutcome evaluate(const std::vector<std::vector<int>>& assignments) const {
    return env_->evaluate(to_joint(env_->config(), assignments));
  }
  StepOutcome step(const std::vector<std::vector<int>>& assignments) {
    return env_->step(to_joint(env_->config(), assignments));
  }

  Environment& env() { return *env_; }

 private:
  Environment* env_;
};

/// Baseline runs must differ from the proposed method only in agent
/// granularity and critic scope; throws ContractError otherwise.
void assert_hyperparameter_parity(const TrainerConfig& proposed,
                                  const TrainerConfig& baseline);

}  // namespace corra

#endif  // CORRA_BASELINES_HPP
