/*
 * Copyright (c) 2026 The corra authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include "corra/baselines.hpp"

#include "corra/errors.hpp"

namespace corra {

HeuristicKind heuristic_from_string(const std::string& name) {
  if (name == "full-activation-uniform") return HeuristicKind::kFullActivationUniform;
  if (name == "random-assignment") return HeuristicKind::kRandomAssignment;
  throw ConfigError("unknown heuristic: " + name);
}

std::vector<int> heuristic_assignment(HeuristicKind kind, const Environment& env,
                                      int n, CounterRng* rng) {
  const SystemConfig& cfg = env.config();
  std::vector<int> assignment(cfg.subchannels, 0);

  std::vector<int> active;
  for (int k = 0; k < cfg.users_per_bs; ++k)
    if (env.population().user(n, k).active) active.push_back(k);
  if (active.empty()) return assignment;

  switch (kind) {
    case HeuristicKind::kFullActivationUniform:
      for (int f = 0; f < cfg.subchannels; ++f)
        assignment[f] = active[f % active.size()] + 1;
      break;
    case HeuristicKind::kRandomAssignment: {
      if (!rng)
        throw ContractError("heuristic_assignment: random kind needs an rng");
      // classes: 0 plus one per active user, uniform
      for (int f = 0; f < cfg.subchannels; ++f) {
        const int pick = static_cast<int>(rng->below(active.size() + 1));
        assignment[f] = pick == 0 ? 0 : active[pick - 1] + 1;
      }
      break;
    }
  }
  return assignment;
}

JointAction heuristic_joint_action(HeuristicKind kind, const Environment& env,
                                   CounterRng* rng) {
  const SystemConfig& cfg = env.config();
  std::vector<std::vector<int>> full(cfg.bs_count());
  for (int n = 0; n < cfg.bs_count(); ++n)
    full[n] = heuristic_assignment(kind, env, n, rng);
  return MonolithicView::to_joint(cfg, full);
}

JointAction MonolithicView::to_joint(const SystemConfig& cfg,
                                     const std::vector<std::vector<int>>& assignments) {
  if (static_cast<int>(assignments.size()) != cfg.bs_count())
    throw ContractError("monolithic view: one assignment vector per BS");
  const int srb = cfg.srb_size();
  JointAction joint(static_cast<std::size_t>(cfg.bs_count()) * cfg.srb_count);
  for (int n = 0; n < cfg.bs_count(); ++n) {
    if (static_cast<int>(assignments[n].size()) != cfg.subchannels)
      throw ContractError("monolithic view: assignment length must equal F");
    for (int m = 0; m < cfg.srb_count; ++m) {
      AgentAction action;
      action.assignment.assign(
          assignments[n].begin() + static_cast<std::size_t>(m) * srb,
          assignments[n].begin() + static_cast<std::size_t>(m + 1) * srb);
      joint[static_cast<std::size_t>(n) * cfg.srb_count + m] = std::move(action);
    }
  }
  return joint;
}

void assert_hyperparameter_parity(const TrainerConfig& proposed,
                                  const TrainerConfig& baseline) {
  if (!(proposed == baseline))
    throw ContractError(
        "baseline trainer config must be field-identical to the proposed "
        "method's");
}

}  // namespace corra
