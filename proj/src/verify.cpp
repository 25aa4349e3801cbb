/*
 * Copyright (c) 2026 The corra authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include "corra/verify.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "corra/errors.hpp"
#include "corra/nn.hpp"

namespace corra {

MicroInstance MicroInstance::random(int bs, int users, int subchannels,
                                    int srbs, CounterRng& rng) {
  MicroInstance inst;
  inst.bs_count = bs;
  inst.users_per_bs = users;
  inst.subchannels = subchannels;
  inst.srb_count = srbs;
  if (subchannels % srbs != 0)
    throw ConfigError("micro instance: subchannels must be divisible by srbs");

  const int total = bs * users;
  inst.gain.resize(static_cast<std::size_t>(bs) * total * subchannels);
  for (double& g : inst.gain) {
    // log-uniform over roughly four decades
    g = std::pow(10.0, rng.uniform(-2.0, 2.0));
  }

  const int srb_size = subchannels / srbs;
  inst.partition.assign(bs, {});
  for (int n = 0; n < bs; ++n) {
    inst.partition[n].assign(srbs, {});
    for (int m = 0; m < srbs; ++m)
      for (int s = 0; s < srb_size; ++s)
        inst.partition[n][m].push_back(m * srb_size + s);
  }
  return inst;
}

void MicroInstance::misalign(int bs, int m1, int m2) {
  std::swap(partition[bs][m1], partition[bs][m2]);
}

double MicroInstance::joint_space_size() const {
  return std::pow(static_cast<double>(users_per_bs + 1),
                  static_cast<double>(bs_count) * subchannels);
}

double MicroInstance::group_space_size() const {
  return std::pow(static_cast<double>(users_per_bs + 1),
                  static_cast<double>(bs_count) * (subchannels / srb_count));
}

MicroOutcome evaluate_micro(const MicroInstance& inst,
                            const std::vector<std::vector<int>>& assignment) {
  const int n_bs = inst.bs_count;
  const int f_count = inst.subchannels;
  const int k_per_bs = inst.users_per_bs;
  if (static_cast<int>(assignment.size()) != n_bs)
    throw ContractError("evaluate_micro: one assignment per BS");

  // decode powers with the per-BS partition
  std::vector<double> power(static_cast<std::size_t>(n_bs) * f_count, 0.0);
  for (int n = 0; n < n_bs; ++n) {
    if (static_cast<int>(assignment[n].size()) != f_count)
      throw ContractError("evaluate_micro: assignment length must equal F");
    for (int m = 0; m < inst.srb_count; ++m) {
      int active = 0;
      for (int f : inst.partition[n][m])
        if (assignment[n][f] != 0) ++active;
      if (active == 0) continue;
      const double p = inst.p_max_w / (static_cast<double>(active) * inst.srb_count);
      for (int f : inst.partition[n][m])
        if (assignment[n][f] != 0)
          power[static_cast<std::size_t>(n) * f_count + f] = p;
    }
  }

  MicroOutcome out;
  out.group_objective.assign(inst.srb_count, 0.0);
  double total = 0.0;
  for (int n = 0; n < n_bs; ++n) {
    for (int m = 0; m < inst.srb_count; ++m) {
      for (int f : inst.partition[n][m]) {
        const int cls = assignment[n][f];
        if (cls == 0) continue;
        const int u = n * k_per_bs + (cls - 1);
        double interference = 0.0;
        for (int l = 0; l < n_bs; ++l) {
          if (l == n) continue;
          interference += inst.gain_at(l, u, f) *
                          power[static_cast<std::size_t>(l) * f_count + f];
        }
        const double p = power[static_cast<std::size_t>(n) * f_count + f];
        const double rate =
            inst.bandwidth_hz *
            std::log2(1.0 + inst.gain_at(n, u, f) * p /
                                (interference + inst.noise_w));
        out.group_objective[m] += rate;
        total += rate;
      }
    }
  }
  const double k_norm = inst.total_users();
  for (double& g : out.group_objective) g /= k_norm;
  out.objective = total / k_norm;
  return out;
}

namespace {

// Odometer over class vectors: advances `digits` in base `base`, returns
// false on wraparound.
bool next_assignment(std::vector<int>& digits, int base) {
  for (std::size_t i = 0; i < digits.size(); ++i) {
    if (++digits[i] < base) return true;
    digits[i] = 0;
  }
  return false;
}

}  // namespace

OptimumReport brute_force_joint_optimum(const MicroInstance& inst) {
  const double space = inst.joint_space_size();
  if (space > 1e7)
    throw DomainError("brute force refused: joint space has " +
                      std::to_string(space) + " actions");

  const int base = inst.users_per_bs + 1;
  std::vector<int> flat(static_cast<std::size_t>(inst.bs_count) * inst.subchannels, 0);
  std::vector<std::vector<int>> assignment(
      inst.bs_count, std::vector<int>(inst.subchannels, 0));

  OptimumReport best;
  best.objective = -1.0;
  do {
    for (int n = 0; n < inst.bs_count; ++n)
      for (int f = 0; f < inst.subchannels; ++f)
        assignment[n][f] = flat[static_cast<std::size_t>(n) * inst.subchannels + f];
    const double value = evaluate_micro(inst, assignment).objective;
    if (value > best.objective) {
      best.objective = value;
      best.assignment = assignment;
    }
  } while (next_assignment(flat, base));
  return best;
}

SequentialReport sequential_group_optimum(const MicroInstance& inst) {
  const double space = inst.group_space_size();
  if (space > 1e7)
    throw DomainError("sequential enumeration refused: group space has " +
                      std::to_string(space) + " actions");

  const int base = inst.users_per_bs + 1;
  SequentialReport report;
  report.assignment.assign(inst.bs_count,
                           std::vector<int>(inst.subchannels, 0));

  for (int m = 0; m < inst.srb_count; ++m) {
    // slots of group m across all BSs, in (n, position) order
    std::vector<std::pair<int, int>> slots;  // (bs, freq)
    for (int n = 0; n < inst.bs_count; ++n)
      for (int f : inst.partition[n][m]) slots.emplace_back(n, f);

    std::vector<int> digits(slots.size(), 0);
    double best_value = -1.0;
    std::vector<int> best_digits;
    std::vector<std::vector<int>> candidate = report.assignment;
    do {
      for (std::size_t i = 0; i < slots.size(); ++i)
        candidate[slots[i].first][slots[i].second] = digits[i];
      const double value = evaluate_micro(inst, candidate).group_objective[m];
      if (value > best_value) {
        best_value = value;
        best_digits = digits;
      }
    } while (next_assignment(digits, base));

    for (std::size_t i = 0; i < slots.size(); ++i)
      report.assignment[slots[i].first][slots[i].second] = best_digits[i];
    report.group_values.push_back(best_value);
    report.total += best_value;
  }

  report.composed_objective = evaluate_micro(inst, report.assignment).objective;
  return report;
}

CheckReport check_lemma2(const MicroInstance& inst, double tolerance) {
  const int base = inst.users_per_bs + 1;
  CheckReport report;
  report.passed = true;

  for (int m = 1; m < inst.srb_count; ++m) {
    // conditioning slots: groups 0..m-1 across all BSs
    std::vector<std::pair<int, int>> cond_slots;
    for (int g = 0; g < m; ++g)
      for (int n = 0; n < inst.bs_count; ++n)
        for (int f : inst.partition[n][g]) cond_slots.emplace_back(n, f);
    std::vector<std::pair<int, int>> own_slots;
    for (int n = 0; n < inst.bs_count; ++n)
      for (int f : inst.partition[n][m]) own_slots.emplace_back(n, f);

    const double combos = std::pow(base, static_cast<double>(cond_slots.size())) *
                          std::pow(base, static_cast<double>(own_slots.size()));
    if (combos > 1e7)
      throw DomainError("lemma2 enumeration refused: " + std::to_string(combos) +
                        " evaluations");

    double reference = 0.0;
    bool have_reference = false;
    std::vector<int> cond(cond_slots.size(), 0);
    std::vector<std::vector<int>> assignment(
        inst.bs_count, std::vector<int>(inst.subchannels, 0));
    do {
      for (auto& row : assignment) std::fill(row.begin(), row.end(), 0);
      for (std::size_t i = 0; i < cond_slots.size(); ++i)
        assignment[cond_slots[i].first][cond_slots[i].second] = cond[i];

      double best = -1.0;
      std::vector<int> own(own_slots.size(), 0);
      do {
        for (std::size_t i = 0; i < own_slots.size(); ++i)
          assignment[own_slots[i].first][own_slots[i].second] = own[i];
        best = std::max(best, evaluate_micro(inst, assignment).group_objective[m]);
      } while (next_assignment(own, base));

      if (!have_reference) {
        reference = best;
        have_reference = true;
      } else {
        const double dev = std::abs(best - reference) /
                           std::max(1.0, std::abs(reference));
        report.max_deviation = std::max(report.max_deviation, dev);
        if (dev > tolerance) report.passed = false;
      }
    } while (next_assignment(cond, base));
  }

  std::ostringstream detail;
  detail << "max conditional-optimum deviation " << report.max_deviation;
  report.detail = detail.str();
  return report;
}

namespace {

std::vector<std::vector<int>> random_micro_assignment(const MicroInstance& inst,
                                                      CounterRng& rng) {
  std::vector<std::vector<int>> assignment(
      inst.bs_count, std::vector<int>(inst.subchannels, 0));
  for (auto& row : assignment)
    for (int& v : row)
      v = static_cast<int>(rng.below(inst.users_per_bs + 1));
  return assignment;
}

}  // namespace

CheckReport check_assumptions_micro(const MicroInstance& inst, int samples,
                                    int resamples, CounterRng& rng) {
  CheckReport report;
  report.passed = true;
  for (int i = 0; i < samples; ++i) {
    auto assignment = random_micro_assignment(inst, rng);
    const MicroOutcome outcome = evaluate_micro(inst, assignment);

    double group_sum = 0.0;
    for (double g : outcome.group_objective) group_sum += g;
    const double add_dev = std::abs(outcome.objective - group_sum) /
                           std::max(1.0, std::abs(outcome.objective));
    report.max_deviation = std::max(report.max_deviation, add_dev);
    if (add_dev > 1e-12) report.passed = false;

    const int m = i % inst.srb_count;
    for (int s = 0; s < resamples; ++s) {
      auto resampled = random_micro_assignment(inst, rng);
      // pin group m to the original action
      for (int n = 0; n < inst.bs_count; ++n)
        for (int f : inst.partition[n][m]) resampled[n][f] = assignment[n][f];
      const MicroOutcome other = evaluate_micro(inst, resampled);
      if (other.group_objective[m] != outcome.group_objective[m]) {
        report.passed = false;
        report.max_deviation = std::max(
            report.max_deviation,
            std::abs(other.group_objective[m] - outcome.group_objective[m]));
      }
    }
  }
  report.detail = "max deviation " + std::to_string(report.max_deviation);
  return report;
}

TinyMdp TinyMdp::random(int states, int actions, double gamma, CounterRng& rng) {
  TinyMdp mdp;
  mdp.states = states;
  mdp.actions = actions;
  mdp.gamma = gamma;
  mdp.transition.resize(static_cast<std::size_t>(states) * actions * states);
  for (int s = 0; s < states; ++s) {
    for (int a = 0; a < actions; ++a) {
      double norm = 0.0;
      for (int s2 = 0; s2 < states; ++s2) {
        const double w = rng.uniform(0.01, 1.0);
        mdp.transition[(static_cast<std::size_t>(s) * actions + a) * states + s2] = w;
        norm += w;
      }
      for (int s2 = 0; s2 < states; ++s2)
        mdp.transition[(static_cast<std::size_t>(s) * actions + a) * states + s2] /= norm;
    }
  }
  mdp.mu.resize(states);
  double norm = 0.0;
  for (int s = 0; s < states; ++s) {
    mdp.mu[s] = rng.uniform(0.01, 1.0);
    norm += mdp.mu[s];
  }
  for (double& v : mdp.mu) v /= norm;
  return mdp;
}

void TinyMdp::validate() const {
  if (gamma <= 0.0 || gamma >= 1.0)
    throw DomainError("tiny mdp: gamma must be in (0, 1)");
  for (int s = 0; s < states; ++s) {
    for (int a = 0; a < actions; ++a) {
      double sum = 0.0;
      for (int s2 = 0; s2 < states; ++s2) sum += p(s, a, s2);
      if (std::abs(sum - 1.0) > 1e-12)
        throw DomainError("tiny mdp: transition row does not sum to 1");
    }
  }
}

CheckReport check_proposition1(const TinyMdp& mdp,
                               const std::vector<double>& policy, int f_tables,
                               CounterRng& rng, double tolerance) {
  mdp.validate();
  const int s_count = mdp.states;
  const int a_count = mdp.actions;
  if (static_cast<int>(policy.size()) != s_count * a_count)
    throw ContractError("check_proposition1: policy size mismatch");

  Eigen::MatrixXd p_pi = Eigen::MatrixXd::Zero(s_count, s_count);
  for (int s = 0; s < s_count; ++s)
    for (int a = 0; a < a_count; ++a)
      for (int s2 = 0; s2 < s_count; ++s2)
        p_pi(s, s2) += policy[static_cast<std::size_t>(s) * a_count + a] *
                       mdp.p(s, a, s2);

  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(s_count, s_count);
  Eigen::PartialPivLU<Eigen::MatrixXd> lhs_solver(identity - mdp.gamma * p_pi);
  Eigen::PartialPivLU<Eigen::MatrixXd> occ_solver(
      identity - mdp.gamma * p_pi.transpose());

  Eigen::VectorXd mu(s_count);
  for (int s = 0; s < s_count; ++s) mu(s) = mdp.mu[s];
  // discounted occupancy: d = (1 - gamma) (I - gamma P_pi^T)^{-1} mu
  const Eigen::VectorXd occupancy = occ_solver.solve((1.0 - mdp.gamma) * mu);

  CheckReport report;
  report.passed = true;
  for (int table = 0; table < f_tables; ++table) {
    Eigen::VectorXd f_pi = Eigen::VectorXd::Zero(s_count);
    for (int s = 0; s < s_count; ++s)
      for (int a = 0; a < a_count; ++a)
        f_pi(s) += policy[static_cast<std::size_t>(s) * a_count + a] *
                   rng.uniform(-5.0, 5.0);
    const Eigen::VectorXd v = lhs_solver.solve(f_pi);
    const double lhs = mu.dot(v);
    const double rhs = occupancy.dot(f_pi) / (1.0 - mdp.gamma);
    const double dev = std::abs(lhs - rhs);
    report.max_deviation = std::max(report.max_deviation, dev);
    if (dev > tolerance) report.passed = false;
  }
  report.detail = "max |lhs - rhs| " + std::to_string(report.max_deviation);
  return report;
}

CheckReport check_assumptions_env(Environment& env, int samples, int resamples,
                                  std::uint64_t seed) {
  CounterRng rng(seed, {77});
  const SystemConfig& cfg = env.config();
  CheckReport report;
  report.passed = true;

  auto random_joint = [&]() {
    JointAction joint(static_cast<std::size_t>(cfg.bs_count()) * cfg.srb_count);
    for (int n = 0; n < cfg.bs_count(); ++n) {
      std::vector<int> active;
      for (int k = 0; k < cfg.users_per_bs; ++k)
        if (env.population().user(n, k).active) active.push_back(k + 1);
      for (int m = 0; m < cfg.srb_count; ++m) {
        AgentAction a;
        a.assignment.resize(cfg.srb_size());
        for (int& v : a.assignment) {
          const int pick = static_cast<int>(rng.below(active.size() + 1));
          v = pick == 0 ? 0 : active[pick - 1];
        }
        joint[static_cast<std::size_t>(n) * cfg.srb_count + m] = std::move(a);
      }
    }
    return joint;
  };

  for (int i = 0; i < samples; ++i) {
    if (i % 100 == 0) env.reset(seed + i);
    const JointAction joint = random_joint();
    const StepOutcome outcome = env.evaluate(joint);

    double group_sum = 0.0;
    for (double g : outcome.group_reward) group_sum += g;
    const double add_dev = std::abs(outcome.reward - group_sum) /
                           std::max(1.0, std::abs(outcome.reward));
    report.max_deviation = std::max(report.max_deviation, add_dev);
    if (add_dev > 1e-12) report.passed = false;

    if (resamples > 0 && i % 100 == 0) {
      const int m = i % cfg.srb_count;
      for (int s = 0; s < resamples; ++s) {
        JointAction other = random_joint();
        for (int n = 0; n < cfg.bs_count(); ++n)
          other[static_cast<std::size_t>(n) * cfg.srb_count + m] =
              joint[static_cast<std::size_t>(n) * cfg.srb_count + m];
        const StepOutcome alt = env.evaluate(other);
        if (alt.group_reward[m] != outcome.group_reward[m]) report.passed = false;
      }
    }
  }
  report.detail = "max additivity deviation " + std::to_string(report.max_deviation);
  return report;
}

// ---------------------------------------------------------------------------
// verification suites for the CLI
// ---------------------------------------------------------------------------

namespace {

double mlp_fd_error(const MlpConfig& cfg, std::uint64_t seed) {
  CounterRng init(seed, {31});
  Mlp net(cfg, init);
  CounterRng data(seed, {32});
  const int batch = 3;
  Mat x(cfg.input_dim, batch);
  for (int c = 0; c < batch; ++c)
    for (int r = 0; r < cfg.input_dim; ++r) x(r, c) = data.uniform(-2.0, 2.0);
  Mat w(cfg.output_dim, batch);
  for (int c = 0; c < batch; ++c)
    for (int r = 0; r < cfg.output_dim; ++r) w(r, c) = data.uniform(-1.0, 1.0);

  // loss = sum(w .* output)
  Mlp::Cache cache;
  Mat y = net.forward(x, &cache);
  Mlp::Grads grads = net.zero_grads();
  net.backward(cache, w, &grads);

  auto loss_at = [&]() {
    return (net.forward(x).cwiseProduct(w)).sum();
  };

  const double h = 1e-5;
  double max_rel = 0.0;
  for (int l = 0; l < net.layer_count(); ++l) {
    Mat& weight = net.layers()[l].weight;
    for (int r = 0; r < weight.rows(); ++r) {
      for (int c = 0; c < weight.cols(); ++c) {
        const double saved = weight(r, c);
        weight(r, c) = saved + h;
        const double up = loss_at();
        weight(r, c) = saved - h;
        const double down = loss_at();
        weight(r, c) = saved;
        const double fd = (up - down) / (2.0 * h);
        const double rel = std::abs(fd - grads.weight[l](r, c)) /
                           std::max(1.0, std::abs(fd));
        max_rel = std::max(max_rel, rel);
      }
    }
    Vec& bias = net.layers()[l].bias;
    for (int r = 0; r < bias.size(); ++r) {
      const double saved = bias(r);
      bias(r) = saved + h;
      const double up = loss_at();
      bias(r) = saved - h;
      const double down = loss_at();
      bias(r) = saved;
      const double fd = (up - down) / (2.0 * h);
      const double rel =
          std::abs(fd - grads.bias[l](r)) / std::max(1.0, std::abs(fd));
      max_rel = std::max(max_rel, rel);
    }
  }
  return max_rel;
}

SystemConfig desk_system() {
  SystemConfig cfg;
  cfg.bs = {BsSite{BsKind::kTbs, {250.0, 500.0, 25.0}},
            BsSite{BsKind::kTbs, {750.0, 500.0, 25.0}},
            BsSite{BsKind::kNtbs, {500.0, 500.0, 200.0}}};
  cfg.users_per_bs = 6;
  cfg.subchannels = 24;
  cfg.srb_count = 3;
  return cfg;
}

SuiteResult run_theorem1_suite() {
  SuiteResult result{"theorem1", true, ""};
  CounterRng rng(2026, {41});
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    MicroInstance inst = MicroInstance::random(2, 2, 4, 2, rng);
    const OptimumReport joint = brute_force_joint_optimum(inst);
    const SequentialReport seq = sequential_group_optimum(inst);
    const double dev = std::abs(joint.objective - seq.total) /
                       std::max(1.0, std::abs(joint.objective));
    worst = std::max(worst, dev);
    if (dev > 1e-9) result.passed = false;
  }
  result.detail = "100 micro instances, max relative gap " + std::to_string(worst);
  return result;
}

SuiteResult run_lemma1_suite() {
  SuiteResult result{"lemma1", true, ""};
  CounterRng rng(2026, {42});
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    MicroInstance inst = MicroInstance::random(2, 2, 4, 2, rng);
    const SequentialReport seq = sequential_group_optimum(inst);
    const double dev = std::abs(seq.total - seq.composed_objective) /
                       std::max(1.0, std::abs(seq.composed_objective));
    worst = std::max(worst, dev);
    if (dev > 1e-9) result.passed = false;
  }
  result.detail = "sum of group values vs composed objective, max gap " +
                  std::to_string(worst);
  return result;
}

SuiteResult run_lemma2_suite() {
  SuiteResult result{"lemma2", true, ""};
  CounterRng rng(2026, {43});
  for (int i = 0; i < 20; ++i) {
    MicroInstance inst = MicroInstance::random(2, 2, 4, 2, rng);
    const CheckReport report = check_lemma2(inst);
    if (!report.passed) {
      result.passed = false;
      result.detail = report.detail;
    }
  }
  // negative control: a frequency-misaligned partition must be detected
  MicroInstance bad = MicroInstance::random(2, 2, 4, 2, rng);
  bad.misalign(1, 0, 1);
  if (check_lemma2(bad).passed) {
    result.passed = false;
    result.detail = "negative control not detected";
  }
  if (result.detail.empty())
    result.detail = "20 instances constant, misaligned control detected";
  return result;
}

SuiteResult run_proposition1_suite() {
  SuiteResult result{"proposition1", true, ""};
  CounterRng rng(2026, {44});
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const int states = 2 + static_cast<int>(rng.below(4));  // 2..5
    const int actions = 2 + static_cast<int>(rng.below(2));
    TinyMdp mdp = TinyMdp::random(states, actions, 0.9, rng);
    std::vector<double> policy(static_cast<std::size_t>(states) * actions);
    for (int s = 0; s < states; ++s) {
      double norm = 0.0;
      for (int a = 0; a < actions; ++a) {
        policy[static_cast<std::size_t>(s) * actions + a] = rng.uniform(0.05, 1.0);
        norm += policy[static_cast<std::size_t>(s) * actions + a];
      }
      for (int a = 0; a < actions; ++a)
        policy[static_cast<std::size_t>(s) * actions + a] /= norm;
    }
    const CheckReport report = check_proposition1(mdp, policy, 20, rng);
    worst = std::max(worst, report.max_deviation);
    if (!report.passed) result.passed = false;
  }
  result.detail = "20 MDPs x 20 f tables, max |lhs-rhs| " + std::to_string(worst);
  return result;
}

SuiteResult run_assumptions_suite() {
  SuiteResult result{"assumptions", true, ""};
  SystemConfig cfg = desk_system();
  DynamicsConfig dyn;
  Environment env(cfg, dyn, Environment::Mode::kEpisodic, 99);
  const CheckReport report = check_assumptions_env(env, 2000, 20, 99);
  result.passed = report.passed;
  result.detail = report.detail;

  CounterRng rng(2026, {45});
  MicroInstance bad = MicroInstance::random(2, 2, 4, 2, rng);
  bad.misalign(0, 0, 1);
  const CheckReport control = check_assumptions_micro(bad, 50, 20, rng);
  if (control.passed) {
    result.passed = false;
    result.detail += "; misaligned control not detected";
  }
  return result;
}

SuiteResult run_gradients_suite() {
  SuiteResult result{"gradients", true, ""};
  CounterRng pick(2026, {46});
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    MlpConfig cfg;
    cfg.input_dim = 2 + static_cast<int>(pick.below(5));
    cfg.output_dim = 1 + static_cast<int>(pick.below(4));
    const int depth = 1 + static_cast<int>(pick.below(3));
    cfg.hidden.clear();
    for (int d = 0; d < depth; ++d)
      cfg.hidden.push_back(3 + static_cast<int>(pick.below(6)));
    cfg.activation = (i % 2 == 0) ? Activation::kTanh : Activation::kRelu;
    cfg.output_gain = 1.0;
    worst = std::max(worst, mlp_fd_error(cfg, 1000 + i));
  }
  result.passed = worst <= 1e-4;
  result.detail = "20 nets, max FD relative error " + std::to_string(worst);
  return result;
}

SuiteResult run_physics_suite() {
  SuiteResult result{"physics", true, ""};
  SystemConfig cfg = desk_system();
  DynamicsConfig dyn;
  Environment env(cfg, dyn, Environment::Mode::kEpisodic, 123);
  CounterRng rng(123, {47});
  const double ulp_budget =
      4.0 * (std::nextafter(cfg.p_max_w, cfg.p_max_w * 2.0) - cfg.p_max_w);

  int violations = 0;
  for (int i = 0; i < 100000; ++i) {
    if (i % 1000 == 0) env.reset(i);
    JointAction joint(static_cast<std::size_t>(cfg.bs_count()) * cfg.srb_count);
    std::vector<std::vector<int>> active(cfg.bs_count());
    for (int n = 0; n < cfg.bs_count(); ++n)
      for (int k = 0; k < cfg.users_per_bs; ++k)
        if (env.population().user(n, k).active) active[n].push_back(k + 1);
    for (int n = 0; n < cfg.bs_count(); ++n) {
      for (int m = 0; m < cfg.srb_count; ++m) {
        AgentAction a;
        a.assignment.resize(cfg.srb_size());
        for (int& v : a.assignment) {
          const int pick = static_cast<int>(rng.below(active[n].size() + 1));
          v = pick == 0 ? 0 : active[n][pick - 1];
        }
        joint[static_cast<std::size_t>(n) * cfg.srb_count + m] = std::move(a);
      }
    }
    const StepOutcome outcome = env.evaluate(joint);

    for (int n = 0; n < cfg.bs_count(); ++n) {
      double total = 0.0;
      int active_srbs = 0;
      for (int m = 0; m < cfg.srb_count; ++m) {
        const AgentAction& a = joint[static_cast<std::size_t>(n) * cfg.srb_count + m];
        const auto power = decode_power(a, cfg.p_max_w, cfg.srb_count);
        int count = 0;
        double level = 0.0;
        for (double p : power) {
          if (p > 0.0) {
            ++count;
            level = p;
          }
        }
        total += level * count;  // uniform level, so this is the SRB subtotal
        if (count > 0) ++active_srbs;
      }
      if (total > cfg.p_max_w + ulp_budget) ++violations;
      const bool all_active = active_srbs == cfg.srb_count;
      const bool at_budget = std::abs(total - cfg.p_max_w) <= ulp_budget;
      if (all_active != at_budget) ++violations;
    }
    for (int u = 0; u < cfg.total_user_slots(); ++u) {
      if (outcome.cost_bps[u] < 0.0) ++violations;
      const UserRecord& user = env.population().users()[u];
      if (user.active && outcome.user_rate(u) >= user.eta_bps &&
          outcome.cost_bps[u] != 0.0)
        ++violations;
    }
  }
  result.passed = violations == 0;
  result.detail = std::to_string(violations) + " violations over 1e5 actions";
  return result;
}

}  // namespace

std::vector<SuiteResult> run_verification(const std::string& scope) {
  std::vector<SuiteResult> results;
  auto wanted = [&](const std::string& name) {
    return scope.empty() || scope == name;
  };
  if (wanted("lemma1")) results.push_back(run_lemma1_suite());
  if (wanted("lemma2")) results.push_back(run_lemma2_suite());
  if (wanted("theorem1")) results.push_back(run_theorem1_suite());
  if (wanted("proposition1")) results.push_back(run_proposition1_suite());
  if (wanted("assumptions")) results.push_back(run_assumptions_suite());
  if (wanted("gradients")) results.push_back(run_gradients_suite());
  if (wanted("physics")) results.push_back(run_physics_suite());
  if (results.empty())
    throw ConfigError("verify: unknown scope '" + scope + "'");
  return results;
}

}  // namespace corra
