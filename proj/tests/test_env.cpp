/*
 * Copyright (c) 2026 The corra authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include <cmath>
#include <set>

#include "corra/env.hpp"
#include "corra/errors.hpp"
#include "corra/verify.hpp"
#include "doctest.h"

using namespace corra;

namespace {

SystemConfig desk_config() {
  SystemConfig cfg;
  cfg.bs = {BsSite{BsKind::kTbs, {250.0, 500.0, 25.0}},
            BsSite{BsKind::kTbs, {750.0, 500.0, 25.0}},
            BsSite{BsKind::kNtbs, {500.0, 500.0, 200.0}}};
  cfg.users_per_bs = 6;
  cfg.subchannels = 24;
  cfg.srb_count = 3;
  return cfg;
}

SystemConfig micro_config() {
  SystemConfig cfg;
  cfg.bs = {BsSite{BsKind::kTbs, {250.0, 500.0, 25.0}},
            BsSite{BsKind::kTbs, {750.0, 500.0, 25.0}}};
  cfg.users_per_bs = 2;
  cfg.subchannels = 4;
  cfg.srb_count = 2;
  return cfg;
}

JointAction all_unactivated(const SystemConfig& cfg) {
  JointAction joint(static_cast<std::size_t>(cfg.bs_count()) * cfg.srb_count);
  for (auto& a : joint) a.assignment.assign(cfg.srb_size(), 0);
  return joint;
}

JointAction random_legal_joint(const Environment& env, CounterRng& rng) {
  const SystemConfig& cfg = env.config();
  JointAction joint = all_unactivated(cfg);
  for (int n = 0; n < cfg.bs_count(); ++n) {
    std::vector<int> active;
    for (int k = 0; k < cfg.users_per_bs; ++k)
      if (env.population().user(n, k).active) active.push_back(k + 1);
    for (int m = 0; m < cfg.srb_count; ++m) {
      for (int& v : joint[n * cfg.srb_count + m].assignment) {
        const int pick = static_cast<int>(rng.below(active.size() + 1));
        v = pick == 0 ? 0 : active[pick - 1];
      }
    }
  }
  return joint;
}

}  // namespace

TEST_CASE("partition splits into contiguous equal blocks") {
  const SrbPartition p = build_partition(6, 3);
  CHECK(p.srb_size == 2);
  CHECK(p.first(0) == 0);
  CHECK(p.first(1) == 2);
  CHECK(p.first(2) == 4);
  CHECK(p.srb_of(0) == 0);
  CHECK(p.srb_of(3) == 1);
  CHECK(p.srb_of(5) == 2);
}

TEST_CASE("partition handles the forty-subchannel block size") {
  const SrbPartition p = build_partition(80, 2);
  CHECK(p.srb_size == 40);
  CHECK(p.first(1) == 40);
}

TEST_CASE("indivisible partitions are rejected") {
  CHECK_THROWS_AS(build_partition(7, 2), ConfigError);
}

TEST_CASE("power decode splits the SRB budget over active subchannels") {
  AgentAction a;
  a.assignment = {1, 0, 2, 0};
  const auto power = decode_power(a, 8.0, 2);
  CHECK(power[0] == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(power[1] == 0.0);
  CHECK(power[2] == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(power[3] == 0.0);
}

TEST_CASE("all-unactivated decodes to zero power") {
  AgentAction a;
  a.assignment = {0, 0, 0, 0};
  for (double p : decode_power(a, 8.0, 2)) CHECK(p == 0.0);
}

TEST_CASE("fully active SRBs exactly exhaust the power budget") {
  AgentAction a;
  a.assignment = {1, 1, 2, 1};
  const auto power = decode_power(a, 8.0, 2);
  double total = 0.0;
  for (double p : power) {
    CHECK(p == doctest::Approx(1.0).epsilon(1e-15));
    total += p;
  }
  CHECK(2.0 * total == doctest::Approx(8.0).epsilon(1e-15));  // both SRBs active
}

TEST_CASE("subchannel rate formula") {
  CHECK(subchannel_rate(1e-10, 0.0, 0.0, 180e3, std::pow(10.0, -20.4)) == 0.0);

  const double w = 180e3;
  const double n0 = std::pow(10.0, -20.4);
  const double expected = w * std::log2(1.0 + 1e-10 * 1.0 / (w * n0));
  const double got = subchannel_rate(1e-10, 1.0, 0.0, w, n0);
  CHECK(got == doctest::Approx(expected).epsilon(1e-15));
  CHECK(got == doctest::Approx(3.08e6).epsilon(0.01));

  // interference-dominated limit
  const double h = 1e-10;
  const double g = 1e6 * h * 1.0;
  CHECK(subchannel_rate(h, 1.0, g, w, n0) <
        w * std::log2(1.0 + 1e-6) * 1.0001);
}

TEST_CASE("single BS sees zero interference") {
  SystemConfig cfg;
  cfg.bs = {BsSite{BsKind::kTbs, {500.0, 500.0, 25.0}}};
  cfg.users_per_bs = 3;
  cfg.subchannels = 6;
  cfg.srb_count = 2;
  Environment env(cfg, DynamicsConfig{}, Environment::Mode::kEpisodic, 7);
  env.reset(1);
  CounterRng rng(7);
  const StepOutcome out = env.evaluate(random_legal_joint(env, rng));
  for (int u = 0; u < cfg.total_user_slots(); ++u)
    for (int f = 0; f < cfg.subchannels; ++f)
      CHECK(out.interference(u, f) == 0.0);
}

TEST_CASE("interference equals the independent cross-BS sum") {
  SystemConfig cfg = desk_config();
  Environment env(cfg, DynamicsConfig{}, Environment::Mode::kEpisodic, 11);
  env.reset(0);
  CounterRng rng(11);
  const JointAction joint = random_legal_joint(env, rng);
  const StepOutcome out = env.evaluate(joint);

  // oracle: recompute transmit powers and sum over the other BSs
  std::vector<double> power(static_cast<std::size_t>(cfg.bs_count()) * cfg.subchannels, 0.0);
  for (int n = 0; n < cfg.bs_count(); ++n) {
    for (int m = 0; m < cfg.srb_count; ++m) {
      const auto p = decode_power(joint[n * cfg.srb_count + m], cfg.p_max_w,
                                  cfg.srb_count);
      for (int s = 0; s < cfg.srb_size(); ++s)
        power[static_cast<std::size_t>(n) * cfg.subchannels + m * cfg.srb_size() + s] = p[s];
    }
  }
  for (int n = 0; n < cfg.bs_count(); ++n) {
    for (int m = 0; m < cfg.srb_count; ++m) {
      const AgentAction& a = joint[n * cfg.srb_count + m];
      for (int s = 0; s < cfg.srb_size(); ++s) {
        const int cls = a.assignment[s];
        if (cls == 0) continue;
        const int f = m * cfg.srb_size() + s;
        const int u = n * cfg.users_per_bs + cls - 1;
        double expected = 0.0;
        for (int l = 0; l < cfg.bs_count(); ++l) {
          if (l == n) continue;
          expected += env.gain(l, u, f) *
                      power[static_cast<std::size_t>(l) * cfg.subchannels + f];
        }
        CHECK(out.interference(u, f) == doctest::Approx(expected).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("all-unactivated steps yield zero reward and full QoS cost") {
  SystemConfig cfg = desk_config();
  Environment env(cfg, DynamicsConfig{}, Environment::Mode::kEpisodic, 13);
  env.reset(2);
  const StepOutcome out = env.evaluate(all_unactivated(cfg));
  CHECK(out.reward == 0.0);
  for (double g : out.group_reward) CHECK(g == 0.0);
  for (int u = 0; u < cfg.total_user_slots(); ++u) {
    if (env.population().users()[u].active) {
      CHECK(out.cost_bps[u] == cfg.qos_rate_bps);
      CHECK(out.qos_miss[u] == 1);
    } else {
      CHECK(out.cost_bps[u] == 0.0);
      CHECK(out.qos_miss[u] == 0);
    }
  }
}

TEST_CASE("reward decomposes additively over the SRB groups") {
  SystemConfig cfg = desk_config();
  Environment env(cfg, DynamicsConfig{}, Environment::Mode::kEpisodic, 17);
  CounterRng rng(17);
  for (int i = 0; i < 500; ++i) {
    if (i % 50 == 0) env.reset(i);
    const StepOutcome out = env.evaluate(random_legal_joint(env, rng));
    double sum = 0.0;
    for (double g : out.group_reward) sum += g;
    CHECK(std::abs(out.reward - sum) <= 1e-12 * std::max(1.0, out.reward));
  }
}

TEST_CASE("environment rates match the flat single-step oracle") {
  SystemConfig cfg = micro_config();
  cfg.subchannel_bandwidth_hz = 125e3;
  Environment env(cfg, DynamicsConfig{}, Environment::Mode::kEpisodic, 19);
  CounterRng rng(19);

  for (int trial = 0; trial < 20; ++trial) {
    env.reset(trial);
    // force everyone active so micro and env user sets agree
    // (episodic sampling keeps at least one active; rebuild instance from
    // whatever the environment holds)
    MicroInstance inst;
    inst.bs_count = cfg.bs_count();
    inst.users_per_bs = cfg.users_per_bs;
    inst.subchannels = cfg.subchannels;
    inst.srb_count = cfg.srb_count;
    inst.bandwidth_hz = cfg.subchannel_bandwidth_hz;
    inst.p_max_w = cfg.p_max_w;
    inst.noise_w = env.noise_w();
    inst.gain.resize(static_cast<std::size_t>(inst.bs_count) *
                     inst.total_users() * inst.subchannels);
    const int srb_size = cfg.srb_size();
    inst.partition.assign(inst.bs_count, {});
    for (int n = 0; n < inst.bs_count; ++n) {
      inst.partition[n].assign(inst.srb_count, {});
      for (int m = 0; m < inst.srb_count; ++m)
        for (int s = 0; s < srb_size; ++s)
          inst.partition[n][m].push_back(m * srb_size + s);
    }
    for (int tx = 0; tx < inst.bs_count; ++tx)
      for (int u = 0; u < inst.total_users(); ++u)
        for (int f = 0; f < inst.subchannels; ++f)
          inst.gain[(static_cast<std::size_t>(tx) * inst.total_users() + u) *
                        inst.subchannels +
                    f] = env.gain(tx, u, f);

    const JointAction joint = random_legal_joint(env, rng);
    std::vector<std::vector<int>> flat(cfg.bs_count(),
                                       std::vector<int>(cfg.subchannels, 0));
    for (int n = 0; n < cfg.bs_count(); ++n)
      for (int m = 0; m < cfg.srb_count; ++m)
        for (int s = 0; s < srb_size; ++s)
          flat[n][m * srb_size + s] = joint[n * cfg.srb_count + m].assignment[s];

    const StepOutcome out = env.evaluate(joint);
    const MicroOutcome oracle = evaluate_micro(inst, flat);

    // the oracle normalizes by all users; rescale to the active count
    const double rescale = static_cast<double>(inst.total_users()) /
                           std::max(out.active_users, 1);
    CHECK(out.reward ==
          doctest::Approx(oracle.objective * rescale).epsilon(1e-12));
    for (int m = 0; m < cfg.srb_count; ++m)
      CHECK(out.group_reward[m] ==
            doctest::Approx(oracle.group_objective[m] * rescale).epsilon(1e-12));
  }
}

TEST_CASE("psi accumulates zero for the first agent and without prior activity") {
  SystemConfig cfg = desk_config();
  Environment env(cfg, DynamicsConfig{}, Environment::Mode::kEpisodic, 23);
  env.reset(0);
  const ObsLayout layout = ObsLayout::of(cfg);

  const Observation first = env.observe(0, 0, {});
  for (int k = 0; k < cfg.users_per_bs; ++k)
    CHECK(first.features[layout.psi_rate + k] == 0.0);

  std::vector<AgentAction> prior(1);
  prior[0].assignment.assign(cfg.srb_size(), 0);
  const Observation second = env.observe(0, 1, prior);
  for (int k = 0; k < cfg.users_per_bs; ++k)
    CHECK(second.features[layout.psi_rate + k] == 0.0);
}

TEST_CASE("psi is exact in a single-BS system") {
  SystemConfig cfg;
  cfg.bs = {BsSite{BsKind::kTbs, {500.0, 500.0, 25.0}}};
  cfg.users_per_bs = 3;
  cfg.subchannels = 6;
  cfg.srb_count = 3;
  Environment env(cfg, DynamicsConfig{}, Environment::Mode::kEpisodic, 29);
  env.reset(4);
  CounterRng rng(29);
  const JointAction joint = random_legal_joint(env, rng);
  const StepOutcome out = env.evaluate(joint);

  // Observation of agent 2 given agents 0 and 1: psi must equal the exact
  // accumulated rate on their SRBs because there is no interference.
  std::vector<AgentAction> prior = {joint[0], joint[1]};
  const Observation obs = env.observe(0, 2, prior);
  const ObsLayout layout = ObsLayout::of(cfg);
  for (int k = 0; k < cfg.users_per_bs; ++k) {
    double exact = 0.0;
    for (int f = 0; f < 2 * cfg.srb_size(); ++f) exact += out.rate(k, f);
    CHECK(obs.features[layout.psi_rate + k] * cfg.qos_rate_bps ==
          doctest::Approx(exact).epsilon(1e-9));
  }
}

TEST_CASE("reset is deterministic and seed-sensitive") {
  SystemConfig cfg = desk_config();
  Environment a(cfg, DynamicsConfig{}, Environment::Mode::kEpisodic, 31);
  Environment b(cfg, DynamicsConfig{}, Environment::Mode::kEpisodic, 31);
  a.reset(5);
  b.reset(5);
  for (int tx = 0; tx < cfg.bs_count(); ++tx)
    for (int u = 0; u < cfg.total_user_slots(); ++u)
      for (int f = 0; f < cfg.subchannels; ++f)
        CHECK(a.gain(tx, u, f) == b.gain(tx, u, f));

  // different episodes give different worlds
  std::set<long long> hashes;
  for (int e = 0; e < 100; ++e) {
    a.reset(e);
    double acc = 0.0;
    for (int u = 0; u < cfg.total_user_slots(); ++u) acc += a.gain(0, u, 0);
    hashes.insert(static_cast<long long>(acc * 1e18));
  }
  CHECK(hashes.size() == 100);
}

TEST_CASE("training reset draws truncated-poisson active counts") {
  SystemConfig cfg = desk_config();
  cfg.users_per_bs = 20;
  cfg.subchannels = 20;
  cfg.srb_count = 2;
  Environment env(cfg, DynamicsConfig{}, Environment::Mode::kEpisodic, 37);
  double sum = 0.0;
  const int n = 20000;
  for (int e = 0; e < n; ++e) {
    env.reset(e);
    const int c = env.population().active_count(0);
    REQUIRE(c >= 1);
    REQUIRE(c <= 20);
    sum += c;
  }
  CHECK(sum / n == doctest::Approx(truncated_poisson_mean(10.0, 20)).epsilon(0.02));
}

TEST_CASE("observation layout zeroes inactive users and sets one-hots") {
  SystemConfig cfg = desk_config();
  Environment env(cfg, DynamicsConfig{}, Environment::Mode::kEpisodic, 41);
  env.reset(3);
  const ObsLayout layout = ObsLayout::of(cfg);
  const Observation obs = env.observe(1, 2, [&] {
    std::vector<AgentAction> prior(2);
    for (auto& a : prior) a.assignment.assign(cfg.srb_size(), 0);
    return prior;
  }());
  REQUIRE(static_cast<int>(obs.features.size()) == layout.total);

  for (int k = 0; k < cfg.users_per_bs; ++k) {
    const bool active = env.population().user(1, k).active;
    for (int s = 0; s < cfg.srb_size(); ++s) {
      const double v = obs.features[layout.own_gains + k * cfg.srb_size() + s];
      if (active) {
        CHECK(v >= -1.0);
        CHECK(v <= 1.0);
      } else {
        CHECK(v == 0.0);
      }
    }
  }
  for (int u = 0; u < cfg.total_user_slots(); ++u)
    CHECK(obs.features[layout.presence + u] ==
          (env.population().users()[u].active ? 1.0 : 0.0));
  CHECK(obs.features[layout.bs_onehot + 1] == 1.0);
  CHECK(obs.features[layout.bs_onehot + 0] == 0.0);
  CHECK(obs.features[layout.srb_onehot + 2] == 1.0);
}

TEST_CASE("observations do not depend on other base stations' actions") {
  SystemConfig cfg = desk_config();
  Environment env(cfg, DynamicsConfig{}, Environment::Mode::kEpisodic, 43);
  env.reset(6);
  std::vector<AgentAction> prior(1);
  prior[0].assignment.assign(cfg.srb_size(), 0);
  prior[0].assignment[0] = env.population().user(0, 0).active ? 1 : 0;
  const Observation once = env.observe(0, 1, prior);
  const Observation twice = env.observe(0, 1, prior);
  CHECK(once.features == twice.features);
}

TEST_CASE("contract violations are rejected") {
  SystemConfig cfg = desk_config();
  Environment env(cfg, DynamicsConfig{}, Environment::Mode::kEpisodic, 47);
  env.reset(0);

  JointAction wrong_count = all_unactivated(cfg);
  wrong_count.pop_back();
  CHECK_THROWS_AS(env.evaluate(wrong_count), ContractError);

  JointAction wrong_len = all_unactivated(cfg);
  wrong_len[0].assignment.pop_back();
  CHECK_THROWS_AS(env.evaluate(wrong_len), ContractError);

  // find an inactive user and select it
  int inactive = -1;
  for (int k = 0; k < cfg.users_per_bs; ++k)
    if (!env.population().user(0, k).active) inactive = k;
  if (inactive >= 0) {
    JointAction bad = all_unactivated(cfg);
    bad[0].assignment[0] = inactive + 1;
    CHECK_THROWS_AS(env.evaluate(bad), ContractError);
  }

  JointAction out_of_range = all_unactivated(cfg);
  out_of_range[0].assignment[0] = cfg.users_per_bs + 1;
  CHECK_THROWS_AS(env.evaluate(out_of_range), ContractError);
}

TEST_CASE("action mask allows class zero and exactly the active users") {
  SystemConfig cfg = desk_config();
  Environment env(cfg, DynamicsConfig{}, Environment::Mode::kEpisodic, 53);
  env.reset(9);
  for (int n = 0; n < cfg.bs_count(); ++n) {
    const auto mask = env.action_mask(n);
    REQUIRE(static_cast<int>(mask.size()) == cfg.users_per_bs + 1);
    CHECK(mask[0] == 1);
    for (int k = 0; k < cfg.users_per_bs; ++k)
      CHECK(mask[k + 1] == (env.population().user(n, k).active ? 1 : 0));
  }
}
