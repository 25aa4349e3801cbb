/*
 * Copyright (c) 2026 The corra authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include <cmath>

#include "corra/errors.hpp"
#include "corra/verify.hpp"
#include "doctest.h"

using namespace corra;

TEST_CASE("zero gains make every action optimal at objective zero") {
  CounterRng rng(90);
  MicroInstance inst = MicroInstance::random(2, 1, 2, 1, rng);
  for (double& g : inst.gain) g = 0.0;
  const OptimumReport best = brute_force_joint_optimum(inst);
  CHECK(best.objective == 0.0);
}

TEST_CASE("single-group sequential optimization is the joint optimum") {
  CounterRng rng(91);
  MicroInstance inst = MicroInstance::random(2, 2, 2, 1, rng);
  const OptimumReport joint = brute_force_joint_optimum(inst);
  const SequentialReport seq = sequential_group_optimum(inst);
  CHECK(seq.total == doctest::Approx(joint.objective).epsilon(1e-12));
}

TEST_CASE("sequential group optimization attains the joint optimum") {
  CounterRng rng(92);
  for (int i = 0; i < 25; ++i) {
    MicroInstance inst = MicroInstance::random(2, 2, 4, 2, rng);
    const OptimumReport joint = brute_force_joint_optimum(inst);
    const SequentialReport seq = sequential_group_optimum(inst);
    CHECK(std::abs(seq.total - joint.objective) <=
          1e-9 * std::max(1.0, std::abs(joint.objective)));
    // the per-group values sum to the composed objective
    CHECK(std::abs(seq.total - seq.composed_objective) <=
          1e-9 * std::max(1.0, std::abs(seq.composed_objective)));
  }
}

TEST_CASE("brute force refuses oversized instances") {
  CounterRng rng(93);
  MicroInstance inst = MicroInstance::random(3, 3, 6, 3, rng);
  CHECK_THROWS_AS(brute_force_joint_optimum(inst), DomainError);
}

TEST_CASE("conditional group optima are constant when aligned") {
  CounterRng rng(94);
  MicroInstance inst = MicroInstance::random(2, 2, 4, 2, rng);
  const CheckReport report = check_lemma2(inst);
  CHECK(report.passed);
  CHECK(report.max_deviation <= 1e-9);
}

TEST_CASE("a single group is vacuously constant") {
  CounterRng rng(95);
  MicroInstance inst = MicroInstance::random(2, 2, 2, 1, rng);
  CHECK(check_lemma2(inst).passed);
}

TEST_CASE("misaligned partitions break the conditional-optimum constancy") {
  CounterRng rng(96);
  MicroInstance inst = MicroInstance::random(2, 2, 4, 2, rng);
  inst.misalign(1, 0, 1);
  CHECK_FALSE(check_lemma2(inst).passed);
}

TEST_CASE("misaligned partitions break reward invariance") {
  CounterRng rng(97);
  MicroInstance inst = MicroInstance::random(2, 2, 4, 2, rng);
  inst.misalign(0, 0, 1);
  CounterRng sampler(98);
  CHECK_FALSE(check_assumptions_micro(inst, 50, 20, sampler).passed);
}

TEST_CASE("aligned instances satisfy both reward assumptions") {
  CounterRng rng(99);
  for (int i = 0; i < 5; ++i) {
    MicroInstance inst = MicroInstance::random(2, 2, 4, 2, rng);
    CounterRng sampler(100 + i);
    const CheckReport report = check_assumptions_micro(inst, 100, 10, sampler);
    CHECK(report.passed);
  }
}

TEST_CASE("occupancy identity on a one-state chain is the geometric series") {
  TinyMdp mdp;
  mdp.states = 1;
  mdp.actions = 1;
  mdp.gamma = 0.9;
  mdp.transition = {1.0};
  mdp.mu = {1.0};
  const std::vector<double> policy{1.0};
  CounterRng rng(101);
  const CheckReport report = check_proposition1(mdp, policy, 20, rng);
  CHECK(report.passed);
  CHECK(report.max_deviation <= 1e-10);
}

TEST_CASE("occupancy identity holds on random tiny MDPs") {
  CounterRng rng(102);
  for (int i = 0; i < 10; ++i) {
    TinyMdp mdp = TinyMdp::random(5, 3, 0.9, rng);
    std::vector<double> policy(15);
    for (int s = 0; s < 5; ++s) {
      double norm = 0.0;
      for (int a = 0; a < 3; ++a) {
        policy[s * 3 + a] = rng.uniform(0.1, 1.0);
        norm += policy[s * 3 + a];
      }
      for (int a = 0; a < 3; ++a) policy[s * 3 + a] /= norm;
    }
    const CheckReport report = check_proposition1(mdp, policy, 20, rng);
    CHECK(report.passed);
    CHECK(report.max_deviation <= 1e-8);
  }
}

TEST_CASE("transition rows must sum to one") {
  TinyMdp mdp;
  mdp.states = 2;
  mdp.actions = 1;
  mdp.gamma = 0.9;
  mdp.transition = {0.5, 0.4, 0.5, 0.5};  // first row sums to 0.9
  mdp.mu = {0.5, 0.5};
  CHECK_THROWS_AS(mdp.validate(), DomainError);
}

TEST_CASE("every verification suite passes on a fresh tree") {
  const std::vector<SuiteResult> results = run_verification("");
  REQUIRE(results.size() == 7);
  for (const SuiteResult& r : results) {
    INFO(r.name, ": ", r.detail);
    CHECK(r.passed);
  }
}

TEST_CASE("scope filters select a single suite") {
  const std::vector<SuiteResult> results = run_verification("proposition1");
  REQUIRE(results.size() == 1);
  CHECK(results[0].name == "proposition1");
  CHECK_THROWS_AS(run_verification("bogus"), ConfigError);
}
