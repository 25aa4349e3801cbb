/*
 * Copyright (c) 2026 The corra authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "corra/checkpoint.hpp"
#include "corra/errors.hpp"
#include "corra/nn.hpp"
#include "doctest.h"

using namespace corra;

namespace {

Mlp make_net(const MlpConfig& cfg, std::uint64_t seed) {
  CounterRng rng(seed);
  return Mlp(cfg, rng);
}

}  // namespace

TEST_CASE("zero parameters give zero logits and a uniform masked softmax") {
  MlpConfig cfg;
  cfg.input_dim = 4;
  cfg.hidden = {5};
  cfg.output_dim = 3;
  Mlp net = make_net(cfg, 1);
  for (auto& layer : net.layers()) {
    layer.weight.setZero();
    layer.bias.setZero();
  }
  Vec x(4);
  x << 1.0, -2.0, 3.0, 0.5;
  const Vec y = net.forward(x);
  for (int i = 0; i < 3; ++i) CHECK(y(i) == 0.0);

  const std::vector<std::uint8_t> mask{1, 1, 1};
  MaskedCategorical dist(std::span<const double>(y.data(), 3), mask);
  for (double p : dist.probabilities())
    CHECK(p == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("an identity single layer passes the input through") {
  MlpConfig cfg;
  cfg.input_dim = 3;
  cfg.hidden = {};
  cfg.output_dim = 3;
  Mlp net = make_net(cfg, 2);
  net.layers()[0].weight.setIdentity();
  net.layers()[0].bias.setZero();
  Vec x(3);
  x << 0.3, -1.2, 2.5;
  const Vec y = net.forward(x);
  for (int i = 0; i < 3; ++i) CHECK(y(i) == x(i));
}

TEST_CASE("forward matches a straight-line reimplementation") {
  MlpConfig cfg;
  cfg.input_dim = 5;
  cfg.hidden = {7, 6};
  cfg.output_dim = 4;
  cfg.output_gain = 1.0;
  Mlp net = make_net(cfg, 3);
  CounterRng rng(33);
  Vec x(5);
  for (int i = 0; i < 5; ++i) x(i) = rng.uniform(-2.0, 2.0);

  // oracle: naive per-neuron loops
  std::vector<double> a(x.data(), x.data() + 5);
  for (int l = 0; l < net.layer_count(); ++l) {
    const Mat& w = net.layers()[l].weight;
    const Vec& b = net.layers()[l].bias;
    std::vector<double> z(w.rows());
    for (int r = 0; r < w.rows(); ++r) {
      double acc = b(r);
      for (int c = 0; c < w.cols(); ++c) acc += w(r, c) * a[c];
      z[r] = (l + 1 == net.layer_count()) ? acc : std::tanh(acc);
    }
    a = z;
  }

  const Vec y = net.forward(x);
  for (int i = 0; i < 4; ++i)
    CHECK(y(i) == doctest::Approx(a[i]).epsilon(1e-12));
}

TEST_CASE("linear-layer weight gradient is the outer product with the input") {
  MlpConfig cfg;
  cfg.input_dim = 3;
  cfg.hidden = {};
  cfg.output_dim = 2;
  Mlp net = make_net(cfg, 4);
  Vec x(3);
  x << 0.5, -1.0, 2.0;
  Mlp::Cache cache;
  net.forward(Mat(x), &cache);
  Mlp::Grads grads = net.zero_grads();
  net.backward(cache, Mat::Ones(2, 1), &grads);  // loss = sum of outputs
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 3; ++c)
      CHECK(grads.weight[0](r, c) == doctest::Approx(x(c)).epsilon(1e-15));
    CHECK(grads.bias[0](r) == 1.0);
  }
}

TEST_CASE("chain rule through an identity net recovers d(x^2)/dx = 2x") {
  MlpConfig cfg;
  cfg.input_dim = 1;
  cfg.hidden = {};
  cfg.output_dim = 1;
  Mlp net = make_net(cfg, 5);
  net.layers()[0].weight(0, 0) = 1.0;
  net.layers()[0].bias(0) = 0.0;
  Mlp::Cache cache;
  const Mat y = net.forward(Mat(Vec::Constant(1, 3.0)), &cache);
  CHECK(y(0, 0) == 3.0);
  // loss = y^2, dL/dy = 2y = 6
  Mlp::Grads grads = net.zero_grads();
  Mat d_input;
  net.backward(cache, Mat::Constant(1, 1, 6.0), &grads, &d_input);
  CHECK(d_input(0, 0) == doctest::Approx(6.0).epsilon(1e-15));
}

TEST_CASE("analytic gradients match central finite differences") {
  MlpConfig cfg;
  cfg.input_dim = 4;
  cfg.hidden = {6, 5};
  cfg.output_dim = 3;
  cfg.output_gain = 1.0;
  Mlp net = make_net(cfg, 6);
  CounterRng rng(66);
  const int batch = 2;
  Mat x(4, batch), w(3, batch);
  for (int c = 0; c < batch; ++c) {
    for (int r = 0; r < 4; ++r) x(r, c) = rng.uniform(-2.0, 2.0);
    for (int r = 0; r < 3; ++r) w(r, c) = rng.uniform(-1.0, 1.0);
  }

  Mlp::Cache cache;
  net.forward(x, &cache);
  Mlp::Grads grads = net.zero_grads();
  net.backward(cache, w, &grads);

  auto loss = [&]() { return net.forward(x).cwiseProduct(w).sum(); };
  const double h = 1e-5;
  double max_rel = 0.0;
  for (int l = 0; l < net.layer_count(); ++l) {
    Mat& weight = net.layers()[l].weight;
    for (int r = 0; r < weight.rows(); ++r) {
      for (int c = 0; c < weight.cols(); ++c) {
        const double save = weight(r, c);
        weight(r, c) = save + h;
        const double up = loss();
        weight(r, c) = save - h;
        const double dn = loss();
        weight(r, c) = save;
        const double fd = (up - dn) / (2 * h);
        max_rel = std::max(max_rel, std::abs(fd - grads.weight[l](r, c)) /
                                        std::max(1.0, std::abs(fd)));
      }
    }
  }
  CHECK(max_rel <= 1e-4);
}

TEST_CASE("backward requires a forward cache") {
  MlpConfig cfg;
  cfg.input_dim = 2;
  cfg.hidden = {3};
  cfg.output_dim = 1;
  Mlp net = make_net(cfg, 7);
  Mlp::Cache empty;
  Mlp::Grads grads = net.zero_grads();
  CHECK_THROWS_AS(net.backward(empty, Mat::Ones(1, 1), &grads), ContractError);
}

TEST_CASE("shape mismatches are contract errors") {
  MlpConfig cfg;
  cfg.input_dim = 3;
  cfg.hidden = {4};
  cfg.output_dim = 2;
  Mlp net = make_net(cfg, 8);
  CHECK_THROWS_AS(net.forward(Mat::Ones(5, 1)), ContractError);
}

TEST_CASE("masked categorical distributes over unmasked classes") {
  const std::vector<double> equal{0.0, 0.0, 0.0};
  const std::vector<std::uint8_t> all{1, 1, 1};
  MaskedCategorical uniform(equal, all);
  for (double p : uniform.probabilities())
    CHECK(p == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(uniform.entropy() == doctest::Approx(std::log(3.0)).epsilon(1e-12));

  const std::vector<std::uint8_t> mask{1, 1, 0};
  MaskedCategorical halved(equal, mask);
  CHECK(halved.probabilities()[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(halved.probabilities()[1] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(halved.probabilities()[2] == 0.0);

  double total = 0.0;
  for (double p : halved.probabilities()) total += p;
  CHECK(std::abs(total - 1.0) <= 1e-12);
}

TEST_CASE("masked classes never sample and log_prob rejects them") {
  const std::vector<double> logits{1.0, 2.0, 3.0};
  const std::vector<std::uint8_t> mask{1, 0, 1};
  MaskedCategorical dist(logits, mask);
  CounterRng rng(9);
  for (int i = 0; i < 100000; ++i) CHECK(dist.sample(rng) != 1);
  CHECK_THROWS_AS(dist.log_prob(1), ContractError);
  CHECK(dist.entropy() >= 0.0);
}

TEST_CASE("an all-masked head is a contract error") {
  const std::vector<double> logits{1.0, 2.0};
  const std::vector<std::uint8_t> mask{0, 0};
  CHECK_THROWS_AS(MaskedCategorical(logits, mask), ContractError);
}

TEST_CASE("sample frequencies concentrate around the probabilities") {
  CounterRng rng(10);
  std::vector<double> logits{0.3, -0.7, 1.1, 0.0};
  const std::vector<std::uint8_t> mask{1, 1, 1, 1};
  MaskedCategorical dist(logits, mask);
  std::vector<long> counts(4, 0);
  const long n = 1000000;
  for (long i = 0; i < n; ++i) ++counts[dist.sample(rng)];
  for (int c = 0; c < 4; ++c) {
    const double p = dist.probabilities()[c];
    const double sigma = std::sqrt(p * (1.0 - p) / n);
    CHECK(std::abs(counts[c] / static_cast<double>(n) - p) <= 3.0 * sigma);
  }
}

TEST_CASE("log_prob is consistent with probabilities") {
  std::vector<double> logits{0.5, -1.5, 2.0};
  const std::vector<std::uint8_t> mask{1, 1, 1};
  MaskedCategorical dist(logits, mask);
  for (int c = 0; c < 3; ++c)
    CHECK(std::exp(dist.log_prob(c)) ==
          doctest::Approx(dist.probabilities()[c]).epsilon(1e-12));
}

TEST_CASE("zero gradients leave parameters untouched") {
  MlpConfig cfg;
  cfg.input_dim = 2;
  cfg.hidden = {3};
  cfg.output_dim = 2;
  Mlp net = make_net(cfg, 11);
  const Mat w0 = net.layers()[0].weight;
  AdamOptimizer opt(net, 1e-3);
  Mlp::Grads grads = net.zero_grads();
  opt.step(net, grads);
  CHECK(net.layers()[0].weight == w0);
}

TEST_CASE("the first adam step moves by roughly minus lr times sign") {
  MlpConfig cfg;
  cfg.input_dim = 1;
  cfg.hidden = {};
  cfg.output_dim = 1;
  Mlp net = make_net(cfg, 12);
  net.layers()[0].weight(0, 0) = 0.0;
  const double lr = 1e-2;
  AdamOptimizer opt(net, lr);
  Mlp::Grads grads = net.zero_grads();
  const double g = 3.7;
  grads.weight[0](0, 0) = g;
  opt.step(net, grads);
  // bias-corrected first step: -lr * g / (|g| + eps')
  CHECK(net.layers()[0].weight(0, 0) ==
        doctest::Approx(-lr).epsilon(1e-6));
}

TEST_CASE("adam drives a quadratic bowl to the bottom") {
  MlpConfig cfg;
  cfg.input_dim = 1;
  cfg.hidden = {};
  cfg.output_dim = 1;
  Mlp net = make_net(cfg, 13);
  net.layers()[0].weight(0, 0) = 1.0;
  net.layers()[0].bias(0) = 0.0;
  AdamOptimizer opt(net, 1e-2);
  Mlp::Grads grads = net.zero_grads();
  for (int i = 0; i < 10000; ++i) {
    const double x = net.layers()[0].weight(0, 0);
    grads.set_zero();
    grads.weight[0](0, 0) = 2.0 * x;  // d(x^2)/dx
    opt.step(net, grads);
  }
  CHECK(std::abs(net.layers()[0].weight(0, 0)) < 1e-3);
}

TEST_CASE("non-finite gradients are rejected so the batch can be skipped") {
  MlpConfig cfg;
  cfg.input_dim = 1;
  cfg.hidden = {};
  cfg.output_dim = 1;
  Mlp net = make_net(cfg, 14);
  AdamOptimizer opt(net, 1e-3);
  Mlp::Grads grads = net.zero_grads();
  grads.weight[0](0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(opt.step(net, grads), DomainError);
}

TEST_CASE("updates are bit-deterministic under a fixed seed") {
  auto run = [] {
    MlpConfig cfg;
    cfg.input_dim = 3;
    cfg.hidden = {8};
    cfg.output_dim = 2;
    Mlp net = make_net(cfg, 15);
    AdamOptimizer opt(net, 1e-3);
    CounterRng rng(55);
    for (int i = 0; i < 50; ++i) {
      Mat x(3, 4);
      for (int c = 0; c < 4; ++c)
        for (int r = 0; r < 3; ++r) x(r, c) = rng.uniform(-1.0, 1.0);
      Mlp::Cache cache;
      Mat y = net.forward(x, &cache);
      Mlp::Grads grads = net.zero_grads();
      net.backward(cache, y, &grads);  // loss = 0.5 sum y^2
      clip_grad_norm(grads, 0.5);
      opt.step(net, grads);
    }
    return net.layers()[0].weight;
  };
  const Mat a = run();
  const Mat b = run();
  CHECK(a == b);
}

TEST_CASE("outputs stay finite for bounded inputs under default init") {
  MlpConfig cfg;
  cfg.input_dim = 6;
  cfg.hidden = {256, 256};
  cfg.output_dim = 5;
  Mlp net = make_net(cfg, 16);
  CounterRng rng(77);
  for (int i = 0; i < 100; ++i) {
    Vec x(6);
    for (int r = 0; r < 6; ++r) x(r) = rng.uniform(-10.0, 10.0);
    const Vec y = net.forward(x);
    for (int r = 0; r < 5; ++r) CHECK(std::isfinite(y(r)));
  }
}

TEST_CASE("gradient norm clipping caps the global norm") {
  MlpConfig cfg;
  cfg.input_dim = 2;
  cfg.hidden = {3};
  cfg.output_dim = 1;
  Mlp net = make_net(cfg, 17);
  Mlp::Grads grads = net.zero_grads();
  grads.weight[0].setConstant(10.0);
  grads.weight[1].setConstant(-10.0);
  grads.bias[0].setConstant(10.0);
  grads.bias[1].setConstant(10.0);
  clip_grad_norm(grads, 0.5);
  CHECK(std::sqrt(grads.squared_norm()) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("checkpoints round-trip bit-identically") {
  MlpConfig cfg;
  cfg.input_dim = 4;
  cfg.hidden = {5};
  cfg.output_dim = 3;
  Mlp net = make_net(cfg, 18);

  Checkpoint ckpt;
  ckpt.config_hash = 0xdeadbeefULL;
  ckpt.system_hash = 0x1234ULL;
  ckpt.episode = 42;
  for (auto& [name, tensor] : net.export_blocks("actor"))
    ckpt.add(name, std::move(tensor));

  const std::string path =
      (std::filesystem::temp_directory_path() / "corra_ckpt_test.bin").string();
  ckpt.save(path);
  const Checkpoint loaded = Checkpoint::load(path);
  CHECK(loaded.config_hash == ckpt.config_hash);
  CHECK(loaded.system_hash == ckpt.system_hash);
  CHECK(loaded.episode == 42);

  Mlp other = make_net(cfg, 19);
  other.import_blocks("actor", loaded.blocks);
  for (int l = 0; l < net.layer_count(); ++l) {
    CHECK(other.layers()[l].weight == net.layers()[l].weight);
    CHECK(other.layers()[l].bias == net.layers()[l].bias);
  }
  std::filesystem::remove(path);
}

TEST_CASE("corrupt checkpoints are rejected") {
  const std::string path =
      (std::filesystem::temp_directory_path() / "corra_ckpt_bad.bin").string();
  {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    const char junk[] = "not a checkpoint";
    std::fwrite(junk, 1, sizeof(junk), f);
    std::fclose(f);
  }
  CHECK_THROWS_AS(Checkpoint::load(path), IoError);
  std::filesystem::remove(path);
}

TEST_CASE("tensor buffers validate shape and finiteness") {
  TensorBuffer t;
  t.shape = {2, 2};
  t.values = {1.0, 2.0, 3.0};
  CHECK_THROWS_AS(t.validate(), ContractError);
  t.values = {1.0, 2.0, 3.0, std::numeric_limits<double>::infinity()};
  CHECK_THROWS_AS(t.validate(), ContractError);
  t.values = {1.0, 2.0, 3.0, 4.0};
  CHECK_NOTHROW(t.validate());
}
