/*
 * Copyright (c) 2026 The corra authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include "corra/nn.hpp"

#include <cmath>
#include <limits>

#include "corra/errors.hpp"

namespace corra {

std::int64_t TensorBuffer::element_count() const {
  std::int64_t n = 1;
  for (auto d : shape) n *= d;
  return shape.empty() ? 0 : n;
}

void TensorBuffer::validate() const {
  if (static_cast<std::int64_t>(values.size()) != element_count())
    throw ContractError("TensorBuffer: value count does not match shape");
  for (double v : values)
    if (!std::isfinite(v)) throw ContractError("TensorBuffer: non-finite entry");
}

namespace {

// Orthogonal rows/columns from the QR of a Gaussian draw, scaled by gain.
Mat orthogonal_init(int rows, int cols, double gain, CounterRng& rng) {
  const int dim = std::max(rows, cols);
  Mat a(dim, dim);
  for (int c = 0; c < dim; ++c)
    for (int r = 0; r < dim; ++r) a(r, c) = rng.normal();
  Eigen::HouseholderQR<Mat> qr(a);
  Mat q = qr.householderQ();
  // fix signs so the decomposition is unique
  Mat r_mat = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int c = 0; c < dim; ++c)
    if (r_mat(c, c) < 0.0) q.col(c) = -q.col(c);
  return gain * q.topLeftCorner(rows, cols);
}

inline double activate(double z, Activation a) {
  return a == Activation::kTanh ? std::tanh(z) : (z > 0.0 ? z : 0.0);
}

}  // namespace

Mlp::Mlp(const MlpConfig& config, CounterRng& init_rng)
    : activation_(config.activation) {
  if (config.input_dim < 1 || config.output_dim < 1)
    throw ContractError("Mlp: input and output dims must be >= 1");
  std::vector<int> dims;
  dims.push_back(config.input_dim);
  for (int h : config.hidden) {
    if (h < 1) throw ContractError("Mlp: hidden width must be >= 1");
    dims.push_back(h);
  }
  dims.push_back(config.output_dim);

  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    const bool last = i + 2 == dims.size();
    Layer layer;
    layer.weight = orthogonal_init(dims[i + 1], dims[i],
                                   last ? config.output_gain : 1.0, init_rng);
    layer.bias = Vec::Zero(dims[i + 1]);
    layers_.push_back(std::move(layer));
  }
}

int Mlp::input_dim() const { return layers_.empty() ? 0 : static_cast<int>(layers_.front().weight.cols()); }

int Mlp::output_dim() const { return layers_.empty() ? 0 : static_cast<int>(layers_.back().weight.rows()); }

Mat Mlp::forward(const Mat& input, Cache* cache) const {
  if (input.rows() != input_dim())
    throw ContractError("Mlp::forward: input dimension mismatch");
  if (cache) {
    cache->activations.clear();
    cache->activations.reserve(layers_.size());
    cache->activations.push_back(input);
  }
  Mat a = input;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    Mat z = layers_[l].weight * a;
    z.colwise() += layers_[l].bias;
    if (l + 1 == layers_.size()) return z;  // linear output layer
    a = z.unaryExpr([this](double v) { return activate(v, activation_); });
    if (cache) cache->activations.push_back(a);
  }
  return a;
}

Vec Mlp::forward(const Vec& input) const {
  return forward(Mat(input), nullptr).col(0);
}

void Mlp::backward(const Cache& cache, const Mat& d_output, Grads* grads,
                   Mat* d_input) const {
  if (cache.activations.size() != layers_.size())
    throw ContractError("Mlp::backward: forward cache missing or stale");
  if (d_output.rows() != output_dim())
    throw ContractError("Mlp::backward: output gradient dimension mismatch");

  Mat dz = d_output;
  for (int l = static_cast<int>(layers_.size()) - 1; l >= 0; --l) {
    const Mat& a_prev = cache.activations[l];
    grads->weight[l].noalias() += dz * a_prev.transpose();
    grads->bias[l] += dz.rowwise().sum();
    if (l == 0) {
      if (d_input) d_input->noalias() = layers_[0].weight.transpose() * dz;
      break;
    }
    Mat da = layers_[l].weight.transpose() * dz;
    if (activation_ == Activation::kTanh) {
      dz = da.cwiseProduct(Mat::Ones(a_prev.rows(), a_prev.cols()) -
                           a_prev.cwiseProduct(a_prev));
    } else {
      dz = da.cwiseProduct(
          a_prev.unaryExpr([](double v) { return v > 0.0 ? 1.0 : 0.0; }));
    }
  }
}

Mlp::Grads Mlp::zero_grads() const {
  Grads g;
  g.weight.reserve(layers_.size());
  g.bias.reserve(layers_.size());
  for (const Layer& layer : layers_) {
    g.weight.push_back(Mat::Zero(layer.weight.rows(), layer.weight.cols()));
    g.bias.push_back(Vec::Zero(layer.bias.size()));
  }
  return g;
}

void Mlp::Grads::set_zero() {
  for (auto& w : weight) w.setZero();
  for (auto& b : bias) b.setZero();
}

double Mlp::Grads::squared_norm() const {
  double s = 0.0;
  for (const auto& w : weight) s += w.squaredNorm();
  for (const auto& b : bias) s += b.squaredNorm();
  return s;
}

bool Mlp::Grads::all_finite() const {
  for (const auto& w : weight)
    if (!w.allFinite()) return false;
  for (const auto& b : bias)
    if (!b.allFinite()) return false;
  return true;
}

void Mlp::Grads::scale(double s) {
  for (auto& w : weight) w *= s;
  for (auto& b : bias) b *= s;
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const Layer& l : layers_) n += l.weight.size() + l.bias.size();
  return n;
}

bool Mlp::parameters_finite() const {
  for (const Layer& l : layers_)
    if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
  return true;
}

std::vector<std::pair<std::string, TensorBuffer>> Mlp::export_blocks(
    const std::string& prefix) const {
  std::vector<std::pair<std::string, TensorBuffer>> blocks;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const Mat& w = layers_[l].weight;
    TensorBuffer wb;
    wb.shape = {w.rows(), w.cols()};
    wb.values.reserve(w.size());
    for (int r = 0; r < w.rows(); ++r)
      for (int c = 0; c < w.cols(); ++c) wb.values.push_back(w(r, c));
    blocks.emplace_back(prefix + ".layer" + std::to_string(l) + ".weight",
                        std::move(wb));

    const Vec& b = layers_[l].bias;
    TensorBuffer bb;
    bb.shape = {b.size()};
    bb.values.assign(b.data(), b.data() + b.size());
    blocks.emplace_back(prefix + ".layer" + std::to_string(l) + ".bias",
                        std::move(bb));
  }
  return blocks;
}

void Mlp::import_blocks(
    const std::string& prefix,
    const std::vector<std::pair<std::string, TensorBuffer>>& blocks) {
  auto find = [&](const std::string& name) -> const TensorBuffer& {
    for (const auto& [n, t] : blocks)
      if (n == name) return t;
    throw IoError("checkpoint: missing parameter block " + name);
  };
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const std::string base = prefix + ".layer" + std::to_string(l);
    const TensorBuffer& wb = find(base + ".weight");
    Mat& w = layers_[l].weight;
    if (wb.shape.size() != 2 || wb.shape[0] != w.rows() || wb.shape[1] != w.cols())
      throw IoError("checkpoint: shape mismatch for " + base + ".weight");
    std::size_t i = 0;
    for (int r = 0; r < w.rows(); ++r)
      for (int c = 0; c < w.cols(); ++c) w(r, c) = wb.values[i++];

    const TensorBuffer& bb = find(base + ".bias");
    Vec& b = layers_[l].bias;
    if (bb.shape.size() != 1 || bb.shape[0] != b.size())
      throw IoError("checkpoint: shape mismatch for " + base + ".bias");
    for (int r = 0; r < b.size(); ++r) b(r) = bb.values[r];
  }
}

AdamOptimizer::AdamOptimizer(const Mlp& net, double learning_rate, double beta1,
                             double beta2, double epsilon)
    : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(epsilon) {
  for (const Mlp::Layer& l : net.layers()) {
    m_weight_.push_back(Mat::Zero(l.weight.rows(), l.weight.cols()));
    v_weight_.push_back(Mat::Zero(l.weight.rows(), l.weight.cols()));
    m_bias_.push_back(Vec::Zero(l.bias.size()));
    v_bias_.push_back(Vec::Zero(l.bias.size()));
  }
}

void AdamOptimizer::step(Mlp& net, const Mlp::Grads& grads) {
  if (!grads.all_finite())
    throw DomainError("optimizer_step: non-finite gradient");
  ++step_count_;
  const double bc1 = 1.0 - std::pow(beta1_, step_count_);
  const double bc2 = 1.0 - std::pow(beta2_, step_count_);
  const double alpha = lr_ * std::sqrt(bc2) / bc1;

  auto& layers = net.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    m_weight_[l] = beta1_ * m_weight_[l] + (1.0 - beta1_) * grads.weight[l];
    v_weight_[l] = beta2_ * v_weight_[l] +
                   (1.0 - beta2_) * grads.weight[l].cwiseProduct(grads.weight[l]);
    layers[l].weight.array() -=
        alpha * m_weight_[l].array() / (v_weight_[l].array().sqrt() + eps_);

    m_bias_[l] = beta1_ * m_bias_[l] + (1.0 - beta1_) * grads.bias[l];
    v_bias_[l] = beta2_ * v_bias_[l] +
                 (1.0 - beta2_) * grads.bias[l].cwiseProduct(grads.bias[l]);
    layers[l].bias.array() -=
        alpha * m_bias_[l].array() / (v_bias_[l].array().sqrt() + eps_);
  }
}

void clip_grad_norm(Mlp::Grads& grads, double max_norm) {
  const double norm = std::sqrt(grads.squared_norm());
  if (norm > max_norm && norm > 0.0) grads.scale(max_norm / norm);
}

MaskedCategorical::MaskedCategorical(std::span<const double> logits,
                                     std::span<const std::uint8_t> mask) {
  if (logits.size() != mask.size())
    throw ContractError("masked_categorical: logits/mask size mismatch");
  double max_logit = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < logits.size(); ++i)
    if (mask[i] && logits[i] > max_logit) max_logit = logits[i];
  if (!std::isfinite(max_logit))
    throw ContractError("masked_categorical: no unmasked class");

  probs_.assign(logits.size(), 0.0);
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (!mask[i]) continue;
    probs_[i] = std::exp(logits[i] - max_logit);
    z += probs_[i];
  }
  for (double& p : probs_) p /= z;
}

int MaskedCategorical::sample(CounterRng& rng) const {
  const double u = rng.uniform01();
  double acc = 0.0;
  int last_valid = 0;
  for (std::size_t i = 0; i < probs_.size(); ++i) {
    if (probs_[i] <= 0.0) continue;
    last_valid = static_cast<int>(i);
    acc += probs_[i];
    if (u < acc) return static_cast<int>(i);
  }
  return last_valid;  // u landed on accumulated rounding slack
}

double MaskedCategorical::log_prob(int cls) const {
  if (cls < 0 || cls >= static_cast<int>(probs_.size()))
    throw ContractError("masked_categorical: class out of range");
  if (probs_[cls] <= 0.0)
    throw ContractError("masked_categorical: log_prob of masked class");
  return std::log(probs_[cls]);
}

double MaskedCategorical::entropy() const {
  double h = 0.0;
  for (double p : probs_)
    if (p > 0.0) h -= p * std::log(p);
  return h;
}

int MaskedCategorical::argmax() const {
  int best = 0;
  double best_p = -1.0;
  for (std::size_t i = 0; i < probs_.size(); ++i) {
    if (probs_[i] > best_p) {
      best_p = probs_[i];
      best = static_cast<int>(i);
    }
  }
  return best;
}

}  // namespace corra
