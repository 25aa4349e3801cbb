/*
 * Copyright (c) 2026 The corra authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#ifndef CORRA_NN_HPP
#define CORRA_NN_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "corra/rng.hpp"

namespace corra {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Shaped row-major 64-bit float buffer; the unit of checkpoint exchange.
struct TensorBuffer {
  std::vector<std::int64_t> shape;
  std::vector<double> values;

  std::int64_t element_count() const;
  /// Throws ContractError unless values.size() matches the shape product
  /// and every entry is finite.
  void validate() const;
};

enum class Activation { kTanh, kRelu };

struct MlpConfig {
  int input_dim = 0;
  std::vector<int> hidden{256, 256};
  int output_dim = 0;
  Activation activation = Activation::kTanh;
  double output_gain = 0.01;  // last-layer orthogonal gain
};

/// Dense feedforward net with explicit reverse-mode gradients. Parameters
/// are column-major internally; checkpoints serialize them row-major.
class Mlp {
 public:
  struct Layer {
    Mat weight;  // out x in
    Vec bias;    // out
  };

  struct Grads {
    std::vector<Mat> weight;
    std::vector<Vec> bias;

    void set_zero();
    double squared_norm() const;
    bool all_finite() const;
    void scale(double s);
  };

  /// Caches the input and every post-activation needed by backward().
  struct Cache {
    std::vector<Mat> activations;  // activations[0] = input, size layers
  };

  Mlp() = default;
  Mlp(const MlpConfig& config, CounterRng& init_rng);

  int input_dim() const;
  int output_dim() const;
  int layer_count() const { return static_cast<int>(layers_.size()); }
  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<Layer>& layers() { return layers_; }
  Activation activation() const { return activation_; }

  /// Batch forward; columns are samples. Fills `cache` when non-null.
  Mat forward(const Mat& input, Cache* cache = nullptr) const;
  Vec forward(const Vec& input) const;

  /// Exact gradients of a scalar loss with output gradient `d_output`
  /// (out_dim x batch). Accumulates into `grads`; returns nothing. When
  /// `d_input` is non-null it receives dL/dinput.
  void backward(const Cache& cache, const Mat& d_output, Grads* grads,
                Mat* d_input = nullptr) const;

  Grads zero_grads() const;
  std::size_t parameter_count() const;
  bool parameters_finite() const;

  /// Named parameter blocks (prefix.layer<i>.weight / .bias), row-major.
  std::vector<std::pair<std::string, TensorBuffer>> export_blocks(
      const std::string& prefix) const;
  void import_blocks(
      const std::string& prefix,
      const std::vector<std::pair<std::string, TensorBuffer>>& blocks);

 private:
  std::vector<Layer> layers_;
  Activation activation_ = Activation::kTanh;
};

/// Adam with bias correction; moments mirror the parameter structure.
class AdamOptimizer {
 public:
  AdamOptimizer() = default;
  AdamOptimizer(const Mlp& net, double learning_rate, double beta1 = 0.9,
                double beta2 = 0.999, double epsilon = 1e-8);

  /// One update; throws DomainError when the gradient is non-finite so the
  /// caller can skip the batch.
  void step(Mlp& net, const Mlp::Grads& grads);

  double learning_rate() const { return lr_; }
  void set_learning_rate(double lr) { lr_ = lr; }
  long step_count() const { return step_count_; }

 private:
  double lr_ = 1e-3;
  double beta1_ = 0.9;
  double beta2_ = 0.999;
  double eps_ = 1e-8;
  long step_count_ = 0;
  std::vector<Mat> m_weight_, v_weight_;
  std::vector<Vec> m_bias_, v_bias_;
};

/// Rescales grads in place so the global L2 norm is at most `max_norm`.
void clip_grad_norm(Mlp::Grads& grads, double max_norm);

/// Softmax over the unmasked classes of one categorical head. Masked
/// classes get probability exactly 0 and never sample.
class MaskedCategorical {
 public:
  MaskedCategorical(std::span<const double> logits,
                    std::span<const std::uint8_t> mask);

  const std::vector<double>& probabilities() const { return probs_; }
  int sample(CounterRng& rng) const;
  double log_prob(int cls) const;
  double entropy() const;
  int argmax() const;

 private:
  std::vector<double> probs_;
};

}  // namespace corra

#endif  // CORRA_NN_HPP
