/*
 Copyright 2026 The Locoforge Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#ifndef LOCOFORGE_NET_HPP
#define LOCOFORGE_NET_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "locoforge/rng.hpp"

namespace locoforge {

enum class Activation { Tanh, Relu };

/// Architecture of a feed-forward approximator. Hidden layers use the
/// configured nonlinearity, the output layer is linear.
struct NetSpec {
  int input_dim = 0;
  std::vector<int> hidden_dims;
  int output_dim = 0;
  Activation activation = Activation::Tanh;

  /// Throws std::invalid_argument unless all dims >= 1 and hidden_dims is
  /// non-empty.
  void validate() const;

  int num_layers() const { return static_cast<int>(hidden_dims.size()) + 1; }
  bool operator==(const NetSpec&) const = default;
};

/// Weights/biases per layer, plus an optional free log-std vector for
/// policies with a diagonal Gaussian head (empty for critics).
struct NetParams {
  NetSpec spec;
  std::vector<Eigen::MatrixXd> weights;  // layer l: (fan_out x fan_in)
  std::vector<Eigen::VectorXd> biases;
  Eigen::VectorXd log_std;

  bool has_gaussian_head() const { return log_std.size() > 0; }
  size_t scalar_count() const;
  bool all_finite() const;
};

struct GradBuffer {
  std::vector<Eigen::MatrixXd> d_weights;
  std::vector<Eigen::VectorXd> d_biases;
  Eigen::VectorXd d_log_std;

  static GradBuffer zeros_like(const NetParams& params);
  void set_zero();
  void add_scaled(const GradBuffer& other, double scale);
  double squared_norm() const;
  void scale(double s);
  bool all_finite() const;
};

/// Layer activations cached by a forward pass, consumed by backward.
struct ForwardTrace {
  Eigen::MatrixXd input;                    // (in x batch)
  std::vector<Eigen::MatrixXd> hidden;      // post-activation per hidden layer
  Eigen::MatrixXd output;                   // (out x batch)
};

struct NetInitOptions {
  double final_layer_gain = 1.0;  // actors use 0.01 to start near-zero
  bool gaussian_head = false;
  double log_std_init = -0.5;
};

/// Deterministic orthogonal-style initialization: per layer, the Q factor of
/// a random normal matrix (signs fixed from the R diagonal), gain sqrt(2)
/// on hidden layers and `final_layer_gain` on the output layer.
NetParams net_init(const NetSpec& spec, uint64_t seed, const NetInitOptions& opts = {});

/// Batched forward pass. `input` is (input_dim x batch); returns
/// (output_dim x batch). Pass `trace` to enable a later backward call.
Eigen::MatrixXd net_forward(const NetParams& params, const Eigen::MatrixXd& input,
                            ForwardTrace* trace = nullptr);

/// Single-sample convenience overload.
Eigen::VectorXd net_forward(const NetParams& params, const Eigen::VectorXd& input);

/// Accumulates d(out_grad . output)/d(params) into `grads` and returns the
/// gradient with respect to the input. `out_grad` is (output_dim x batch).
Eigen::MatrixXd net_backward(const NetParams& params, const ForwardTrace& trace,
                             const Eigen::MatrixXd& out_grad, GradBuffer& grads);

/// Diagonal-Gaussian log density of `action` under N(mean, exp(log_std)^2).
double gaussian_logprob(const Eigen::VectorXd& mean, const Eigen::VectorXd& log_std,
                        const Eigen::VectorXd& action);

/// Column-wise log densities for a batch of (mean, action) pairs.
Eigen::VectorXd gaussian_logprob_batch(const Eigen::MatrixXd& means,
                                       const Eigen::VectorXd& log_std,
                                       const Eigen::MatrixXd& actions);

/// Reparameterized draw mean + exp(log_std) * z with z ~ N(0, I).
Eigen::VectorXd gaussian_sample(const Eigen::VectorXd& mean, const Eigen::VectorXd& log_std,
                                Rng& rng);

/// Sum_i (log_std_i + 0.5 * ln(2*pi*e)).
double gaussian_entropy(const Eigen::VectorXd& log_std);

/// Closed-form KL(N(mean_a, std_a) || N(mean_b, std_b)) for diagonal
/// Gaussians, summed over dimensions.
double gaussian_kl(const Eigen::VectorXd& mean_a, const Eigen::VectorXd& log_std_a,
                   const Eigen::VectorXd& mean_b, const Eigen::VectorXd& log_std_b);

struct AdamConfig {
  double learning_rate = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double grad_clip_norm = 0.5;   // global-norm clip applied before the update
  double log_std_lo = -5.0;      // clamp window enforced after each step
  double log_std_hi = 1.0;
};

/// Adaptive-moment state, shape-congruent with its NetParams.
struct OptimizerState {
  std::vector<Eigen::MatrixXd> m_weights, v_weights;
  std::vector<Eigen::VectorXd> m_biases, v_biases;
  Eigen::VectorXd m_log_std, v_log_std;
  int64_t step = 0;
  AdamConfig config;

  static OptimizerState zeros_like(const NetParams& params, const AdamConfig& cfg);
};

/// Bias-corrected adaptive-moment update with global-norm gradient clipping.
/// Throws std::runtime_error on non-finite gradients, leaving `params` and
/// `state` untouched.
void opt_step(NetParams& params, const GradBuffer& grads, OptimizerState& state);

}  // namespace locoforge

#endif  // LOCOFORGE_NET_HPP
