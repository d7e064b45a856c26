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
#include "locoforge/net.hpp"

#include <cmath>
#include <stdexcept>

namespace locoforge {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112353;  // ln(2*pi)

Eigen::MatrixXd apply_activation(const Eigen::MatrixXd& x, Activation act) {
  if (act == Activation::Tanh) return x.array().tanh();
  return x.array().max(0.0);
}

// Derivative expressed through the post-activation value.
Eigen::ArrayXXd activation_grad(const Eigen::MatrixXd& post, Activation act) {
  if (act == Activation::Tanh) return 1.0 - post.array().square();
  return (post.array() > 0.0).cast<double>();
}

std::vector<int> layer_dims(const NetSpec& spec) {
  std::vector<int> dims;
  dims.push_back(spec.input_dim);
  for (int h : spec.hidden_dims) dims.push_back(h);
  dims.push_back(spec.output_dim);
  return dims;
}

// Orthogonal matrix from the QR factorization of a normal draw, with the
// sign ambiguity fixed from diag(R) so the result is unique.
Eigen::MatrixXd orthogonal_matrix(int rows, int cols, Rng& rng) {
  const bool transpose = rows < cols;
  const int n = std::max(rows, cols), m = std::min(rows, cols);
  Eigen::MatrixXd a(n, m);
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < n; ++i) a(i, j) = rng.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, m);
  const Eigen::MatrixXd r = qr.matrixQR().topRows(m).triangularView<Eigen::Upper>();
  for (int j = 0; j < m; ++j)
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  return transpose ? Eigen::MatrixXd(q.transpose()) : q;
}

}  // namespace

void NetSpec::validate() const {
  if (input_dim < 1) throw std::invalid_argument("NetSpec: input_dim must be >= 1");
  if (output_dim < 1) throw std::invalid_argument("NetSpec: output_dim must be >= 1");
  if (hidden_dims.empty()) throw std::invalid_argument("NetSpec: hidden_dims must be non-empty");
  for (int h : hidden_dims)
    if (h < 1) throw std::invalid_argument("NetSpec: hidden dims must be >= 1");
}

size_t NetParams::scalar_count() const {
  size_t n = static_cast<size_t>(log_std.size());
  for (size_t l = 0; l < weights.size(); ++l)
    n += static_cast<size_t>(weights[l].size() + biases[l].size());
  return n;
}

bool NetParams::all_finite() const {
  for (size_t l = 0; l < weights.size(); ++l)
    if (!weights[l].allFinite() || !biases[l].allFinite()) return false;
  return log_std.size() == 0 || log_std.allFinite();
}

GradBuffer GradBuffer::zeros_like(const NetParams& params) {
  GradBuffer g;
  for (size_t l = 0; l < params.weights.size(); ++l) {
    g.d_weights.emplace_back(Eigen::MatrixXd::Zero(params.weights[l].rows(), params.weights[l].cols()));
    g.d_biases.emplace_back(Eigen::VectorXd::Zero(params.biases[l].size()));
  }
  g.d_log_std = Eigen::VectorXd::Zero(params.log_std.size());
  return g;
}

void GradBuffer::set_zero() {
  for (auto& w : d_weights) w.setZero();
  for (auto& b : d_biases) b.setZero();
  d_log_std.setZero();
}

void GradBuffer::add_scaled(const GradBuffer& other, double scale) {
  for (size_t l = 0; l < d_weights.size(); ++l) {
    d_weights[l] += scale * other.d_weights[l];
    d_biases[l] += scale * other.d_biases[l];
  }
  if (d_log_std.size() > 0) d_log_std += scale * other.d_log_std;
}

double GradBuffer::squared_norm() const {
  double s = d_log_std.squaredNorm();
  for (size_t l = 0; l < d_weights.size(); ++l)
    s += d_weights[l].squaredNorm() + d_biases[l].squaredNorm();
  return s;
}

void GradBuffer::scale(double s) {
  for (auto& w : d_weights) w *= s;
  for (auto& b : d_biases) b *= s;
  d_log_std *= s;
}

bool GradBuffer::all_finite() const {
  for (size_t l = 0; l < d_weights.size(); ++l)
    if (!d_weights[l].allFinite() || !d_biases[l].allFinite()) return false;
  return d_log_std.size() == 0 || d_log_std.allFinite();
}

NetParams net_init(const NetSpec& spec, uint64_t seed, const NetInitOptions& opts) {
  spec.validate();
  Rng rng(seed);
  NetParams params;
  params.spec = spec;
  const auto dims = layer_dims(spec);
  const int layers = spec.num_layers();
  for (int l = 0; l < layers; ++l) {
    const int fan_in = dims[l], fan_out = dims[l + 1];
    const double gain = (l == layers - 1) ? opts.final_layer_gain : std::sqrt(2.0);
    params.weights.emplace_back(gain * orthogonal_matrix(fan_out, fan_in, rng));
    params.biases.emplace_back(Eigen::VectorXd::Zero(fan_out));
  }
  if (opts.gaussian_head)
    params.log_std = Eigen::VectorXd::Constant(spec.output_dim, opts.log_std_init);
  return params;
}

Eigen::MatrixXd net_forward(const NetParams& params, const Eigen::MatrixXd& input,
                            ForwardTrace* trace) {
  if (input.rows() != params.spec.input_dim)
    throw std::invalid_argument("net_forward: input dimension mismatch");
  if (trace) {
    trace->input = input;
    trace->hidden.clear();
  }
  Eigen::MatrixXd h = input;
  const int layers = params.spec.num_layers();
  for (int l = 0; l < layers - 1; ++l) {
    h = apply_activation((params.weights[l] * h).colwise() + params.biases[l],
                         params.spec.activation);
    if (trace) trace->hidden.push_back(h);
  }
  Eigen::MatrixXd out = (params.weights[layers - 1] * h).colwise() + params.biases[layers - 1];
  if (trace) trace->output = out;
  return out;
}

Eigen::VectorXd net_forward(const NetParams& params, const Eigen::VectorXd& input) {
  return net_forward(params, Eigen::MatrixXd(input), nullptr).col(0);
}

Eigen::MatrixXd net_backward(const NetParams& params, const ForwardTrace& trace,
                             const Eigen::MatrixXd& out_grad, GradBuffer& grads) {
  if (out_grad.rows() != params.spec.output_dim)
    throw std::invalid_argument("net_backward: out_grad dimension mismatch");
  if (out_grad.cols() != trace.input.cols())
    throw std::invalid_argument("net_backward: batch size mismatch with trace");
  const int layers = params.spec.num_layers();
  Eigen::MatrixXd delta = out_grad;  // gradient w.r.t. layer pre-activation
  for (int l = layers - 1; l >= 0; --l) {
    const Eigen::MatrixXd& below = (l == 0) ? trace.input : trace.hidden[l - 1];
    grads.d_weights[l].noalias() += delta * below.transpose();
    grads.d_biases[l] += delta.rowwise().sum();
    if (l > 0) {
      Eigen::MatrixXd dh = params.weights[l].transpose() * delta;
      delta = dh.array() * activation_grad(trace.hidden[l - 1], params.spec.activation);
    } else {
      return params.weights[0].transpose() * delta;
    }
  }
  return {};
}

double gaussian_logprob(const Eigen::VectorXd& mean, const Eigen::VectorXd& log_std,
                        const Eigen::VectorXd& action) {
  const Eigen::ArrayXd z = (action - mean).array() * (-log_std).array().exp();
  return -0.5 * z.square().sum() - log_std.sum() -
         0.5 * kLog2Pi * static_cast<double>(mean.size());
}

Eigen::VectorXd gaussian_logprob_batch(const Eigen::MatrixXd& means,
                                       const Eigen::VectorXd& log_std,
                                       const Eigen::MatrixXd& actions) {
  const Eigen::ArrayXd inv_std = (-log_std).array().exp();
  const Eigen::ArrayXXd z = (actions - means).array().colwise() * inv_std;
  const double constant = log_std.sum() + 0.5 * kLog2Pi * static_cast<double>(means.rows());
  return (-0.5 * z.square().colwise().sum() - constant).transpose();
}

Eigen::VectorXd gaussian_sample(const Eigen::VectorXd& mean, const Eigen::VectorXd& log_std,
                                Rng& rng) {
  Eigen::VectorXd out(mean.size());
  for (Eigen::Index i = 0; i < mean.size(); ++i)
    out[i] = mean[i] + std::exp(log_std[i]) * rng.normal();
  return out;
}

double gaussian_entropy(const Eigen::VectorXd& log_std) {
  constexpr double half_log_2pi_e = 1.4189385332046727417803297364056176;
  return log_std.sum() + half_log_2pi_e * static_cast<double>(log_std.size());
}

double gaussian_kl(const Eigen::VectorXd& mean_a, const Eigen::VectorXd& log_std_a,
                   const Eigen::VectorXd& mean_b, const Eigen::VectorXd& log_std_b) {
  double kl = 0.0;
  for (Eigen::Index i = 0; i < mean_a.size(); ++i) {
    const double var_a = std::exp(2.0 * log_std_a[i]);
    const double var_b = std::exp(2.0 * log_std_b[i]);
    const double dm = mean_a[i] - mean_b[i];
    kl += log_std_b[i] - log_std_a[i] + 0.5 * (var_a + dm * dm) / var_b - 0.5;
  }
  return kl;
}

OptimizerState OptimizerState::zeros_like(const NetParams& params, const AdamConfig& cfg) {
  OptimizerState s;
  for (size_t l = 0; l < params.weights.size(); ++l) {
    s.m_weights.emplace_back(Eigen::MatrixXd::Zero(params.weights[l].rows(), params.weights[l].cols()));
    s.v_weights.emplace_back(Eigen::MatrixXd::Zero(params.weights[l].rows(), params.weights[l].cols()));
    s.m_biases.emplace_back(Eigen::VectorXd::Zero(params.biases[l].size()));
    s.v_biases.emplace_back(Eigen::VectorXd::Zero(params.biases[l].size()));
  }
  s.m_log_std = Eigen::VectorXd::Zero(params.log_std.size());
  s.v_log_std = Eigen::VectorXd::Zero(params.log_std.size());
  s.config = cfg;
  return s;
}

namespace {

template <typename Mat>
void adam_update(Mat& param, const Mat& grad, Mat& m, Mat& v, double scale,
                 const AdamConfig& c, double bias1, double bias2) {
  m = c.beta1 * m + (1.0 - c.beta1) * scale * grad;
  v.array() = c.beta2 * v.array() + (1.0 - c.beta2) * (scale * grad).array().square();
  param.array() -= c.learning_rate * (m.array() / bias1) /
                   ((v.array() / bias2).sqrt() + c.epsilon);
}

}  // namespace

void opt_step(NetParams& params, const GradBuffer& grads, OptimizerState& state) {
  if (!grads.all_finite())
    throw std::runtime_error("opt_step: non-finite gradient, parameters untouched");
  const AdamConfig& c = state.config;
  double scale = 1.0;
  const double norm = std::sqrt(grads.squared_norm());
  if (c.grad_clip_norm > 0.0 && norm > c.grad_clip_norm) scale = c.grad_clip_norm / norm;

  state.step += 1;
  const double bias1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
  const double bias2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));
  for (size_t l = 0; l < params.weights.size(); ++l) {
    adam_update(params.weights[l], grads.d_weights[l], state.m_weights[l], state.v_weights[l],
                scale, c, bias1, bias2);
    adam_update(params.biases[l], grads.d_biases[l], state.m_biases[l], state.v_biases[l],
                scale, c, bias1, bias2);
  }
  if (params.log_std.size() > 0) {
    adam_update(params.log_std, Eigen::VectorXd(grads.d_log_std), state.m_log_std,
                state.v_log_std, scale, c, bias1, bias2);
    params.log_std = params.log_std.cwiseMax(c.log_std_lo).cwiseMin(c.log_std_hi);
  }
}

}  // namespace locoforge
