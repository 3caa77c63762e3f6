// Copyright 2026 The idbn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "idbn/rbm.hpp"

#include <cmath>
#include <random>
#include <string>

#include <fmt/format.h>

#include "idbn/errors.hpp"

namespace idbn {
namespace {

void apply_mask(Matrix& probs, const Matrix* mask) {
  if (mask == nullptr) return;
  if (mask->cols() != probs.cols()) {
    throw ShapeError(fmt::format("mask has {} columns, layer has {} hidden units", mask->cols(),
                                 probs.cols()));
  }
  if (mask->rows() == probs.rows()) {
    probs.array() *= mask->array();
  } else if (mask->rows() == 1) {
    probs.array().rowwise() *= mask->row(0).array();
  } else {
    throw ShapeError(fmt::format("mask has {} rows for a batch of {}", mask->rows(), probs.rows()));
  }
}

}  // namespace

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
    throw ConfigError(fmt::format("learning_rate must be > 0, got {}", learning_rate));
  if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be >= 0");
  for (double m : {momentum_initial, momentum_final}) {
    if (!(m >= 0.0 && m < 1.0)) throw ConfigError(fmt::format("momentum must be in [0, 1), got {}", m));
  }
  if (momentum_switch_epoch < 0) throw ConfigError("momentum_switch_epoch must be >= 0");
  if (epochs < 0) throw ConfigError("epochs must be >= 0");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (cd_k < 1) throw ConfigError("cd_k must be >= 1");
  if (dropout_presence && !(*dropout_presence > 0.0 && *dropout_presence <= 1.0))
    throw ConfigError("dropout_presence must be in (0, 1]");
  if (const auto* n = std::get_if<NormalStd>(&init); n && !(n->std >= 0.0))
    throw ConfigError("init std must be >= 0");
  if (const auto* g = std::get_if<GlorotScaled>(&init); g && !(g->factor >= 0.0))
    throw ConfigError("glorot factor must be >= 0");
}

bool RbmLayer::all_finite() const {
  return weights.allFinite() && visible_bias.allFinite() && hidden_bias.allFinite();
}

bool operator==(const RbmLayer& a, const RbmLayer& b) {
  return a.weights.rows() == b.weights.rows() && a.weights.cols() == b.weights.cols() &&
         a.weights == b.weights && a.visible_bias == b.visible_bias &&
         a.hidden_bias == b.hidden_bias;
}

OptimizerState OptimizerState::zeros_like(const RbmLayer& layer) {
  return {Matrix::Zero(layer.n_hidden(), layer.n_visible()), Vector::Zero(layer.n_visible()),
          Vector::Zero(layer.n_hidden())};
}

Matrix RngSampler::sample(const Matrix& probs) { return sample_bernoulli(probs, rng_); }

RbmLayer init_rbm(Index n_visible, Index n_hidden, const InitScheme& scheme, Rng& rng) {
  if (n_visible < 1 || n_hidden < 1) {
    throw ConfigError(fmt::format("layer sizes must be >= 1, got {}x{}", n_visible, n_hidden));
  }
  double std = 0.0;
  if (const auto* n = std::get_if<NormalStd>(&scheme)) {
    std = n->std;
  } else {
    const auto& g = std::get<GlorotScaled>(scheme);
    std = g.factor * std::sqrt(2.0 / static_cast<double>(n_visible + n_hidden));
  }
  RbmLayer layer{Matrix::Zero(n_hidden, n_visible), Vector::Zero(n_visible),
                 Vector::Zero(n_hidden)};
  if (std > 0.0) {
    std::normal_distribution<double> normal(0.0, std);
    for (Index i = 0; i < layer.weights.size(); ++i) layer.weights.data()[i] = normal(rng);
  }
  return layer;
}

Matrix logistic(const Matrix& x) {
  return (1.0 + (-x.array()).exp()).inverse().matrix();
}

Matrix sample_bernoulli(const Matrix& probs, Rng& rng) {
  Matrix states(probs.rows(), probs.cols());
  const double* p = probs.data();
  double* s = states.data();
  for (Index i = 0; i < probs.size(); ++i) s[i] = uniform01(rng) < p[i] ? 1.0 : 0.0;
  return states;
}

Matrix hidden_probabilities(const RbmLayer& layer, const Matrix& visible, const Matrix* mask) {
  if (visible.cols() != layer.n_visible()) {
    throw ShapeError(fmt::format("visible input has {} units, layer expects {}", visible.cols(),
                                 layer.n_visible()));
  }
  Matrix pre = visible * layer.weights.transpose();
  pre.rowwise() += layer.hidden_bias.transpose();
  Matrix probs = logistic(pre);
  apply_mask(probs, mask);
  return probs;
}

Matrix visible_probabilities(const RbmLayer& layer, const Matrix& hidden) {
  if (hidden.cols() != layer.n_hidden()) {
    throw ShapeError(fmt::format("hidden input has {} units, layer expects {}", hidden.cols(),
                                 layer.n_hidden()));
  }
  Matrix pre = hidden * layer.weights;
  pre.rowwise() += layer.visible_bias.transpose();
  return logistic(pre);
}

Activation hidden_given_visible(const RbmLayer& layer, const Matrix& visible, const Matrix* mask,
                                Rng* rng) {
  Activation out{hidden_probabilities(layer, visible, mask), std::nullopt};
  if (rng != nullptr) out.states = sample_bernoulli(out.probs, *rng);
  return out;
}

Activation visible_given_hidden(const RbmLayer& layer, const Matrix& hidden, Rng* rng) {
  Activation out{visible_probabilities(layer, hidden), std::nullopt};
  if (rng != nullptr) out.states = sample_bernoulli(out.probs, *rng);
  return out;
}

GradientEstimate gradient_from_statistics(const Matrix& pos_visible, const Matrix& pos_hidden,
                                          const Matrix& neg_visible, const Matrix& neg_hidden) {
  const double inv_n = 1.0 / static_cast<double>(pos_visible.rows());
  GradientEstimate g;
  g.d_weights.noalias() = pos_hidden.transpose() * pos_visible;
  g.d_weights.noalias() -= neg_hidden.transpose() * neg_visible;
  g.d_weights *= inv_n;
  g.d_visible_bias = (pos_visible - neg_visible).colwise().sum().transpose() * inv_n;
  g.d_hidden_bias = (pos_hidden - neg_hidden).colwise().sum().transpose() * inv_n;
  return g;
}

GradientEstimate cd_step(const RbmLayer& layer, const Matrix& batch, int k,
                         BernoulliSampler& sampler, const Matrix* mask) {
  if (batch.rows() == 0) throw ConfigError("cd_step: empty batch");
  if (k < 1) throw ConfigError(fmt::format("cd_step: k must be >= 1, got {}", k));
  const Matrix pos_hidden = hidden_probabilities(layer, batch, mask);
  Matrix states = sampler.sample(pos_hidden);
  Matrix neg_visible;
  Matrix neg_hidden;
  for (int step = 0; step < k; ++step) {
    neg_visible = visible_probabilities(layer, states);
    neg_hidden = hidden_probabilities(layer, neg_visible, mask);
    if (step + 1 < k) states = sampler.sample(neg_hidden);
  }
  return gradient_from_statistics(batch, pos_hidden, neg_visible, neg_hidden);
}

GradientEstimate cd_step(const RbmLayer& layer, const Matrix& batch, int k, Rng& rng,
                         const Matrix* mask) {
  RngSampler sampler(rng);
  return cd_step(layer, batch, k, sampler, mask);
}

void apply_update(RbmLayer& layer, const GradientEstimate& grad, OptimizerState& opt,
                  const TrainConfig& cfg, int epoch) {
  if (grad.d_weights.rows() != layer.n_hidden() || grad.d_weights.cols() != layer.n_visible() ||
      grad.d_visible_bias.size() != layer.n_visible() ||
      grad.d_hidden_bias.size() != layer.n_hidden() ||
      opt.velocity_weights.rows() != layer.n_hidden() ||
      opt.velocity_weights.cols() != layer.n_visible() ||
      opt.velocity_visible_bias.size() != layer.n_visible() ||
      opt.velocity_hidden_bias.size() != layer.n_hidden()) {
    throw ShapeError("apply_update: gradient or optimizer state does not match the layer");
  }
  const double nu = cfg.momentum(epoch);
  const double lr = cfg.learning_rate;
  opt.velocity_weights =
      nu * opt.velocity_weights + lr * (grad.d_weights - cfg.weight_decay * layer.weights);
  opt.velocity_visible_bias = nu * opt.velocity_visible_bias + lr * grad.d_visible_bias;
  opt.velocity_hidden_bias = nu * opt.velocity_hidden_bias + lr * grad.d_hidden_bias;
  layer.weights += opt.velocity_weights;
  layer.visible_bias += opt.velocity_visible_bias;
  layer.hidden_bias += opt.velocity_hidden_bias;
}

Vector dropout_mask(Index n, double p_presence, Rng& rng) {
  if (!(p_presence > 0.0 && p_presence <= 1.0)) {
    throw ConfigError(fmt::format("presence probability must be in (0, 1], got {}", p_presence));
  }
  Vector mask(n);
  for (Index i = 0; i < n; ++i) mask[i] = uniform01(rng) < p_presence ? 1.0 : 0.0;
  return mask;
}

Matrix dropout_masks(Index rows, Index n, double p_presence, Rng& rng) {
  Matrix masks(rows, n);
  for (Index r = 0; r < rows; ++r) masks.row(r) = dropout_mask(n, p_presence, rng).transpose();
  return masks;
}

ModelStatistics exact_statistics(const RbmLayer& layer) {
  const Index nv = layer.n_visible();
  const Index nh = layer.n_hidden();
  if (nv + nh > 20) {
    throw ConfigError(fmt::format("exact_statistics: {} units exceed the 20-unit limit", nv + nh));
  }
  // Enumerate every joint (v, h) state; accumulate unnormalized weights in a
  // shifted log domain to stay finite for large parameters.
  const std::uint64_t n_states = std::uint64_t{1} << (nv + nh);
  std::vector<double> log_weight(n_states);
  Vector v(nv);
  Vector h(nh);
  double max_log = -std::numeric_limits<double>::infinity();
  for (std::uint64_t s = 0; s < n_states; ++s) {
    for (Index j = 0; j < nv; ++j) v[j] = static_cast<double>((s >> j) & 1U);
    for (Index i = 0; i < nh; ++i) h[i] = static_cast<double>((s >> (nv + i)) & 1U);
    const double neg_energy =
        h.dot(layer.weights * v) + layer.visible_bias.dot(v) + layer.hidden_bias.dot(h);
    log_weight[s] = neg_energy;
    max_log = std::max(max_log, neg_energy);
  }
  ModelStatistics stats{Matrix::Zero(nh, nv), Vector::Zero(nv), Vector::Zero(nh), 0.0};
  double z = 0.0;
  for (std::uint64_t s = 0; s < n_states; ++s) {
    const double w = std::exp(log_weight[s] - max_log);
    z += w;
    for (Index j = 0; j < nv; ++j) v[j] = static_cast<double>((s >> j) & 1U);
    for (Index i = 0; i < nh; ++i) h[i] = static_cast<double>((s >> (nv + i)) & 1U);
    stats.visible_hidden.noalias() += w * h * v.transpose();
    stats.visible += w * v;
    stats.hidden += w * h;
  }
  stats.visible_hidden /= z;
  stats.visible /= z;
  stats.hidden /= z;
  stats.log_partition = max_log + std::log(z);
  return stats;
}

double reconstruction_error(const RbmLayer& layer, const Matrix& data) {
  if (data.rows() == 0) return 0.0;
  const Matrix recon = visible_probabilities(layer, hidden_probabilities(layer, data));
  return (data - recon).squaredNorm() / static_cast<double>(data.rows() * data.cols());
}

}  // namespace idbn
