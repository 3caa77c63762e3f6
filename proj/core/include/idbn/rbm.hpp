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

#pragma once

#include <optional>
#include <variant>

#include "idbn/random.hpp"
#include "idbn/types.hpp"

namespace idbn {

/// Weights drawn from N(0, std).
struct NormalStd {
  double std = 0.01;
};

/// Glorot-normal weights (std = sqrt(2 / (fan_in + fan_out))) times `factor`.
struct GlorotScaled {
  double factor = 0.1;
};

using InitScheme = std::variant<NormalStd, GlorotScaled>;

/// Hyperparameters shared by every layer of a training run.
struct TrainConfig {
  double learning_rate = 0.01;
  double weight_decay = 0.0001;
  double momentum_initial = 0.5;
  double momentum_final = 0.9;
  int momentum_switch_epoch = 5;
  int epochs = 50;
  int batch_size = 100;
  int cd_k = 1;
  std::optional<double> dropout_presence;
  InitScheme init = NormalStd{0.01};
  std::uint64_t seed = 0;

  /// Throws ConfigError on the first violated constraint.
  void validate() const;

  /// Momentum in effect during zero-based `epoch`.
  double momentum(int epoch) const {
    return epoch < momentum_switch_epoch ? momentum_initial : momentum_final;
  }
};

/// One bipartite block of a DBN. The generative (top-down) direction uses the
/// transpose of `weights`.
struct RbmLayer {
  Matrix weights;       // n_hidden x n_visible
  Vector visible_bias;  // n_visible
  Vector hidden_bias;   // n_hidden

  Index n_visible() const { return weights.cols(); }
  Index n_hidden() const { return weights.rows(); }
  bool all_finite() const;

  friend bool operator==(const RbmLayer& a, const RbmLayer& b);
};

/// Batch means of positive minus negative statistics, same shapes as the layer.
struct GradientEstimate {
  Matrix d_weights;
  Vector d_visible_bias;
  Vector d_hidden_bias;
};

/// Momentum buffers for one layer.
struct OptimizerState {
  Matrix velocity_weights;
  Vector velocity_visible_bias;
  Vector velocity_hidden_bias;

  static OptimizerState zeros_like(const RbmLayer& layer);
};

/// Exact expectations under the layer's Boltzmann distribution.
struct ModelStatistics {
  Matrix visible_hidden;  // <h_i v_j>, n_hidden x n_visible
  Vector visible;         // <v_j>
  Vector hidden;          // <h_i>
  double log_partition = 0.0;
};

/// Source of binary samples given unit probabilities. The production
/// implementation draws Bernoulli variates; tests substitute fixed outputs.
class BernoulliSampler {
 public:
  virtual ~BernoulliSampler() = default;
  virtual Matrix sample(const Matrix& probs) = 0;
};

class RngSampler final : public BernoulliSampler {
 public:
  explicit RngSampler(Rng& rng) : rng_(rng) {}
  Matrix sample(const Matrix& probs) override;

 private:
  Rng& rng_;
};

struct Activation {
  Matrix probs;
  std::optional<Matrix> states;
};

RbmLayer init_rbm(Index n_visible, Index n_hidden, const InitScheme& scheme, Rng& rng);

/// Elementwise logistic function.
Matrix logistic(const Matrix& x);

/// Bernoulli draws: state = 1 iff u < p, one uniform per entry in row-major order.
Matrix sample_bernoulli(const Matrix& probs, Rng& rng);

/// p(h = 1 | v) for every row of `visible`. Units with a zero entry in `mask`
/// (batch x n_hidden, or a single row broadcast to the batch) get probability 0.
Matrix hidden_probabilities(const RbmLayer& layer, const Matrix& visible,
                            const Matrix* mask = nullptr);

/// p(v = 1 | h) for every row of `hidden`.
Matrix visible_probabilities(const RbmLayer& layer, const Matrix& hidden);

/// Probabilities and, when `rng` is given, sampled binary states.
Activation hidden_given_visible(const RbmLayer& layer, const Matrix& visible,
                                const Matrix* mask = nullptr, Rng* rng = nullptr);
Activation visible_given_hidden(const RbmLayer& layer, const Matrix& hidden, Rng* rng = nullptr);

/// Batch mean of <v h>_pos - <v h>_neg for the given chain endpoints.
GradientEstimate gradient_from_statistics(const Matrix& pos_visible, const Matrix& pos_hidden,
                                          const Matrix& neg_visible, const Matrix& neg_hidden);

/// CD-k gradient for one minibatch. Hidden states driving each downward pass
/// are sampled; visible reconstructions and the final hidden statistics are
/// probabilities.
GradientEstimate cd_step(const RbmLayer& layer, const Matrix& batch, int k,
                         BernoulliSampler& sampler, const Matrix* mask = nullptr);
GradientEstimate cd_step(const RbmLayer& layer, const Matrix& batch, int k, Rng& rng,
                         const Matrix* mask = nullptr);

/// Momentum SGD ascent step with weight decay on the weight matrix only:
///   velocity = nu * velocity + lr * (grad - decay * theta);  theta += velocity.
void apply_update(RbmLayer& layer, const GradientEstimate& grad, OptimizerState& opt,
                  const TrainConfig& cfg, int epoch);

/// I.i.d. Bernoulli(p_presence) presence mask of length n.
Vector dropout_mask(Index n, double p_presence, Rng& rng);

/// One presence mask per row.
Matrix dropout_masks(Index rows, Index n, double p_presence, Rng& rng);

/// Enumerates all 2^(n_visible + n_hidden) joint states. Refuses layers with
/// more than 20 units in total.
ModelStatistics exact_statistics(const RbmLayer& layer);

/// Per-unit mean squared error between `data` and its deterministic one-step
/// reconstruction v -> p(h|v) -> p(v|h).
double reconstruction_error(const RbmLayer& layer, const Matrix& data);

}  // namespace idbn
