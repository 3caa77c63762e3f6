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


#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "idbn/errors.hpp"
#include "idbn/rbm.hpp"
#include "oracles.hpp"

namespace idbn {
namespace {

double sample_std(const Matrix& m) {
  const double mean = m.mean();
  return std::sqrt((m.array() - mean).square().sum() / static_cast<double>(m.size() - 1));
}

RbmLayer small_layer() {
  RbmLayer layer{Matrix(2, 3), Vector(3), Vector(2)};
  layer.weights << 0.8, -0.4, 0.3, -0.6, 0.5, 0.9;
  layer.visible_bias << 0.1, -0.2, 0.3;
  layer.hidden_bias << -0.3, 0.2;
  return layer;
}

/// Returns fixed matrices instead of random draws.
class ScriptedSampler final : public BernoulliSampler {
 public:
  explicit ScriptedSampler(std::vector<Matrix> script) : script_(std::move(script)) {}
  Matrix sample(const Matrix&) override { return script_.at(next_++ % script_.size()); }

 private:
  std::vector<Matrix> script_;
  std::size_t next_ = 0;
};

TEST(InitRbm, NormalStdMatchesRequestedSpread) {
  Rng rng(7);
  const RbmLayer layer = init_rbm(784, 500, NormalStd{0.01}, rng);
  EXPECT_EQ(layer.weights.rows(), 500);
  EXPECT_EQ(layer.weights.cols(), 784);
  const double s = sample_std(layer.weights);
  EXPECT_GE(s, 0.009);
  EXPECT_LE(s, 0.011);
  EXPECT_TRUE(layer.visible_bias.isZero(0.0));
  EXPECT_TRUE(layer.hidden_bias.isZero(0.0));
}

TEST(InitRbm, ZeroStdGivesZeroWeights) {
  Rng rng(1);
  EXPECT_TRUE(init_rbm(4, 3, NormalStd{0.0}, rng).weights.isZero(0.0));
}

TEST(InitRbm, GlorotScaledSpread) {
  Rng rng(3);
  const RbmLayer layer = init_rbm(784, 500, GlorotScaled{0.1}, rng);
  const double expected = 0.1 * std::sqrt(2.0 / (784.0 + 500.0));
  EXPECT_NEAR(sample_std(layer.weights), expected, 0.1 * expected);
}

TEST(InitRbm, ZeroSizedLayerIsConfigError) {
  Rng rng(1);
  EXPECT_THROW(init_rbm(0, 3, NormalStd{0.01}, rng), ConfigError);
  EXPECT_THROW(init_rbm(3, 0, NormalStd{0.01}, rng), ConfigError);
}

TEST(TrainConfig, RejectsOutOfRangeValues) {
  TrainConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.learning_rate = 0.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.momentum_final = 1.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.cd_k = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.batch_size = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.dropout_presence = 0.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.weight_decay = -1e-3;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(HiddenGivenVisible, ZeroParametersGiveOneHalf) {
  RbmLayer layer{Matrix::Zero(4, 6), Vector::Zero(6), Vector::Zero(4)};
  const Matrix v = Matrix::Constant(3, 6, 0.7);
  const Matrix p = hidden_probabilities(layer, v);
  EXPECT_TRUE((p.array() == 0.5).all());
}

TEST(HiddenGivenVisible, SingleUnitByHand) {
  RbmLayer layer{Matrix::Constant(1, 1, 2.0), Vector::Zero(1), Vector::Constant(1, -1.0)};
  const Matrix p = hidden_probabilities(layer, Matrix::Constant(1, 1, 1.0));
  EXPECT_NEAR(p(0, 0), 0.7310585786, 1e-9);
}

TEST(HiddenGivenVisible, FullMaskSilencesLayer) {
  const RbmLayer layer = small_layer();
  const Matrix mask = Matrix::Zero(1, 2);
  Rng rng(2);
  const Activation a = hidden_given_visible(layer, Matrix::Ones(4, 3), &mask, &rng);
  EXPECT_TRUE(a.probs.isZero(0.0));
  ASSERT_TRUE(a.states);
  EXPECT_TRUE(a.states->isZero(0.0));
}

TEST(HiddenGivenVisible, StatesOnlyWithGenerator) {
  const RbmLayer layer = small_layer();
  EXPECT_FALSE(hidden_given_visible(layer, Matrix::Ones(1, 3)).states);
  Rng rng(4);
  const Activation a = hidden_given_visible(layer, Matrix::Ones(2, 3), nullptr, &rng);
  ASSERT_TRUE(a.states);
  EXPECT_TRUE((a.states->array() == 0.0 || a.states->array() == 1.0).all());
  EXPECT_TRUE((a.probs.array() > 0.0 && a.probs.array() < 1.0).all());
}

TEST(HiddenGivenVisible, DimensionMismatchIsShapeError) {
  const RbmLayer layer = small_layer();
  EXPECT_THROW(hidden_probabilities(layer, Matrix::Ones(1, 4)), ShapeError);
  const Matrix bad_mask = Matrix::Ones(1, 3);
  EXPECT_THROW(hidden_probabilities(layer, Matrix::Ones(1, 3), &bad_mask), ShapeError);
  EXPECT_THROW(visible_probabilities(layer, Matrix::Ones(1, 3)), ShapeError);
}

TEST(HiddenGivenVisible, SampleMeanConvergesToProbabilities) {
  const RbmLayer layer = small_layer();
  const Matrix v = (Matrix(1, 3) << 1.0, 0.0, 1.0).finished();
  const Matrix p = hidden_probabilities(layer, v);
  const Matrix batch = v.replicate(10000, 1);
  Rng rng(11);
  const Matrix states = sample_bernoulli(hidden_probabilities(layer, batch), rng);
  for (Index j = 0; j < 2; ++j) {
    const double mean = states.col(j).mean();
    const double se = std::sqrt(p(0, j) * (1.0 - p(0, j)) / 10000.0);
    EXPECT_NEAR(mean, p(0, j), 3.0 * se);
  }
}

TEST(VisibleGivenHidden, ZeroParametersGiveOneHalf) {
  RbmLayer layer{Matrix::Zero(2, 5), Vector::Zero(5), Vector::Zero(2)};
  EXPECT_TRUE((visible_probabilities(layer, Matrix::Ones(3, 2)).array() == 0.5).all());
}

TEST(VisibleGivenHidden, UsesTransposedWeights) {
  RbmLayer one{Matrix::Constant(1, 1, 0.7), Vector::Constant(1, -0.2), Vector::Zero(1)};
  EXPECT_NEAR(visible_probabilities(one, Matrix::Ones(1, 1))(0, 0), 1.0 / (1.0 + std::exp(-0.5)), 1e-15);

  RbmLayer two{(Matrix(2, 1) << 0.3, -0.3).finished(), Vector::Zero(1), Vector::Zero(2)};
  EXPECT_DOUBLE_EQ(visible_probabilities(two, Matrix::Ones(1, 2))(0, 0), 0.5);
}

TEST(CdStep, FixedPointGivesZeroGradient) {
  // Visible biases saturate the reconstruction at the data pattern, and the
  // scripted sampler returns the positive hidden probabilities.
  RbmLayer saturated = small_layer();
  saturated.weights.setZero();
  saturated.visible_bias << 1e3, 1e3, 1e3;
  const Matrix ones = Matrix::Ones(2, 3);
  const Matrix h = hidden_probabilities(saturated, ones);
  ScriptedSampler sampler({h});
  const GradientEstimate g = cd_step(saturated, ones, 1, sampler);
  EXPECT_TRUE(g.d_weights.isZero(0.0));
  EXPECT_TRUE(g.d_visible_bias.isZero(0.0));
  EXPECT_TRUE(g.d_hidden_bias.isZero(0.0));
}

TEST(CdStep, ShapesFollowLayer) {
  const RbmLayer layer = small_layer();
  Rng rng(5);
  const GradientEstimate g = cd_step(layer, Matrix::Ones(5, 3) * 0.5, 1, rng);
  EXPECT_EQ(g.d_weights.rows(), 2);
  EXPECT_EQ(g.d_weights.cols(), 3);
  EXPECT_EQ(g.d_hidden_bias.size(), 2);
  EXPECT_EQ(g.d_visible_bias.size(), 3);
}

TEST(CdStep, EmptyBatchAndBadKAreRejected) {
  const RbmLayer layer = small_layer();
  Rng rng(5);
  EXPECT_THROW(cd_step(layer, Matrix(0, 3), 1, rng), ConfigError);
  EXPECT_THROW(cd_step(layer, Matrix::Ones(1, 3), 0, rng), ConfigError);
}

TEST(CdStep, ExpectationMatchesEnumeration) {
  const RbmLayer layer = small_layer();
  const Vector v = (Vector(3) << 1.0, 0.0, 1.0).finished();
  const oracles::ExpectedGradient exact = oracles::enumerate_cd1(layer, v);

  constexpr int kDraws = 10000;
  Rng rng(2024);
  const Matrix batch = v.transpose();
  Matrix sum_w = Matrix::Zero(2, 3), sq_w = Matrix::Zero(2, 3);
  Vector sum_a = Vector::Zero(3), sq_a = Vector::Zero(3);
  Vector sum_b = Vector::Zero(2), sq_b = Vector::Zero(2);
  for (int d = 0; d < kDraws; ++d) {
    const GradientEstimate g = cd_step(layer, batch, 1, rng);
    sum_w += g.d_weights;
    sq_w += g.d_weights.cwiseAbs2();
    sum_a += g.d_visible_bias;
    sq_a += g.d_visible_bias.cwiseAbs2();
    sum_b += g.d_hidden_bias;
    sq_b += g.d_hidden_bias.cwiseAbs2();
  }
  auto check = [&](double sum, double sq, double expected) {
    const double mean = sum / kDraws;
    const double var = std::max(sq / kDraws - mean * mean, 0.0);
    const double se = std::sqrt(var / kDraws);
    EXPECT_NEAR(mean, expected, 3.0 * se + 1e-12);
  };
  for (Index i = 0; i < 2; ++i)
    for (Index j = 0; j < 3; ++j) check(sum_w(i, j), sq_w(i, j), exact.w(i, j));
  for (Index j = 0; j < 3; ++j) check(sum_a[j], sq_a[j], exact.a[j]);
  for (Index i = 0; i < 2; ++i) check(sum_b[i], sq_b[i], exact.b[i]);
}

TEST(ApplyUpdate, ZeroLearningRateFromRestLeavesParameters) {
  RbmLayer layer = small_layer();
  const RbmLayer before = layer;
  OptimizerState opt = OptimizerState::zeros_like(layer);
  TrainConfig cfg;
  cfg.learning_rate = 0.0;
  GradientEstimate g{Matrix::Ones(2, 3), Vector::Ones(3), Vector::Ones(2)};
  // learning_rate must be positive for training, but the update rule itself
  // is well defined at zero.
  apply_update(layer, g, opt, cfg, 0);
  EXPECT_EQ(layer, before);
}

TEST(ApplyUpdate, ZeroLearningRateDecaysVelocity) {
  RbmLayer layer = small_layer();
  OptimizerState opt = OptimizerState::zeros_like(layer);
  opt.velocity_weights.setConstant(0.2);
  TrainConfig cfg;
  cfg.learning_rate = 0.0;
  cfg.momentum_initial = 0.5;
  apply_update(layer, {Matrix::Ones(2, 3), Vector::Ones(3), Vector::Ones(2)}, opt, cfg, 0);
  EXPECT_TRUE((opt.velocity_weights.array() == 0.1).all());
}

TEST(ApplyUpdate, PlainGradientStep) {
  RbmLayer layer = small_layer();
  const RbmLayer before = layer;
  OptimizerState opt = OptimizerState::zeros_like(layer);
  TrainConfig cfg;
  cfg.learning_rate = 1.0;
  cfg.weight_decay = 0.0;
  cfg.momentum_initial = 0.0;
  const GradientEstimate g{Matrix::Constant(2, 3, 0.25), Vector::Constant(3, -0.5), Vector::Constant(2, 0.125)};
  apply_update(layer, g, opt, cfg, 0);
  EXPECT_EQ(layer.weights, before.weights + g.d_weights);
  EXPECT_EQ(layer.visible_bias, before.visible_bias + g.d_visible_bias);
  EXPECT_EQ(layer.hidden_bias, before.hidden_bias + g.d_hidden_bias);
}

TEST(ApplyUpdate, MomentumAccumulatesAcrossSteps) {
  RbmLayer layer{Matrix::Zero(1, 1), Vector::Zero(1), Vector::Zero(1)};
  OptimizerState opt = OptimizerState::zeros_like(layer);
  TrainConfig cfg;
  cfg.learning_rate = 0.01;
  cfg.weight_decay = 0.0;
  cfg.momentum_initial = 0.9;
  const GradientEstimate g{Matrix::Constant(1, 1, 1.0), Vector::Zero(1), Vector::Zero(1)};
  apply_update(layer, g, opt, cfg, 0);
  const double first = layer.weights(0, 0);
  apply_update(layer, g, opt, cfg, 0);
  EXPECT_NEAR(layer.weights(0, 0) - first, 0.01 * (1.0 + 0.9), 1e-15);
}

TEST(ApplyUpdate, DecayTouchesWeightsOnly) {
  RbmLayer layer = small_layer();
  const RbmLayer before = layer;
  OptimizerState opt = OptimizerState::zeros_like(layer);
  TrainConfig cfg;
  cfg.learning_rate = 0.1;
  cfg.weight_decay = 0.5;
  apply_update(layer, {Matrix::Zero(2, 3), Vector::Zero(3), Vector::Zero(2)}, opt, cfg, 0);
  EXPECT_TRUE(layer.weights.isApprox(before.weights * (1.0 - 0.05)));
  EXPECT_EQ(layer.visible_bias, before.visible_bias);
  EXPECT_EQ(layer.hidden_bias, before.hidden_bias);
}

TEST(ApplyUpdate, MomentumSwitchesAtConfiguredEpoch) {
  TrainConfig cfg;
  EXPECT_EQ(cfg.momentum(4), 0.5);
  EXPECT_EQ(cfg.momentum(5), 0.9);
}

TEST(DropoutMask, FullPresenceKeepsEverything) {
  Rng rng(1);
  EXPECT_TRUE((dropout_mask(100, 1.0, rng).array() == 1.0).all());
}

TEST(DropoutMask, PresenceRateAndDeterminism) {
  Rng rng(9);
  const Vector m = dropout_mask(10000, 0.1, rng);
  const double rate = m.sum() / 10000.0;
  EXPECT_GE(rate, 0.09);
  EXPECT_LE(rate, 0.11);
  Rng a(42), b(42);
  EXPECT_EQ(dropout_mask(500, 0.3, a), dropout_mask(500, 0.3, b));
  Rng c(1);
  EXPECT_THROW(dropout_mask(5, 0.0, c), ConfigError);
}

TEST(ExactStatistics, UniformWhenParametersAreZero) {
  RbmLayer layer{Matrix::Zero(2, 2), Vector::Zero(2), Vector::Zero(2)};
  const ModelStatistics s = exact_statistics(layer);
  EXPECT_TRUE(s.visible_hidden.isApproxToConstant(0.25, 1e-15));
}

TEST(ExactStatistics, SinglePairByHand) {
  RbmLayer layer{Matrix::Constant(1, 1, 1.0), Vector::Zero(1), Vector::Zero(1)};
  const double e = std::exp(1.0);
  EXPECT_NEAR(exact_statistics(layer).visible_hidden(0, 0), e / (3.0 + e), 1e-5);
  EXPECT_NEAR(exact_statistics(layer).visible_hidden(0, 0), 0.47536, 1e-5);
}

TEST(ExactStatistics, RefusesLargeLayers) {
  RbmLayer layer{Matrix::Zero(11, 10), Vector::Zero(10), Vector::Zero(11)};
  EXPECT_THROW(exact_statistics(layer), ConfigError);
}

TEST(ExactStatistics, GibbsChainConverges) {
  const RbmLayer layer = small_layer();
  const ModelStatistics exact = exact_statistics(layer);
  Rng rng(77);
  Matrix v = Matrix::Zero(1, 3);
  Matrix acc = Matrix::Zero(2, 3);
  constexpr int kBurn = 1000;
  constexpr int kSteps = 200000;
  for (int t = 0; t < kBurn + kSteps; ++t) {
    const Matrix h = sample_bernoulli(hidden_probabilities(layer, v), rng);
    v = sample_bernoulli(visible_probabilities(layer, h), rng);
    if (t >= kBurn) acc += h.transpose() * v;
  }
  acc /= kSteps;
  EXPECT_LT((acc - exact.visible_hidden).cwiseAbs().maxCoeff(), 0.01);
}

TEST(Determinism, SameSeedSameLayerAfterUpdates) {
  auto run = [] {
    Rng init(5);
    RbmLayer layer = init_rbm(6, 4, NormalStd{0.1}, init);
    OptimizerState opt = OptimizerState::zeros_like(layer);
    Rng rng(6);
    Rng data_rng(7);
    const Matrix data = sample_bernoulli(Matrix::Constant(20, 6, 0.4), data_rng);
    for (int step = 0; step < 50; ++step) apply_update(layer, cd_step(layer, data, 1, rng), opt, TrainConfig{}, step / 10);
    return layer;
  };
  EXPECT_EQ(run(), run());
}

TEST(ReconstructionError, ZeroForSaturatedIdentity) {
  RbmLayer layer{Matrix::Zero(1, 2), Vector::Constant(2, 1e3), Vector::Zero(1)};
  EXPECT_DOUBLE_EQ(reconstruction_error(layer, Matrix::Ones(3, 2)), 0.0);
  EXPECT_DOUBLE_EQ(reconstruction_error(layer, Matrix::Zero(3, 2)), 1.0);
}

}  // namespace
}  // namespace idbn
