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

#include <gtest/gtest.h>

#include "idbn/errors.hpp"
#include "idbn/evaluation.hpp"

namespace idbn {
namespace {

LabeledImageSet striped_set(Index n, int side, std::uint64_t seed) {
  // Class k lights up row k of the image; pixels carry some noise.
  Rng rng(seed);
  LabeledImageSet set{Matrix::Zero(n, side * side), std::vector<int>(static_cast<std::size_t>(n)), side};
  for (Index r = 0; r < n; ++r) {
    const int k = static_cast<int>(r % side);
    set.labels[static_cast<std::size_t>(r)] = k;
    Matrix p = Matrix::Constant(1, side * side, 0.1);
    p.block(0, k * side, 1, side).setConstant(0.9);
    set.images.row(r) = sample_bernoulli(p, rng);
  }
  return set;
}

TEST(Generation, IdentityModelScoresBandEnergy) {
  const LabeledImageSet set = striped_set(12, 6, 1);
  GenerationSpec spec{6, 2, 3, 0.5};
  Rng rng(3);
  const GenerationErrors e = generation_tasks([](const Matrix& x) { return x; }, set.images, spec, rng);
  EXPECT_EQ(e[0], 0.0);
  double band = 0.0;
  for (Index r = 0; r < set.size(); ++r)
    for (Index p = 2 * 6; p < 5 * 6; ++p) band += set.images(r, p) * set.images(r, p);
  EXPECT_NEAR(e[1], band / static_cast<double>(set.images.size()), 1e-15);
  EXPECT_GT(e[2], 0.0);
}

TEST(Generation, InvariantUnderPermutation) {
  const LabeledImageSet set = striped_set(12, 6, 2);
  const Dbn dbn = Dbn::create({36, 10, 5}, NormalStd{0.3}, 4);
  GenerationSpec spec{6, 1, 2, 0.0};
  Rng a(1), b(1);
  std::vector<Index> rev;
  for (Index r = set.size(); r-- > 0;) rev.push_back(r);
  const GenerationErrors fwd = generation_tasks(dbn, set.images, spec, a);
  const GenerationErrors bwd = generation_tasks(dbn, set.subset(rev).images, spec, b);
  for (std::size_t t = 0; t < 3; ++t) EXPECT_NEAR(fwd[t], bwd[t], 1e-14);
}

TEST(Generation, ErrorsAreNonNegative) {
  const LabeledImageSet set = striped_set(8, 6, 2);
  const Dbn dbn = Dbn::create({36, 10}, NormalStd{0.3}, 4);
  Rng rng(7);
  for (double e : generation_tasks(dbn, set.images, GenerationSpec{6, 0, 2, 0.5}, rng)) EXPECT_GE(e, 0.0);
}

TEST(Generation, SummaryStandardError) {
  const GenerationReport one = summarize_generation({{0.1, 0.2, 0.3}});
  EXPECT_EQ(one.runs, 1u);
  EXPECT_FALSE(one.tasks[0].standard_error);
  const GenerationReport two = summarize_generation({{0.1, 0.2, 0.3}, {0.3, 0.2, 0.5}});
  EXPECT_DOUBLE_EQ(two.tasks[0].mean, 0.2);
  ASSERT_TRUE(two.tasks[0].standard_error);
  // sample sd of {0.1, 0.3} is sqrt(0.02); divided by sqrt(2) gives 0.1
  EXPECT_NEAR(*two.tasks[0].standard_error, 0.1, 1e-15);
  EXPECT_DOUBLE_EQ(*two.tasks[1].standard_error, 0.0);
}

TEST(Readout, ZeroWeightModelGivesMajorityRate) {
  LabeledImageSet train = striped_set(30, 6, 3);
  LabeledImageSet test = striped_set(12, 6, 4);
  for (int& l : test.labels) l = l < 4 ? 0 : l;  // class 0 is the majority
  for (int& l : train.labels) l = l < 4 ? 0 : l;
  const Dbn dbn = Dbn::create({36, 8, 4}, NormalStd{0.0}, 1);
  int zeros = 0;
  for (int l : test.labels) zeros += l == 0;
  for (double acc : layerwise_readout(dbn, train, test, 1e-4))
    EXPECT_DOUBLE_EQ(acc, static_cast<double>(zeros) / static_cast<double>(test.size()));
}

TEST(Readout, DeterministicAndBounded) {
  const LabeledImageSet train = striped_set(60, 6, 5);
  const LabeledImageSet test = striped_set(24, 6, 6);
  const Dbn dbn = Dbn::create({36, 12, 8}, NormalStd{0.5}, 2);
  const std::vector<double> a = layerwise_readout(dbn, train, test, 1e-3);
  EXPECT_EQ(a, layerwise_readout(dbn, train, test, 1e-3));
  ASSERT_EQ(a.size(), 2u);
  for (double x : a) {
    EXPECT_GE(x, 0.0);
    EXPECT_LE(x, 1.0);
  }
  EXPECT_EQ(layer_features(dbn, test.images, 1), hidden_probabilities(dbn.layer(0), test.images));
}

TEST(ReceptiveFields, DepthOneIsFirstWeightRows) {
  const Dbn dbn = Dbn::create({9, 4, 3}, NormalStd{0.5}, 2);
  const Matrix rf = receptive_fields(dbn, 1, {0, 3}, false);
  EXPECT_EQ(rf.rows(), 2);
  EXPECT_EQ(rf.row(0), dbn.layer(0).weights.row(0));
  EXPECT_EQ(rf.row(1), dbn.layer(0).weights.row(3));
}

TEST(ReceptiveFields, TwoLayerToyByHand) {
  std::vector<RbmLayer> layers;
  layers.push_back({(Matrix(2, 2) << 1.0, 2.0, 3.0, 4.0).finished(), Vector::Zero(2), Vector::Zero(2)});
  layers.push_back({(Matrix(2, 2) << 0.5, -1.0, 2.0, 0.0).finished(), Vector::Zero(2), Vector::Zero(2)});
  const Dbn dbn(layers);
  const Matrix rf = receptive_fields(dbn, 2, {0, 1}, false);
  // [0.5 -1; 2 0] * [1 2; 3 4] = [-2.5 -3; 2 4]
  EXPECT_EQ(rf, (Matrix(2, 2) << -2.5, -3.0, 2.0, 4.0).finished());
  const Matrix scaled = receptive_fields(dbn, 2, {0, 1}, true);
  EXPECT_EQ(scaled, (Matrix(2, 2) << 1.0, 0.0, 0.0, 1.0).finished());
}

TEST(ReceptiveFields, RejectsBadSelections) {
  const Dbn dbn = Dbn::create({9, 4, 3}, NormalStd{0.5}, 2);
  EXPECT_THROW(receptive_fields(dbn, 3, {0}), ConfigError);
  EXPECT_THROW(receptive_fields(dbn, 2, {3}), ConfigError);
  EXPECT_EQ(receptive_fields(dbn, 2, {}).rows(), 0);
  EXPECT_TRUE(receptive_fields(Dbn::create({4, 2}, NormalStd{0.0}, 1), 1, {0}).isApproxToConstant(0.5));
}

TEST(Continual, TenProbesPerEpochAndUnchangedStageOne) {
  const LabeledImageSet digits = striped_set(60, 6, 7);
  const LabeledImageSet digit_test = striped_set(18, 6, 8);
  LabeledImageSet letters = striped_set(40, 6, 9);
  for (int& l : letters.labels) l += 10;
  TrainConfig cfg;
  cfg.batch_size = 4;
  const Dbn stage1 = Dbn::create({36, 10}, NormalStd{0.1}, 3);
  const Dbn copy = stage1;
  const LinearReadout digit_readout = fit_ridge(layer_features(stage1, digits.images, 1), digits.labels, 1e-3);
  ContinualConfig options;
  options.epochs = 2;
  const ContinualCurves curves = continual_run(stage1, digit_readout, digit_test, digits, letters, cfg, options);
  EXPECT_EQ(stage1, copy);
  ASSERT_EQ(curves.sequential.size(), 20u);
  ASSERT_EQ(curves.interleaved.size(), 20u);
  EXPECT_EQ(curves.sequential[13].probe_index, 13);
  EXPECT_EQ(curves.sequential[13].epoch, 1);
  EXPECT_DOUBLE_EQ(curves.sequential[9].position, 1.0);
  EXPECT_DOUBLE_EQ(curves.stage1_digit_accuracy,
                   digit_readout.accuracy(layer_features(stage1, digit_test.images, 1), digit_test.labels));
  for (const auto& p : curves.interleaved) {
    EXPECT_GE(p.digit_accuracy, 0.0);
    EXPECT_LE(p.letter_accuracy, 1.0);
  }
}

TEST(Continual, RejectsBadSplit) {
  const LabeledImageSet set = striped_set(10, 6, 7);
  const Dbn stage1 = Dbn::create({36, 10}, NormalStd{0.1}, 3);
  const LinearReadout r = fit_ridge(layer_features(stage1, set.images, 1), set.labels, 1e-3);
  ContinualConfig options;
  options.letter_train_fraction = 1.0;
  EXPECT_THROW(continual_run(stage1, r, set, set, set, TrainConfig{}, options), ConfigError);
}

}  // namespace
}  // namespace idbn
