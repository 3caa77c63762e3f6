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


#include <fstream>

#include <gtest/gtest.h>

#include "idbn/checkpoint.hpp"
#include "idbn/errors.hpp"
#include "test_util.hpp"

namespace idbn {
namespace {

using testing::read_bytes;
using testing::test_dir;
using testing::write_bytes;

Checkpoint sample_checkpoint() {
  Checkpoint cp;
  cp.dbn = Dbn::create({7, 5, 3}, NormalStd{0.37}, 11);
  for (const auto& layer : cp.dbn.layers()) {
    OptimizerState opt = OptimizerState::zeros_like(layer);
    opt.velocity_weights.setConstant(1.0 / 3.0);
    opt.velocity_hidden_bias.setConstant(-1e-300);
    cp.optimizers.push_back(opt);
  }
  cp.dbn.layer(0).visible_bias.setConstant(0.1);
  cp.info.scheme = Scheme::kFullStack;
  cp.info.layer_sizes = cp.dbn.layer_sizes();
  cp.info.config_hash = "0123456789abcdef";
  cp.info.epoch = 4;
  cp.info.label = "run-03";
  cp.trace_csv = "# config_hash=0123456789abcdef\nepoch\n1\n";
  return cp;
}

TEST(Checkpoint, RoundTripIsBitExact) {
  const auto dir = test_dir() / "cp";
  const Checkpoint cp = sample_checkpoint();
  save_checkpoint(dir, cp);
  const Checkpoint back = load_checkpoint(dir);
  EXPECT_EQ(back.dbn, cp.dbn);
  ASSERT_EQ(back.optimizers.size(), 2u);
  EXPECT_EQ(back.optimizers[1].velocity_weights, cp.optimizers[1].velocity_weights);
  EXPECT_EQ(back.optimizers[0].velocity_hidden_bias, cp.optimizers[0].velocity_hidden_bias);
  EXPECT_EQ(back.info.scheme, Scheme::kFullStack);
  EXPECT_EQ(back.info.config_hash, cp.info.config_hash);
  EXPECT_EQ(back.info.epoch, 4);
  EXPECT_TRUE(back.info.at_epoch_boundary());
  EXPECT_EQ(back.info.label, "run-03");
  EXPECT_EQ(back.trace_csv, cp.trace_csv);
  EXPECT_EQ(back.info.layer_sizes, (std::vector<Index>{7, 5, 3}));
}

TEST(Checkpoint, ProbeSnapshotWithoutOptimizer) {
  const auto dir = test_dir() / "probe";
  Checkpoint cp = sample_checkpoint();
  cp.optimizers.clear();
  cp.trace_csv.clear();
  cp.info.probe_index = 3;
  cp.info.position = 0.4;
  save_checkpoint(dir, cp);
  const Checkpoint back = load_checkpoint(dir);
  EXPECT_TRUE(back.optimizers.empty());
  EXPECT_FALSE(back.info.at_epoch_boundary());
  EXPECT_EQ(back.info.position, 0.4);
  EXPECT_EQ(back.dbn, cp.dbn);
}

TEST(Checkpoint, OverwriteReplacesContents) {
  const auto dir = test_dir() / "cp";
  Checkpoint cp = sample_checkpoint();
  save_checkpoint(dir, cp);
  cp.dbn.layer(1).weights.setZero();
  save_checkpoint(dir, cp);
  EXPECT_TRUE(load_checkpoint(dir).dbn.layer(1).weights.isZero(0.0));
}

TEST(Checkpoint, TruncatedTensorIsRejected) {
  const auto dir = test_dir() / "cp";
  save_checkpoint(dir, sample_checkpoint());
  auto bytes = read_bytes(dir / "layer1.weights.f64");
  bytes.resize(bytes.size() - 8);
  write_bytes(dir / "layer1.weights.f64", bytes);
  try {
    load_checkpoint(dir);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_EQ(e.kind(), DataError::Kind::kTruncated);
  }
}

TEST(Checkpoint, VersionMismatchIsRejected) {
  const auto dir = test_dir() / "cp";
  save_checkpoint(dir, sample_checkpoint());
  std::string manifest;
  {
    std::ifstream in(dir / "manifest.txt");
    manifest.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }
  const auto pos = manifest.find("version = 1");
  ASSERT_NE(pos, std::string::npos);
  manifest.replace(pos, 11, "version = 2");
  std::ofstream(dir / "manifest.txt") << manifest;
  try {
    load_checkpoint(dir);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_EQ(e.kind(), DataError::Kind::kFormat);
  }
}

TEST(Checkpoint, MissingDirectoryIsIoError) {
  try {
    load_checkpoint(test_dir() / "absent");
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_EQ(e.kind(), DataError::Kind::kIo);
  }
}

TEST(Checkpoint, NamesAndListing) {
  EXPECT_EQ(checkpoint_name(5), "epoch-0005");
  EXPECT_EQ(checkpoint_name(5, 3), "epoch-0005-probe-03");
  const auto root = test_dir();
  for (int e : {3, 1, 2}) save_checkpoint(root / checkpoint_name(e), sample_checkpoint());
  std::filesystem::create_directories(root / "not-a-checkpoint");
  const auto listed = list_checkpoints(root);
  ASSERT_EQ(listed.size(), 3u);
  EXPECT_EQ(listed[0].filename(), "epoch-0001");
  EXPECT_EQ(listed[2].filename(), "epoch-0003");
  EXPECT_THROW(list_checkpoints(root / "nothing"), DataError);
}

TEST(Checkpoint, RequireNamesEveryMissingPath) {
  const auto root = test_dir();
  save_checkpoint(root / "a", sample_checkpoint());
  EXPECT_NO_THROW(require_checkpoints({root / "a"}));
  try {
    require_checkpoints({root / "a", root / "b", root / "c"});
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find((root / "b").string()), std::string::npos);
    EXPECT_NE(what.find((root / "c").string()), std::string::npos);
  }
}

}  // namespace
}  // namespace idbn
