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


#include <cstdlib>

#include <fmt/format.h>
#include <gtest/gtest.h>

#include "idbn/csv.hpp"
#include "idbn/errors.hpp"
#include "idbn/experiments.hpp"
#include "test_util.hpp"

namespace idbn {
namespace {

using testing::test_dir;

std::filesystem::path data_dir() { return std::filesystem::path(IDBN_SOURCE_DIR) / "data"; }

std::string mnist_ini(const std::filesystem::path& out, const std::string& scheme, int epochs = 3) {
  const auto d = data_dir();
  return fmt::format(R"(
[experiment]
name = tiny-{scheme}
output_dir = {out}
seed = 3

[data]
kind = idx
train_images = {d}/mnist-subset-train-images-idx3-ubyte.gz
train_labels = {d}/mnist-subset-train-labels-idx1-ubyte.gz
test_images = {d}/mnist-subset-t10k-images-idx3-ubyte.gz
test_labels = {d}/mnist-subset-t10k-labels-idx1-ubyte.gz
train_limit = 300
test_limit = 100

[model]
layer_sizes = 784, 24, 12
scheme = {scheme}
init_std = 0.05

[train]
learning_rate = 0.05
epochs = {epochs}
batch_size = 50

[eval]
receptive_fields = 2

[graph]
cutoffs = 0.05, 0.1
degree_cutoff = 0.05

[continual]
letters_images = {d}/letters-synth-images-idx3-ubyte.gz
letters_labels = {d}/letters-synth-labels-idx1-ubyte.gz
digits_count = 200
letters_per_class = 20
epochs = 1
probes_per_epoch = 10
)",
                     fmt::arg("scheme", scheme), fmt::arg("out", out.string()), fmt::arg("d", d.string()),
                     fmt::arg("epochs", epochs));
}

std::string numerosity_ini(const std::filesystem::path& out) {
  return fmt::format(R"(
[experiment]
name = tiny-numerosity
output_dir = {out}
seed = 4

[data]
kind = numerosity

[model]
layer_sizes = 900, 30, 20
init_std = 0.1

[train]
learning_rate = 0.1
weight_decay = 0.0002
epochs = 4
batch_size = 50

[numerosity]
images_per_level = 20
runs = 2
classifiers_per_point = 2
sample_every = 2
)",
                     fmt::arg("out", out.string()));
}

ExperimentConfig write_and_load(const std::filesystem::path& dir, const std::string& text) {
  write_file_atomic(dir / "config.ini", text);
  return load_config(dir / "config.ini");
}

std::string header_of(const std::filesystem::path& csv) {
  const std::string text = read_file(csv);
  const auto first = text.find('\n');
  return text.substr(first + 1, text.find('\n', first + 1) - first - 1);
}

TEST(Experiments, TrainWritesTraceAndCheckpoints) {
  const auto dir = test_dir();
  const ExperimentConfig cfg = write_and_load(dir, mnist_ini(dir / "out", "greedy", 2));
  const TrainOutcome out = cmd_train(cfg);
  EXPECT_EQ(out.trace.epochs.size(), 4u);
  EXPECT_EQ(list_checkpoints(dir / "out" / "checkpoints").size(), 4u);
  const std::string trace = read_file(dir / "out" / "trace.csv");
  EXPECT_EQ(trace.rfind("# config_hash=" + cfg.hash() + "\n", 0), 0u);
  EXPECT_EQ(header_of(dir / "out" / "trace.csv"), "epoch,active_layer,layer,reconstruction_error,checkpoint");
  EXPECT_TRUE(std::filesystem::exists(dir / "out" / "config.canonical.txt"));
  EXPECT_EQ(load_checkpoint(out.final_checkpoint).dbn, out.dbn);
}

TEST(Experiments, RerunIsByteIdentical) {
  const auto dir = test_dir();
  const ExperimentConfig a = write_and_load(dir, mnist_ini(dir / "a", "iterative"));
  ExperimentConfig b = a;
  b.output_dir = dir / "b";
  cmd_train(a);
  cmd_train(b);
  cmd_eval(a);
  cmd_eval(b);
  cmd_graph(a);
  cmd_graph(b);
  for (const char* f : {"trace.csv", "readout.csv", "generation.csv", "grid.csv", "degrees.csv",
                        "checkpoints/epoch-0003/layer0.weights.f64", "receptive_fields/layer1-unit0000.pgm"}) {
    EXPECT_EQ(read_file(dir / "a" / f), read_file(dir / "b" / f)) << f;
  }
  EXPECT_EQ(header_of(dir / "a" / "readout.csv"), "epoch,layer,accuracy");
  EXPECT_EQ(header_of(dir / "a" / "generation.csv"), "task,scheme,mean,stderr");
  EXPECT_EQ(header_of(dir / "a" / "grid.csv"), "epoch,cutoff,source,mean_degree,mean_geodesic,components");
  EXPECT_EQ(header_of(dir / "a" / "degrees.csv"), "k,mass,model");
}

TEST(Experiments, ResumeMatchesUninterruptedRun) {
  const auto dir = test_dir();
  const ExperimentConfig whole = write_and_load(dir, mnist_ini(dir / "whole", "fullstack", 4));
  const TrainOutcome full = cmd_train(whole);
  ExperimentConfig split = whole;
  split.output_dir = dir / "split";
  const TrainOutcome resumed = cmd_train(split, dir / "whole" / "checkpoints" / "epoch-0002");
  EXPECT_EQ(resumed.dbn, full.dbn);
  EXPECT_EQ(read_file(dir / "split" / "trace.csv"), read_file(dir / "whole" / "trace.csv"));
}

TEST(Experiments, ResumeRefusesForeignConfig) {
  const auto dir = test_dir();
  const ExperimentConfig a = write_and_load(dir, mnist_ini(dir / "a", "iterative", 2));
  cmd_train(a);
  ExperimentConfig other = a;
  other.train.learning_rate = 0.07;
  other.output_dir = dir / "other";
  EXPECT_THROW(cmd_train(other, dir / "a" / "checkpoints" / "epoch-0001"), ConfigError);
}

TEST(Experiments, EvalNeedsCheckpoints) {
  const auto dir = test_dir();
  const ExperimentConfig cfg = write_and_load(dir, mnist_ini(dir / "empty", "iterative"));
  EXPECT_THROW(cmd_eval(cfg), DataError);
}

TEST(Experiments, ContinualWritesBothRegimens) {
  const auto dir = test_dir();
  const ExperimentConfig cfg = write_and_load(dir, mnist_ini(dir / "c", "iterative", 2));
  const ContinualCurves curves = cmd_continual(cfg);
  EXPECT_EQ(curves.sequential.size(), 10u);
  EXPECT_EQ(curves.interleaved.size(), 10u);
  EXPECT_EQ(header_of(dir / "c" / "continual.csv"), "probe_index,regimen,digit_acc,letter_acc");
  const std::string first = read_file(dir / "c" / "continual.csv");
  cmd_continual(cfg);
  EXPECT_EQ(read_file(dir / "c" / "continual.csv"), first);
}

TEST(Experiments, NumerosityWritesAllTables) {
  const auto dir = test_dir();
  const ExperimentConfig cfg = write_and_load(dir, numerosity_ini(dir / "n"));
  const NumerosityOutcome out = cmd_numerosity(cfg);
  EXPECT_EQ(out.final_w.size(), 2u);
  // epochs 1, 2, 4
  EXPECT_EQ(out.trajectory.size(), 3u);
  EXPECT_EQ(header_of(dir / "n" / "points.csv"), "r,y,n");
  EXPECT_EQ(header_of(dir / "n" / "trajectory.csv"), "epoch,mean_w,std_w");
  // Too few trajectory points for a power law: header only.
  EXPECT_FALSE(out.fit_sz);
  EXPECT_EQ(header_of(dir / "n" / "fits.csv"), "a,b,s,r2,scaling_tag");
  EXPECT_EQ(read_file(dir / "n" / "fits.csv").find("SZ"), std::string::npos);
  const std::string points = read_file(dir / "n" / "points.csv");
  cmd_numerosity(cfg);
  EXPECT_EQ(read_file(dir / "n" / "points.csv"), points);
}

TEST(Experiments, PgmHeader) {
  const auto dir = test_dir();
  write_pgm(dir / "x.pgm", RowVector::LinSpaced(4, 0.0, 1.0), 2);
  const std::string bytes = read_file(dir / "x.pgm");
  EXPECT_EQ(bytes.substr(0, 11), "P5\n2 2\n255\n");
  EXPECT_EQ(static_cast<unsigned char>(bytes.back()), 255);
  EXPECT_EQ(bytes.size(), 15u);
}

TEST(Csv, FormatAndShape) {
  CsvTable t("00000000deadbeef", {"a", "b", "c"});
  t.add_row({1, 0.1, std::string("x")});
  t.add_row({-2, std::nan(""), std::string("")});
  EXPECT_EQ(t.str(), "# config_hash=00000000deadbeef\na,b,c\n1,0.10000000000000001,x\n-2,nan,\n");
  EXPECT_THROW(t.add_row({1, 2}), ShapeError);
  EXPECT_EQ(format_real(0.5), "0.5");
}

int run_cli(const std::string& args) {
  const std::string cmd = fmt::format("\"{}\" {} >/dev/null 2>&1", IDBN_CLI, args);
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Cli, ExitCodes) {
  const auto dir = test_dir();
  write_file_atomic(dir / "good.ini", mnist_ini(dir / "cli", "iterative", 1));
  EXPECT_EQ(run_cli("train --config " + (dir / "good.ini").string()), 0);
  EXPECT_TRUE(std::filesystem::exists(dir / "cli" / "trace.csv"));
  EXPECT_EQ(run_cli("eval --config " + (dir / "good.ini").string()), 0);

  write_file_atomic(dir / "bad.ini", mnist_ini(dir / "cli", "iterative") + "\n[train]\nbogus = 1\n");
  EXPECT_EQ(run_cli("train --config " + (dir / "bad.ini").string()), 2);
  EXPECT_EQ(run_cli("train --config " + (dir / "missing.ini").string()), 2);
  EXPECT_EQ(run_cli("frobnicate"), 2);

  std::string no_data = mnist_ini(dir / "cli2", "iterative");
  no_data.replace(no_data.find("mnist-subset-train-images"), 5, "nope-");
  write_file_atomic(dir / "nodata.ini", no_data);
  EXPECT_EQ(run_cli("train --config " + (dir / "nodata.ini").string()), 3);

  EXPECT_EQ(run_cli("train --config " + (dir / "good.ini").string() + " --seed 9 --out " + (dir / "cli3").string()), 0);
  EXPECT_TRUE(std::filesystem::exists(dir / "cli3" / "trace.csv"));
}

}  // namespace
}  // namespace idbn
