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

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "idbn/data.hpp"
#include "idbn/dbn.hpp"
#include "idbn/evaluation.hpp"
#include "idbn/graph.hpp"
#include "idbn/psychometrics.hpp"
#include "idbn/rbm.hpp"

namespace idbn {

enum class DatasetKind { kIdx, kNumerosity };

struct DatasetConfig {
  DatasetKind kind = DatasetKind::kIdx;
  std::filesystem::path train_images;
  std::filesystem::path train_labels;
  std::filesystem::path test_images;
  std::filesystem::path test_labels;
  Index train_limit = 0;  // 0 keeps every pattern
  Index test_limit = 0;
};

struct CheckpointCadence {
  int every_epochs = 1;      // 0 keeps only the final checkpoint
  int probes_per_epoch = 0;  // additional intra-epoch snapshots
};

struct EvalOptions {
  double ridge_strength = 1e-4;
  bool readout = true;
  bool generation = true;
  GenerationSpec generation_spec;
  int receptive_fields = 0;  // units exported per layer; 0 disables
  std::vector<std::filesystem::path> checkpoints;
};

struct ContinualOptions {
  std::filesystem::path letters_images;
  std::filesystem::path letters_labels;
  bool letters_transposed = false;
  int letter_first_label = 0;  // first letter class kept from the letters file
  ContinualSetSpec sets;
  ContinualConfig run;
  std::filesystem::path stage1;  // checkpoint; empty trains stage 1 in-process
};

struct GraphOptions {
  std::vector<double> cutoffs = kPaperCutoffs;
  double degree_cutoff = 0.6;
  std::vector<std::filesystem::path> checkpoints;
};

struct NumerosityOptions {
  NumerosityParams dataset;
  int runs = 20;
  std::vector<int> references{8, 16};
  int classifiers_per_point = 5;
  double train_fraction = 0.8;
  double ridge_strength = 1e-4;
  PsychometricModel model = PsychometricModel::kCentered;
  int sample_every = 1;     // trajectory sampling interval in epochs
  double tzm_scale = 1.0;   // multiplier applied to w before the TZM fit
};

/// Everything a subcommand needs, validated before any compute.
struct ExperimentConfig {
  std::string name = "experiment";
  std::filesystem::path output_dir = "runs/experiment";
  std::uint64_t seed = 0;
  DatasetConfig data;
  std::vector<Index> layer_sizes{784, 500, 500, 2000};
  Scheme scheme = Scheme::kIterative;
  TrainConfig train;
  CheckpointCadence checkpoint;
  EvalOptions eval;
  ContinualOptions continual;
  GraphOptions graph;
  NumerosityOptions numerosity;

  /// Throws ConfigError on the first violated constraint.
  void validate() const;

  /// Every setting in a fixed order as `section.key = value` lines, except
  /// the output directory. Identical experiments produce identical text.
  std::string canonical() const;

  /// 16 hex digits identifying `canonical()`.
  std::string hash() const;
};

/// Parses INI text ([section] headers, `key = value`, `;`/`#` comments).
/// Relative data and checkpoint paths resolve against `base_dir`. Unknown
/// sections or keys are rejected.
ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir);

/// Reads and parses a config file; paths resolve against its directory.
ExperimentConfig load_config(const std::filesystem::path& path);

/// 64-bit FNV-1a digest.
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace idbn
