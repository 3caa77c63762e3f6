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

#include <array>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "idbn/data.hpp"
#include "idbn/dbn.hpp"
#include "idbn/readout.hpp"

namespace idbn {

/// Readout features at `depth` (1-based) for every image: mean-field
/// probabilities, never samples.
Matrix layer_features(const Dbn& dbn, const Matrix& images, std::size_t depth);

/// Test accuracy of a ridge readout fitted on each layer's features.
std::vector<double> layerwise_readout(const Dbn& dbn, const LabeledImageSet& train,
                                      const LabeledImageSet& test, double ridge_strength);

enum class GenerationTask { kReproduce = 0, kComplete = 1, kDenoise = 2 };
inline constexpr std::array<GenerationTask, 3> kGenerationTasks = {
    GenerationTask::kReproduce, GenerationTask::kComplete, GenerationTask::kDenoise};
std::string_view to_string(GenerationTask task);

struct GenerationSpec {
  int image_side = 28;
  int occlusion_first_row = 9;
  int occlusion_rows = 10;
  double noise_sigma = 0.5;
};

/// Per-unit squared error of one model on each task, indexed by GenerationTask.
using GenerationErrors = std::array<double, 3>;

/// Maps a batch of visible patterns to their reconstructions.
using Reconstructor = std::function<Matrix(const Matrix&)>;

/// Runs the clean, occluded and noised versions of `images` through
/// `reconstruct` and scores each against the clean originals.
GenerationErrors generation_tasks(const Reconstructor& reconstruct, const Matrix& images,
                                  const GenerationSpec& spec, Rng& rng);

/// Full upward probability sweep followed by the deterministic top-down pass.
GenerationErrors generation_tasks(const Dbn& dbn, const Matrix& images, const GenerationSpec& spec,
                                  Rng& rng);

struct TaskSummary {
  double mean = 0.0;
  std::optional<double> standard_error;  // absent with fewer than two runs
};

struct GenerationReport {
  std::array<TaskSummary, 3> tasks;
  std::size_t runs = 0;
};

GenerationReport summarize_generation(const std::vector<GenerationErrors>& runs);

struct ContinualConfig {
  int epochs = 1;
  int probes_per_epoch = 10;
  double ridge_strength = 1e-4;
  double letter_train_fraction = 0.8;
  std::uint64_t seed = 0;
};

struct ContinualProbe {
  int probe_index = 0;  // running index across epochs
  int epoch = 0;
  double position = 0.0;
  double digit_accuracy = 0.0;
  double letter_accuracy = 0.0;
};

struct ContinualCurves {
  double stage1_digit_accuracy = 0.0;
  std::vector<ContinualProbe> sequential;
  std::vector<ContinualProbe> interleaved;
};

/// Second learning stage from a digit-trained model. The sequential regimen
/// trains on letters only, the interleaved one on stage-2 digits plus the
/// same letters. At every probe the frozen digit readout is scored on
/// `digit_test` and a letter readout is refitted on the training split of
/// `letters` and scored on its held-out split. Both regimens start from a
/// copy of `stage1`.
ContinualCurves continual_run(const Dbn& stage1, const LinearReadout& digit_readout,
                              const LabeledImageSet& digit_test, const LabeledImageSet& digits,
                              const LabeledImageSet& letters, const TrainConfig& cfg,
                              const ContinualConfig& options);

/// Rows of W_depth * ... * W_1 for the selected units of layer `depth`, each
/// linearly rescaled to [0, 1] when `rescale` is set (constant rows map to 0.5).
Matrix receptive_fields(const Dbn& dbn, std::size_t depth, const std::vector<Index>& units,
                        bool rescale = true);

}  // namespace idbn
