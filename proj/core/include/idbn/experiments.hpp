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

#include <filesystem>
#include <map>
#include <optional>
#include <vector>

#include "idbn/checkpoint.hpp"
#include "idbn/config.hpp"
#include "idbn/evaluation.hpp"
#include "idbn/graph.hpp"
#include "idbn/psychometrics.hpp"

namespace idbn {

/// Training and test sets named by the [data] section. The test set is empty
/// when no test paths are configured.
struct Datasets {
  LabeledImageSet train;
  LabeledImageSet test;
};
Datasets load_datasets(const ExperimentConfig& cfg);

struct TrainOutcome {
  Dbn dbn;
  TrainingTrace trace;  // epochs run by this invocation
  std::filesystem::path final_checkpoint;
};

/// Trains the configured scheme, writing `checkpoints/<epoch-NNNN>/` at the
/// configured cadence and `trace.csv`. With `resume`, continues from an
/// epoch-boundary checkpoint written under the same config hash.
TrainOutcome cmd_train(const ExperimentConfig& cfg,
                       const std::optional<std::filesystem::path>& resume = std::nullopt);

struct ReadoutRow {
  int epoch = 0;
  int layer = 0;  // 1-based depth
  double accuracy = 0.0;
};

struct EvalOutcome {
  std::vector<ReadoutRow> readout;
  std::map<Scheme, GenerationReport> generation;
};

/// Readout curve over every evaluated checkpoint (`readout.csv`), generation
/// report over the final checkpoints of each scheme (`generation.csv`) and
/// optional receptive-field PGMs.
EvalOutcome cmd_eval(const ExperimentConfig& cfg);

/// Stage 1 (loaded or trained in-process) followed by sequential and
/// interleaved stage 2 (`continual.csv`).
ContinualCurves cmd_continual(const ExperimentConfig& cfg);

struct GraphOutcome {
  std::vector<GridRow> grid;
  std::vector<DegreeDistribution> degrees;  // raw, P, Q of the last checkpoint
};

/// Structural grid over checkpoints and cutoffs (`grid.csv`) and degree
/// distributions of the last checkpoint at the degree cutoff (`degrees.csv`).
GraphOutcome cmd_graph(const ExperimentConfig& cfg);

struct NumerosityOutcome {
  std::vector<PsychometricPoint> final_points;   // run-averaged, all references
  std::vector<double> final_w;                   // per run
  std::vector<TrajectoryPoint> trajectory;
  std::optional<PowerLawFit> fit_sz;
  std::optional<PowerLawFit> fit_tzm;
};

/// Trains `runs` DBNs on a generated numerosity set, fits the Weber fraction
/// at sampled epochs and the power law over the mean trajectory
/// (`points.csv`, `trajectory.csv`, `fits.csv`).
NumerosityOutcome cmd_numerosity(const ExperimentConfig& cfg);

/// Grayscale P5 image with maxval 255 from values in [0, 1].
void write_pgm(const std::filesystem::path& path, const RowVector& pixels, int side);

}  // namespace idbn
