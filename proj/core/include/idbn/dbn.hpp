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

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "idbn/rbm.hpp"

namespace idbn {

enum class Scheme { kGreedy, kIterative, kFullStack };

std::string_view to_string(Scheme scheme);
Scheme parse_scheme(std::string_view name);

/// Ordered stack of RBMs; layers[i] maps layer_sizes[i] -> layer_sizes[i + 1].
class Dbn {
 public:
  Dbn() = default;
  /// Takes ownership of `layers`; throws ShapeError if they do not chain.
  explicit Dbn(std::vector<RbmLayer> layers);

  /// Initializes every layer with its own deterministic init stream.
  static Dbn create(const std::vector<Index>& layer_sizes, const InitScheme& scheme,
                    std::uint64_t seed);

  const std::vector<Index>& layer_sizes() const { return sizes_; }
  std::size_t depth() const { return layers_.size(); }
  const RbmLayer& layer(std::size_t i) const { return layers_.at(i); }
  RbmLayer& layer(std::size_t i) { return layers_.at(i); }
  const std::vector<RbmLayer>& layers() const { return layers_; }

  friend bool operator==(const Dbn& a, const Dbn& b) { return a.layers_ == b.layers_; }

 private:
  std::vector<RbmLayer> layers_;
  std::vector<Index> sizes_;
};

enum class SweepMode { kProbabilities, kSamples };

/// Activations h_1..h_L for each row of `visible`. Probability mode is
/// deterministic; sample mode draws binary states at every layer and feeds
/// them upward.
std::vector<Matrix> forward_sweep(const Dbn& dbn, const Matrix& visible,
                                  SweepMode mode = SweepMode::kProbabilities, Rng* rng = nullptr);

/// Probability-mode activations of the layer at `depth` (1-based; depth 0
/// returns the input unchanged).
Matrix project(const Dbn& dbn, const Matrix& visible, std::size_t depth);

/// Deterministic top-down chain of visible probabilities from the top layer.
Matrix top_down_pass(const Dbn& dbn, const Matrix& top);

/// Per-unit MSE of the one-step reconstruction at layer `depth` (1-based),
/// whose input is the probability projection of `data` through the layers
/// below it.
double reconstruction_error(const Dbn& dbn, const Matrix& data, std::size_t depth);

/// One completed training epoch.
struct EpochRecord {
  int epoch = 0;                // global, zero-based
  int active_layer = -1;        // greedy: zero-based layer being trained; -1 for joint schemes
  std::vector<double> reconstruction_error;  // per layer
  std::vector<double> readout_accuracy;      // per layer, filled by hooks when requested
};

struct TrainingTrace {
  Scheme scheme = Scheme::kIterative;
  std::vector<EpochRecord> epochs;
};

/// Read-only view handed to hooks at intra-epoch probe points.
struct ProbeEvent {
  int epoch = 0;             // global epoch
  int probe_index = 0;       // 0..probes_per_epoch-1 within the epoch
  double position = 0.0;     // fraction of the epoch's minibatches completed, in (0, 1]
  const Dbn* dbn = nullptr;
};

struct TrainingHooks {
  /// Number of evenly spaced probes per epoch (by minibatch count); 0 disables.
  int probes_per_epoch = 0;
  std::function<void(const ProbeEvent&)> on_probe;
  /// Called after the record's reconstruction errors are filled; may add
  /// readout accuracies or persist a checkpoint.
  std::function<void(const Dbn&, EpochRecord&)> on_epoch_end;
  /// Patterns (prefix of the training set) used for per-epoch reconstruction
  /// errors; 0 uses the whole set.
  Index trace_patterns = 1000;
  /// Checked after each epoch; returning true ends training early (the state
  /// still points at the next epoch so training can be resumed).
  std::function<bool(const EpochRecord&)> should_stop;
};

/// Resumable training position: global epoch to run next and momentum buffers.
struct TrainingState {
  int next_epoch = 0;
  std::vector<OptimizerState> optimizers;
};

/// Total number of global epochs a scheme runs for `depth` layers.
int total_epochs(Scheme scheme, const TrainConfig& cfg, std::size_t depth);

/// Minibatch index boundaries at which probes fire for an epoch of
/// `n_batches` batches (last batch index of each probe interval, ascending).
std::vector<Index> probe_batches(Index n_batches, int probes_per_epoch);

/// Permutation of 0..n-1 for one epoch; identical for every scheme.
std::vector<Index> epoch_order(Index n, std::uint64_t seed, int epoch);

TrainingTrace train_greedy(Dbn& dbn, const Matrix& data, const TrainConfig& cfg,
                           const TrainingHooks& hooks = {});
TrainingTrace train_iterative(Dbn& dbn, const Matrix& data, const TrainConfig& cfg,
                              const TrainingHooks& hooks = {});
TrainingTrace train_fullstack(Dbn& dbn, const Matrix& data, const TrainConfig& cfg,
                              const TrainingHooks& hooks = {});

/// Dispatches on `scheme` and continues from `state` (which is updated), so a
/// run can be split at any epoch boundary with bit-identical results.
TrainingTrace train(Scheme scheme, Dbn& dbn, const Matrix& data, const TrainConfig& cfg,
                    const TrainingHooks& hooks, TrainingState& state);

}  // namespace idbn
