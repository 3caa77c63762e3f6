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

#include "idbn/dbn.hpp"

#include <algorithm>
#include <numeric>

#include <fmt/format.h>

#include "idbn/errors.hpp"

namespace idbn {
namespace {

struct Batching {
  Index n_batches = 0;
  Index batch_size = 0;
  Index n = 0;

  Index begin(Index b) const { return b * batch_size; }
  Index end(Index b) const { return std::min(n, (b + 1) * batch_size); }
};

Batching make_batching(Index n, int batch_size) {
  return {(n + batch_size - 1) / batch_size, batch_size, n};
}

Matrix gather_rows(const Matrix& data, const std::vector<Index>& order, Index begin, Index end) {
  Matrix out(end - begin, data.cols());
  for (Index r = begin; r < end; ++r) out.row(r - begin) = data.row(order[static_cast<std::size_t>(r)]);
  return out;
}

void check_data(const Dbn& dbn, const Matrix& data) {
  if (dbn.depth() == 0) throw ConfigError("DBN has no layers");
  if (data.rows() == 0) throw DataError(DataError::Kind::kInsufficient, "training set is empty");
  if (data.cols() != dbn.layer_sizes().front()) {
    throw ShapeError(fmt::format("training patterns have {} units, DBN expects {}", data.cols(),
                                 dbn.layer_sizes().front()));
  }
}

void ensure_optimizers(const Dbn& dbn, TrainingState& state) {
  if (state.optimizers.size() == dbn.depth()) return;
  if (!state.optimizers.empty()) {
    throw ShapeError("training state has optimizer buffers for a different number of layers");
  }
  for (const auto& layer : dbn.layers()) state.optimizers.push_back(OptimizerState::zeros_like(layer));
}

std::optional<Matrix> draw_masks(const TrainConfig& cfg, Index rows, Index n_hidden, Rng& rng) {
  if (!cfg.dropout_presence) return std::nullopt;
  return dropout_masks(rows, n_hidden, *cfg.dropout_presence, rng);
}

/// Per-epoch random streams of one layer.
struct LayerStreams {
  Rng sampling;
  Rng dropout;

  LayerStreams(std::uint64_t seed, std::size_t layer, int epoch)
      : sampling(make_stream(seed, StreamPurpose::kSampling, layer, static_cast<std::uint64_t>(epoch))),
        dropout(make_stream(seed, StreamPurpose::kDropout, layer, static_cast<std::uint64_t>(epoch))) {}
};

void local_update(RbmLayer& layer, OptimizerState& opt, const Matrix& input, const TrainConfig& cfg,
                  int epoch, LayerStreams& streams) {
  const auto mask = draw_masks(cfg, input.rows(), layer.n_hidden(), streams.dropout);
  RngSampler sampler(streams.sampling);
  const GradientEstimate grad = cd_step(layer, input, cfg.cd_k, sampler, mask ? &*mask : nullptr);
  apply_update(layer, grad, opt, cfg, epoch);
}

Matrix trace_subset(const Matrix& data, const TrainingHooks& hooks) {
  const Index n = hooks.trace_patterns > 0 ? std::min(hooks.trace_patterns, data.rows()) : data.rows();
  return data.topRows(n);
}

EpochRecord make_record(const Dbn& dbn, const Matrix& subset, int epoch, int active_layer) {
  EpochRecord rec;
  rec.epoch = epoch;
  rec.active_layer = active_layer;
  Matrix input = subset;
  for (std::size_t i = 0; i < dbn.depth(); ++i) {
    rec.reconstruction_error.push_back(reconstruction_error(dbn.layer(i), input));
    if (i + 1 < dbn.depth()) input = hidden_probabilities(dbn.layer(i), input);
  }
  return rec;
}

void check_finite(const Dbn& dbn, int epoch) {
  for (std::size_t i = 0; i < dbn.depth(); ++i) {
    if (!dbn.layer(i).all_finite()) {
      throw NumericError(fmt::format("layer {} has non-finite parameters after epoch {}", i + 1, epoch));
    }
  }
}

/// Shared epoch loop: `step` performs the updates for one minibatch.
template <typename Step>
void run_epoch(const Dbn& dbn, const Matrix& data, const TrainConfig& cfg, const TrainingHooks& hooks,
               int global_epoch, int local_epoch, Step&& step) {
  const Batching batching = make_batching(data.rows(), cfg.batch_size);
  const std::vector<Index> order = epoch_order(data.rows(), cfg.seed, local_epoch);
  const std::vector<Index> probes = probe_batches(batching.n_batches, hooks.probes_per_epoch);
  std::size_t next_probe = 0;
  for (Index b = 0; b < batching.n_batches; ++b) {
    step(gather_rows(data, order, batching.begin(b), batching.end(b)));
    while (next_probe < probes.size() && probes[next_probe] == b) {
      if (hooks.on_probe) {
        hooks.on_probe(ProbeEvent{global_epoch, static_cast<int>(next_probe),
                                  static_cast<double>(b + 1) / static_cast<double>(batching.n_batches),
                                  &dbn});
      }
      ++next_probe;
    }
  }
}

/// Finishes an epoch; returns true when training should stop.
bool finish_epoch(const Dbn& dbn, const Matrix& subset, const TrainingHooks& hooks, TrainingTrace& trace,
                  int epoch, int active_layer) {
  check_finite(dbn, epoch);
  EpochRecord rec = make_record(dbn, subset, epoch, active_layer);
  if (hooks.on_epoch_end) hooks.on_epoch_end(dbn, rec);
  trace.epochs.push_back(std::move(rec));
  return hooks.should_stop && hooks.should_stop(trace.epochs.back());
}

TrainingTrace run_greedy(Dbn& dbn, const Matrix& data, const TrainConfig& cfg,
                         const TrainingHooks& hooks, TrainingState& state) {
  TrainingTrace trace{Scheme::kGreedy, {}};
  const Matrix subset = trace_subset(data, hooks);
  const int total = total_epochs(Scheme::kGreedy, cfg, dbn.depth());
  int projected_layer = -1;
  Matrix layer_data;
  while (state.next_epoch < total) {
    const int epoch = state.next_epoch;
    const int layer = epoch / cfg.epochs;
    const int local = epoch % cfg.epochs;
    if (layer != projected_layer) {
      // Training set of a layer is the frozen projection through those below.
      layer_data = project(dbn, data, static_cast<std::size_t>(layer));
      projected_layer = layer;
    }
    const auto li = static_cast<std::size_t>(layer);
    LayerStreams streams(cfg.seed, li, local);
    run_epoch(dbn, layer_data, cfg, hooks, epoch, local, [&](const Matrix& batch) {
      local_update(dbn.layer(li), state.optimizers[li], batch, cfg, local, streams);
    });
    ++state.next_epoch;
    if (finish_epoch(dbn, subset, hooks, trace, epoch, layer)) break;
  }
  return trace;
}

TrainingTrace run_iterative(Dbn& dbn, const Matrix& data, const TrainConfig& cfg,
                            const TrainingHooks& hooks, TrainingState& state) {
  TrainingTrace trace{Scheme::kIterative, {}};
  const Matrix subset = trace_subset(data, hooks);
  const std::size_t depth = dbn.depth();
  while (state.next_epoch < cfg.epochs) {
    const int epoch = state.next_epoch;
    std::vector<LayerStreams> streams;
    for (std::size_t i = 0; i < depth; ++i) streams.emplace_back(cfg.seed, i, epoch);
    std::vector<Matrix> inputs(depth);
    run_epoch(dbn, data, cfg, hooks, epoch, epoch, [&](const Matrix& batch) {
      // Feed-forward sweep through the current weights, fixed before any
      // layer learns from this minibatch.
      inputs[0] = batch;
      for (std::size_t i = 0; i + 1 < depth; ++i) {
        inputs[i + 1] = hidden_probabilities(dbn.layer(i), inputs[i]);
      }
      for (std::size_t i = 0; i < depth; ++i) {
        local_update(dbn.layer(i), state.optimizers[i], inputs[i], cfg, epoch, streams[i]);
      }
    });
    ++state.next_epoch;
    if (finish_epoch(dbn, subset, hooks, trace, epoch, -1)) break;
  }
  return trace;
}

TrainingTrace run_fullstack(Dbn& dbn, const Matrix& data, const TrainConfig& cfg,
                            const TrainingHooks& hooks, TrainingState& state) {
  TrainingTrace trace{Scheme::kFullStack, {}};
  const Matrix subset = trace_subset(data, hooks);
  const std::size_t depth = dbn.depth();
  while (state.next_epoch < cfg.epochs) {
    const int epoch = state.next_epoch;
    std::vector<LayerStreams> streams;
    for (std::size_t i = 0; i < depth; ++i) streams.emplace_back(cfg.seed, i, epoch);
    std::vector<Matrix> up(depth + 1);
    std::vector<Matrix> again(depth + 1);
    std::vector<std::optional<Matrix>> masks(depth);
    run_epoch(dbn, data, cfg, hooks, epoch, epoch, [&](const Matrix& batch) {
      up[0] = batch;
      for (std::size_t i = 0; i < depth; ++i) {
        masks[i] = draw_masks(cfg, batch.rows(), dbn.layer(i).n_hidden(), streams[i].dropout);
        up[i + 1] = hidden_probabilities(dbn.layer(i), up[i], masks[i] ? &*masks[i] : nullptr);
      }
      RngSampler top_sampler(streams[depth - 1].sampling);
      Matrix top = top_sampler.sample(up[depth]);
      for (int step = 0; step < cfg.cd_k; ++step) {
        // Generative descent to the sensory layer, then one recognition ascent.
        Matrix down = std::move(top);
        for (std::size_t i = depth; i-- > 0;) down = visible_probabilities(dbn.layer(i), down);
        again[0] = std::move(down);
        for (std::size_t i = 0; i < depth; ++i) {
          again[i + 1] = hidden_probabilities(dbn.layer(i), again[i], masks[i] ? &*masks[i] : nullptr);
        }
        if (step + 1 < cfg.cd_k) top = top_sampler.sample(again[depth]);
      }
      for (std::size_t i = 0; i < depth; ++i) {
        const GradientEstimate grad = gradient_from_statistics(up[i], up[i + 1], again[i], again[i + 1]);
        apply_update(dbn.layer(i), grad, state.optimizers[i], cfg, epoch);
      }
    });
    ++state.next_epoch;
    if (finish_epoch(dbn, subset, hooks, trace, epoch, -1)) break;
  }
  return trace;
}

}  // namespace

std::string_view to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::kGreedy:
      return "greedy";
    case Scheme::kIterative:
      return "iterative";
    case Scheme::kFullStack:
      return "fullstack";
  }
  return "unknown";
}

Scheme parse_scheme(std::string_view name) {
  if (name == "greedy") return Scheme::kGreedy;
  if (name == "iterative") return Scheme::kIterative;
  if (name == "fullstack" || name == "full-stack") return Scheme::kFullStack;
  throw ConfigError(fmt::format("unknown scheme '{}' (expected greedy, iterative or fullstack)", name));
}

Dbn::Dbn(std::vector<RbmLayer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) return;
  sizes_.push_back(layers_.front().n_visible());
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const RbmLayer& l = layers_[i];
    if (l.n_visible() != sizes_.back()) {
      throw ShapeError(fmt::format("layer {} has {} visible units, previous layer has {} hidden",
                                   i + 1, l.n_visible(), sizes_.back()));
    }
    if (l.visible_bias.size() != l.n_visible() || l.hidden_bias.size() != l.n_hidden()) {
      throw ShapeError(fmt::format("layer {} bias lengths do not match its weights", i + 1));
    }
    sizes_.push_back(l.n_hidden());
  }
}

Dbn Dbn::create(const std::vector<Index>& layer_sizes, const InitScheme& scheme, std::uint64_t seed) {
  if (layer_sizes.size() < 2) throw ConfigError("a DBN needs at least a visible and one hidden layer");
  std::vector<RbmLayer> layers;
  for (std::size_t i = 0; i + 1 < layer_sizes.size(); ++i) {
    Rng rng = make_stream(seed, StreamPurpose::kInit, i);
    layers.push_back(init_rbm(layer_sizes[i], layer_sizes[i + 1], scheme, rng));
  }
  return Dbn(std::move(layers));
}

std::vector<Matrix> forward_sweep(const Dbn& dbn, const Matrix& visible, SweepMode mode, Rng* rng) {
  if (mode == SweepMode::kSamples && rng == nullptr) {
    throw ConfigError("forward_sweep: sample mode needs a random generator");
  }
  std::vector<Matrix> out;
  out.reserve(dbn.depth());
  const Matrix* input = &visible;
  for (const RbmLayer& layer : dbn.layers()) {
    Matrix probs = hidden_probabilities(layer, *input);
    out.push_back(mode == SweepMode::kSamples ? sample_bernoulli(probs, *rng) : std::move(probs));
    input = &out.back();
  }
  return out;
}

Matrix project(const Dbn& dbn, const Matrix& visible, std::size_t depth) {
  if (depth > dbn.depth()) {
    throw ConfigError(fmt::format("depth {} exceeds the {} layers of the DBN", depth, dbn.depth()));
  }
  Matrix out = visible;
  for (std::size_t i = 0; i < depth; ++i) out = hidden_probabilities(dbn.layer(i), out);
  return out;
}

Matrix top_down_pass(const Dbn& dbn, const Matrix& top) {
  if (dbn.depth() == 0) throw ConfigError("DBN has no layers");
  Matrix out = top;
  for (std::size_t i = dbn.depth(); i-- > 0;) out = visible_probabilities(dbn.layer(i), out);
  return out;
}

double reconstruction_error(const Dbn& dbn, const Matrix& data, std::size_t depth) {
  if (depth < 1 || depth > dbn.depth()) {
    throw ConfigError(fmt::format("depth must be in 1..{}, got {}", dbn.depth(), depth));
  }
  return reconstruction_error(dbn.layer(depth - 1), project(dbn, data, depth - 1));
}

int total_epochs(Scheme scheme, const TrainConfig& cfg, std::size_t depth) {
  return scheme == Scheme::kGreedy ? cfg.epochs * static_cast<int>(depth) : cfg.epochs;
}

std::vector<Index> probe_batches(Index n_batches, int probes_per_epoch) {
  std::vector<Index> out;
  if (probes_per_epoch <= 0 || n_batches <= 0) return out;
  for (int p = 1; p <= probes_per_epoch; ++p) {
    const Index end = (static_cast<Index>(p) * n_batches) / probes_per_epoch;
    out.push_back(std::max<Index>(end, 1) - 1);
  }
  return out;
}

std::vector<Index> epoch_order(Index n, std::uint64_t seed, int epoch) {
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  Rng rng = make_stream(seed, StreamPurpose::kOrder, 0, static_cast<std::uint64_t>(epoch));
  // Fisher-Yates with our own uniform draw keeps the order independent of the
  // standard library's distribution implementation.
  for (std::size_t i = order.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(i));
    std::swap(order[i - 1], order[std::min(j, i - 1)]);
  }
  return order;
}

TrainingTrace train(Scheme scheme, Dbn& dbn, const Matrix& data, const TrainConfig& cfg,
                    const TrainingHooks& hooks, TrainingState& state) {
  cfg.validate();
  check_data(dbn, data);
  ensure_optimizers(dbn, state);
  switch (scheme) {
    case Scheme::kGreedy:
      return run_greedy(dbn, data, cfg, hooks, state);
    case Scheme::kIterative:
      return run_iterative(dbn, data, cfg, hooks, state);
    case Scheme::kFullStack:
      return run_fullstack(dbn, data, cfg, hooks, state);
  }
  throw ConfigError("unknown scheme");
}

TrainingTrace train_greedy(Dbn& dbn, const Matrix& data, const TrainConfig& cfg,
                           const TrainingHooks& hooks) {
  TrainingState state;
  return train(Scheme::kGreedy, dbn, data, cfg, hooks, state);
}

TrainingTrace train_iterative(Dbn& dbn, const Matrix& data, const TrainConfig& cfg,
                              const TrainingHooks& hooks) {
  TrainingState state;
  return train(Scheme::kIterative, dbn, data, cfg, hooks, state);
}

TrainingTrace train_fullstack(Dbn& dbn, const Matrix& data, const TrainConfig& cfg,
                              const TrainingHooks& hooks) {
  TrainingState state;
  return train(Scheme::kFullStack, dbn, data, cfg, hooks, state);
}

}  // namespace idbn
