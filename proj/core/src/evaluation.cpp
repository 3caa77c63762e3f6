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

#include "idbn/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "idbn/errors.hpp"

namespace idbn {
namespace {

double per_unit_error(const Matrix& reference, const Matrix& recon) {
  return (reference - recon).squaredNorm() / static_cast<double>(reference.size());
}

Matrix stack_rows(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() + b.rows(), a.cols());
  out.topRows(a.rows()) = a;
  out.bottomRows(b.rows()) = b;
  return out;
}

}  // namespace

Matrix layer_features(const Dbn& dbn, const Matrix& images, std::size_t depth) {
  return project(dbn, images, depth);
}

std::vector<double> layerwise_readout(const Dbn& dbn, const LabeledImageSet& train,
                                      const LabeledImageSet& test, double ridge_strength) {
  const std::vector<Matrix> train_features = forward_sweep(dbn, train.images);
  const std::vector<Matrix> test_features = forward_sweep(dbn, test.images);
  std::vector<double> out;
  for (std::size_t d = 0; d < dbn.depth(); ++d) {
    const LinearReadout readout = fit_ridge(train_features[d], train.labels, ridge_strength);
    out.push_back(readout.accuracy(test_features[d], test.labels));
  }
  return out;
}

std::string_view to_string(GenerationTask task) {
  switch (task) {
    case GenerationTask::kReproduce:
      return "reproduce";
    case GenerationTask::kComplete:
      return "complete";
    case GenerationTask::kDenoise:
      return "denoise";
  }
  return "unknown";
}

GenerationErrors generation_tasks(const Reconstructor& reconstruct, const Matrix& images,
                                  const GenerationSpec& spec, Rng& rng) {
  if (images.rows() == 0) throw DataError(DataError::Kind::kInsufficient, "no images to reconstruct");
  const Matrix occluded =
      corrupt_occlude(images, spec.image_side, spec.occlusion_first_row, spec.occlusion_rows);
  const Matrix noised = corrupt_noise(images, spec.noise_sigma, rng);
  GenerationErrors out{};
  out[static_cast<int>(GenerationTask::kReproduce)] = per_unit_error(images, reconstruct(images));
  out[static_cast<int>(GenerationTask::kComplete)] = per_unit_error(images, reconstruct(occluded));
  out[static_cast<int>(GenerationTask::kDenoise)] = per_unit_error(images, reconstruct(noised));
  return out;
}

GenerationErrors generation_tasks(const Dbn& dbn, const Matrix& images, const GenerationSpec& spec,
                                  Rng& rng) {
  return generation_tasks(
      [&dbn](const Matrix& x) { return top_down_pass(dbn, project(dbn, x, dbn.depth())); }, images,
      spec, rng);
}

GenerationReport summarize_generation(const std::vector<GenerationErrors>& runs) {
  GenerationReport report;
  report.runs = runs.size();
  if (runs.empty()) return report;
  const auto n = static_cast<double>(runs.size());
  for (std::size_t t = 0; t < kGenerationTasks.size(); ++t) {
    double mean = 0.0;
    for (const auto& r : runs) mean += r[t];
    mean /= n;
    report.tasks[t].mean = mean;
    if (runs.size() >= 2) {
      double ss = 0.0;
      for (const auto& r : runs) ss += (r[t] - mean) * (r[t] - mean);
      report.tasks[t].standard_error = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
    }
  }
  return report;
}

ContinualCurves continual_run(const Dbn& stage1, const LinearReadout& digit_readout,
                              const LabeledImageSet& digit_test, const LabeledImageSet& digits,
                              const LabeledImageSet& letters, const TrainConfig& cfg,
                              const ContinualConfig& options) {
  if (!(options.letter_train_fraction > 0.0 && options.letter_train_fraction < 1.0)) {
    throw ConfigError("letter_train_fraction must be in (0, 1)");
  }
  if (letters.size() < 2) throw DataError(DataError::Kind::kInsufficient, "too few letter images");
  const std::size_t depth = stage1.depth();

  // Fixed held-out split of the letters.
  std::vector<Index> order = epoch_order(letters.size(), derive_seed(options.seed, {static_cast<std::uint64_t>(StreamPurpose::kSplit)}), 0);
  const auto n_train = static_cast<std::size_t>(
      std::clamp<double>(std::round(options.letter_train_fraction * static_cast<double>(letters.size())),
                         1.0, static_cast<double>(letters.size() - 1)));
  const LabeledImageSet letter_train =
      letters.subset(std::vector<Index>(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train)));
  const LabeledImageSet letter_test =
      letters.subset(std::vector<Index>(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end()));

  ContinualCurves curves;
  curves.stage1_digit_accuracy =
      digit_readout.accuracy(layer_features(stage1, digit_test.images, depth), digit_test.labels);

  auto run_regimen = [&](const Matrix& data, std::vector<ContinualProbe>& out) {
    Dbn model = stage1;
    TrainConfig stage_cfg = cfg;
    stage_cfg.epochs = options.epochs;
    TrainingHooks hooks;
    hooks.probes_per_epoch = options.probes_per_epoch;
    hooks.trace_patterns = 1;
    hooks.on_probe = [&](const ProbeEvent& ev) {
      ContinualProbe probe;
      probe.probe_index = static_cast<int>(out.size());
      probe.epoch = ev.epoch;
      probe.position = ev.position;
      probe.digit_accuracy =
          digit_readout.accuracy(layer_features(*ev.dbn, digit_test.images, depth), digit_test.labels);
      const LinearReadout letter_readout = fit_ridge(
          layer_features(*ev.dbn, letter_train.images, depth), letter_train.labels, options.ridge_strength);
      probe.letter_accuracy =
          letter_readout.accuracy(layer_features(*ev.dbn, letter_test.images, depth), letter_test.labels);
      out.push_back(probe);
    };
    train_iterative(model, data, stage_cfg, hooks);
  };

  run_regimen(letter_train.images, curves.sequential);
  run_regimen(stack_rows(digits.images, letter_train.images), curves.interleaved);
  return curves;
}

Matrix receptive_fields(const Dbn& dbn, std::size_t depth, const std::vector<Index>& units, bool rescale) {
  if (depth < 1 || depth > dbn.depth()) {
    throw ConfigError(fmt::format("depth must be in 1..{}, got {}", dbn.depth(), depth));
  }
  Matrix product = dbn.layer(0).weights;
  for (std::size_t i = 1; i < depth; ++i) product = dbn.layer(i).weights * product;
  Matrix out(static_cast<Index>(units.size()), product.cols());
  for (std::size_t k = 0; k < units.size(); ++k) {
    const Index u = units[k];
    if (u < 0 || u >= product.rows()) {
      throw ConfigError(fmt::format("unit {} outside layer {} of size {}", u, depth, product.rows()));
    }
    RowVector row = product.row(u);
    if (rescale) {
      const double lo = row.minCoeff();
      const double hi = row.maxCoeff();
      row = hi > lo ? RowVector((row.array() - lo) / (hi - lo)) : RowVector::Constant(row.size(), 0.5);
    }
    out.row(static_cast<Index>(k)) = row;
  }
  return out;
}

}  // namespace idbn
