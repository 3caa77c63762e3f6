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


#include "idbn/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <fmt/format.h>

#include "idbn/csv.hpp"
#include "idbn/errors.hpp"

namespace idbn {
namespace {

namespace fs = std::filesystem;

constexpr std::uint64_t kRunTag = 0x72756e;  // distinguishes per-run seeds

void write_canonical(const ExperimentConfig& cfg) {
  write_file_atomic(cfg.output_dir / "config.canonical.txt",
                    fmt::format("# config_hash={}\n{}", cfg.hash(), cfg.canonical()));
}

CsvTable trace_table(const ExperimentConfig& cfg) {
  return CsvTable(cfg.hash(), {"epoch", "active_layer", "layer", "reconstruction_error", "checkpoint"});
}

/// Re-adds the data rows of a previously written trace table.
void append_rows(CsvTable& table, const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  int seen = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    if (seen++ == 0) continue;  // header
    std::vector<CsvTable::Cell> cells;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      cells.emplace_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    table.add_row(std::move(cells));
  }
}

/// Boundary checkpoints explicitly configured, else every boundary checkpoint
/// under `<output_dir>/checkpoints`, sorted by epoch.
std::vector<Checkpoint> gather_checkpoints(const ExperimentConfig& cfg,
                                           const std::vector<fs::path>& configured) {
  std::vector<fs::path> paths = configured;
  if (paths.empty()) {
    paths = list_checkpoints(cfg.output_dir / "checkpoints");
  } else {
    require_checkpoints(paths);
  }
  std::vector<Checkpoint> out;
  for (const auto& p : paths) {
    Checkpoint c = load_checkpoint(p);
    if (c.info.at_epoch_boundary()) out.push_back(std::move(c));
  }
  if (out.empty()) {
    throw DataError(DataError::Kind::kIo,
                    fmt::format("no epoch checkpoints found (looked in {})",
                                configured.empty() ? (cfg.output_dir / "checkpoints").string()
                                                   : std::string("[eval]/[graph] checkpoints")));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const Checkpoint& a, const Checkpoint& b) { return a.info.epoch < b.info.epoch; });
  return out;
}

std::uint64_t run_seed(std::uint64_t base, int run) {
  return derive_seed(base, {kRunTag, static_cast<std::uint64_t>(run)});
}

}  // namespace

Datasets load_datasets(const ExperimentConfig& cfg) {
  Datasets out;
  if (cfg.data.kind == DatasetKind::kNumerosity) {
    NumerosityParams params = cfg.numerosity.dataset;
    params.seed = cfg.seed;
    out.train = generate_numerosity(params);
    return out;
  }
  out.train = load_idx(cfg.data.train_images, cfg.data.train_labels);
  if (cfg.data.train_limit > 0) out.train = out.train.head(cfg.data.train_limit);
  if (!cfg.data.test_images.empty()) {
    out.test = load_idx(cfg.data.test_images, cfg.data.test_labels);
    if (cfg.data.test_limit > 0) out.test = out.test.head(cfg.data.test_limit);
  }
  const Index visible = cfg.layer_sizes.front();
  if (out.train.images.cols() != visible) {
    throw DataError(DataError::Kind::kFormat, fmt::format("images have {} pixels but the first layer has {} units",
                                                          out.train.images.cols(), visible));
  }
  return out;
}

TrainOutcome cmd_train(const ExperimentConfig& cfg, const std::optional<fs::path>& resume) {
  cfg.validate();
  const Datasets data = load_datasets(cfg);
  write_canonical(cfg);
  const fs::path ckpt_root = cfg.output_dir / "checkpoints";
  const std::string hash = cfg.hash();

  TrainOutcome out;
  TrainingState state;
  CsvTable trace = trace_table(cfg);
  if (resume) {
    Checkpoint start = load_checkpoint(*resume);
    if (start.info.config_hash != hash) {
      throw ConfigError(fmt::format("refusing to resume: checkpoint '{}' was written under config hash {}, "
                                    "current config hash is {}",
                                    resume->string(), start.info.config_hash, hash));
    }
    if (!start.info.at_epoch_boundary() || start.optimizers.empty()) {
      throw ConfigError(fmt::format("refusing to resume from '{}': only epoch-boundary checkpoints with "
                                    "optimizer state can be resumed",
                                    resume->string()));
    }
    if (start.info.scheme != cfg.scheme) {
      throw ConfigError(fmt::format("refusing to resume: checkpoint scheme {} differs from configured {}",
                                    to_string(start.info.scheme), to_string(cfg.scheme)));
    }
    out.dbn = std::move(start.dbn);
    state.next_epoch = start.info.epoch;
    state.optimizers = std::move(start.optimizers);
    append_rows(trace, start.trace_csv);
  } else {
    out.dbn = Dbn::create(cfg.layer_sizes, cfg.train.init, cfg.seed);
  }

  const int total = total_epochs(cfg.scheme, cfg.train, out.dbn.depth());
  auto save = [&](const Dbn& dbn, int epoch, int probe, double position, bool with_optimizer) {
    Checkpoint c;
    c.info.scheme = cfg.scheme;
    c.info.layer_sizes = dbn.layer_sizes();
    c.info.config_hash = hash;
    c.info.epoch = epoch;
    c.info.probe_index = probe;
    c.info.position = position;
    c.info.label = cfg.name;
    c.dbn = dbn;
    if (with_optimizer) {
      c.optimizers = state.optimizers;
      c.trace_csv = trace.str();
    }
    const fs::path dir = ckpt_root / checkpoint_name(epoch, probe);
    save_checkpoint(dir, c);
    return dir;
  };

  TrainingHooks hooks;
  hooks.probes_per_epoch = cfg.checkpoint.probes_per_epoch;
  if (hooks.probes_per_epoch > 0) {
    hooks.on_probe = [&](const ProbeEvent& ev) { save(*ev.dbn, ev.epoch, ev.probe_index, ev.position, false); };
  }
  hooks.on_epoch_end = [&](const Dbn& dbn, EpochRecord& rec) {
    const int completed = rec.epoch + 1;
    const bool keep = completed == total ||
                      (cfg.checkpoint.every_epochs > 0 && completed % cfg.checkpoint.every_epochs == 0);
    const std::string name = keep ? checkpoint_name(completed) : std::string();
    for (std::size_t l = 0; l < rec.reconstruction_error.size(); ++l) {
      trace.add_row({static_cast<long long>(completed), static_cast<long long>(rec.active_layer + 1),
                     static_cast<long long>(l + 1), rec.reconstruction_error[l], name});
    }
    if (keep) out.final_checkpoint = save(dbn, completed, -1, 0.0, true);
  };
  out.trace = train(cfg.scheme, out.dbn, data.train.images, cfg.train, hooks, state);
  if (out.final_checkpoint.empty()) out.final_checkpoint = ckpt_root / checkpoint_name(state.next_epoch);
  trace.write(cfg.output_dir / "trace.csv");
  return out;
}

EvalOutcome cmd_eval(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.data.kind != DatasetKind::kIdx) throw ConfigError("eval needs an image dataset ([data] kind = idx)");
  const Datasets data = load_datasets(cfg);
  if (data.test.size() == 0) throw ConfigError("eval needs [data] test_images and test_labels");
  const std::vector<Checkpoint> checkpoints = gather_checkpoints(cfg, cfg.eval.checkpoints);
  write_canonical(cfg);
  const std::string hash = cfg.hash();

  EvalOutcome out;
  if (cfg.eval.readout) {
    CsvTable table(hash, {"epoch", "layer", "accuracy"});
    for (const auto& c : checkpoints) {
      const auto acc = layerwise_readout(c.dbn, data.train, data.test, cfg.eval.ridge_strength);
      for (std::size_t l = 0; l < acc.size(); ++l) {
        out.readout.push_back({c.info.epoch, static_cast<int>(l + 1), acc[l]});
        table.add_row({static_cast<long long>(c.info.epoch), static_cast<long long>(l + 1), acc[l]});
      }
    }
    table.write(cfg.output_dir / "readout.csv");
  }

  if (cfg.eval.generation) {
    GenerationSpec spec = cfg.eval.generation_spec;
    spec.image_side = data.test.image_side;
    std::map<Scheme, int> final_epoch;
    for (const auto& c : checkpoints) {
      auto [it, inserted] = final_epoch.try_emplace(c.info.scheme, c.info.epoch);
      if (!inserted) it->second = std::max(it->second, c.info.epoch);
    }
    CsvTable table(hash, {"task", "scheme", "mean", "stderr"});
    for (const auto& [scheme, epoch] : final_epoch) {
      std::vector<GenerationErrors> runs;
      for (const auto& c : checkpoints) {
        if (c.info.scheme != scheme || c.info.epoch != epoch) continue;
        Rng rng = make_stream(cfg.seed, StreamPurpose::kNoise, runs.size());
        runs.push_back(generation_tasks(c.dbn, data.test.images, spec, rng));
      }
      const GenerationReport report = summarize_generation(runs);
      for (GenerationTask task : kGenerationTasks) {
        const TaskSummary& s = report.tasks[static_cast<std::size_t>(task)];
        table.add_row({std::string(to_string(task)), std::string(to_string(scheme)), s.mean,
                       s.standard_error ? format_real(*s.standard_error) : std::string("")});
      }
      out.generation[scheme] = report;
    }
    table.write(cfg.output_dir / "generation.csv");
  }

  if (cfg.eval.receptive_fields > 0) {
    const Checkpoint& last = checkpoints.back();
    const int side = data.test.image_side;
    for (std::size_t depth = 1; depth <= last.dbn.depth(); ++depth) {
      const Index units = std::min<Index>(cfg.eval.receptive_fields, last.dbn.layer_sizes()[depth]);
      std::vector<Index> idx(static_cast<std::size_t>(units));
      for (Index u = 0; u < units; ++u) idx[static_cast<std::size_t>(u)] = u;
      const Matrix fields = receptive_fields(last.dbn, depth, idx);
      for (Index u = 0; u < units; ++u) {
        write_pgm(cfg.output_dir / "receptive_fields" / fmt::format("layer{}-unit{:04d}.pgm", depth, u),
                  fields.row(u), side);
      }
    }
  }
  return out;
}

ContinualCurves cmd_continual(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.data.kind != DatasetKind::kIdx) throw ConfigError("continual needs digit images ([data] kind = idx)");
  if (cfg.continual.letters_images.empty() || cfg.continual.letters_labels.empty()) {
    throw ConfigError("continual needs [continual] letters_images and letters_labels");
  }
  const Datasets data = load_datasets(cfg);
  if (data.test.size() == 0) throw ConfigError("continual needs [data] test_images and test_labels");
  IdxOptions letter_options;
  letter_options.transpose = cfg.continual.letters_transposed;
  const LabeledImageSet letters =
      select_label_range(load_idx(cfg.continual.letters_images, cfg.continual.letters_labels, letter_options),
                         cfg.continual.letter_first_label, cfg.continual.sets.letter_classes);
  const ContinualSets sets = make_continual_sets(data.train, letters, cfg.continual.sets, cfg.seed);
  write_canonical(cfg);

  Dbn stage1;
  if (!cfg.continual.stage1.empty()) {
    stage1 = load_checkpoint(cfg.continual.stage1).dbn;
    if (stage1.layer_sizes() != cfg.layer_sizes) {
      throw ConfigError(fmt::format("stage-1 checkpoint '{}' does not match [model] layer_sizes",
                                    cfg.continual.stage1.string()));
    }
  } else {
    stage1 = Dbn::create(cfg.layer_sizes, cfg.train.init, cfg.seed);
    TrainingState state;
    train(cfg.scheme, stage1, sets.digits.images, cfg.train, {}, state);
    Checkpoint c;
    c.info.scheme = cfg.scheme;
    c.info.layer_sizes = stage1.layer_sizes();
    c.info.config_hash = cfg.hash();
    c.info.epoch = state.next_epoch;
    c.info.label = "stage1";
    c.dbn = stage1;
    c.optimizers = state.optimizers;
    save_checkpoint(cfg.output_dir / "continual" / "stage1", c);
  }
  const LinearReadout digit_readout =
      fit_ridge(layer_features(stage1, sets.digits.images, stage1.depth()), sets.digits.labels,
                cfg.continual.run.ridge_strength);
  TrainConfig stage2 = cfg.train;
  stage2.epochs = cfg.continual.run.epochs;
  ContinualConfig options = cfg.continual.run;
  options.seed = cfg.seed;
  const ContinualCurves curves = continual_run(stage1, digit_readout, data.test, sets.digits, sets.letters, stage2, options);

  CsvTable table(cfg.hash(), {"probe_index", "regimen", "digit_acc", "letter_acc"});
  table.add_row({-1LL, std::string("stage1"), curves.stage1_digit_accuracy, std::nan("")});
  for (const auto& [name, probes] : {std::pair{"sequential", &curves.sequential}, std::pair{"interleaved", &curves.interleaved}}) {
    for (const auto& p : *probes) {
      table.add_row({static_cast<long long>(p.probe_index), std::string(name), p.digit_accuracy, p.letter_accuracy});
    }
  }
  table.write(cfg.output_dir / "continual.csv");
  return curves;
}

GraphOutcome cmd_graph(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::vector<Checkpoint> checkpoints = gather_checkpoints(cfg, cfg.graph.checkpoints);
  write_canonical(cfg);
  std::vector<GraphCheckpoint> views;
  for (const auto& c : checkpoints) views.push_back({c.info.epoch, &c.dbn});

  GraphOutcome out;
  out.grid = property_grid(views, cfg.graph.cutoffs, cfg.seed);
  CsvTable grid(cfg.hash(), {"epoch", "cutoff", "source", "mean_degree", "mean_geodesic", "components"});
  for (const auto& r : out.grid) {
    grid.add_row({static_cast<long long>(r.epoch), r.cutoff, std::string(to_string(r.source)), r.mean_degree,
                  r.mean_geodesic, static_cast<long long>(r.components)});
  }
  grid.write(cfg.output_dir / "grid.csv");

  const Dbn& last = checkpoints.back().dbn;
  const PrunedGraph g = binarize(last, cfg.graph.degree_cutoff);
  const ArchitectureMask arch = ArchitectureMask::from_layer_sizes(last.layer_sizes());
  CsvTable degrees(cfg.hash(), {"k", "mass", "model"});
  for (DegreeModel model : {DegreeModel::kRaw, DegreeModel::kP, DegreeModel::kQ}) {
    DegreeDistribution d = degree_distribution(g, arch, model);
    for (std::size_t i = 0; i < d.support.size(); ++i) {
      degrees.add_row({static_cast<long long>(d.support[i]), d.masses[i], std::string(to_string(model))});
    }
    out.degrees.push_back(std::move(d));
  }
  degrees.write(cfg.output_dir / "degrees.csv");
  return out;
}

NumerosityOutcome cmd_numerosity(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.data.kind != DatasetKind::kNumerosity) {
    throw ConfigError("numerosity needs [data] kind = numerosity");
  }
  const Datasets data = load_datasets(cfg);
  write_canonical(cfg);
  const NumerosityOptions& opt = cfg.numerosity;

  std::vector<double> epochs;
  std::vector<std::vector<double>> w_by_run(static_cast<std::size_t>(opt.runs));
  std::vector<std::vector<PsychometricPoint>> final_points(static_cast<std::size_t>(opt.runs));
  NumerosityOutcome out;
  for (int run = 0; run < opt.runs; ++run) {
    const std::uint64_t seed = run_seed(cfg.seed, run);
    TrainConfig tc = cfg.train;
    tc.seed = seed;
    Dbn dbn = Dbn::create(cfg.layer_sizes, tc.init, seed);
    auto& ws = w_by_run[static_cast<std::size_t>(run)];
    TrainingHooks hooks;
    hooks.trace_patterns = 0;
    hooks.on_epoch_end = [&](const Dbn& model, EpochRecord& rec) {
      const int completed = rec.epoch + 1;
      const bool last = completed == tc.epochs;
      if (!(completed == 1 || last || completed % opt.sample_every == 0)) return;
      if (run == 0) epochs.push_back(completed);
      const Matrix features = project(model, data.train.images, model.depth());
      std::vector<DiscriminationResult> results;
      std::vector<PsychometricPoint> points;
      for (int ref : opt.references) {
        DiscriminationSpec spec = DiscriminationSpec::for_reference(ref);
        spec.classifiers_per_point = opt.classifiers_per_point;
        spec.train_fraction = opt.train_fraction;
        Rng rng = make_stream(seed, StreamPurpose::kSplit, static_cast<std::uint64_t>(ref),
                              static_cast<std::uint64_t>(completed));
        results.push_back(discrimination_points(features, data.train.labels, spec, opt.ridge_strength, rng));
        points.insert(points.end(), results.back().averaged.begin(), results.back().averaged.end());
      }
      std::stable_sort(points.begin(), points.end(), [](const auto& a, const auto& b) { return a.ratio < b.ratio; });
      // Undetermined fits leave NaN, which the trajectory statistics skip.
      const double w = mean_classifier_weber(results, opt.model).value_or(std::nan(""));
      ws.push_back(w);
      if (last) final_points[static_cast<std::size_t>(run)] = points;
    };
    TrainingState state;
    train(cfg.scheme, dbn, data.train.images, tc, hooks, state);
    Checkpoint c;
    c.info.scheme = cfg.scheme;
    c.info.layer_sizes = dbn.layer_sizes();
    c.info.config_hash = cfg.hash();
    c.info.epoch = state.next_epoch;
    c.info.label = fmt::format("run-{:02d}", run);
    c.dbn = std::move(dbn);
    c.optimizers = std::move(state.optimizers);
    save_checkpoint(cfg.output_dir / "runs" / fmt::format("run-{:02d}", run), c);
    out.final_w.push_back(ws.back());
  }

  const std::string hash = cfg.hash();
  out.final_points = final_points.front();
  for (std::size_t i = 0; i < out.final_points.size(); ++i) {
    double y = 0.0;
    Index n = 0;
    for (const auto& run : final_points) {
      y += run[i].y;
      n += run[i].count;
    }
    out.final_points[i].y = y / static_cast<double>(final_points.size());
    out.final_points[i].count = n;
  }
  CsvTable points(hash, {"r", "y", "n"});
  for (const auto& p : out.final_points) points.add_row({p.ratio, p.y, static_cast<long long>(p.count)});
  points.write(cfg.output_dir / "points.csv");

  out.trajectory = weber_trajectory(epochs, w_by_run);
  CsvTable trajectory(hash, {"epoch", "mean_w", "std_w"});
  for (const auto& t : out.trajectory) trajectory.add_row({static_cast<long long>(t.epoch), t.mean_w, t.std_w});
  trajectory.write(cfg.output_dir / "trajectory.csv");

  CsvTable fits(hash, {"a", "b", "s", "r2", "scaling_tag"});
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& t : out.trajectory) {
    if (std::isnan(t.mean_w)) continue;
    xs.push_back(t.epoch);
    ys.push_back(t.mean_w);
  }
  if (xs.size() >= 4) {
    out.fit_sz = fit_powerlaw(xs, ys);
    for (double& y : ys) y *= opt.tzm_scale;
    out.fit_tzm = fit_powerlaw(xs, ys);
    for (const auto& [fit, tag] : {std::pair{&*out.fit_sz, "SZ"}, std::pair{&*out.fit_tzm, "TZM"}}) {
      fits.add_row({fit->a, fit->b, fit->s, fit->r_squared, std::string(tag)});
    }
  }
  fits.write(cfg.output_dir / "fits.csv");
  return out;
}

void write_pgm(const fs::path& path, const RowVector& pixels, int side) {
  if (pixels.size() != static_cast<Index>(side) * side) {
    throw ShapeError(fmt::format("{} pixels do not form a {}x{} image", pixels.size(), side, side));
  }
  std::string bytes = fmt::format("P5\n{} {}\n255\n", side, side);
  for (Index i = 0; i < pixels.size(); ++i) {
    const double v = std::clamp(pixels[i], 0.0, 1.0);
    bytes.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0))));
  }
  write_file_atomic(path, bytes);
}

}  // namespace idbn
