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


// Command-line driver: one subcommand per experiment.
//
//   idbn train|eval|continual|graph|numerosity --config <path>
//        [--seed N] [--out DIR] [--resume CKPT]
//
// Exit codes: 0 success, 2 configuration error, 3 data error, 4 numeric failure.

#include <cstdio>
#include <exception>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "idbn/config.hpp"
#include "idbn/errors.hpp"
#include "idbn/experiments.hpp"

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> resume;
};

void add_common(CLI::App* cmd, Options& opt, bool resumable) {
  cmd->add_option("--config", opt.config, "Experiment config file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", opt.seed, "Override [experiment] seed");
  cmd->add_option("--out", opt.out, "Override [experiment] output_dir");
  if (resumable) cmd->add_option("--resume", opt.resume, "Continue from an epoch checkpoint directory");
}

int run(const std::string& command, const Options& opt) {
  idbn::ExperimentConfig cfg = idbn::load_config(opt.config);
  if (opt.seed) {
    cfg.seed = *opt.seed;
    cfg.train.seed = *opt.seed;
  }
  if (opt.out) cfg.output_dir = *opt.out;
  std::fprintf(stderr, "idbn %s: config hash %s, output %s\n", command.c_str(), cfg.hash().c_str(),
               cfg.output_dir.string().c_str());

  if (command == "train") {
    const auto outcome = idbn::cmd_train(cfg, opt.resume ? std::optional<std::filesystem::path>(*opt.resume)
                                                         : std::nullopt);
    std::fprintf(stderr, "final checkpoint: %s\n", outcome.final_checkpoint.string().c_str());
  } else if (command == "eval") {
    const auto outcome = idbn::cmd_eval(cfg);
    for (const auto& row : outcome.readout) {
      std::fprintf(stderr, "epoch %d layer %d readout accuracy %.4f\n", row.epoch, row.layer, row.accuracy);
    }
  } else if (command == "continual") {
    const auto curves = idbn::cmd_continual(cfg);
    std::fprintf(stderr, "stage-1 digit accuracy %.4f; final sequential %.4f, interleaved %.4f\n",
                 curves.stage1_digit_accuracy, curves.sequential.back().digit_accuracy,
                 curves.interleaved.back().digit_accuracy);
  } else if (command == "graph") {
    const auto outcome = idbn::cmd_graph(cfg);
    std::fprintf(stderr, "%zu grid rows\n", outcome.grid.size());
  } else {
    const auto outcome = idbn::cmd_numerosity(cfg);
    if (!outcome.trajectory.empty()) {
      std::fprintf(stderr, "final mean w %.4f (std %.4f over %zu runs)\n", outcome.trajectory.back().mean_w,
                   outcome.trajectory.back().std_w, outcome.trajectory.back().runs);
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Iterative deep belief network experiments"};
  app.require_subcommand(1);
  Options opt;
  const std::pair<const char*, const char*> commands[] = {
      {"train", "Train a DBN and write checkpoints plus trace.csv"},
      {"eval", "Readout, generation and receptive fields from checkpoints"},
      {"continual", "Sequential vs interleaved continual learning"},
      {"graph", "Graph structure of pruned weights across cutoffs"},
      {"numerosity", "Numerosity training and Weber-fraction trajectories"},
  };
  for (const auto& [name, help] : commands) add_common(app.add_subcommand(name, help), opt, name == std::string("train"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(idbn::ExitCode::kConfig);
  }

  try {
    return run(app.get_subcommands().front()->get_name(), opt);
  } catch (const idbn::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return static_cast<int>(e.exit_code());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return static_cast<int>(idbn::ExitCode::kData);
  }
}
