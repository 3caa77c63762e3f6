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
#include <string>
#include <vector>

#include "idbn/dbn.hpp"

namespace idbn {

inline constexpr int kCheckpointFormatVersion = 1;

struct CheckpointInfo {
  int format_version = kCheckpointFormatVersion;
  Scheme scheme = Scheme::kIterative;
  std::vector<Index> layer_sizes;
  std::string config_hash;
  int epoch = 0;         // completed global epochs
  int probe_index = -1;  // -1 at an epoch boundary, else intra-epoch probe of epoch `epoch`
  double position = 0.0; // fraction of epoch `epoch` completed; 0 at a boundary
  std::string label;     // free-form run label (e.g. run index)

  /// Only epoch-boundary checkpoints carry everything needed to resume.
  bool at_epoch_boundary() const { return probe_index < 0; }
};

/// A DBN snapshot plus the optimizer state needed to continue training.
struct Checkpoint {
  CheckpointInfo info;
  Dbn dbn;
  std::vector<OptimizerState> optimizers;  // empty for analysis-only snapshots
  /// Trace rows emitted up to this point, stored as `trace.csv` so a resumed
  /// run can reproduce the complete trace. Empty when absent.
  std::string trace_csv;
};

/// Writes `<dir>/manifest.txt` and one raw little-endian float64 file per
/// tensor (`layer<i>.<role>.f64`, row-major). The directory is assembled
/// under a temporary name and renamed into place.
void save_checkpoint(const std::filesystem::path& dir, const Checkpoint& checkpoint);

/// Inverse of save_checkpoint; bit-exact. Throws DataError on missing,
/// truncated or inconsistent files.
Checkpoint load_checkpoint(const std::filesystem::path& dir);

/// `epoch-0005` at a boundary, `epoch-0005-probe-03` within an epoch.
std::string checkpoint_name(int epoch, int probe_index = -1);

/// Checkpoint directories (those holding a manifest) directly under `root`,
/// sorted by name. Throws DataError when `root` does not exist.
std::vector<std::filesystem::path> list_checkpoints(const std::filesystem::path& root);

/// Throws DataError listing every path in `paths` that is not a checkpoint.
void require_checkpoints(const std::vector<std::filesystem::path>& paths);

}  // namespace idbn
