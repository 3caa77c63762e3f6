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


#include "idbn/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <map>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "idbn/csv.hpp"
#include "idbn/errors.hpp"

namespace idbn {
namespace {

constexpr const char* kManifest = "manifest.txt";
constexpr const char* kTrace = "trace.csv";
constexpr const char* kFormatTag = "idbn-checkpoint";

std::string encode(const double* data, Index count) {
  std::string bytes(static_cast<std::size_t>(count) * sizeof(double), '\0');
  for (Index i = 0; i < count; ++i) {
    auto bits = std::bit_cast<std::uint64_t>(data[i]);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    std::memcpy(bytes.data() + static_cast<std::size_t>(i) * sizeof(double), &bits, sizeof(bits));
  }
  return bytes;
}

void decode(const std::filesystem::path& path, double* data, Index count) {
  const std::string bytes = read_file(path);
  const auto expected = static_cast<std::size_t>(count) * sizeof(double);
  if (bytes.size() != expected) {
    throw DataError(DataError::Kind::kTruncated,
                    fmt::format("'{}' holds {} bytes, expected {}", path.string(), bytes.size(), expected));
  }
  for (Index i = 0; i < count; ++i) {
    std::uint64_t bits = 0;
    std::memcpy(&bits, bytes.data() + static_cast<std::size_t>(i) * sizeof(double), sizeof(bits));
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    data[i] = std::bit_cast<double>(bits);
  }
}

std::string tensor_file(std::size_t layer, std::string_view role) { return fmt::format("layer{}.{}.f64", layer, role); }

std::map<std::string, std::string> parse_manifest(const std::filesystem::path& path) {
  std::map<std::string, std::string> out;
  std::istringstream in(read_file(path));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) {
      throw DataError(DataError::Kind::kFormat, fmt::format("'{}': malformed line '{}'", path.string(), line));
    }
    out[line.substr(0, eq)] = line.substr(eq + 3);
  }
  return out;
}

const std::string& field(const std::map<std::string, std::string>& manifest, const std::string& key,
                         const std::filesystem::path& path) {
  const auto it = manifest.find(key);
  if (it == manifest.end()) {
    throw DataError(DataError::Kind::kFormat, fmt::format("'{}' lacks key '{}'", path.string(), key));
  }
  return it->second;
}

template <typename T>
T parse_number(const std::string& text, const std::filesystem::path& path) {
  std::istringstream in(text);
  in.imbue(std::locale::classic());
  T value{};
  in >> value;
  if (!in || !in.eof()) {
    throw DataError(DataError::Kind::kFormat, fmt::format("'{}': bad number '{}'", path.string(), text));
  }
  return value;
}

}  // namespace

std::string checkpoint_name(int epoch, int probe_index) {
  return probe_index < 0 ? fmt::format("epoch-{:04d}", epoch) : fmt::format("epoch-{:04d}-probe-{:02d}", epoch, probe_index);
}

void save_checkpoint(const std::filesystem::path& dir, const Checkpoint& checkpoint) {
  const Dbn& dbn = checkpoint.dbn;
  if (!checkpoint.optimizers.empty() && checkpoint.optimizers.size() != dbn.depth()) {
    throw ShapeError(fmt::format("{} optimizer states for {} layers", checkpoint.optimizers.size(), dbn.depth()));
  }
  std::filesystem::path staging = dir;
  staging += ".partial";
  std::error_code ec;
  std::filesystem::remove_all(staging, ec);

  for (std::size_t i = 0; i < dbn.depth(); ++i) {
    const RbmLayer& layer = dbn.layer(i);
    write_file_atomic(staging / tensor_file(i, "weights"), encode(layer.weights.data(), layer.weights.size()));
    write_file_atomic(staging / tensor_file(i, "visible_bias"),
                      encode(layer.visible_bias.data(), layer.visible_bias.size()));
    write_file_atomic(staging / tensor_file(i, "hidden_bias"),
                      encode(layer.hidden_bias.data(), layer.hidden_bias.size()));
    if (!checkpoint.optimizers.empty()) {
      const OptimizerState& opt = checkpoint.optimizers[i];
      write_file_atomic(staging / tensor_file(i, "velocity_weights"),
                        encode(opt.velocity_weights.data(), opt.velocity_weights.size()));
      write_file_atomic(staging / tensor_file(i, "velocity_visible_bias"),
                        encode(opt.velocity_visible_bias.data(), opt.velocity_visible_bias.size()));
      write_file_atomic(staging / tensor_file(i, "velocity_hidden_bias"),
                        encode(opt.velocity_hidden_bias.data(), opt.velocity_hidden_bias.size()));
    }
  }
  const CheckpointInfo& info = checkpoint.info;
  std::string manifest;
  manifest += fmt::format("format = {}\n", kFormatTag);
  manifest += fmt::format("version = {}\n", kCheckpointFormatVersion);
  manifest += fmt::format("scheme = {}\n", to_string(info.scheme));
  manifest += fmt::format("layer_sizes = {}\n", fmt::join(dbn.layer_sizes(), ","));
  manifest += fmt::format("config_hash = {}\n", info.config_hash);
  manifest += fmt::format("epoch = {}\n", info.epoch);
  manifest += fmt::format("probe_index = {}\n", info.probe_index);
  manifest += fmt::format("position = {}\n", format_real(info.position));
  manifest += fmt::format("optimizer = {}\n", checkpoint.optimizers.empty() ? "absent" : "present");
  manifest += fmt::format("label = {}\n", info.label);
  if (!checkpoint.trace_csv.empty()) write_file_atomic(staging / kTrace, checkpoint.trace_csv);
  write_file_atomic(staging / kManifest, manifest);

  std::filesystem::remove_all(dir, ec);
  std::filesystem::rename(staging, dir, ec);
  if (ec) {
    throw DataError(DataError::Kind::kIo,
                    fmt::format("cannot move '{}' to '{}': {}", staging.string(), dir.string(), ec.message()));
  }
}

Checkpoint load_checkpoint(const std::filesystem::path& dir) {
  const auto manifest_path = dir / kManifest;
  if (!std::filesystem::is_regular_file(manifest_path)) {
    throw DataError(DataError::Kind::kIo, fmt::format("'{}' is not a checkpoint (no {})", dir.string(), kManifest));
  }
  const auto manifest = parse_manifest(manifest_path);
  if (field(manifest, "format", manifest_path) != kFormatTag) {
    throw DataError(DataError::Kind::kFormat, fmt::format("'{}' is not an idbn checkpoint manifest", manifest_path.string()));
  }
  Checkpoint out;
  CheckpointInfo& info = out.info;
  info.format_version = parse_number<int>(field(manifest, "version", manifest_path), manifest_path);
  if (info.format_version != kCheckpointFormatVersion) {
    throw DataError(DataError::Kind::kFormat, fmt::format("'{}': unsupported format version {} (expected {})",
                                                          manifest_path.string(), info.format_version,
                                                          kCheckpointFormatVersion));
  }
  try {
    info.scheme = parse_scheme(field(manifest, "scheme", manifest_path));
  } catch (const ConfigError& e) {
    throw DataError(DataError::Kind::kFormat, fmt::format("'{}': {}", manifest_path.string(), e.what()));
  }
  std::istringstream sizes(field(manifest, "layer_sizes", manifest_path));
  std::string item;
  while (std::getline(sizes, item, ',')) info.layer_sizes.push_back(parse_number<Index>(item, manifest_path));
  if (info.layer_sizes.size() < 2) {
    throw DataError(DataError::Kind::kFormat, fmt::format("'{}': needs at least two layer sizes", manifest_path.string()));
  }
  info.config_hash = field(manifest, "config_hash", manifest_path);
  info.epoch = parse_number<int>(field(manifest, "epoch", manifest_path), manifest_path);
  info.probe_index = parse_number<int>(field(manifest, "probe_index", manifest_path), manifest_path);
  const std::string& position = field(manifest, "position", manifest_path);
  info.position = std::strtod(position.c_str(), nullptr);
  info.label = field(manifest, "label", manifest_path);
  const bool has_optimizer = field(manifest, "optimizer", manifest_path) == "present";

  std::vector<RbmLayer> layers;
  for (std::size_t i = 0; i + 1 < info.layer_sizes.size(); ++i) {
    const Index nv = info.layer_sizes[i];
    const Index nh = info.layer_sizes[i + 1];
    RbmLayer layer{Matrix(nh, nv), Vector(nv), Vector(nh)};
    decode(dir / tensor_file(i, "weights"), layer.weights.data(), layer.weights.size());
    decode(dir / tensor_file(i, "visible_bias"), layer.visible_bias.data(), nv);
    decode(dir / tensor_file(i, "hidden_bias"), layer.hidden_bias.data(), nh);
    if (has_optimizer) {
      OptimizerState opt{Matrix(nh, nv), Vector(nv), Vector(nh)};
      decode(dir / tensor_file(i, "velocity_weights"), opt.velocity_weights.data(), opt.velocity_weights.size());
      decode(dir / tensor_file(i, "velocity_visible_bias"), opt.velocity_visible_bias.data(), nv);
      decode(dir / tensor_file(i, "velocity_hidden_bias"), opt.velocity_hidden_bias.data(), nh);
      out.optimizers.push_back(std::move(opt));
    }
    layers.push_back(std::move(layer));
  }
  out.dbn = Dbn(std::move(layers));
  if (std::filesystem::is_regular_file(dir / kTrace)) out.trace_csv = read_file(dir / kTrace);
  return out;
}

std::vector<std::filesystem::path> list_checkpoints(const std::filesystem::path& root) {
  if (!std::filesystem::is_directory(root)) {
    throw DataError(DataError::Kind::kIo, fmt::format("checkpoint directory '{}' does not exist", root.string()));
  }
  std::vector<std::filesystem::path> out;
  for (const auto& entry : std::filesystem::directory_iterator(root)) {
    if (entry.is_directory() && std::filesystem::is_regular_file(entry.path() / kManifest)) out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

void require_checkpoints(const std::vector<std::filesystem::path>& paths) {
  std::vector<std::string> missing;
  for (const auto& p : paths) {
    if (!std::filesystem::is_regular_file(p / kManifest)) missing.push_back(p.string());
  }
  if (!missing.empty()) {
    throw DataError(DataError::Kind::kIo, fmt::format("missing checkpoints: {}", fmt::join(missing, ", ")));
  }
}

}  // namespace idbn
