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


#include "idbn/config.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>
#include <fmt/ranges.h>

#include "idbn/errors.hpp"

namespace idbn {
namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream stream(value);
  std::string item;
  while (std::getline(stream, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

/// Key/value pairs of one section; every lookup marks the key as consumed so
/// leftovers can be reported as unknown.
class Section {
 public:
  Section(std::string name, std::map<std::string, std::string> values)
      : name_(std::move(name)), values_(std::move(values)) {}

  template <typename T>
  void read(const std::string& key, T& target) {
    const auto it = values_.find(key);
    if (it == values_.end()) return;
    const std::string value = it->second;
    values_.erase(it);
    try {
      target = convert<T>(value);
    } catch (const ConfigError& e) {
      throw ConfigError(fmt::format("[{}] {}: {}", name_, key, e.what()));
    }
  }

  void read_path(const std::string& key, std::filesystem::path& target, const std::filesystem::path& base) {
    std::string raw;
    read(key, raw);
    if (!raw.empty()) target = resolve(raw, base);
  }

  void read_paths(const std::string& key, std::vector<std::filesystem::path>& target,
                  const std::filesystem::path& base) {
    std::string raw;
    read(key, raw);
    if (raw.empty()) return;
    target.clear();
    for (const auto& item : split_list(raw)) target.push_back(resolve(item, base));
  }

  void reject_leftovers() const {
    if (!values_.empty()) {
      throw ConfigError(fmt::format("unknown key '{}' in section [{}]", values_.begin()->first, name_));
    }
  }

 private:
  static std::filesystem::path resolve(const std::string& raw, const std::filesystem::path& base) {
    std::filesystem::path p(raw);
    return p.is_absolute() || base.empty() ? p : base / p;
  }

  template <typename T>
  static T convert(const std::string& value) {
    if constexpr (std::is_same_v<T, std::string>) {
      return value;
    } else if constexpr (std::is_same_v<T, bool>) {
      if (value == "true" || value == "yes" || value == "1") return true;
      if (value == "false" || value == "no" || value == "0") return false;
      throw ConfigError(fmt::format("expected a boolean, got '{}'", value));
    } else if constexpr (std::is_arithmetic_v<T>) {
      T out{};
      const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
      if (ec != std::errc() || ptr != value.data() + value.size()) {
        throw ConfigError(fmt::format("expected a number, got '{}'", value));
      }
      return out;
    } else if constexpr (std::is_same_v<T, std::optional<double>>) {
      if (value == "none" || value.empty()) return std::nullopt;
      return convert<double>(value);
    } else {
      // Comma-separated list of arithmetic values.
      T out;
      for (const auto& item : split_list(value)) out.push_back(convert<typename T::value_type>(item));
      return out;
    }
  }

  std::string name_;
  std::map<std::string, std::string> values_;
};

std::string_view to_string(DatasetKind kind) { return kind == DatasetKind::kIdx ? "idx" : "numerosity"; }

std::string join_paths(const std::vector<std::filesystem::path>& paths) {
  std::vector<std::string> items;
  for (const auto& p : paths) items.push_back(p.generic_string());
  return fmt::format("{}", fmt::join(items, ","));
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void ExperimentConfig::validate() const {
  if (name.empty()) throw ConfigError("[experiment] name must not be empty");
  if (data.kind == DatasetKind::kIdx && (data.train_images.empty() || data.train_labels.empty())) {
    throw ConfigError("[data] train_images and train_labels are required for kind = idx");
  }
  if (data.train_limit < 0 || data.test_limit < 0) throw ConfigError("[data] limits must be >= 0");
  if (layer_sizes.size() < 2) throw ConfigError("[model] layer_sizes needs at least two entries");
  for (Index s : layer_sizes) {
    if (s <= 0) throw ConfigError(fmt::format("[model] layer sizes must be positive, got {}", s));
  }
  if (data.kind == DatasetKind::kNumerosity) {
    const Index side = numerosity.dataset.image_side;
    if (layer_sizes.front() != side * side) {
      throw ConfigError(fmt::format("[model] first layer size {} does not match {}x{} numerosity images",
                                    layer_sizes.front(), side, side));
    }
  }
  train.validate();
  if (checkpoint.every_epochs < 0) throw ConfigError("[checkpoint] every_epochs must be >= 0");
  if (checkpoint.probes_per_epoch < 0) throw ConfigError("[checkpoint] probes_per_epoch must be >= 0");
  if (!(eval.ridge_strength > 0.0)) throw ConfigError("[eval] ridge_strength must be > 0");
  if (eval.generation_spec.occlusion_first_row < 0 || eval.generation_spec.occlusion_rows < 0) {
    throw ConfigError("[eval] occlusion rows must be >= 0");
  }
  if (!(eval.generation_spec.noise_sigma >= 0.0)) throw ConfigError("[eval] noise_sigma must be >= 0");
  if (eval.receptive_fields < 0) throw ConfigError("[eval] receptive_fields must be >= 0");
  if (continual.run.epochs < 1) throw ConfigError("[continual] epochs must be >= 1");
  if (continual.run.probes_per_epoch < 1) throw ConfigError("[continual] probes_per_epoch must be >= 1");
  if (!(continual.run.ridge_strength > 0.0)) throw ConfigError("[continual] ridge_strength must be > 0");
  if (!(continual.run.letter_train_fraction > 0.0 && continual.run.letter_train_fraction < 1.0)) {
    throw ConfigError("[continual] letter_train_fraction must be in (0, 1)");
  }
  if (continual.sets.digits_count < 1 || continual.sets.letters_per_class < 1 ||
      continual.sets.letter_classes < 1) {
    throw ConfigError("[continual] set sizes must be positive");
  }
  if (graph.cutoffs.empty()) throw ConfigError("[graph] cutoffs must not be empty");
  for (std::size_t i = 0; i < graph.cutoffs.size(); ++i) {
    if (!(graph.cutoffs[i] >= 0.0) || (i > 0 && !(graph.cutoffs[i] > graph.cutoffs[i - 1]))) {
      throw ConfigError("[graph] cutoffs must be non-negative and strictly increasing");
    }
  }
  if (!(graph.degree_cutoff >= 0.0)) throw ConfigError("[graph] degree_cutoff must be >= 0");
  numerosity.dataset.validate();
  if (numerosity.runs < 1) throw ConfigError("[numerosity] runs must be >= 1");
  if (numerosity.references.empty()) throw ConfigError("[numerosity] references must not be empty");
  for (int ref : numerosity.references) {
    const auto spec = DiscriminationSpec::for_reference(ref);
    for (int n : spec.window) {
      if (n < numerosity.dataset.min_numerosity || n > numerosity.dataset.max_numerosity) {
        throw ConfigError(fmt::format("[numerosity] reference {} needs numerosity {}, outside {}..{}", ref, n,
                                      numerosity.dataset.min_numerosity, numerosity.dataset.max_numerosity));
      }
    }
  }
  if (numerosity.classifiers_per_point < 1) throw ConfigError("[numerosity] classifiers_per_point must be >= 1");
  if (!(numerosity.train_fraction > 0.0 && numerosity.train_fraction < 1.0)) {
    throw ConfigError("[numerosity] train_fraction must be in (0, 1)");
  }
  if (!(numerosity.ridge_strength > 0.0)) throw ConfigError("[numerosity] ridge_strength must be > 0");
  if (numerosity.sample_every < 1) throw ConfigError("[numerosity] sample_every must be >= 1");
  if (!(numerosity.tzm_scale > 0.0)) throw ConfigError("[numerosity] tzm_scale must be > 0");
}

std::string ExperimentConfig::canonical() const {
  std::string out;
  auto line = [&out](std::string_view key, const auto& value) { out += fmt::format("{} = {}\n", key, value); };
  line("experiment.name", name);
  line("experiment.seed", seed);
  line("data.kind", to_string(data.kind));
  line("data.train_images", data.train_images.generic_string());
  line("data.train_labels", data.train_labels.generic_string());
  line("data.test_images", data.test_images.generic_string());
  line("data.test_labels", data.test_labels.generic_string());
  line("data.train_limit", data.train_limit);
  line("data.test_limit", data.test_limit);
  line("model.layer_sizes", fmt::format("{}", fmt::join(layer_sizes, ",")));
  line("model.scheme", to_string(scheme));
  if (const auto* n = std::get_if<NormalStd>(&train.init)) {
    line("model.init", "normal");
    line("model.init_std", n->std);
  } else {
    line("model.init", "glorot");
    line("model.init_factor", std::get<GlorotScaled>(train.init).factor);
  }
  line("train.learning_rate", train.learning_rate);
  line("train.weight_decay", train.weight_decay);
  line("train.momentum_initial", train.momentum_initial);
  line("train.momentum_final", train.momentum_final);
  line("train.momentum_switch_epoch", train.momentum_switch_epoch);
  line("train.epochs", train.epochs);
  line("train.batch_size", train.batch_size);
  line("train.cd_k", train.cd_k);
  line("train.dropout_presence",
       train.dropout_presence ? fmt::format("{}", *train.dropout_presence) : std::string("none"));
  line("checkpoint.every_epochs", checkpoint.every_epochs);
  line("checkpoint.probes_per_epoch", checkpoint.probes_per_epoch);
  line("eval.ridge_strength", eval.ridge_strength);
  line("eval.readout", eval.readout);
  line("eval.generation", eval.generation);
  line("eval.occlusion_first_row", eval.generation_spec.occlusion_first_row);
  line("eval.occlusion_rows", eval.generation_spec.occlusion_rows);
  line("eval.noise_sigma", eval.generation_spec.noise_sigma);
  line("eval.receptive_fields", eval.receptive_fields);
  line("eval.checkpoints", join_paths(eval.checkpoints));
  line("continual.letters_images", continual.letters_images.generic_string());
  line("continual.letters_labels", continual.letters_labels.generic_string());
  line("continual.letters_transposed", continual.letters_transposed);
  line("continual.letter_first_label", continual.letter_first_label);
  line("continual.digits_count", continual.sets.digits_count);
  line("continual.letters_per_class", continual.sets.letters_per_class);
  line("continual.letter_classes", continual.sets.letter_classes);
  line("continual.epochs", continual.run.epochs);
  line("continual.probes_per_epoch", continual.run.probes_per_epoch);
  line("continual.ridge_strength", continual.run.ridge_strength);
  line("continual.letter_train_fraction", continual.run.letter_train_fraction);
  line("continual.stage1", continual.stage1.generic_string());
  line("graph.cutoffs", fmt::format("{}", fmt::join(graph.cutoffs, ",")));
  line("graph.degree_cutoff", graph.degree_cutoff);
  line("graph.checkpoints", join_paths(graph.checkpoints));
  const auto& d = numerosity.dataset;
  line("numerosity.image_side", d.image_side);
  line("numerosity.min_numerosity", d.min_numerosity);
  line("numerosity.max_numerosity", d.max_numerosity);
  line("numerosity.images_per_level", d.images_per_level);
  line("numerosity.side_min", d.side_min);
  line("numerosity.side_max", d.side_max);
  line("numerosity.max_attempts_per_object", d.max_attempts_per_object);
  line("numerosity.max_restarts", d.max_restarts);
  line("numerosity.runs", numerosity.runs);
  line("numerosity.references", fmt::format("{}", fmt::join(numerosity.references, ",")));
  line("numerosity.classifiers_per_point", numerosity.classifiers_per_point);
  line("numerosity.train_fraction", numerosity.train_fraction);
  line("numerosity.ridge_strength", numerosity.ridge_strength);
  line("numerosity.model", to_string(numerosity.model));
  line("numerosity.sample_every", numerosity.sample_every);
  line("numerosity.tzm_scale", numerosity.tzm_scale);
  return out;
}

std::string ExperimentConfig::hash() const { return fmt::format("{:016x}", fnv1a64(canonical())); }

ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  boost::property_tree::ptree tree;
  try {
    std::istringstream stream(text);
    boost::property_tree::ini_parser::read_ini(stream, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(fmt::format("config line {}: {}", e.line(), e.message()));
  }

  std::map<std::string, Section> sections;
  for (const auto& [name, node] : tree) {
    if (node.empty()) throw ConfigError(fmt::format("key '{}' appears outside any [section]", name));
    std::map<std::string, std::string> values;
    for (const auto& [key, child] : node) values[key] = trim(child.data());
    sections.emplace(name, Section(name, std::move(values)));
  }
  static const std::vector<std::string> kKnown = {"experiment", "data",     "model", "train",     "checkpoint",
                                                  "eval",       "continual", "graph", "numerosity"};
  for (const auto& [name, section] : sections) {
    if (std::find(kKnown.begin(), kKnown.end(), name) == kKnown.end()) {
      throw ConfigError(fmt::format("unknown section [{}]", name));
    }
  }
  auto section = [&sections](const std::string& name) -> Section& {
    return sections.try_emplace(name, name, std::map<std::string, std::string>{}).first->second;
  };

  ExperimentConfig cfg;
  Section& experiment = section("experiment");
  experiment.read("name", cfg.name);
  std::string output_dir;
  experiment.read("output_dir", output_dir);
  if (!output_dir.empty()) cfg.output_dir = output_dir;
  experiment.read("seed", cfg.seed);

  Section& data = section("data");
  std::string kind = "idx";
  data.read("kind", kind);
  if (kind == "idx") {
    cfg.data.kind = DatasetKind::kIdx;
  } else if (kind == "numerosity") {
    cfg.data.kind = DatasetKind::kNumerosity;
  } else {
    throw ConfigError(fmt::format("[data] kind must be idx or numerosity, got '{}'", kind));
  }
  data.read_path("train_images", cfg.data.train_images, base_dir);
  data.read_path("train_labels", cfg.data.train_labels, base_dir);
  data.read_path("test_images", cfg.data.test_images, base_dir);
  data.read_path("test_labels", cfg.data.test_labels, base_dir);
  data.read("train_limit", cfg.data.train_limit);
  data.read("test_limit", cfg.data.test_limit);

  Section& model = section("model");
  model.read("layer_sizes", cfg.layer_sizes);
  std::string scheme = std::string(to_string(cfg.scheme));
  model.read("scheme", scheme);
  cfg.scheme = parse_scheme(scheme);
  std::string init = "normal";
  double init_std = 0.01;
  double init_factor = 1.0;
  model.read("init", init);
  model.read("init_std", init_std);
  model.read("init_factor", init_factor);
  if (init == "normal") {
    cfg.train.init = NormalStd{init_std};
  } else if (init == "glorot") {
    cfg.train.init = GlorotScaled{init_factor};
  } else {
    throw ConfigError(fmt::format("[model] init must be normal or glorot, got '{}'", init));
  }

  Section& train = section("train");
  train.read("learning_rate", cfg.train.learning_rate);
  train.read("weight_decay", cfg.train.weight_decay);
  train.read("momentum_initial", cfg.train.momentum_initial);
  train.read("momentum_final", cfg.train.momentum_final);
  train.read("momentum_switch_epoch", cfg.train.momentum_switch_epoch);
  train.read("epochs", cfg.train.epochs);
  train.read("batch_size", cfg.train.batch_size);
  train.read("cd_k", cfg.train.cd_k);
  train.read("dropout_presence", cfg.train.dropout_presence);

  Section& checkpoint = section("checkpoint");
  checkpoint.read("every_epochs", cfg.checkpoint.every_epochs);
  checkpoint.read("probes_per_epoch", cfg.checkpoint.probes_per_epoch);

  Section& eval = section("eval");
  eval.read("ridge_strength", cfg.eval.ridge_strength);
  eval.read("readout", cfg.eval.readout);
  eval.read("generation", cfg.eval.generation);
  eval.read("occlusion_first_row", cfg.eval.generation_spec.occlusion_first_row);
  eval.read("occlusion_rows", cfg.eval.generation_spec.occlusion_rows);
  eval.read("noise_sigma", cfg.eval.generation_spec.noise_sigma);
  eval.read("receptive_fields", cfg.eval.receptive_fields);
  eval.read_paths("checkpoints", cfg.eval.checkpoints, base_dir);

  Section& continual = section("continual");
  continual.read_path("letters_images", cfg.continual.letters_images, base_dir);
  continual.read_path("letters_labels", cfg.continual.letters_labels, base_dir);
  continual.read("letters_transposed", cfg.continual.letters_transposed);
  continual.read("letter_first_label", cfg.continual.letter_first_label);
  continual.read("digits_count", cfg.continual.sets.digits_count);
  continual.read("letters_per_class", cfg.continual.sets.letters_per_class);
  continual.read("letter_classes", cfg.continual.sets.letter_classes);
  continual.read("epochs", cfg.continual.run.epochs);
  continual.read("probes_per_epoch", cfg.continual.run.probes_per_epoch);
  continual.read("ridge_strength", cfg.continual.run.ridge_strength);
  continual.read("letter_train_fraction", cfg.continual.run.letter_train_fraction);
  continual.read_path("stage1", cfg.continual.stage1, base_dir);
  cfg.continual.sets.letter_label_offset = 10;

  Section& graph = section("graph");
  graph.read("cutoffs", cfg.graph.cutoffs);
  graph.read("degree_cutoff", cfg.graph.degree_cutoff);
  graph.read_paths("checkpoints", cfg.graph.checkpoints, base_dir);

  Section& num = section("numerosity");
  auto& d = cfg.numerosity.dataset;
  num.read("image_side", d.image_side);
  num.read("min_numerosity", d.min_numerosity);
  num.read("max_numerosity", d.max_numerosity);
  num.read("images_per_level", d.images_per_level);
  num.read("side_min", d.side_min);
  num.read("side_max", d.side_max);
  num.read("max_attempts_per_object", d.max_attempts_per_object);
  num.read("max_restarts", d.max_restarts);
  num.read("runs", cfg.numerosity.runs);
  num.read("references", cfg.numerosity.references);
  num.read("classifiers_per_point", cfg.numerosity.classifiers_per_point);
  num.read("train_fraction", cfg.numerosity.train_fraction);
  num.read("ridge_strength", cfg.numerosity.ridge_strength);
  std::string psych = std::string(to_string(cfg.numerosity.model));
  num.read("model", psych);
  cfg.numerosity.model = parse_psychometric_model(psych);
  num.read("sample_every", cfg.numerosity.sample_every);
  num.read("tzm_scale", cfg.numerosity.tzm_scale);

  for (const auto& [name, s] : sections) s.reject_leftovers();
  cfg.train.seed = cfg.seed;
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(fmt::format("cannot open config file '{}'", path.string()));
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path.parent_path());
}

}  // namespace idbn
