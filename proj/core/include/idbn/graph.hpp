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

#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "idbn/dbn.hpp"

namespace idbn {

/// Undirected layered graph: nodes are numbered layer by layer (visible layer
/// first) and edges only join adjacent layers.
class PrunedGraph {
 public:
  using Edge = std::pair<std::int32_t, std::int32_t>;  // (lower-layer node, upper-layer node)

  PrunedGraph() = default;
  /// Throws ConfigError for edges that leave the layered architecture.
  PrunedGraph(std::vector<Index> layer_sizes, std::vector<Edge> edges, double cutoff);

  const std::vector<Index>& layer_sizes() const { return sizes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  double cutoff() const { return cutoff_; }
  Index node_count() const { return offsets_.empty() ? 0 : offsets_.back(); }
  /// Global index of the first node of `layer`.
  Index layer_offset(std::size_t layer) const { return offsets_.at(layer); }
  std::size_t layer_of(Index node) const;

  /// Compressed adjacency: neighbors of node v are
  /// neighbors()[row_start()[v] .. row_start()[v + 1]).
  const std::vector<std::int64_t>& row_start() const { return row_start_; }
  const std::vector<std::int32_t>& neighbors() const { return neighbors_; }
  Index degree(Index node) const {
    return static_cast<Index>(row_start_[static_cast<std::size_t>(node) + 1] -
                              row_start_[static_cast<std::size_t>(node)]);
  }

 private:
  std::vector<Index> sizes_;
  std::vector<Index> offsets_;
  std::vector<Edge> edges_;
  std::vector<std::int64_t> row_start_;
  std::vector<std::int32_t> neighbors_;
  double cutoff_ = 0.0;
};

/// Keeps the connection between visible unit j of layer i and hidden unit r
/// iff |W_i(r, j)| > cutoff. Biases are ignored.
PrunedGraph binarize(const Dbn& dbn, double cutoff);
PrunedGraph binarize(std::span<const Matrix> weights, double cutoff);

double mean_degree(const PrunedGraph& g);
/// Isolated nodes count as one component each.
Index connected_components(const PrunedGraph& g);
/// Mean shortest-path length over distinct, mutually reachable node pairs; 0
/// when there are none.
double mean_geodesic(const PrunedGraph& g);
/// Number of possible edges: sum over adjacent layers of size_i * size_{i+1}.
std::int64_t potential_edges(const std::vector<Index>& layer_sizes);
/// Kept edges over potential edges.
double edge_probability(const PrunedGraph& g);

/// Every architecture-allowed edge present independently with probability p.
PrunedGraph binomial_replica(const std::vector<Index>& layer_sizes, double p, std::uint64_t seed);

/// Maximum possible degree of every node: the summed sizes of its neighbouring layers.
struct ArchitectureMask {
  std::vector<double> max_degree;

  static ArchitectureMask from_layer_sizes(const std::vector<Index>& layer_sizes);
};

enum class DegreeModel { kRaw, kP, kQ };
std::string_view to_string(DegreeModel model);

struct DegreeDistribution {
  DegreeModel model = DegreeModel::kRaw;
  std::vector<Index> support;   // degrees k with at least one node, ascending
  std::vector<double> masses;   // normalized to sum to 1
  std::vector<Index> node_counts;  // N_k
};

/// raw: N_k / N.
/// P:   (N_k / N) * sum_{i: k_i = k} 1 / maxdeg_i, normalized.
/// Q:   sum_{i: k_i = k} 1 / maxdeg_i, normalized.
DegreeDistribution degree_distribution(const PrunedGraph& g, const ArchitectureMask& arch,
                                       DegreeModel model);

enum class GraphSource { kReal, kReplica };
std::string_view to_string(GraphSource source);

struct GridRow {
  int epoch = 0;
  double cutoff = 0.0;
  GraphSource source = GraphSource::kReal;
  double mean_degree = 0.0;
  double mean_geodesic = 0.0;
  Index components = 0;
  double edge_probability = 0.0;
};

struct GraphCheckpoint {
  int epoch = 0;
  const Dbn* dbn = nullptr;
};

inline const std::vector<double> kPaperCutoffs = {0.2, 0.4, 0.6, 0.8, 1.0, 1.25, 1.5};

/// Metrics of the real graph and of a matched binomial replica for every
/// (checkpoint, cutoff) cell. Replica seeds derive from (base_seed, epoch, cutoff).
std::vector<GridRow> property_grid(const std::vector<GraphCheckpoint>& checkpoints,
                                   const std::vector<double>& cutoffs, std::uint64_t base_seed);

}  // namespace idbn
