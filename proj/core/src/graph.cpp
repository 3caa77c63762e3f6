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

#include "idbn/graph.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <numeric>

#include <fmt/format.h>

#include "idbn/errors.hpp"

namespace idbn {

PrunedGraph::PrunedGraph(std::vector<Index> layer_sizes, std::vector<Edge> edges, double cutoff)
    : sizes_(std::move(layer_sizes)), edges_(std::move(edges)), cutoff_(cutoff) {
  offsets_.push_back(0);
  for (Index s : sizes_) {
    if (s < 1) throw ConfigError("graph layers must have at least one node");
    offsets_.push_back(offsets_.back() + s);
  }
  const Index n = node_count();
  std::vector<std::int64_t> deg(static_cast<std::size_t>(n), 0);
  for (auto& [a, b] : edges_) {
    if (a > b) std::swap(a, b);
    if (a < 0 || b >= n) throw ConfigError(fmt::format("edge ({}, {}) outside the graph", a, b));
    if (layer_of(b) != layer_of(a) + 1) {
      throw ConfigError(fmt::format("edge ({}, {}) does not join adjacent layers", a, b));
    }
    ++deg[static_cast<std::size_t>(a)];
    ++deg[static_cast<std::size_t>(b)];
  }
  std::sort(edges_.begin(), edges_.end());
  if (std::adjacent_find(edges_.begin(), edges_.end()) != edges_.end()) {
    throw ConfigError("duplicate edge in graph");
  }
  row_start_.assign(static_cast<std::size_t>(n) + 1, 0);
  for (Index v = 0; v < n; ++v) {
    row_start_[static_cast<std::size_t>(v) + 1] = row_start_[static_cast<std::size_t>(v)] + deg[static_cast<std::size_t>(v)];
  }
  neighbors_.resize(static_cast<std::size_t>(row_start_.back()));
  std::vector<std::int64_t> fill(row_start_.begin(), row_start_.end() - 1);
  for (const auto& [a, b] : edges_) {
    neighbors_[static_cast<std::size_t>(fill[static_cast<std::size_t>(a)]++)] = b;
    neighbors_[static_cast<std::size_t>(fill[static_cast<std::size_t>(b)]++)] = a;
  }
}

std::size_t PrunedGraph::layer_of(Index node) const {
  const auto it = std::upper_bound(offsets_.begin(), offsets_.end(), node);
  return static_cast<std::size_t>(it - offsets_.begin()) - 1;
}

PrunedGraph binarize(std::span<const Matrix> weights, double cutoff) {
  if (!(cutoff >= 0.0)) throw ConfigError(fmt::format("cutoff must be >= 0, got {}", cutoff));
  if (weights.empty()) throw ConfigError("binarize: no weight matrices");
  std::vector<Index> sizes{weights.front().cols()};
  for (const Matrix& w : weights) {
    if (w.cols() != sizes.back()) throw ShapeError("binarize: weight matrices do not chain");
    sizes.push_back(w.rows());
  }
  std::vector<PrunedGraph::Edge> edges;
  Index lower = 0;
  for (const Matrix& w : weights) {
    const Index upper = lower + w.cols();
    for (Index r = 0; r < w.rows(); ++r) {
      for (Index j = 0; j < w.cols(); ++j) {
        if (std::abs(w(r, j)) > cutoff) {
          edges.emplace_back(static_cast<std::int32_t>(lower + j), static_cast<std::int32_t>(upper + r));
        }
      }
    }
    lower = upper;
  }
  return PrunedGraph(std::move(sizes), std::move(edges), cutoff);
}

PrunedGraph binarize(const Dbn& dbn, double cutoff) {
  std::vector<Matrix> weights;
  for (const RbmLayer& l : dbn.layers()) weights.push_back(l.weights);
  return binarize(std::span<const Matrix>(weights), cutoff);
}

double mean_degree(const PrunedGraph& g) {
  if (g.node_count() == 0) return 0.0;
  return 2.0 * static_cast<double>(g.edges().size()) / static_cast<double>(g.node_count());
}

Index connected_components(const PrunedGraph& g) {
  const Index n = g.node_count();
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  std::vector<std::int32_t> stack;
  Index count = 0;
  for (Index s = 0; s < n; ++s) {
    if (seen[static_cast<std::size_t>(s)]) continue;
    ++count;
    seen[static_cast<std::size_t>(s)] = 1;
    stack.push_back(static_cast<std::int32_t>(s));
    while (!stack.empty()) {
      const std::int32_t v = stack.back();
      stack.pop_back();
      for (auto e = g.row_start()[static_cast<std::size_t>(v)]; e < g.row_start()[static_cast<std::size_t>(v) + 1]; ++e) {
        const std::int32_t u = g.neighbors()[static_cast<std::size_t>(e)];
        if (!seen[static_cast<std::size_t>(u)]) {
          seen[static_cast<std::size_t>(u)] = 1;
          stack.push_back(u);
        }
      }
    }
  }
  return count;
}

double mean_geodesic(const PrunedGraph& g) {
  const Index n = g.node_count();
  std::vector<std::int32_t> dist(static_cast<std::size_t>(n), -1);
  std::vector<std::int32_t> queue(static_cast<std::size_t>(n));
  long double total = 0.0L;
  std::int64_t pairs = 0;
  for (Index s = 0; s < n; ++s) {
    if (g.degree(s) == 0) continue;
    std::fill(dist.begin(), dist.end(), -1);
    std::size_t head = 0;
    std::size_t tail = 0;
    queue[tail++] = static_cast<std::int32_t>(s);
    dist[static_cast<std::size_t>(s)] = 0;
    while (head < tail) {
      const std::int32_t v = queue[head++];
      for (auto e = g.row_start()[static_cast<std::size_t>(v)]; e < g.row_start()[static_cast<std::size_t>(v) + 1]; ++e) {
        const std::int32_t u = g.neighbors()[static_cast<std::size_t>(e)];
        if (dist[static_cast<std::size_t>(u)] < 0) {
          dist[static_cast<std::size_t>(u)] = dist[static_cast<std::size_t>(v)] + 1;
          queue[tail++] = u;
          // Each unordered pair is counted once, from its smaller endpoint.
          if (u > s) {
            total += dist[static_cast<std::size_t>(u)];
            ++pairs;
          }
        }
      }
    }
  }
  return pairs == 0 ? 0.0 : static_cast<double>(total / static_cast<long double>(pairs));
}

std::int64_t potential_edges(const std::vector<Index>& layer_sizes) {
  std::int64_t m = 0;
  for (std::size_t i = 0; i + 1 < layer_sizes.size(); ++i) m += layer_sizes[i] * layer_sizes[i + 1];
  return m;
}

double edge_probability(const PrunedGraph& g) {
  const std::int64_t m = potential_edges(g.layer_sizes());
  return m == 0 ? 0.0 : static_cast<double>(g.edges().size()) / static_cast<double>(m);
}

PrunedGraph binomial_replica(const std::vector<Index>& layer_sizes, double p, std::uint64_t seed) {
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(fmt::format("edge probability {} outside [0, 1]", p));
  Rng rng(seed);
  std::vector<PrunedGraph::Edge> edges;
  Index lower = 0;
  for (std::size_t i = 0; i + 1 < layer_sizes.size(); ++i) {
    const Index upper = lower + layer_sizes[i];
    for (Index r = 0; r < layer_sizes[i + 1]; ++r) {
      for (Index j = 0; j < layer_sizes[i]; ++j) {
        if (uniform01(rng) < p) {
          edges.emplace_back(static_cast<std::int32_t>(lower + j), static_cast<std::int32_t>(upper + r));
        }
      }
    }
    lower = upper;
  }
  return PrunedGraph(layer_sizes, std::move(edges), std::nan(""));
}

ArchitectureMask ArchitectureMask::from_layer_sizes(const std::vector<Index>& layer_sizes) {
  ArchitectureMask mask;
  for (std::size_t l = 0; l < layer_sizes.size(); ++l) {
    Index neighbours = 0;
    if (l > 0) neighbours += layer_sizes[l - 1];
    if (l + 1 < layer_sizes.size()) neighbours += layer_sizes[l + 1];
    if (neighbours == 0) throw ConfigError("architecture needs at least two layers");
    mask.max_degree.insert(mask.max_degree.end(), static_cast<std::size_t>(layer_sizes[l]),
                           static_cast<double>(neighbours));
  }
  return mask;
}

std::string_view to_string(DegreeModel model) {
  switch (model) {
    case DegreeModel::kRaw:
      return "raw";
    case DegreeModel::kP:
      return "P";
    case DegreeModel::kQ:
      return "Q";
  }
  return "unknown";
}

std::string_view to_string(GraphSource source) {
  return source == GraphSource::kReal ? "real" : "replica";
}

DegreeDistribution degree_distribution(const PrunedGraph& g, const ArchitectureMask& arch,
                                       DegreeModel model) {
  const Index n = g.node_count();
  if (static_cast<Index>(arch.max_degree.size()) != n) {
    throw ShapeError(fmt::format("architecture mask covers {} nodes, graph has {}",
                                 arch.max_degree.size(), n));
  }
  std::map<Index, std::pair<Index, double>> by_degree;  // k -> (N_k, sum of 1/maxdeg)
  for (Index v = 0; v < n; ++v) {
    auto& cell = by_degree[g.degree(v)];
    ++cell.first;
    cell.second += 1.0 / arch.max_degree[static_cast<std::size_t>(v)];
  }
  DegreeDistribution out;
  out.model = model;
  double total = 0.0;
  for (const auto& [k, cell] : by_degree) {
    const double n_frac = static_cast<double>(cell.first) / static_cast<double>(n);
    double mass = 0.0;
    switch (model) {
      case DegreeModel::kRaw:
        mass = n_frac;
        break;
      case DegreeModel::kP:
        mass = n_frac * cell.second;
        break;
      case DegreeModel::kQ:
        mass = cell.second;
        break;
    }
    out.support.push_back(k);
    out.node_counts.push_back(cell.first);
    out.masses.push_back(mass);
    total += mass;
  }
  for (double& m : out.masses) m /= total;
  return out;
}

std::vector<GridRow> property_grid(const std::vector<GraphCheckpoint>& checkpoints,
                                   const std::vector<double>& cutoffs, std::uint64_t base_seed) {
  if (checkpoints.empty()) throw ConfigError("property_grid: no checkpoints");
  std::vector<GridRow> rows;
  for (const GraphCheckpoint& cp : checkpoints) {
    for (double c : cutoffs) {
      const PrunedGraph real = binarize(*cp.dbn, c);
      const double p = edge_probability(real);
      const std::uint64_t seed = derive_seed(
          base_seed, {static_cast<std::uint64_t>(StreamPurpose::kReplica),
                      static_cast<std::uint64_t>(cp.epoch), std::bit_cast<std::uint64_t>(c)});
      const PrunedGraph replica = binomial_replica(real.layer_sizes(), p, seed);
      for (const auto& [source, graph] : {std::pair{GraphSource::kReal, &real},
                                          std::pair{GraphSource::kReplica, &replica}}) {
        rows.push_back(GridRow{cp.epoch, c, source, mean_degree(*graph), mean_geodesic(*graph),
                               connected_components(*graph), edge_probability(*graph)});
      }
    }
  }
  return rows;
}

}  // namespace idbn
