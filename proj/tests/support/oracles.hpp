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


// Reference implementations used to cross-check the library. They favour
// obviousness over speed and share no code with core/.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "idbn/graph.hpp"
#include "idbn/random.hpp"
#include "idbn/rbm.hpp"

namespace idbn::oracles {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct ExpectedGradient {
  Matrix w;
  Vector a;
  Vector b;
};

/// Exact E[gradient] of one CD-1 step for a single data vector. Visible
/// reconstructions and final hidden statistics are probabilities, so the only
/// randomness is the sampled hidden state: summing over its 2^n_hidden values
/// weighted by their probabilities gives the expectation.
inline ExpectedGradient enumerate_cd1(const RbmLayer& layer, const Vector& v) {
  const Index nh = layer.n_hidden();
  const Index nv = layer.n_visible();
  Vector ph(nh);
  for (Index i = 0; i < nh; ++i) ph[i] = sigmoid(layer.weights.row(i).dot(v) + layer.hidden_bias[i]);
  ExpectedGradient out{ph * v.transpose(), v, ph};
  for (int bits = 0; bits < (1 << nh); ++bits) {
    double prob = 1.0;
    Vector h(nh);
    for (Index i = 0; i < nh; ++i) {
      h[i] = (bits >> i) & 1;
      prob *= h[i] > 0 ? ph[i] : 1.0 - ph[i];
    }
    Vector vr(nv);
    for (Index j = 0; j < nv; ++j) vr[j] = sigmoid(layer.weights.col(j).dot(h) + layer.visible_bias[j]);
    Vector hr(nh);
    for (Index i = 0; i < nh; ++i) hr[i] = sigmoid(layer.weights.row(i).dot(vr) + layer.hidden_bias[i]);
    out.w -= prob * hr * vr.transpose();
    out.a -= prob * vr;
    out.b -= prob * hr;
  }
  return out;
}

/// Conjugate gradients on the normal equations of
///   (1/n)||Y - [X 1] theta||^2 + lambda ||theta without its last row||^2,
/// one target column at a time. Returns theta, (features + 1) x targets.
inline Matrix cg_ridge(const Matrix& x, const Matrix& y, double lambda) {
  const Index n = x.rows(), d = x.cols() + 1;
  Matrix xa(n, d);
  xa << x, Matrix::Ones(n, 1);
  auto apply = [&](const Vector& v) {
    Vector out = xa.transpose() * (xa * v) / static_cast<double>(n);
    out.head(d - 1) += lambda * v.head(d - 1);
    return out;
  };
  Matrix theta(d, y.cols());
  for (Index c = 0; c < y.cols(); ++c) {
    const Vector b = xa.transpose() * y.col(c) / static_cast<double>(n);
    Vector t = Vector::Zero(d), r = b, p = r;
    double rs = r.squaredNorm();
    for (int it = 0; it < 10 * d && rs > 1e-30; ++it) {
      const Vector ap = apply(p);
      const double alpha = rs / p.dot(ap);
      t += alpha * p;
      r -= alpha * ap;
      const double next = r.squaredNorm();
      p = r + (next / rs) * p;
      rs = next;
    }
    theta.col(c) = t;
  }
  return theta;
}

/// 8-connected white blob of a binary image: bounding box and pixel count.
struct Blob {
  int top, left, bottom, right, pixels;
};

inline std::vector<Blob> flood_fill_blobs(const RowVector& img, int side) {
  std::vector<int> seen(static_cast<std::size_t>(side * side), 0);
  std::vector<Blob> out;
  for (int start = 0; start < side * side; ++start) {
    if (img[start] < 0.5 || seen[static_cast<std::size_t>(start)]) continue;
    Blob c{side, side, -1, -1, 0};
    std::vector<int> stack{start};
    seen[static_cast<std::size_t>(start)] = 1;
    while (!stack.empty()) {
      const int p = stack.back();
      stack.pop_back();
      const int r = p / side, col = p % side;
      c.top = std::min(c.top, r);
      c.bottom = std::max(c.bottom, r);
      c.left = std::min(c.left, col);
      c.right = std::max(c.right, col);
      ++c.pixels;
      for (int dr = -1; dr <= 1; ++dr)
        for (int dc = -1; dc <= 1; ++dc) {
          const int rr = r + dr, cc = col + dc;
          if (rr < 0 || cc < 0 || rr >= side || cc >= side) continue;
          const int q = rr * side + cc;
          if (img[q] >= 0.5 && !seen[static_cast<std::size_t>(q)]) {
            seen[static_cast<std::size_t>(q)] = 1;
            stack.push_back(q);
          }
        }
    }
    out.push_back(c);
  }
  return out;
}

using GraphEdge = PrunedGraph::Edge;

inline Index union_find_components(Index n, const std::vector<GraphEdge>& edges) {
  std::vector<Index> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), Index{0});
  auto find = [&](Index x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  };
  for (const auto& [a, b] : edges) parent[static_cast<std::size_t>(find(a))] = find(b);
  Index count = 0;
  for (Index v = 0; v < n; ++v) count += find(v) == v;
  return count;
}

/// Floyd-Warshall mean over reachable distinct pairs; 0 when there are none.
inline double floyd_mean_geodesic(Index n, const std::vector<GraphEdge>& edges) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  Matrix d = Matrix::Constant(n, n, kInf);
  for (Index v = 0; v < n; ++v) d(v, v) = 0.0;
  for (const auto& [a, b] : edges) d(a, b) = d(b, a) = 1.0;
  for (Index k = 0; k < n; ++k)
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) d(i, j) = std::min(d(i, j), d(i, k) + d(k, j));
  double sum = 0.0;
  long pairs = 0;
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j)
      if (std::isfinite(d(i, j))) {
        sum += d(i, j);
        ++pairs;
      }
  return pairs ? sum / static_cast<double>(pairs) : 0.0;
}

struct RandomGraph {
  std::vector<Index> sizes;
  std::vector<GraphEdge> edges;
  Index n = 0;
};

/// 2-4 layers of 1-50 nodes with a random sparse edge density.
inline RandomGraph random_layered(Rng& rng) {
  RandomGraph g;
  const int layers = 2 + static_cast<int>(uniform01(rng) * 3);
  for (int l = 0; l < layers; ++l) g.sizes.push_back(1 + static_cast<Index>(uniform01(rng) * 50));
  g.n = std::accumulate(g.sizes.begin(), g.sizes.end(), Index{0});
  const double p = 0.002 + 0.15 * uniform01(rng) * uniform01(rng);
  Index offset = 0;
  for (std::size_t l = 0; l + 1 < g.sizes.size(); ++l) {
    const Index next = offset + g.sizes[l];
    for (Index a = 0; a < g.sizes[l]; ++a)
      for (Index b = 0; b < g.sizes[l + 1]; ++b)
        if (uniform01(rng) < p)
          g.edges.emplace_back(static_cast<std::int32_t>(offset + a), static_cast<std::int32_t>(next + b));
    offset = next;
  }
  return g;
}

inline std::vector<Index> degrees(Index n, const std::vector<GraphEdge>& edges) {
  std::vector<Index> deg(static_cast<std::size_t>(n), 0);
  for (const auto& [a, b] : edges) {
    ++deg[static_cast<std::size_t>(a)];
    ++deg[static_cast<std::size_t>(b)];
  }
  return deg;
}

}  // namespace idbn::oracles
