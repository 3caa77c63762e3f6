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

#include "idbn/readout.hpp"

#include <algorithm>

#include <Eigen/Cholesky>
#include <fmt/format.h>

#include "idbn/errors.hpp"

namespace idbn {

Matrix LinearReadout::scores(const Matrix& features) const {
  if (features.cols() != weights.cols()) {
    throw ShapeError(fmt::format("readout expects {} features, got {}", weights.cols(), features.cols()));
  }
  Matrix s = features * weights.transpose();
  s.rowwise() += bias.transpose();
  return s;
}

std::vector<int> LinearReadout::predict(const Matrix& features) const {
  const Matrix s = scores(features);
  std::vector<int> out(static_cast<std::size_t>(s.rows()));
  for (Index i = 0; i < s.rows(); ++i) {
    Index best = 0;
    s.row(i).maxCoeff(&best);
    out[static_cast<std::size_t>(i)] = classes[static_cast<std::size_t>(best)];
  }
  return out;
}

double LinearReadout::accuracy(const Matrix& features, const std::vector<int>& labels) const {
  if (static_cast<Index>(labels.size()) != features.rows()) {
    throw ShapeError(fmt::format("{} feature rows but {} labels", features.rows(), labels.size()));
  }
  if (labels.empty()) return 0.0;
  const std::vector<int> pred = predict(features);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) hits += pred[i] == labels[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

LinearReadout fit_ridge(const Matrix& features, const std::vector<int>& labels, double ridge_strength) {
  if (!(ridge_strength > 0.0)) {
    throw ConfigError(fmt::format("ridge_strength must be > 0, got {}", ridge_strength));
  }
  const Index n = features.rows();
  const Index f = features.cols();
  if (n == 0 || static_cast<Index>(labels.size()) != n) {
    throw ShapeError(fmt::format("fit_ridge: {} feature rows, {} labels", n, labels.size()));
  }
  std::vector<int> classes = labels;
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  const auto c = static_cast<Index>(classes.size());

  // Normal equations of the augmented design [X 1].
  const double inv_n = 1.0 / static_cast<double>(n);
  Matrix gram(f + 1, f + 1);
  gram.topLeftCorner(f, f).noalias() = features.transpose() * features;
  const Vector col_sums = features.colwise().sum().transpose();
  gram.topRightCorner(f, 1) = col_sums;
  gram.bottomLeftCorner(1, f) = col_sums.transpose();
  gram(f, f) = static_cast<double>(n);
  gram *= inv_n;
  gram.topLeftCorner(f, f).diagonal().array() += ridge_strength;

  Matrix rhs = Matrix::Zero(f + 1, c);
  for (Index i = 0; i < n; ++i) {
    const auto k = std::lower_bound(classes.begin(), classes.end(), labels[static_cast<std::size_t>(i)]) -
                   classes.begin();
    rhs.topRows(f).col(k) += features.row(i).transpose();
    rhs(f, k) += 1.0;
  }
  rhs *= inv_n;

  const Eigen::LDLT<Matrix> ldlt(gram);
  if (ldlt.info() != Eigen::Success) throw NumericError("fit_ridge: factorization failed");
  const Matrix beta = ldlt.solve(rhs);
  if (!beta.allFinite()) throw NumericError("fit_ridge: non-finite solution");

  LinearReadout out;
  out.weights = beta.topRows(f).transpose();
  out.bias = beta.row(f).transpose();
  out.classes = std::move(classes);
  out.ridge_strength = ridge_strength;
  return out;
}

}  // namespace idbn
