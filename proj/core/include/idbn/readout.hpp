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

#include <vector>

#include "idbn/types.hpp"

namespace idbn {

/// Multiclass linear classifier scored by argmax over one-vs-rest
/// regression outputs.
struct LinearReadout {
  Matrix weights;           // n_classes x n_features
  Vector bias;              // n_classes
  std::vector<int> classes; // label of each output row, ascending
  double ridge_strength = 0.0;

  /// Class scores, one row per pattern.
  Matrix scores(const Matrix& features) const;
  std::vector<int> predict(const Matrix& features) const;
  double accuracy(const Matrix& features, const std::vector<int>& labels) const;
};

/// Closed-form ridge regression on one-hot targets. Minimizes
///   (1/n) * sum_i ||y_i - W x_i - b||^2 + ridge_strength * ||W||_F^2
/// so the bias is unpenalized and duplicating the training set leaves the
/// solution unchanged.
LinearReadout fit_ridge(const Matrix& features, const std::vector<int>& labels,
                        double ridge_strength);

}  // namespace idbn
