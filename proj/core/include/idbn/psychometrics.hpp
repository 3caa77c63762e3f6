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

#include <optional>
#include <string_view>
#include <vector>

#include "idbn/data.hpp"
#include "idbn/dbn.hpp"

namespace idbn {

/// Numerosity comparison task around one reference number.
struct DiscriminationSpec {
  int reference = 8;
  std::vector<int> window;  // comparison numerosities; the reference itself is skipped
  int classifiers_per_point = 5;
  double train_fraction = 0.8;

  /// Windows 5..12 for reference 8 and 10..24 for reference 16.
  static DiscriminationSpec for_reference(int reference);
  /// Comparison numerosities with the reference removed, ascending.
  std::vector<int> comparisons() const;
};

struct PsychometricPoint {
  double ratio = 0.0;  // n / reference
  double y = 0.0;      // fraction of "larger than reference" responses
  Index count = 0;     // test images behind y
};

struct DiscriminationResult {
  /// One response curve per classifier replicate, sorted by ratio.
  std::vector<std::vector<PsychometricPoint>> replicates;
  /// Replicate average at each ratio.
  std::vector<PsychometricPoint> averaged;
};

/// Fits `classifiers_per_point` ridge readouts (target: n > reference) on
/// `features`, each with its own stratified train/test split of the window
/// images, and reports the test-set "larger" response rate per ratio.
DiscriminationResult discrimination_points(const Matrix& features, const std::vector<int>& numerosities,
                                           const DiscriminationSpec& spec, double ridge_strength, Rng& rng);

/// Same, with features taken from the deepest layer of `dbn`.
DiscriminationResult discrimination_points(const Dbn& dbn, const LabeledImageSet& dataset,
                                           const DiscriminationSpec& spec, double ridge_strength, Rng& rng);

enum class PsychometricModel {
  kCentered,  // y = Phi((r - 1) / (2 w))
  kLogRatio,  // y = Phi(ln r / (2 w))
};
std::string_view to_string(PsychometricModel model);
PsychometricModel parse_psychometric_model(std::string_view name);

/// Model response at ratio r for Weber fraction w.
double psychometric_curve(double ratio, double w, PsychometricModel model = PsychometricModel::kCentered);

struct WeberFit {
  double w = 0.0;
  double rss = 0.0;
};

/// Least-squares Weber fraction over w in [1e-4, 10]: log-grid scan followed
/// by Brent refinement. Needs at least three points with ratios on both
/// sides of 1 and non-constant responses.
WeberFit fit_weber(const std::vector<PsychometricPoint>& points,
                   PsychometricModel model = PsychometricModel::kCentered);

/// Fits w separately for every classifier replicate, pooling replicate c of
/// each reference's result into one curve, and averages the successful fits.
/// Returns nullopt when no replicate yields a fit.
std::optional<double> mean_classifier_weber(const std::vector<DiscriminationResult>& per_reference,
                                            PsychometricModel model = PsychometricModel::kCentered);

struct TrajectoryPoint {
  double epoch = 0.0;
  double mean_w = 0.0;
  double std_w = 0.0;  // population standard deviation across runs
  std::size_t runs = 0;
};

/// Per-epoch mean and spread of w across runs. `w_by_run[r][e]` is run r's
/// value at `epochs[e]`; NaN entries are skipped.
std::vector<TrajectoryPoint> weber_trajectory(const std::vector<double>& epochs,
                                              const std::vector<std::vector<double>>& w_by_run);

/// y = a (1 + s x)^b.
struct PowerLawFit {
  double a = 0.0;
  double b = 0.0;
  double s = 0.0;
  double rss = 0.0;
  /// 1 - SS_res / SS_tot; NaN when the data are constant.
  double r_squared = 0.0;
  bool degenerate = false;
  int iterations = 0;

  double operator()(double x) const;
};

/// Multi-start Levenberg-Marquardt: 8 starts on s in {0.01, 0.1, 1, 10} x
/// b in {-1, +1}, with a solved linearly at each start. Needs at least four
/// points and x >= 0.
PowerLawFit fit_powerlaw(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace idbn
