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

#include "idbn/psychometrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Dense>
#include <boost/math/tools/minima.hpp>
#include <fmt/format.h>

#include "idbn/errors.hpp"
#include "idbn/readout.hpp"

namespace idbn {
namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

void shuffle(std::vector<Index>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const auto j = std::min(static_cast<std::size_t>(uniform01(rng) * static_cast<double>(i)), i - 1);
    std::swap(v[i - 1], v[j]);
  }
}

double weber_rss(const std::vector<PsychometricPoint>& points, double w, PsychometricModel model) {
  double rss = 0.0;
  for (const auto& p : points) {
    const double d = psychometric_curve(p.ratio, w, model) - p.y;
    rss += d * d;
  }
  return rss;
}

struct LmResult {
  Eigen::Vector3d theta = Eigen::Vector3d::Zero();
  double rss = std::numeric_limits<double>::infinity();
  int iterations = 0;
};

bool admissible(double s, double x_max) { return 1.0 + s * x_max > 0.0; }

double powerlaw_rss(const Eigen::Vector3d& t, const std::vector<double>& x, const std::vector<double>& y) {
  double rss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = t[0] * std::pow(1.0 + t[2] * x[i], t[1]) - y[i];
    rss += r * r;
  }
  return rss;
}

// a enters linearly: for fixed (b, s) the best a is <y, f> / <f, f>.
double best_amplitude(double b, double s, const std::vector<double>& x, const std::vector<double>& y) {
  double fy = 0.0;
  double ff = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = std::pow(1.0 + s * x[i], b);
    fy += f * y[i];
    ff += f * f;
  }
  return ff > 0.0 ? fy / ff : 0.0;
}

LmResult levenberg_marquardt(Eigen::Vector3d theta, const std::vector<double>& x,
                             const std::vector<double>& y, double x_max) {
  constexpr int kMaxIterations = 2000;
  constexpr double kRelativeStep = 1e-10;
  const auto n = static_cast<Index>(x.size());
  LmResult out;
  out.theta = theta;
  out.rss = powerlaw_rss(theta, x, y);
  double lambda = 1e-3;
  Eigen::MatrixXd jac(n, 3);
  Eigen::VectorXd res(n);
  for (int it = 0; it < kMaxIterations; ++it) {
    out.iterations = it + 1;
    for (Index i = 0; i < n; ++i) {
      const double xi = x[static_cast<std::size_t>(i)];
      const double base = 1.0 + theta[2] * xi;
      const double f = std::pow(base, theta[1]);
      res[i] = theta[0] * f - y[static_cast<std::size_t>(i)];
      jac(i, 0) = f;
      jac(i, 1) = theta[0] * f * std::log(base);
      jac(i, 2) = theta[0] * theta[1] * xi * std::pow(base, theta[1] - 1.0);
    }
    const Eigen::Matrix3d jtj = jac.transpose() * jac;
    const Eigen::Vector3d grad = jac.transpose() * res;
    if (grad.lpNorm<Eigen::Infinity>() < 1e-300 || out.rss == 0.0) break;
    bool accepted = false;
    Eigen::Vector3d step = Eigen::Vector3d::Zero();
    while (lambda < 1e16) {
      Eigen::Matrix3d damped = jtj;
      damped.diagonal() += lambda * jtj.diagonal().cwiseMax(1e-12);
      step = damped.ldlt().solve(-grad);
      const Eigen::Vector3d candidate = theta + step;
      if (step.allFinite() && admissible(candidate[2], x_max)) {
        const double rss = powerlaw_rss(candidate, x, y);
        if (std::isfinite(rss) && rss <= out.rss) {
          theta = candidate;
          out.theta = theta;
          out.rss = rss;
          lambda = std::max(lambda / 3.0, 1e-15);
          accepted = true;
          break;
        }
      }
      lambda *= 4.0;
    }
    if (!accepted) break;
    if (step.norm() <= kRelativeStep * (theta.norm() + kRelativeStep)) break;
  }
  return out;
}

}  // namespace

DiscriminationSpec DiscriminationSpec::for_reference(int reference) {
  DiscriminationSpec spec;
  spec.reference = reference;
  int lo = 0;
  int hi = 0;
  if (reference == 8) {
    lo = 5;
    hi = 12;
  } else if (reference == 16) {
    lo = 10;
    hi = 24;
  } else {
    throw ConfigError(fmt::format("no comparison window defined for reference {}", reference));
  }
  for (int n = lo; n <= hi; ++n) spec.window.push_back(n);
  return spec;
}

std::vector<int> DiscriminationSpec::comparisons() const {
  std::vector<int> out;
  for (int n : window) {
    if (n != reference) out.push_back(n);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

DiscriminationResult discrimination_points(const Matrix& features, const std::vector<int>& numerosities,
                                           const DiscriminationSpec& spec, double ridge_strength, Rng& rng) {
  if (static_cast<Index>(numerosities.size()) != features.rows()) {
    throw ShapeError(fmt::format("{} feature rows but {} labels", features.rows(), numerosities.size()));
  }
  if (spec.classifiers_per_point < 1) throw ConfigError("classifiers_per_point must be >= 1");
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
    throw ConfigError("train_fraction must be in (0, 1)");
  }
  const std::vector<int> levels = spec.comparisons();
  bool below = false;
  bool above = false;
  for (int n : levels) {
    below = below || n < spec.reference;
    above = above || n > spec.reference;
  }
  if (!below || !above) throw ConfigError("comparison window must straddle the reference");

  std::vector<std::vector<Index>> by_level(levels.size());
  for (std::size_t i = 0; i < numerosities.size(); ++i) {
    const auto it = std::lower_bound(levels.begin(), levels.end(), numerosities[i]);
    if (it != levels.end() && *it == numerosities[i]) {
      by_level[static_cast<std::size_t>(it - levels.begin())].push_back(static_cast<Index>(i));
    }
  }
  for (std::size_t l = 0; l < levels.size(); ++l) {
    if (by_level[l].size() < 2) {
      throw DataError(DataError::Kind::kMissingLevel,
                      fmt::format("numerosity {} has {} images; need at least 2", levels[l], by_level[l].size()));
    }
  }

  DiscriminationResult result;
  for (int c = 0; c < spec.classifiers_per_point; ++c) {
    std::vector<Index> train_rows;
    std::vector<std::vector<Index>> test_rows(levels.size());
    for (std::size_t l = 0; l < levels.size(); ++l) {
      std::vector<Index> rows = by_level[l];
      shuffle(rows, rng);
      const auto n_train = static_cast<std::size_t>(std::clamp<double>(
          std::round(spec.train_fraction * static_cast<double>(rows.size())), 1.0,
          static_cast<double>(rows.size() - 1)));
      train_rows.insert(train_rows.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n_train));
      test_rows[l].assign(rows.begin() + static_cast<std::ptrdiff_t>(n_train), rows.end());
    }
    Matrix x(static_cast<Index>(train_rows.size()), features.cols());
    std::vector<int> target(train_rows.size());
    for (std::size_t i = 0; i < train_rows.size(); ++i) {
      x.row(static_cast<Index>(i)) = features.row(train_rows[i]);
      target[i] = numerosities[static_cast<std::size_t>(train_rows[i])] > spec.reference ? 1 : 0;
    }
    const LinearReadout readout = fit_ridge(x, target, ridge_strength);
    std::vector<PsychometricPoint> curve;
    for (std::size_t l = 0; l < levels.size(); ++l) {
      Matrix tx(static_cast<Index>(test_rows[l].size()), features.cols());
      for (std::size_t i = 0; i < test_rows[l].size(); ++i) tx.row(static_cast<Index>(i)) = features.row(test_rows[l][i]);
      const std::vector<int> pred = readout.predict(tx);
      const auto larger = std::count(pred.begin(), pred.end(), 1);
      curve.push_back({static_cast<double>(levels[l]) / spec.reference,
                       static_cast<double>(larger) / static_cast<double>(pred.size()),
                       static_cast<Index>(pred.size())});
    }
    result.replicates.push_back(std::move(curve));
  }

  for (std::size_t l = 0; l < levels.size(); ++l) {
    PsychometricPoint avg{result.replicates.front()[l].ratio, 0.0, 0};
    for (const auto& rep : result.replicates) {
      avg.y += rep[l].y;
      avg.count += rep[l].count;
    }
    avg.y /= static_cast<double>(result.replicates.size());
    result.averaged.push_back(avg);
  }
  return result;
}

DiscriminationResult discrimination_points(const Dbn& dbn, const LabeledImageSet& dataset,
                                           const DiscriminationSpec& spec, double ridge_strength, Rng& rng) {
  return discrimination_points(project(dbn, dataset.images, dbn.depth()), dataset.labels, spec,
                               ridge_strength, rng);
}

std::string_view to_string(PsychometricModel model) {
  return model == PsychometricModel::kCentered ? "centered" : "log_ratio";
}

PsychometricModel parse_psychometric_model(std::string_view name) {
  if (name == "centered") return PsychometricModel::kCentered;
  if (name == "log_ratio") return PsychometricModel::kLogRatio;
  throw ConfigError(fmt::format("unknown psychometric model '{}' (expected centered or log_ratio)", name));
}

double psychometric_curve(double ratio, double w, PsychometricModel model) {
  const double x = model == PsychometricModel::kCentered ? ratio - 1.0 : std::log(ratio);
  return normal_cdf(x / (2.0 * w));
}

WeberFit fit_weber(const std::vector<PsychometricPoint>& points, PsychometricModel model) {
  if (points.size() < 3) throw NumericError(fmt::format("fit_weber: need >= 3 points, got {}", points.size()));
  const bool below = std::any_of(points.begin(), points.end(), [](const auto& p) { return p.ratio < 1.0; });
  const bool above = std::any_of(points.begin(), points.end(), [](const auto& p) { return p.ratio > 1.0; });
  if (!below || !above) throw NumericError("fit_weber: ratios must lie on both sides of 1");
  const bool constant = std::all_of(points.begin(), points.end(),
                                    [&](const auto& p) { return p.y == points.front().y; });
  if (constant) throw NumericError("fit_weber: all responses are equal; the curve is undetermined");

  constexpr double kLogMin = -9.210340371976184;  // log(1e-4)
  constexpr double kLogMax = 2.302585092994046;   // log(10)
  constexpr int kGrid = 400;
  auto objective = [&](double log_w) { return weber_rss(points, std::exp(log_w), model); };
  int best = 0;
  double best_rss = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= kGrid; ++i) {
    const double rss = objective(kLogMin + (kLogMax - kLogMin) * i / kGrid);
    if (rss < best_rss) {
      best_rss = rss;
      best = i;
    }
  }
  const double step = (kLogMax - kLogMin) / kGrid;
  const double lo = std::max(kLogMin, kLogMin + (best - 1) * step);
  const double hi = std::min(kLogMax, kLogMin + (best + 1) * step);
  const auto [log_w, rss] = boost::math::tools::brent_find_minima(objective, lo, hi, 50);
  if (rss <= best_rss) return {std::exp(log_w), rss};
  return {std::exp(kLogMin + best * step), best_rss};
}

std::optional<double> mean_classifier_weber(const std::vector<DiscriminationResult>& per_reference,
                                            PsychometricModel model) {
  if (per_reference.empty()) return std::nullopt;
  const std::size_t replicates = per_reference.front().replicates.size();
  for (const auto& r : per_reference) {
    if (r.replicates.size() != replicates) throw ShapeError("references disagree on the replicate count");
  }
  double sum = 0.0;
  int fitted = 0;
  for (std::size_t c = 0; c < replicates; ++c) {
    std::vector<PsychometricPoint> pooled;
    for (const auto& r : per_reference) pooled.insert(pooled.end(), r.replicates[c].begin(), r.replicates[c].end());
    try {
      sum += fit_weber(pooled, model).w;
      ++fitted;
    } catch (const NumericError&) {
      // flat curve: w undetermined for this replicate
    }
  }
  if (fitted == 0) return std::nullopt;
  return sum / fitted;
}

std::vector<TrajectoryPoint> weber_trajectory(const std::vector<double>& epochs,
                                              const std::vector<std::vector<double>>& w_by_run) {
  if (w_by_run.empty()) throw ConfigError("weber_trajectory: need at least one run");
  for (std::size_t e = 1; e < epochs.size(); ++e) {
    if (!(epochs[e] > epochs[e - 1])) throw ConfigError("weber_trajectory: epochs must be strictly increasing");
  }
  for (const auto& run : w_by_run) {
    if (run.size() != epochs.size()) {
      throw ShapeError(fmt::format("run has {} values for {} epochs", run.size(), epochs.size()));
    }
  }
  std::vector<TrajectoryPoint> out;
  for (std::size_t e = 0; e < epochs.size(); ++e) {
    TrajectoryPoint pt;
    pt.epoch = epochs[e];
    double sum = 0.0;
    for (const auto& run : w_by_run) {
      if (std::isnan(run[e])) continue;
      sum += run[e];
      ++pt.runs;
    }
    if (pt.runs == 0) {
      pt.mean_w = pt.std_w = std::nan("");
    } else {
      pt.mean_w = sum / static_cast<double>(pt.runs);
      double ss = 0.0;
      for (const auto& run : w_by_run) {
        if (!std::isnan(run[e])) ss += (run[e] - pt.mean_w) * (run[e] - pt.mean_w);
      }
      pt.std_w = std::sqrt(ss / static_cast<double>(pt.runs));
    }
    out.push_back(pt);
  }
  return out;
}

double PowerLawFit::operator()(double x) const { return a * std::pow(1.0 + s * x, b); }

PowerLawFit fit_powerlaw(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw ShapeError("fit_powerlaw: x and y differ in length");
  if (x.size() < 4) throw NumericError(fmt::format("fit_powerlaw: need >= 4 points, got {}", x.size()));
  if (std::any_of(x.begin(), x.end(), [](double v) { return !(v >= 0.0) || !std::isfinite(v); })) {
    throw NumericError("fit_powerlaw: x must be finite and >= 0");
  }
  if (std::any_of(y.begin(), y.end(), [](double v) { return !std::isfinite(v); })) {
    throw NumericError("fit_powerlaw: y must be finite");
  }
  const double mean_y = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
  double ss_tot = 0.0;
  for (double v : y) ss_tot += (v - mean_y) * (v - mean_y);
  if (ss_tot == 0.0) {
    PowerLawFit fit;
    fit.a = mean_y;
    fit.r_squared = std::nan("");
    fit.degenerate = true;
    return fit;
  }
  const double x_max = *std::max_element(x.begin(), x.end());

  LmResult best;
  std::string diagnostics;
  for (double s0 : {0.01, 0.1, 1.0, 10.0}) {
    for (double b0 : {-1.0, 1.0}) {
      const Eigen::Vector3d start(best_amplitude(b0, s0, x, y), b0, s0);
      const LmResult r = levenberg_marquardt(start, x, y, x_max);
      diagnostics += fmt::format(" [s0={} b0={} rss={:.3g}]", s0, b0, r.rss);
      if (r.theta.allFinite() && std::isfinite(r.rss) && r.rss < best.rss) best = r;
    }
  }
  if (!std::isfinite(best.rss)) throw NumericError("fit_powerlaw: no start converged:" + diagnostics);
  PowerLawFit fit;
  fit.a = best.theta[0];
  fit.b = best.theta[1];
  fit.s = best.theta[2];
  fit.rss = best.rss;
  fit.r_squared = 1.0 - best.rss / ss_tot;
  fit.iterations = best.iterations;
  return fit;
}

}  // namespace idbn
