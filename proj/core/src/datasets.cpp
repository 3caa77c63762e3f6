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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "idbn/data.hpp"
#include "idbn/errors.hpp"

namespace idbn {
namespace {

void shuffle(std::vector<Index>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const auto j = std::min(static_cast<std::size_t>(uniform01(rng) * static_cast<double>(i)), i - 1);
    std::swap(v[i - 1], v[j]);
  }
}

struct Rect {
  int x, y, w, h;
};

// Rectangles must keep at least one background pixel between them in every
// direction, diagonals included, so 8-connected components stay separate.
bool separated(const Rect& a, const Rect& b) {
  return a.x > b.x + b.w || b.x > a.x + a.w || a.y > b.y + b.h || b.y > a.y + a.h;
}

}  // namespace

void LabeledImageSet::validate() const {
  if (images.rows() != static_cast<Index>(labels.size())) {
    throw DataError(DataError::Kind::kCountMismatch,
                    fmt::format("{} images but {} labels", images.rows(), labels.size()));
  }
  if (images.cols() != static_cast<Index>(image_side) * image_side) {
    throw DataError(DataError::Kind::kFormat,
                    fmt::format("rows have {} pixels, side {} needs {}", images.cols(), image_side,
                                image_side * image_side));
  }
  if (images.size() > 0 && (images.minCoeff() < 0.0 || images.maxCoeff() > 1.0)) {
    throw DataError(DataError::Kind::kFormat, "pixel values outside [0, 1]");
  }
}

LabeledImageSet LabeledImageSet::subset(const std::vector<Index>& indices) const {
  LabeledImageSet out;
  out.image_side = image_side;
  out.images.resize(static_cast<Index>(indices.size()), images.cols());
  out.labels.reserve(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    out.images.row(static_cast<Index>(i)) = images.row(indices[i]);
    out.labels.push_back(labels[static_cast<std::size_t>(indices[i])]);
  }
  return out;
}

LabeledImageSet LabeledImageSet::head(Index n) const {
  std::vector<Index> idx(static_cast<std::size_t>(std::min(n, size())));
  std::iota(idx.begin(), idx.end(), Index{0});
  return subset(idx);
}

LabeledImageSet select_label_range(const LabeledImageSet& set, int first, int count) {
  std::vector<Index> keep;
  for (std::size_t i = 0; i < set.labels.size(); ++i) {
    if (set.labels[i] >= first && set.labels[i] < first + count) keep.push_back(static_cast<Index>(i));
  }
  LabeledImageSet out = set.subset(keep);
  for (int& l : out.labels) l -= first;
  return out;
}

ContinualSets make_continual_sets(const LabeledImageSet& digits, const LabeledImageSet& letters,
                                  const ContinualSetSpec& spec, std::uint64_t seed) {
  if (digits.size() < spec.digits_count) {
    throw DataError(DataError::Kind::kInsufficient,
                    fmt::format("need {} digit images, have {}", spec.digits_count, digits.size()));
  }
  Rng digit_rng = make_stream(seed, StreamPurpose::kSelection, 0);
  std::vector<Index> digit_idx(static_cast<std::size_t>(digits.size()));
  std::iota(digit_idx.begin(), digit_idx.end(), Index{0});
  shuffle(digit_idx, digit_rng);
  digit_idx.resize(static_cast<std::size_t>(spec.digits_count));

  std::vector<Index> letter_idx;
  for (int c = 0; c < spec.letter_classes; ++c) {
    std::vector<Index> of_class;
    for (std::size_t i = 0; i < letters.labels.size(); ++i) {
      if (letters.labels[i] == c) of_class.push_back(static_cast<Index>(i));
    }
    if (static_cast<Index>(of_class.size()) < spec.letters_per_class) {
      throw DataError(DataError::Kind::kInsufficient,
                      fmt::format("letter class {} has {} images, need {}", c, of_class.size(),
                                  spec.letters_per_class));
    }
    Rng rng = make_stream(seed, StreamPurpose::kSelection, 1 + static_cast<std::uint64_t>(c));
    shuffle(of_class, rng);
    letter_idx.insert(letter_idx.end(), of_class.begin(),
                      of_class.begin() + static_cast<std::ptrdiff_t>(spec.letters_per_class));
  }

  ContinualSets out;
  out.digits = digits.subset(digit_idx);
  out.letters = letters.subset(letter_idx);
  for (int& l : out.letters.labels) l += spec.letter_label_offset;

  const Index n_digits = out.digits.size();
  const Index total = n_digits + out.letters.size();
  std::vector<Index> mix(static_cast<std::size_t>(total));
  std::iota(mix.begin(), mix.end(), Index{0});
  Rng mix_rng = make_stream(seed, StreamPurpose::kSelection, 1000);
  shuffle(mix, mix_rng);
  out.interleaved.image_side = digits.image_side;
  out.interleaved.images.resize(total, digits.images.cols());
  out.interleaved.labels.resize(static_cast<std::size_t>(total));
  for (Index i = 0; i < total; ++i) {
    const Index src = mix[static_cast<std::size_t>(i)];
    const bool is_digit = src < n_digits;
    const LabeledImageSet& from = is_digit ? out.digits : out.letters;
    const Index row = is_digit ? src : src - n_digits;
    out.interleaved.images.row(i) = from.images.row(row);
    out.interleaved.labels[static_cast<std::size_t>(i)] = from.labels[static_cast<std::size_t>(row)];
  }
  return out;
}

void NumerosityParams::validate() const {
  if (min_numerosity < 1 || max_numerosity < min_numerosity) {
    throw ConfigError(fmt::format("numerosity range must be within 1.., got {}..{}", min_numerosity,
                                  max_numerosity));
  }
  if (image_side < 1) throw ConfigError("image_side must be >= 1");
  if (side_min < 1 || side_max < side_min || side_max > image_side) {
    throw ConfigError(fmt::format("object side range {}..{} invalid for a {}-pixel image", side_min,
                                  side_max, image_side));
  }
  if (images_per_level < 1) throw ConfigError("images_per_level must be >= 1");
  if (max_attempts_per_object < 1 || max_restarts < 1) throw ConfigError("retry budgets must be >= 1");
}

Matrix draw_numerosity_image(int n, const NumerosityParams& params, Rng& rng) {
  if (n < params.min_numerosity || n > params.max_numerosity) {
    throw ConfigError(fmt::format("numerosity {} outside {}..{}", n, params.min_numerosity,
                                  params.max_numerosity));
  }
  const int side = params.image_side;
  std::uniform_int_distribution<int> edge(params.side_min, params.side_max);
  std::vector<Rect> rects;
  for (int restart = 0; restart < params.max_restarts; ++restart) {
    rects.clear();
    bool failed = false;
    for (int k = 0; k < n && !failed; ++k) {
      bool placed = false;
      for (int attempt = 0; attempt < params.max_attempts_per_object && !placed; ++attempt) {
        Rect r{0, 0, edge(rng), edge(rng)};
        r.x = std::uniform_int_distribution<int>(0, side - r.w)(rng);
        r.y = std::uniform_int_distribution<int>(0, side - r.h)(rng);
        placed = std::all_of(rects.begin(), rects.end(), [&](const Rect& o) { return separated(r, o); });
        if (placed) rects.push_back(r);
      }
      failed = !placed;
    }
    if (failed) continue;
    Matrix image = Matrix::Zero(1, static_cast<Index>(side) * side);
    for (const Rect& r : rects) {
      for (int y = r.y; y < r.y + r.h; ++y) {
        for (int x = r.x; x < r.x + r.w; ++x) image(0, static_cast<Index>(y) * side + x) = 1.0;
      }
    }
    return image;
  }
  throw DataError(DataError::Kind::kGeneration,
                  fmt::format("could not place {} objects on a {}x{} field after {} restarts", n,
                              side, side, params.max_restarts));
}

LabeledImageSet generate_numerosity(const NumerosityParams& params) {
  params.validate();
  const int levels = params.max_numerosity - params.min_numerosity + 1;
  LabeledImageSet set;
  set.image_side = params.image_side;
  set.images.resize(levels * params.images_per_level,
                    static_cast<Index>(params.image_side) * params.image_side);
  set.labels.reserve(static_cast<std::size_t>(set.images.rows()));
  Index row = 0;
  for (int n = params.min_numerosity; n <= params.max_numerosity; ++n) {
    Rng rng = make_stream(params.seed, StreamPurpose::kGeneration, static_cast<std::uint64_t>(n));
    for (Index i = 0; i < params.images_per_level; ++i) {
      try {
        set.images.row(row++) = draw_numerosity_image(n, params, rng);
      } catch (const DataError& e) {
        throw DataError(DataError::Kind::kGeneration,
                        fmt::format("numerosity level {}: {}", n, e.what()));
      }
      set.labels.push_back(n);
    }
  }
  return set;
}

RowVector corrupt_occlude(const RowVector& image, int side, int first_row, int n_rows) {
  if (image.size() != static_cast<Index>(side) * side) {
    throw ShapeError(fmt::format("image has {} pixels, side {} needs {}", image.size(), side, side * side));
  }
  if (first_row < 0 || n_rows < 0 || first_row + n_rows > side) {
    throw ConfigError(fmt::format("occlusion rows {}..{} outside a {}-row image", first_row,
                                  first_row + n_rows - 1, side));
  }
  RowVector out = image;
  out.segment(static_cast<Index>(first_row) * side, static_cast<Index>(n_rows) * side).setZero();
  return out;
}

Matrix corrupt_occlude(const Matrix& images, int side, int first_row, int n_rows) {
  Matrix out(images.rows(), images.cols());
  for (Index i = 0; i < images.rows(); ++i) {
    out.row(i) = corrupt_occlude(RowVector(images.row(i)), side, first_row, n_rows);
  }
  return out;
}

RowVector corrupt_noise(const RowVector& image, double sigma, Rng& rng) {
  if (!(sigma >= 0.0)) throw ConfigError(fmt::format("noise sigma must be >= 0, got {}", sigma));
  if (sigma == 0.0) return image;
  std::normal_distribution<double> noise(0.0, sigma);
  RowVector out = image;
  for (Index i = 0; i < out.size(); ++i) out[i] = std::clamp(out[i] + noise(rng), 0.0, 1.0);
  return out;
}

Matrix corrupt_noise(const Matrix& images, double sigma, Rng& rng) {
  Matrix out(images.rows(), images.cols());
  for (Index i = 0; i < images.rows(); ++i) out.row(i) = corrupt_noise(RowVector(images.row(i)), sigma, rng);
  return out;
}

}  // namespace idbn
