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
#include <filesystem>
#include <vector>

#include "idbn/random.hpp"
#include "idbn/types.hpp"

namespace idbn {

/// Flattened square images (one per row, values in [0, 1]) with integer labels.
struct LabeledImageSet {
  Matrix images;
  std::vector<int> labels;
  int image_side = 0;

  Index size() const { return images.rows(); }
  /// Throws DataError if rows and labels disagree or a pixel leaves [0, 1].
  void validate() const;
  /// Rows at `indices`, in that order.
  LabeledImageSet subset(const std::vector<Index>& indices) const;
  /// First `n` rows (or all when n >= size()).
  LabeledImageSet head(Index n) const;
};

inline constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

struct IdxOptions {
  /// Swap rows and columns of every image (EMNIST files are stored transposed).
  bool transpose = false;
};

/// Reads an IDX image/label pair; gzip-compressed files are decoded
/// transparently. Pixels are divided by 255.
LabeledImageSet load_idx(const std::filesystem::path& images_path,
                         const std::filesystem::path& labels_path, const IdxOptions& options = {});

/// Writes uncompressed IDX files; pixels are rounded to the nearest byte.
void save_idx(const LabeledImageSet& set, const std::filesystem::path& images_path,
              const std::filesystem::path& labels_path);

/// Keeps images whose label is in first..first+count-1 and relabels them
/// 0..count-1 (for example EMNIST letters 1..10 = A..J).
LabeledImageSet select_label_range(const LabeledImageSet& set, int first, int count);

struct ContinualSetSpec {
  Index digits_count = 20000;
  Index letters_per_class = 2000;
  int letter_classes = 10;
  int letter_label_offset = 10;
};

struct ContinualSets {
  LabeledImageSet digits;
  LabeledImageSet letters;
  LabeledImageSet interleaved;
};

/// Uniform digit sample without replacement, class-balanced letter sample
/// (labels 0..letter_classes-1 in, shifted by letter_label_offset out), and
/// their shuffled union.
ContinualSets make_continual_sets(const LabeledImageSet& digits, const LabeledImageSet& letters,
                                  const ContinualSetSpec& spec, std::uint64_t seed);

struct NumerosityParams {
  int image_side = 30;
  int min_numerosity = 1;
  int max_numerosity = 32;
  Index images_per_level = 1600;
  int side_min = 1;
  int side_max = 5;
  int max_attempts_per_object = 1000;
  int max_restarts = 100;
  std::uint64_t seed = 0;

  void validate() const;
};

/// White (1) axis-aligned rectangles on a black (0) field, `n` per image for
/// every numerosity level, non-overlapping and never touching (not even at a
/// corner). Levels use independent derived streams.
LabeledImageSet generate_numerosity(const NumerosityParams& params);

/// Draws the rectangles of a single image with `n` objects.
Matrix draw_numerosity_image(int n, const NumerosityParams& params, Rng& rng);

/// Zeroes rows first_row..first_row+n_rows-1 of a side x side image.
RowVector corrupt_occlude(const RowVector& image, int side, int first_row, int n_rows);
Matrix corrupt_occlude(const Matrix& images, int side, int first_row, int n_rows);

/// Adds N(0, sigma) noise per pixel and clamps to [0, 1].
RowVector corrupt_noise(const RowVector& image, double sigma, Rng& rng);
Matrix corrupt_noise(const Matrix& images, double sigma, Rng& rng);

}  // namespace idbn
