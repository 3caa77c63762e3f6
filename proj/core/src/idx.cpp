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

#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <zlib.h>

#include "idbn/data.hpp"
#include "idbn/errors.hpp"

namespace idbn {
namespace {

using Bytes = std::vector<unsigned char>;

// gzread passes plain files through unchanged, so one reader covers both
// "train-images-idx3-ubyte" and "train-images-idx3-ubyte.gz".
Bytes read_all(const std::filesystem::path& path) {
  gzFile f = gzopen(path.string().c_str(), "rb");
  if (f == nullptr) {
    throw DataError(DataError::Kind::kIo, fmt::format("cannot open '{}'", path.string()));
  }
  Bytes out;
  unsigned char buf[1 << 16];
  int n = 0;
  while ((n = gzread(f, buf, sizeof(buf))) > 0) out.insert(out.end(), buf, buf + n);
  const bool failed = n < 0;
  gzclose(f);
  if (failed) throw DataError(DataError::Kind::kIo, fmt::format("read error in '{}'", path.string()));
  return out;
}

std::uint32_t read_be32(const Bytes& bytes, std::size_t offset, const std::filesystem::path& path) {
  if (offset + 4 > bytes.size()) {
    throw DataError(DataError::Kind::kTruncated,
                    fmt::format("'{}' is truncated inside its header", path.string()));
  }
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

void check_magic(std::uint32_t magic, std::uint32_t expected, const std::filesystem::path& path) {
  if (magic != expected) {
    throw DataError(DataError::Kind::kBadMagic,
                    fmt::format("'{}' has magic 0x{:08x}, expected 0x{:08x}", path.string(), magic,
                                expected));
  }
}

void write_be32(std::ofstream& out, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v >> 24), static_cast<char>(v >> 16),
                     static_cast<char>(v >> 8), static_cast<char>(v)};
  out.write(b, 4);
}

}  // namespace

LabeledImageSet load_idx(const std::filesystem::path& images_path,
                         const std::filesystem::path& labels_path, const IdxOptions& options) {
  const Bytes img = read_all(images_path);
  check_magic(read_be32(img, 0, images_path), kIdxImagesMagic, images_path);
  const std::uint32_t count = read_be32(img, 4, images_path);
  const std::uint32_t rows = read_be32(img, 8, images_path);
  const std::uint32_t cols = read_be32(img, 12, images_path);
  if (rows != cols || rows == 0) {
    throw DataError(DataError::Kind::kFormat,
                    fmt::format("'{}' holds {}x{} images; only square images are supported",
                                images_path.string(), rows, cols));
  }
  const std::size_t pixels = std::size_t{rows} * cols;
  if (img.size() < 16 + std::size_t{count} * pixels) {
    throw DataError(DataError::Kind::kTruncated,
                    fmt::format("'{}' declares {} images but holds only {} bytes of pixels",
                                images_path.string(), count, img.size() - 16));
  }

  const Bytes lab = read_all(labels_path);
  check_magic(read_be32(lab, 0, labels_path), kIdxLabelsMagic, labels_path);
  const std::uint32_t label_count = read_be32(lab, 4, labels_path);
  if (lab.size() < 8 + std::size_t{label_count}) {
    throw DataError(DataError::Kind::kTruncated,
                    fmt::format("'{}' declares {} labels but holds only {}", labels_path.string(),
                                label_count, lab.size() - 8));
  }
  if (label_count != count) {
    throw DataError(DataError::Kind::kCountMismatch,
                    fmt::format("{} images in '{}' but {} labels in '{}'", count,
                                images_path.string(), label_count, labels_path.string()));
  }

  LabeledImageSet set;
  set.image_side = static_cast<int>(rows);
  set.images.resize(count, static_cast<Index>(pixels));
  set.labels.resize(count);
  for (std::uint32_t n = 0; n < count; ++n) {
    const unsigned char* src = img.data() + 16 + std::size_t{n} * pixels;
    for (std::uint32_t r = 0; r < rows; ++r) {
      for (std::uint32_t c = 0; c < cols; ++c) {
        const std::size_t from = options.transpose ? std::size_t{c} * cols + r : std::size_t{r} * cols + c;
        set.images(n, static_cast<Index>(std::size_t{r} * cols + c)) = src[from] / 255.0;
      }
    }
    set.labels[n] = lab[8 + n];
  }
  return set;
}

void save_idx(const LabeledImageSet& set, const std::filesystem::path& images_path,
              const std::filesystem::path& labels_path) {
  set.validate();
  std::ofstream img(images_path, std::ios::binary);
  std::ofstream lab(labels_path, std::ios::binary);
  if (!img || !lab) {
    throw DataError(DataError::Kind::kIo,
                    fmt::format("cannot write '{}' / '{}'", images_path.string(), labels_path.string()));
  }
  const auto count = static_cast<std::uint32_t>(set.size());
  write_be32(img, kIdxImagesMagic);
  write_be32(img, count);
  write_be32(img, static_cast<std::uint32_t>(set.image_side));
  write_be32(img, static_cast<std::uint32_t>(set.image_side));
  std::vector<char> row(static_cast<std::size_t>(set.images.cols()));
  for (Index n = 0; n < set.size(); ++n) {
    for (Index p = 0; p < set.images.cols(); ++p) {
      row[static_cast<std::size_t>(p)] =
          static_cast<char>(static_cast<unsigned char>(std::lround(set.images(n, p) * 255.0)));
    }
    img.write(row.data(), static_cast<std::streamsize>(row.size()));
  }
  write_be32(lab, kIdxLabelsMagic);
  write_be32(lab, count);
  for (int label : set.labels) lab.put(static_cast<char>(static_cast<unsigned char>(label)));
  if (!img || !lab) throw DataError(DataError::Kind::kIo, "write failed while saving IDX files");
}

}  // namespace idbn
