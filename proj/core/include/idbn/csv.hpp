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

#include <filesystem>
#include <initializer_list>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace idbn {

/// Writes `bytes` to a sibling temporary file and renames it over `path`, so
/// readers never observe a partial file. Parent directories are created.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

/// Reads a whole file; throws DataError(kIo) naming the path on failure.
std::string read_file(const std::filesystem::path& path);

/// Formats a double with 17 significant digits ("nan"/"inf" spelled out).
std::string format_real(double value);

/// A CSV document with a provenance comment line and a fixed header. Cells
/// are integers, reals (17 significant digits), or plain strings.
class CsvTable {
 public:
  using Cell = std::variant<long long, double, std::string>;

  CsvTable(std::string config_hash, std::vector<std::string> header);

  /// Throws ShapeError when the row width differs from the header.
  void add_row(std::vector<Cell> row);
  std::size_t rows() const { return rows_.size(); }

  /// `# config_hash=<hash>` line, header line, then one line per row.
  std::string str() const;
  void write(const std::filesystem::path& path) const { write_file_atomic(path, str()); }

 private:
  std::string hash_;
  std::vector<std::string> header_;
  std::vector<std::vector<Cell>> rows_;
};

}  // namespace idbn
