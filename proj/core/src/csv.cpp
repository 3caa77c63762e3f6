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


#include "idbn/csv.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "idbn/errors.hpp"

namespace idbn {

void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) {
    throw DataError(DataError::Kind::kIo,
                    fmt::format("cannot create directory '{}': {}", path.parent_path().string(), ec.message()));
  }
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw DataError(DataError::Kind::kIo, fmt::format("cannot write '{}'", tmp.string()));
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    throw DataError(DataError::Kind::kIo,
                    fmt::format("cannot move '{}' to '{}': {}", tmp.string(), path.string(), ec.message()));
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(DataError::Kind::kIo, fmt::format("cannot open '{}'", path.string()));
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

std::string format_real(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  return fmt::format("{:.17g}", value);
}

CsvTable::CsvTable(std::string config_hash, std::vector<std::string> header)
    : hash_(std::move(config_hash)), header_(std::move(header)) {}

void CsvTable::add_row(std::vector<Cell> row) {
  if (row.size() != header_.size()) {
    throw ShapeError(fmt::format("CSV row has {} cells, header has {}", row.size(), header_.size()));
  }
  rows_.push_back(std::move(row));
}

std::string CsvTable::str() const {
  std::string out = fmt::format("# config_hash={}\n", hash_);
  auto append_line = [&out](const auto& cells, auto&& render) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i > 0) out += ',';
      out += render(cells[i]);
    }
    out += '\n';
  };
  append_line(header_, [](const std::string& s) { return s; });
  for (const auto& row : rows_) {
    append_line(row, [](const Cell& cell) {
      if (const auto* i = std::get_if<long long>(&cell)) return fmt::format("{}", *i);
      if (const auto* d = std::get_if<double>(&cell)) return format_real(*d);
      return std::get<std::string>(cell);
    });
  }
  return out;
}

}  // namespace idbn
