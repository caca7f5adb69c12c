// Copyright 2026 The GridSwap Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Minimal CSV reading and writing. Fields are comma separated with no
// quoting; blank lines and lines starting with '#' are skipped.

#ifndef GRIDSWAP_CSV_H_
#define GRIDSWAP_CSV_H_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace gridswap::csv {

struct Table {
  std::string source;  // file name used in error messages
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> lines;  // 1-based source line of each row

  // Throws SchemaError naming the source when the column is missing.
  std::size_t column(std::string_view name) const;

  // Parses row[col] as a finite number; SchemaError names source and line.
  double number(std::size_t row, std::size_t col) const;
  const std::string& text(std::size_t row, std::size_t col) const { return rows[row][col]; }
};

// First non-skipped line is the header. Rows with a different field count
// throw SchemaError.
Table parse(std::string_view text, std::string source);

// Throws InputError if the file cannot be read.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

// Shortest representation that round-trips, so output is stable across
// platforms.
std::string format(double value);

std::string_view trim(std::string_view s);
std::vector<std::string> split(std::string_view line, char sep = ',');

}  // namespace gridswap::csv

#endif  // GRIDSWAP_CSV_H_
