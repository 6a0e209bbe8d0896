// Copyright 2026 The ppt Authors
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

#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace ppt::csv {

// Shortest decimal form that parses back to the same double.
std::string format(double v);

// A numeric table with a header row, as written by the library.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  // Index of a named column; throws IngestionError if absent.
  std::size_t column(std::string_view name) const;
};

void write_row(std::ostream& out, const std::vector<std::string>& cells);
void write_row(std::ostream& out, const std::vector<double>& cells);

void write_table(const std::filesystem::path& path, const Table& table);
Table read_table(const std::filesystem::path& path);
Table read_table(std::istream& in, const std::string& source_name);

}  // namespace ppt::csv
