// Copyright 2026 The HeteroGNN Authors.
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

// CSV and JSON output helpers shared by the CLI and the Python module.

#ifndef HGNN_REPORT_HPP_
#define HGNN_REPORT_HPP_

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

namespace hgnn {

// Shortest decimal text that round-trips the double; "nan"/"inf" spelled out.
std::string format_number(double v);

// Writes "# <tag> <UTC timestamp>" and a header, then rows. The timestamp
// line is the only non-reproducible byte range of the file.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::string& tag,
            const std::vector<std::string>& header);

  CsvWriter& add(const std::string& v);
  CsvWriter& add(double v);
  CsvWriter& add(long long v);
  CsvWriter& add(int v) { return add(static_cast<long long>(v)); }
  CsvWriter& add(unsigned long long v);
  CsvWriter& add(unsigned long v) { return add(static_cast<unsigned long long>(v)); }
  void end_row();

 private:
  std::ofstream out_;
  std::size_t columns_;
  std::vector<std::string> row_;
};

void write_json(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace hgnn

#endif  // HGNN_REPORT_HPP_
