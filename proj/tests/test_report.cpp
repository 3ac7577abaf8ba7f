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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "doctest.h"
#include "hgnn/errors.hpp"
#include "hgnn/report.hpp"

namespace hgnn {
namespace {

std::vector<std::string> lines_of(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

TEST_CASE("format_number: shortest round trip and non-finite values") {
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(3.0) == "3");
  CHECK(std::stod(format_number(1.0 / 3)) == 1.0 / 3);
  CHECK(format_number(std::numeric_limits<double>::quiet_NaN()) == "nan");
  CHECK(format_number(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(format_number(-std::numeric_limits<double>::infinity()) == "-inf");
}

TEST_CASE("CsvWriter: comment line, header, rows, column check") {
  const auto dir = std::filesystem::temp_directory_path() / "hgnn_report_test";
  std::filesystem::create_directories(dir);
  {
    CsvWriter w(dir / "a.csv", "unit", {"name", "k", "value"});
    w.add("x").add(2).add(0.5);
    w.end_row();
    w.add("y");
    CHECK_THROWS(w.end_row());
  }
  auto lines = lines_of(dir / "a.csv");
  REQUIRE(lines.size() >= 3);
  CHECK(lines[0].rfind("# unit ", 0) == 0);
  CHECK(lines[1] == "name,k,value");
  CHECK(lines[2] == "x,2,0.5");

  write_json(dir / "c.json", {{"a", 1}});
  std::ifstream in(dir / "c.json");
  CHECK(nlohmann::json::parse(in)["a"] == 1);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace hgnn
