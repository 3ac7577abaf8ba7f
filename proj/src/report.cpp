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

#include "hgnn/report.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <stdexcept>

namespace hgnn {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

namespace {

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(
      std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + '"';
}

}  // namespace

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::string& tag,
                     const std::vector<std::string>& header)
    : columns_(header.size()) {
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  out_.open(path);
  if (!out_) throw std::runtime_error(path.string() + ": cannot write");
  out_ << "# " << tag << ' ' << utc_timestamp() << '\n';
  for (std::size_t i = 0; i < header.size(); ++i)
    out_ << (i ? "," : "") << quote(header[i]);
  out_ << '\n';
}

CsvWriter& CsvWriter::add(const std::string& v) {
  row_.push_back(quote(v));
  return *this;
}

CsvWriter& CsvWriter::add(double v) {
  row_.push_back(format_number(v));
  return *this;
}

CsvWriter& CsvWriter::add(long long v) {
  row_.push_back(std::to_string(v));
  return *this;
}

CsvWriter& CsvWriter::add(unsigned long long v) {
  row_.push_back(std::to_string(v));
  return *this;
}

void CsvWriter::end_row() {
  if (row_.size() != columns_)
    throw std::logic_error("CsvWriter: row has " + std::to_string(row_.size()) +
                           " fields, header has " + std::to_string(columns_));
  for (std::size_t i = 0; i < row_.size(); ++i)
    out_ << (i ? "," : "") << row_[i];
  out_ << '\n';
  out_.flush();
  row_.clear();
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path.string() + ": cannot write");
  out << j.dump(2) << '\n';
}

}  // namespace hgnn
