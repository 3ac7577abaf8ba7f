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

#include "hgnn/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <random>
#include <string_view>

#include "hgnn/errors.hpp"
#include "json.hpp"

namespace hgnn {

namespace fs = std::filesystem;

Graph Graph::from_edges(int n_nodes,
                        const std::vector<std::pair<int, int>>& edges,
                        Tensor features, std::vector<int> labels,
                        int n_classes, bool keep_self_loops) {
  if (n_nodes < 0) throw ParameterError("from_edges: negative node count");
  if (!labels.empty() && labels.size() != static_cast<std::size_t>(n_nodes))
    throw DimensionError("from_edges: one label per node required");
  if (!features.empty() && features.rows() != static_cast<std::size_t>(n_nodes))
    throw DimensionError("from_edges: one feature row per node required");
  Graph g;
  g.n_nodes_ = n_nodes;
  int max_label = -1;
  for (int y : labels) {
    if (y < 0) throw IndexError("from_edges: negative label");
    max_label = std::max(max_label, y);
  }
  g.n_classes_ = n_classes >= 0 ? n_classes : max_label + 1;
  if (max_label >= g.n_classes_)
    throw IndexError("from_edges: label " + std::to_string(max_label) +
                     " >= n_classes " + std::to_string(g.n_classes_));

  std::vector<std::pair<int, int>> arcs;  // (target, source)
  arcs.reserve(edges.size() * 2);
  for (auto [u, v] : edges) {
    if (u < 0 || v < 0 || u >= n_nodes || v >= n_nodes)
      throw IndexError("from_edges: endpoint out of range (" +
                       std::to_string(u) + ", " + std::to_string(v) + ")");
    if (u == v) {
      if (keep_self_loops) arcs.emplace_back(u, u);
      continue;
    }
    arcs.emplace_back(v, u);
    arcs.emplace_back(u, v);
  }
  std::sort(arcs.begin(), arcs.end());
  arcs.erase(std::unique(arcs.begin(), arcs.end()), arcs.end());

  g.src_.resize(arcs.size());
  g.dst_.resize(arcs.size());
  g.offsets_.assign(n_nodes + 1, 0);
  for (std::size_t e = 0; e < arcs.size(); ++e) {
    g.dst_[e] = arcs[e].first;
    g.src_[e] = arcs[e].second;
    ++g.offsets_[arcs[e].first + 1];
  }
  std::partial_sum(g.offsets_.begin(), g.offsets_.end(), g.offsets_.begin());
  g.reverse_.resize(arcs.size());
  for (std::size_t e = 0; e < arcs.size(); ++e) {
    // The reverse arc (t -> s) sits in s's in-range, sorted by source.
    const int s = g.src_[e], t = g.dst_[e];
    auto first = g.src_.begin() + g.offsets_[s];
    auto last = g.src_.begin() + g.offsets_[s + 1];
    auto it = std::lower_bound(first, last, t);
    g.reverse_[e] = static_cast<int>(it - g.src_.begin());
  }
  g.features_ = std::move(features);
  g.labels_ = std::move(labels);
  return g;
}

std::size_t Graph::n_edges() const {
  std::size_t loops = 0;
  for (std::size_t e = 0; e < src_.size(); ++e) loops += src_[e] == dst_[e];
  return (src_.size() - loops) / 2 + loops;
}

std::vector<std::pair<int, int>> Graph::undirected_edges() const {
  std::vector<std::pair<int, int>> out;
  for (std::size_t e = 0; e < src_.size(); ++e)
    if (src_[e] <= dst_[e]) out.emplace_back(src_[e], dst_[e]);
  std::sort(out.begin(), out.end());
  return out;
}

// --- TSV I/O ---------------------------------------------------------------

namespace {

struct Line {
  std::size_t number;
  std::string text;
};

std::vector<Line> read_lines(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(path.string() + ": cannot open");
  std::vector<Line> out;
  std::string s;
  std::size_t n = 0;
  while (std::getline(in, s)) {
    ++n;
    if (!s.empty() && s.back() == '\r') s.pop_back();
    const auto first = s.find_first_not_of(" \t");
    if (first == std::string::npos || s[first] == '#') continue;
    out.push_back({n, std::move(s)});
  }
  return out;
}

std::vector<std::string_view> fields(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == '\t' || s[i] == ' ')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != '\t' && s[j] != ' ') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

[[noreturn]] void fail(const fs::path& p, std::size_t line,
                       const std::string& msg) {
  throw FormatError(p.filename().string() + ":" + std::to_string(line) + ": " +
                    msg);
}

template <typename T>
T parse(std::string_view s, const fs::path& p, std::size_t line) {
  T v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    fail(p, line, "cannot parse '" + std::string(s) + "'");
  return v;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

Graph load_dataset(const fs::path& dir, const LoadOptions& options) {
  if (!fs::is_directory(dir))
    throw FormatError(dir.string() + ": dataset directory not found");
  int n_classes = -1;
  std::string name = dir.filename().string();
  if (fs::exists(dir / "meta.json")) {
    std::ifstream in(dir / "meta.json");
    nlohmann::json meta;
    try {
      meta = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("meta.json: " + std::string(e.what()));
    }
    n_classes = meta.value("n_classes", -1);
    name = meta.value("name", name);
  }

  const fs::path lp = dir / "labels.tsv";
  std::vector<int> labels;
  for (const Line& l : read_lines(lp)) {
    auto f = fields(l.text);
    if (f.size() != 1) fail(lp, l.number, "expected one label");
    const int y = parse<int>(f[0], lp, l.number);
    if (y < 0 || (n_classes >= 0 && y >= n_classes))
      fail(lp, l.number, "label " + std::to_string(y) + " out of range");
    labels.push_back(y);
  }
  const int n = static_cast<int>(labels.size());

  const fs::path fp = dir / "features.tsv";
  std::vector<double> feat;
  std::size_t d = 0, rows = 0;
  for (const Line& l : read_lines(fp)) {
    auto f = fields(l.text);
    if (rows == 0) d = f.size();
    if (f.size() != d)
      fail(fp, l.number, "ragged row: " + std::to_string(f.size()) +
                             " values, expected " + std::to_string(d));
    for (auto s : f) feat.push_back(parse<double>(s, fp, l.number));
    ++rows;
  }
  if (rows != static_cast<std::size_t>(n))
    throw FormatError("features.tsv: " + std::to_string(rows) +
                      " rows but labels.tsv has " + std::to_string(n));
  Tensor x(rows, d, std::move(feat));
  if (options.row_normalize) {
    for (std::size_t i = 0; i < x.rows(); ++i) {
      double s = 0.0;
      for (double v : x.row(i)) s += std::abs(v);
      if (s > 0.0)
        for (double& v : x.row(i)) v /= s;
    }
  }

  const fs::path ep = dir / "edges.tsv";
  std::vector<std::pair<int, int>> edges;
  for (const Line& l : read_lines(ep)) {
    auto f = fields(l.text);
    if (f.size() != 2) fail(ep, l.number, "expected two node ids");
    const int u = parse<int>(f[0], ep, l.number);
    const int v = parse<int>(f[1], ep, l.number);
    if (u < 0 || v < 0 || u >= n || v >= n)
      fail(ep, l.number, "dangling endpoint (" + std::to_string(u) + ", " +
                             std::to_string(v) + ")");
    edges.emplace_back(u, v);
  }
  Graph g = Graph::from_edges(n, edges, std::move(x), std::move(labels),
                              n_classes, options.keep_self_loops);
  g.name = name;
  return g;
}

void save_dataset(const Graph& g, const fs::path& dir) {
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "edges.tsv");
    for (auto [u, v] : g.undirected_edges()) out << u << '\t' << v << '\n';
  }
  {
    std::ofstream out(dir / "features.tsv");
    const Tensor& x = g.features();
    for (std::size_t i = 0; i < x.rows(); ++i) {
      for (std::size_t j = 0; j < x.cols(); ++j) {
        if (j) out << '\t';
        out << format_double(x(i, j));
      }
      out << '\n';
    }
  }
  {
    std::ofstream out(dir / "labels.tsv");
    for (int y : g.labels()) out << y << '\n';
  }
  nlohmann::json meta = {{"n_classes", g.n_classes()}};
  if (!g.name.empty()) meta["name"] = g.name;
  std::ofstream(dir / "meta.json") << meta.dump(2) << '\n';
}

double edge_homophily(const Graph& g) {
  if (g.n_arcs() == 0) return 1.0;
  auto y = g.labels();
  auto s = g.arc_sources();
  auto t = g.arc_targets();
  std::size_t same = 0;
  for (std::size_t e = 0; e < g.n_arcs(); ++e) same += y[s[e]] == y[t[e]];
  return static_cast<double>(same) / static_cast<double>(g.n_arcs());
}

std::array<std::size_t, 3> split_sizes(std::size_t n) {
  constexpr std::array<std::size_t, 3> kPct = {48, 32, 20};
  std::array<std::size_t, 3> size{};
  std::array<std::size_t, 3> rem{};
  std::size_t used = 0;
  for (int k = 0; k < 3; ++k) {
    size[k] = n * kPct[k] / 100;
    rem[k] = n * kPct[k] % 100;
    used += size[k];
  }
  std::array<int, 3> order = {0, 1, 2};
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return rem[a] > rem[b]; });
  for (std::size_t k = 0; used < n; ++k, ++used) ++size[order[k]];
  return size;
}

Split random_split(const Graph& g, std::uint64_t seed) {
  const std::size_t n = static_cast<std::size_t>(g.n_nodes());
  if (g.n_nodes() < g.n_classes())
    throw ContractError("random_split: fewer nodes than classes");
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  // Explicit Fisher-Yates so the permutation is stable across standard
  // library implementations.
  std::mt19937_64 rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(perm[i - 1], perm[j]);
  }
  const auto sz = split_sizes(n);
  Split s;
  s.seed = seed;
  s.train.assign(perm.begin(), perm.begin() + sz[0]);
  s.val.assign(perm.begin() + sz[0], perm.begin() + sz[0] + sz[1]);
  s.test.assign(perm.begin() + sz[0] + sz[1], perm.end());
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.val.begin(), s.val.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

fs::path resolve_dataset(const std::string& name_or_path) {
  fs::path p(name_or_path);
  if (fs::is_directory(p)) return p;
  if (const char* root = std::getenv("HETEROGNN_DATA"); root && *root) {
    fs::path q = fs::path(root) / name_or_path;
    if (fs::is_directory(q)) return q;
  }
  return p;
}

}  // namespace hgnn
