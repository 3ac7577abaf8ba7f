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

#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <set>

#include "doctest.h"
#include "hgnn/errors.hpp"
#include "hgnn/graph.hpp"
#include "support/test_util.hpp"

namespace hgnn {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("hgnn_graph_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

fs::path triangle_dir(const std::string& name) {
  fs::path d = scratch(name);
  write(d / "edges.tsv", "# triangle\n0\t1\n1\t2\n2\t0\n1\t0\n");
  write(d / "features.tsv", "1\t0\n0\t1\n0.5\t0.25\n");
  write(d / "labels.tsv", "0\n1\n1\n");
  return d;
}

TEST_CASE("load_dataset: triangle gives six arcs; duplicates merged") {
  Graph g = load_dataset(triangle_dir("tri"));
  CHECK(g.n_nodes() == 3);
  CHECK(g.n_arcs() == 6);
  CHECK(g.n_edges() == 3);
  CHECK(g.n_classes() == 2);
  CHECK(g.feature_dim() == 2);
}

TEST_CASE("graph invariants: reverse arcs, sorted CSR, no self-loops") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 30; ++trial) {
    Graph g = testing::random_graph(rng, testing::random_int(rng, 1, 15), 3, 0.3);
    auto s = g.arc_sources();
    auto t = g.arc_targets();
    auto rev = g.reverse_arc();
    auto off = g.in_offsets();
    for (std::size_t e = 0; e < g.n_arcs(); ++e) {
      CHECK(s[e] != t[e]);
      CHECK(s[rev[e]] == t[e]);
      CHECK(t[rev[e]] == s[e]);
      CHECK(static_cast<int>(e) >= off[t[e]]);
      CHECK(static_cast<int>(e) < off[t[e] + 1]);
    }
  }
  // Explicit self-loop handling.
  Graph a = Graph::from_edges(2, {{0, 0}, {0, 1}}, Tensor(2, 1), {0, 0});
  CHECK(a.n_arcs() == 2);
  Graph b = Graph::from_edges(2, {{0, 0}, {0, 1}}, Tensor(2, 1), {0, 0}, -1, true);
  CHECK(b.n_arcs() == 3);
}

TEST_CASE("load_dataset: format errors name file and line") {
  auto expect = [](const fs::path& d, const std::string& needle) {
    try {
      load_dataset(d);
      FAIL("expected FormatError");
    } catch (const FormatError& e) {
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
  };
  {
    fs::path d = triangle_dir("ragged");
    write(d / "features.tsv", "1\t0\n0\n0.5\t0.25\n");
    expect(d, "features.tsv:2");
  }
  {
    fs::path d = triangle_dir("dangling");
    write(d / "edges.tsv", "0\t1\n# c\n1\t7\n");
    expect(d, "edges.tsv:3");
  }
  {
    fs::path d = triangle_dir("label_range");
    write(d / "meta.json", "{\"n_classes\": 2}");
    write(d / "labels.tsv", "0\n5\n1\n");
    expect(d, "labels.tsv:2");
  }
  {
    fs::path d = triangle_dir("negative_label");
    write(d / "labels.tsv", "0\n-1\n1\n");
    expect(d, "labels.tsv:2");
  }
  CHECK_THROWS_AS(load_dataset(scratch("missing") / "nope"), FormatError);
}

TEST_CASE("save then load round-trips edges, features and labels exactly") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    Graph g = testing::random_graph(rng, testing::random_int(rng, 2, 20), 4, 0.25, 5);
    fs::path d = scratch("roundtrip" + std::to_string(trial));
    save_dataset(g, d);
    Graph h = load_dataset(d);
    CHECK(h.undirected_edges() == g.undirected_edges());
    CHECK(h.features().data() == g.features().data());
    CHECK(std::vector<int>(h.labels().begin(), h.labels().end()) ==
          std::vector<int>(g.labels().begin(), g.labels().end()));
    CHECK(h.n_classes() == g.n_classes());
  }
}

TEST_CASE("row_normalize flag scales rows to unit L1 mass") {
  fs::path d = triangle_dir("norm");
  Graph g = load_dataset(d, {.row_normalize = true});
  CHECK(g.features()(2, 0) == doctest::Approx(0.5 / 0.75));
  Graph raw = load_dataset(d);
  CHECK(raw.features()(2, 0) == 0.5);
}

TEST_CASE("edge_homophily: single class, hand example, relabel invariance") {
  Graph one = Graph::from_edges(3, {{0, 1}, {1, 2}}, Tensor(3, 1), {0, 0, 0});
  CHECK(edge_homophily(one) == 1.0);
  Graph g = Graph::from_edges(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}}, Tensor(4, 1),
                              {0, 0, 1, 1});
  CHECK(edge_homophily(g) == doctest::Approx(0.5));

  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    Graph a = testing::random_graph(rng, 12, 3, 0.3);
    std::vector<int> perm(12);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<std::pair<int, int>> edges;
    for (auto [u, v] : a.undirected_edges()) edges.emplace_back(perm[u], perm[v]);
    std::vector<int> y(12);
    for (int i = 0; i < 12; ++i) y[perm[i]] = a.labels()[i];
    Graph b = Graph::from_edges(12, edges, Tensor(12, 1), y, 3);
    CHECK(edge_homophily(a) == doctest::Approx(edge_homophily(b)).epsilon(1e-15));
  }
}

TEST_CASE("split sizes follow the largest-remainder rule") {
  CHECK(split_sizes(100) == std::array<std::size_t, 3>{48, 32, 20});
  // 183·(.48,.32,.20) = (87.84, 58.56, 36.6): floors (87,58,36), one unit left
  // goes to the largest remainder (.84).
  CHECK(split_sizes(183) == std::array<std::size_t, 3>{88, 58, 37});
  for (std::size_t n = 0; n < 500; ++n) {
    auto s = split_sizes(n);
    CHECK(s[0] + s[1] + s[2] == n);
    CHECK(std::abs(static_cast<double>(s[0]) - 0.48 * n) < 1.0);
    CHECK(std::abs(static_cast<double>(s[1]) - 0.32 * n) < 1.0);
    CHECK(std::abs(static_cast<double>(s[2]) - 0.20 * n) < 1.0);
  }
}

TEST_CASE("random_split: disjoint cover, deterministic, seeds differ") {
  std::mt19937_64 rng(2);
  Graph g = testing::random_graph(rng, 183, 5, 0.02);
  Split a = random_split(g, 7);
  Split b = random_split(g, 7);
  CHECK(a.train == b.train);
  CHECK(a.val == b.val);
  CHECK(a.test == b.test);
  std::set<int> all;
  for (const auto* part : {&a.train, &a.val, &a.test})
    for (int i : *part) CHECK(all.insert(i).second);
  CHECK(all.size() == 183);
  std::set<std::vector<int>> distinct;
  for (std::uint64_t s = 0; s < 10; ++s) distinct.insert(random_split(g, s).train);
  CHECK(distinct.size() == 10);
  Graph tiny = Graph::from_edges(2, {}, Tensor(2, 1), {0, 2}, 3);
  CHECK_THROWS_AS(random_split(tiny, 1), ContractError);
}

}  // namespace
}  // namespace hgnn
