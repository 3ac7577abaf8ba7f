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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <random>

#include "doctest.h"
#include "hgnn/csbm.hpp"
#include "hgnn/errors.hpp"
#include "hgnn/train.hpp"
#include "support/test_util.hpp"

namespace hgnn {
namespace {

using testing::random_int;
using testing::random_tensor;

// Small two-class CSBM graph with well separated class means.
Graph toy_graph(std::uint64_t seed, int n = 20) {
  CsbmParams p;
  p.n_nodes = n;
  p.n_classes = 2;
  p.p = 0.4;
  p.q = 0.15;
  p.means = Tensor::from_rows({{-1.5, 1.0, 0.0, -0.5}, {1.5, -1.0, 0.5, 0.0}});
  p.seed = seed;
  return to_graph(sample_csbm(p), "toy");
}

TrainConfig toy_config() {
  TrainConfig c;
  c.model.hidden = 8;
  c.model.chunks = 2;
  c.model.layers = 2;
  c.model.keep_prob = 0.8;
  c.max_epochs = 200;
  c.patience = 50;
  return c;
}

Tensor one_hot_source(const Graph& g) {
  Tensor s(g.n_arcs(), g.n_classes());
  for (std::size_t e = 0; e < g.n_arcs(); ++e)
    s(e, g.labels()[g.arc_sources()[e]]) = 1.0;
  return s;
}

TEST_CASE("TrainConfig: JSON round trip and unknown keys") {
  TrainConfig c = toy_config();
  c.model.lambda = 0.1;
  nlohmann::json j = c;
  CHECK(nlohmann::json(j.get<TrainConfig>()) == j);
  j["epochs"] = 3;
  CHECK_THROWS(j.get<TrainConfig>());
  TrainConfig bad = c;
  bad.lr = -1;
  CHECK_THROWS_AS(bad.validate(), ParameterError);
}

TEST_CASE("shipped experiment configs parse and validate") {
  for (const char* name : {"texas", "wisconsin", "cornell", "cora"}) {
    ExperimentConfig c = load_experiment(std::filesystem::path(HGNN_SOURCE_DIR) /
                                         "configs" / (std::string(name) + ".json"));
    CHECK(c.dataset == name);
    CHECK(c.n_splits == 10);
    CHECK(c.train.model.hidden % c.train.model.chunks == 0);
  }
  CHECK_THROWS_AS(load_experiment("/nonexistent/config.json"), FormatError);
}

TEST_CASE("accuracy: perfect logits and lowest-index tie-break") {
  Tensor perfect = Tensor::from_rows({{1, 0}, {0, 1}, {3, -1}});
  const std::vector<int> y = {0, 1, 0}, all = {0, 1, 2};
  CHECK(accuracy(perfect, y, all) == 1.0);
  Tensor flat(3, 2, 0.25);
  CHECK(argmax_rows(flat) == std::vector<int>{0, 0, 0});
  CHECK(accuracy(flat, y, all) == doctest::Approx(2.0 / 3));
}

TEST_CASE("train: separable two-class toy reaches 0.9 test accuracy") {
  Graph g = toy_graph(1);
  Split split = random_split(g, 4);
  TrainRecord r = train(g, toy_config(), split, 7);
  CHECK(r.test_acc >= 0.9);
}

TEST_CASE("train: deterministic per seed; best checkpoint drives test accuracy") {
  Graph g = toy_graph(2, 40);
  Split split = random_split(g, 1);
  TrainConfig cfg = toy_config();
  cfg.patience = 10;
  TrainRecord a = train(g, cfg, split, 3), b = train(g, cfg, split, 3);
  REQUIRE(a.epochs.size() == b.epochs.size());
  for (std::size_t i = 0; i < a.epochs.size(); ++i) {
    CHECK(a.epochs[i].train_loss == b.epochs[i].train_loss);
    CHECK(a.epochs[i].val_acc == b.epochs[i].val_acc);
  }
  CHECK(a.test_acc == b.test_acc);

  // Best epoch maximizes validation accuracy; patience bounds the run.
  double best = 0.0;
  for (const EpochRecord& e : a.epochs) best = std::max(best, e.val_acc);
  REQUIRE(a.best_epoch >= 0);
  CHECK(a.epochs[a.best_epoch].val_acc == best);
  CHECK(a.best_val_acc == best);
  CHECK(static_cast<int>(a.epochs.size()) <= a.best_epoch + cfg.patience + 1);
  CHECK(a.test_acc == evaluate(g, cfg.model, a.best_params, split.test));
}

TEST_CASE("train: divergence is reported, not swallowed") {
  Graph g = toy_graph(3);
  TrainConfig cfg = toy_config();
  cfg.lr = 1e300;
  cfg.max_epochs = 20;
  CHECK_THROWS_AS(train(g, cfg, random_split(g, 0), 0), DivergenceError);
  MultiSplitResult r = run_splits(g, cfg, 2, 0);
  CHECK(!r.finite);
  CHECK(!r.error.empty());
}

TEST_CASE("run_splits and depth_sweep: shapes and jobs invariance") {
  Graph g = toy_graph(4, 30);
  TrainConfig cfg = toy_config();
  cfg.max_epochs = 15;
  MultiSplitResult a = run_splits(g, cfg, 3, 9, 1);
  MultiSplitResult b = run_splits(g, cfg, 3, 9, 3);
  REQUIRE(a.splits.size() == 3);
  CHECK(a.finite);
  for (int s = 0; s < 3; ++s) CHECK(a.splits[s].test_acc == b.splits[s].test_acc);
  CHECK(a.mean_acc == b.mean_acc);

  const std::vector<int> depths = {2, 4};
  auto sweep = depth_sweep(g, cfg, depths, 1, 0);
  REQUIRE(sweep.size() == 2);
  CHECK(sweep[1].layers == 4);

  cfg.max_epochs = 3;
  const std::vector<int> deep = {64};
  auto d64 = depth_sweep(g, cfg, deep, 1, 0);
  CHECK(d64[0].result.finite);
  CHECK(std::isfinite(d64[0].result.mean_acc));
}

TEST_CASE("summarize_attention: oracle scores align on the diagonal") {
  std::mt19937_64 rng(5);
  Graph g = testing::random_graph(rng, 30, 3, 0.3);
  const std::vector<Tensor> layers = {one_hot_source(g)};
  AttentionSummary s = summarize_attention(g, layers);
  CHECK(s.diagonal_dominant_columns == 3);
  for (int c = 0; c < 3; ++c) {
    double tot = 0.0;
    for (double v : s.alignment.row(c)) tot += v;
    CHECK(tot == doctest::Approx(1.0));
    for (int r = 0; r < 3; ++r)
      if (r != c) CHECK(s.alignment(c, c) > s.alignment(r, c));
  }
  std::vector<int> sorted = s.permutation;
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted == std::vector<int>{0, 1, 2});
}

TEST_CASE("summarize_attention: random scores give near-uniform rows") {
  std::mt19937_64 rng(6);
  Graph g = testing::random_graph(rng, 200, 3, 0.1);
  Tensor raw = random_tensor(g.n_arcs(), 3, rng, 0.0, 1.0);
  for (std::size_t e = 0; e < raw.rows(); ++e) {
    double t = raw(e, 0) + raw(e, 1) + raw(e, 2);
    for (double& v : raw.row(e)) v /= t;
  }
  const std::vector<Tensor> layers = {raw};
  AttentionSummary s = summarize_attention(g, layers);
  for (double v : s.alignment.data()) CHECK(std::abs(v - 1.0 / 3) < 0.02);
}

TEST_CASE("summarize_attention: relabelling classes permutes the matrix") {
  std::mt19937_64 rng(7);
  Graph g = testing::random_graph(rng, 60, 3, 0.2);
  Tensor sc = one_hot_source(g);
  // Soften so the matrix is not trivially symmetric.
  for (std::size_t e = 0; e < sc.rows(); ++e)
    for (int t = 0; t < 3; ++t)
      sc(e, t) = 0.7 * sc(e, t) + 0.3 * (t == 0 ? 0.6 : 0.2);
  const std::vector<int> pi = {2, 0, 1};
  std::vector<int> y(g.n_nodes());
  for (int i = 0; i < g.n_nodes(); ++i) y[i] = pi[g.labels()[i]];
  Graph h = Graph::from_edges(g.n_nodes(), g.undirected_edges(), g.features(), y, 3);
  const std::vector<Tensor> a = {sc};
  AttentionSummary sa = summarize_attention(g, a);
  AttentionSummary sb = summarize_attention(h, a);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c)
      CHECK(sb.alignment(pi[r], pi[c]) == doctest::Approx(sa.alignment(r, c)));
}

TEST_CASE("attention_analysis: refuses when chunks differ from classes") {
  Graph g = toy_graph(8);
  M2mConfig cfg = toy_config().model;
  cfg.chunks = 4;
  M2mParams p = init_params(cfg, g.feature_dim(), 2, 0);
  CHECK_THROWS_AS(attention_analysis(g, cfg, p), ParameterError);
}

TEST_CASE("mixing_score: uniform, oracle, homophilic-only, endpoint symmetry") {
  std::mt19937_64 rng(9);
  Graph g = testing::random_graph(rng, 25, 3, 0.3);
  CHECK(mixing_score(g, Tensor(g.n_arcs(), 3, 1.0 / 3)) == 0.0);
  CHECK(mixing_score(g, one_hot_source(g)) == 1.0);

  Graph homo = Graph::from_edges(3, {{0, 1}, {1, 2}}, Tensor(3, 1), {0, 0, 0}, 1);
  CHECK(std::isnan(mixing_score(homo, Tensor(homo.n_arcs(), 2, 0.5))));

  // Reversing node order flips which endpoint is the source.
  Tensor raw = random_tensor(g.n_arcs(), 3, rng, 0.0, 1.0);
  const int n = g.n_nodes();
  std::vector<std::pair<int, int>> edges;
  for (auto [u, v] : g.undirected_edges()) edges.emplace_back(n - 1 - u, n - 1 - v);
  std::vector<int> y(n);
  for (int i = 0; i < n; ++i) y[n - 1 - i] = g.labels()[i];
  Graph rev = Graph::from_edges(n, edges, g.features(), y, 3);
  Tensor moved(rev.n_arcs(), 3);
  for (std::size_t e = 0; e < g.n_arcs(); ++e) {
    const int s = n - 1 - g.arc_sources()[e], t = n - 1 - g.arc_targets()[e];
    for (std::size_t f = 0; f < rev.n_arcs(); ++f)
      if (rev.arc_sources()[f] == s && rev.arc_targets()[f] == t)
        for (int c = 0; c < 3; ++c) moved(f, c) = raw(e, c);
  }
  CHECK(mixing_score(g, raw) == mixing_score(rev, moved));
}

TEST_CASE("ablate: one row per grid cell") {
  Graph g = toy_graph(10, 30);
  TrainConfig cfg = toy_config();
  cfg.max_epochs = 5;
  const std::vector<std::pair<int, double>> grid = {
      {2, 0.0}, {2, 0.5}, {4, 0.0}, {4, 0.5}};
  AblationOptions opt;
  opt.n_splits = 1;
  opt.deep_layers = 3;
  auto cells = ablate(g, cfg, grid, 0, opt);
  REQUIRE(cells.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(cells[i].chunks == grid[i].first);
    CHECK(cells[i].lambda == grid[i].second);
    CHECK(cells[i].best_acc >= 0.0);
    CHECK(std::isfinite(cells[i].acc_k32));
  }
}

}  // namespace
}  // namespace hgnn
