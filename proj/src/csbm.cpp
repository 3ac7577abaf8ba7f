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

#include "hgnn/csbm.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <utility>

#include "hgnn/errors.hpp"

namespace hgnn {

void CsbmParams::validate() const {
  if (n_classes < 1) throw ParameterError("csbm: n_classes must be >= 1");
  if (n_nodes < n_classes || n_nodes % n_classes != 0)
    throw ParameterError("csbm: n_nodes must be a positive multiple of C");
  if (!(p >= 0.0 && p <= 1.0) || !(q >= 0.0 && q <= 1.0))
    throw ParameterError("csbm: p and q must lie in [0, 1]");
  if (!(feature_variance >= 0.0))
    throw ParameterError("csbm: feature variance must be >= 0");
  if (means.rows() != static_cast<std::size_t>(n_classes) || means.cols() == 0)
    throw ParameterError("csbm: means must be C×f with f >= 1");
}

CsbmParams multiclass_example() {
  CsbmParams p;
  p.means = Tensor(3, 1, {-0.5, 0.0, 0.5});
  return p;
}

CsbmParams binary_example() {
  CsbmParams p;
  p.n_classes = 2;
  p.means = Tensor(2, 1, {-0.25, 0.25});
  return p;
}

namespace {

// Visits every index in [begin, end) independently with probability prob,
// using geometric gaps so sparse regimes cost O(hits).
template <typename Rng, typename F>
void bernoulli_run(Rng& rng, int begin, int end, double prob, F&& hit) {
  if (prob <= 0.0 || begin >= end) return;
  if (prob >= 1.0) {
    for (int j = begin; j < end; ++j) hit(j);
    return;
  }
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double log_q = std::log1p(-prob);
  double j = begin - 1;
  while (true) {
    const double r = 1.0 - u(rng);  // (0, 1]
    j += 1.0 + std::floor(std::log(r) / log_q);
    if (j >= end) break;
    hit(static_cast<int>(j));
  }
}

}  // namespace

SignedGraphSample sample_csbm(const CsbmParams& params) {
  params.validate();
  const int n = params.n_nodes;
  const int c = params.n_classes;
  const int block = n / c;
  std::mt19937_64 rng(params.seed);
  SignedGraphSample s;
  s.labels.resize(n);
  for (int i = 0; i < n; ++i) s.labels[i] = i / block;

  std::vector<Triplet> t;
  for (int i = 0; i < n; ++i) {
    const int end_same = (s.labels[i] + 1) * block;
    bernoulli_run(rng, i + 1, end_same, params.p, [&](int j) {
      t.push_back({i, j, 1.0});
      t.push_back({j, i, 1.0});
    });
    bernoulli_run(rng, end_same, n, params.q, [&](int j) {
      t.push_back({i, j, -1.0});
      t.push_back({j, i, -1.0});
    });
  }
  s.adjacency = SparseMatrix::from_triplets(n, n, std::move(t));
  s.abs_degree.assign(n, 0.0);
  auto ptr = s.adjacency.row_ptr();
  auto val = s.adjacency.values();
  for (int i = 0; i < n; ++i)
    for (int k = ptr[i]; k < ptr[i + 1]; ++k) s.abs_degree[i] += std::abs(val[k]);

  const std::size_t f = params.feature_dim();
  const double sd = std::sqrt(params.feature_variance);
  std::normal_distribution<double> nd(0.0, 1.0);
  s.features = Tensor(n, f);
  for (int i = 0; i < n; ++i)
    for (std::size_t k = 0; k < f; ++k)
      s.features(i, k) = params.means(s.labels[i], k) + sd * nd(rng);
  return s;
}

NormalizedSample signed_normalize(const SignedGraphSample& sample) {
  NormalizedSample out;
  const int n = sample.adjacency.rows();
  for (int i = 0; i < n; ++i)
    (sample.abs_degree[i] > 0.0 ? out.kept : out.dropped).push_back(i);
  if (!out.dropped.empty())
    out.warnings.push_back("dropped " + std::to_string(out.dropped.size()) +
                           " isolated node(s) before normalization");
  SparseMatrix a = sample.adjacency.principal(out.kept);
  std::vector<double> inv_sqrt(out.kept.size());
  for (std::size_t r = 0; r < out.kept.size(); ++r)
    inv_sqrt[r] = 1.0 / std::sqrt(sample.abs_degree[out.kept[r]]);
  auto ptr = a.row_ptr();
  auto col = a.col_idx();
  auto val = a.mutable_values();
  for (int i = 0; i < a.rows(); ++i)
    for (int k = ptr[i]; k < ptr[i + 1]; ++k)
      val[k] *= inv_sqrt[i] * inv_sqrt[col[k]];
  out.propagation = std::move(a);
  const std::size_t f = sample.features.cols();
  out.features = Tensor(out.kept.size(), f);
  for (std::size_t r = 0; r < out.kept.size(); ++r) {
    auto src = sample.features.row(out.kept[r]);
    std::copy(src.begin(), src.end(), out.features.row(r).begin());
    out.labels.push_back(sample.labels[out.kept[r]]);
  }
  return out;
}

double expected_degree(const CsbmParams& params) {
  const double per = static_cast<double>(params.n_nodes) / params.n_classes;
  return per * (params.p + (params.n_classes - 1) * params.q);
}

double expected_abs_degree(const CsbmParams& params) {
  const double per = static_cast<double>(params.n_nodes) / params.n_classes;
  return (per - 1.0) * params.p + (params.n_classes - 1) * per * params.q;
}

Tensor expected_operator(const CsbmParams& params) {
  const double d = expected_degree(params);
  if (!(d > 0.0))
    throw ParameterError("expected_operator: p + (C-1)q must be positive");
  const int c = params.n_classes;
  Tensor e(c, c);
  for (int i = 0; i < c; ++i)
    for (int j = 0; j < c; ++j) e(i, j) = i == j ? params.p / d : -params.q / d;
  return e;
}

Graph to_graph(const SignedGraphSample& sample, std::string name) {
  std::vector<std::pair<int, int>> edges;
  for (const Triplet& t : sample.adjacency.triplets())
    if (t.row < t.col) edges.emplace_back(t.row, t.col);
  int c = 0;
  for (int y : sample.labels) c = std::max(c, y + 1);
  Graph g = Graph::from_edges(static_cast<int>(sample.labels.size()), edges,
                              sample.features, sample.labels, c);
  g.name = std::move(name);
  return g;
}

}  // namespace hgnn
