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
#include <numeric>
#include <random>

#include "doctest.h"
#include "hgnn/errors.hpp"
#include "hgnn/m2m_theory.hpp"
#include "hgnn/smp.hpp"
#include "support/test_util.hpp"

namespace hgnn {
namespace {

using testing::random_int;
using testing::random_tensor;

VectorMultiset column(std::vector<double> v) {
  const std::size_t n = v.size();
  return {Tensor(n, 1, std::move(v)), {}};
}

Partition partition(std::vector<int> g, int n) { return {std::move(g), n}; }

// Random multiset with integer entries in [-3, 3].
VectorMultiset small_multiset(std::mt19937_64& rng, int n, int f) {
  VectorMultiset s{Tensor(n, f), {}};
  for (double& v : s.elements.data()) v = random_int(rng, -3, 3);
  return s;
}

Partition random_partition(std::mt19937_64& rng, int n, int groups) {
  Partition p{std::vector<int>(n), groups};
  for (int& g : p.group) g = random_int(rng, 0, groups - 1);
  return p;
}

// Puts every element that attains a componentwise maximum of x·W into group
// 0 and scatters the rest.
Partition max_isolating(std::mt19937_64& rng, const VectorMultiset& s,
                        const Tensor& w, int groups) {
  const Tensor y = matmul_plain(s.elements, w);
  Partition p = random_partition(rng, static_cast<int>(s.size()), groups);
  for (std::size_t j = 0; j < y.cols(); ++j) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < y.rows(); ++i)
      if (y(i, j) > y(best, j)) best = i;
    p.group[best] = 0;
  }
  return p;
}

TEST_CASE("phi_pool: singleton, arithmetic, empty set, unknown mode") {
  const Tensor id = Tensor::identity(2);
  VectorMultiset one{Tensor::from_rows({{1.5, -2.0}}), {}};
  for (Pool m : {Pool::kSum, Pool::kMean, Pool::kMax})
    CHECK(phi_pool(one, id, m) == std::vector<double>{1.5, -2.0});

  const Tensor id1 = Tensor::identity(1);
  VectorMultiset s = column({1, 3});
  CHECK(phi_pool(s, id1, Pool::kSum)[0] == 4.0);
  CHECK(phi_pool(s, id1, Pool::kMean)[0] == 2.0);
  CHECK(phi_pool(s, id1, Pool::kMax)[0] == 3.0);

  const std::vector<int> none;
  for (Pool m : {Pool::kSum, Pool::kMean, Pool::kMax})
    CHECK(phi_pool(s.elements, none, id1, m) == std::vector<double>{0.0});

  CHECK(parse_pool("mean") == Pool::kMean);
  CHECK_THROWS_AS(parse_pool("median"), ParameterError);
  CHECK_THROWS_AS(phi_pool(s, id, Pool::kSum), DimensionError);
}

TEST_CASE("m2m_pool: one group reduces to phi_pool bit-identically") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = random_int(rng, 1, 6), f = random_int(rng, 1, 3);
    VectorMultiset s{random_tensor(n, f, rng), {}};
    Tensor w = random_tensor(f, random_int(rng, 1, 3), rng);
    for (Pool m : {Pool::kSum, Pool::kMean, Pool::kMax})
      CHECK(m2m_pool(s, single_group(n), w, m) == phi_pool(s, w, m));
  }
}

TEST_CASE("m2m_pool: {1,3} and {2,2} split into singletons") {
  const Tensor id = Tensor::identity(1);
  VectorMultiset a = column({1, 3}), b = column({2, 2});
  const Partition split = partition({0, 1}, 2);
  CHECK(m2m_pool(a, split, id, Pool::kSum) == std::vector<double>{1, 3});
  CHECK(m2m_pool(b, split, id, Pool::kSum) == std::vector<double>{2, 2});
  CHECK(phi_pool(a, id, Pool::kSum) == phi_pool(b, id, Pool::kSum));
  // Mean divides every group by the full size.
  CHECK(m2m_pool(a, split, id, Pool::kMean) == std::vector<double>{0.5, 1.5});
  // Empty groups pool to zero.
  CHECK(m2m_pool(a, partition({0, 0}, 2), id, Pool::kMax) ==
        std::vector<double>{3, 0});
  CHECK_THROWS_AS(m2m_pool(a, partition({0, 2}, 2), id, Pool::kSum),
                  IndexError);
}

TEST_CASE("label_partition groups strictly by tag") {
  const std::vector<int> tags = {2, 0, 2, 1, 0};
  Partition p = label_partition(tags, 3);
  CHECK(p.n_groups == 3);
  CHECK(p.group == tags);
  VectorMultiset s{Tensor(5, 1, {1, 2, 3, 4, 5}), tags};
  CHECK(m2m_pool(s, p, Tensor::identity(1), Pool::kSum) ==
        std::vector<double>{7, 4, 4});
  const std::vector<int> bad = {0, 3};
  CHECK_THROWS(label_partition(bad, 3));
}

TEST_CASE("one_hop_desirable_m2m: isolated node and a hand-built star") {
  // Node 0 (class 2) sees 1, 2 (class 0) and 3 (class 1); node 4 isolated.
  std::mt19937_64 rng(2);
  Tensor h = random_tensor(5, 2, rng);
  Graph g = Graph::from_edges(5, {{0, 1}, {0, 2}, {0, 3}}, h, {2, 0, 0, 1, 1}, 3);
  Tensor m = one_hop_desirable_m2m(h, g, g.labels(), 3, Tensor::identity(2),
                                   Pool::kSum);
  REQUIRE(m.cols() == 6);
  for (int j = 0; j < 2; ++j) {
    CHECK(m(0, j) == doctest::Approx(h(1, j) + h(2, j)));
    CHECK(m(0, 2 + j) == h(3, j));
    CHECK(m(0, 4 + j) == 0.0);
  }
  for (double v : m.row(4)) CHECK(v == 0.0);
}

TEST_CASE("d_hop_oracle: d=1 equals one hop; path walks by hand") {
  std::mt19937_64 rng(3);
  Graph g = testing::random_graph(rng, 8, 3, 0.4);
  const std::vector<Tensor> w = {random_tensor(3, 2, rng)};
  Tensor a = d_hop_oracle(g.features(), g, g.labels(), 3, 1, w);
  Tensor b = one_hop_desirable_m2m(g.features(), g, g.labels(), 3, w[0],
                                   Pool::kSum);
  CHECK(max_abs_diff(a, b) < 1e-12);

  // Path 0-1-2 with labels (0,1,2). Walks of length 2 from node 0 are
  // 0→1→0 (labels 1,0 → block 3) and 0→1→2 (labels 1,2 → block 5).
  Tensor h(3, 1, {1, 10, 100});
  Graph path = Graph::from_edges(3, {{0, 1}, {1, 2}}, h, {0, 1, 2}, 3);
  const std::vector<Tensor> id = {Tensor::identity(1), Tensor::identity(1)};
  Tensor t = d_hop_oracle(h, path, path.labels(), 3, 2, id);
  REQUIRE(t.cols() == 9);
  for (int blk = 0; blk < 9; ++blk) {
    const double want = blk == 3 ? 1.0 : blk == 5 ? 100.0 : 0.0;
    CHECK(t(0, blk) == want);
  }
  CHECK_THROWS_AS(d_hop_oracle(h, path, path.labels(), 3, 2, id, 8),
                  ParameterError);
}

TEST_CASE("stacked one-hop layers equal the d-hop walk oracle (property)") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 150; ++trial) {
    const int n = random_int(rng, 2, 12), c = random_int(rng, 1, 3);
    const int d = random_int(rng, 1, 3);
    Graph g = testing::random_graph(rng, n, c, 0.3, 2);
    std::vector<Tensor> w;
    std::size_t width = 2;
    const bool identity = trial % 2 == 0;
    for (int l = 0; l < d; ++l) {
      const std::size_t next = identity ? width : random_int(rng, 1, 3);
      w.push_back(identity ? Tensor::identity(width)
                           : random_tensor(width, next, rng));
      width = next;
    }
    Tensor stacked = stacked_one_hop(g.features(), g, g.labels(), c, d, w);
    Tensor oracle = d_hop_oracle(g.features(), g, g.labels(), c, d, w);
    REQUIRE(stacked.same_shape(oracle));
    CHECK(max_abs_diff(stacked, oracle) < 1e-9);
  }
}

TEST_CASE("distance_compare: identical inputs and the {1,3}/{2,2} example") {
  const Tensor id = Tensor::identity(1);
  VectorMultiset a = column({1, 3}), b = column({2, 2});
  const Partition split = partition({0, 1}, 2);
  DistancePair same = distance_compare(a, a, split, split, id, Pool::kSum);
  CHECK(same.m2m == 0.0);
  CHECK(same.m2e == 0.0);
  DistancePair d = distance_compare(a, b, split, split, id, Pool::kSum);
  CHECK(d.m2e == 0.0);
  CHECK(d.m2m == doctest::Approx(std::sqrt(2.0)));
  CHECK(d.m2m_l21 == doctest::Approx(2.0));
}

TEST_CASE("distance_compare: concatenation norm alone does not dominate") {
  // {1,1} vs {0,0} in singletons: block distances 1 and 1.
  const Tensor id = Tensor::identity(1);
  const Partition split = partition({0, 1}, 2);
  DistancePair d = distance_compare(column({1, 1}), column({0, 0}), split,
                                    split, id, Pool::kSum);
  CHECK(d.m2e == 2.0);
  CHECK(d.m2m == doctest::Approx(std::sqrt(2.0)));
  CHECK(d.m2m < d.m2e);
  CHECK(d.m2m_l21 >= d.m2e);
}

TEST_CASE("distance_compare: block-summed m2m distance dominates m2e") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10000; ++trial) {
    const int f = random_int(rng, 1, 3), fo = random_int(rng, 1, 3);
    const int na = random_int(rng, 1, 5), nb = random_int(rng, 1, 5);
    const int groups = random_int(rng, 1, 3);
    VectorMultiset a{random_tensor(na, f, rng), {}};
    VectorMultiset b{random_tensor(nb, f, rng), {}};
    Tensor w = random_tensor(f, fo, rng);
    for (Pool m : {Pool::kSum, Pool::kMean}) {
      DistancePair d = distance_compare(a, b, random_partition(rng, na, groups),
                                        random_partition(rng, nb, groups), w, m);
      CHECK(d.m2m_l21 >= d.m2e - 1e-12);
    }
    // Max: componentwise maxima gathered into the first group.
    DistancePair d = distance_compare(a, b, max_isolating(rng, a, w, groups),
                                      max_isolating(rng, b, w, groups), w,
                                      Pool::kMax);
    CHECK(d.m2m >= d.m2e - 1e-12);
    CHECK(d.m2m_l21 >= d.m2e - 1e-12);
  }
}

TEST_CASE("discriminative containment: m2e differs implies m2m differs") {
  std::mt19937_64 rng(6);
  int distinguished = 0;
  for (int trial = 0; trial < 20000; ++trial) {
    const int f = random_int(rng, 1, 3);
    const int na = random_int(rng, 1, 5), nb = random_int(rng, 1, 5);
    const int groups = random_int(rng, 1, 3);
    VectorMultiset a = small_multiset(rng, na, f), b = small_multiset(rng, nb, f);
    const Tensor id = Tensor::identity(f);
    for (Pool m : {Pool::kSum, Pool::kMean}) {
      const Partition pa = random_partition(rng, na, groups);
      const Partition pb = random_partition(rng, nb, groups);
      if (phi_pool(a, id, m) != phi_pool(b, id, m)) {
        CHECK(m2m_pool(a, pa, id, m) != m2m_pool(b, pb, id, m));
        ++distinguished;
      }
    }
    if (phi_pool(a, id, Pool::kMax) != phi_pool(b, id, Pool::kMax))
      CHECK(m2m_pool(a, max_isolating(rng, a, id, groups), id, Pool::kMax) !=
            m2m_pool(b, max_isolating(rng, b, id, groups), id, Pool::kMax));
  }
  CHECK(distinguished > 1000);
}

TEST_CASE("m2m_expected_step: p == q collapses, p != q separates") {
  Tensor prior(3, 2);
  for (std::size_t c = 0; c < 3; ++c) {
    prior(c, 0) = 0.6;
    prior(c, 1) = -0.8;  // ‖v‖ = 1
  }
  M2mStep eq = m2m_expected_step(0.01, 0.01, prior, 0, 1);
  CHECK(eq.bound == 0.0);
  CHECK(eq.separation == 0.0);

  for (auto [p, q] : {std::pair{0.003, 0.01}, std::pair{0.05, 0.001}}) {
    M2mStep s = m2m_expected_step(p, q, prior, 0, 1);
    const double den = p + 2 * q;
    CHECK(s.bound == doctest::Approx(2 * std::abs(p - q) / den));
    CHECK(s.bound > 0.0);
    CHECK(s.separation > 0.0);
    // Only blocks a and b differ, each by |p-q|·v/den.
    CHECK(s.separation == doctest::Approx(std::sqrt(2.0) * std::abs(p - q) / den));
    CHECK(s.separation_l21 >= s.bound - 1e-15);
  }

  // The same priors leave SMP's expected class means indistinguishable.
  Tensor smp = expected_mean_recursion(0.003, 0.01, 3, prior);
  CHECK(max_abs_diff(Tensor(1, 2, {smp(0, 0), smp(0, 1)}),
                     Tensor(1, 2, {smp(1, 0), smp(1, 1)})) == 0.0);
  CHECK_THROWS_AS(m2m_expected_step(0.0, 0.0, prior, 0, 1), ParameterError);
}

TEST_CASE("relu_contraction_check: equality, hand example, random sweep") {
  const std::vector<double> a = {1, -1}, b = {-1, 1};
  CHECK(relu_contraction_check(a, a));
  CHECK(relu_contraction_check(a, b));
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n01;
  bool ok = true;
  for (int trial = 0; trial < 100000; ++trial) {
    std::vector<double> x(4), y(4);
    for (double& v : x) v = n01(rng);
    for (double& v : y) v = n01(rng);
    ok = ok && relu_contraction_check(x, y);
  }
  CHECK(ok);
}

}  // namespace
}  // namespace hgnn
