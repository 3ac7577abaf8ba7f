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

// Multiset pooling: multiset-to-element (m2e) and multiset-to-multiset
// (m2m) aggregation, label-partitioned message passing and its d-hop walk
// oracle, plus the expected-mean step used in the escape argument.

#ifndef HGNN_M2M_THEORY_HPP_
#define HGNN_M2M_THEORY_HPP_

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "hgnn/graph.hpp"
#include "hgnn/tensor.hpp"

namespace hgnn {

enum class Pool { kSum, kMean, kMax };
Pool parse_pool(std::string_view name);
const char* pool_name(Pool p);

// Elements are the rows of `elements`; tags are optional class ids.
struct VectorMultiset {
  Tensor elements;
  std::vector<int> tags;

  std::size_t size() const { return elements.rows(); }
  std::size_t dim() const { return elements.cols(); }
};

struct Partition {
  std::vector<int> group;  // group id per element
  int n_groups = 1;

  void validate(std::size_t n_elements) const;
};

Partition single_group(std::size_t n);
Partition label_partition(std::span<const int> tags, int n_classes);

// Pools {x W : x in rows `subset` of elements}. mean divides by
// `mean_divisor` when positive, else by the subset size. Empty subsets pool
// to zero.
std::vector<double> phi_pool(const Tensor& elements,
                             std::span<const int> subset, const Tensor& weight,
                             Pool mode, double mean_divisor = 0.0);
// Whole multiset.
std::vector<double> phi_pool(const VectorMultiset& s, const Tensor& weight,
                             Pool mode);

// Concatenation over groups in order. Under kMean every group divides by
// the size of the full multiset.
std::vector<double> m2m_pool(const VectorMultiset& s, const Partition& part,
                             const Tensor& weight, Pool mode);

// One hop with oracle labels: block t of row i pools (H W) over neighbors of
// class t. Output N × (C·f').
Tensor one_hop_desirable_m2m(const Tensor& h, const Graph& g,
                             std::span<const int> labels, int n_classes,
                             const Tensor& weight, Pool mode);

// Block-diagonal repeat of `w`.
Tensor block_diagonal(const Tensor& w, int copies);

// d stacked one-hop sum layers; layer l uses block_diagonal(weights[l],
// C^l), so the first layer applies weights[0].
Tensor stacked_one_hop(const Tensor& h0, const Graph& g,
                       std::span<const int> labels, int n_classes, int d,
                       std::span<const Tensor> weights);

// Enumerates every walk i = v0, v1, ..., vd and adds h0[vd]·W_0···W_{d-1}
// into block t = Σ_p y(v_p) C^{d-p} (first hop most significant). Refuses
// (ParameterError) when C^d·f' exceeds `max_width`.
Tensor d_hop_oracle(const Tensor& h0, const Graph& g,
                    std::span<const int> labels, int n_classes, int d,
                    std::span<const Tensor> weights,
                    std::size_t max_width = 1u << 20);

// m2m is the Euclidean distance of the concatenations; m2m_l21 sums the
// per-group block distances. Only the latter dominates m2e in general
// ({1,1} vs {0,0} split into singletons: √2 < 2 under sum).
struct DistancePair {
  double m2m = 0.0;
  double m2m_l21 = 0.0;
  double m2e = 0.0;
};

DistancePair distance_compare(const VectorMultiset& a, const VectorMultiset& b,
                              const Partition& part_a, const Partition& part_b,
                              const Tensor& weight, Pool mode);

struct M2mStep {
  Tensor next;  // chunks × (chunks·f): row c is the concatenated class mean
  double separation = 0.0;     // Euclidean ‖next_a - next_b‖
  double separation_l21 = 0.0;  // Σ_t ‖block_t(next_a - next_b)‖
  double bound = 0.0;  // |p-q|/(p+(𝒞-1)q)·(‖prior_a‖ + ‖prior_b‖)
};

// prior is 𝒞×f (class means at layer k-1). Block t of row c is
// coef·prior_t/(p+(𝒞-1)q) with coef = p when t == c else q.
M2mStep m2m_expected_step(double p, double q, const Tensor& prior, int a,
                          int b);

// ‖ReLU(a) - ReLU(b)‖ <= ‖a - b‖.
bool relu_contraction_check(std::span<const double> a,
                            std::span<const double> b);

}  // namespace hgnn

#endif  // HGNN_M2M_THEORY_HPP_
