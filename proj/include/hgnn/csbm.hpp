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

// Contextual stochastic block model with signed edges.

#ifndef HGNN_CSBM_HPP_
#define HGNN_CSBM_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "hgnn/graph.hpp"
#include "hgnn/sparse.hpp"
#include "hgnn/tensor.hpp"

namespace hgnn {

struct CsbmParams {
  int n_nodes = 3000;
  int n_classes = 3;
  double p = 0.003;  // same-class edge probability
  double q = 0.01;   // cross-class edge probability
  Tensor means;      // C×f, row c is u_c
  double feature_variance = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
  std::size_t feature_dim() const { return means.cols(); }
};

// Three classes with 1-D means (-0.5, 0, 0.5) and two with (-0.25, 0.25).
CsbmParams multiclass_example();
CsbmParams binary_example();

struct SignedGraphSample {
  SparseMatrix adjacency;  // symmetric, entries in {-1, +1}, zero diagonal
  Tensor features;
  std::vector<int> labels;
  std::vector<double> abs_degree;
};

// Nodes are assigned to classes in contiguous blocks of N/C. Same-class
// pairs link with probability p (weight +1); cross-class pairs with
// probability q (weight -1).
SignedGraphSample sample_csbm(const CsbmParams& params);

struct NormalizedSample {
  SparseMatrix propagation;  // D^{-1/2} A D^{-1/2} on kept nodes
  Tensor features;
  std::vector<int> labels;
  std::vector<int> kept;     // original ids of rows
  std::vector<int> dropped;  // isolated nodes
  std::vector<std::string> warnings;
};

NormalizedSample signed_normalize(const SignedGraphSample& sample);

// Unsigned graph over the sampled edges (signs are implied by labels).
Graph to_graph(const SignedGraphSample& sample, std::string name = "csbm");

// d̄ = (N/C)(p + (C-1)q).
double expected_degree(const CsbmParams& params);
// (N/C - 1)p + (C-1)(N/C)q, the exact mean |degree|.
double expected_abs_degree(const CsbmParams& params);
// C×C block values of E[P]: p/d̄ on the diagonal, -q/d̄ off it.
Tensor expected_operator(const CsbmParams& params);

}  // namespace hgnn

#endif  // HGNN_CSBM_HPP_
