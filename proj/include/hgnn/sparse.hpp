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

#ifndef HGNN_SPARSE_HPP_
#define HGNN_SPARSE_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "hgnn/graph.hpp"
#include "hgnn/tensor.hpp"

namespace hgnn {

struct Triplet {
  int row;
  int col;
  double value;
};

// Compressed sparse row matrix with real entries. Stored zeros are kept:
// the pattern, not the value, decides what counts as "stored".
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(int rows, int cols);

  // Duplicate coordinates are summed.
  static SparseMatrix from_triplets(int rows, int cols,
                                    std::vector<Triplet> entries);
  // Entries with |v| <= drop_below are omitted.
  static SparseMatrix from_dense(const Tensor& dense, double drop_below = 0.0);
  static SparseMatrix identity(int n);
  // A_ij = weight for every arc j -> i.
  static SparseMatrix adjacency(const Graph& g, double weight = 1.0);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t nnz() const { return col_.size(); }
  std::span<const int> row_ptr() const { return ptr_; }
  std::span<const int> col_idx() const { return col_; }
  std::span<const double> values() const { return val_; }
  std::span<double> mutable_values() { return val_; }

  double at(int i, int j) const;
  Tensor to_dense() const;
  std::vector<Triplet> triplets() const;

  // this · x for dense x.
  Tensor multiply(const Tensor& x) const;
  // this · other (row-wise Gustavson product).
  SparseMatrix multiply(const SparseMatrix& other) const;
  SparseMatrix transpose() const;
  bool is_symmetric(double tol = 0.0) const;
  // Principal submatrix on `keep` (re-indexed in the given order).
  SparseMatrix principal(std::span<const int> keep) const;
  // Power-iteration estimate of the spectral norm.
  double spectral_norm(int iterations = 200, std::uint64_t seed = 1) const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<int> ptr_;
  std::vector<int> col_;
  std::vector<double> val_;
};

}  // namespace hgnn

#endif  // HGNN_SPARSE_HPP_
