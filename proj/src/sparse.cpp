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

#include "hgnn/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "hgnn/errors.hpp"

namespace hgnn {

SparseMatrix::SparseMatrix(int rows, int cols)
    : rows_(rows), cols_(cols), ptr_(rows + 1, 0) {
  if (rows < 0 || cols < 0) throw DimensionError("SparseMatrix: negative size");
}

SparseMatrix SparseMatrix::from_triplets(int rows, int cols,
                                         std::vector<Triplet> entries) {
  SparseMatrix m(rows, cols);
  for (const Triplet& t : entries)
    if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols)
      throw IndexError("from_triplets: entry out of range");
  std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const Triplet& t = entries[k];
    if (!m.col_.empty() && k > 0 && entries[k - 1].row == t.row &&
        entries[k - 1].col == t.col) {
      m.val_.back() += t.value;
      continue;
    }
    m.col_.push_back(t.col);
    m.val_.push_back(t.value);
    ++m.ptr_[t.row + 1];
  }
  for (int i = 0; i < rows; ++i) m.ptr_[i + 1] += m.ptr_[i];
  return m;
}

SparseMatrix SparseMatrix::from_dense(const Tensor& dense, double drop_below) {
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < dense.rows(); ++i)
    for (std::size_t j = 0; j < dense.cols(); ++j)
      if (std::abs(dense(i, j)) > drop_below)
        t.push_back({static_cast<int>(i), static_cast<int>(j), dense(i, j)});
  return from_triplets(static_cast<int>(dense.rows()),
                       static_cast<int>(dense.cols()), std::move(t));
}

SparseMatrix SparseMatrix::identity(int n) {
  std::vector<Triplet> t;
  for (int i = 0; i < n; ++i) t.push_back({i, i, 1.0});
  return from_triplets(n, n, std::move(t));
}

SparseMatrix SparseMatrix::adjacency(const Graph& g, double weight) {
  std::vector<Triplet> t;
  auto s = g.arc_sources();
  auto d = g.arc_targets();
  for (std::size_t e = 0; e < g.n_arcs(); ++e) t.push_back({d[e], s[e], weight});
  return from_triplets(g.n_nodes(), g.n_nodes(), std::move(t));
}

double SparseMatrix::at(int i, int j) const {
  if (i < 0 || i >= rows_ || j < 0 || j >= cols_)
    throw IndexError("SparseMatrix::at out of range");
  auto first = col_.begin() + ptr_[i];
  auto last = col_.begin() + ptr_[i + 1];
  auto it = std::lower_bound(first, last, j);
  return (it != last && *it == j) ? val_[it - col_.begin()] : 0.0;
}

Tensor SparseMatrix::to_dense() const {
  Tensor d(rows_, cols_);
  for (int i = 0; i < rows_; ++i)
    for (int k = ptr_[i]; k < ptr_[i + 1]; ++k) d(i, col_[k]) += val_[k];
  return d;
}

std::vector<Triplet> SparseMatrix::triplets() const {
  std::vector<Triplet> t;
  for (int i = 0; i < rows_; ++i)
    for (int k = ptr_[i]; k < ptr_[i + 1]; ++k) t.push_back({i, col_[k], val_[k]});
  return t;
}

Tensor SparseMatrix::multiply(const Tensor& x) const {
  if (x.rows() != static_cast<std::size_t>(cols_))
    throw DimensionError("SparseMatrix::multiply: " + std::to_string(cols_) +
                         " cols vs " + x.shape_string());
  const std::size_t f = x.cols();
  Tensor y(rows_, f);
  for (int i = 0; i < rows_; ++i) {
    auto yi = y.row(i);
    for (int k = ptr_[i]; k < ptr_[i + 1]; ++k) {
      const double v = val_[k];
      auto xj = x.row(col_[k]);
      for (std::size_t c = 0; c < f; ++c) yi[c] += v * xj[c];
    }
  }
  return y;
}

SparseMatrix SparseMatrix::multiply(const SparseMatrix& other) const {
  if (cols_ != other.rows_)
    throw DimensionError("SparseMatrix::multiply: inner dimensions differ");
  SparseMatrix out(rows_, other.cols_);
  std::vector<double> acc(other.cols_, 0.0);
  std::vector<char> seen(other.cols_, 0);
  std::vector<int> touched;
  for (int i = 0; i < rows_; ++i) {
    touched.clear();
    for (int k = ptr_[i]; k < ptr_[i + 1]; ++k) {
      const int j = col_[k];
      const double a = val_[k];
      for (int l = other.ptr_[j]; l < other.ptr_[j + 1]; ++l) {
        const int c = other.col_[l];
        if (!seen[c]) {
          seen[c] = 1;
          touched.push_back(c);
        }
        acc[c] += a * other.val_[l];
      }
    }
    std::sort(touched.begin(), touched.end());
    for (int c : touched) {
      out.col_.push_back(c);
      out.val_.push_back(acc[c]);
      acc[c] = 0.0;
      seen[c] = 0;
    }
    out.ptr_[i + 1] = static_cast<int>(out.col_.size());
  }
  return out;
}

SparseMatrix SparseMatrix::transpose() const {
  std::vector<Triplet> t;
  for (int i = 0; i < rows_; ++i)
    for (int k = ptr_[i]; k < ptr_[i + 1]; ++k) t.push_back({col_[k], i, val_[k]});
  return from_triplets(cols_, rows_, std::move(t));
}

bool SparseMatrix::is_symmetric(double tol) const {
  if (rows_ != cols_) return false;
  for (int i = 0; i < rows_; ++i)
    for (int k = ptr_[i]; k < ptr_[i + 1]; ++k)
      if (std::abs(at(col_[k], i) - val_[k]) > tol) return false;
  return true;
}

SparseMatrix SparseMatrix::principal(std::span<const int> keep) const {
  std::vector<int> pos(std::max(rows_, cols_), -1);
  for (std::size_t k = 0; k < keep.size(); ++k) pos[keep[k]] = static_cast<int>(k);
  std::vector<Triplet> t;
  for (std::size_t r = 0; r < keep.size(); ++r) {
    const int i = keep[r];
    for (int k = ptr_[i]; k < ptr_[i + 1]; ++k)
      if (pos[col_[k]] >= 0)
        t.push_back({static_cast<int>(r), pos[col_[k]], val_[k]});
  }
  const int n = static_cast<int>(keep.size());
  return from_triplets(n, n, std::move(t));
}

double SparseMatrix::spectral_norm(int iterations, std::uint64_t seed) const {
  if (rows_ == 0 || cols_ == 0) return 0.0;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Tensor v(cols_, 1);
  for (double& x : v.data()) x = nd(rng);
  const SparseMatrix t = transpose();
  double sigma = 0.0;
  for (int it = 0; it < iterations; ++it) {
    const double n = v.frobenius_norm();
    if (n == 0.0) return 0.0;
    for (double& x : v.data()) x /= n;
    Tensor w = multiply(v);
    sigma = w.frobenius_norm();
    v = t.multiply(w);
  }
  return sigma;
}

}  // namespace hgnn
