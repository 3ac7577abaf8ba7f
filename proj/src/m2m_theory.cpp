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

#include "hgnn/m2m_theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "hgnn/errors.hpp"

namespace hgnn {

Pool parse_pool(std::string_view name) {
  if (name == "sum") return Pool::kSum;
  if (name == "mean") return Pool::kMean;
  if (name == "max") return Pool::kMax;
  throw ParameterError("unknown pooling mode '" + std::string(name) + "'");
}

const char* pool_name(Pool p) {
  switch (p) {
    case Pool::kSum: return "sum";
    case Pool::kMean: return "mean";
    case Pool::kMax: return "max";
  }
  return "?";
}

void Partition::validate(std::size_t n_elements) const {
  if (n_groups < 1) throw ParameterError("partition: need at least one group");
  if (group.size() != n_elements)
    throw DimensionError("partition: one group id per element required");
  for (int gid : group)
    if (gid < 0 || gid >= n_groups) throw IndexError("partition: group id");
}

Partition single_group(std::size_t n) {
  return Partition{std::vector<int>(n, 0), 1};
}

Partition label_partition(std::span<const int> tags, int n_classes) {
  Partition p{std::vector<int>(tags.begin(), tags.end()), n_classes};
  p.validate(tags.size());
  return p;
}

std::vector<double> phi_pool(const Tensor& elements,
                             std::span<const int> subset, const Tensor& weight,
                             Pool mode, double mean_divisor) {
  if (weight.rows() != elements.cols())
    throw DimensionError("phi_pool: weight rows must equal element dim");
  const std::size_t f = elements.cols(), fo = weight.cols();
  std::vector<double> out(fo, mode == Pool::kMax && !subset.empty()
                                  ? -std::numeric_limits<double>::infinity()
                                  : 0.0);
  std::vector<double> xw(fo);
  for (int idx : subset) {
    std::fill(xw.begin(), xw.end(), 0.0);
    for (std::size_t k = 0; k < f; ++k) {
      const double x = elements(idx, k);
      if (x == 0.0) continue;
      for (std::size_t j = 0; j < fo; ++j) xw[j] += x * weight(k, j);
    }
    for (std::size_t j = 0; j < fo; ++j)
      out[j] = mode == Pool::kMax ? std::max(out[j], xw[j]) : out[j] + xw[j];
  }
  if (mode == Pool::kMean && !subset.empty()) {
    const double div =
        mean_divisor > 0.0 ? mean_divisor : static_cast<double>(subset.size());
    for (double& v : out) v /= div;
  }
  return out;
}

std::vector<double> phi_pool(const VectorMultiset& s, const Tensor& weight,
                             Pool mode) {
  std::vector<int> all(s.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
  return phi_pool(s.elements, all, weight, mode);
}

std::vector<double> m2m_pool(const VectorMultiset& s, const Partition& part,
                             const Tensor& weight, Pool mode) {
  part.validate(s.size());
  std::vector<std::vector<int>> groups(part.n_groups);
  for (std::size_t i = 0; i < s.size(); ++i)
    groups[part.group[i]].push_back(static_cast<int>(i));
  std::vector<double> out;
  for (const auto& g : groups) {
    auto block = phi_pool(s.elements, g, weight, mode,
                          static_cast<double>(s.size()));
    out.insert(out.end(), block.begin(), block.end());
  }
  return out;
}

Tensor one_hop_desirable_m2m(const Tensor& h, const Graph& g,
                             std::span<const int> labels, int n_classes,
                             const Tensor& weight, Pool mode) {
  if (h.rows() != static_cast<std::size_t>(g.n_nodes()))
    throw DimensionError("one_hop_desirable_m2m: one row per node required");
  if (labels.size() != h.rows())
    throw DimensionError("one_hop_desirable_m2m: one label per node required");
  const std::size_t fo = weight.cols();
  Tensor out(h.rows(), n_classes * fo);
  auto off = g.in_offsets();
  auto src = g.arc_sources();
  std::vector<std::vector<int>> by_class(n_classes);
  for (int i = 0; i < g.n_nodes(); ++i) {
    for (auto& v : by_class) v.clear();
    for (int e = off[i]; e < off[i + 1]; ++e) {
      const int y = labels[src[e]];
      if (y < 0 || y >= n_classes) throw IndexError("one_hop: label range");
      by_class[y].push_back(src[e]);
    }
    const double full = static_cast<double>(off[i + 1] - off[i]);
    for (int t = 0; t < n_classes; ++t) {
      auto block = phi_pool(h, by_class[t], weight, mode, full);
      std::copy(block.begin(), block.end(), out.row(i).begin() + t * fo);
    }
  }
  return out;
}

Tensor block_diagonal(const Tensor& w, int copies) {
  Tensor out(w.rows() * copies, w.cols() * copies);
  for (int c = 0; c < copies; ++c)
    for (std::size_t i = 0; i < w.rows(); ++i)
      for (std::size_t j = 0; j < w.cols(); ++j)
        out(c * w.rows() + i, c * w.cols() + j) = w(i, j);
  return out;
}

namespace {

void check_weights(const Tensor& h0, int d, std::span<const Tensor> weights) {
  if (d < 1) throw ParameterError("d-hop: d must be >= 1");
  if (weights.size() != static_cast<std::size_t>(d))
    throw DimensionError("d-hop: one weight per hop required");
  std::size_t width = h0.cols();
  for (const Tensor& w : weights) {
    if (w.rows() != width) throw DimensionError("d-hop: weight chain");
    width = w.cols();
  }
}

}  // namespace

Tensor stacked_one_hop(const Tensor& h0, const Graph& g,
                       std::span<const int> labels, int n_classes, int d,
                       std::span<const Tensor> weights) {
  check_weights(h0, d, weights);
  Tensor h = h0;
  int copies = 1;
  for (int l = 0; l < d; ++l) {
    h = one_hop_desirable_m2m(h, g, labels, n_classes,
                              block_diagonal(weights[l], copies), Pool::kSum);
    copies *= n_classes;
  }
  return h;
}

Tensor d_hop_oracle(const Tensor& h0, const Graph& g,
                    std::span<const int> labels, int n_classes, int d,
                    std::span<const Tensor> weights, std::size_t max_width) {
  check_weights(h0, d, weights);
  Tensor hw = h0;
  for (const Tensor& w : weights) hw = matmul_plain(hw, w);
  const std::size_t fo = hw.cols();
  double blocks = std::pow(static_cast<double>(n_classes), d);
  if (blocks * static_cast<double>(fo) > static_cast<double>(max_width))
    throw ParameterError("d_hop_oracle: C^d·f' = " +
                         std::to_string(blocks * fo) + " exceeds cap " +
                         std::to_string(max_width));
  const std::size_t nb = static_cast<std::size_t>(blocks);
  Tensor out(h0.rows(), nb * fo);
  auto off = g.in_offsets();
  auto src = g.arc_sources();
  // Iterative DFS over walks: (node, depth, block index so far).
  struct Frame {
    int node;
    int depth;
    std::size_t t;
  };
  std::vector<Frame> stack;
  for (int i = 0; i < g.n_nodes(); ++i) {
    stack.push_back({i, 0, 0});
    while (!stack.empty()) {
      Frame fr = stack.back();
      stack.pop_back();
      if (fr.depth == d) {
        auto dst = out.row(i).begin() + fr.t * fo;
        auto row = hw.row(fr.node);
        for (std::size_t j = 0; j < fo; ++j) dst[j] += row[j];
        continue;
      }
      for (int e = off[fr.node]; e < off[fr.node + 1]; ++e) {
        const int nb_node = src[e];
        stack.push_back({nb_node, fr.depth + 1,
                         fr.t * n_classes + static_cast<std::size_t>(labels[nb_node])});
      }
    }
  }
  return out;
}

namespace {

double dist(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw DimensionError("distance: widths differ");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

}  // namespace

DistancePair distance_compare(const VectorMultiset& a, const VectorMultiset& b,
                              const Partition& part_a, const Partition& part_b,
                              const Tensor& weight, Pool mode) {
  if (part_a.n_groups != part_b.n_groups)
    throw DimensionError("distance_compare: group counts differ");
  DistancePair d;
  const std::vector<double> fa = m2m_pool(a, part_a, weight, mode);
  const std::vector<double> fb = m2m_pool(b, part_b, weight, mode);
  d.m2m = dist(fa, fb);
  const std::size_t w = weight.cols();
  for (int t = 0; t < part_a.n_groups; ++t) {
    double blk = 0.0;
    for (std::size_t j = t * w; j < (t + 1) * w; ++j)
      blk += (fa[j] - fb[j]) * (fa[j] - fb[j]);
    d.m2m_l21 += std::sqrt(blk);
  }
  d.m2e = dist(phi_pool(a, weight, mode), phi_pool(b, weight, mode));
  return d;
}

M2mStep m2m_expected_step(double p, double q, const Tensor& prior, int a,
                          int b) {
  const int chunks = static_cast<int>(prior.rows());
  const double den = p + (chunks - 1) * q;
  if (!(den > 0.0))
    throw ParameterError("m2m_expected_step: p + (C-1)q must be positive");
  if (a < 0 || b < 0 || a >= chunks || b >= chunks)
    throw IndexError("m2m_expected_step: class index");
  const std::size_t f = prior.cols();
  M2mStep s;
  s.next = Tensor(chunks, chunks * f);
  for (int c = 0; c < chunks; ++c)
    for (int t = 0; t < chunks; ++t) {
      const double coef = (t == c ? p : q) / den;
      for (std::size_t j = 0; j < f; ++j)
        s.next(c, t * f + j) = coef * prior(t, j);
    }
  double total = 0.0;
  for (int t = 0; t < chunks; ++t) {
    double blk = 0.0;
    for (std::size_t j = 0; j < f; ++j) {
      const double d = s.next(a, t * f + j) - s.next(b, t * f + j);
      blk += d * d;
    }
    total += blk;
    s.separation_l21 += std::sqrt(blk);
  }
  s.separation = std::sqrt(total);
  double na = 0.0, nb = 0.0;
  for (std::size_t j = 0; j < f; ++j) {
    na += prior(a, j) * prior(a, j);
    nb += prior(b, j) * prior(b, j);
  }
  s.bound = std::abs(p - q) / den * (std::sqrt(na) + std::sqrt(nb));
  return s;
}

bool relu_contraction_check(std::span<const double> a,
                            std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("relu_contraction: dims");
  double raw = 0.0, rel = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    raw += (a[i] - b[i]) * (a[i] - b[i]);
    const double d = std::max(a[i], 0.0) - std::max(b[i], 0.0);
    rel += d * d;
  }
  return rel <= raw;
}

}  // namespace hgnn
