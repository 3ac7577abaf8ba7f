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

#include "hgnn/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <utility>

#include "hgnn/errors.hpp"

namespace hgnn {

// --- Tensor ----------------------------------------------------------------

Tensor::Tensor(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Tensor::Tensor(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw DimensionError("Tensor: data length " +
                         std::to_string(data_.size()) + " != " +
                         std::to_string(rows) + "x" + std::to_string(cols));
  }
}

Tensor Tensor::from_rows(
    std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r ? rows.begin()->size() : 0;
  std::vector<double> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw DimensionError("from_rows: ragged rows");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Tensor(r, c, std::move(data));
}

Tensor Tensor::identity(std::size_t n) {
  Tensor t(n, n);
  for (std::size_t i = 0; i < n; ++i) t(i, i) = 1.0;
  return t;
}

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

Tensor Tensor::transpose() const {
  Tensor t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

double Tensor::frobenius_norm() const {
  double s = 0.0;
  for (double v : data_) s += v * v;
  return std::sqrt(s);
}

std::string Tensor::shape_string() const {
  return "(" + std::to_string(rows_) + "x" + std::to_string(cols_) + ")";
}

namespace {

std::string shapes(const char* op, const Tensor& a, const Tensor& b) {
  return std::string(op) + ": shape mismatch " + a.shape_string() + " vs " +
         b.shape_string();
}

// c += a · b. The i-k-j order with zero skipping keeps sparse bag-of-words
// features cheap.
void gemm_acc(const Tensor& a, const Tensor& b, Tensor& c) {
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  const double* pa = a.data().data();
  const double* pb = b.data().data();
  double* pc = c.data().data();
  for (std::size_t i = 0; i < n; ++i) {
    double* ci = pc + i * m;
    for (std::size_t t = 0; t < k; ++t) {
      const double av = pa[i * k + t];
      if (av == 0.0) continue;
      const double* bt = pb + t * m;
      for (std::size_t j = 0; j < m; ++j) ci[j] += av * bt[j];
    }
  }
}

// c += aᵀ · b  (a: n×k, b: n×m, c: k×m).
void gemm_tn_acc(const Tensor& a, const Tensor& b, Tensor& c) {
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  for (std::size_t i = 0; i < n; ++i) {
    const double* ai = a.data().data() + i * k;
    const double* bi = b.data().data() + i * m;
    for (std::size_t t = 0; t < k; ++t) {
      const double av = ai[t];
      if (av == 0.0) continue;
      double* ct = c.data().data() + t * m;
      for (std::size_t j = 0; j < m; ++j) ct[j] += av * bi[j];
    }
  }
}

// c += a · bᵀ  (a: n×m, b: k×m, c: n×k).
void gemm_nt_acc(const Tensor& a, const Tensor& b, Tensor& c) {
  const std::size_t n = a.rows(), m = a.cols(), k = b.rows();
  for (std::size_t i = 0; i < n; ++i) {
    const double* ai = a.data().data() + i * m;
    for (std::size_t t = 0; t < k; ++t) {
      const double* bt = b.data().data() + t * m;
      double s = 0.0;
      for (std::size_t j = 0; j < m; ++j) s += ai[j] * bt[j];
      c(i, t) += s;
    }
  }
}

}  // namespace

Tensor matmul_plain(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows()) throw DimensionError(shapes("matmul", a, b));
  Tensor c(a.rows(), b.cols());
  gemm_acc(a, b, c);
  return c;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) throw DimensionError(shapes("max_abs_diff", a, b));
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// --- Tape ------------------------------------------------------------------

const Tensor& Var::value() const { return tape_->value(*this); }
bool Var::requires_grad() const { return tape_->requires_grad(*this); }

void Tape::check(Var v) const {
  if (v.tape_ != this || v.id_ >= nodes_.size())
    throw ContractError("Var does not belong to this tape");
}

Var Tape::leaf(const Tensor& value, bool track) {
  Node n;
  n.owned = value;
  n.requires_grad = track || value.requires_grad();
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

Var Tape::constant(Tensor value) {
  Node n;
  n.owned = std::move(value);
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

Var Tape::constant_ref(const Tensor& value) {
  Node n;
  n.external = &value;
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(Tensor value, std::vector<Var> parents, BackwardFn backward) {
  if (backward_done_) throw ContractError("tape already consumed by backward");
  bool rg = false;
  for (Var p : parents) {
    check(p);
    rg = rg || nodes_[p.id_].requires_grad;
  }
  Node n;
  n.owned = std::move(value);
  n.requires_grad = rg;
  if (rg) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

const Tensor& Tape::value(Var v) const {
  check(v);
  return nodes_[v.id_].value();
}

void Tape::accumulate(Var v, const Tensor& g) {
  check(v);
  Node& n = nodes_[v.id_];
  if (!n.requires_grad) return;
  const Tensor& val = n.value();
  if (!g.same_shape(val)) throw DimensionError(shapes("accumulate", val, g));
  if (n.grad.empty() && val.size() > 0) {
    n.grad = g;
    return;
  }
  for (std::size_t i = 0; i < g.size(); ++i) n.grad[i] += g[i];
}

void Tape::backward(Var loss) {
  check(loss);
  if (backward_done_) throw ContractError("backward called twice on one tape");
  if (nodes_.empty()) throw ContractError("backward on empty tape");
  const Tensor& lv = nodes_[loss.id_].value();
  if (lv.rows() != 1 || lv.cols() != 1)
    throw ContractError("backward requires a scalar loss, got " +
                        lv.shape_string());
  backward_done_ = true;
  if (!nodes_[loss.id_].requires_grad) return;
  nodes_[loss.id_].grad = Tensor(1, 1, 1.0);
  for (std::size_t i = loss.id_ + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.backward || n.grad.empty()) continue;
    // Copy out: the callback may not add nodes, but grad must stay stable.
    const Tensor g = n.grad;
    n.backward(*this, g);
  }
}

Tensor Tape::grad(Var v) const {
  check(v);
  const Node& n = nodes_[v.id_];
  if (n.grad.empty()) {
    const Tensor& val = n.value();
    return Tensor(val.rows(), val.cols());
  }
  return n.grad;
}

// --- Ops -------------------------------------------------------------------

namespace {

Tape& tape_of(Var a) {
  if (!a.valid()) throw ContractError("invalid Var");
  return *a.tape();
}

Tape& tape_of(Var a, Var b) {
  if (a.tape() != b.tape()) throw ContractError("Vars on different tapes");
  return tape_of(a);
}

Tensor scalar(double v) { return Tensor(1, 1, v); }

}  // namespace

Var matmul(Var a, Var b) {
  Tape& t = tape_of(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.cols() != bv.rows()) throw DimensionError(shapes("matmul", av, bv));
  Tensor out(av.rows(), bv.cols());
  gemm_acc(av, bv, out);
  return t.record(std::move(out), {a, b}, [a, b](Tape& tp, const Tensor& g) {
    if (tp.requires_grad(a)) {
      const Tensor& bv = tp.value(b);
      Tensor ga(g.rows(), bv.rows());
      gemm_nt_acc(g, bv, ga);
      tp.accumulate(a, ga);
    }
    if (tp.requires_grad(b)) {
      const Tensor& av = tp.value(a);
      Tensor gb(av.cols(), g.cols());
      gemm_tn_acc(av, g, gb);
      tp.accumulate(b, gb);
    }
  });
}

Var add(Var a, Var b) {
  Tape& t = tape_of(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (!av.same_shape(bv)) throw DimensionError(shapes("add", av, bv));
  Tensor out = av;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  return t.record(std::move(out), {a, b}, [a, b](Tape& tp, const Tensor& g) {
    tp.accumulate(a, g);
    tp.accumulate(b, g);
  });
}

Var add_row(Var a, Var row) {
  Tape& t = tape_of(a, row);
  const Tensor& av = a.value();
  const Tensor& rv = row.value();
  if (rv.rows() != 1 || rv.cols() != av.cols())
    throw DimensionError(shapes("add_row", av, rv));
  Tensor out = av;
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) += rv[j];
  return t.record(std::move(out), {a, row},
                  [a, row](Tape& tp, const Tensor& g) {
                    tp.accumulate(a, g);
                    if (tp.requires_grad(row)) {
                      Tensor gr(1, g.cols());
                      for (std::size_t i = 0; i < g.rows(); ++i)
                        for (std::size_t j = 0; j < g.cols(); ++j)
                          gr[j] += g(i, j);
                      tp.accumulate(row, gr);
                    }
                  });
}

Var scale(Var a, double s) {
  Tape& t = tape_of(a);
  Tensor out = a.value();
  for (double& v : out.data()) v *= s;
  return t.record(std::move(out), {a}, [a, s](Tape& tp, const Tensor& g) {
    Tensor ga = g;
    for (double& v : ga.data()) v *= s;
    tp.accumulate(a, ga);
  });
}

Var add_scalar(Var a, double s) {
  Tape& t = tape_of(a);
  Tensor out = a.value();
  for (double& v : out.data()) v += s;
  return t.record(std::move(out), {a},
                  [a](Tape& tp, const Tensor& g) { tp.accumulate(a, g); });
}

Var relu(Var a) {
  Tape& t = tape_of(a);
  Tensor out = a.value();
  for (double& v : out.data()) v = v > 0.0 ? v : 0.0;
  return t.record(std::move(out), {a}, [a](Tape& tp, const Tensor& g) {
    const Tensor& av = tp.value(a);
    Tensor ga = g;
    for (std::size_t i = 0; i < ga.size(); ++i)
      if (!(av[i] > 0.0)) ga[i] = 0.0;
    tp.accumulate(a, ga);
  });
}

Var row_softmax(Var a, double temperature) {
  if (!(temperature > 0.0) || !std::isfinite(temperature))
    throw ParameterError("row_softmax: temperature must be positive");
  Tape& t = tape_of(a);
  const Tensor& av = a.value();
  Tensor out(av.rows(), av.cols());
  for (std::size_t i = 0; i < av.rows(); ++i) {
    auto in = av.row(i);
    auto o = out.row(i);
    double mx = -std::numeric_limits<double>::infinity();
    for (double v : in) mx = std::max(mx, v);
    double z = 0.0;
    for (std::size_t j = 0; j < in.size(); ++j) {
      o[j] = std::exp((in[j] - mx) / temperature);
      z += o[j];
    }
    for (double& v : o) v /= z;
  }
  Tensor saved = out;
  return t.record(
      std::move(out), {a},
      [a, saved = std::move(saved), temperature](Tape& tp, const Tensor& g) {
        Tensor ga(g.rows(), g.cols());
        for (std::size_t i = 0; i < g.rows(); ++i) {
          auto s = saved.row(i);
          auto gi = g.row(i);
          double dot = 0.0;
          for (std::size_t j = 0; j < s.size(); ++j) dot += s[j] * gi[j];
          for (std::size_t j = 0; j < s.size(); ++j)
            ga(i, j) = s[j] * (gi[j] - dot) / temperature;
        }
        tp.accumulate(a, ga);
      });
}

Var concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw DimensionError("concat_cols: no parts");
  Tape& t = tape_of(parts[0]);
  const std::size_t n = parts[0].rows();
  std::size_t total = 0;
  std::vector<std::size_t> widths;
  for (Var p : parts) {
    tape_of(parts[0], p);
    if (p.rows() != n) throw DimensionError("concat_cols: row mismatch");
    widths.push_back(p.cols());
    total += p.cols();
  }
  Tensor out(n, total);
  std::size_t off = 0;
  for (Var p : parts) {
    const Tensor& pv = p.value();
    for (std::size_t i = 0; i < n; ++i)
      std::copy(pv.row(i).begin(), pv.row(i).end(), out.row(i).begin() + off);
    off += pv.cols();
  }
  return t.record(std::move(out), parts,
                  [parts, widths](Tape& tp, const Tensor& g) {
                    std::size_t off = 0;
                    for (std::size_t k = 0; k < parts.size(); ++k) {
                      if (tp.requires_grad(parts[k])) {
                        Tensor gk(g.rows(), widths[k]);
                        for (std::size_t i = 0; i < g.rows(); ++i)
                          for (std::size_t j = 0; j < widths[k]; ++j)
                            gk(i, j) = g(i, off + j);
                        tp.accumulate(parts[k], gk);
                      }
                      off += widths[k];
                    }
                  });
}

Var slice_cols(Var a, std::size_t begin, std::size_t end) {
  Tape& t = tape_of(a);
  const Tensor& av = a.value();
  if (begin > end || end > av.cols())
    throw IndexError("slice_cols: range out of bounds");
  const std::size_t w = end - begin;
  Tensor out(av.rows(), w);
  for (std::size_t i = 0; i < av.rows(); ++i)
    for (std::size_t j = 0; j < w; ++j) out(i, j) = av(i, begin + j);
  return t.record(std::move(out), {a},
                  [a, begin, w](Tape& tp, const Tensor& g) {
                    const Tensor& av = tp.value(a);
                    Tensor ga(av.rows(), av.cols());
                    for (std::size_t i = 0; i < g.rows(); ++i)
                      for (std::size_t j = 0; j < w; ++j)
                        ga(i, begin + j) = g(i, j);
                    tp.accumulate(a, ga);
                  });
}

std::vector<Var> split_cols(Var a, std::span<const std::size_t> widths) {
  std::size_t total = 0;
  for (std::size_t w : widths) total += w;
  if (total != a.cols()) throw DimensionError("split_cols: widths mismatch");
  std::vector<Var> out;
  std::size_t off = 0;
  for (std::size_t w : widths) {
    out.push_back(slice_cols(a, off, off + w));
    off += w;
  }
  return out;
}

Var row_gather(Var a, std::span<const int> index) {
  Tape& t = tape_of(a);
  const Tensor& av = a.value();
  const std::size_t m = av.cols();
  Tensor out(index.size(), m);
  for (std::size_t e = 0; e < index.size(); ++e) {
    const int r = index[e];
    if (r < 0 || static_cast<std::size_t>(r) >= av.rows())
      throw IndexError("row_gather: index " + std::to_string(r) +
                       " out of range");
    std::copy(av.row(r).begin(), av.row(r).end(), out.row(e).begin());
  }
  std::vector<int> idx(index.begin(), index.end());
  return t.record(std::move(out), {a},
                  [a, idx = std::move(idx)](Tape& tp, const Tensor& g) {
                    const Tensor& av = tp.value(a);
                    Tensor ga(av.rows(), av.cols());
                    for (std::size_t e = 0; e < idx.size(); ++e) {
                      auto dst = ga.row(idx[e]);
                      auto src = g.row(e);
                      for (std::size_t j = 0; j < src.size(); ++j)
                        dst[j] += src[j];
                    }
                    tp.accumulate(a, ga);
                  });
}

Var segment_sum(Var a, std::span<const int> segment, std::size_t n_segments) {
  Tape& t = tape_of(a);
  const Tensor& av = a.value();
  if (segment.size() != av.rows())
    throw DimensionError("segment_sum: one segment id per row required");
  Tensor out(n_segments, av.cols());
  for (std::size_t e = 0; e < segment.size(); ++e) {
    const int s = segment[e];
    if (s < 0 || static_cast<std::size_t>(s) >= n_segments)
      throw IndexError("segment_sum: segment id " + std::to_string(s) +
                       " out of range [0, " + std::to_string(n_segments) +
                       ")");
    auto dst = out.row(s);
    auto src = av.row(e);
    for (std::size_t j = 0; j < src.size(); ++j) dst[j] += src[j];
  }
  std::vector<int> seg(segment.begin(), segment.end());
  return t.record(std::move(out), {a},
                  [a, seg = std::move(seg)](Tape& tp, const Tensor& g) {
                    Tensor ga(seg.size(), g.cols());
                    for (std::size_t e = 0; e < seg.size(); ++e) {
                      auto src = g.row(seg[e]);
                      std::copy(src.begin(), src.end(), ga.row(e).begin());
                    }
                    tp.accumulate(a, ga);
                  });
}

Var row_outer(Var s, Var h) {
  Tape& t = tape_of(s, h);
  const Tensor& sv = s.value();
  const Tensor& hv = h.value();
  if (sv.rows() != hv.rows()) throw DimensionError(shapes("row_outer", sv, hv));
  const std::size_t c = sv.cols(), d = hv.cols();
  Tensor out(sv.rows(), c * d);
  for (std::size_t i = 0; i < sv.rows(); ++i) {
    auto o = out.row(i);
    auto hi = hv.row(i);
    for (std::size_t k = 0; k < c; ++k) {
      const double w = sv(i, k);
      for (std::size_t j = 0; j < d; ++j) o[k * d + j] = w * hi[j];
    }
  }
  return t.record(std::move(out), {s, h}, [s, h](Tape& tp, const Tensor& g) {
    const Tensor& sv = tp.value(s);
    const Tensor& hv = tp.value(h);
    const std::size_t c = sv.cols(), d = hv.cols();
    const bool need_s = tp.requires_grad(s), need_h = tp.requires_grad(h);
    Tensor gs(need_s ? sv.rows() : 0, need_s ? c : 0);
    Tensor gh(need_h ? hv.rows() : 0, need_h ? d : 0);
    for (std::size_t i = 0; i < sv.rows(); ++i) {
      auto gi = g.row(i);
      auto hi = hv.row(i);
      for (std::size_t k = 0; k < c; ++k) {
        const double w = sv(i, k);
        double acc = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
          const double gv = gi[k * d + j];
          acc += gv * hi[j];
          if (need_h) gh(i, j) += gv * w;
        }
        if (need_s) gs(i, k) = acc;
      }
    }
    if (need_s) tp.accumulate(s, gs);
    if (need_h) tp.accumulate(h, gh);
  });
}

Var layer_norm(Var a, Var gamma, Var beta, double eps) {
  Tape& t = tape_of(a, gamma);
  tape_of(a, beta);
  const Tensor& av = a.value();
  const Tensor& gv = gamma.value();
  const Tensor& bv = beta.value();
  const std::size_t n = av.rows(), m = av.cols();
  if (gv.rows() != 1 || gv.cols() != m || !gv.same_shape(bv))
    throw DimensionError("layer_norm: affine must be 1x" + std::to_string(m));
  Tensor xhat(n, m);
  std::vector<double> inv_std(n);
  Tensor out(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    auto x = av.row(i);
    double mu = 0.0;
    for (double v : x) mu += v;
    mu /= static_cast<double>(m);
    double var = 0.0;
    for (double v : x) var += (v - mu) * (v - mu);
    var /= static_cast<double>(m);
    inv_std[i] = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < m; ++j) {
      xhat(i, j) = (x[j] - mu) * inv_std[i];
      out(i, j) = xhat(i, j) * gv[j] + bv[j];
    }
  }
  return t.record(
      std::move(out), {a, gamma, beta},
      [a, gamma, beta, xhat = std::move(xhat), inv_std = std::move(inv_std)](
          Tape& tp, const Tensor& g) {
        const Tensor& gv = tp.value(gamma);
        const std::size_t n = g.rows(), m = g.cols();
        if (tp.requires_grad(gamma) || tp.requires_grad(beta)) {
          Tensor gg(1, m), gb(1, m);
          for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < m; ++j) {
              gg[j] += g(i, j) * xhat(i, j);
              gb[j] += g(i, j);
            }
          tp.accumulate(gamma, gg);
          tp.accumulate(beta, gb);
        }
        if (tp.requires_grad(a)) {
          Tensor ga(n, m);
          const double inv_m = 1.0 / static_cast<double>(m);
          for (std::size_t i = 0; i < n; ++i) {
            double s1 = 0.0, s2 = 0.0;
            for (std::size_t j = 0; j < m; ++j) {
              const double dxh = g(i, j) * gv[j];
              s1 += dxh;
              s2 += dxh * xhat(i, j);
            }
            for (std::size_t j = 0; j < m; ++j) {
              const double dxh = g(i, j) * gv[j];
              ga(i, j) = inv_std[i] * (dxh - inv_m * s1 -
                                       xhat(i, j) * inv_m * s2);
            }
          }
          tp.accumulate(a, ga);
        }
      });
}

Var dropout(Var a, double keep_prob, std::uint64_t seed) {
  if (!(keep_prob > 0.0 && keep_prob <= 1.0))
    throw ParameterError("dropout: keep_prob must be in (0, 1]");
  Tape& t = tape_of(a);
  if (keep_prob == 1.0) {
    return t.record(a.value(), {a},
                    [a](Tape& tp, const Tensor& g) { tp.accumulate(a, g); });
  }
  const Tensor& av = a.value();
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution keep(keep_prob);
  Tensor mask(av.rows(), av.cols());
  for (double& v : mask.data()) v = keep(rng) ? 1.0 / keep_prob : 0.0;
  Tensor out = av;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= mask[i];
  return t.record(std::move(out), {a},
                  [a, mask = std::move(mask)](Tape& tp, const Tensor& g) {
                    Tensor ga = g;
                    for (std::size_t i = 0; i < ga.size(); ++i)
                      ga[i] *= mask[i];
                    tp.accumulate(a, ga);
                  });
}

Var cross_entropy(Var logits, std::span<const int> labels,
                  std::span<const int> mask) {
  Tape& t = tape_of(logits);
  const Tensor& lv = logits.value();
  if (labels.size() != lv.rows())
    throw DimensionError("cross_entropy: one label per row required");
  if (mask.empty()) throw ContractError("cross_entropy: empty mask");
  const std::size_t c = lv.cols();
  Tensor probs(mask.size(), c);
  double loss = 0.0;
  for (std::size_t k = 0; k < mask.size(); ++k) {
    const int i = mask[k];
    if (i < 0 || static_cast<std::size_t>(i) >= lv.rows())
      throw IndexError("cross_entropy: mask index out of range");
    const int y = labels[i];
    if (y < 0 || static_cast<std::size_t>(y) >= c)
      throw IndexError("cross_entropy: label out of range");
    auto row = lv.row(i);
    double mx = -std::numeric_limits<double>::infinity();
    for (double v : row) mx = std::max(mx, v);
    double z = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      probs(k, j) = std::exp(row[j] - mx);
      z += probs(k, j);
    }
    for (std::size_t j = 0; j < c; ++j) probs(k, j) /= z;
    loss += -(row[y] - mx - std::log(z));
  }
  loss /= static_cast<double>(mask.size());
  std::vector<int> m(mask.begin(), mask.end());
  std::vector<int> y(labels.begin(), labels.end());
  return t.record(
      scalar(loss), {logits},
      [logits, m = std::move(m), y = std::move(y), probs = std::move(probs)](
          Tape& tp, const Tensor& g) {
        const Tensor& lv = tp.value(logits);
        Tensor gl(lv.rows(), lv.cols());
        const double w = g[0] / static_cast<double>(m.size());
        for (std::size_t k = 0; k < m.size(); ++k) {
          const int i = m[k];
          for (std::size_t j = 0; j < lv.cols(); ++j)
            gl(i, j) += w * probs(k, j);
          gl(i, y[i]) -= w;
        }
        tp.accumulate(logits, gl);
      });
}

Var sum(Var a) {
  Tape& t = tape_of(a);
  double s = 0.0;
  for (double v : a.value().data()) s += v;
  return t.record(scalar(s), {a}, [a](Tape& tp, const Tensor& g) {
    const Tensor& av = tp.value(a);
    tp.accumulate(a, Tensor(av.rows(), av.cols(), g[0]));
  });
}

Var col_sum(Var a) {
  Tape& t = tape_of(a);
  const Tensor& av = a.value();
  Tensor out(1, av.cols());
  for (std::size_t i = 0; i < av.rows(); ++i)
    for (std::size_t j = 0; j < av.cols(); ++j) out[j] += av(i, j);
  return t.record(std::move(out), {a}, [a](Tape& tp, const Tensor& g) {
    const Tensor& av = tp.value(a);
    Tensor ga(av.rows(), av.cols());
    for (std::size_t i = 0; i < av.rows(); ++i)
      for (std::size_t j = 0; j < av.cols(); ++j) ga(i, j) = g[j];
    tp.accumulate(a, ga);
  });
}

Var l2_norm_sq(Var a) {
  Tape& t = tape_of(a);
  double s = 0.0;
  for (double v : a.value().data()) s += v * v;
  return t.record(scalar(s), {a}, [a](Tape& tp, const Tensor& g) {
    Tensor ga = tp.value(a);
    for (double& v : ga.data()) v *= 2.0 * g[0];
    tp.accumulate(a, ga);
  });
}

Var l2_norm(Var a) {
  Tape& t = tape_of(a);
  double s = 0.0;
  for (double v : a.value().data()) s += v * v;
  const double n = std::sqrt(s);
  return t.record(scalar(n), {a}, [a, n](Tape& tp, const Tensor& g) {
    Tensor ga = tp.value(a);
    // Subgradient 0 at the origin.
    const double w = n > 0.0 ? g[0] / n : 0.0;
    for (double& v : ga.data()) v *= w;
    tp.accumulate(a, ga);
  });
}

}  // namespace hgnn
