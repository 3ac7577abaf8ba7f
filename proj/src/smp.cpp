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

#include "hgnn/smp.hpp"

#include <cmath>
#include <limits>

#include "hgnn/errors.hpp"
#include "hgnn/parallel.hpp"

namespace hgnn {

ClassMeanTrajectory class_statistics(std::span<const Tensor> layers,
                                     std::span<const int> labels,
                                     int n_classes) {
  ClassMeanTrajectory t;
  t.n_classes = n_classes;
  t.class_counts.assign(n_classes, 0);
  for (int y : labels) {
    if (y < 0 || y >= n_classes) throw IndexError("class_statistics: label");
    ++t.class_counts[y];
  }
  for (const Tensor& h : layers) {
    if (h.rows() != labels.size())
      throw DimensionError("class_statistics: one label per row required");
    const std::size_t f = h.cols();
    Tensor mean(n_classes, f), sd(n_classes, f);
    for (std::size_t i = 0; i < h.rows(); ++i)
      for (std::size_t k = 0; k < f; ++k) mean(labels[i], k) += h(i, k);
    for (int c = 0; c < n_classes; ++c)
      for (std::size_t k = 0; k < f; ++k)
        mean(c, k) /= std::max(t.class_counts[c], 1);
    for (std::size_t i = 0; i < h.rows(); ++i)
      for (std::size_t k = 0; k < f; ++k) {
        const double d = h(i, k) - mean(labels[i], k);
        sd(labels[i], k) += d * d;
      }
    for (int c = 0; c < n_classes; ++c)
      for (std::size_t k = 0; k < f; ++k)
        sd(c, k) = t.class_counts[c] > 1
                       ? std::sqrt(sd(c, k) / (t.class_counts[c] - 1))
                       : 0.0;
    t.means.push_back(std::move(mean));
    t.stddev.push_back(std::move(sd));
  }
  return t;
}

PropagationResult propagate_linear(const SparseMatrix& p, const Tensor& x,
                                   std::span<const int> labels, int n_classes,
                                   int k) {
  if (k < 0) throw ParameterError("propagate_linear: K must be >= 0");
  std::vector<Tensor> layers;
  layers.push_back(x);
  for (int i = 0; i < k; ++i) layers.push_back(p.multiply(layers.back()));
  PropagationResult r;
  r.trajectory = class_statistics(layers, labels, n_classes);
  r.embedding = std::move(layers.back());
  return r;
}

double expected_gap_ratio(double p, double q, int c) {
  const double den = p + (c - 1) * q;
  if (!(den > 0.0))
    throw ParameterError("expected gap: p + (C-1)q must be positive");
  return (p + q) / den;
}

double expected_gap(double p, double q, int c, int k,
                    std::span<const double> u_a, std::span<const double> u_b) {
  if (u_a.size() != u_b.size()) throw DimensionError("expected_gap: dims");
  double d = 0.0;
  for (std::size_t i = 0; i < u_a.size(); ++i)
    d += (u_a[i] - u_b[i]) * (u_a[i] - u_b[i]);
  return std::pow(expected_gap_ratio(p, q, c), k) * std::sqrt(d);
}

Tensor expected_mean_recursion(double p, double q, int c, const Tensor& means) {
  const double den = p + (c - 1) * q;
  if (!(den > 0.0))
    throw ParameterError("expected_mean_recursion: p + (C-1)q must be > 0");
  if (means.rows() != static_cast<std::size_t>(c))
    throw DimensionError("expected_mean_recursion: means must have C rows");
  const std::size_t f = means.cols();
  Tensor out(c, f);
  for (int a = 0; a < c; ++a)
    for (std::size_t k = 0; k < f; ++k) {
      double others = 0.0;
      for (int b = 0; b < c; ++b)
        if (b != a) others += means(b, k);
      out(a, k) = (p * means(a, k) - q * others) / den;
    }
  return out;
}

std::vector<double> mean_gap(const ClassMeanTrajectory& t, int a, int b) {
  std::vector<double> out;
  for (const Tensor& m : t.means) {
    double s = 0.0;
    for (std::size_t k = 0; k < m.cols(); ++k)
      s += (m(a, k) - m(b, k)) * (m(a, k) - m(b, k));
    out.push_back(std::sqrt(s));
  }
  return out;
}

std::vector<double> z_score(const ClassMeanTrajectory& t, int a, int b,
                            ZScale scale) {
  std::vector<double> out;
  for (std::size_t l = 0; l < t.n_layers(); ++l) {
    const Tensor& m = t.means[l];
    const Tensor& s = t.stddev[l];
    double acc = 0.0;
    bool inf = false;
    for (std::size_t k = 0; k < m.cols(); ++k) {
      double sa = s(a, k), sb = s(b, k);
      if (scale == ZScale::kVariance) {
        sa *= sa;
        sb *= sb;
      }
      const double den = 0.5 * (sa + sb);
      const double num = m(b, k) - m(a, k);
      if (den == 0.0) {
        if (num != 0.0) inf = true;
        continue;
      }
      acc += (num / den) * (num / den);
    }
    out.push_back(inf ? std::numeric_limits<double>::infinity()
                      : std::sqrt(acc));
  }
  return out;
}

ClassMeanTrajectory average_trajectories(
    std::span<const ClassMeanTrajectory> trials) {
  if (trials.empty()) throw ContractError("average_trajectories: no trials");
  ClassMeanTrajectory avg = trials[0];
  for (std::size_t i = 1; i < trials.size(); ++i) {
    const ClassMeanTrajectory& t = trials[i];
    if (t.n_layers() != avg.n_layers())
      throw DimensionError("average_trajectories: layer counts differ");
    for (std::size_t l = 0; l < t.n_layers(); ++l)
      for (std::size_t k = 0; k < t.means[l].size(); ++k) {
        avg.means[l][k] += t.means[l][k];
        avg.stddev[l][k] += t.stddev[l][k];
      }
    for (std::size_t c = 0; c < avg.class_counts.size(); ++c)
      avg.class_counts[c] += t.class_counts[c];
  }
  const double n = static_cast<double>(trials.size());
  for (std::size_t l = 0; l < avg.n_layers(); ++l)
    for (std::size_t k = 0; k < avg.means[l].size(); ++k) {
      avg.means[l][k] /= n;
      avg.stddev[l][k] /= n;
    }
  for (int& c : avg.class_counts) c = static_cast<int>(c / n);
  return avg;
}

SparseMatrix cumulative_matrix(std::span<const SparseMatrix> layers) {
  if (layers.empty()) throw ContractError("cumulative_matrix: no layers");
  SparseMatrix t = layers[0];
  for (std::size_t k = 1; k < layers.size(); ++k) t = layers[k].multiply(t);
  return t;
}

DesirabilityReport is_desirable(const SparseMatrix& m,
                                std::span<const int> labels) {
  if (labels.size() < static_cast<std::size_t>(std::max(m.rows(), m.cols())))
    throw DimensionError("is_desirable: labels must cover all indices");
  DesirabilityReport r;
  auto ptr = m.row_ptr();
  auto col = m.col_idx();
  auto val = m.values();
  for (int i = 0; i < m.rows(); ++i)
    for (int k = ptr[i]; k < ptr[i + 1]; ++k) {
      const bool same = labels[i] == labels[col[k]];
      if ((same && val[k] < 0.0) || (!same && val[k] > 0.0))
        r.violations.push_back({i, col[k], val[k]});
    }
  r.desirable = r.violations.empty();
  return r;
}

CounterexampleResult sign_composition_counterexample(std::vector<int> labels) {
  if (labels.size() != 3)
    throw ParameterError("sign_composition_counterexample: three labels required");
  CounterexampleResult r;
  r.labels = std::move(labels);
  // Each edge gets the sign its endpoints' labels call for.
  auto sign = [&](int i, int j) {
    return r.labels[i] == r.labels[j] ? 1.0 : -1.0;
  };
  SparseMatrix a = SparseMatrix::from_triplets(
      3, 3,
      {{0, 1, sign(0, 1)}, {1, 0, sign(1, 0)}, {1, 2, sign(1, 2)},
       {2, 1, sign(2, 1)}});
  r.layers = {a, a};
  for (const SparseMatrix& l : r.layers)
    r.layer_reports.push_back(is_desirable(l, r.labels));
  r.cumulative = cumulative_matrix(r.layers);
  r.verdict = is_desirable(r.cumulative, r.labels);
  return r;
}

SimulationResult simulate_csbm(const SimulationOptions& options) {
  options.params.validate();
  if (options.trials < 1) throw ParameterError("simulate: trials must be >= 1");
  SimulationResult r;
  r.trials.resize(options.trials);
  std::vector<std::size_t> dropped(options.trials, 0);
  parallel_for(options.trials, options.jobs, [&](std::size_t t) {
    CsbmParams p = options.params;
    p.seed = derive_seed(options.params.seed, t);
    NormalizedSample ns = signed_normalize(sample_csbm(p));
    dropped[t] = ns.dropped.size();
    r.trials[t] = propagate_linear(ns.propagation, ns.features, ns.labels,
                                   p.n_classes, options.layers)
                      .trajectory;
  });
  for (std::size_t d : dropped) r.dropped_nodes += d;
  r.average = average_trajectories(r.trials);
  return r;
}

double concentration_kappa(double sigma, double r) {
  if (!(sigma > 0.0)) throw ParameterError("kappa: sigma must be positive");
  return std::max(2.0 * (r + 1.0) / (sigma * sigma),
                  (r + 1.0) * (8.0 + 4.0 * sigma) / (sigma * sigma));
}

double concentration_bound(int k, double sigma, int c, int n, double u_norm) {
  return 2.0 * k * sigma * std::sqrt(2.0 * c / n) * u_norm;
}

double stacked_mean_norm(const CsbmParams& params) {
  const double per = static_cast<double>(params.n_nodes) / params.n_classes;
  double s = 0.0;
  for (double v : params.means.data()) s += v * v;
  return std::sqrt(per * s);
}

ConcentrationReport concentration_check(const CsbmParams& params, int k,
                                        int trials, double sigma, double r,
                                        int jobs) {
  params.validate();
  if (k < 0 || trials < 1)
    throw ParameterError("concentration_check: K >= 0 and trials >= 1");
  ConcentrationReport rep;
  rep.kappa = concentration_kappa(sigma, r);
  rep.kappa_log_n = rep.kappa * std::log(static_cast<double>(params.n_nodes));
  rep.mean_degree = expected_degree(params);
  rep.precondition_met = rep.mean_degree >= rep.kappa_log_n;
  rep.u_norm = stacked_mean_norm(params);

  // Expected class means per layer from the true u_c.
  std::vector<Tensor> expected{params.means};
  for (int l = 0; l < k; ++l)
    expected.push_back(expected_mean_recursion(params.p, params.q,
                                               params.n_classes,
                                               expected.back()));
  const int c = params.n_classes;
  std::vector<std::vector<double>> dev(trials);
  parallel_for(trials, jobs, [&](std::size_t t) {
    CsbmParams p = params;
    p.seed = derive_seed(params.seed, t);
    NormalizedSample ns = signed_normalize(sample_csbm(p));
    ClassMeanTrajectory traj =
        propagate_linear(ns.propagation, ns.features, ns.labels, c, k)
            .trajectory;
    for (int l = 0; l <= k; ++l) {
      const Tensor& m = traj.means[l];
      const Tensor& e = expected[l];
      double worst = 0.0;
      for (int a = 0; a < c; ++a)
        for (int b = a + 1; b < c; ++b) {
          double s = 0.0;
          for (std::size_t j = 0; j < m.cols(); ++j) {
            const double d = (m(a, j) - m(b, j)) - (e(a, j) - e(b, j));
            s += d * d;
          }
          worst = std::max(worst, std::sqrt(s));
        }
      dev[t].push_back(worst);
    }
  });
  for (int l = 0; l <= k; ++l) {
    ConcentrationRow row;
    row.k = l;
    row.bound = concentration_bound(l, sigma, c, params.n_nodes, rep.u_norm);
    row.vacuous = row.bound == 0.0;
    int within = 0;
    for (int t = 0; t < trials; ++t) {
      row.deviations.push_back(dev[t][l]);
      within += dev[t][l] <= row.bound;
    }
    row.fraction_within = static_cast<double>(within) / trials;
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

}  // namespace hgnn
