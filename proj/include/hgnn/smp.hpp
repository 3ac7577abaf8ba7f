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

// Linear signed message passing: trajectories, expected dynamics,
// desirability audits and the concentration bound.

#ifndef HGNN_SMP_HPP_
#define HGNN_SMP_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hgnn/csbm.hpp"
#include "hgnn/random.hpp"
#include "hgnn/sparse.hpp"
#include "hgnn/tensor.hpp"

namespace hgnn {

// Per-layer class statistics; index 0 is the input X.
struct ClassMeanTrajectory {
  int n_classes = 0;
  std::vector<Tensor> means;   // C×f per layer
  std::vector<Tensor> stddev;  // C×f per layer, unbiased
  std::vector<int> class_counts;

  std::size_t n_layers() const { return means.size(); }
};

ClassMeanTrajectory class_statistics(std::span<const Tensor> layers,
                                     std::span<const int> labels,
                                     int n_classes);

struct PropagationResult {
  ClassMeanTrajectory trajectory;
  Tensor embedding;  // H^(K)
};

// H^(k) = P H^(k-1), k = 1..K.
PropagationResult propagate_linear(const SparseMatrix& p, const Tensor& x,
                                   std::span<const int> labels, int n_classes,
                                   int k);

// ((p+q)/(p+(C-1)q))^K ‖u_a - u_b‖.
double expected_gap(double p, double q, int c, int k,
                    std::span<const double> u_a, std::span<const double> u_b);
double expected_gap_ratio(double p, double q, int c);

// One step E[h̄_a] <- (p E[h̄_a] - q Σ_{c≠a} E[h̄_c]) / (p + (C-1)q).
Tensor expected_mean_recursion(double p, double q, int c, const Tensor& means);

// ‖h̄_a - h̄_b‖ per layer.
std::vector<double> mean_gap(const ClassMeanTrajectory& t, int a, int b);

enum class ZScale { kStdDev, kVariance };
// Per layer: per-dimension (h̄_b - h̄_a) / ((s_a + s_b)/2), reported as the
// Euclidean norm over dimensions. s is the class std (kStdDev) or variance.
// A zero denominator yields +inf.
std::vector<double> z_score(const ClassMeanTrajectory& t, int a, int b,
                            ZScale scale = ZScale::kStdDev);

// Entry-wise average of means and stddevs across trials.
ClassMeanTrajectory average_trajectories(
    std::span<const ClassMeanTrajectory> trials);

// layers[0] is applied first: T = layers[K-1] ··· layers[0].
SparseMatrix cumulative_matrix(std::span<const SparseMatrix> layers);

struct Violation {
  int row;
  int col;
  double value;
};

struct DesirabilityReport {
  bool desirable = true;
  std::vector<Violation> violations;
};

DesirabilityReport is_desirable(const SparseMatrix& m,
                                std::span<const int> labels);

struct CounterexampleResult {
  std::vector<int> labels;
  std::vector<SparseMatrix> layers;
  SparseMatrix cumulative;
  std::vector<DesirabilityReport> layer_reports;
  DesirabilityReport verdict;
};

// Path v1 - v2 - v3 with both layers equal to the signed adjacency carrying
// -1 on each edge. Labels default to three distinct classes.
CounterexampleResult sign_composition_counterexample(
    std::vector<int> labels = {0, 1, 2});

// --- Simulation ------------------------------------------------------------

struct SimulationOptions {
  CsbmParams params;
  int layers = 30;
  int trials = 20;
  int jobs = 1;
};

struct SimulationResult {
  std::vector<ClassMeanTrajectory> trials;
  ClassMeanTrajectory average;
  std::size_t dropped_nodes = 0;
};

// Trial t samples with seed derive_seed(params.seed, t).
SimulationResult simulate_csbm(const SimulationOptions& options);

// --- Concentration ---------------------------------------------------------

struct ConcentrationRow {
  int k = 0;
  double bound = 0.0;
  std::vector<double> deviations;  // per trial, max over class pairs
  double fraction_within = 0.0;
  bool vacuous = false;  // bound is 0
};

struct ConcentrationReport {
  double kappa = 0.0;
  double kappa_log_n = 0.0;
  double mean_degree = 0.0;  // d̄
  bool precondition_met = false;
  double u_norm = 0.0;  // ‖U‖ of the N×f block-repeated mean matrix
  std::vector<ConcentrationRow> rows;  // k = 0..K
};

// κ(σ, r) = max(2(r+1)/σ², (r+1)(8+4σ)/σ²).
double concentration_kappa(double sigma, double r);
// 2Kσ√(2C/N)‖U‖.
double concentration_bound(int k, double sigma, int c, int n, double u_norm);
double stacked_mean_norm(const CsbmParams& params);

ConcentrationReport concentration_check(const CsbmParams& params, int k,
                                        int trials, double sigma, double r,
                                        int jobs = 1);

}  // namespace hgnn

#endif  // HGNN_SMP_HPP_
