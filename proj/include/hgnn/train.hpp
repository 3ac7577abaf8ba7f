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

// Training loop, evaluation and the post-hoc analyses (attention alignment,
// mixing score, depth sweep, chunk/regularization ablation).

#ifndef HGNN_TRAIN_HPP_
#define HGNN_TRAIN_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "hgnn/graph.hpp"
#include "hgnn/m2m_model.hpp"
#include "json.hpp"

namespace hgnn {

struct TrainConfig {
  M2mConfig model;
  double lr = 0.01;
  double weight_decay = 5e-4;
  bool decoupled_weight_decay = false;
  int max_epochs = 500;
  int patience = 100;

  void validate() const;
};

void to_json(nlohmann::json& j, const TrainConfig& c);
// Unknown keys are rejected.
void from_json(const nlohmann::json& j, TrainConfig& c);

// A dataset plus how to train on it; the on-disk format of configs/*.json.
struct ExperimentConfig {
  std::string dataset;  // name under $HETEROGNN_DATA or a directory
  bool row_normalize = false;
  int n_splits = 10;
  std::uint64_t seed = 0;
  TrainConfig train;

  void validate() const;
};

void to_json(nlohmann::json& j, const ExperimentConfig& c);
void from_json(const nlohmann::json& j, ExperimentConfig& c);
ExperimentConfig load_experiment(const std::filesystem::path& path);
Graph load_experiment_graph(const ExperimentConfig& c);

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double train_acc = 0.0;
  double val_loss = 0.0;
  double val_acc = 0.0;
};

struct TrainRecord {
  std::vector<EpochRecord> epochs;
  int best_epoch = -1;
  double best_val_acc = 0.0;
  double best_val_loss = std::numeric_limits<double>::infinity();
  double test_acc = 0.0;  // at best_epoch
  std::uint64_t seed = 0;
  TrainConfig config;
  M2mParams best_params;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

// Adam on total_loss over split.train; early stopping on validation
// accuracy (ties: lower validation loss). Throws DivergenceError on a
// non-finite loss.
TrainRecord train(const Graph& g, const TrainConfig& config, const Split& split,
                  std::uint64_t seed, const EpochCallback& on_epoch = {});

// Row argmax with the lowest index winning ties.
std::vector<int> argmax_rows(const Tensor& t);
double accuracy(const Tensor& logits, std::span<const int> labels,
                std::span<const int> nodes);
double evaluate(const Graph& g, const M2mConfig& config,
                const M2mParams& params, std::span<const int> nodes);

// --- Multi-split runs ------------------------------------------------------

struct SplitResult {
  int split = 0;
  std::uint64_t seed = 0;
  double test_acc = 0.0;
  double val_acc = 0.0;
  int best_epoch = 0;
  int epochs_run = 0;
  double seconds = 0.0;
  double mixing = std::numeric_limits<double>::quiet_NaN();
};

struct MultiSplitResult {
  std::vector<SplitResult> splits;
  double mean_acc = 0.0;
  double std_acc = 0.0;
  double mean_mixing = std::numeric_limits<double>::quiet_NaN();
  bool finite = true;  // no split diverged
  std::string error;   // first divergence message
};

// Split s uses random_split(g, derive_seed(seed, s)) and model seed
// derive_seed(seed, 1000 + s). A diverged split is recorded (finite = false)
// with NaN accuracy and excluded from the mean.
MultiSplitResult run_splits(const Graph& g, const TrainConfig& config,
                            int n_splits, std::uint64_t seed, int jobs = 1);

struct DepthPoint {
  int layers = 0;
  MultiSplitResult result;
};

std::vector<DepthPoint> depth_sweep(const Graph& g, const TrainConfig& config,
                                    std::span<const int> depths, int n_splits,
                                    std::uint64_t seed, int jobs = 1);

// --- Attention analysis ----------------------------------------------------

struct AttentionSummary {
  Tensor s_bar;      // |arcs| × 𝒞, layer average
  Tensor s_hat;      // |arcs| × C, one-hot label of each arc's source
  Tensor mass;       // C × C, class-normalized Ŝᵀ S̄ after column matching
  Tensor alignment;  // C × C, row softmax of `mass`
  std::vector<int> permutation;  // permutation[c] = chunk aligned to class c
  int diagonal_dominant_columns = 0;
};

Tensor average_scores(std::span<const Tensor> scores);
// Requires 𝒞 == C.
AttentionSummary summarize_attention(const Graph& g,
                                     std::span<const Tensor> scores);
AttentionSummary attention_analysis(const Graph& g, const M2mConfig& config,
                                    const M2mParams& params);

// Over heterophilic undirected edges, the fraction whose two arcs pick
// different argmax chunks of s_bar. NaN when there are no such edges.
double mixing_score(const Graph& g, const Tensor& s_bar);

// --- Ablation --------------------------------------------------------------

struct AblationCell {
  int chunks = 0;
  double lambda = 0.0;
  double mixing = 0.0;
  double best_acc = 0.0;
  double acc_k32 = std::numeric_limits<double>::quiet_NaN();
};

struct AblationOptions {
  int n_splits = 10;
  bool deep_run = true;  // also train the K=32 variant
  int deep_layers = 32;
  int jobs = 1;
};

std::vector<AblationCell> ablate(
    const Graph& g, const TrainConfig& base,
    std::span<const std::pair<int, double>> grid, std::uint64_t seed,
    const AblationOptions& options = {});

}  // namespace hgnn

#endif  // HGNN_TRAIN_HPP_
