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

// The trainable multiset-to-multiset GNN.
//
// Per layer k, with ĥ = dropout(H^(k-1)) W^(k):
//   s(i,j) = softmax(ReLU(α ĥ_i + ĥ_j) W_att^(k) / τ)        per arc j -> i
//   m_i    = ‖_t Σ_j s_t(i,j) ĥ_j                            𝒞 chunks
//   H^(k)  = LayerNorm(ReLU((1-β) h^(0) + β m))
// h^(0) comes from a two-layer bias-free MLP on the raw features and the
// logits from a linear head on H^(K).

#ifndef HGNN_M2M_MODEL_HPP_
#define HGNN_M2M_MODEL_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "hgnn/graph.hpp"
#include "hgnn/tensor.hpp"
#include "json.hpp"

namespace hgnn {

enum class RegNorm { kSquared, kUnsquared };

struct M2mConfig {
  int hidden = 64;   // d
  int chunks = 4;    // 𝒞
  int layers = 2;    // K
  double alpha = 0.5;
  double beta = 0.5;
  double temperature = 1.0;
  double lambda = 0.0;
  double keep_prob = 0.5;
  RegNorm reg_norm = RegNorm::kSquared;
  std::uint64_t seed = 0;

  void validate() const;
  int chunk_width() const { return hidden / chunks; }
};

void to_json(nlohmann::json& j, const M2mConfig& c);
void from_json(const nlohmann::json& j, M2mConfig& c);

struct LayerParams {
  Tensor w;         // d × d/𝒞
  Tensor w_att;     // d/𝒞 × 𝒞
  Tensor ln_gamma;  // 1 × d
  Tensor ln_beta;   // 1 × d
};

struct M2mParams {
  Tensor enc_w1;  // in × d
  Tensor enc_w2;  // d × d
  std::vector<LayerParams> layers;
  Tensor head_w;  // d × C
  Tensor head_b;  // 1 × C

  std::vector<Tensor*> tensors();
  std::vector<const Tensor*> tensors() const;
  std::vector<std::string> names() const;
};

// Glorot-uniform weights, unit LayerNorm gain, zero biases.
M2mParams init_params(const M2mConfig& config, std::size_t in_dim,
                      int n_classes, std::uint64_t seed);

// Parameters bound to a tape, in M2mParams::tensors() order.
struct ParamVars {
  Var enc_w1, enc_w2;
  std::vector<Var> w, w_att, ln_gamma, ln_beta;
  Var head_w, head_b;
  std::vector<Var> all;
};

ParamVars bind_params(Tape& tape, const M2mParams& params, bool track = true);

// --- Building blocks -------------------------------------------------------

Var encode(Var x, Var w1, Var w2, double keep_prob, bool training,
           std::uint64_t seed);
// |arcs| × 𝒞 scores; row e belongs to arc source(e) -> target(e).
Var attention_scores(Var h_hat, const Graph& g, Var w_att, double alpha,
                     double temperature);
// N × (𝒞·d') message matrix.
Var chunk_aggregate(Var h_hat, Var scores, const Graph& g);
Var layer_update(Var h0, Var m, double beta, Var ln_gamma, Var ln_beta);
Var reg_loss(std::span<const Var> scores, RegNorm norm = RegNorm::kSquared);

struct ForwardOptions {
  bool training = false;
  std::uint64_t dropout_seed = 0;
  // When set, replaces the learned scores of layer k with (*forced)[k].
  const std::vector<Tensor>* forced_scores = nullptr;
};

struct ForwardVars {
  Var h0;
  std::vector<Var> hidden;  // H^(1..K)
  std::vector<Var> scores;  // S^(1..K)
  std::vector<Var> messages;
  Var logits;
};

ForwardVars forward(Tape& tape, const Graph& g, const M2mConfig& config,
                    const ParamVars& params, const ForwardOptions& options = {});

// Mean cross-entropy over `mask` plus λ·reg_loss.
Var total_loss(Var logits, std::span<const int> labels,
               std::span<const int> mask, std::span<const Var> scores,
               double lambda, RegNorm norm = RegNorm::kSquared);

// Evaluation-mode logits and per-layer scores (no gradient tracking).
struct Inference {
  Tensor logits;
  std::vector<Tensor> scores;
};
Inference infer(const Graph& g, const M2mConfig& config,
                const M2mParams& params);

// --- Checkpoints -----------------------------------------------------------
// <stem>.json holds the config and a manifest {name, rows, cols, offset};
// <stem>.bin holds the tensors as contiguous little-endian float64.

struct Checkpoint {
  M2mConfig config;
  M2mParams params;
  std::size_t in_dim = 0;
  int n_classes = 0;
  nlohmann::json extra;
};

void save_checkpoint(const std::filesystem::path& stem, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& stem);

}  // namespace hgnn

#endif  // HGNN_M2M_MODEL_HPP_
