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

#include "hgnn/m2m_model.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <random>

#include "hgnn/errors.hpp"
#include "hgnn/random.hpp"

namespace hgnn {

void M2mConfig::validate() const {
  if (hidden < 1) throw ParameterError("hidden must be >= 1");
  if (chunks < 1) throw ParameterError("chunks must be >= 1");
  if (hidden % chunks != 0)
    throw ParameterError("hidden (" + std::to_string(hidden) +
                         ") must be divisible by chunks (" +
                         std::to_string(chunks) + ")");
  if (layers < 0) throw ParameterError("layers must be >= 0");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ParameterError("alpha in [0, 1]");
  if (!(beta >= 0.0 && beta <= 1.0)) throw ParameterError("beta in [0, 1]");
  if (!(temperature > 0.0)) throw ParameterError("temperature must be > 0");
  if (!(lambda >= 0.0)) throw ParameterError("lambda must be >= 0");
  if (!(keep_prob > 0.0 && keep_prob <= 1.0))
    throw ParameterError("keep_prob in (0, 1]");
}

void to_json(nlohmann::json& j, const M2mConfig& c) {
  j = {{"hidden", c.hidden},
       {"chunks", c.chunks},
       {"layers", c.layers},
       {"alpha", c.alpha},
       {"beta", c.beta},
       {"temperature", c.temperature},
       {"lambda", c.lambda},
       {"keep_prob", c.keep_prob},
       {"reg_norm", c.reg_norm == RegNorm::kSquared ? "squared" : "unsquared"},
       {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, M2mConfig& c) {
  static const char* kKnown[] = {"hidden", "chunks",    "layers",   "alpha",
                                 "beta",   "temperature", "lambda", "keep_prob",
                                 "reg_norm", "seed"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : kKnown) ok = ok || it.key() == k;
    if (!ok) throw ParameterError("unknown model config key '" + it.key() + "'");
  }
  M2mConfig d;
  c.hidden = j.value("hidden", d.hidden);
  c.chunks = j.value("chunks", d.chunks);
  c.layers = j.value("layers", d.layers);
  c.alpha = j.value("alpha", d.alpha);
  c.beta = j.value("beta", d.beta);
  c.temperature = j.value("temperature", d.temperature);
  c.lambda = j.value("lambda", d.lambda);
  c.keep_prob = j.value("keep_prob", d.keep_prob);
  const std::string rn = j.value("reg_norm", std::string("squared"));
  if (rn == "squared") {
    c.reg_norm = RegNorm::kSquared;
  } else if (rn == "unsquared") {
    c.reg_norm = RegNorm::kUnsquared;
  } else {
    throw ParameterError("reg_norm must be 'squared' or 'unsquared'");
  }
  c.seed = j.value("seed", d.seed);
}

std::vector<Tensor*> M2mParams::tensors() {
  std::vector<Tensor*> t{&enc_w1, &enc_w2};
  for (auto& l : layers) {
    t.push_back(&l.w);
    t.push_back(&l.w_att);
    t.push_back(&l.ln_gamma);
    t.push_back(&l.ln_beta);
  }
  t.push_back(&head_w);
  t.push_back(&head_b);
  return t;
}

std::vector<const Tensor*> M2mParams::tensors() const {
  auto t = const_cast<M2mParams*>(this)->tensors();
  return {t.begin(), t.end()};
}

std::vector<std::string> M2mParams::names() const {
  std::vector<std::string> n{"enc_w1", "enc_w2"};
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const std::string p = "layer" + std::to_string(k) + ".";
    n.push_back(p + "w");
    n.push_back(p + "w_att");
    n.push_back(p + "ln_gamma");
    n.push_back(p + "ln_beta");
  }
  n.push_back("head_w");
  n.push_back("head_b");
  return n;
}

namespace {

Tensor glorot(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> u(-limit, limit);
  Tensor t(rows, cols);
  for (double& v : t.data()) v = u(rng);
  return t;
}

}  // namespace

M2mParams init_params(const M2mConfig& config, std::size_t in_dim,
                      int n_classes, std::uint64_t seed) {
  config.validate();
  if (in_dim == 0 || n_classes < 1)
    throw ParameterError("init_params: need features and classes");
  std::mt19937_64 rng(seed);
  const std::size_t d = config.hidden, dp = config.chunk_width();
  M2mParams p;
  p.enc_w1 = glorot(in_dim, d, rng);
  p.enc_w2 = glorot(d, d, rng);
  for (int k = 0; k < config.layers; ++k) {
    LayerParams l;
    l.w = glorot(d, dp, rng);
    l.w_att = glorot(dp, config.chunks, rng);
    l.ln_gamma = Tensor(1, d, 1.0);
    l.ln_beta = Tensor(1, d, 0.0);
    p.layers.push_back(std::move(l));
  }
  p.head_w = glorot(d, n_classes, rng);
  p.head_b = Tensor(1, n_classes, 0.0);
  return p;
}

ParamVars bind_params(Tape& tape, const M2mParams& params, bool track) {
  ParamVars v;
  auto bind = [&](const Tensor& t) {
    Var x = tape.leaf(t, track);
    v.all.push_back(x);
    return x;
  };
  v.enc_w1 = bind(params.enc_w1);
  v.enc_w2 = bind(params.enc_w2);
  for (const auto& l : params.layers) {
    v.w.push_back(bind(l.w));
    v.w_att.push_back(bind(l.w_att));
    v.ln_gamma.push_back(bind(l.ln_gamma));
    v.ln_beta.push_back(bind(l.ln_beta));
  }
  v.head_w = bind(params.head_w);
  v.head_b = bind(params.head_b);
  return v;
}

Var encode(Var x, Var w1, Var w2, double keep_prob, bool training,
           std::uint64_t seed) {
  Var h = relu(matmul(x, w1));
  if (training && keep_prob < 1.0) h = dropout(h, keep_prob, seed);
  return matmul(h, w2);
}

Var attention_scores(Var h_hat, const Graph& g, Var w_att, double alpha,
                     double temperature) {
  Var ego = row_gather(h_hat, g.arc_targets());
  Var nbr = row_gather(h_hat, g.arc_sources());
  Var z = relu(add(scale(ego, alpha), nbr));
  return row_softmax(matmul(z, w_att), temperature);
}

Var chunk_aggregate(Var h_hat, Var scores, const Graph& g) {
  Var nbr = row_gather(h_hat, g.arc_sources());
  return segment_sum(row_outer(scores, nbr), g.arc_targets(),
                     static_cast<std::size_t>(g.n_nodes()));
}

Var layer_update(Var h0, Var m, double beta, Var ln_gamma, Var ln_beta) {
  Var mixed = add(scale(h0, 1.0 - beta), scale(m, beta));
  return layer_norm(relu(mixed), ln_gamma, ln_beta, 1e-5);
}

Var reg_loss(std::span<const Var> scores, RegNorm norm) {
  if (scores.empty()) throw ContractError("reg_loss: needs at least one layer");
  Tape& tape = *scores[0].tape();
  Var total;
  for (Var s : scores) {
    const double e = static_cast<double>(s.rows());
    const double c = static_cast<double>(s.cols());
    if (e == 0.0) continue;
    Var cs = col_sum(s);
    Var term = norm == RegNorm::kSquared ? l2_norm_sq(cs) : l2_norm(cs);
    term = scale(term, std::sqrt(c) / e);
    total = total.valid() ? add(total, term) : term;
  }
  if (!total.valid()) return tape.constant(Tensor(1, 1, 0.0));
  return add_scalar(scale(total, 1.0 / static_cast<double>(scores.size())),
                    -1.0);
}

ForwardVars forward(Tape& tape, const Graph& g, const M2mConfig& config,
                    const ParamVars& params, const ForwardOptions& options) {
  config.validate();
  if (params.w.size() != static_cast<std::size_t>(config.layers))
    throw DimensionError("forward: parameter layer count != config.layers");
  if (options.forced_scores &&
      options.forced_scores->size() != static_cast<std::size_t>(config.layers))
    throw DimensionError("forward: one forced score matrix per layer");
  const bool drop = options.training && config.keep_prob < 1.0;
  std::uint64_t stream = 0;
  auto maybe_drop = [&](Var v) {
    return drop ? dropout(v, config.keep_prob,
                          derive_seed(options.dropout_seed, stream++))
                : v;
  };

  ForwardVars out;
  Var x = tape.constant_ref(g.features());
  out.h0 = encode(x, params.enc_w1, params.enc_w2, config.keep_prob,
                  options.training, derive_seed(options.dropout_seed, 1u << 20));
  Var h = out.h0;
  for (int k = 0; k < config.layers; ++k) {
    Var h_hat = matmul(maybe_drop(h), params.w[k]);
    Var s = options.forced_scores
                ? tape.constant((*options.forced_scores)[k])
                : attention_scores(h_hat, g, params.w_att[k], config.alpha,
                                   config.temperature);
    Var m = chunk_aggregate(h_hat, s, g);
    h = layer_update(out.h0, m, config.beta, params.ln_gamma[k],
                     params.ln_beta[k]);
    out.scores.push_back(s);
    out.messages.push_back(m);
    out.hidden.push_back(h);
  }
  out.logits = add_row(matmul(maybe_drop(h), params.head_w), params.head_b);
  return out;
}

Var total_loss(Var logits, std::span<const int> labels,
               std::span<const int> mask, std::span<const Var> scores,
               double lambda, RegNorm norm) {
  if (mask.empty()) throw ContractError("total_loss: empty training mask");
  Var task = cross_entropy(logits, labels, mask);
  if (lambda == 0.0 || scores.empty()) return task;
  return add(task, scale(reg_loss(scores, norm), lambda));
}

Inference infer(const Graph& g, const M2mConfig& config,
                const M2mParams& params) {
  Tape tape;
  ParamVars pv = bind_params(tape, params, /*track=*/false);
  ForwardVars fv = forward(tape, g, config, pv);
  Inference r;
  r.logits = fv.logits.value();
  for (Var s : fv.scores) r.scores.push_back(s.value());
  return r;
}

// --- Checkpoints -----------------------------------------------------------

namespace fs = std::filesystem;

void save_checkpoint(const fs::path& stem, const Checkpoint& ckpt) {
  static_assert(std::endian::native == std::endian::little,
                "checkpoint format assumes a little-endian host");
  if (stem.has_parent_path()) fs::create_directories(stem.parent_path());
  nlohmann::json manifest = nlohmann::json::array();
  const auto tensors = ckpt.params.tensors();
  const auto names = ckpt.params.names();
  std::ofstream bin(fs::path(stem.string() + ".bin"), std::ios::binary);
  std::size_t offset = 0;
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    const Tensor& t = *tensors[i];
    manifest.push_back({{"name", names[i]},
                        {"rows", t.rows()},
                        {"cols", t.cols()},
                        {"offset", offset}});
    bin.write(reinterpret_cast<const char*>(t.data().data()),
              static_cast<std::streamsize>(t.size() * sizeof(double)));
    offset += t.size();
  }
  if (!bin) throw std::runtime_error("checkpoint: write failed");
  nlohmann::json j = {{"format", "float64-le"},
                      {"config", ckpt.config},
                      {"in_dim", ckpt.in_dim},
                      {"n_classes", ckpt.n_classes},
                      {"tensors", manifest}};
  if (!ckpt.extra.is_null()) j["extra"] = ckpt.extra;
  std::ofstream(fs::path(stem.string() + ".json")) << j.dump(2) << '\n';
}

Checkpoint load_checkpoint(const fs::path& stem) {
  const fs::path jp(stem.string() + ".json"), bp(stem.string() + ".bin");
  std::ifstream jin(jp);
  if (!jin) throw FormatError(jp.string() + ": cannot open");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(jin);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(jp.string() + ": " + e.what());
  }
  Checkpoint c;
  c.config = j.at("config").get<M2mConfig>();
  c.in_dim = j.at("in_dim").get<std::size_t>();
  c.n_classes = j.at("n_classes").get<int>();
  if (j.contains("extra")) c.extra = j["extra"];
  c.params = init_params(c.config, c.in_dim, c.n_classes, 0);
  auto tensors = c.params.tensors();
  const auto& man = j.at("tensors");
  if (man.size() != tensors.size())
    throw FormatError(jp.string() + ": tensor count mismatch");
  std::ifstream bin(bp, std::ios::binary);
  if (!bin) throw FormatError(bp.string() + ": cannot open");
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    Tensor& t = *tensors[i];
    if (man[i].at("rows").get<std::size_t>() != t.rows() ||
        man[i].at("cols").get<std::size_t>() != t.cols())
      throw FormatError(jp.string() + ": shape mismatch for " +
                        man[i].at("name").get<std::string>());
    bin.seekg(static_cast<std::streamoff>(
        man[i].at("offset").get<std::size_t>() * sizeof(double)));
    bin.read(reinterpret_cast<char*>(t.data().data()),
             static_cast<std::streamsize>(t.size() * sizeof(double)));
    if (!bin) throw FormatError(bp.string() + ": truncated");
  }
  return c;
}

}  // namespace hgnn
