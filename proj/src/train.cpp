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

#include "hgnn/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <tuple>

#include "hgnn/errors.hpp"
#include "hgnn/optim.hpp"
#include "hgnn/parallel.hpp"
#include "hgnn/random.hpp"

namespace hgnn {

void TrainConfig::validate() const {
  model.validate();
  if (!(lr > 0.0)) throw ParameterError("lr must be > 0");
  if (!(weight_decay >= 0.0)) throw ParameterError("weight_decay must be >= 0");
  if (max_epochs < 1) throw ParameterError("max_epochs must be >= 1");
  if (patience < 1) throw ParameterError("patience must be >= 1");
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = {{"model", c.model},
       {"lr", c.lr},
       {"weight_decay", c.weight_decay},
       {"decoupled_weight_decay", c.decoupled_weight_decay},
       {"max_epochs", c.max_epochs},
       {"patience", c.patience}};
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  static const char* kKnown[] = {"model",      "lr",        "weight_decay",
                                 "decoupled_weight_decay", "max_epochs",
                                 "patience"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : kKnown) ok = ok || it.key() == k;
    if (!ok) throw ParameterError("unknown train config key '" + it.key() + "'");
  }
  TrainConfig d;
  c.model = j.contains("model") ? j["model"].get<M2mConfig>() : d.model;
  c.lr = j.value("lr", d.lr);
  c.weight_decay = j.value("weight_decay", d.weight_decay);
  c.decoupled_weight_decay =
      j.value("decoupled_weight_decay", d.decoupled_weight_decay);
  c.max_epochs = j.value("max_epochs", d.max_epochs);
  c.patience = j.value("patience", d.patience);
}

void ExperimentConfig::validate() const {
  if (n_splits < 1) throw ParameterError("n_splits must be >= 1");
  train.validate();
}

void to_json(nlohmann::json& j, const ExperimentConfig& c) {
  j = {{"dataset", c.dataset},
       {"row_normalize", c.row_normalize},
       {"n_splits", c.n_splits},
       {"seed", c.seed},
       {"train", c.train}};
}

void from_json(const nlohmann::json& j, ExperimentConfig& c) {
  static const char* kKnown[] = {"dataset", "row_normalize", "n_splits", "seed",
                                 "train"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : kKnown) ok = ok || it.key() == k;
    if (!ok) throw ParameterError("unknown experiment key '" + it.key() + "'");
  }
  ExperimentConfig d;
  c.dataset = j.value("dataset", d.dataset);
  c.row_normalize = j.value("row_normalize", d.row_normalize);
  c.n_splits = j.value("n_splits", d.n_splits);
  c.seed = j.value("seed", d.seed);
  c.train = j.contains("train") ? j["train"].get<TrainConfig>() : d.train;
}

ExperimentConfig load_experiment(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(path.string() + ": cannot open config");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  ExperimentConfig c = j.get<ExperimentConfig>();
  c.validate();
  return c;
}

Graph load_experiment_graph(const ExperimentConfig& c) {
  LoadOptions opt;
  opt.row_normalize = c.row_normalize;
  Graph g = load_dataset(resolve_dataset(c.dataset), opt);
  if (g.name.empty()) g.name = c.dataset;
  return g;
}

std::vector<int> argmax_rows(const Tensor& t) {
  std::vector<int> out(t.rows(), 0);
  for (std::size_t i = 0; i < t.rows(); ++i) {
    auto r = t.row(i);
    for (std::size_t j = 1; j < r.size(); ++j)
      if (r[j] > r[out[i]]) out[i] = static_cast<int>(j);
  }
  return out;
}

double accuracy(const Tensor& logits, std::span<const int> labels,
                std::span<const int> nodes) {
  if (nodes.empty()) return 0.0;
  std::size_t hit = 0;
  for (int i : nodes) {
    auto r = logits.row(i);
    int best = 0;
    for (std::size_t j = 1; j < r.size(); ++j)
      if (r[j] > r[best]) best = static_cast<int>(j);
    hit += best == labels[i];
  }
  return static_cast<double>(hit) / static_cast<double>(nodes.size());
}

double evaluate(const Graph& g, const M2mConfig& config,
                const M2mParams& params, std::span<const int> nodes) {
  return accuracy(infer(g, config, params).logits, g.labels(), nodes);
}

namespace {

double masked_ce(const Tensor& logits, std::span<const int> labels,
                 std::span<const int> nodes) {
  if (nodes.empty()) return 0.0;
  double loss = 0.0;
  for (int i : nodes) {
    auto r = logits.row(i);
    const double mx = *std::max_element(r.begin(), r.end());
    double z = 0.0;
    for (double v : r) z += std::exp(v - mx);
    loss += -(r[labels[i]] - mx - std::log(z));
  }
  return loss / static_cast<double>(nodes.size());
}

}  // namespace

TrainRecord train(const Graph& g, const TrainConfig& config, const Split& split,
                  std::uint64_t seed, const EpochCallback& on_epoch) {
  config.validate();
  if (split.train.empty()) throw ContractError("train: empty training split");
  if (!g.has_labels()) throw ContractError("train: graph has no labels");
  TrainRecord rec;
  rec.seed = seed;
  rec.config = config;
  M2mParams params =
      init_params(config.model, g.feature_dim(), g.n_classes(), seed);
  AdamOptions ao;
  ao.lr = config.lr;
  ao.weight_decay = config.weight_decay;
  ao.decoupled = config.decoupled_weight_decay;
  auto ptrs = params.tensors();
  std::vector<const Tensor*> cptrs(ptrs.begin(), ptrs.end());
  AdamState adam = adam_init(ao, cptrs);
  const auto labels = g.labels();

  int since_best = 0;
  for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
    EpochRecord er;
    er.epoch = epoch;
    {
      Tape tape;
      ParamVars pv = bind_params(tape, params);
      ForwardOptions fo;
      fo.training = true;
      fo.dropout_seed = derive_seed(seed, static_cast<std::uint64_t>(epoch));
      ForwardVars fv = forward(tape, g, config.model, pv, fo);
      Var loss = total_loss(fv.logits, labels, split.train, fv.scores,
                            config.model.lambda, config.model.reg_norm);
      er.train_loss = loss.value()[0];
      if (!std::isfinite(er.train_loss))
        throw DivergenceError("non-finite training loss at epoch " +
                              std::to_string(epoch) + " (seed " +
                              std::to_string(seed) + ")");
      tape.backward(loss);
      std::vector<Tensor> grads;
      for (Var v : pv.all) grads.push_back(tape.grad(v));
      adam_step(adam, ptrs, grads);
    }
    Inference inf = infer(g, config.model, params);
    if (!inf.logits.all_finite())
      throw DivergenceError("non-finite logits at epoch " +
                            std::to_string(epoch));
    er.train_acc = accuracy(inf.logits, labels, split.train);
    er.val_acc = accuracy(inf.logits, labels, split.val);
    er.val_loss = masked_ce(inf.logits, labels, split.val);
    rec.epochs.push_back(er);
    if (on_epoch) on_epoch(er);

    const bool better =
        rec.best_epoch < 0 || er.val_acc > rec.best_val_acc ||
        (er.val_acc == rec.best_val_acc && er.val_loss < rec.best_val_loss);
    if (better) {
      rec.best_epoch = epoch;
      rec.best_val_acc = er.val_acc;
      rec.best_val_loss = er.val_loss;
      rec.test_acc = accuracy(inf.logits, labels, split.test);
      rec.best_params = params;
      since_best = 0;
    } else if (++since_best >= config.patience) {
      break;
    }
  }
  return rec;
}

MultiSplitResult run_splits(const Graph& g, const TrainConfig& config,
                            int n_splits, std::uint64_t seed, int jobs) {
  if (n_splits < 1) throw ParameterError("run_splits: n_splits must be >= 1");
  config.validate();
  MultiSplitResult out;
  out.splits.resize(n_splits);
  std::vector<std::string> errors(n_splits);
  parallel_for(n_splits, jobs, [&](std::size_t s) {
    SplitResult& r = out.splits[s];
    r.split = static_cast<int>(s);
    r.seed = derive_seed(seed, s);
    const auto t0 = std::chrono::steady_clock::now();
    try {
      Split sp = random_split(g, r.seed);
      TrainRecord rec = train(g, config, sp, derive_seed(seed, 1000 + s));
      r.test_acc = rec.test_acc;
      r.val_acc = rec.best_val_acc;
      r.best_epoch = rec.best_epoch;
      r.epochs_run = static_cast<int>(rec.epochs.size());
      if (config.model.layers > 0)
        r.mixing = mixing_score(
            g, average_scores(infer(g, config.model, rec.best_params).scores));
    } catch (const DivergenceError& e) {
      r.test_acc = r.val_acc = std::numeric_limits<double>::quiet_NaN();
      errors[s] = e.what();
    }
    r.seconds = std::chrono::duration<double>(
                    std::chrono::steady_clock::now() - t0)
                    .count();
  });
  std::vector<double> acc, mix;
  for (std::size_t s = 0; s < out.splits.size(); ++s) {
    if (!errors[s].empty()) {
      out.finite = false;
      if (out.error.empty()) out.error = errors[s];
      continue;
    }
    acc.push_back(out.splits[s].test_acc);
    if (std::isfinite(out.splits[s].mixing)) mix.push_back(out.splits[s].mixing);
  }
  if (!acc.empty()) {
    out.mean_acc = std::accumulate(acc.begin(), acc.end(), 0.0) / acc.size();
    double v = 0.0;
    for (double a : acc) v += (a - out.mean_acc) * (a - out.mean_acc);
    out.std_acc = std::sqrt(v / acc.size());
  } else {
    out.mean_acc = std::numeric_limits<double>::quiet_NaN();
  }
  if (!mix.empty())
    out.mean_mixing = std::accumulate(mix.begin(), mix.end(), 0.0) / mix.size();
  return out;
}

std::vector<DepthPoint> depth_sweep(const Graph& g, const TrainConfig& config,
                                    std::span<const int> depths, int n_splits,
                                    std::uint64_t seed, int jobs) {
  std::vector<DepthPoint> out;
  for (int k : depths) {
    TrainConfig c = config;
    c.model.layers = k;
    out.push_back({k, run_splits(g, c, n_splits, seed, jobs)});
  }
  return out;
}

Tensor average_scores(std::span<const Tensor> scores) {
  if (scores.empty()) throw ContractError("average_scores: no layers");
  Tensor avg = scores[0];
  for (std::size_t k = 1; k < scores.size(); ++k) {
    if (!scores[k].same_shape(avg))
      throw DimensionError("average_scores: shapes differ");
    for (std::size_t i = 0; i < avg.size(); ++i) avg[i] += scores[k][i];
  }
  for (double& v : avg.data()) v /= static_cast<double>(scores.size());
  return avg;
}

AttentionSummary summarize_attention(const Graph& g,
                                     std::span<const Tensor> scores) {
  AttentionSummary a;
  a.s_bar = average_scores(scores);
  const int c = g.n_classes();
  if (a.s_bar.cols() != static_cast<std::size_t>(c))
    throw ParameterError("attention analysis needs chunks == classes (" +
                         std::to_string(a.s_bar.cols()) + " chunks, " +
                         std::to_string(c) + " classes)");
  if (a.s_bar.rows() != g.n_arcs())
    throw DimensionError("attention analysis: one score row per arc");
  auto y = g.labels();
  auto src = g.arc_sources();
  a.s_hat = Tensor(g.n_arcs(), c);
  Tensor raw(c, c);
  std::vector<double> count(c, 0.0);
  for (std::size_t e = 0; e < g.n_arcs(); ++e) {
    const int cls = y[src[e]];
    a.s_hat(e, cls) = 1.0;
    count[cls] += 1.0;
    for (int t = 0; t < c; ++t) raw(cls, t) += a.s_bar(e, t);
  }
  for (int r = 0; r < c; ++r)
    if (count[r] > 0.0)
      for (int t = 0; t < c; ++t) raw(r, t) /= count[r];

  // Greedy maximum-mass matching of chunks to classes.
  std::vector<std::tuple<double, int, int>> cand;
  for (int r = 0; r < c; ++r)
    for (int t = 0; t < c; ++t) cand.emplace_back(-raw(r, t), r, t);
  std::sort(cand.begin(), cand.end());
  a.permutation.assign(c, -1);
  std::vector<char> used(c, 0);
  for (auto [neg, r, t] : cand) {
    if (a.permutation[r] >= 0 || used[t]) continue;
    a.permutation[r] = t;
    used[t] = 1;
  }
  a.mass = Tensor(c, c);
  for (int r = 0; r < c; ++r)
    for (int col = 0; col < c; ++col) a.mass(r, col) = raw(r, a.permutation[col]);
  a.alignment = Tensor(c, c);
  for (int r = 0; r < c; ++r) {
    double mx = -std::numeric_limits<double>::infinity(), z = 0.0;
    for (int col = 0; col < c; ++col) mx = std::max(mx, a.mass(r, col));
    for (int col = 0; col < c; ++col) {
      a.alignment(r, col) = std::exp(a.mass(r, col) - mx);
      z += a.alignment(r, col);
    }
    for (int col = 0; col < c; ++col) a.alignment(r, col) /= z;
  }
  for (int col = 0; col < c; ++col) {
    bool dom = true;
    for (int r = 0; r < c; ++r)
      if (r != col && !(a.alignment(col, col) > a.alignment(r, col))) dom = false;
    a.diagonal_dominant_columns += dom;
  }
  return a;
}

AttentionSummary attention_analysis(const Graph& g, const M2mConfig& config,
                                    const M2mParams& params) {
  if (config.chunks != g.n_classes())
    throw ParameterError("attention analysis needs chunks == classes");
  if (config.layers < 1) throw ParameterError("attention analysis needs K >= 1");
  return summarize_attention(g, infer(g, config, params).scores);
}

double mixing_score(const Graph& g, const Tensor& s_bar) {
  if (s_bar.rows() != g.n_arcs())
    throw DimensionError("mixing_score: one score row per arc");
  const auto top = argmax_rows(s_bar);
  auto y = g.labels();
  auto src = g.arc_sources();
  auto dst = g.arc_targets();
  auto rev = g.reverse_arc();
  std::size_t hetero = 0, differ = 0;
  for (std::size_t e = 0; e < g.n_arcs(); ++e) {
    if (src[e] >= dst[e] || y[src[e]] == y[dst[e]]) continue;
    ++hetero;
    differ += top[e] != top[rev[e]];
  }
  if (hetero == 0) return std::numeric_limits<double>::quiet_NaN();
  return static_cast<double>(differ) / static_cast<double>(hetero);
}

std::vector<AblationCell> ablate(const Graph& g, const TrainConfig& base,
                                 std::span<const std::pair<int, double>> grid,
                                 std::uint64_t seed,
                                 const AblationOptions& options) {
  std::vector<AblationCell> out;
  for (auto [chunks, lambda] : grid) {
    TrainConfig c = base;
    c.model.chunks = chunks;
    c.model.lambda = lambda;
    c.validate();
    AblationCell cell;
    cell.chunks = chunks;
    cell.lambda = lambda;
    MultiSplitResult r = run_splits(g, c, options.n_splits, seed, options.jobs);
    cell.best_acc = r.mean_acc;
    cell.mixing = r.mean_mixing;
    if (options.deep_run) {
      TrainConfig deep = c;
      deep.model.layers = options.deep_layers;
      cell.acc_k32 =
          run_splits(g, deep, options.n_splits, seed, options.jobs).mean_acc;
    }
    out.push_back(cell);
  }
  return out;
}

}  // namespace hgnn
