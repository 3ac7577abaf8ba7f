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

// heterognn: every experiment behind one executable.
//
// Parameters resolve as: built-in defaults, then --config FILE (JSON, same
// keys as resolved_config.json), then explicit flags. Each run writes
// resolved_config.json next to its CSV outputs in --out.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage (bad flags, missing
// files, invalid config).

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hgnn/csbm.hpp"
#include "hgnn/errors.hpp"
#include "hgnn/graph.hpp"
#include "hgnn/m2m_model.hpp"
#include "hgnn/m2m_theory.hpp"
#include "hgnn/report.hpp"
#include "hgnn/smp.hpp"
#include "hgnn/train.hpp"

namespace hgnn {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// --- Parameter plumbing ----------------------------------------------------

struct Param {
  std::string flag;     // e.g. "--p"
  std::string pointer;  // JSON pointer into the resolved config
  std::string help;
};

struct Command {
  CLI::App* app = nullptr;
  json defaults;
  std::vector<Param> params;
  std::map<std::string, std::string> raw;  // pointer -> flag text
  std::map<std::string, CLI::Option*> options;
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  int jobs = 1;
  bool quiet = false;
  std::string seed_pointer = "/seed";
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep))
    if (!cur.empty()) out.push_back(cur);
  return out;
}

double parse_double(const std::string& s, const std::string& flag) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw UsageError(flag + ": expected a number, got '" + s + "'");
  }
}

// Converts flag text to JSON shaped like the default at the same pointer.
json parse_like(const json& like, const std::string& text, const std::string& flag) {
  if (like.is_boolean()) {
    if (text == "true" || text == "1") return true;
    if (text == "false" || text == "0") return false;
    throw UsageError(flag + ": expected true/false, got '" + text + "'");
  }
  if (like.is_number_unsigned() || like.is_number_integer()) {
    const double v = parse_double(text, flag);
    if (v != std::floor(v)) throw UsageError(flag + ": expected an integer");
    if (like.is_number_unsigned()) {
      if (v < 0) throw UsageError(flag + ": expected a non-negative integer");
      return static_cast<std::uint64_t>(v);
    }
    return static_cast<long long>(v);
  }
  if (like.is_number()) return parse_double(text, flag);
  if (like.is_array()) {
    // Rows separated by ';', entries by ','. A flat list has no ';'.
    const bool matrix = text.find(';') != std::string::npos ||
                        (!like.empty() && like[0].is_array());
    json out = json::array();
    if (matrix) {
      for (const std::string& row : split(text, ';')) {
        json r = json::array();
        for (const std::string& v : split(row, ',')) r.push_back(parse_double(v, flag));
        out.push_back(r);
      }
    } else {
      for (const std::string& v : split(text, ',')) {
        const double d = parse_double(v, flag);
        if (!like.empty() && like[0].is_number_integer()) {
          out.push_back(static_cast<long long>(d));
        } else {
          out.push_back(d);
        }
      }
    }
    return out;
  }
  return text;
}

// Recursively overlays `patch` onto `base`; unknown keys are usage errors.
void overlay(json& base, const json& patch, const std::string& where) {
  if (!patch.is_object()) throw UsageError(where + ": expected a JSON object");
  for (auto it = patch.begin(); it != patch.end(); ++it) {
    const std::string path = where + "/" + it.key();
    if (!base.contains(it.key())) throw UsageError("unknown config key '" + path + "'");
    json& slot = base[it.key()];
    if (slot.is_object()) {
      overlay(slot, *it, path);
    } else {
      slot = *it;
    }
  }
}

std::string type_name(const json& v) {
  if (v.is_boolean()) return "BOOL";
  if (v.is_number_integer() || v.is_number_unsigned()) return "INT";
  if (v.is_number()) return "FLOAT";
  if (v.is_array()) return "LIST";
  return "TEXT";
}

std::string default_text(const json& v) {
  if (v.is_string()) return v.get<std::string>().empty() ? "\"\"" : v.get<std::string>();
  return v.dump();
}

Command& make_command(CLI::App& root, std::vector<std::unique_ptr<Command>>& all,
                      const std::string& name, const std::string& help,
                      json defaults, std::vector<Param> params) {
  auto cmd = std::make_unique<Command>();
  cmd->app = root.add_subcommand(name, help);
  cmd->defaults = std::move(defaults);
  cmd->params = std::move(params);
  cmd->out_dir = "runs/" + name;
  CLI::App* app = cmd->app;
  app->add_option("--config", cmd->config_path,
                  "JSON config (keys as in resolved_config.json)")
      ->default_str("\"\"");
  app->add_option("--out", cmd->out_dir, "Output directory")->capture_default_str();
  app->add_option("--seed", cmd->seed, "Random seed")->capture_default_str();
  app->add_option("--jobs", cmd->jobs, "Worker threads across trials/splits")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  app->add_flag("--quiet", cmd->quiet, "Suppress progress output")
      ->default_str("false");
  for (const Param& p : cmd->params) {
    const json& d = cmd->defaults.at(json::json_pointer(p.pointer));
    std::string& slot = cmd->raw[p.pointer];
    cmd->options[p.pointer] =
        app->add_option(p.flag, slot, p.help)
            ->default_str(default_text(d))
            ->type_name(type_name(d));
  }
  all.push_back(std::move(cmd));
  return *all.back();
}

json resolve(const Command& cmd) {
  json cfg = cmd.defaults;
  if (!cmd.config_path.empty()) {
    std::ifstream in(cmd.config_path);
    if (!in) throw UsageError("cannot open config '" + cmd.config_path + "'");
    json patch;
    try {
      patch = json::parse(in);
    } catch (const json::parse_error& e) {
      throw UsageError(cmd.config_path + ": " + e.what());
    }
    // Resolved configs record the worker count; it never changes results
    // and stays governed by --jobs.
    if (patch.is_object()) patch.erase("jobs");
    overlay(cfg, patch, "");
  }
  for (const Param& p : cmd.params)
    if (cmd.options.at(p.pointer)->count() > 0) {
      const json::json_pointer ptr(p.pointer);
      cfg[ptr] = parse_like(cmd.defaults.at(ptr), cmd.raw.at(p.pointer), p.flag);
    }
  if (cmd.app->get_option("--seed")->count() > 0 &&
      cfg.contains(json::json_pointer(cmd.seed_pointer)))
    cfg[json::json_pointer(cmd.seed_pointer)] = cmd.seed;
  cfg["jobs"] = cmd.jobs;
  return cfg;
}

fs::path prepare_out(const Command& cmd, const json& resolved) {
  fs::path out(cmd.out_dir);
  fs::create_directories(out);
  write_json(out / "resolved_config.json", resolved);
  return out;
}

void progress(const Command& cmd, const std::string& msg) {
  if (!cmd.quiet) std::fprintf(stderr, "%s\n", msg.c_str());
}

// --- Shared config fragments -------------------------------------------------

json csbm_defaults() {
  return {{"N", 3000}, {"C", 3},          {"p", 0.003}, {"q", 0.01},
          {"means", json::array()}, {"variance", 1.0}, {"seed", 0}};
}

std::vector<Param> csbm_params() {
  return {{"--N", "/N", "Number of nodes (divisible by C)"},
          {"--C", "/C", "Number of classes"},
          {"--p", "/p", "Same-class edge probability"},
          {"--q", "/q", "Cross-class edge probability"},
          {"--means", "/means",
           "Class means, rows ';'-separated, entries ','-separated; [] = "
           "evenly spaced 1-D in [-0.5, 0.5]"},
          {"--variance", "/variance", "Feature noise variance"}};
}

// Parses the CSBM block and writes the effective means back into `c`.
CsbmParams csbm_from(json& c) {
  CsbmParams p;
  p.n_nodes = c.at("N").get<int>();
  p.n_classes = c.at("C").get<int>();
  p.p = c.at("p").get<double>();
  p.q = c.at("q").get<double>();
  p.feature_variance = c.at("variance").get<double>();
  p.seed = c.at("seed").get<std::uint64_t>();
  const json& m = c.at("means");
  if (m.empty()) {
    p.means = Tensor(p.n_classes, 1);
    for (int i = 0; i < p.n_classes; ++i)
      p.means(i, 0) = p.n_classes == 1 ? 0.0 : -0.5 + static_cast<double>(i) / (p.n_classes - 1);
  } else {
    const std::size_t f = m[0].is_array() ? m[0].size() : 1;
    p.means = Tensor(m.size(), f);
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (m[i].is_array() != m[0].is_array() || (m[i].is_array() && m[i].size() != f))
        throw ParameterError("means: ragged rows");
      for (std::size_t j = 0; j < f; ++j)
        p.means(i, j) = m[i].is_array() ? m[i][j].get<double>() : m[i].get<double>();
    }
  }
  p.validate();
  json rows = json::array();
  for (std::size_t i = 0; i < p.means.rows(); ++i) {
    json r = json::array();
    for (double v : p.means.row(i)) r.push_back(v);
    rows.push_back(r);
  }
  c["means"] = rows;
  return p;
}

json experiment_defaults() {
  json j = ExperimentConfig{};
  return j;
}

std::vector<Param> experiment_params() {
  return {{"--dataset", "/dataset", "Dataset name under $HETEROGNN_DATA, or a directory"},
          {"--row-normalize", "/row_normalize", "L1-normalize feature rows"},
          {"--splits", "/n_splits", "Number of random 48/32/20 splits"},
          {"--hidden", "/train/model/hidden", "Hidden width d (divisible by chunks)"},
          {"--chunks", "/train/model/chunks", "Message chunks"},
          {"--layers", "/train/model/layers", "Message-passing layers K"},
          {"--alpha", "/train/model/alpha", "Ego weight in attention, (0,1)"},
          {"--beta", "/train/model/beta", "Message vs. initial-embedding mix, [0,1]"},
          {"--temperature", "/train/model/temperature", "Attention softmax temperature"},
          {"--lambda", "/train/model/lambda", "Chunk-diversity regularization strength"},
          {"--keep-prob", "/train/model/keep_prob", "Dropout keep probability"},
          {"--reg-norm", "/train/model/reg_norm", "squared | unsquared"},
          {"--lr", "/train/lr", "Adam learning rate"},
          {"--weight-decay", "/train/weight_decay", "Weight decay"},
          {"--decoupled", "/train/decoupled_weight_decay", "Decoupled (AdamW) decay"},
          {"--epochs", "/train/max_epochs", "Maximum epochs"},
          {"--patience", "/train/patience", "Early-stopping patience (epochs)"}};
}

ExperimentConfig experiment_from(json c, std::initializer_list<const char*> extras) {
  for (const char* k : extras) c.erase(k);
  c.erase("jobs");
  ExperimentConfig e = c.get<ExperimentConfig>();
  if (e.dataset.empty()) throw UsageError("--dataset (or \"dataset\" in --config) is required");
  e.validate();
  return e;
}

Graph load_graph(const ExperimentConfig& e) {
  const fs::path dir = resolve_dataset(e.dataset);
  if (!fs::is_directory(dir))
    throw UsageError("dataset not found: '" + e.dataset +
                     "' (not a directory, nor under $HETEROGNN_DATA)");
  return load_experiment_graph(e);
}

// --- Subcommands ---------------------------------------------------------

int run_gen_csbm(const Command& cmd) {
  json cfg = resolve(cmd);
  CsbmParams p = csbm_from(cfg);
  const fs::path out = prepare_out(cmd, cfg);
  SignedGraphSample s = sample_csbm(p);
  Graph g = to_graph(s, "csbm");
  save_dataset(g, out);
  std::ofstream signs(out / "signs.tsv");
  signs << "# source\ttarget\tsign\n";
  for (const Triplet& t : s.adjacency.triplets())
    if (t.row < t.col) signs << t.row << '\t' << t.col << '\t' << (t.value > 0 ? "+1" : "-1") << '\n';
  std::printf("N=%d E=%zu C=%d homophily=%.4f -> %s\n", g.n_nodes(), g.n_edges(),
              g.n_classes(), edge_homophily(g), out.string().c_str());
  return 0;
}

int run_simulate(const Command& cmd) {
  json cfg = resolve(cmd);
  SimulationOptions o;
  o.params = csbm_from(cfg);
  o.layers = cfg.at("K").get<int>();
  o.trials = cfg.at("trials").get<int>();
  o.jobs = cmd.jobs;
  if (o.layers < 0 || o.trials < 1) throw ParameterError("K >= 0 and trials >= 1");
  const fs::path out = prepare_out(cmd, cfg);
  SimulationResult r = simulate_csbm(o);
  const ClassMeanTrajectory& avg = r.average;
  const int c = o.params.n_classes;
  const double expected_ratio = expected_gap_ratio(o.params.p, o.params.q, c);

  CsvWriter traj(out / "trajectory.csv", "simulate",
                 {"layer", "class_a", "class_b", "gap", "ratio", "expected_gap",
                  "expected_ratio", "z_score"});
  double mean_ratio = 0.0;
  int counted = 0;
  for (int a = 0; a < c; ++a)
    for (int b = a + 1; b < c; ++b) {
      const auto gap = mean_gap(avg, a, b);
      const auto z = z_score(avg, a, b);
      std::vector<double> ua(avg.means[0].cols()), ub(ua.size());
      for (std::size_t j = 0; j < ua.size(); ++j) {
        ua[j] = o.params.means(a, j);
        ub[j] = o.params.means(b, j);
      }
      for (std::size_t k = 0; k < gap.size(); ++k) {
        const double ratio = k == 0 ? std::nan("") : gap[k] / gap[k - 1];
        if (k >= 1 && k <= 10) {
          mean_ratio += ratio;
          ++counted;
        }
        traj.add(k).add(a).add(b).add(gap[k]).add(ratio)
            .add(expected_gap(o.params.p, o.params.q, c, static_cast<int>(k), ua, ub))
            .add(k == 0 ? std::nan("") : expected_ratio).add(z[k]);
        traj.end_row();
      }
    }
  CsvWriter means(out / "class_means.csv", "simulate",
                  {"layer", "class", "dim", "mean", "std"});
  for (std::size_t k = 0; k < avg.n_layers(); ++k)
    for (int a = 0; a < c; ++a)
      for (std::size_t j = 0; j < avg.means[k].cols(); ++j) {
        means.add(k).add(a).add(j).add(avg.means[k](a, j)).add(avg.stddev[k](a, j));
        means.end_row();
      }
  if (counted > 0)
    std::printf("mean per-layer gap ratio (layers 1-10): %.4f, expected %.4f\n",
                mean_ratio / counted, expected_ratio);
  if (r.dropped_nodes > 0)
    std::fprintf(stderr, "warning: %zu isolated nodes dropped across trials\n",
                 r.dropped_nodes);
  return 0;
}

int run_concentration(const Command& cmd) {
  json cfg = resolve(cmd);
  CsbmParams p = csbm_from(cfg);
  const double sigma = cfg.at("sigma").get<double>();
  const double r = cfg.at("r").get<double>();
  if (cfg.at("variance_from_sigma").get<bool>()) p.feature_variance = sigma * sigma;
  const fs::path out = prepare_out(cmd, cfg);
  ConcentrationReport rep = concentration_check(p, cfg.at("K").get<int>(),
                                                cfg.at("trials").get<int>(), sigma,
                                                r, cmd.jobs);
  CsvWriter w(out / "concentration.csv", "concentration",
              {"k", "bound", "fraction_within", "mean_deviation", "max_deviation",
               "vacuous"});
  for (const ConcentrationRow& row : rep.rows) {
    double mean = 0.0, worst = 0.0;
    for (double d : row.deviations) {
      mean += d;
      worst = std::max(worst, d);
    }
    mean /= static_cast<double>(row.deviations.size());
    w.add(row.k).add(row.bound).add(row.fraction_within).add(mean).add(worst)
        .add(row.vacuous ? 1 : 0);
    w.end_row();
    std::printf("K=%d bound=%.4f within=%.0f%%%s\n", row.k, row.bound,
                100 * row.fraction_within, row.vacuous ? " (vacuous)" : "");
  }
  std::printf("kappa=%.4f kappa*log(N)=%.3f mean degree=%.3f precondition %s; "
              "||U||=%.4f\n",
              rep.kappa, rep.kappa_log_n, rep.mean_degree,
              rep.precondition_met ? "met" : "unmet", rep.u_norm);
  return 0;
}

void write_violations(const fs::path& path, const DesirabilityReport& rep,
                      const std::string& tag) {
  CsvWriter w(path, tag, {"row", "col", "value"});
  for (const Violation& v : rep.violations) {
    w.add(v.row).add(v.col).add(v.value);
    w.end_row();
  }
}

int run_desirability(const Command& cmd) {
  const json cfg = resolve(cmd);
  const std::string demo = cfg.at("demo").get<std::string>();
  const fs::path out = prepare_out(cmd, cfg);
  if (!demo.empty()) {
    if (demo != "path3") throw UsageError("--demo: only 'path3' is available");
    std::vector<int> labels = cfg.at("labels").get<std::vector<int>>();
    CounterexampleResult r = sign_composition_counterexample(labels);
    std::printf("path v1 - v2 - v3, labels (%d, %d, %d); signed adjacency per layer:\n",
                labels[0], labels[1], labels[2]);
    for (std::size_t l = 0; l < r.layers.size(); ++l) {
      std::printf("layer %zu (%s):\n", l + 1,
                  r.layer_reports[l].desirable ? "desirable" : "undesirable");
      Tensor d = r.layers[l].to_dense();
      for (std::size_t i = 0; i < d.rows(); ++i) {
        for (std::size_t j = 0; j < d.cols(); ++j) std::printf(" %+3g", d(i, j));
        std::printf("\n");
      }
    }
    Tensor t = r.cumulative.to_dense();
    std::printf("cumulative T (%s):\n", r.verdict.desirable ? "desirable" : "undesirable");
    for (std::size_t i = 0; i < t.rows(); ++i) {
      for (std::size_t j = 0; j < t.cols(); ++j) std::printf(" %+3g", t(i, j));
      std::printf("\n");
    }
    for (const Violation& v : r.verdict.violations)
      std::printf("violation: T(%d,%d) = %+g, labels %d vs %d\n", v.row + 1, v.col + 1,
                  v.value, labels[v.row], labels[v.col]);
    write_violations(out / "violations.csv", r.verdict, "desirability");
    return 0;
  }
  // Audit: label-signed adjacency of a dataset and its powers.
  const std::string ds = cfg.at("dataset").get<std::string>();
  if (ds.empty()) throw UsageError("desirability: give --demo path3 or --dataset");
  const fs::path dir = resolve_dataset(ds);
  if (!fs::is_directory(dir)) throw UsageError("dataset not found: '" + ds + "'");
  Graph g = load_dataset(dir);
  std::vector<Triplet> trip;
  auto y = g.labels();
  for (std::size_t e = 0; e < g.n_arcs(); ++e) {
    const int s = g.arc_sources()[e], t = g.arc_targets()[e];
    trip.push_back({t, s, y[s] == y[t] ? 1.0 : -1.0});
  }
  SparseMatrix a = SparseMatrix::from_triplets(g.n_nodes(), g.n_nodes(), trip);
  const int k_max = cfg.at("K").get<int>();
  if (k_max < 1) throw ParameterError("K must be >= 1");
  CsvWriter w(out / "desirability.csv", "desirability",
              {"layers", "nonzeros", "violations", "desirable"});
  std::vector<SparseMatrix> layers;
  for (int k = 1; k <= k_max; ++k) {
    layers.push_back(a);
    SparseMatrix t = cumulative_matrix(layers);
    DesirabilityReport rep = is_desirable(t, y);
    w.add(k).add(t.nnz()).add(rep.violations.size()).add(rep.desirable ? 1 : 0);
    w.end_row();
    std::printf("K=%d: %zu nonzeros, %zu violations\n", k, t.nnz(), rep.violations.size());
  }
  return 0;
}

int run_theory_check(const Command& cmd) {
  const json cfg = resolve(cmd);
  const fs::path out = prepare_out(cmd, cfg);
  std::mt19937_64 rng(cfg.at("seed").get<std::uint64_t>());
  auto rint = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  auto rtensor = [&](std::size_t r, std::size_t c) {
    std::uniform_real_distribution<double> u(-2, 2);
    Tensor t(r, c);
    for (double& v : t.data()) v = u(rng);
    return t;
  };
  CsvWriter w(out / "theory.csv", "theory-check", {"check", "value", "threshold", "pass"});
  auto row = [&](const std::string& name, double v, double thr, bool ok) {
    w.add(name).add(v).add(thr).add(ok ? 1 : 0);
    w.end_row();
    std::printf("[%s] %s: %.6g (threshold %.6g)\n", ok ? "ok" : "violated",
                name.c_str(), v, thr);
  };

  // Stacked one-hop partitioned layers vs. walk enumeration.
  double worst = 0.0;
  const int graphs = cfg.at("graphs").get<int>();
  for (int t = 0; t < graphs; ++t) {
    const int n = rint(2, 12), c = rint(1, 3), d = rint(1, 3);
    std::vector<std::pair<int, int>> edges;
    std::bernoulli_distribution coin(0.3);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (coin(rng)) edges.emplace_back(i, j);
    std::vector<int> y(n);
    for (int& v : y) v = rint(0, c - 1);
    Graph g = Graph::from_edges(n, edges, rtensor(n, 2), y, c);
    std::vector<Tensor> ws;
    std::size_t width = 2;
    for (int l = 0; l < d; ++l) {
      const std::size_t next = t % 2 ? rint(1, 3) : width;
      ws.push_back(t % 2 ? rtensor(width, next) : Tensor::identity(width));
      width = next;
    }
    worst = std::max(worst, max_abs_diff(stacked_one_hop(g.features(), g, y, c, d, ws),
                                         d_hop_oracle(g.features(), g, y, c, d, ws)));
  }
  row("stacked_hops_vs_walk_oracle_max_diff", worst, 1e-9, worst <= 1e-9);

  // Distance dominance over random multiset pairs.
  const int pairs = cfg.at("pairs").get<int>();
  int euclid = 0, blocks = 0;
  for (int t = 0; t < pairs; ++t) {
    const int f = rint(1, 3), na = rint(1, 5), nb = rint(1, 5), groups = rint(1, 3);
    VectorMultiset a{rtensor(na, f), {}}, b{rtensor(nb, f), {}};
    Partition pa{std::vector<int>(na), groups}, pb{std::vector<int>(nb), groups};
    for (int& v : pa.group) v = rint(0, groups - 1);
    for (int& v : pb.group) v = rint(0, groups - 1);
    const Tensor wt = rtensor(f, rint(1, 3));
    for (Pool m : {Pool::kSum, Pool::kMean}) {
      DistancePair dp = distance_compare(a, b, pa, pb, wt, m);
      euclid += dp.m2m < dp.m2e - 1e-12;
      blocks += dp.m2m_l21 < dp.m2e - 1e-12;
    }
  }
  row("m2m_euclidean_below_m2e_fraction", static_cast<double>(euclid) / (2.0 * pairs), 0.0,
      euclid == 0);
  row("m2m_blocksum_below_m2e_fraction", static_cast<double>(blocks) / (2.0 * pairs), 0.0,
      blocks == 0);

  // Expected step with equal priors.
  const double p = cfg.at("p").get<double>(), q = cfg.at("q").get<double>();
  const int chunks = cfg.at("chunks").get<int>();
  Tensor prior(chunks, 2);
  for (int c = 0; c < chunks; ++c) {
    prior(c, 0) = 0.6;
    prior(c, 1) = -0.8;
  }
  M2mStep s = m2m_expected_step(p, q, prior, 0, 1);
  Tensor smp = expected_mean_recursion(p, q, chunks, prior);
  row("m2m_step_separation_euclidean", s.separation, s.bound, s.separation >= s.bound);
  row("m2m_step_separation_blocksum", s.separation_l21, s.bound,
      s.separation_l21 >= s.bound - 1e-15);
  const double smp_gap = std::hypot(smp(0, 0) - smp(1, 0), smp(0, 1) - smp(1, 1));
  row("smp_step_gap_equal_priors", smp_gap, 0.0, smp_gap == 0.0);

  // ReLU is 1-Lipschitz.
  const int relu_pairs = cfg.at("relu_pairs").get<int>();
  int relu_bad = 0;
  std::normal_distribution<double> n01;
  for (int t = 0; t < relu_pairs; ++t) {
    std::vector<double> x(4), z(4);
    for (double& v : x) v = n01(rng);
    for (double& v : z) v = n01(rng);
    relu_bad += !relu_contraction_check(x, z);
  }
  row("relu_contraction_violations", relu_bad, 0.0, relu_bad == 0);
  return 0;
}

void write_accuracy(CsvWriter& w, const std::string& dataset, int k,
                    const MultiSplitResult& r) {
  for (const SplitResult& s : r.splits) {
    w.add(dataset).add(s.seed).add(s.split).add(k).add(s.test_acc);
    w.end_row();
  }
}

int run_train(const Command& cmd) {
  const json cfg = resolve(cmd);
  ExperimentConfig e = experiment_from(cfg, {"checkpoint"});
  Graph g = load_graph(e);
  const fs::path out = prepare_out(cmd, cfg);
  progress(cmd, "training " + g.name + ": " + std::to_string(e.n_splits) + " splits");
  MultiSplitResult r = run_splits(g, e.train, e.n_splits, e.seed, cmd.jobs);
  CsvWriter w(out / "accuracy.csv", "train", {"dataset", "seed", "split", "K", "acc"});
  write_accuracy(w, g.name, e.train.model.layers, r);
  CsvWriter d(out / "splits.csv", "train",
              {"split", "seed", "test_acc", "val_acc", "best_epoch", "epochs_run",
               "seconds", "mixing"});
  for (const SplitResult& s : r.splits) {
    d.add(s.split).add(s.seed).add(s.test_acc).add(s.val_acc)
        .add(s.best_epoch).add(s.epochs_run).add(s.seconds).add(s.mixing);
    d.end_row();
  }
  if (cfg.at("checkpoint").get<bool>()) {
    // Split 0 retrained deterministically to keep its best parameters.
    Split split = random_split(g, derive_seed(e.seed, 0));
    TrainRecord rec = train(g, e.train, split, derive_seed(e.seed, 1000));
    Checkpoint ck{e.train.model, rec.best_params, g.feature_dim(), g.n_classes(),
                  {{"dataset", g.name}, {"split_seed", split.seed},
                   {"test_acc", rec.test_acc}, {"best_epoch", rec.best_epoch}}};
    save_checkpoint(out / "model", ck);
  }
  std::printf("%s: test accuracy %.4f ± %.4f over %zu splits; mixing %.4f\n",
              g.name.c_str(), r.mean_acc, r.std_acc, r.splits.size(), r.mean_mixing);
  if (!r.finite) {
    std::fprintf(stderr, "error: training diverged: %s\n", r.error.c_str());
    return 1;
  }
  return 0;
}

int run_sweep_depth(const Command& cmd) {
  const json cfg = resolve(cmd);
  ExperimentConfig e = experiment_from(cfg, {"depths"});
  const std::vector<int> depths = cfg.at("depths").get<std::vector<int>>();
  if (depths.empty()) throw ParameterError("depths: at least one value");
  Graph g = load_graph(e);
  const fs::path out = prepare_out(cmd, cfg);
  CsvWriter w(out / "accuracy.csv", "sweep-depth", {"dataset", "seed", "split", "K", "acc"});
  bool finite = true;
  for (int k : depths) {
    const std::vector<int> one = {k};
    progress(cmd, "K=" + std::to_string(k));
    auto pts = depth_sweep(g, e.train, one, e.n_splits, e.seed, cmd.jobs);
    write_accuracy(w, g.name, k, pts[0].result);
    finite = finite && pts[0].result.finite;
    std::printf("K=%d: %.4f ± %.4f%s\n", k, pts[0].result.mean_acc, pts[0].result.std_acc,
                pts[0].result.finite ? "" : " (diverged splits excluded)");
  }
  return finite ? 0 : 1;
}

int run_analyze_attention(const Command& cmd) {
  const json cfg = resolve(cmd);
  ExperimentConfig e = experiment_from(cfg, {"checkpoint"});
  Graph g = load_graph(e);
  M2mConfig model = e.train.model;
  M2mParams params;
  const std::string ckpt = cfg.at("checkpoint").get<std::string>();
  if (!ckpt.empty()) {
    if (!fs::exists(fs::path(ckpt + ".json")))
      throw UsageError("checkpoint not found: " + ckpt + ".json");
    Checkpoint c = load_checkpoint(ckpt);
    if (c.in_dim != g.feature_dim() || c.n_classes != g.n_classes())
      throw UsageError("checkpoint does not match the dataset's shape");
    model = c.config;
    params = std::move(c.params);
  } else {
    if (model.chunks != g.n_classes())
      throw ParameterError("analyze-attention needs chunks == classes (" +
                           std::to_string(g.n_classes()) + ")");
    Split split = random_split(g, derive_seed(e.seed, 0));
    progress(cmd, "training split 0 for attention analysis");
    TrainRecord rec = train(g, e.train, split, derive_seed(e.seed, 1000));
    params = std::move(rec.best_params);
    std::printf("test accuracy %.4f\n", rec.test_acc);
  }
  const fs::path out = prepare_out(cmd, cfg);
  AttentionSummary s = attention_analysis(g, model, params);
  CsvWriter w(out / "attention.csv", "analyze-attention", {"class_row", "class_col", "value"});
  for (std::size_t r = 0; r < s.alignment.rows(); ++r)
    for (std::size_t c = 0; c < s.alignment.cols(); ++c) {
      w.add(r).add(c).add(s.alignment(r, c));
      w.end_row();
    }
  CsvWriter pw(out / "permutation.csv", "analyze-attention", {"class", "chunk"});
  for (std::size_t c = 0; c < s.permutation.size(); ++c) {
    pw.add(c).add(s.permutation[c]);
    pw.end_row();
  }
  std::printf("%d of %zu columns diagonal-dominant; mixing score %.4f\n",
              s.diagonal_dominant_columns, s.alignment.cols(), mixing_score(g, s.s_bar));
  return 0;
}

int run_ablate(const Command& cmd) {
  const json cfg = resolve(cmd);
  ExperimentConfig e = experiment_from(cfg, {"grid_chunks", "grid_lambdas", "deep_layers",
                                             "deep_run"});
  Graph g = load_graph(e);
  std::vector<std::pair<int, double>> grid;
  for (int c : cfg.at("grid_chunks").get<std::vector<int>>())
    for (double l : cfg.at("grid_lambdas").get<std::vector<double>>()) grid.emplace_back(c, l);
  if (grid.empty()) throw ParameterError("ablation grid is empty");
  for (auto [c, l] : grid) {
    M2mConfig m = e.train.model;
    m.chunks = c;
    m.lambda = l;
    m.validate();
  }
  const fs::path out = prepare_out(cmd, cfg);
  AblationOptions opt;
  opt.n_splits = e.n_splits;
  opt.deep_run = cfg.at("deep_run").get<bool>();
  opt.deep_layers = cfg.at("deep_layers").get<int>();
  opt.jobs = cmd.jobs;
  progress(cmd, "ablating " + std::to_string(grid.size()) + " cells");
  auto cells = ablate(g, e.train, grid, e.seed, opt);
  CsvWriter w(out / "ablation.csv", "ablate", {"chunks", "lambda", "mixing", "best_acc", "acc_k32"});
  for (const AblationCell& c : cells) {
    w.add(c.chunks).add(c.lambda).add(c.mixing).add(c.best_acc).add(c.acc_k32);
    w.end_row();
    std::printf("chunks=%d lambda=%g: mixing %.4f, best acc %.4f, acc@K=%d %.4f\n", c.chunks,
                c.lambda, c.mixing, c.best_acc, opt.deep_layers, c.acc_k32);
  }
  return 0;
}

int run_dataset_info(const Command& cmd, const std::string& where) {
  const fs::path dir = resolve_dataset(where);
  if (!fs::is_directory(dir)) throw UsageError("dataset not found: '" + where + "'");
  Graph g = load_dataset(dir);
  std::vector<int> counts(g.n_classes());
  for (int y : g.labels()) ++counts[y];
  std::size_t isolated = 0;
  for (int i = 0; i < g.n_nodes(); ++i) isolated += g.in_degree(i) == 0;
  std::printf("name=%s N=%d E=%zu C=%d F=%zu homophily=%.2f isolated=%zu\n", g.name.c_str(),
              g.n_nodes(), g.n_edges(), g.n_classes(), g.feature_dim(), edge_homophily(g),
              isolated);
  std::printf("class sizes:");
  for (int c : counts) std::printf(" %d", c);
  std::printf("\n");
  if (cmd.app->get_option("--out")->count() > 0) {
    json info = {{"name", g.name},           {"N", g.n_nodes()},
                 {"E", g.n_edges()},         {"C", g.n_classes()},
                 {"F", g.feature_dim()},     {"homophily", edge_homophily(g)},
                 {"class_sizes", counts},    {"isolated", isolated}};
    const fs::path out = prepare_out(cmd, {{"dataset", dir.string()}});
    write_json(out / "dataset_info.json", info);
  }
  return 0;
}

int main_impl(int argc, char** argv) {
  CLI::App app{"heterognn: signed vs. multiset message passing on heterophilic graphs.\n"
               "Datasets are looked up under $HETEROGNN_DATA unless a directory is given."};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");
  std::vector<std::unique_ptr<Command>> cmds;

  json csbm = csbm_defaults();
  Command& gen = make_command(app, cmds, "gen-csbm",
                              "Sample a CSBM graph and write it as a TSV dataset", csbm,
                              csbm_params());

  json sim = csbm;
  sim["K"] = 30;
  sim["trials"] = 20;
  auto sim_params = csbm_params();
  sim_params.push_back({"--K", "/K", "Propagation layers"});
  sim_params.push_back({"--trials", "/trials", "Independent CSBM samples"});
  Command& simulate = make_command(app, cmds, "simulate",
                                   "Class-mean trajectories under signed propagation",
                                   sim, sim_params);

  json con = csbm;
  con["K"] = 5;
  con["trials"] = 20;
  con["sigma"] = 1.2;
  con["r"] = 1.0;
  con["variance_from_sigma"] = true;
  auto con_params = csbm_params();
  con_params.push_back({"--K", "/K", "Largest depth checked"});
  con_params.push_back({"--trials", "/trials", "Independent CSBM samples"});
  con_params.push_back({"--sigma", "/sigma", "Feature std in the bound"});
  con_params.push_back({"--r", "/r", "Confidence exponent r in the degree condition"});
  con_params.push_back({"--variance-from-sigma", "/variance_from_sigma",
                        "Set the feature variance to sigma^2"});
  Command& conc = make_command(app, cmds, "concentration",
                               "Empirical class-mean deviations vs. the concentration bound",
                               con, con_params);

  Command& des = make_command(
      app, cmds, "desirability", "Sign-pattern audit of propagation matrices",
      {{"demo", ""}, {"labels", {0, 1, 2}}, {"dataset", ""}, {"K", 3}, {"seed", 0}},
      {{"--demo", "/demo", "Built-in construction to show: path3"},
       {"--labels", "/labels", "Labels of the 3-node path in the demo"},
       {"--dataset", "/dataset", "Audit the label-signed adjacency of a dataset"},
       {"--K", "/K", "Audit powers 1..K"}});

  Command& theory = make_command(
      app, cmds, "theory-check", "Property sweeps for the multiset aggregation results",
      {{"graphs", 50}, {"pairs", 10000}, {"relu_pairs", 100000}, {"p", 0.003},
       {"q", 0.01}, {"chunks", 3}, {"seed", 0}},
      {{"--graphs", "/graphs", "Random graphs for the walk-oracle check"},
       {"--pairs", "/pairs", "Random multiset pairs for the distance check"},
       {"--relu-pairs", "/relu_pairs", "Random vector pairs for the ReLU check"},
       {"--p", "/p", "Same-class probability for the expected step"},
       {"--q", "/q", "Cross-class probability for the expected step"},
       {"--chunks", "/chunks", "Chunks (= classes) for the expected step"}});

  json ex = experiment_defaults();
  auto ex_params = experiment_params();
  json tr = ex;
  tr["checkpoint"] = false;
  auto tr_params = ex_params;
  tr_params.push_back({"--checkpoint", "/checkpoint", "Also save split 0's best model"});
  Command& train_cmd = make_command(app, cmds, "train",
                                    "Train and evaluate over random splits", tr, tr_params);

  json sw = ex;
  sw["depths"] = {2, 4, 8, 16, 32, 64};
  auto sw_params = ex_params;
  sw_params.push_back({"--depths", "/depths", "Comma-separated layer counts"});
  Command& sweep = make_command(app, cmds, "sweep-depth", "Accuracy as a function of depth",
                                sw, sw_params);

  json at = ex;
  at["checkpoint"] = "";
  auto at_params = ex_params;
  at_params.push_back({"--checkpoint", "/checkpoint",
                       "Checkpoint stem (from train --checkpoint); empty = train split 0"});
  Command& attn = make_command(app, cmds, "analyze-attention",
                               "Class/chunk alignment of learned attention", at, at_params);

  json ab = ex;
  ab["grid_chunks"] = {2, 4, 5, 8};
  ab["grid_lambdas"] = {0.0, 0.5};
  ab["deep_run"] = true;
  ab["deep_layers"] = 32;
  auto ab_params = ex_params;
  ab_params.push_back({"--grid-chunks", "/grid_chunks", "Chunk counts in the grid"});
  ab_params.push_back({"--grid-lambdas", "/grid_lambdas", "Regularization strengths"});
  ab_params.push_back({"--deep-run", "/deep_run", "Also train each cell at --deep-layers"});
  ab_params.push_back({"--deep-layers", "/deep_layers", "Depth of the deep run"});
  Command& abl = make_command(app, cmds, "ablate",
                              "Mixing score and accuracy over a (chunks, lambda) grid", ab,
                              ab_params);

  Command& info = make_command(app, cmds, "dataset-info", "Summary statistics of a dataset",
                               json::object(), {});
  std::string info_dir;
  info.app->add_option("dataset", info_dir, "Dataset directory or name")->required();

  // Seeds parse as unsigned regardless of how the default literal was typed.
  for (auto& c : cmds)
    if (c->defaults.contains("seed")) c->defaults["seed"] = std::uint64_t{0};

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (*gen.app) return run_gen_csbm(gen);
  if (*simulate.app) return run_simulate(simulate);
  if (*conc.app) return run_concentration(conc);
  if (*des.app) return run_desirability(des);
  if (*theory.app) return run_theory_check(theory);
  if (*train_cmd.app) return run_train(train_cmd);
  if (*sweep.app) return run_sweep_depth(sweep);
  if (*attn.app) return run_analyze_attention(attn);
  if (*abl.app) return run_ablate(abl);
  if (*info.app) return run_dataset_info(info, info_dir);
  return 2;
}

}  // namespace
}  // namespace hgnn

int main(int argc, char** argv) {
  try {
    return hgnn::main_impl(argc, argv);
  } catch (const hgnn::UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 2;
  } catch (const hgnn::ParameterError& e) {
    std::fprintf(stderr, "invalid parameter: %s\n", e.what());
    return 2;
  } catch (const hgnn::FormatError& e) {
    std::fprintf(stderr, "invalid input: %s\n", e.what());
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::fprintf(stderr, "invalid config: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
