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

// Python module heterognn._core. Arrays cross as float64/int numpy arrays;
// training configs cross as JSON text (the Python package wraps dicts).

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "hgnn/csbm.hpp"
#include "hgnn/errors.hpp"
#include "hgnn/graph.hpp"
#include "hgnn/m2m_theory.hpp"
#include "hgnn/smp.hpp"
#include "hgnn/train.hpp"
#include "json.hpp"

namespace py = pybind11;
using nlohmann::json;

namespace hgnn {
namespace {

using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

Tensor to_tensor(const DoubleArray& a) {
  if (a.ndim() == 1) {
    return Tensor(a.shape(0), 1,
                  std::vector<double>(a.data(), a.data() + a.size()));
  }
  if (a.ndim() != 2) throw ParameterError("expected a 1-D or 2-D array");
  return Tensor(a.shape(0), a.shape(1),
                std::vector<double>(a.data(), a.data() + a.size()));
}

DoubleArray to_array(const Tensor& t) {
  DoubleArray a({t.rows(), t.cols()});
  std::copy(t.data().begin(), t.data().end(), a.mutable_data());
  return a;
}

std::vector<double> flat(const DoubleArray& a) {
  return {a.data(), a.data() + a.size()};
}

CsbmParams make_csbm(int n_nodes, int n_classes, double p, double q,
                     const DoubleArray& means, double variance,
                     std::uint64_t seed) {
  CsbmParams c;
  c.n_nodes = n_nodes;
  c.n_classes = n_classes;
  c.p = p;
  c.q = q;
  c.means = to_tensor(means);
  c.feature_variance = variance;
  c.seed = seed;
  c.validate();
  return c;
}

py::dict trajectory_dict(const ClassMeanTrajectory& t) {
  py::list means, stddev;
  for (const Tensor& m : t.means) means.append(to_array(m));
  for (const Tensor& s : t.stddev) stddev.append(to_array(s));
  py::dict d;
  d["means"] = means;
  d["stddev"] = stddev;
  d["class_counts"] = t.class_counts;
  return d;
}

py::dict multi_split_dict(const MultiSplitResult& r) {
  py::list splits;
  for (const SplitResult& s : r.splits) {
    py::dict d;
    d["split"] = s.split;
    d["seed"] = s.seed;
    d["test_acc"] = s.test_acc;
    d["val_acc"] = s.val_acc;
    d["best_epoch"] = s.best_epoch;
    d["epochs_run"] = s.epochs_run;
    d["mixing"] = s.mixing;
    splits.append(d);
  }
  py::dict d;
  d["splits"] = splits;
  d["mean_acc"] = r.mean_acc;
  d["std_acc"] = r.std_acc;
  d["mean_mixing"] = r.mean_mixing;
  d["finite"] = r.finite;
  d["error"] = r.error;
  return d;
}

}  // namespace
}  // namespace hgnn

PYBIND11_MODULE(_core, m) {
  using namespace hgnn;
  m.doc() = "Signed message passing analysis and multiset-to-multiset GNNs.";

  py::register_exception<ParameterError>(m, "ParameterError", PyExc_ValueError);
  py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);

  py::class_<Graph>(m, "Graph")
      .def(py::init([](int n, const std::vector<std::pair<int, int>>& edges,
                       const DoubleArray& features, std::vector<int> labels,
                       int n_classes) {
             return Graph::from_edges(n, edges, to_tensor(features),
                                      std::move(labels), n_classes);
           }),
           py::arg("n_nodes"), py::arg("edges"), py::arg("features"),
           py::arg("labels"), py::arg("n_classes") = -1)
      .def_property_readonly("n_nodes", &Graph::n_nodes)
      .def_property_readonly("n_classes", &Graph::n_classes)
      .def_property_readonly("n_edges", &Graph::n_edges)
      .def_property_readonly("feature_dim", &Graph::feature_dim)
      .def_property_readonly("features",
                             [](const Graph& g) { return to_array(g.features()); })
      .def_property_readonly("labels", [](const Graph& g) {
        return std::vector<int>(g.labels().begin(), g.labels().end());
      })
      .def("edges", &Graph::undirected_edges)
      .def("homophily", &edge_homophily)
      .def_readwrite("name", &Graph::name)
      .def("__repr__", [](const Graph& g) {
        return "<Graph '" + g.name + "' N=" + std::to_string(g.n_nodes()) +
               " E=" + std::to_string(g.n_edges()) +
               " C=" + std::to_string(g.n_classes()) + ">";
      });

  m.def("load_dataset",
        [](const std::filesystem::path& dir, bool row_normalize) {
          LoadOptions o;
          o.row_normalize = row_normalize;
          return load_dataset(dir, o);
        },
        py::arg("path"), py::arg("row_normalize") = false);
  m.def("save_dataset", &save_dataset, py::arg("graph"), py::arg("path"));
  m.def("resolve_dataset", &resolve_dataset, py::arg("name_or_path"));

  m.def("sample_csbm",
        [](int n, int c, double p, double q, const DoubleArray& means,
           double variance, std::uint64_t seed) {
          SignedGraphSample s =
              sample_csbm(make_csbm(n, c, p, q, means, variance, seed));
          std::vector<std::tuple<int, int, int>> signed_edges;
          for (const Triplet& t : s.adjacency.triplets())
            if (t.row < t.col)
              signed_edges.emplace_back(t.row, t.col, t.value > 0 ? 1 : -1);
          return py::make_tuple(to_graph(s), signed_edges);
        },
        py::arg("n_nodes"), py::arg("n_classes"), py::arg("p"), py::arg("q"),
        py::arg("means"), py::arg("variance") = 1.0, py::arg("seed") = 0,
        "Returns (graph, [(u, v, sign), ...]) with u < v.");

  m.def("expected_gap",
        [](double p, double q, int c, int k, const DoubleArray& u_a,
           const DoubleArray& u_b) {
          const std::vector<double> a = flat(u_a), b = flat(u_b);
          return expected_gap(p, q, c, k, a, b);
        },
        py::arg("p"), py::arg("q"), py::arg("n_classes"), py::arg("k"),
        py::arg("u_a"), py::arg("u_b"));
  m.def("expected_gap_ratio", &expected_gap_ratio, py::arg("p"), py::arg("q"),
        py::arg("n_classes"));

  m.def("simulate",
        [](int n, int c, double p, double q, const DoubleArray& means,
           double variance, std::uint64_t seed, int layers, int trials,
           int jobs) {
          SimulationOptions o;
          o.params = make_csbm(n, c, p, q, means, variance, seed);
          o.layers = layers;
          o.trials = trials;
          o.jobs = jobs;
          SimulationResult r;
          {
            py::gil_scoped_release release;
            r = simulate_csbm(o);
          }
          py::dict d = trajectory_dict(r.average);
          d["dropped_nodes"] = r.dropped_nodes;
          d["z_score"] = z_score(r.average, 0, 1);
          d["gap"] = mean_gap(r.average, 0, 1);
          return d;
        },
        py::arg("n_nodes"), py::arg("n_classes"), py::arg("p"), py::arg("q"),
        py::arg("means"), py::arg("variance") = 1.0, py::arg("seed") = 0,
        py::arg("layers") = 30, py::arg("trials") = 20, py::arg("jobs") = 1,
        "Trial-averaged class-mean trajectory; gap and z_score are for classes "
        "0 and 1.");

  m.def("sign_composition_counterexample",
        [](std::vector<int> labels) {
          CounterexampleResult r = sign_composition_counterexample(labels);
          std::vector<std::tuple<int, int, double>> violations;
          for (const Violation& v : r.verdict.violations)
            violations.emplace_back(v.row, v.col, v.value);
          std::vector<bool> layers_desirable;
          for (const DesirabilityReport& d : r.layer_reports)
            layers_desirable.push_back(d.desirable);
          py::dict d;
          d["cumulative"] = to_array(r.cumulative.to_dense());
          d["layers_desirable"] = layers_desirable;
          d["desirable"] = r.verdict.desirable;
          d["violations"] = violations;
          return d;
        },
        py::arg("labels") = std::vector<int>{0, 1, 2});

  m.def("phi_pool",
        [](const DoubleArray& elements, const DoubleArray& weight,
           const std::string& mode) {
          VectorMultiset s{to_tensor(elements), {}};
          return phi_pool(s, to_tensor(weight), parse_pool(mode));
        },
        py::arg("elements"), py::arg("weight"), py::arg("mode") = "sum");
  m.def("m2m_pool",
        [](const DoubleArray& elements, std::vector<int> tags, int n_classes,
           const DoubleArray& weight, const std::string& mode) {
          VectorMultiset s{to_tensor(elements), tags};
          return m2m_pool(s, label_partition(tags, n_classes),
                          to_tensor(weight), parse_pool(mode));
        },
        py::arg("elements"), py::arg("tags"), py::arg("n_classes"),
        py::arg("weight"), py::arg("mode") = "sum");

  m.def("_run_splits",
        [](const Graph& g, const std::string& config, int n_splits,
           std::uint64_t seed, int jobs) {
          TrainConfig c = json::parse(config).get<TrainConfig>();
          c.validate();
          MultiSplitResult r;
          {
            py::gil_scoped_release release;
            r = run_splits(g, c, n_splits, seed, jobs);
          }
          return multi_split_dict(r);
        },
        py::arg("graph"), py::arg("config"), py::arg("n_splits") = 10,
        py::arg("seed") = 0, py::arg("jobs") = 1);
  m.def("_default_train_config",
        [] { return json(TrainConfig{}).dump(); });
}
