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

// Graph data model, TSV dataset format, splits and homophily.
//
// On-disk layout of a dataset directory:
//   edges.tsv     "u<TAB>v" per undirected edge
//   features.tsv  one row of d reals per node
//   labels.tsv    one integer class id per node
//   meta.json     optional, {"n_classes": C, "name": "..."}
// Lines starting with '#' are comments.

#ifndef HGNN_GRAPH_HPP_
#define HGNN_GRAPH_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hgnn/tensor.hpp"

namespace hgnn {

// Immutable undirected graph stored as directed arcs sorted by
// (target, source). Arc e carries a message source(e) -> target(e); the arcs
// into node i occupy [in_offsets()[i], in_offsets()[i+1]).
class Graph {
 public:
  Graph() = default;

  // Builds from undirected edges. Self-loops are dropped unless
  // `keep_self_loops`; duplicates (in either orientation) are merged.
  // n_classes < 0 infers max label + 1.
  static Graph from_edges(int n_nodes,
                          const std::vector<std::pair<int, int>>& edges,
                          Tensor features, std::vector<int> labels,
                          int n_classes = -1, bool keep_self_loops = false);

  int n_nodes() const { return n_nodes_; }
  int n_classes() const { return n_classes_; }
  std::size_t n_arcs() const { return src_.size(); }
  // Undirected edge count (a self-loop counts once).
  std::size_t n_edges() const;
  std::size_t feature_dim() const { return features_.cols(); }

  std::span<const int> arc_sources() const { return src_; }
  std::span<const int> arc_targets() const { return dst_; }
  std::span<const int> in_offsets() const { return offsets_; }
  // Index of the arc (j -> i) for arc (i -> j).
  std::span<const int> reverse_arc() const { return reverse_; }
  int in_degree(int i) const { return offsets_[i + 1] - offsets_[i]; }

  const Tensor& features() const { return features_; }
  std::span<const int> labels() const { return labels_; }
  bool has_labels() const { return !labels_.empty(); }

  // Canonical undirected edge list, u <= v, sorted.
  std::vector<std::pair<int, int>> undirected_edges() const;

  std::string name;

 private:
  int n_nodes_ = 0;
  int n_classes_ = 0;
  std::vector<int> src_;
  std::vector<int> dst_;
  std::vector<int> offsets_;
  std::vector<int> reverse_;
  Tensor features_;
  std::vector<int> labels_;
};

struct LoadOptions {
  bool row_normalize = false;  // scale each feature row to unit L1 mass
  bool keep_self_loops = false;
};

Graph load_dataset(const std::filesystem::path& dir,
                   const LoadOptions& options = {});
void save_dataset(const Graph& g, const std::filesystem::path& dir);

// Fraction of arcs whose endpoints share a label.
double edge_homophily(const Graph& g);

struct Split {
  std::vector<int> train;
  std::vector<int> val;
  std::vector<int> test;
  std::uint64_t seed = 0;
};

// Sizes for a 48/32/20 cut of n items via the largest-remainder rule
// (ties go to the earlier part).
std::array<std::size_t, 3> split_sizes(std::size_t n);
Split random_split(const Graph& g, std::uint64_t seed);

// Dataset directory: explicit path if it exists, else $HETEROGNN_DATA/<name>.
std::filesystem::path resolve_dataset(const std::string& name_or_path);

}  // namespace hgnn

#endif  // HGNN_GRAPH_HPP_
