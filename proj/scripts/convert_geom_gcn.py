#!/usr/bin/env python3
# Copyright 2026 The HeteroGNN Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Converts geom-gcn style raw files into the heterognn TSV layout.

Input directory (as distributed in geom-gcn's new_data/<name>/):
  out1_graph_edges.txt         header line, then "src<TAB>dst" per edge
  out1_node_feature_label.txt  header line, then "id<TAB>f1,f2,...<TAB>label"

Output directory:
  edges.tsv     "u<TAB>v" per undirected edge
  features.tsv  one row of tab-separated values per node, in id order
  labels.tsv    one integer label per line, in id order
  meta.json     {"n_classes": C, "name": ...}

Example:
  python3 scripts/convert_geom_gcn.py geom-gcn/new_data/texas \\
      "$HETEROGNN_DATA/texas"
"""

import argparse
import json
import pathlib
import sys


def read_nodes(path):
  rows = {}
  with open(path) as f:
    next(f)  # header
    for line_no, line in enumerate(f, start=2):
      parts = line.rstrip("\n").split("\t")
      if len(parts) != 3:
        raise ValueError(f"{path}:{line_no}: expected id, features, label")
      node = int(parts[0])
      rows[node] = ([float(v) for v in parts[1].split(",")], int(parts[2]))
  n = len(rows)
  if sorted(rows) != list(range(n)):
    raise ValueError(f"{path}: node ids are not 0..{n - 1}")
  dims = {len(rows[i][0]) for i in range(n)}
  if len(dims) != 1:
    raise ValueError(f"{path}: ragged feature rows {sorted(dims)}")
  return [rows[i][0] for i in range(n)], [rows[i][1] for i in range(n)]


def read_edges(path, n):
  edges = set()
  with open(path) as f:
    next(f)
    for line_no, line in enumerate(f, start=2):
      parts = line.split()
      if not parts:
        continue
      u, v = int(parts[0]), int(parts[1])
      if not (0 <= u < n and 0 <= v < n):
        raise ValueError(f"{path}:{line_no}: node id out of range")
      edges.add((min(u, v), max(u, v)))
  return sorted(edges)


def main(argv=None):
  parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
  parser.add_argument("src", type=pathlib.Path, help="geom-gcn dataset dir")
  parser.add_argument("dst", type=pathlib.Path, help="output dataset dir")
  parser.add_argument("--name", help="dataset name (default: src dir name)")
  args = parser.parse_args(argv)

  features, labels = read_nodes(args.src / "out1_node_feature_label.txt")
  edges = read_edges(args.src / "out1_graph_edges.txt", len(labels))

  args.dst.mkdir(parents=True, exist_ok=True)
  with open(args.dst / "edges.tsv", "w") as f:
    f.writelines(f"{u}\t{v}\n" for u, v in edges)
  with open(args.dst / "features.tsv", "w") as f:
    f.writelines("\t".join(repr(x) for x in row) + "\n" for row in features)
  with open(args.dst / "labels.tsv", "w") as f:
    f.writelines(f"{y}\n" for y in labels)
  meta = {"n_classes": max(labels) + 1, "name": args.name or args.src.name}
  (args.dst / "meta.json").write_text(json.dumps(meta, indent=2) + "\n")
  print(f"{meta['name']}: N={len(labels)} E={len(edges)} "
        f"F={len(features[0])} C={meta['n_classes']} -> {args.dst}")
  return 0


if __name__ == "__main__":
  sys.exit(main())
