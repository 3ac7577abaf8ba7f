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

"""Signed message passing analysis and multiset-to-multiset GNNs."""

import json as _json

from heterognn._core import (
    FormatError,
    Graph,
    ParameterError,
    expected_gap,
    expected_gap_ratio,
    load_dataset,
    m2m_pool,
    phi_pool,
    resolve_dataset,
    sample_csbm,
    save_dataset,
    sign_composition_counterexample,
    simulate,
)
from heterognn import _core


def default_train_config():
    """Training defaults as a nested dict (same keys as the CLI configs)."""
    return _json.loads(_core._default_train_config())


def run_splits(graph, config=None, n_splits=10, seed=0, jobs=1):
    """Trains on `n_splits` random 48/32/20 train/val/test splits.

    `config` is a partial dict merged over default_train_config(); nested
    "model" keys merge individually. Returns per-split accuracies plus
    mean_acc/std_acc.
    """
    merged = default_train_config()
    for key, value in (config or {}).items():
        if key == "model":
            merged["model"].update(value)
        else:
            merged[key] = value
    return _core._run_splits(graph, _json.dumps(merged), n_splits, seed, jobs)


__all__ = [
    "FormatError",
    "Graph",
    "ParameterError",
    "default_train_config",
    "expected_gap",
    "expected_gap_ratio",
    "load_dataset",
    "m2m_pool",
    "phi_pool",
    "resolve_dataset",
    "run_splits",
    "sample_csbm",
    "save_dataset",
    "sign_composition_counterexample",
    "simulate",
]
