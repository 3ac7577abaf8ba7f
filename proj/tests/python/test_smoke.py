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

import math

import numpy as np
import pytest

heterognn = pytest.importorskip(
    "heterognn", reason="heterognn not installed (pip install .)")


def test_expected_gap_matches_ratio_power():
  p, q, c = 0.003, 0.01, 3
  r = heterognn.expected_gap_ratio(p, q, c)
  assert r == pytest.approx((p + q) / (p + (c - 1) * q))
  g0 = heterognn.expected_gap(p, q, c, 0, [1.0, 0.0], [0.0, 1.0])
  g5 = heterognn.expected_gap(p, q, c, 5, [1.0, 0.0], [0.0, 1.0])
  assert g0 == pytest.approx(math.sqrt(2.0))
  assert g5 == pytest.approx(abs(r) ** 5 * math.sqrt(2.0), rel=1e-12)


def test_sample_csbm_is_signed_and_deterministic():
  means = np.array([[-0.5], [0.0], [0.5]])
  g1, s1 = heterognn.sample_csbm(300, 3, 0.05, 0.03, means, seed=7)
  g2, s2 = heterognn.sample_csbm(300, 3, 0.05, 0.03, means, seed=7)
  assert s1 == s2
  assert g1.n_nodes == 300 and g1.n_classes == 3
  assert g1.n_edges == len(s1)
  labels = g1.labels
  for u, v, sign in s1:
    assert u < v
    assert sign == (1 if labels[u] == labels[v] else -1)
  assert g1.features.shape == (300, 1)


def test_simulation_gap_shrinks():
  means = np.array([[-0.5], [0.0], [0.5]])
  r = heterognn.simulate(600, 3, 0.02, 0.04, means, layers=8, trials=2,
                         seed=1)
  assert len(r["means"]) == 9
  assert r["gap"][8] < r["gap"][0]


def test_sign_composition_counterexample():
  r = heterognn.sign_composition_counterexample()
  assert all(r["layers_desirable"])
  assert not r["desirable"]
  assert (2, 0, 1.0) in r["violations"]
  assert r["cumulative"].shape == (3, 3)
  control = heterognn.sign_composition_counterexample([0, 1, 0])
  assert control["desirable"]


def test_m2m_pool_separates_what_sum_cannot():
  w = np.eye(2)
  a = np.array([[1.0, 0.0], [0.0, 1.0]])
  b = np.array([[0.0, 1.0], [1.0, 0.0]])
  assert heterognn.phi_pool(a, w) == heterognn.phi_pool(b, w)
  assert (heterognn.m2m_pool(a, [0, 1], 2, w) !=
          heterognn.m2m_pool(b, [0, 1], 2, w))


def test_dataset_round_trip_and_training(tmp_path):
  rng = np.random.default_rng(0)
  n, c = 90, 3
  labels = [i % c for i in range(n)]
  # Heterophilic ring-of-classes: each node links to the next class.
  edges = [(i, (i + 1) % n) for i in range(n)] + [(i, (i + 4) % n)
                                                  for i in range(n)]
  feats = np.eye(c)[labels] + 0.3 * rng.standard_normal((n, c))
  g = heterognn.Graph(n, edges, feats, labels)
  heterognn.save_dataset(g, tmp_path / "ring")
  h = heterognn.load_dataset(tmp_path / "ring")
  assert h.n_nodes == n and h.n_edges == g.n_edges
  assert h.labels == labels
  np.testing.assert_allclose(h.features, g.features, rtol=1e-12)
  r = heterognn.run_splits(h, {"max_epochs": 40, "model": {"hidden": 12,
                                                          "chunks": 3}},
                           n_splits=2, seed=3)
  assert len(r["splits"]) == 2 and r["finite"]
  assert 0.0 <= r["mean_acc"] <= 1.0


def test_errors_are_value_errors(tmp_path):
  with pytest.raises(ValueError):
    heterognn.sample_csbm(10, 3, 0.5, 0.5, np.zeros((3, 1)))  # N % C != 0
  with pytest.raises(ValueError):
    heterognn.load_dataset(tmp_path / "missing")
  with pytest.raises(ValueError):
    heterognn.run_splits(heterognn.Graph(3, [(0, 1)], np.zeros((3, 1)),
                                         [0, 1, 0]),
                         {"no_such_key": 1})
