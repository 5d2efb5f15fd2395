import math

import numpy as np
import pandas as pd
import pytest

from mtc.domain.capacity import (
    CapacityError,
    capacity,
    capacity_bound_experiment,
    capacity_ladder_bound,
    fit_decay_slope,
    normalize_measure,
    superlevel_set,
)
from mtc.domain.hardy import hardy, potential, weight_from_s
from mtc.domain.poset import NTreeInstance, VertexSet
from tests.oracles import naive_capacity


class TestCapacity:
    def test_chain_leaf(self, chain):
        res = capacity(chain, np.array([False, True]))
        assert res.value == pytest.approx(0.5, abs=1e-10)
        np.testing.assert_allclose(res.minimizer, [0.5, 0.5], atol=1e-10)
        assert res.converged

    def test_bitree_corner(self, b2b2):
        E = np.zeros(b2b2.shape, dtype=bool)
        E[1, 1] = True
        res = capacity(b2b2, VertexSet(E))
        assert res.value == pytest.approx(0.25, abs=1e-10)
        assert res.active_set.members[1, 1]

    def test_minimizer_is_feasible(self, b2b2, rng):
        E = rng.random(b2b2.shape) < 0.4
        E[2, 2] = True
        res = capacity(b2b2, E)
        assert np.all(hardy(b2b2, res.minimizer)[E] >= 1 - 1e-8)
        assert np.all(res.minimizer >= 0)
        assert res.value == pytest.approx(naive_capacity(b2b2, E), rel=1e-5)

    def test_signed_value_is_not_larger(self, b2b2):
        E = np.zeros(b2b2.shape, dtype=bool)
        E[1, 1] = E[2, 2] = True
        res = capacity(b2b2, E)
        assert res.signed_value <= res.value + 1e-10

    def test_weighted(self, chain):
        w = np.array([1.0, 4.0])
        # min φ₀² + 4φ₁² s.t. φ₀ + φ₁ ≥ 1 → 4/5
        res = capacity(chain, np.array([False, True]), weight=w)
        assert res.value == pytest.approx(0.8, abs=1e-9)

    def test_empty_set(self, b2):
        with pytest.raises(CapacityError):
            capacity(b2, np.zeros(3, dtype=bool))


class TestSuperlevel:
    def test_b2(self, b2):
        level = superlevel_set(b2, None, np.array([0.0, 1.0, 0.0]), 1.5)
        assert level.members.tolist() == [False, True, False]

    def test_nonpositive_lambda(self, b2):
        with pytest.raises(CapacityError):
            superlevel_set(b2, None, np.ones(3), 0.0)

    def test_normalize(self, b2b2, rng):
        mu = rng.exponential(size=b2b2.shape)
        scaled, c = normalize_measure(b2b2, None, mu)
        assert potential(b2b2, None, scaled)[scaled > 0].max() == pytest.approx(1.0)
        np.testing.assert_allclose(scaled, mu * c)


class TestExperiment:
    def test_table_columns_and_monotone_sets(self, rng):
        t = NTreeInstance.dyadic(2, 2, 2)
        mu = np.zeros(t.shape)
        mu[t.leaf_mask] = rng.exponential(size=int(t.leaf_mask.sum()))
        table = capacity_bound_experiment(t, mu, [0.5, 1.0, 1.5, 2.0, 4.0])
        assert list(table.columns) == [
            "lambda", "set_size", "cap", "signed_cap", "energy", "ratio", "kkt_residual", "converged", "empty",
        ]
        # λ < 1 은 건너뜁니다
        assert table["lambda"].min() >= 1.0
        assert table["set_size"].is_monotonic_decreasing
        assert np.all(np.diff(table["cap"].to_numpy()) <= 1e-9)

    def test_one_tree_rejected(self, b2):
        with pytest.raises(CapacityError):
            capacity_bound_experiment(b2, np.ones(3), [1.0])

    def test_fit_slope(self):
        lam = np.array([1.0, 2.0, 4.0])
        table = pd.DataFrame({"lambda": lam, "cap": lam ** -4})
        assert fit_decay_slope(table) == pytest.approx(-4.0)
        assert math.isnan(fit_decay_slope(table.head(1)))


class TestLadder:
    @pytest.mark.parametrize("n", [2, 3])
    def test_feasible_for_large_lambda(self, n, rng):
        t = NTreeInstance.dyadic(n, 1, 2)
        mu = np.zeros(t.shape)
        mu[t.leaf_mask] = rng.exponential(size=int(t.leaf_mask.sum()))
        mu, _ = normalize_measure(t, None, mu)
        bound = capacity_ladder_bound(t, mu, 4.0)
        assert bound.feasible
        level = potential(t, None, mu) > 4.0
        if level.any():
            assert capacity(t, level).value <= bound.cost + 1e-9

    def test_weighted_weight_shapes(self, b2b2):
        w = weight_from_s(b2b2, (0.5, 0.5))
        mu = np.zeros(b2b2.shape)
        mu[1, 2] = 1.0
        table = capacity_bound_experiment(b2b2, mu, [1.0, 1.2], w=w)
        assert len(table) == 2
