import numpy as np
import pytest

from mtc.domain.covering import (
    CoveringError,
    covering_construction,
    good_potential,
    interval_potential,
    local_chains,
)
from mtc.domain.hardy import adjoint_hardy, potential
from mtc.domain.poset import NTreeInstance, Tree
from mtc.transform.generate import random_leaf_measure


class TestIntervalPotential:
    def test_full_interval_is_potential(self, b2b2, rng):
        mu = rng.exponential(size=b2b2.shape)
        V = potential(b2b2, None, mu)
        assert interval_potential(b2b2, None, mu, (0, 0), (1, 2)) == pytest.approx(V[1, 2])

    def test_single_point(self, b2b2, rng):
        mu = rng.exponential(size=b2b2.shape)
        value = interval_potential(b2b2, None, mu, (1, 1), (1, 1))
        assert value == pytest.approx(adjoint_hardy(b2b2, mu)[1, 1])

    def test_order_required(self, b2b2):
        with pytest.raises(CoveringError):
            interval_potential(b2b2, None, np.ones(b2b2.shape), (1, 1), (0, 0))

    def test_local_chains(self, b2b2):
        chains = local_chains(b2b2, (2, 0))
        assert [c.tolist() for c in chains] == [[2, 0], [0]]


class TestGoodPotential:
    def test_zero_threshold_gives_full_potential(self, b2b2, rng):
        mu = rng.exponential(size=b2b2.shape)
        np.testing.assert_allclose(good_potential(b2b2, None, mu, 0.0), potential(b2b2, None, mu))

    def test_large_threshold_gives_zero(self, b2b2, rng):
        mu = rng.exponential(size=b2b2.shape)
        assert not good_potential(b2b2, None, mu, 1e9).any()

    def test_matches_interval_sums_on_irregular_trees(self, rng):
        t = NTreeInstance.of([Tree.from_parents([None, 0, 0, 1, 1, 3]), Tree.from_parents([None, 0, 0])])
        mu = rng.exponential(size=t.shape)
        f = adjoint_hardy(t, mu)
        eps_prime = float(np.median(potential(t, None, mu)))
        expected = np.zeros(t.shape)
        for omega in np.ndindex(t.shape):
            for P in np.ndindex(t.shape):
                if t.leq(omega, P) and interval_potential(t, None, mu, P, omega) > eps_prime:
                    expected[omega] += f[P]
        result = good_potential(t, None, mu, eps_prime)
        np.testing.assert_allclose(result, expected)
        assert 0 < np.count_nonzero(result) < t.size


class TestConstruction:
    def test_canonical_cover_branch(self, b2b2, canonical_mu):
        trace = covering_construction(b2b2, None, canonical_mu * 0.25, (1, 1))
        assert trace.eps_prime == pytest.approx(0.0625)
        assert trace.verified
        doc = trace.to_dict()
        assert doc["branch"] == trace.branch
        assert doc["omega"] == [1, 1]

    @pytest.mark.parametrize("n", [2, 3])
    def test_random_instances_verified(self, n):
        t = NTreeInstance.dyadic(n, 2 if n == 2 else 1, 2)
        for seed in range(3):
            rng = np.random.default_rng(seed)
            mu = random_leaf_measure(t, rng)
            omega = tuple(int(x) for x in np.unravel_index(int(np.argmax(mu)), t.shape))
            trace = covering_construction(t, None, mu, omega)
            assert trace.verified
            if trace.cover_required:
                assert trace.good_bound_holds is None
            else:
                assert trace.good_bound_holds

    def test_one_tree_rejected(self, b2):
        with pytest.raises(CoveringError):
            covering_construction(b2, None, np.ones(3), 1)
