import numpy as np
import pytest

from mtc.config import Config
from mtc.domain.constants import (
    ConstantsError,
    EmbeddingConvergenceError,
    boundary_embedding_constant,
    box_constant,
    carleson_constant,
    chang_carleson_dyadic,
    embedding_constant,
    hereditary_constant,
    ordering_report,
)
from mtc.domain.hardy import weight_from_s
from mtc.domain.poset import NTreeInstance


class TestCanonical:
    def test_all_four_equal_four(self, b2b2, canonical_mu):
        report = ordering_report(b2b2, None, canonical_mu)
        assert report.all_exact()
        np.testing.assert_allclose(report.values(), (4.0, 4.0, 4.0, 4.0), rtol=1e-9)
        assert report.chain_holds

    def test_box_witness_is_root(self, b2b2, canonical_mu):
        est = box_constant(b2b2, None, canonical_mu)
        assert est.witness == (0, 0)


class TestSingleTree:
    def test_box_on_b2(self, b2):
        est = box_constant(b2, None, np.array([0.0, 1.0, 0.0]))
        assert est.value == pytest.approx(2.0)

    def test_zero_measure(self, b2):
        with pytest.raises(ConstantsError):
            box_constant(b2, None, np.zeros(3))


class TestOrdering:
    @pytest.mark.parametrize("seed", range(5))
    def test_chain_on_random_instances(self, b2b2, seed):
        rng = np.random.default_rng(seed)
        mu = np.where(rng.random(b2b2.shape) < 0.6, rng.exponential(size=b2b2.shape), 0.0)
        mu[2, 2] += 0.1
        report = ordering_report(b2b2, weight_from_s(b2b2, (0.5, 1.0)), mu)
        box, car, hc, ce = report.values()
        assert box <= car * (1 + 1e-9)
        assert car <= hc * (1 + 1e-9)
        assert hc <= ce * (1 + 1e-6)

    def test_sampled_carleson_is_a_lower_bound(self, b2b2, rng):
        mu = rng.exponential(size=b2b2.shape)
        exact = carleson_constant(b2b2, None, mu, mode="exact")
        sampled = carleson_constant(b2b2, None, mu, mode="sampled", trials=30, seed=1)
        assert not sampled.exact
        assert sampled.value <= exact.value * (1 + 1e-9)

    def test_local_search_is_a_lower_bound(self, b2b2, rng):
        mu = rng.exponential(size=b2b2.shape)
        exact = hereditary_constant(b2b2, None, mu, mode="exact")
        local = hereditary_constant(b2b2, None, mu, mode="local-search", trials=10, seed=2)
        assert local.value <= exact.value * (1 + 1e-9)

    def test_exact_carleson_cap(self, rng):
        t = NTreeInstance.dyadic(2, 2, 2)
        with pytest.raises(ConstantsError):
            carleson_constant(t, None, rng.exponential(size=t.shape), mode="exact")

    def test_exact_hereditary_cap(self, rng):
        t = NTreeInstance.dyadic(2, 2, 2)
        with pytest.raises(ConstantsError):
            hereditary_constant(t, None, rng.exponential(size=t.shape), mode="exact", config=Config(exact_subset_cap=5))

    def test_unknown_mode(self, b2b2, canonical_mu):
        with pytest.raises(ConstantsError):
            carleson_constant(b2b2, None, canonical_mu, mode="guess")


class TestEmbedding:
    def test_matrix_free_agrees(self, b2b2, rng):
        mu = rng.exponential(size=b2b2.shape)
        dense = embedding_constant(b2b2, None, mu)
        free = embedding_constant(b2b2, None, mu, config=Config(matrix_free_threshold=0))
        assert free.value == pytest.approx(dense.value, rel=1e-8)

    def test_non_convergence_reports_bracket(self, b2b2, rng):
        mu = rng.exponential(size=b2b2.shape)
        with pytest.raises(EmbeddingConvergenceError) as info:
            embedding_constant(b2b2, None, mu, tol=0.0, config=Config(power_max_iter=3))
        low, high = info.value.bracket
        assert low <= high


class TestBoundary:
    def test_root_mass_on_b2(self, b2):
        nu = np.array([1.0, 0.0, 0.0])
        assert chang_carleson_dyadic(b2, nu).value == pytest.approx(1.0)
        assert boundary_embedding_constant(b2, nu).value == pytest.approx(1.0)

    def test_sampled_below_exact(self, b2b2, rng):
        nu = rng.exponential(size=b2b2.shape)
        exact = chang_carleson_dyadic(b2b2, nu)
        sampled = chang_carleson_dyadic(b2b2, nu, mode="sampled", trials=2000, seed=3)
        assert sampled.value <= exact.value * (1 + 1e-12)

    def test_requires_dyadic_trees(self, chain):
        with pytest.raises(ConstantsError):
            chang_carleson_dyadic(chain, np.ones(2))
