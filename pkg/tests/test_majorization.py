import numpy as np
import pandas as pd
import pytest

from mtc.domain.hardy import adjoint_hardy, hardy, potential, weight_from_s
from mtc.domain.identities import HypothesisError
from mtc.domain.majorization import (
    COINCIDENT_C,
    conjecture_search_bitree_pair,
    cut_failure_search,
    default_delta,
    energy_lemma_checks,
    growth_by_depth,
    majorant_1tree,
    majorant_bitree,
    majorant_coincident,
    majorant_tritree,
    obstruction_4tree,
    obstruction_4tree_exhaustive,
    obstruction_ratio,
    pair_majorant,
    superadditive_pair,
    up_set_cut_is_superadditive,
    verify_certificate,
)
from mtc.domain.poset import NTreeInstance
from mtc.transform.generate import superadditive_field


@pytest.fixture
def t2():
    return NTreeInstance.dyadic(2, 2, 2)


@pytest.fixture
def t3():
    return NTreeInstance.dyadic(3, 1, 2)


class TestOneTree:
    def test_certificate(self, rng):
        t = NTreeInstance.dyadic(1, 4, 2)
        g = adjoint_hardy(t, rng.exponential(size=t.shape))
        Ig = hardy(t, g)
        delta = float(np.quantile(Ig, 0.3))
        f = np.where(Ig <= delta, rng.exponential(size=t.shape), 0.0)
        lam = max(10 * delta, float(Ig.max()) / 2)
        cert = majorant_1tree(t, f, g, lam, delta)
        assert cert.domination_holds
        assert cert.cost_within_bound()
        assert cert.cost_bound == 16.0

    def test_lambda_hypothesis(self, b2):
        g = np.array([2.0, 1.0, 1.0])
        with pytest.raises(HypothesisError):
            majorant_1tree(b2, [1.0, 0.0, 0.0], g, lam=5.0, delta=2.0)

    def test_wrong_n(self, b2b2):
        with pytest.raises(HypothesisError):
            majorant_1tree(b2b2, np.ones(b2b2.shape), np.ones(b2b2.shape), 10.0, 1.0)


class TestProductMajorants:
    @pytest.mark.parametrize("seed", range(4))
    def test_bitree(self, t2, seed):
        rng = np.random.default_rng(seed)
        w = weight_from_s(t2, (0.5, 1.0))
        f, _ = superadditive_field(t2, w, rng)
        delta = default_delta(t2, w, f)
        cert = majorant_bitree(t2, w, f, 4 * delta, delta)
        assert cert.domination_holds
        assert cert.cost_within_bound()
        assert verify_certificate(t2, w, f, cert)

    def test_bitree_outer_records_cost_only(self, t2, rng):
        f, _ = superadditive_field(t2, None, rng)
        cert = majorant_bitree(t2, None, f, 4 * default_delta(t2, None, f), variant="outer")
        assert cert.variant == "bitree-outer"
        assert cert.cost_bound is None

    def test_tritree(self, t3, rng):
        f, _ = superadditive_field(t3, None, rng)
        delta = default_delta(t3, None, f)
        cert = majorant_tritree(t3, None, f, 4 * delta, delta)
        assert cert.domination_holds
        assert cert.normalized_cost <= 576.0 * (1 + 1e-9)

    def test_small_lambda_rejected(self, t2, rng):
        f, _ = superadditive_field(t2, None, rng)
        delta = default_delta(t2, None, f)
        with pytest.raises(HypothesisError):
            majorant_bitree(t2, None, f, 2 * delta, delta)

    def test_non_superadditive_rejected(self, b2b2):
        f = np.zeros(b2b2.shape)
        f[0, 0] = 1.0
        f[1, 1] = 1.0
        with pytest.raises(HypothesisError) as info:
            majorant_bitree(b2b2, None, f, 100.0)
        assert info.value.witness is not None

    def test_dense_weight_rejected(self, b2b2):
        f = adjoint_hardy(b2b2, np.ones(b2b2.shape))
        with pytest.raises(HypothesisError):
            majorant_bitree(b2b2, np.ones(b2b2.shape), f, 100.0)


class TestPairAndCoincident:
    @pytest.mark.parametrize("n", [2, 3])
    def test_pair_factor(self, n):
        t = NTreeInstance.dyadic(n, 1, 2)
        rng = np.random.default_rng(n)
        f, g, delta = superadditive_pair(t, rng)
        lam = 10 * delta
        cert = pair_majorant(t, f, g, lam, delta)
        assert cert.required_factor == pytest.approx(0.9)
        assert cert.domination_holds

    @pytest.mark.parametrize("n", [2, 3])
    def test_coincident(self, n):
        t = NTreeInstance.dyadic(n, 1, 2)
        f, _, delta = superadditive_pair(t, np.random.default_rng(10 + n), coincident=True)
        cert = majorant_coincident(t, f, 10 * delta, delta)
        assert cert.required_factor == pytest.approx(COINCIDENT_C * 0.8)
        assert cert.domination_holds

    def test_coincident_rejects_four_trees(self):
        t = NTreeInstance.dyadic(4, 1, 2)
        with pytest.raises(HypothesisError):
            majorant_coincident(t, np.ones(t.shape), 1.0)

    def test_superadditive_pair_support(self, t2, rng):
        f, g, delta = superadditive_pair(t2, rng)
        assert np.all(hardy(t2, g)[f > 0] <= delta + 1e-12)


class TestEnergyLemmas:
    def test_bitree(self, t2, rng):
        f, _ = superadditive_field(t2, None, rng)
        table = energy_lemma_checks(t2, None, f)
        assert list(table["lemma"]) == ["bitree-mixed", "bitree-product"]
        assert table["holds"].all()

    def test_tritree(self, t3, rng):
        f, _ = superadditive_field(t3, weight_from_s(t3, (1.0, 0.5, 0.5)), rng)
        table = energy_lemma_checks(t3, weight_from_s(t3, (1.0, 0.5, 0.5)), f)
        assert len(table) == 3
        assert table["holds"].all()

    def test_one_tree_rejected(self, b2):
        with pytest.raises(HypothesisError):
            energy_lemma_checks(b2, None, np.array([1.0, 0.0, 0.0]))


class TestSearch:
    def test_pair_search_table(self):
        table = conjecture_search_bitree_pair(1, trials=12, seed=0, depths=[1, 2])
        assert set(table["depth"]) <= {1, 2}
        assert {"scaled_tau_1", "scaled_tau_0.5", "scaled_tau_0.25"} <= set(table.columns)
        growth = growth_by_depth(table, "cost_ratio")
        assert list(growth.columns) == ["depth", "max", "increasing"]

    def test_growth_on_empty(self):
        assert growth_by_depth(pd.DataFrame(), "ratio").empty

    def test_obstruction_single_leaf(self):
        t = NTreeInstance.dyadic(4, 1, 2)
        f = np.zeros(t.shape)
        f[1, 1, 1, 1] = 1.0
        assert float(obstruction_ratio(t, f)) == pytest.approx(1.0)

    def test_obstruction_exhaustive(self):
        result = obstruction_4tree_exhaustive()
        assert result["cases"] == 2 ** 16 - 1
        assert result["max_ratio"] >= 1.0
        assert result["witness_leaves"]

    def test_obstruction_random(self):
        table = obstruction_4tree(1, trials=4, seed=0)
        assert set(table.columns) >= {"depth", "ratio", "vf4_cost_ratio"}
        assert (table["ratio"] >= 0).all()

    def test_cut_failure_search_runs(self):
        table = cut_failure_search(2, trials=5, seed=0)
        assert (table["ratio"] >= 0).all()

    def test_up_set_cut(self, t2, rng):
        sigma = rng.exponential(size=t2.shape)
        V = potential(t2, None, sigma)
        up = V <= float(np.median(V))
        assert up_set_cut_is_superadditive(t2, sigma, up)
        with pytest.raises(HypothesisError):
            up_set_cut_is_superadditive(t2, sigma, ~up)
