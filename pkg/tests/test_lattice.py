import math

import numpy as np
import pytest

from mtc.domain.lattice import (
    LatticeError,
    LatticeSample,
    analytic_kernel,
    box_sup,
    distances,
    good_lattice_probability,
    kernel_domination,
    poisson_failure_witness,
    poisson_growth,
    poisson_kernel,
    tree_side,
)
from mtc.domain.poset import NTreeInstance, build_dyadic_tree


class TestDistances:
    def test_opposite_points(self):
        D, _ = distances(0.5, -0.5)
        assert D == pytest.approx(3.0)
        D_arc, _ = distances(0.5, -0.5, metric="arc")
        assert D_arc == pytest.approx(math.pi + 1.0)

    def test_lattice_distance_is_an_arc_length(self):
        _, DL = distances(0.9, 0.9 * np.exp(0.1j), theta=0.3)
        assert 0.0 < DL <= 2 * math.pi

    def test_outside_disc(self):
        with pytest.raises(LatticeError):
            LatticeSample(theta=0.0, generations=0, z=1.0 + 0j, zeta=0.5 + 0j)

    def test_unknown_metric(self):
        with pytest.raises(LatticeError):
            distances(0.5, 0.5, metric="taxicab")


class TestGoodLattice:
    def test_probability_and_bound(self):
        rep = good_lattice_probability(8, trials=20000, seed=0)
        assert rep.generations == 4
        assert abs(rep.probability - 15.0 / 16.0) < 0.01
        assert rep.ci_low <= rep.probability <= rep.ci_high
        assert rep.violations == 0

    def test_small_m_is_always_good(self):
        rep = good_lattice_probability(3, trials=100, seed=1)
        assert rep.good == 100

    def test_bad_arguments(self):
        with pytest.raises(LatticeError):
            good_lattice_probability(0, 10, 0)
        with pytest.raises(LatticeError):
            good_lattice_probability(5, 0, 0)


class TestKernels:
    def test_tree_side(self):
        assert tree_side(np.array([0, 3]), 1.0).tolist() == [1.0, 4.0]
        # q = √2 이면 1 + q
        assert tree_side(np.array([1]), 0.5)[0] == pytest.approx(1.0 + math.sqrt(2.0))

    def test_log_kernel_at_origin(self):
        k = analytic_kernel(1.0)
        assert k(np.array([1.0]), np.array([0.0]))[0] == pytest.approx(1.0 + math.log(2.0))

    def test_poisson_kernel_at_origin(self):
        assert poisson_kernel(np.array([1.0]), np.array([0.0]))[0] == pytest.approx(1.0)

    def test_box_sup_dominates_samples(self):
        tree = build_dyadic_tree(3)
        a = np.array([7])
        b = np.array([8])
        sup = box_sup(tree, a, b, poisson_kernel)[0]
        assert sup >= 1.0


class TestKernelDomination:
    @pytest.mark.parametrize("n,s", [(1, (1.0,)), (2, (0.5, 1.0))])
    def test_tree_side_dominated(self, n, s):
        t = NTreeInstance.dyadic(n, 3, 2)
        rep = kernel_domination(t, s, trials=500, seed=0)
        assert rep.dk_violations == 0
        assert 0.0 <= rep.reverse_probability <= 1.0
        assert len(rep.records) == 500

    def test_bad_s(self, b2):
        with pytest.raises(LatticeError):
            kernel_domination(b2, (0.0,), trials=10, seed=0)

    def test_requires_dyadic(self, chain):
        with pytest.raises(LatticeError):
            kernel_domination(chain, (1.0,), trials=10, seed=0)


class TestPoisson:
    def test_witness_is_square_of_one_dimensional_max(self):
        w = poisson_failure_witness(3)
        assert w.max_ratio >= w.diagonal_leaf_ratio * (1 - 1e-12)
        assert w.alpha[0] == w.alpha[1]

    def test_growth_is_increasing(self):
        table = poisson_growth(range(2, 7))
        assert table["increasing"].all()
        assert table["max_ratio"].is_monotonic_increasing
        assert (table["max_ratio"].diff().dropna() > 0).all()

    def test_bad_depth(self):
        with pytest.raises(LatticeError):
            poisson_failure_witness(0)
        with pytest.raises(LatticeError):
            poisson_failure_witness(3, d=3)
