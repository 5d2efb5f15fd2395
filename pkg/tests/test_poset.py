import numpy as np
import pytest

from mtc.config import BudgetExceededError, Config
from mtc.domain.poset import (
    DownSet,
    NTreeInstance,
    PosetError,
    Tree,
    build_dyadic_tree,
    down_closure,
    down_set_matrix,
    is_down_set,
    is_up_set,
    maximal_elements,
    random_down_set,
    up_closure,
)
from tests.oracles import naive_down_sets


class TestTree:
    def test_from_parents_depths(self):
        tr = Tree.from_parents([None, 0, 0, 1])
        assert tr.depth.tolist() == [0, 1, 1, 2]
        assert tr.leaves.tolist() == [False, False, True, True]
        assert tr.children[0] == (1, 2)

    def test_cycle_rejected(self):
        with pytest.raises(PosetError):
            Tree.from_parents([1, 0])

    def test_out_of_range_parent(self):
        with pytest.raises(PosetError):
            Tree.from_parents([None, 5])

    def test_leq_and_lca(self):
        tr = build_dyadic_tree(2)
        # 3, 4 는 1 의 자식, 5 는 2 의 자식
        assert tr.leq(3, 1) and tr.leq(3, 0)
        assert not tr.leq(1, 3)
        assert tr.lca(3, 4) == 1
        assert tr.lca(3, 5) == 0

    def test_dyadic_positions(self):
        tr = build_dyadic_tree(2)
        assert tr.regular_arity == 2
        assert tr.position[tr.levels[2]].tolist() == [0, 1, 2, 3]

    def test_depth_out_of_range(self):
        with pytest.raises(PosetError):
            build_dyadic_tree(-1)
        with pytest.raises(PosetError):
            build_dyadic_tree(1, arity=5)


class TestProduct:
    def test_shape_and_coords(self, b2b2):
        assert b2b2.shape == (3, 3)
        assert b2b2.size == 9
        assert b2b2.coords(4) == (1, 1)
        assert b2b2.index((2, 1)) == 7

    def test_product_order(self, b2b2):
        assert b2b2.leq((1, 1), (0, 0))
        assert b2b2.leq((1, 1), (1, 0))
        assert not b2b2.leq((1, 2), (2, 0))
        assert b2b2.join((1, 2), (2, 2)) == (0, 2)

    def test_n_out_of_range(self):
        tr = build_dyadic_tree(0)
        with pytest.raises(PosetError):
            NTreeInstance.of([tr] * 5)

    def test_budget(self):
        with pytest.raises(BudgetExceededError):
            NTreeInstance.dyadic(2, 3, 2, Config(budget_vertices=10))

    def test_masks(self, b2b2):
        up = b2b2.ancestor_mask((1, 1))
        assert up.sum() == 4
        assert b2b2.descendant_mask((0, 0)).all()
        assert b2b2.leaf_mask.sum() == 4

    def test_bad_vertex(self, b2b2):
        with pytest.raises(PosetError):
            b2b2.coords((3, 0))


class TestSubsets:
    def test_down_set_enumeration_matches_brute_force(self, b2b2):
        fast = {m.tobytes() for m in down_set_matrix(b2b2)}
        slow = {m.ravel().tobytes() for m in naive_down_sets(b2b2)}
        assert fast == slow

    def test_enumeration_cap(self, config):
        t = NTreeInstance.dyadic(2, 2, 2)
        with pytest.raises(PosetError):
            down_set_matrix(t, config)

    def test_closures(self, b2b2):
        mask = np.zeros(b2b2.shape, dtype=bool)
        mask[1, 0] = True
        down = down_closure(b2b2, mask)
        assert down.sum() == 3
        assert is_down_set(b2b2, down)
        up = up_closure(b2b2, mask)
        assert up.sum() == 2
        assert is_up_set(b2b2, up)

    def test_checked_rejects_non_down_set(self, b2b2):
        mask = np.zeros(b2b2.shape, dtype=bool)
        mask[0, 0] = True
        with pytest.raises(PosetError):
            DownSet.checked(b2b2, mask)

    def test_maximal_elements(self, b2b2):
        seed = np.zeros(b2b2.shape, dtype=bool)
        seed[1, 0] = True
        top = maximal_elements(b2b2, down_closure(b2b2, seed))
        assert top.sum() == 1 and top[1, 0]

    def test_random_down_set_is_closed(self, b2b2):
        for seed in range(20):
            D = random_down_set(b2b2, seed)
            assert is_down_set(b2b2, D.members)
