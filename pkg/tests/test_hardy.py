import numpy as np
import pytest

from mtc.domain.hardy import (
    FieldError,
    TensorWeight,
    adjoint_hardy,
    as_field,
    delta_coord,
    energy,
    hardy,
    hardy_coord,
    is_superadditive,
    pairing,
    potential,
    truncated,
    weight_from_s,
)
from mtc.domain.poset import NTreeInstance, Tree
from tests.oracles import naive_adjoint, naive_hardy


@pytest.fixture
def mixed():
    """좌표별로 다른 트리의 곱."""
    return NTreeInstance.of([Tree.from_parents([None, 0, 0, 1]), Tree.from_parents([None, 0])])


class TestOperators:
    def test_hardy_matches_definition(self, mixed, rng):
        f = rng.normal(size=mixed.shape)
        np.testing.assert_allclose(hardy(mixed, f), naive_hardy(mixed, f))
        np.testing.assert_allclose(adjoint_hardy(mixed, f), naive_adjoint(mixed, f))

    def test_hardy_on_b2(self, b2):
        assert hardy(b2, [1.0, 2.0, 3.0]).tolist() == [1.0, 3.0, 4.0]
        assert adjoint_hardy(b2, [1.0, 2.0, 3.0]).tolist() == [6.0, 2.0, 3.0]

    def test_coordinate_operators_compose(self, b2b2, rng):
        f = rng.exponential(size=b2b2.shape)
        np.testing.assert_allclose(hardy_coord(b2b2, hardy_coord(b2b2, f, [1]), [2]), hardy(b2b2, f))

    def test_batch_axes(self, b2b2, rng):
        batch = rng.normal(size=(5,) + b2b2.shape)
        out = hardy(b2b2, batch)
        for k in range(5):
            np.testing.assert_allclose(out[k], hardy(b2b2, batch[k]))

    def test_bad_coordinate(self, b2b2):
        with pytest.raises(FieldError):
            hardy_coord(b2b2, np.zeros(b2b2.shape), [3])

    def test_shape_mismatch(self, b2b2):
        with pytest.raises(FieldError):
            as_field(b2b2, np.zeros((2, 2)))

    def test_negative_rejected(self, b2):
        with pytest.raises(FieldError):
            as_field(b2, [1.0, -1.0, 0.0], nonnegative=True)

    def test_fields_are_plain_arrays(self, b2b2):
        flat = np.arange(b2b2.size, dtype=float)
        arr = as_field(b2b2, flat)
        assert type(arr) is np.ndarray
        assert arr.shape == b2b2.shape
        assert np.array_equal(arr.ravel(), flat)
        for out in (hardy(b2b2, flat), adjoint_hardy(b2b2, flat), potential(b2b2, None, flat)):
            assert type(out) is np.ndarray
            assert out.shape == b2b2.shape


class TestSuperadditivity:
    def test_adjoint_of_nonnegative_is_superadditive(self, b2b2, rng):
        g = adjoint_hardy(b2b2, rng.exponential(size=b2b2.shape))
        assert is_superadditive(b2b2, g)
        assert np.all(delta_coord(b2b2, g, 1) >= -1e-12)

    def test_detects_failure(self, b2):
        assert not is_superadditive(b2, [0.0, 1.0, 1.0])


class TestWeights:
    def test_from_s_uniform(self, b2b2):
        W = weight_from_s(b2b2, (1.0, 1.0))
        assert W.is_uniform()
        np.testing.assert_allclose(W.dense(b2b2), np.ones(b2b2.shape))

    def test_from_s_half(self, b2):
        W = weight_from_s(b2, (0.5,))
        np.testing.assert_allclose(W.factors[0], [1.0, np.sqrt(2.0), np.sqrt(2.0)])

    @pytest.mark.parametrize("s", [(0.0,), (1.5,), (1.0, 1.0)])
    def test_from_s_rejects(self, b2, s):
        with pytest.raises(FieldError):
            weight_from_s(b2, s)

    def test_partial_is_product_of_factors(self, b2b2):
        W = TensorWeight((np.array([1.0, 2.0, 3.0]), np.array([1.0, 5.0, 7.0])))
        assert W.dense(b2b2)[2, 1] == 15.0
        assert W.partial(b2b2, [2]).shape == (1, 3)

    def test_negative_factor(self):
        with pytest.raises(FieldError):
            TensorWeight((np.array([1.0, -1.0]),))


class TestEnergy:
    def test_potential_on_b2(self, b2):
        mu = np.array([0.0, 1.0, 0.0])
        assert potential(b2, None, mu).tolist() == [1.0, 2.0, 1.0]
        assert energy(b2, None, mu) == 2.0

    def test_energy_equals_pairing(self, b2b2, rng):
        mu = rng.exponential(size=b2b2.shape)
        assert energy(b2b2, None, mu) == pytest.approx(pairing(b2b2, None, mu, mu))
        assert energy(b2b2, None, mu) == pytest.approx(float(np.sum(potential(b2b2, None, mu) * mu)))

    def test_truncation_boundary_is_inclusive(self, b2):
        mu = np.array([0.0, 1.0, 0.0])
        rep = truncated(b2, None, mu, delta=1.0)
        # 𝐕 = 1 인 루트만 남습니다
        assert rep.truncated_energy == 1.0
        assert rep.energy == 2.0

    def test_truncated_potential_is_bounded_on_one_tree(self, b2, rng):
        mu = rng.exponential(size=b2.shape)
        for delta in (0.5, 1.0, 3.0):
            rep = truncated(b2, None, mu, delta, with_potential=True)
            assert rep.truncated_potential.max() <= delta + 1e-12

    def test_negative_delta(self, b2):
        with pytest.raises(FieldError):
            truncated(b2, None, np.ones(3), -1.0)
