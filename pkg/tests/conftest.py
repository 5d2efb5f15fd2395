import numpy as np
import pytest

from mtc.config import Config
from mtc.domain.poset import NTreeInstance, Tree, build_dyadic_tree


@pytest.fixture
def config():
    return Config()


@pytest.fixture
def b2():
    """루트 o 와 잎 a=1, b=2 인 이진 트리."""
    return NTreeInstance.of([build_dyadic_tree(1, 2)])


@pytest.fixture
def b2b2():
    return NTreeInstance.dyadic(2, 1, 2)


@pytest.fixture
def chain():
    """두 정점 사슬 0 > 1."""
    return NTreeInstance.of([Tree.from_parents([None, 0])])


@pytest.fixture
def canonical_mu(b2b2):
    mu = np.zeros(b2b2.shape)
    mu[1, 1] = 1.0
    return mu


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
