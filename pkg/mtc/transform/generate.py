"""
인스턴스/필드/측도 생성기.

가중치는 항상 텐서 곱 형태이고, 초가법 필드는 𝐈*μ 와 윗집합 절단으로만 만듭니다.
"""
from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Sequence, Tuple, Union

import numpy as np

from mtc.config import DEFAULT_CONFIG, Config
from mtc.domain.hardy import TensorWeight, adjoint_hardy, potential, weight_from_s
from mtc.domain.poset import NTreeInstance, build_dyadic_tree

logger = logging.getLogger(__name__)

WeightSpec = Union[str, Tuple[str, Tuple[float, ...]]]

_FROM_S = re.compile(r"^from-s\(([^)]*)\)$")
_LEAF_SPARSE = re.compile(r"^leaf-(sparse|random)\((\d+)\)$")


class GenerationError(Exception):
    """인스턴스 생성 사양 에러"""
    pass


@dataclass
class Instance:
    t: NTreeInstance
    weight: TensorWeight
    mu: np.ndarray
    meta: Dict[str, Any] = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.t.n


def parse_weight_spec(spec: WeightSpec) -> Tuple[str, Tuple[float, ...]]:
    """
    "uniform" | "tensor-random" | "from-s(1,0.5)" 또는 ("from-s", (1, 0.5)) 를 해석합니다.

    Raises:
        GenerationError: 알 수 없는 사양
    """
    if isinstance(spec, tuple):
        kind, values = spec
        return str(kind), tuple(float(v) for v in values)
    spec = str(spec).strip()
    if spec in ("uniform", "tensor-random"):
        return spec, ()
    m = _FROM_S.match(spec)
    if m:
        try:
            return "from-s", tuple(float(v) for v in m.group(1).split(",") if v.strip())
        except ValueError as e:
            raise GenerationError(f"s 값을 해석할 수 없습니다: {spec}: {e}") from e
    raise GenerationError(f"알 수 없는 가중치 사양입니다: {spec}")


def make_weight(t: NTreeInstance, spec: WeightSpec, rng: np.random.Generator) -> TensorWeight:
    kind, values = parse_weight_spec(spec)
    if kind == "uniform":
        return TensorWeight.uniform(t)
    if kind == "tensor-random":
        return TensorWeight(tuple(rng.uniform(0.5, 2.0, m) for m in t.shape))
    if kind == "from-s":
        return weight_from_s(t, values)
    raise GenerationError(f"알 수 없는 가중치 사양입니다: {spec}")


def make_measure(
    t: NTreeInstance,
    spec: str,
    rng: np.random.Generator,
    values: Optional[Sequence[float]] = None,
) -> np.ndarray:
    """
    측도 사양:
        leaf-sparse(k): 무작위 잎 k 개에 단위 질량
        leaf-random(k): 무작위 잎 k 개에 지수분포 질량
        uniform-leaf: 모든 잎에 단위 질량
        custom: values 를 그대로 사용 (길이 t.size)
    """
    leaves = np.flatnonzero(t.leaf_mask.ravel())
    mu = np.zeros(t.size)
    m = _LEAF_SPARSE.match(spec)
    if m:
        k = int(m.group(2))
        if not 1 <= k <= leaves.size:
            raise GenerationError(f"잎 개수 {k} 는 1..{leaves.size} 범위여야 합니다.")
        chosen = rng.choice(leaves, size=k, replace=False)
        mu[chosen] = 1.0 if m.group(1) == "sparse" else rng.exponential(1.0, size=k)
    elif spec == "uniform-leaf":
        mu[leaves] = 1.0
    elif spec == "custom":
        if values is None:
            raise GenerationError("custom 측도에는 values 가 필요합니다.")
        mu = np.asarray(values, dtype=np.float64).ravel()
        if mu.size != t.size or np.any(mu < 0):
            raise GenerationError(f"custom 측도는 길이 {t.size} 의 음이 아닌 배열이어야 합니다.")
    else:
        raise GenerationError(f"알 수 없는 측도 사양입니다: {spec}")
    return mu.reshape(t.shape)


def generate_instance(
    n: int,
    depth: int,
    arity: int = 2,
    weight_spec: WeightSpec = "uniform",
    measure_spec: str = "leaf-sparse(1)",
    seed: int = 0,
    values: Optional[Sequence[float]] = None,
    config: Config = DEFAULT_CONFIG,
) -> Instance:
    """
    결정적 인스턴스를 생성합니다.

    Args:
        n: 트리 개수 (1..4)
        depth: 좌표 트리 깊이
        arity: 분기 수
        weight_spec: 가중치 사양
        measure_spec: 측도 사양
        seed: 시드

    Returns:
        Instance

    Raises:
        BudgetExceededError: 곱 트리 크기 초과
        GenerationError: 사양 오류
    """
    t = NTreeInstance.dyadic(n, depth, arity, config)
    rng = np.random.default_rng(seed)
    weight = make_weight(t, weight_spec, rng)
    mu = make_measure(t, measure_spec, rng, values)
    kind, s_values = parse_weight_spec(weight_spec)
    meta = {
        "n": n,
        "depth": depth,
        "arity": arity,
        "weight_spec": kind if not s_values else f"{kind}({','.join(format(v, 'g') for v in s_values)})",
        "measure_spec": measure_spec,
        "seed": int(seed),
    }
    logger.debug(f"인스턴스 생성: {meta}")
    return Instance(t=t, weight=weight, mu=mu, meta=meta)


def canonical_instance(config: Config = DEFAULT_CONFIG) -> Instance:
    """B2×B2, w ≡ 1, 잎 (a, a) 의 단위 질량."""
    inst = generate_instance(2, 1, 2, "uniform", "leaf-sparse(1)", seed=0, config=config)
    mu = np.zeros(inst.t.shape)
    mu[1, 1] = 1.0
    inst.mu = mu
    inst.meta["measure_spec"] = "custom"
    return inst


# --- 필드 생성기 -------------------------------------------------------------------


def random_field(t: NTreeInstance, rng: np.random.Generator, signed: bool = False, density: float = 1.0) -> np.ndarray:
    values = rng.normal(size=t.shape) if signed else rng.exponential(1.0, size=t.shape)
    if density < 1.0:
        values = np.where(rng.random(t.shape) < density, values, 0.0)
    return values


def random_leaf_measure(t: NTreeInstance, rng: np.random.Generator, max_points: int = 6) -> np.ndarray:
    leaves = np.flatnonzero(t.leaf_mask.ravel())
    k = int(rng.integers(1, min(max_points, leaves.size) + 1))
    mu = np.zeros(t.size)
    mu[rng.choice(leaves, size=k, replace=False)] = rng.exponential(1.0, size=k)
    return mu.reshape(t.shape)


def random_measure(t: NTreeInstance, rng: np.random.Generator, max_points: int = 6) -> np.ndarray:
    """임의 정점 위 희소 측도."""
    k = int(rng.integers(1, min(max_points, t.size) + 1))
    mu = np.zeros(t.size)
    mu[rng.choice(t.size, size=k, replace=False)] = rng.exponential(1.0, size=k)
    return mu.reshape(t.shape)


def superadditive_field(
    t: NTreeInstance,
    w: Optional[TensorWeight],
    rng: np.random.Generator,
    delta: Optional[float] = None,
) -> Tuple[np.ndarray, float]:
    """
    f = 𝐈*μ·1_{𝐕^μ≤δ} 와 δ.

    {𝐕^μ ≤ δ} 는 윗집합이므로 f 는 좌표별 초가법이고 supp f 에서 𝐈(wf) ≤ 𝐕^μ ≤ δ 입니다.
    δ 가 없으면 max 𝐕^μ 의 무작위 비율로 정합니다.
    """
    mu = random_leaf_measure(t, rng)
    V = potential(t, w, mu)
    if delta is None:
        delta = float(rng.uniform(0.3, 1.0)) * float(V.max())
    f = np.where(V <= delta, adjoint_hardy(t, mu), 0.0)
    return f, float(delta)


def random_tree_instance(n: int, depth: int, rng: np.random.Generator, config: Config = DEFAULT_CONFIG) -> NTreeInstance:
    """깊이 1..depth, 분기 1..2 를 좌표별로 무작위로 고른 곱 트리 (좌표별로 다른 트리)."""
    trees = [build_dyadic_tree(int(rng.integers(1, depth + 1)), int(rng.integers(1, 3)), config) for _ in range(n)]
    return NTreeInstance.of(trees, config)
