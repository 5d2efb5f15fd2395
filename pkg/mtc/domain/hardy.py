from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Tuple, Union

import numpy as np

from mtc.domain.poset import NTreeInstance, Tree, child_sum, leaf_sweep, root_sweep
from mtc.utils.numeric import ABS_FLOOR, REL_TOL

logger = logging.getLogger(__name__)


class FieldError(Exception):
    """곱 트리 위 필드/가중치 에러"""
    pass


def as_field(t: NTreeInstance, f, nonnegative: bool = False) -> np.ndarray:
    """
    입력을 float64 필드 배열로 변환합니다.

    마지막 n 축이 곱 트리 모양이어야 하며 평탄한 길이 size 배열도 받습니다.

    Raises:
        FieldError: 모양이 맞지 않거나 nonnegative 인데 음수가 있을 때
    """
    arr = np.asarray(f, dtype=np.float64)
    if arr.ndim == 1 and arr.shape[0] == t.size and t.n > 1:
        arr = arr.reshape(t.shape)
    if arr.ndim < t.n or arr.shape[arr.ndim - t.n:] != t.shape:
        raise FieldError(f"필드 모양 {arr.shape} 이 곱 트리 모양 {t.shape} 과 맞지 않습니다.")
    if nonnegative and np.any(arr < 0):
        raise FieldError(f"음수 값이 있습니다 (최솟값 {arr.min():.3g}).")
    return arr


def _axis(arr: np.ndarray, t: NTreeInstance, j: int) -> int:
    return arr.ndim - t.n + j


def _coords(t: NTreeInstance, coords: Iterable[int]) -> Tuple[int, ...]:
    """1부터 시작하는 좌표 번호를 0부터 시작하는 축 번호로 바꿉니다."""
    picked = tuple(sorted(set(int(c) for c in coords)))
    if not picked:
        raise FieldError("좌표 집합이 비어 있습니다.")
    if picked[0] < 1 or picked[-1] > t.n:
        raise FieldError(f"좌표는 1..{t.n} 범위여야 합니다: {picked}")
    return tuple(c - 1 for c in picked)


def hardy_coord(t: NTreeInstance, f, coords: Iterable[int]) -> np.ndarray:
    """
    지정한 좌표들(1부터)의 Hardy 연산자 I_A 를 적용합니다.

    I_j f(α) = f(α) + I_j f(α 의 j 좌표를 부모로 바꾼 점), 루트에서 잎으로의 DP.
    """
    out = as_field(t, f)
    for j in _coords(t, coords):
        out = root_sweep(out, t.trees[j], _axis(out, t, j))
    return out


def hardy(t: NTreeInstance, f) -> np.ndarray:
    """𝐈f(γ) = Σ_{γ′ ≥ γ} f(γ′)"""
    return hardy_coord(t, f, range(1, t.n + 1))


def adjoint_coord(t: NTreeInstance, f, coords: Iterable[int]) -> np.ndarray:
    out = as_field(t, f)
    for j in _coords(t, coords):
        out = leaf_sweep(out, t.trees[j], _axis(out, t, j))
    return out


def adjoint_hardy(t: NTreeInstance, f) -> np.ndarray:
    """𝐈*f(γ) = Σ_{γ′ ≤ γ} f(γ′)"""
    return adjoint_coord(t, f, range(1, t.n + 1))


def delta_coord(t: NTreeInstance, g, j: int) -> np.ndarray:
    """좌표 j(1부터)의 차분 Δ_j g = g − (자식 합). 잎에서는 g."""
    (axis0,) = _coords(t, [j])
    arr = as_field(t, g)
    return arr - child_sum(arr, t.trees[axis0], _axis(arr, t, axis0))


def is_superadditive(t: NTreeInstance, g, rel: float = REL_TOL, floor: float = ABS_FLOOR) -> bool:
    """모든 좌표 j 에 대해 Δ_j g ≥ 0 (허용 오차 포함) 인지 판정합니다."""
    arr = as_field(t, g)
    scale = float(np.abs(arr).max()) if arr.size else 0.0
    tol = rel * scale + floor
    return all(bool(np.all(delta_coord(t, arr, j) >= -tol)) for j in range(1, t.n + 1))


# --- 가중치 --------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TensorWeight:
    """w(α) = ∏_j w_j(α_j) 형태의 텐서 곱 가중치."""

    factors: Tuple[np.ndarray, ...]
    _dense: dict = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        arrs = []
        for j, fac in enumerate(self.factors):
            arr = np.array(fac, dtype=np.float64, copy=True)
            if arr.ndim != 1:
                raise FieldError(f"가중치 인자 {j + 1} 은 1차원이어야 합니다.")
            if np.any(arr < 0):
                raise FieldError(f"가중치 인자 {j + 1} 에 음수가 있습니다.")
            arr.setflags(write=False)
            arrs.append(arr)
        object.__setattr__(self, "factors", tuple(arrs))

    @classmethod
    def uniform(cls, t: NTreeInstance) -> "TensorWeight":
        return cls(tuple(np.ones(m) for m in t.shape))

    def check(self, t: NTreeInstance) -> None:
        if tuple(f.shape[0] for f in self.factors) != t.shape:
            raise FieldError(f"가중치 모양 {[f.shape[0] for f in self.factors]} 이 곱 트리 {t.shape} 과 다릅니다.")

    def factor_grid(self, t: NTreeInstance, j: int) -> np.ndarray:
        """좌표 j(1부터)의 인자를 곱 트리 모양으로 브로드캐스트합니다."""
        shape = [1] * t.n
        shape[j - 1] = t.shape[j - 1]
        return self.factors[j - 1].reshape(shape)

    def partial(self, t: NTreeInstance, coords: Iterable[int]) -> np.ndarray:
        """w_A = ∏_{j∈A} w_j (브로드캐스트 가능한 모양)."""
        out = np.ones([1] * t.n)
        for j in coords:
            out = out * self.factor_grid(t, j)
        return out

    def dense(self, t: NTreeInstance) -> np.ndarray:
        self.check(t)
        if "w" not in self._dense:
            self._dense["w"] = np.broadcast_to(self.partial(t, range(1, t.n + 1)), t.shape).copy()
        return self._dense["w"]

    def scaled(self, c: float) -> "TensorWeight":
        return TensorWeight((self.factors[0] * c,) + self.factors[1:])

    def is_uniform(self) -> bool:
        return all(np.all(f == 1.0) for f in self.factors)


Weight = Union[TensorWeight, np.ndarray]


def dense_weight(t: NTreeInstance, w: Optional[Weight]) -> np.ndarray:
    """텐서 가중치 또는 밀집 가중치를 밀집 배열로 만듭니다 (None 이면 w ≡ 1)."""
    if w is None:
        return np.ones(t.shape)
    if isinstance(w, TensorWeight):
        return w.dense(t)
    return as_field(t, w, nonnegative=True)


def dyadic_weight_factor(tree: Tree, s: float) -> np.ndarray:
    """w(α) = |α|^{s−1}, |α| = 2^{−depth(α)}."""
    return np.power(2.0, tree.depth.astype(np.float64) * (1.0 - float(s)))


def weight_from_s(t: NTreeInstance, s: Sequence[float]) -> TensorWeight:
    """
    좌표별 지수 s_j ∈ (0, 1] 로부터 w_j(α_j) = (2^{−depth(α_j)})^{s_j−1} 를 만듭니다.

    Raises:
        FieldError: s 의 길이가 n 이 아니거나 s_j ∉ (0, 1], 또는 트리가 이진 정규가 아닐 때
    """
    s = tuple(float(x) for x in s)
    if len(s) != t.n:
        raise FieldError(f"s 의 길이({len(s)})가 n({t.n})과 다릅니다.")
    for j, sj in enumerate(s):
        if not 0.0 < sj <= 1.0:
            raise FieldError(f"s_{j + 1} = {sj} 는 (0, 1] 범위여야 합니다. s = 0 은 경계 임베딩으로 다룹니다.")
    for j, tr in enumerate(t.trees):
        if not tr.is_dyadic():
            raise FieldError(f"좌표 {j + 1} 의 트리가 이진 정규 트리가 아닙니다.")
    return TensorWeight(tuple(dyadic_weight_factor(tr, sj) for tr, sj in zip(t.trees, s)))


# --- 퍼텐셜과 에너지 ------------------------------------------------------------


@dataclass
class EnergyReport:
    energy: float
    truncated_energy: float
    delta: float
    total_mass: float
    truncated_potential: Optional[np.ndarray] = None


def potential(t: NTreeInstance, w: Optional[Weight], mu) -> np.ndarray:
    """𝐕^μ = 𝐈(w·𝐈*μ)"""
    mu = as_field(t, mu, nonnegative=True)
    return hardy(t, dense_weight(t, w) * adjoint_hardy(t, mu))


def energy(t: NTreeInstance, w: Optional[Weight], mu) -> float:
    """ℰ[μ] = Σ w(𝐈*μ)²"""
    mu = as_field(t, mu, nonnegative=True)
    return float(np.sum(dense_weight(t, w) * adjoint_hardy(t, mu) ** 2))


def hardy_weight(t: NTreeInstance, w: Optional[Weight]) -> np.ndarray:
    """𝐈w(γ) = Σ_{γ′ ≥ γ} w(γ′)"""
    return hardy(t, dense_weight(t, w))


def truncated(t: NTreeInstance, w: Optional[Weight], mu, delta: float, with_potential: bool = False) -> EnergyReport:
    """
    절단 에너지 ℰ_δ[μ] = Σ_{𝐕^μ ≤ δ} w(𝐈*μ)² 를 계산합니다.

    절단 집합은 비엄격 비교 𝐕^μ ≤ δ 를 사용합니다 (경계값 포함).

    Args:
        with_potential: True 이면 𝐕_δ^μ = 𝐈(1_{𝐕^μ≤δ}·w𝐈*μ) 도 함께 반환

    Returns:
        EnergyReport
    """
    if delta < 0:
        raise FieldError(f"δ 는 0 이상이어야 합니다: {delta}")
    mu = as_field(t, mu, nonnegative=True)
    wd = dense_weight(t, w)
    star = adjoint_hardy(t, mu)
    V = hardy(t, wd * star)
    keep = V <= delta
    density = wd * star
    report = EnergyReport(
        energy=float(np.sum(density * star)),
        truncated_energy=float(np.sum(np.where(keep, density * star, 0.0))),
        delta=float(delta),
        total_mass=float(mu.sum()),
    )
    if with_potential:
        report.truncated_potential = hardy(t, np.where(keep, density, 0.0))
    return report


def truncated_potential(t: NTreeInstance, w: Optional[Weight], mu, delta: float) -> np.ndarray:
    return truncated(t, w, mu, delta, with_potential=True).truncated_potential


def pairing(t: NTreeInstance, w: Optional[Weight], mu, rho, delta: Optional[float] = None) -> float:
    """
    ∫𝐕_δ^μ dρ = Σ_{𝐕^μ ≤ δ} w·𝐈*μ·𝐈*ρ (δ 가 없으면 전체 퍼텐셜).
    """
    mu = as_field(t, mu, nonnegative=True)
    rho = as_field(t, rho, nonnegative=True)
    wd = dense_weight(t, w)
    star_mu = adjoint_hardy(t, mu)
    terms = wd * star_mu * adjoint_hardy(t, rho)
    if delta is None:
        return float(terms.sum())
    V = hardy(t, wd * star_mu)
    return float(np.sum(np.where(V <= delta, terms, 0.0)))
