"""Hardy 연산자의 정확한 항등식과 점별 부등식 검사기."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Any, Optional, Tuple

import numpy as np

from mtc.domain.hardy import (
    Weight,
    adjoint_coord,
    adjoint_hardy,
    as_field,
    delta_coord,
    hardy,
    hardy_coord,
    is_superadditive,
    truncated_potential,
)
from mtc.domain.poset import NTreeInstance
from mtc.utils.numeric import ABS_FLOOR, REL_TOL, leq, safe_ratio


class HypothesisError(Exception):
    """보조정리의 가정이 성립하지 않는 입력 (witness 에 실패 지점)"""

    def __init__(self, message: str, witness: Any = None):
        super().__init__(message)
        self.witness = witness


@dataclass
class PointwiseCheck:
    name: str
    holds: bool
    excess: float
    witness: Optional[Tuple[int, ...]] = None


@dataclass
class ScalarCheck:
    name: str
    lhs: float
    rhs: float
    ratio: float
    holds: bool


def _pointwise(name: str, t: NTreeInstance, lhs: np.ndarray, rhs: np.ndarray, rel: float = REL_TOL) -> PointwiseCheck:
    lhs = np.broadcast_to(lhs, t.shape)
    rhs = np.broadcast_to(rhs, t.shape)
    tol = rel * np.maximum(np.abs(lhs), np.abs(rhs)) + ABS_FLOOR
    diff = lhs - rhs - tol
    worst = int(np.argmax(diff))
    excess = float(diff.ravel()[worst])
    holds = excess <= 0.0
    witness = None if holds else tuple(int(c) for c in np.unravel_index(worst, t.shape))
    return PointwiseCheck(name=name, holds=holds, excess=max(excess, 0.0), witness=witness)


def _scalar(name: str, lhs: float, rhs: float, rel: float = REL_TOL) -> ScalarCheck:
    return ScalarCheck(name=name, lhs=float(lhs), rhs=float(rhs), ratio=safe_ratio(lhs, rhs), holds=leq(lhs, rhs, rel=rel))


def _require_one_tree(t: NTreeInstance, name: str) -> None:
    if t.n != 1:
        raise HypothesisError(f"{name} 은 1-트리(n=1)에서만 성립합니다 (n={t.n}).")


# --- 정확한 항등식 -------------------------------------------------------------


def partial_summation_gap(t: NTreeInstance, f, g, j: int = 1) -> float:
    """
    Σ f·g 와 Σ Δ_j f·I_j g 의 상대 차이.
    """
    f = as_field(t, f)
    g = as_field(t, g)
    lhs_terms = f * g
    rhs_terms = delta_coord(t, f, j) * hardy_coord(t, g, [j])
    gap = abs(float(lhs_terms.sum()) - float(rhs_terms.sum()))
    scale = float(np.abs(lhs_terms).sum() + np.abs(rhs_terms).sum()) + ABS_FLOOR
    return gap / scale


def lemma1_gap(t: NTreeInstance, f, g, j: int = 1) -> float:
    """
    점별 항등식 I*_j(fg) = I*_j(Δ_j f·I_j g) − f(I_j g − g) 의 최대 상대 차이.
    """
    f = as_field(t, f)
    g = as_field(t, g)
    Ig = hardy_coord(t, g, [j])
    lhs = adjoint_coord(t, f * g, [j])
    first = adjoint_coord(t, delta_coord(t, f, j) * Ig, [j])
    second = f * (Ig - g)
    scale = max(float(np.abs(lhs).max()), float(np.abs(first).max()), float(np.abs(second).max())) + ABS_FLOOR
    return float(np.abs(lhs - (first - second)).max()) / scale


def duality_gap(t: NTreeInstance, f, g) -> float:
    """⟨𝐈f, g⟩ 와 ⟨f, 𝐈*g⟩ 의 상대 차이."""
    f = as_field(t, f)
    g = as_field(t, g)
    left = hardy(t, f) * g
    right = f * adjoint_hardy(t, g)
    scale = float(np.abs(left).sum() + np.abs(right).sum()) + ABS_FLOOR
    return abs(float(left.sum()) - float(right.sum())) / scale


# --- 점별 부등식 ---------------------------------------------------------------


def cor1_slack(t: NTreeInstance, f, g, j: int = 1) -> PointwiseCheck:
    """f, g ≥ 0 에서 I*_j(fg) ≤ I*_j(Δ_j f·I_j g)."""
    f = as_field(t, f, nonnegative=True)
    g = as_field(t, g, nonnegative=True)
    lhs = adjoint_coord(t, f * g, [j])
    rhs = adjoint_coord(t, delta_coord(t, f, j) * hardy_coord(t, g, [j]), [j])
    return _pointwise(f"cor1[j={j}]", t, lhs, rhs)


def split_terms(t: NTreeInstance, f, g) -> np.ndarray:
    """Σ_{A⊆[n]} I_A f · I_{A^c} g (I_∅ 는 항등)."""
    f = as_field(t, f)
    g = as_field(t, g)
    total = np.zeros(t.shape)
    coords = range(1, t.n + 1)
    for r in range(t.n + 1):
        for A in itertools.combinations(coords, r):
            Ac = [c for c in coords if c not in A]
            If = hardy_coord(t, f, A) if A else f
            Ig = hardy_coord(t, g, Ac) if Ac else g
            total += If * Ig
    return total


def split_slack(t: NTreeInstance, f, g) -> PointwiseCheck:
    """(𝐈f)(𝐈g) ≤ 𝐈(Σ_{A⊆[n]} I_A f·I_{A^c} g) 점별."""
    f = as_field(t, f, nonnegative=True)
    g = as_field(t, g, nonnegative=True)
    lhs = hardy(t, f) * hardy(t, g)
    rhs = hardy(t, split_terms(t, f, g))
    return _pointwise(f"split[n={t.n}]", t, lhs, rhs)


def max_principle_slack(t: NTreeInstance, w: Optional[Weight], mu, delta: float) -> PointwiseCheck:
    """1-트리 최대 원리: 𝐕_δ^μ ≤ δ 점별."""
    _require_one_tree(t, "최대 원리")
    Vd = truncated_potential(t, w, mu, delta)
    return _pointwise("maximum-principle", t, Vd, np.full(t.shape, float(delta)))


def supadditive_l1linf_slack(t: NTreeInstance, g, h) -> PointwiseCheck:
    """
    초가법 g 와 h ≥ 0 (1-트리): I*(gh)(β) ≤ ‖Ih‖_{∞, supp g}·g(β).

    Raises:
        HypothesisError: g 가 초가법이 아닐 때
    """
    _require_one_tree(t, "supadditive-l1linf")
    g = as_field(t, g, nonnegative=True)
    h = as_field(t, h, nonnegative=True)
    if not is_superadditive(t, g):
        raise HypothesisError("g 가 초가법이 아닙니다.", witness=_superadditive_witness(t, g))
    Ih = hardy(t, h)
    sup = float(Ih[g > 0].max()) if np.any(g > 0) else 0.0
    return _pointwise("supadditive-l1linf", t, adjoint_hardy(t, g * h), sup * g)


def i2_positive_slack(t: NTreeInstance, f, g, delta: float) -> ScalarCheck:
    """
    K = I∘1_{Ig≤δ} 에 대해 ∫(Kf)²g ≤ (sup_{supp g} KK*g)·∫f² (1-트리).
    """
    _require_one_tree(t, "I2-positive")
    f = as_field(t, f, nonnegative=True)
    g = as_field(t, g, nonnegative=True)
    cut = hardy(t, g) <= delta
    Kf = hardy(t, np.where(cut, f, 0.0))
    KKg = hardy(t, np.where(cut, adjoint_hardy(t, g), 0.0))
    sup = float(KKg[g > 0].max()) if np.any(g > 0) else 0.0
    return _scalar("I2-positive", float(np.sum(Kf ** 2 * g)), sup * float(np.sum(f ** 2)))


def weighted_estimate_ratio(t: NTreeInstance, f, g, delta: float) -> ScalarCheck:
    """
    1-트리 가중 추정 ∫(If)²g² ≤ δ·‖Ig‖_{∞, supp g}·∫f².

    Raises:
        HypothesisError: g 가 초가법이 아니거나 supp f ⊄ {Ig ≤ δ} 일 때
    """
    _require_one_tree(t, "weighted estimate")
    f = as_field(t, f, nonnegative=True)
    g = as_field(t, g, nonnegative=True)
    if not is_superadditive(t, g):
        raise HypothesisError("g 가 초가법이 아닙니다.", witness=_superadditive_witness(t, g))
    Ig = hardy(t, g)
    outside = (f > 0) & (Ig > delta * (1 + REL_TOL))
    if outside.any():
        where = tuple(int(c) for c in np.unravel_index(int(np.argmax(outside)), t.shape))
        raise HypothesisError("supp f ⊄ {Ig ≤ δ}", witness=where)
    sup = float(Ig[g > 0].max()) if np.any(g > 0) else 0.0
    lhs = float(np.sum(hardy(t, f) ** 2 * g ** 2))
    return _scalar("weightedT", lhs, float(delta) * sup * float(np.sum(f ** 2)))


def cut_bound_ratio(t: NTreeInstance, g, delta: float) -> float:
    """max 𝐈(1_{𝐈g≤δ}·g)/δ. 1-트리에서는 항상 1 이하입니다."""
    g = as_field(t, g, nonnegative=True)
    cut = hardy(t, g) <= delta
    return safe_ratio(float(hardy(t, np.where(cut, g, 0.0)).max()), delta)


def _superadditive_witness(t: NTreeInstance, g: np.ndarray) -> Tuple[int, ...]:
    worst = None
    worst_val = np.inf
    for j in range(1, t.n + 1):
        d = delta_coord(t, g, j)
        idx = int(np.argmin(d))
        if d.ravel()[idx] < worst_val:
            worst_val = float(d.ravel()[idx])
            worst = tuple(int(c) for c in np.unravel_index(idx, t.shape))
    return worst
