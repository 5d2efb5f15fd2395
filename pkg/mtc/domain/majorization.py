"""
작은 에너지 지배 함수(majorant) 구성과 그 비용을 제어하는 에너지 보조정리.

모든 구성은 (𝐈(wφ) ≥ 인자·𝐈(wf) on 띠) 와 (∫wφ² / ∫wf²) 를 함께 담은
MajorizationCertificate 를 반환합니다.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from mtc.config import DEFAULT_CONFIG, Config
from mtc.domain.hardy import (
    TensorWeight,
    Weight,
    adjoint_hardy,
    as_field,
    dense_weight,
    hardy,
    hardy_coord,
    is_superadditive,
    potential,
)
from mtc.domain.identities import HypothesisError, _superadditive_witness, cut_bound_ratio
from mtc.domain.poset import NTreeInstance, VertexSet, is_up_set
from mtc.utils.numeric import REL_TOL, field_leq, safe_ratio
from mtc.utils.seeds import trial_rng

logger = logging.getLogger(__name__)

COINCIDENT_C = 10.0 / 9.0


@dataclass
class MajorizationCertificate:
    phi: np.ndarray
    lam: float
    delta: float
    domination_set: VertexSet
    cost_ratio: float
    domination_holds: bool
    min_ratio: float
    required_factor: float
    normalized_cost: float
    cost_bound: Optional[float]
    variant: str

    def cost_within_bound(self) -> bool:
        if self.cost_bound is None or np.isnan(self.normalized_cost):
            return True
        return self.normalized_cost <= self.cost_bound * (1 + REL_TOL) + 1e-12

    def to_dict(self) -> Dict[str, object]:
        return {
            "variant": self.variant,
            "lambda": self.lam,
            "delta": self.delta,
            "band_size": self.domination_set.count,
            "domination_holds": self.domination_holds,
            "min_ratio": self.min_ratio,
            "required_factor": self.required_factor,
            "cost_ratio": self.cost_ratio,
            "normalized_cost": self.normalized_cost,
            "cost_bound": self.cost_bound,
        }


def _weight_object(t: NTreeInstance, w: Optional[Weight]) -> TensorWeight:
    if w is None:
        return TensorWeight.uniform(t)
    if not isinstance(w, TensorWeight):
        raise HypothesisError("지배 함수 구성은 텐서 곱 가중치만 받습니다.")
    w.check(t)
    return w


def _weighted_partial(t: NTreeInstance, W: TensorWeight, f: np.ndarray, coords: Sequence[int]) -> np.ndarray:
    """I_A(w_A f)"""
    return hardy_coord(t, W.partial(t, coords) * f, coords)


def _check_support(t: NTreeInstance, f: np.ndarray, level: np.ndarray, delta: float, what: str) -> None:
    outside = (f > 0) & (level > delta * (1 + REL_TOL) + 1e-12)
    if outside.any():
        where = tuple(int(c) for c in np.unravel_index(int(np.argmax(outside)), t.shape))
        raise HypothesisError(f"supp f ⊄ {{{what} ≤ δ}}", witness=where)


def _check_superadditive(t: NTreeInstance, g: np.ndarray, name: str) -> None:
    if not is_superadditive(t, g):
        raise HypothesisError(f"{name} 가 좌표별 초가법이 아닙니다.", witness=_superadditive_witness(t, g))


def default_delta(t: NTreeInstance, w: Optional[Weight], f) -> float:
    """max_{supp f} 𝐈(wf)"""
    f = as_field(t, f, nonnegative=True)
    level = hardy(t, dense_weight(t, w) * f)
    return float(level[f > 0].max()) if np.any(f > 0) else 0.0


def _certify(
    t: NTreeInstance,
    phi: np.ndarray,
    dominated: np.ndarray,
    dominating: np.ndarray,
    band: np.ndarray,
    cost_num: float,
    cost_den: float,
    lam: float,
    delta: float,
    power: float,
    bound: Optional[float],
    factor: float,
    variant: str,
) -> MajorizationCertificate:
    target = factor * dominated
    ok = field_leq(target, dominating)
    holds = bool(np.all(ok[band]))
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(dominated > 0, dominating / dominated, np.inf)
    min_ratio = float(ratios[band].min()) if band.any() else float("inf")
    cost_ratio = 0.0 if cost_num == 0.0 else safe_ratio(cost_num, cost_den)
    normalized = cost_ratio * (lam / delta) ** power if delta > 0 else (0.0 if cost_ratio == 0 else float("nan"))
    if not holds:
        logger.error(f"{variant}: 지배 조건 위반 (최소 비율 {min_ratio:.6g} < {factor:.6g})")
    return MajorizationCertificate(
        phi=phi,
        lam=float(lam),
        delta=float(delta),
        domination_set=VertexSet(band),
        cost_ratio=cost_ratio,
        domination_holds=holds,
        min_ratio=min_ratio,
        required_factor=float(factor),
        normalized_cost=normalized,
        cost_bound=bound,
        variant=variant,
    )


def majorant_1tree(t: NTreeInstance, f, g, lam: float, delta: float, check_hypotheses: bool = True) -> MajorizationCertificate:
    """
    1-트리 지배 함수 φ = 2λ⁻¹·If·g·1_{Ig≤4λ}.

    Ig ∈ [λ, 2λ] 인 잎에서 Iφ ≥ If, 비용 ∫φ² ≤ 16(δ/λ)∫f².

    Raises:
        HypothesisError: n ≠ 1, supp f ⊄ {Ig ≤ δ}, g 비초가법, λ < 10δ
    """
    if t.n != 1:
        raise HypothesisError(f"majorant_1tree 는 n = 1 에서만 정의됩니다 (n={t.n}).")
    f = as_field(t, f, nonnegative=True)
    g = as_field(t, g, nonnegative=True)
    Ig = hardy(t, g)
    if check_hypotheses:
        _check_support(t, f, Ig, delta, "Ig")
        _check_superadditive(t, g, "g")
        if lam < 10 * delta:
            raise HypothesisError(f"λ ≥ 10δ 가 필요합니다 (λ={lam}, δ={delta}).")
    If = hardy(t, f)
    phi = 2.0 / lam * If * g * (Ig <= 4 * lam)
    band = t.leaf_mask & (Ig >= lam) & (Ig <= 2 * lam)
    return _certify(
        t, phi, If, hardy(t, phi), band,
        float(np.sum(phi ** 2)), float(np.sum(f ** 2)),
        lam, delta, 1.0, 16.0, 1.0, "1tree",
    )


def majorant_bitree(
    t: NTreeInstance,
    w: Optional[Weight],
    f,
    lam: float,
    delta: Optional[float] = None,
    variant: str = "product",
    check_hypotheses: bool = True,
) -> MajorizationCertificate:
    """
    2-트리 지배 함수 φ = 4λ⁻¹·I₁(w₁f)·I₂(w₂f)·1_{𝕀(wf)≤2λ}.

    variant="outer" 는 φ = 4λ⁻¹𝕀(w·I₁(w₁f)I₂(w₂f)·1_{𝕀(wf)≤2λ}) 이며
    φ ≥ 𝕀(wf) 를 띠 위에서 점별로 확인하고 비용만 기록합니다.

    Raises:
        HypothesisError: 초가법성, 지지 조건, λ ≥ 4δ 위반
    """
    if t.n != 2:
        raise HypothesisError(f"majorant_bitree 는 n = 2 에서만 정의됩니다 (n={t.n}).")
    return _product_majorant(t, w, f, lam, delta, variant, check_hypotheses, power=2.0, bound=64.0)


def majorant_tritree(
    t: NTreeInstance,
    w: Optional[Weight],
    f,
    lam: float,
    delta: Optional[float] = None,
    variant: str = "product",
    check_hypotheses: bool = True,
) -> MajorizationCertificate:
    """
    3-트리 지배 함수 φ = 4λ⁻¹·Σ_i I_i(w_i f)·I_(i)(w_(i) f)·1_{𝐈(wf)≤2λ}.

    비용 ∫wφ² ≤ 576(δ/λ)∫wf².
    """
    if t.n != 3:
        raise HypothesisError(f"majorant_tritree 는 n = 3 에서만 정의됩니다 (n={t.n}).")
    return _product_majorant(t, w, f, lam, delta, variant, check_hypotheses, power=1.0, bound=576.0)


def _product_terms(t: NTreeInstance, W: TensorWeight, f: np.ndarray) -> np.ndarray:
    """n=2: I₁(w₁f)·I₂(w₂f), n=3: Σ_i I_i(w_i f)·I_(i)(w_(i) f)."""
    coords = list(range(1, t.n + 1))
    if t.n == 2:
        return _weighted_partial(t, W, f, [1]) * _weighted_partial(t, W, f, [2])
    total = np.zeros(t.shape)
    for i in coords:
        rest = [c for c in coords if c != i]
        total += _weighted_partial(t, W, f, [i]) * _weighted_partial(t, W, f, rest)
    return total


def _product_majorant(t, w, f, lam, delta, variant, check_hypotheses, power, bound) -> MajorizationCertificate:
    W = _weight_object(t, w)
    wd = W.dense(t)
    f = as_field(t, f, nonnegative=True)
    level = hardy(t, wd * f)
    delta = default_delta(t, W, f) if delta is None else float(delta)
    if check_hypotheses:
        _check_superadditive(t, f, "f")
        _check_support(t, f, level, delta, "𝐈(wf)")
        if lam < 4 * delta:
            raise HypothesisError(f"λ ≥ 4δ 가 필요합니다 (λ={lam}, δ={delta}).")
    band = (level >= lam) & (level <= 2 * lam)
    product = 4.0 / lam * _product_terms(t, W, f) * (level <= 2 * lam)
    den = float(np.sum(wd * f ** 2))
    name = {2: "bitree", 3: "tritree"}[t.n]
    if variant == "product":
        return _certify(
            t, product, level, hardy(t, wd * product), band,
            float(np.sum(wd * product ** 2)), den, lam, delta, power, bound, 1.0, name,
        )
    if variant == "outer":
        outer = hardy(t, wd * product)
        return _certify(
            t, outer, level, outer, band,
            float(np.sum(wd * outer ** 2)), den, lam, delta, power, None, 1.0, f"{name}-outer",
        )
    raise HypothesisError(f"알 수 없는 variant 입니다: {variant}")


def pair_majorant(t: NTreeInstance, f, g, lam: float, delta: Optional[float] = None) -> MajorizationCertificate:
    """
    두 함수 후보 φ = λ⁻¹·Σ_{∅≠A⊆[n]} I_A f·I_{A^c} g·1_{𝐈g≤2λ} (w ≡ 1).

    n=2, 3 에서 각각 두 함수/세 함수 구성과 같고, n=4 에서는 일반 항 집합입니다.
    𝐈g ∈ [λ, 2λ] 에서 𝐈φ ≥ (1 − δ/λ)𝐈f 를 확인하고 문자 그대로의 최소 비율도 기록합니다.
    """
    f = as_field(t, f, nonnegative=True)
    g = as_field(t, g, nonnegative=True)
    Ig = hardy(t, g)
    delta = float(Ig[f > 0].max()) if delta is None and np.any(f > 0) else float(delta or 0.0)
    coords = list(range(1, t.n + 1))
    total = np.zeros(t.shape)
    for r in range(1, t.n + 1):
        for A in itertools.combinations(coords, r):
            Ac = [c for c in coords if c not in A]
            total += hardy_coord(t, f, A) * (hardy_coord(t, g, Ac) if Ac else g)
    phi = total / lam * (Ig <= 2 * lam)
    band = (Ig >= lam) & (Ig <= 2 * lam)
    If = hardy(t, f)
    factor = max(1.0 - delta / lam, 0.0)
    return _certify(
        t, phi, If, hardy(t, phi), band,
        float(np.sum(phi ** 2)), float(np.sum(f ** 2)), lam, delta, 1.0, None, factor, f"pair-n{t.n}",
    )


def majorant_coincident(t: NTreeInstance, f, lam: float, delta: Optional[float] = None) -> MajorizationCertificate:
    """
    f = g 일 때의 지배 함수 φ̃ = c·λ⁻¹·2Σ_i I_i f·I_(i) f (n=2 에서는 c·λ⁻¹·2I₁f·I₂f), c = 10/9.

    𝐈(1_{𝐈f≤2λ}φ̃) ≥ c(1 − 2δ/λ)𝐈f 를 𝐈f ∈ [λ, 2λ] 에서 확인합니다.
    """
    if t.n not in (2, 3):
        raise HypothesisError(f"majorant_coincident 는 n ∈ {{2, 3}} 에서만 정의됩니다 (n={t.n}).")
    f = as_field(t, f, nonnegative=True)
    If = hardy(t, f)
    delta = default_delta(t, None, f) if delta is None else float(delta)
    coords = list(range(1, t.n + 1))
    if t.n == 2:
        terms = hardy_coord(t, f, [1]) * hardy_coord(t, f, [2])
    else:
        terms = sum(hardy_coord(t, f, [i]) * hardy_coord(t, f, [c for c in coords if c != i]) for i in coords)
    phi = COINCIDENT_C / lam * 2.0 * terms * (If <= 2 * lam)
    band = (If >= lam) & (If <= 2 * lam)
    power = 2.0 if t.n == 2 else 1.0
    factor = max(COINCIDENT_C * (1.0 - 2.0 * delta / lam), 0.0)
    return _certify(
        t, phi, If, hardy(t, phi), band,
        float(np.sum(phi ** 2)), float(np.sum(f ** 2)), lam, delta, power, None, factor, f"coincident-n{t.n}",
    )


def verify_certificate(t: NTreeInstance, w: Optional[Weight], f, cert: MajorizationCertificate) -> bool:
    """저장된 φ 로 지배 조건을 다시 검사합니다."""
    f = as_field(t, f, nonnegative=True)
    wd = dense_weight(t, w)
    band = cert.domination_set.members
    if cert.variant.endswith("-outer"):
        dominating = cert.phi
    else:
        dominating = hardy(t, wd * cert.phi) if cert.variant in ("bitree", "tritree") else hardy(t, cert.phi)
    dominated = hardy(t, wd * f) if cert.variant.startswith(("bitree", "tritree")) else hardy(t, f)
    return bool(np.all(field_leq(cert.required_factor * dominated, dominating)[band]))


# --- 에너지 보조정리 -----------------------------------------------------------


def energy_lemma_checks(
    t: NTreeInstance,
    w: Optional[Weight],
    f,
    delta: Optional[float] = None,
    lam: Optional[float] = None,
    check_hypotheses: bool = True,
) -> pd.DataFrame:
    """
    보조정리별 LHS/RHS 비율 표.

    n=2: mixed (∫wf·I₁(w₁f)·I₂(w₂f)·𝕀(wf) ≤ δ²∫wf²), product (∫w(I₁(w₁f)I₂(w₂f))² ≤ 4δ²∫wf²)
    n=3: cut[i] (i = 1, 2, 3; ∫w(I_i(w_i f)·I_(i)(w_(i) f))²·1_{𝐈(wf)≤λ} ≤ 2δλ∫wf²)

    Raises:
        HypothesisError: 초가법성 또는 지지 조건 위반
    """
    W = _weight_object(t, w)
    wd = W.dense(t)
    f = as_field(t, f, nonnegative=True)
    level = hardy(t, wd * f)
    delta = default_delta(t, W, f) if delta is None else float(delta)
    if check_hypotheses:
        _check_superadditive(t, f, "f")
        _check_support(t, f, level, delta, "𝐈(wf)")
    base = float(np.sum(wd * f ** 2))
    rows: List[Dict[str, object]] = []

    def add(name: str, lhs: float, rhs: float) -> None:
        ratio = 0.0 if lhs == 0.0 else safe_ratio(lhs, rhs)
        rows.append({"lemma": name, "lhs": lhs, "rhs": rhs, "ratio": ratio, "holds": ratio <= 1.0 + REL_TOL})

    if t.n == 2:
        I1 = _weighted_partial(t, W, f, [1])
        I2 = _weighted_partial(t, W, f, [2])
        add("bitree-mixed", float(np.sum(wd * f * I1 * I2 * level)), delta ** 2 * base)
        add("bitree-product", float(np.sum(wd * (I1 * I2) ** 2)), 4 * delta ** 2 * base)
    elif t.n == 3:
        lam = 4 * delta if lam is None else float(lam)
        cut = level <= lam
        for i in (1, 2, 3):
            rest = [c for c in (1, 2, 3) if c != i]
            P = _weighted_partial(t, W, f, [i]) * _weighted_partial(t, W, f, rest)
            add(f"tritree-cut[i={i}]", float(np.sum(np.where(cut, wd * P ** 2, 0.0))), 2 * delta * lam * base)
    else:
        raise HypothesisError(f"에너지 보조정리는 n ∈ {{2, 3}} 에서만 정의됩니다 (n={t.n}).")
    table = pd.DataFrame(rows, columns=["lemma", "lhs", "rhs", "ratio", "holds"])
    for _, row in table[~table["holds"]].iterrows():
        logger.error(f"{row['lemma']} 위반: 비율 {row['ratio']:.6g}")
    return table


# --- 추측 탐색과 장애물 -----------------------------------------------------------


def superadditive_pair(t: NTreeInstance, rng: np.random.Generator, coincident: bool = False):
    """
    (f, g, δ) 를 뽑습니다. g = 1_U·𝐈*σ, U = {𝐕^σ ≤ c} 는 윗집합이므로 g 는 초가법입니다.
    f 는 {𝕀g ≤ δ} 위에 지지된 무작위 음이 아닌 함수입니다 (coincident 이면 f = g).
    """
    leaves = np.flatnonzero(t.leaf_mask.ravel())
    k = int(rng.integers(1, min(leaves.size, 6) + 1))
    sigma = np.zeros(t.size)
    sigma[rng.choice(leaves, size=k, replace=False)] = rng.exponential(1.0, size=k)
    sigma = sigma.reshape(t.shape)
    V = potential(t, None, sigma)
    cut_level = float(rng.uniform(0.2, 1.0)) * float(V.max())
    up = V <= cut_level
    g = np.where(up, adjoint_hardy(t, sigma), 0.0)
    Ig = hardy(t, g)
    if coincident:
        f = g.copy()
        return f, g, float(Ig[f > 0].max()) if np.any(f > 0) else 0.0
    delta = float(rng.uniform(0.05, 0.3)) * max(float(Ig.max()), 1e-12)
    allowed = Ig <= delta
    f = np.where(allowed & (rng.random(t.shape) < rng.uniform(0.2, 1.0)), rng.exponential(1.0, size=t.shape), 0.0)
    return f, g, delta


def conjecture_search_bitree_pair(
    depth: int,
    trials: int,
    seed: int,
    taus: Sequence[float] = (1.0, 0.5, 0.25),
    depths: Optional[Sequence[int]] = None,
    config: Config = DEFAULT_CONFIG,
) -> pd.DataFrame:
    """
    2-트리 두 함수 후보 φ 의 비용 ∫φ²·(λ/δ)^τ/∫f² 를 깊이별로 탐색합니다.

    Returns:
        depth, trial, coincident, lambda, delta, band_size, domination_holds, min_ratio, cost_ratio,
        scaled_tau_* 컬럼의 DataFrame (시행별 한 행)
    """
    rows = []
    for d in (depths or [depth]):
        t = NTreeInstance.dyadic(2, d, 2, config)
        for k in range(trials):
            rng = trial_rng(seed, d, k)
            coincident = k % 10 == 0
            f, g, delta = superadditive_pair(t, rng, coincident=coincident)
            if not np.any(f > 0) or delta <= 0:
                continue
            Ig = hardy(t, g)
            top = float(Ig.max())
            lam = max(10 * delta, top / 2 ** int(rng.integers(1, 4)))
            cert = pair_majorant(t, f, g, lam, delta)
            row = {
                "depth": d,
                "trial": k,
                "coincident": coincident,
                "lambda": lam,
                "delta": delta,
                "band_size": cert.domination_set.count,
                "domination_holds": cert.domination_holds,
                "min_ratio": cert.min_ratio,
                "cost_ratio": cert.cost_ratio,
            }
            for tau in taus:
                row[f"scaled_tau_{tau:g}"] = cert.cost_ratio * (lam / delta) ** tau
            rows.append(row)
    table = pd.DataFrame(rows)
    if not table.empty and not table["domination_holds"].all():
        logger.error(f"두 함수 지배 조건 위반 {int((~table['domination_holds']).sum())} 건")
    return table


def growth_by_depth(table: pd.DataFrame, column: str) -> pd.DataFrame:
    """깊이별 최댓값 표와 증가 여부."""
    if table.empty:
        return pd.DataFrame(columns=["depth", "max", "increasing"])
    out = table.groupby("depth")[column].max().reset_index().rename(columns={column: "max"})
    out["increasing"] = out["max"].diff().fillna(0.0) > 0
    return out


def obstruction_ratio(t: NTreeInstance, f) -> np.ndarray:
    """
    ∫(I₁₂f·I₃₄f)² / (δ²∫f²), δ = max_{supp f} 𝐈f. 앞쪽 배치 축을 지원합니다.
    """
    if t.n != 4:
        raise HypothesisError(f"4-트리 비율은 n = 4 에서만 정의됩니다 (n={t.n}).")
    f = as_field(t, f, nonnegative=True)
    axes = tuple(range(f.ndim - 4, f.ndim))
    lhs = np.sum((hardy_coord(t, f, [1, 2]) * hardy_coord(t, f, [3, 4])) ** 2, axis=axes)
    If = hardy(t, f)
    delta = np.max(np.where(f > 0, If, 0.0), axis=axes)
    den = delta ** 2 * np.sum(f ** 2, axis=axes)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(den > 0, lhs / den, 0.0)


def obstruction_4tree_exhaustive(config: Config = DEFAULT_CONFIG, batch: int = 4096) -> Dict[str, object]:
    """깊이 1 4-트리의 잎 지지 {0,1} 필드 2¹⁶ 개 전수 최대 비율."""
    t = NTreeInstance.dyadic(4, 1, 2, config)
    leaves = np.flatnonzero(t.leaf_mask.ravel())
    shifts = np.arange(leaves.size, dtype=np.int64)
    best, best_bits = 0.0, 0
    total = 1 << leaves.size
    for start in range(1, total, batch):
        bits = np.arange(start, min(start + batch, total), dtype=np.int64)
        fields = np.zeros((bits.size, t.size))
        fields[:, leaves] = (bits[:, None] >> shifts[None, :]) & 1
        ratios = obstruction_ratio(t, fields.reshape((bits.size,) + t.shape))
        i = int(np.argmax(ratios))
        if ratios[i] > best:
            best, best_bits = float(ratios[i]), int(bits[i])
    witness = [int(leaves[i]) for i in range(leaves.size) if best_bits >> i & 1]
    return {"max_ratio": best, "witness_leaves": witness, "cases": total - 1}


def obstruction_4tree(
    depth: int,
    trials: int,
    seed: int,
    depths: Optional[Sequence[int]] = None,
    config: Config = DEFAULT_CONFIG,
) -> pd.DataFrame:
    """
    깊이별로 무작위 f ≥ 0 에 대한 4-트리 비율과, f = g 일 때의 일반 후보 φ 비용을 기록합니다.
    """
    rows = []
    for d in (depths or range(1, depth + 1)):
        t = NTreeInstance.dyadic(4, d, 2, config)
        leaves = np.flatnonzero(t.leaf_mask.ravel())
        for k in range(trials):
            rng = trial_rng(seed, 4, d, k)
            f = np.zeros(t.size)
            if k % 2 == 0:
                m = int(rng.integers(1, min(leaves.size, 12) + 1))
                f[rng.choice(leaves, size=m, replace=False)] = rng.exponential(1.0, size=m)
            else:
                mask = rng.random(t.size) < rng.uniform(0.05, 0.5)
                f[mask] = rng.exponential(1.0, size=int(mask.sum()))
            if not f.any():
                continue
            f = f.reshape(t.shape)
            ratio = float(obstruction_ratio(t, f))
            delta = default_delta(t, None, f)
            cert = pair_majorant(t, f, f, 10 * delta, delta)
            rows.append(
                {
                    "depth": d,
                    "trial": k,
                    "ratio": ratio,
                    "vf4_cost_ratio": cert.cost_ratio,
                    "vf4_domination_holds": cert.domination_holds,
                }
            )
    return pd.DataFrame(rows)


def cut_failure_search(depth: int, trials: int, seed: int, config: Config = DEFAULT_CONFIG) -> pd.DataFrame:
    """
    T² 에서 𝐈(1_{𝐈g≤δ}g) > δ 인 초가법 g 를 찾습니다 (1-트리에서는 불가능한 현상).
    """
    t = NTreeInstance.dyadic(2, depth, 2, config)
    rows = []
    for k in range(trials):
        rng = trial_rng(seed, 2, depth, k)
        _, g, _ = superadditive_pair(t, rng, coincident=True)
        Ig = hardy(t, g)
        if not np.any(g > 0):
            continue
        delta = float(rng.uniform(0.1, 1.0)) * float(Ig.max())
        rows.append({"depth": depth, "trial": k, "delta": delta, "ratio": cut_bound_ratio(t, g, delta)})
    return pd.DataFrame(rows)


def up_set_cut_is_superadditive(t: NTreeInstance, sigma, up: np.ndarray) -> bool:
    """윗집합 U 에 대해 1_U·𝐈*σ 가 초가법인지 확인합니다."""
    if not is_up_set(t, up):
        raise HypothesisError("U 가 윗집합이 아닙니다.")
    return is_superadditive(t, np.where(up, adjoint_hardy(t, sigma), 0.0))
