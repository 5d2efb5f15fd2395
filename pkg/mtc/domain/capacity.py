from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Dict, Iterable, Optional, Tuple

import numpy as np
import pandas as pd
from scipy.optimize import nnls

from mtc.config import DEFAULT_CONFIG, Config
from mtc.domain.hardy import Weight, adjoint_hardy, as_field, dense_weight, energy, hardy, potential
from mtc.domain.majorization import majorant_bitree, majorant_tritree
from mtc.domain.poset import DownSet, NTreeInstance, VertexSet, up_closure

logger = logging.getLogger(__name__)


class CapacityError(Exception):
    """용량 계산 에러"""
    pass


@dataclass
class CapacityResult:
    value: float
    minimizer: np.ndarray
    active_set: VertexSet
    kkt_residual: float
    duals: np.ndarray
    converged: bool
    signed_value: Optional[float] = None


def _ldp(G: np.ndarray, h: np.ndarray, maxiter: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    최소 거리 문제 min ‖x‖² s.t. Gx ≥ h 를 NNLS 로 풉니다.

    E = [Gᵀ; hᵀ], f = e_{n+1} 에 대해 NNLS 해 u 로 x = Gᵀu/(1 − hᵀu),
    쌍대 변수 λ = 2u/(1 − hᵀu) 입니다.

    Raises:
        CapacityError: NNLS 실패 또는 실행 불가능한 문제
    """
    rows, cols = G.shape
    E = np.vstack([G.T, h[None, :]])
    f = np.zeros(cols + 1)
    f[-1] = 1.0
    try:
        u, _ = nnls(E, f, maxiter=maxiter)
    except RuntimeError as e:
        raise CapacityError(f"NNLS 가 수렴하지 않았습니다: {e}") from e
    denom = 1.0 - float(h @ u)
    if denom <= 1e-14:
        raise CapacityError("제약 조건을 만족하는 φ 가 없습니다.")
    return G.T @ u / denom, 2.0 * u / denom


def _kkt_residual(G: np.ndarray, h: np.ndarray, x: np.ndarray, lam: np.ndarray) -> float:
    slack = G @ x - h
    stationarity = float(np.abs(2.0 * x - G.T @ lam).max()) if x.size else 0.0
    feasibility = float(np.clip(-slack, 0.0, None).max()) if slack.size else 0.0
    complementarity = float(np.abs(lam * slack).max()) if slack.size else 0.0
    dual = float(np.clip(-lam, 0.0, None).max()) if lam.size else 0.0
    return max(stationarity, feasibility, complementarity, dual)


def capacity(
    t: NTreeInstance,
    E,
    tol: Optional[float] = None,
    weight: Optional[Weight] = None,
    config: Config = DEFAULT_CONFIG,
) -> CapacityResult:
    """
    cap(E) = min Σ φ² (weight 가 있으면 Σ wφ²) s.t. 𝐈φ ≥ 1 on E, φ ≥ 0.

    ↑E 밖의 변수는 최적해에서 0 이므로 ↑E 위의 변수만 풉니다.
    부호 제약 없는 값(signed_value)도 함께 계산합니다.

    Raises:
        CapacityError: E 가 비었거나, 가중치가 ↑E 에서 양수가 아니거나, 풀이에 실패할 때
    """
    tol = config.capacity_tol if tol is None else tol
    mask = np.asarray(getattr(E, "members", E), dtype=bool).reshape(t.shape)
    if not mask.any():
        raise CapacityError("E 가 비어 있습니다.")

    up = up_closure(t, mask)
    var_idx = np.flatnonzero(up.ravel())
    con_idx = np.flatnonzero(mask.ravel())
    A = np.zeros((con_idx.size, var_idx.size))
    for r, c in enumerate(con_idx):
        A[r] = t.ancestor_mask(int(c)).ravel()[var_idx]

    scale = np.ones(var_idx.size)
    if weight is not None:
        wv = dense_weight(t, weight).ravel()[var_idx]
        if np.any(wv <= 0):
            raise CapacityError("가중 용량은 ↑E 에서 w > 0 이어야 합니다.")
        scale = 1.0 / np.sqrt(wv)
    A_scaled = A * scale[None, :]

    G = np.vstack([A_scaled, np.eye(var_idx.size)])
    h = np.concatenate([np.ones(con_idx.size), np.zeros(var_idx.size)])
    maxiter = max(3 * G.shape[0], 10 * con_idx.size)
    y, lam = _ldp(G, h, maxiter)
    residual = _kkt_residual(G, h, y, lam)

    y_signed, _ = _ldp(A_scaled, np.ones(con_idx.size), 10 * con_idx.size)

    phi = np.zeros(t.size)
    phi[var_idx] = np.clip(y * scale, 0.0, None)
    phi = phi.reshape(t.shape)
    wd = np.ones(t.shape) if weight is None else dense_weight(t, weight)
    value = float(np.sum(wd * phi ** 2))

    Iphi = hardy(t, phi)
    active = mask & (np.abs(Iphi - 1.0) <= tol)
    converged = residual <= tol
    if not converged:
        logger.warning(f"용량 KKT 잔차 {residual:.3g} 가 허용 오차 {tol:.3g} 를 넘습니다.")
    return CapacityResult(
        value=value,
        minimizer=phi,
        active_set=VertexSet(active),
        kkt_residual=residual,
        duals=lam[: con_idx.size].copy(),
        converged=converged,
        signed_value=float(y_signed @ y_signed),
    )


def superlevel_set(t: NTreeInstance, w: Optional[Weight], mu, lam: float) -> DownSet:
    """
    {α : 𝐕^μ(α) > λ}. 퍼텐셜은 잎 방향으로 증가하므로 항상 아래집합입니다.

    Raises:
        CapacityError: λ ≤ 0
        PosetError: 결과가 아래로 닫혀 있지 않을 때
    """
    if lam <= 0:
        raise CapacityError(f"λ 는 양수여야 합니다: {lam}")
    return DownSet.checked(t, potential(t, w, mu) > lam)


def normalize_measure(t: NTreeInstance, w: Optional[Weight], mu) -> Tuple[np.ndarray, float]:
    """max_{supp μ} 𝐕^μ = 1 이 되도록 μ 를 배율 조정합니다. (조정된 μ, 배율)"""
    mu = as_field(t, mu, nonnegative=True)
    V = potential(t, w, mu)
    peak = float(V[mu > 0].max()) if np.any(mu > 0) else 0.0
    if peak <= 0:
        raise CapacityError("μ ≡ 0 은 정규화할 수 없습니다.")
    return mu / peak, 1.0 / peak


def decay_exponent(n: int) -> int:
    """T² 에서는 λ⁻⁴, T³ 에서는 λ⁻² 감쇠."""
    return 4 if n == 2 else 2


def capacity_bound_experiment(
    t: NTreeInstance,
    mu,
    lambda_grid: Iterable[float],
    normalize: bool = True,
    w: Optional[Weight] = None,
    config: Config = DEFAULT_CONFIG,
) -> pd.DataFrame:
    """
    λ 격자 위에서 cap({𝐕^μ > λ})·λ^p/ℰ[μ] 표를 만듭니다 (T² 는 p=4, T³ 는 p=2).

    Returns:
        lambda, set_size, cap, signed_cap, energy, ratio, kkt_residual, converged, empty 컬럼의 DataFrame
    """
    if t.n not in (2, 3):
        raise CapacityError(f"용량 실험은 n ∈ {{2, 3}} 에서만 정의됩니다 (n={t.n}).")
    mu = as_field(t, mu, nonnegative=True)
    if normalize:
        mu, _ = normalize_measure(t, w, mu)
    p = decay_exponent(t.n)
    E_mu = energy(t, w, mu)
    rows = []
    for lam in lambda_grid:
        lam = float(lam)
        if lam < 1.0:
            continue
        level = superlevel_set(t, w, mu, lam)
        row: Dict[str, object] = {"lambda": lam, "set_size": level.count, "energy": E_mu}
        if level.is_empty():
            row.update(cap=0.0, signed_cap=0.0, ratio=0.0, kkt_residual=0.0, converged=True, empty=True)
        else:
            res = capacity(t, level, config=config)
            row.update(
                cap=res.value,
                signed_cap=res.signed_value,
                ratio=res.value * lam ** p / E_mu,
                kkt_residual=res.kkt_residual,
                converged=res.converged,
                empty=False,
            )
        rows.append(row)
    columns = ["lambda", "set_size", "cap", "signed_cap", "energy", "ratio", "kkt_residual", "converged", "empty"]
    return pd.DataFrame(rows, columns=columns)


def fit_decay_slope(table: pd.DataFrame) -> float:
    """log cap 대 log λ 의 최소제곱 기울기 (양의 용량 점이 2개 미만이면 nan)."""
    used = table[table["cap"] > 0]
    if len(used) < 2 or used["lambda"].nunique() < 2:
        return math.nan
    slope, _ = np.polyfit(np.log(used["lambda"].to_numpy()), np.log(used["cap"].to_numpy()), 1)
    return float(slope)


@dataclass
class LadderBound:
    lam: float
    cost: float
    feasible: bool
    levels: int
    phi: np.ndarray


def capacity_ladder_bound(t: NTreeInstance, mu, lam: float) -> LadderBound:
    """
    증명의 사다리 구성 ψ = Σ_k λ_k⁻¹ φ_k (λ_k = 2^k λ) 로 cap({𝐕^μ > λ}) 의 상한을 만듭니다.

    φ_k 는 f = 𝐈*μ, δ = max_{supp μ} 𝐕^μ 에 대한 소에너지 지배 함수이며,
    𝐈ψ ≥ 1 을 초월 집합 위에서 직접 확인합니다.
    """
    if t.n not in (2, 3):
        raise CapacityError(f"사다리 상한은 n ∈ {{2, 3}} 에서만 정의됩니다 (n={t.n}).")
    mu = as_field(t, mu, nonnegative=True)
    f = adjoint_hardy(t, mu)
    V = hardy(t, f)
    delta = float(V[mu > 0].max()) if np.any(mu > 0) else 0.0
    build = majorant_bitree if t.n == 2 else majorant_tritree
    psi = np.zeros(t.shape)
    levels = 0
    level = float(lam)
    top = float(V.max())
    while level <= top:
        cert = build(t, None, f, level, delta, check_hypotheses=False)
        psi += cert.phi / level
        levels += 1
        level *= 2.0
    target = V > lam
    feasible = bool(np.all(hardy(t, psi)[target] >= 1.0 - 1e-9))
    return LadderBound(lam=float(lam), cost=float(np.sum(psi ** 2)), feasible=feasible, levels=levels, phi=psi)
