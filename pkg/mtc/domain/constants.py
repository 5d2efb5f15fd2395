from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple

import numpy as np

from mtc.config import DEFAULT_CONFIG, Config
from mtc.domain.hardy import (
    Weight,
    adjoint_hardy,
    as_field,
    dense_weight,
    hardy,
    hardy_weight,
)
from mtc.domain.poset import (
    NTreeInstance,
    PosetError,
    any_child,
    down_closure,
    down_set_matrix,
    random_down_set,
)
from mtc.utils.numeric import leq, safe_ratio

logger = logging.getLogger(__name__)

# 거듭제곱 반복의 Rayleigh 몫은 아래에서 수렴하므로 HC ≤ CE 비교에만 완화된 허용 오차를 씁니다.
POWER_CHAIN_REL = 1e-6


class ConstantsError(Exception):
    """임베딩 상수 계산 에러"""
    pass


class EmbeddingConvergenceError(ConstantsError):
    """거듭제곱 반복이 수렴하지 않음 (bracket 에 Rayleigh 몫 하한과 행합 상한)"""

    def __init__(self, message: str, bracket: Tuple[float, float], iterations: int):
        super().__init__(message)
        self.bracket = bracket
        self.iterations = iterations


@dataclass
class ConstantEstimate:
    value: float
    exact: bool
    mode: str
    witness: Any = None


@dataclass
class ConstantsReport:
    box: ConstantEstimate
    carleson: ConstantEstimate
    hereditary: ConstantEstimate
    embedding: ConstantEstimate
    chain_holds: Optional[bool] = None
    ratios: Dict[str, float] = field(default_factory=dict)

    def all_exact(self) -> bool:
        return self.carleson.exact and self.hereditary.exact

    def values(self) -> Tuple[float, float, float, float]:
        return (self.box.value, self.carleson.value, self.hereditary.value, self.embedding.value)

    def to_dict(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {}
        for name in ("box", "carleson", "hereditary", "embedding"):
            est = getattr(self, name)
            out[name] = est.value
            out[f"{name}_exact"] = est.exact
            out[f"{name}_mode"] = est.mode
        out.update(self.ratios)
        out["chain_holds"] = self.chain_holds
        return out


def _mass_check(mu: np.ndarray) -> None:
    if not np.any(mu > 0):
        raise ConstantsError("μ ≡ 0 에서는 상수가 정의되지 않습니다.")


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def box_constant(t: NTreeInstance, w: Optional[Weight], mu) -> ConstantEstimate:
    """
    [w,μ]_Box = max_{β: 𝐈*μ(β) > 0} ℰ_β[μ]/𝐈*μ(β).

    ℰ_β[μ] = Σ_{α≤β} w(α)(𝐈*μ(α))² 는 w(𝐈*μ)² 에 대한 한 번의 수반 Hardy 스윕입니다.
    """
    mu = as_field(t, mu, nonnegative=True)
    _mass_check(mu)
    star = adjoint_hardy(t, mu)
    local = adjoint_hardy(t, dense_weight(t, w) * star ** 2)
    ratio = np.full(t.shape, -np.inf)
    pos = star > 0
    ratio[pos] = local[pos] / star[pos]
    best = int(np.argmax(ratio))
    witness = tuple(int(c) for c in np.unravel_index(best, t.shape))
    return ConstantEstimate(value=float(ratio.ravel()[best]), exact=True, mode="exact", witness=witness)


def _best_ratio(energy: np.ndarray, mass: np.ndarray) -> Tuple[float, int]:
    """질량 0 이고 에너지 0 인 항목은 건너뜁니다. 질량 0, 에너지 양수는 +∞."""
    ratio = np.full(energy.shape, -np.inf)
    pos = mass > 0
    ratio[pos] = energy[pos] / mass[pos]
    ratio[(~pos) & (energy > 0)] = np.inf
    if np.all(ratio == -np.inf):
        return 0.0, -1
    best = int(np.argmax(ratio))
    return float(ratio[best]), best


def carleson_constant(
    t: NTreeInstance,
    w: Optional[Weight],
    mu,
    mode: str = "exact",
    trials: int = 200,
    seed: int = 0,
    config: Config = DEFAULT_CONFIG,
) -> ConstantEstimate:
    """
    [w,μ]_C = sup_{𝒟 아래집합} Σ_{α∈𝒟} w(𝐈*μ)² / μ(𝒟).

    Args:
        mode: "exact" (모든 아래집합 열거) 또는 "sampled" (무작위 아래집합 + 탐욕적 추가, 하한)

    Returns:
        witness 는 최적 아래집합 마스크
    """
    mu = as_field(t, mu, nonnegative=True)
    _mass_check(mu)
    density = (dense_weight(t, w) * adjoint_hardy(t, mu) ** 2).ravel()
    flat_mu = mu.ravel()

    if mode == "exact":
        try:
            M = down_set_matrix(t, config)
        except PosetError as e:
            raise ConstantsError(f"Carleson 정확 모드 불가: {e}") from e
        Mf = M.astype(np.float64)
        value, best = _best_ratio(Mf @ density, Mf @ flat_mu)
        witness = M[best].reshape(t.shape) if best >= 0 else None
        if math.isinf(value):
            logger.warning("질량 0 아래집합에 양의 에너지: Carleson 상수 = +∞")
        return ConstantEstimate(value=value, exact=True, mode="exact", witness=witness)

    if mode != "sampled":
        raise ConstantsError(f"알 수 없는 모드입니다: {mode}")

    rng = _rng(seed)
    best_value = -np.inf
    best_mask = None
    for trial in range(max(trials, 1)):
        # 첫 시행은 supp μ 의 아래 닫힘에서 시작합니다.
        D = down_closure(t, mu > 0) if trial == 0 else random_down_set(t, rng).members.copy()
        value, D = _greedy_down_set(t, D, density.reshape(t.shape), mu)
        if value > best_value:
            best_value, best_mask = value, D
    if not np.isfinite(best_value) and best_value < 0:
        best_value = 0.0
    return ConstantEstimate(value=float(best_value), exact=False, mode="sampled", witness=best_mask)


def _greedy_down_set(t: NTreeInstance, D: np.ndarray, density: np.ndarray, mu: np.ndarray) -> Tuple[float, np.ndarray]:
    """아래 덮개가 모두 D 에 있는 정점을 비율이 가장 좋아지는 순서로 추가합니다."""
    energy = float(density[D].sum())
    mass = float(mu[D].sum())
    current = safe_ratio(energy, mass)
    current = -np.inf if math.isnan(current) else current
    while True:
        outside = ~D
        blocked = np.zeros(t.shape, dtype=bool)
        for j, tr in enumerate(t.trees):
            blocked |= any_child(outside, tr, j)
        addable = outside & ~blocked
        if not addable.any():
            break
        new_mass = mass + mu[addable]
        new_energy = energy + density[addable]
        with np.errstate(divide="ignore", invalid="ignore"):
            cand = np.where(new_mass > 0, new_energy / new_mass, -np.inf)
        k = int(np.argmax(cand))
        if cand[k] <= current:
            break
        idx = np.argwhere(addable)[k]
        D[tuple(idx)] = True
        energy, mass, current = float(new_energy[k]), float(new_mass[k]), float(cand[k])
    return current, D


def support_points(t: NTreeInstance, mu: np.ndarray) -> np.ndarray:
    """supp μ 의 선형 인덱스."""
    return np.flatnonzero(mu.ravel() > 0)


def join_kernel(t: NTreeInstance, w: Optional[Weight], rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
    """K[i, j] = 𝐈w(join(rows_i, cols_j))."""
    Iw = hardy_weight(t, w)
    rc = np.unravel_index(rows, t.shape)
    cc = np.unravel_index(cols, t.shape)
    joins = []
    for j, tr in enumerate(t.trees):
        a, b = np.meshgrid(rc[j], cc[j], indexing="ij")
        joins.append(tr.lca_many(a.ravel(), b.ravel()).reshape(a.shape))
    return Iw[tuple(joins)]


def restricted_ratio(t: NTreeInstance, w: Optional[Weight], mu, E) -> float:
    """ℰ[μ1_E]/μ(E). μ(E) = 0 이면 nan."""
    mu = as_field(t, mu, nonnegative=True)
    E = np.asarray(getattr(E, "members", E), dtype=bool).reshape(t.shape)
    nu = np.where(E, mu, 0.0)
    star = adjoint_hardy(t, nu)
    return safe_ratio(float(np.sum(dense_weight(t, w) * star ** 2)), float(nu.sum()))


def hereditary_constant(
    t: NTreeInstance,
    w: Optional[Weight],
    mu,
    mode: str = "exact",
    trials: int = 50,
    seed: int = 0,
    config: Config = DEFAULT_CONFIG,
) -> ConstantEstimate:
    """
    [w,μ]_HC = sup_{E ⊆ supp μ} ℰ[μ1_E]/μ(E).

    supp μ 밖의 정점은 양변에 기여하지 않으므로 supp μ 의 부분집합만 탐색합니다.
    ℰ[μ1_E] = xᵀGx, G_{ωω′} = μ(ω)μ(ω′)𝐈w(join(ω,ω′)).
    """
    mu = as_field(t, mu, nonnegative=True)
    _mass_check(mu)
    supp = support_points(t, mu)
    k = supp.size
    m = mu.ravel()[supp]
    G = np.outer(m, m) * join_kernel(t, w, supp, supp)

    if mode == "exact":
        if k > config.exact_subset_cap:
            raise ConstantsError(f"HC 정확 모드는 |supp μ| ≤ {config.exact_subset_cap} 에서만 가능합니다 (현재 {k}).")
        best_value, best_bits = -np.inf, 0
        total = 1 << k
        chunk = 1 << 14
        shifts = np.arange(k, dtype=np.int64)
        for start in range(1, total, chunk):
            bits = np.arange(start, min(start + chunk, total), dtype=np.int64)
            X = ((bits[:, None] >> shifts[None, :]) & 1).astype(np.float64)
            energies = np.einsum("si,ij,sj->s", X, G, X)
            ratios = energies / (X @ m)
            i = int(np.argmax(ratios))
            if ratios[i] > best_value:
                best_value, best_bits = float(ratios[i]), int(bits[i])
        chosen = supp[[i for i in range(k) if best_bits >> i & 1]]
        return ConstantEstimate(value=best_value, exact=True, mode="exact", witness=_indicator(t, chosen))

    if mode != "local-search":
        raise ConstantsError(f"알 수 없는 모드입니다: {mode}")

    rng = _rng(seed)
    best_value, best_x = -np.inf, None
    diag = np.diag(G)
    for restart in range(trials):
        x = rng.random(k) < rng.uniform(0.2, 1.0) if restart else np.ones(k, dtype=bool)
        if not x.any():
            x[int(rng.integers(k))] = True
        xf = x.astype(np.float64)
        Gx = G @ xf
        energy = float(xf @ Gx)
        mass = float(m @ xf)
        while True:
            sign = np.where(x, -1.0, 1.0)
            new_energy = energy + sign * 2.0 * Gx + diag
            new_mass = mass + sign * m
            with np.errstate(divide="ignore", invalid="ignore"):
                cand = np.where(new_mass > 0, new_energy / new_mass, -np.inf)
            i = int(np.argmax(cand))
            if cand[i] <= energy / mass * (1 + 1e-14):
                break
            x[i] = ~x[i]
            Gx += sign[i] * G[:, i]
            energy, mass = float(new_energy[i]), float(new_mass[i])
        value = energy / mass
        if value > best_value:
            best_value, best_x = value, x.copy()
    return ConstantEstimate(value=best_value, exact=False, mode="local-search", witness=_indicator(t, supp[best_x]))


def _indicator(t: NTreeInstance, indices: np.ndarray) -> np.ndarray:
    mask = np.zeros(t.size, dtype=bool)
    mask[indices] = True
    return mask.reshape(t.shape)


def embedding_rayleigh(t: NTreeInstance, w: Optional[Weight], mu, psi) -> float:
    """Σ w|𝐈*(ψμ)|² / Σ ψ²μ"""
    mu = as_field(t, mu, nonnegative=True)
    psi = as_field(t, psi)
    num = float(np.sum(dense_weight(t, w) * adjoint_hardy(t, psi * mu) ** 2))
    return safe_ratio(num, float(np.sum(psi ** 2 * mu)))


def embedding_constant(
    t: NTreeInstance,
    w: Optional[Weight],
    mu,
    tol: Optional[float] = None,
    config: Config = DEFAULT_CONFIG,
) -> ConstantEstimate:
    """
    [w,μ]_CE: Σ w|𝐈*(ψμ)|² ≤ C Σ ψ²μ 의 최소 상수.

    supp μ 위에서 B = √μ√μ′·𝐈w(join) 의 최대 고윳값을 거듭제곱 반복으로 구합니다.
    지지점이 matrix_free_threshold 를 넘으면 Bx = √μ ⊙ 𝐈(w𝐈*(√μ x)) 로 적용합니다.

    Raises:
        EmbeddingConvergenceError: power_max_iter 안에 수렴하지 않을 때
    """
    tol = config.power_tol if tol is None else tol
    mu = as_field(t, mu, nonnegative=True)
    _mass_check(mu)
    supp = support_points(t, mu)
    k = supp.size
    root = np.sqrt(mu.ravel()[supp])

    if k <= config.matrix_free_threshold:
        B = np.outer(root, root) * join_kernel(t, w, supp, supp)

        def apply(x: np.ndarray) -> np.ndarray:
            return B @ x

        row_bound = float(np.abs(B).sum(axis=1).max())
    else:
        wd = dense_weight(t, w)

        def apply(x: np.ndarray) -> np.ndarray:
            nu = np.zeros(t.size)
            nu[supp] = root * x
            V = hardy(t, wd * adjoint_hardy(t, nu.reshape(t.shape)))
            return root * V.ravel()[supp]

        row_bound = float(apply(np.ones(k)).max())

    rng = np.random.default_rng(0)
    x = np.ones(k) + 1e-3 * rng.standard_normal(k)
    x /= np.linalg.norm(x)
    rq_prev = None
    for iteration in range(1, config.power_max_iter + 1):
        y = apply(x)
        norm = float(np.linalg.norm(y))
        if norm == 0.0:
            return ConstantEstimate(value=0.0, exact=True, mode="power", witness=None)
        rq = float(x @ y)
        x = y / norm
        if rq_prev is not None and abs(rq - rq_prev) <= tol * abs(rq):
            psi = np.zeros(t.size)
            psi[supp] = x / root
            logger.debug(f"거듭제곱 반복 수렴: {iteration} 회, λ={rq:.12g}")
            return ConstantEstimate(value=rq, exact=True, mode="power", witness=psi.reshape(t.shape))
        rq_prev = rq
    raise EmbeddingConvergenceError(
        f"거듭제곱 반복이 {config.power_max_iter} 회 안에 수렴하지 않았습니다.",
        bracket=(float(rq_prev), row_bound),
        iterations=config.power_max_iter,
    )


def ordering_report(
    t: NTreeInstance,
    w: Optional[Weight],
    mu,
    trials: int = 200,
    seed: int = 0,
    config: Config = DEFAULT_CONFIG,
) -> ConstantsReport:
    """
    네 상수와 비율 CE/Box, HC/C, C/Box 를 계산합니다.

    크기가 허용되면 정확 모드를 쓰고, 모두 정확하면 Box ≤ C ≤ HC ≤ CE 를 검사합니다.
    """
    mu = as_field(t, mu, nonnegative=True)
    box = box_constant(t, w, mu)
    car_mode = "exact" if t.size <= config.exact_downset_cap else "sampled"
    carleson = carleson_constant(t, w, mu, mode=car_mode, trials=trials, seed=seed, config=config)
    hc_mode = "exact" if support_points(t, mu).size <= config.exact_subset_cap else "local-search"
    hereditary = hereditary_constant(t, w, mu, mode=hc_mode, trials=max(trials // 4, 8), seed=seed, config=config)
    embedding = embedding_constant(t, w, mu, config=config)

    report = ConstantsReport(box=box, carleson=carleson, hereditary=hereditary, embedding=embedding)
    report.ratios = {
        "ce_over_box": safe_ratio(embedding.value, box.value),
        "hc_over_c": safe_ratio(hereditary.value, carleson.value),
        "c_over_box": safe_ratio(carleson.value, box.value),
    }
    if report.all_exact():
        report.chain_holds = (
            leq(box.value, carleson.value)
            and leq(carleson.value, hereditary.value)
            and leq(hereditary.value, embedding.value, rel=POWER_CHAIN_REL)
        )
        if not report.chain_holds:
            logger.error(f"순서 사슬 위반: {report.values()}")
    return report


# --- 경계(dyadic) 변형 -----------------------------------------------------------


def _boundary_cells(t: NTreeInstance) -> Tuple[int, np.ndarray]:
    depths = {tr.max_depth for tr in t.trees}
    if len(depths) != 1 or not all(tr.is_dyadic() for tr in t.trees):
        raise ConstantsError("경계 상수는 같은 깊이의 이진 정규 트리 곱에서만 정의됩니다.")
    return depths.pop(), np.flatnonzero(t.leaf_mask.ravel())


def _rectangles(t: NTreeInstance, cells: np.ndarray) -> np.ndarray:
    """R[α, c] = 칸 c 가 α 아래에 있는지 (|T^d| × 칸 수)."""
    R = np.zeros((t.size, cells.size), dtype=bool)
    for c_i, c in enumerate(cells):
        R[:, c_i] = t.ancestor_mask(int(c)).ravel()
    return R


def chang_carleson_dyadic(
    t: NTreeInstance,
    nu,
    mode: str = "exact",
    trials: int = 100_000,
    seed: int = 0,
    config: Config = DEFAULT_CONFIG,
) -> ConstantEstimate:
    """
    sup_Ω Σ_{R_α ⊆ Ω} m_d(R_α)²ν(α) / m_d(Ω), Ω 는 경계 칸들의 합집합.

    Raises:
        ConstantsError: 트리가 같은 깊이의 이진 트리가 아니거나 정확 모드에서 칸이 너무 많을 때
    """
    nu = as_field(t, nu, nonnegative=True)
    N, cells = _boundary_cells(t)
    cell_mass = 2.0 ** (-N * t.n)
    R = _rectangles(t, cells)
    active = np.flatnonzero(nu.ravel() > 0)
    R = R[active]
    weights = (R.sum(axis=1) * cell_mass) ** 2 * nu.ravel()[active]
    R_int = R.astype(np.int64)

    def evaluate(omegas: np.ndarray) -> np.ndarray:
        outside = (~omegas).astype(np.int64) @ R_int.T
        contained = outside == 0
        return (contained.astype(np.float64) @ weights) / (omegas.sum(axis=1) * cell_mass)

    c = cells.size
    if mode == "exact":
        if c > config.exact_cell_cap:
            raise ConstantsError(f"정확 모드는 경계 칸 {config.exact_cell_cap} 개 이하에서만 가능합니다 (현재 {c}).")
        best_value, best_omega = 0.0, None
        shifts = np.arange(c, dtype=np.int64)
        total = 1 << c
        for start in range(1, total, 1 << 14):
            bits = np.arange(start, min(start + (1 << 14), total), dtype=np.int64)
            omegas = ((bits[:, None] >> shifts[None, :]) & 1).astype(bool)
            values = evaluate(omegas)
            i = int(np.argmax(values))
            if values[i] > best_value:
                best_value, best_omega = float(values[i]), omegas[i].copy()
        return ConstantEstimate(value=best_value, exact=True, mode="exact", witness=best_omega)

    if mode != "sampled":
        raise ConstantsError(f"알 수 없는 모드입니다: {mode}")
    rng = _rng(seed)
    full_R = _rectangles(t, cells)
    best_value, best_omega = 0.0, None
    batch = 4096
    done = 0
    while done < trials:
        size = min(batch, trials - done)
        # 직사각형들의 합집합과 무작위 칸 집합을 섞어 뽑습니다.
        picks = rng.random((size, t.size)) < rng.uniform(0.0, 0.3, size=(size, 1))
        omegas = (picks.astype(np.int64) @ full_R.astype(np.int64)) > 0
        noise = rng.random((size, c)) < rng.uniform(0.0, 1.0, size=(size, 1))
        omegas = np.where(rng.random((size, 1)) < 0.5, omegas, omegas | noise)
        omegas = omegas[omegas.any(axis=1)]
        if omegas.size:
            values = evaluate(omegas)
            i = int(np.argmax(values))
            if values[i] > best_value:
                best_value, best_omega = float(values[i]), omegas[i].copy()
        done += size
    return ConstantEstimate(value=best_value, exact=False, mode="sampled", witness=best_omega)


def boundary_embedding_constant(t: NTreeInstance, nu, config: Config = DEFAULT_CONFIG) -> ConstantEstimate:
    """
    ∫(𝐈*(f dm_d))² dν ≤ C₁ ∫ f² dm_d 의 최소 상수.

    가중치 자리에 ν, 측도 자리에 잎 칸의 m_d = 2^{−Nd} 를 둔 embedding_constant 입니다.
    """
    nu = as_field(t, nu, nonnegative=True)
    N, cells = _boundary_cells(t)
    m = np.zeros(t.size)
    m[cells] = 2.0 ** (-N * t.n)
    if not np.any(nu > 0):
        return ConstantEstimate(value=0.0, exact=True, mode="power")
    return embedding_constant(t, nu, m.reshape(t.shape), config=config)
