"""
대리 최대 원리(surrogate maximum principle)와 그 결과들의 수치 검증기.

- surrogate_check / partialV_check: 절단 퍼텐셜 적분과 우변 비교
- large_energy_downset: 큰 에너지 아래집합
- main_estimate_check / balance: 좋은 퍼텐셜 하한과 균형 보조정리
- theorem_ratio_suite: 상수 역부등식 비율과 μ-ρ 짝 추정의 포락선
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from mtc.config import DEFAULT_CONFIG, Config
from mtc.domain.constants import EmbeddingConvergenceError, hereditary_constant, ordering_report, support_points
from mtc.domain.hardy import Weight, adjoint_hardy, as_field, dense_weight, energy, pairing, potential, truncated
from mtc.domain.identities import HypothesisError
from mtc.domain.poset import DownSet, NTreeInstance, down_closure, down_set_matrix
from mtc.utils.numeric import REL_TOL, leq, safe_ratio

logger = logging.getLogger(__name__)

# n=2 대리 최대 원리의 명시 상수
BITREE_SURROGATE_C = 28.0


@dataclass
class SurrogateReport:
    n: int
    delta: float
    lhs: float
    rho_mass: float
    truncated_energy: float
    rho_energy: float
    mu_mass: float
    implied_constant: float
    kappa_used: float
    explicit_ratio: Optional[float] = None
    explicit_holds: Optional[bool] = None
    corollary_ratio: Optional[float] = None
    corollary_constant: Optional[float] = None
    corollary_holds: Optional[bool] = None

    @property
    def rhs_components(self) -> Tuple[float, float, float, float]:
        return (self.rho_mass, self.truncated_energy, self.rho_energy, self.mu_mass)

    def recompute_implied(self) -> float:
        scale = (self.delta * self.rho_mass) ** self.kappa_used * (
            self.truncated_energy * self.rho_energy
        ) ** ((1.0 - self.kappa_used) / 2.0)
        return 0.0 if self.lhs == 0.0 else safe_ratio(self.lhs, scale)

    def to_dict(self) -> Dict[str, object]:
        return {
            "n": self.n,
            "delta": self.delta,
            "lhs": self.lhs,
            "rho_mass": self.rho_mass,
            "truncated_energy": self.truncated_energy,
            "rho_energy": self.rho_energy,
            "mu_mass": self.mu_mass,
            "implied_constant": self.implied_constant,
            "kappa_used": self.kappa_used,
            "explicit_ratio": self.explicit_ratio,
            "explicit_holds": self.explicit_holds,
            "corollary_ratio": self.corollary_ratio,
            "corollary_constant": self.corollary_constant,
            "corollary_holds": self.corollary_holds,
        }


def surrogate_check(
    t: NTreeInstance,
    w: Optional[Weight],
    mu,
    rho,
    delta: float,
    kappa: Optional[float] = None,
) -> SurrogateReport:
    """
    ∫𝐕_δ^μ dρ 와 (δ|ρ|)^κ(ℰ_δ[μ]ℰ[ρ])^{(1−κ)/2} 를 비교합니다 (κ 기본값 1/n).

    명시 상수 검사:
        n=1: ∫𝐕_δ^μ dρ ≤ δ|ρ|
        n=2: (∫𝐕_δ^μ dρ)⁴ ≤ 28·δ²ℰ_δ[μ]ℰ[ρ]|ρ|²
        n=3: (∫𝐕_δ^μ dρ)³ / (δℰ_δ[μ]ℰ[ρ]|ρ|) 를 기록만 합니다 (상수 미정)
    """
    if delta <= 0:
        raise HypothesisError(f"δ 는 양수여야 합니다: {delta}")
    mu = as_field(t, mu, nonnegative=True)
    rho = as_field(t, rho, nonnegative=True)
    kappa = 1.0 / t.n if kappa is None else float(kappa)
    lhs = pairing(t, w, mu, rho, delta)
    Ed = truncated(t, w, mu, delta).truncated_energy
    Er = energy(t, w, rho)
    rho_mass = float(rho.sum())
    report = SurrogateReport(
        n=t.n,
        delta=float(delta),
        lhs=lhs,
        rho_mass=rho_mass,
        truncated_energy=Ed,
        rho_energy=Er,
        mu_mass=float(mu.sum()),
        implied_constant=0.0,
        kappa_used=kappa,
    )
    report.implied_constant = report.recompute_implied()

    if t.n == 1:
        rhs = delta * rho_mass
        report.explicit_ratio = 0.0 if lhs == 0.0 else safe_ratio(lhs, rhs)
        report.explicit_holds = leq(lhs, rhs)
    elif t.n == 2:
        rhs = BITREE_SURROGATE_C * delta ** 2 * Ed * Er * rho_mass ** 2
        report.explicit_ratio = 0.0 if lhs == 0.0 else safe_ratio(lhs ** 4, rhs)
        report.explicit_holds = leq(lhs ** 4, rhs)
    elif t.n == 3:
        rhs = delta * Ed * Er * rho_mass
        report.explicit_ratio = 0.0 if lhs == 0.0 else safe_ratio(lhs ** 3, rhs)
        _tritree_corollary(report, energy(t, w, mu))

    if report.explicit_holds is False:
        logger.error(f"n={t.n} 대리 최대 원리 위반: 비율 {report.explicit_ratio:.6g} (δ={delta})")
    if report.corollary_holds is False:
        logger.error(f"n=3 따름 추정 위반: 비율² {report.corollary_ratio ** 2:.6g} > C {report.corollary_constant:.6g}")
    return report


def _tritree_corollary(report: SurrogateReport, mu_energy: float) -> None:
    """
    n=3 따름 추정 ∫𝐕_δ^μ dρ ≤ C^{1/2} δ^{1/2} (ℰ[μ]|μ|)^{1/6} (ℰ[ρ]|ρ|)^{1/3} 를 채웁니다.

    C 는 이 인스턴스에서 대리 부등식과 부분 에너지 부등식 ℰ_δ ≤ (Cδ|μ|ℰ[μ])^{1/2} 가
    동시에 성립하는 최소값 max(대리 비율, 부분 에너지 비율²) 입니다. 두 부등식을 합치면
    비율³ = 대리 비율 · 부분 에너지 비율 이므로 비율² ≤ C 가 항상 성립해야 합니다.
    """
    delta, lhs, mass = report.delta, report.lhs, report.mu_mass
    scale = math.sqrt(delta) * (mu_energy * mass) ** (1.0 / 6.0) * (report.rho_energy * report.rho_mass) ** (1.0 / 3.0)
    partial = 0.0 if report.truncated_energy == 0.0 else safe_ratio(
        report.truncated_energy, math.sqrt(delta * mass * mu_energy)
    )
    report.corollary_ratio = 0.0 if lhs == 0.0 else safe_ratio(lhs, scale)
    report.corollary_constant = max(report.explicit_ratio, partial ** 2)
    report.corollary_holds = leq(report.corollary_ratio ** 2, report.corollary_constant)


def surrogate_parameters(n: int) -> Tuple[float, Optional[float]]:
    """
    부분 에너지 부등식 ℰ_δ ≤ C(δ|μ|)^κℰ^{1−κ} 의 (κ, C).

    대리 상수 (κ_s, C_s) 로부터 κ = 2κ_s/(1+κ_s), C = C_s^{2/(1+κ_s)} 입니다.
    n=3 은 C 가 알려져 있지 않아 None 입니다.
    """
    if n == 1:
        return 1.0, 1.0
    if n == 2:
        return 2.0 / 3.0, BITREE_SURROGATE_C ** (1.0 / 3.0)
    return 2.0 / (n + 1), None


@dataclass
class PartialVReport:
    n: int
    delta: float
    lhs: float
    rhs: float
    ratio: float
    exponent: float
    conjectural: bool

    def to_dict(self) -> Dict[str, object]:
        return dict(self.__dict__)


def partialV_check(t: NTreeInstance, w: Optional[Weight], mu, delta: float, kappa: Optional[float] = None) -> PartialVReport:
    """
    ∫𝐕_δ^μ dμ = ℰ_δ[μ] 대 (δ|μ|)^{2κ/(1+κ)} ℰ[μ]^{(1−κ)/(1+κ)} (κ 기본값 1/n).

    n ≥ 4 에서는 같은 식이 추측 형태 (δ|μ|)^{2/(n+1)}ℰ^{(n−1)/(n+1)} 의 추정량입니다.
    μ ≡ 0 이면 0/0 이므로 비율은 nan 입니다.
    """
    mu = as_field(t, mu, nonnegative=True)
    kappa = 1.0 / t.n if kappa is None else float(kappa)
    a = 2.0 * kappa / (1.0 + kappa)
    lhs = truncated(t, w, mu, delta).truncated_energy
    E = energy(t, w, mu)
    rhs = (delta * float(mu.sum())) ** a * E ** (1.0 - a)
    ratio = math.nan if lhs == 0.0 and rhs == 0.0 else safe_ratio(lhs, rhs)
    return PartialVReport(
        n=t.n, delta=float(delta), lhs=lhs, rhs=rhs, ratio=ratio, exponent=a, conjectural=t.n >= 4
    )


def partialv_records(t: NTreeInstance, w: Optional[Weight], mu, deltas: Iterable[float]) -> pd.DataFrame:
    """δ 격자 위의 (x = δ|μ|/ℰ, y = ℰ_δ/ℰ) 기록."""
    mu = as_field(t, mu, nonnegative=True)
    E = energy(t, w, mu)
    mass = float(mu.sum())
    rows = []
    for d in deltas:
        rep = partialV_check(t, w, mu, float(d))
        rows.append(
            {
                "n": t.n,
                "delta": float(d),
                "x": safe_ratio(float(d) * mass, E),
                "y": safe_ratio(rep.lhs, E),
                "ratio": rep.ratio,
            }
        )
    return pd.DataFrame(rows, columns=["n", "delta", "x", "y", "ratio"])


def fit_partialv_exponent(records: pd.DataFrame) -> Dict[str, float]:
    """
    log(ℰ_δ/ℰ) 대 log(δ|μ|/ℰ) 최소제곱 기울기와 기대 지수 2/(n+1).

    Returns:
        {"slope", "expected", "points"}; 쓸 수 있는 점이 2개 미만이면 slope = nan
    """
    used = records[(records["x"] > 0) & (records["y"] > 0) & np.isfinite(records["x"]) & np.isfinite(records["y"])]
    n = int(records["n"].iloc[0]) if len(records) else 0
    expected = 2.0 / (n + 1) if n else math.nan
    if len(used) < 2 or used["x"].nunique() < 2:
        return {"slope": math.nan, "expected": expected, "points": float(len(used))}
    slope, _ = np.polyfit(np.log(used["x"].to_numpy()), np.log(used["y"].to_numpy()), 1)
    logger.info(f"부분 에너지 지수 적합: {slope:.4f} (기대값 {expected:.4f}, 점 {len(used)}개)")
    return {"slope": float(slope), "expected": expected, "points": float(len(used))}


# --- 큰 에너지 아래집합 ------------------------------------------------------------


@dataclass
class LargeEnergyResult:
    downset: DownSet
    fraction: float
    threshold: float
    consistent: bool
    holds: Optional[bool]


def large_energy_downset(t: NTreeInstance, w: Optional[Weight], nu, kappa: float, C: float) -> LargeEnergyResult:
    """
    E = {𝐕^ν > (2C)^{−1/κ}ℰ[ν]/|ν|} 와 ℰ_E[ν]/ℰ[ν].

    (κ, C) 가 이 인스턴스의 문턱값 δ 에서 ℰ_δ[ν] ≤ C(δ|ν|)^κℰ[ν]^{1−κ} 를 만족할 때만
    (consistent) 비율 ≥ 1/2 를 단언합니다.

    Raises:
        HypothesisError: ν ≡ 0
    """
    nu = as_field(t, nu, nonnegative=True)
    mass = float(nu.sum())
    if mass <= 0:
        raise HypothesisError("ν ≡ 0 에서는 큰 에너지 집합이 정의되지 않습니다.")
    E_nu = energy(t, w, nu)
    threshold = (2.0 * C) ** (-1.0 / kappa) * E_nu / mass
    V = potential(t, w, nu)
    down = DownSet.checked(t, V > threshold)
    density = dense_weight(t, w) * adjoint_hardy(t, nu) ** 2
    fraction = safe_ratio(float(density[down.members].sum()), E_nu)
    Ed = truncated(t, w, nu, threshold).truncated_energy
    consistent = leq(Ed, C * (threshold * mass) ** kappa * E_nu ** (1.0 - kappa))
    holds = fraction >= 0.5 - REL_TOL if consistent else None
    if down.is_empty():
        logger.warning(f"문턱값 {threshold:.6g} 이 max 𝐕^ν 이상입니다: (κ, C) 불일치")
    if holds is False:
        logger.error(f"큰 에너지 아래집합 비율 {fraction:.6g} < 1/2")
    return LargeEnergyResult(downset=down, fraction=fraction, threshold=threshold, consistent=consistent, holds=holds)


# --- 주 추정과 균형 -------------------------------------------------------------


def covering_epsilons(n: int, eps: float, kappa: Optional[float] = None) -> Tuple[Tuple[float, ...], float]:
    """ε₁ = ε, ε_{j+1} = ε·ε_j^{1/κ} 와 ε′ = ε·ε₁⋯ε_{n−1}. κ 기본값 2/(n+1)."""
    kappa = 2.0 / (n + 1) if kappa is None else float(kappa)
    seq: List[float] = []
    current = eps
    for _ in range(max(n - 1, 0)):
        seq.append(current)
        current = eps * current ** (1.0 / kappa)
    return tuple(seq), eps * float(np.prod(seq)) if seq else eps


def normalize_energy_mass(t: NTreeInstance, w: Optional[Weight], mu) -> Tuple[np.ndarray, float]:
    """ℰ[cμ] ≤ |cμ| 를 만족하는 가장 큰 배율 c = |μ|/ℰ[μ] 로 조정합니다."""
    mu = as_field(t, mu, nonnegative=True)
    E = energy(t, w, mu)
    if E <= 0:
        raise HypothesisError("ℰ[μ] = 0 인 μ 는 정규화할 수 없습니다.")
    c = float(mu.sum()) / E
    return mu * c, c


@dataclass
class MainEstimateReport:
    ratio: float
    eps_prime: float
    scale: float
    min_potential: float


def main_estimate_check(
    t: NTreeInstance,
    w: Optional[Weight],
    mu,
    eps_prime: Optional[float] = None,
    eps: float = 0.25,
) -> MainEstimateReport:
    """
    정규화된 μ 에 대한 ∫𝐕_{ε′,good} dμ / |μ|.

    Raises:
        HypothesisError: n < 2, 또는 정규화 후 supp μ 에서 𝐕^μ < 1/3 (witness 포함)
    """
    from mtc.domain.covering import good_potential

    if t.n < 2:
        raise HypothesisError(f"주 추정은 n ≥ 2 에서만 정의됩니다 (n={t.n}).")
    scaled, c = normalize_energy_mass(t, w, mu)
    V = potential(t, w, scaled)
    supp = scaled > 0
    low = supp & (V < 1.0 / 3.0 - REL_TOL)
    if low.any():
        where = tuple(int(x) for x in np.unravel_index(int(np.argmax(low)), t.shape))
        raise HypothesisError(f"정규화 후 supp μ 에서 𝐕^μ < 1/3 (배율 {c:.6g})", witness=where)
    if eps_prime is None:
        _, eps_prime = covering_epsilons(t.n, eps)
    good = good_potential(t, w, scaled, eps_prime)
    ratio = safe_ratio(float(np.sum(good * scaled)), float(scaled.sum()))
    return MainEstimateReport(
        ratio=ratio, eps_prime=float(eps_prime), scale=c, min_potential=float(V[supp].min())
    )


@dataclass
class BalanceResult:
    downset: Optional[DownSet]
    nu_tilde: Optional[np.ndarray]
    success: bool
    method: str
    iterations: int


def _balanced(t: NTreeInstance, w: Optional[Weight], nu: np.ndarray, mask: np.ndarray, A: float, E_nu: float) -> Optional[np.ndarray]:
    nt = np.where(mask, nu, 0.0)
    if not np.any(nt > 0):
        return None
    if energy(t, w, nt) < E_nu / 3.0 * (1 - REL_TOL):
        return None
    V = potential(t, w, nt)
    if np.any(V[nt > 0] < A / 3.0 * (1 - REL_TOL)):
        return None
    return nt


def balance(t: NTreeInstance, w: Optional[Weight], nu, A: float, config: Config = DEFAULT_CONFIG) -> BalanceResult:
    """
    𝐕^{ν̃} ≥ A/3 (supp ν̃ 위) 와 ℰ[ν̃] ≥ ℰ[ν]/3 을 만족하는 아래집합 Ẽ, ν̃ = ν1_Ẽ 를 찾습니다.

    Ẽ₀ = 전체 집합에서 Ẽ_{k+1} = ↓{𝐕^{ν1_{Ẽ_k}} ≥ A/3} 를 반복하고,
    실패하면 꼭짓점이 exact_downset_cap 이하일 때 모든 아래집합을 전수 탐색합니다.

    Raises:
        HypothesisError: ℰ[ν] < A|ν|
    """
    nu = as_field(t, nu, nonnegative=True)
    E_nu = energy(t, w, nu)
    if not leq(A * float(nu.sum()), E_nu):
        raise HypothesisError(f"ℰ[ν] = {E_nu:.6g} < A|ν| = {A * float(nu.sum()):.6g}")

    mask = np.ones(t.shape, dtype=bool)
    for k in range(t.size + 1):
        nt = _balanced(t, w, nu, mask, A, E_nu)
        if nt is not None:
            method = "full" if k == 0 else "iteration"
            return BalanceResult(DownSet.checked(t, mask), nt, True, method, k)
        V = potential(t, w, np.where(mask, nu, 0.0))
        nxt = down_closure(t, V >= A / 3.0 * (1 - REL_TOL))
        if np.array_equal(nxt, mask):
            break
        mask = nxt

    if t.size <= config.exact_downset_cap:
        logger.warning("균형 반복 실패: 아래집합 전수 탐색으로 전환합니다.")
        for row in down_set_matrix(t, config):
            cand = row.reshape(t.shape)
            nt = _balanced(t, w, nu, cand, A, E_nu)
            if nt is not None:
                return BalanceResult(DownSet.checked(t, cand), nt, True, "exhaustive", k + 1)
    logger.warning(f"균형 아래집합을 찾지 못했습니다 (A={A:.6g}).")
    return BalanceResult(None, None, False, "failed", k + 1)


# --- 정리 비율 -------------------------------------------------------------------


def pairing_exponent(n: int) -> float:
    """κ′ = κ/(2(1+κ)), κ = 1/n."""
    kappa = 1.0 / n
    return kappa / (2.0 * (1.0 + kappa))


def pairing_ratio(t: NTreeInstance, w: Optional[Weight], mu, rho, config: Config = DEFAULT_CONFIG) -> Dict[str, float]:
    """
    hereditary 상수가 1 이 되도록 정규화한 μ, ρ 에 대한 ∫𝐕^μ dρ / (|μ|^{1/2−κ′}|ρ|^{1/2+κ′}).

    Cauchy–Schwarz 비교값 ∫𝐕^μ dρ / (|μ||ρ|)^{1/2} 도 함께 반환합니다.
    """
    mu = as_field(t, mu, nonnegative=True)
    rho = as_field(t, rho, nonnegative=True)
    scaled = []
    for m in (mu, rho):
        mode = "exact" if support_points(t, m).size <= config.exact_subset_cap else "local-search"
        hc = hereditary_constant(t, w, m, mode=mode, config=config).value
        scaled.append(m / hc)
    mu_n, rho_n = scaled
    kp = pairing_exponent(t.n)
    lhs = pairing(t, w, mu_n, rho_n)
    mm, rm = float(mu_n.sum()), float(rho_n.sum())
    return {
        "pairing": safe_ratio(lhs, mm ** (0.5 - kp) * rm ** (0.5 + kp)),
        "pairing_cs": safe_ratio(lhs, math.sqrt(mm * rm)),
        "kappa_prime": kp,
    }


def ratio_chain(
    t: NTreeInstance,
    w: Optional[Weight],
    mu,
    rho=None,
    trials: int = 200,
    seed: int = 0,
    config: Config = DEFAULT_CONFIG,
) -> Dict[str, object]:
    """
    한 인스턴스의 역부등식 비율 HC/C, CE/HC, HC/Box, CE/Box (ρ 가 있으면 쌍 비율 포함).
    """
    rep = ordering_report(t, w, mu, trials=trials, seed=seed, config=config)
    box, car, hc, ce = rep.values()
    row: Dict[str, object] = {
        "box": box,
        "carleson": car,
        "hereditary": hc,
        "embedding": ce,
        "exact": rep.all_exact(),
        "chain_holds": rep.chain_holds,
        "hc_over_c": safe_ratio(hc, car),
        "ce_over_hc": safe_ratio(ce, hc),
        "hc_over_box": safe_ratio(hc, box),
        "ce_over_box": safe_ratio(ce, box),
    }
    if rho is not None:
        row.update(pairing_ratio(t, w, mu, rho, config))
    return row


THEOREM_RATIOS = ("hc_over_c", "ce_over_hc", "hc_over_box", "ce_over_box", "pairing")


def theorem_ratio_suite(
    instances: Iterable[Tuple[str, NTreeInstance, Optional[Weight], np.ndarray, Optional[np.ndarray]]],
    trials: int = 200,
    seed: int = 0,
    config: Config = DEFAULT_CONFIG,
) -> Tuple[pd.DataFrame, pd.DataFrame]:
    """
    (label, t, w, μ, ρ) 인스턴스 목록에 대해 정리별 비율을 기록하고 label 별 포락선(최댓값)을 구합니다.

    Returns:
        (records, envelope) DataFrame 쌍
    """
    rows = []
    for k, (label, t, w, mu, rho) in enumerate(instances):
        try:
            row = ratio_chain(t, w, mu, rho, trials=trials, seed=seed + k, config=config)
        except EmbeddingConvergenceError as e:
            logger.warning(f"인스턴스 {k} ({label}): {e}")
            continue
        row.update(label=label, n=t.n, trial=k)
        rows.append(row)
    records = pd.DataFrame(rows)
    if records.empty:
        return records, pd.DataFrame(columns=["label", "ratio", "max", "count"])
    cols = [c for c in THEOREM_RATIOS if c in records.columns]
    env = (
        records.melt(id_vars=["label"], value_vars=cols, var_name="ratio", value_name="value")
        .groupby(["label", "ratio"])["value"]
        .agg(["max", "count"])
        .reset_index()
    )
    for _, r in env.iterrows():
        logger.info(f"{r['label']} {r['ratio']} 포락선 {r['max']:.6g} ({int(r['count'])}건)")
    return records, env
