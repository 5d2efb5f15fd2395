"""
원판 위 해석적 커널과 dyadic 트리 커널 비교의 Monte-Carlo 검증.

- distances / good_lattice_probability: 회전된 dyadic 격자의 좋은 사건
- kernel_domination: 트리 커널 대 |K_s| 의 양방향 비교
- poisson_failure_witness: 2-모수 Poisson 커널에서 비교가 깨지는 쌍
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from mtc.config import DEFAULT_CONFIG, Config
from mtc.domain.poset import NTreeInstance, Tree, build_dyadic_tree
from mtc.utils.numeric import field_leq, wilson_interval
from mtc.utils.seeds import SUITE_CODES, derive_seed

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
GOOD_LATTICE_BOUND = 10.0
SUP_GRID_START = 4
SUP_GRID_CAP = 64
SUP_STABLE_REL = 0.01


class LatticeError(Exception):
    """격자 시뮬레이션 입력 에러"""
    pass


@dataclass(frozen=True)
class LatticeSample:
    theta: float
    generations: int
    z: complex
    zeta: complex

    def __post_init__(self) -> None:
        if not (abs(self.z) < 1 and abs(self.zeta) < 1):
            raise LatticeError(f"점이 단위 원판 밖에 있습니다: {self.z}, {self.zeta}")
        if self.generations < 0:
            raise LatticeError(f"세대 수는 0 이상이어야 합니다: {self.generations}")


# --- 거리 ------------------------------------------------------------------------


def _boundary_arc(z: np.ndarray, zeta: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """u = z/|z|, v = ζ/|ζ| 사이 짧은 호의 (시작각, 길이)."""
    a = np.mod(np.angle(z), TWO_PI)
    b = np.mod(np.angle(zeta), TWO_PI)
    diff = np.mod(b - a, TWO_PI)
    short = diff <= math.pi
    start = np.where(short, a, b)
    length = np.where(short, diff, TWO_PI - diff)
    return start, length


def _distance_many(z: np.ndarray, zeta: np.ndarray, metric: str) -> np.ndarray:
    _, length = _boundary_arc(z, zeta)
    if metric == "chord":
        sep = 2.0 * np.sin(length / 2.0)
    elif metric == "arc":
        sep = length
    else:
        raise LatticeError(f"알 수 없는 거리 종류입니다: {metric}")
    return sep + (1.0 - np.abs(z)) + (1.0 - np.abs(zeta))


def _lattice_distance_many(z: np.ndarray, zeta: np.ndarray, theta: np.ndarray, max_level: int = 60) -> np.ndarray:
    """max(1−|z|, 1−|ζ|) 보다 길고 짧은 경계 호를 포함하는 가장 작은 회전 dyadic 호의 길이."""
    start, length = _boundary_arc(z, zeta)
    rmax = np.maximum(1.0 - np.abs(z), 1.0 - np.abs(zeta))
    x = np.mod(start - theta, TWO_PI)
    out = np.full(z.shape, TWO_PI)
    for k in range(1, max_level + 1):
        L = TWO_PI * 2.0 ** (-k)
        idx = np.floor(x / L)
        valid = (L > rmax) & (x + length <= (idx + 1.0) * L)
        if not valid.any():
            break
        out = np.where(valid, L, out)
    return out


def distances(z: complex, zeta: complex, theta: float = 0.0, metric: str = "chord") -> Tuple[float, float]:
    """
    D(z,ζ) = |u−v| + 1−|z| + 1−|ζ| 와 회전 θ 격자의 D_L(z,ζ).

    Args:
        metric: "chord" (기본) 또는 "arc"

    Returns:
        (D, D_L)
    """
    sample = LatticeSample(theta=float(theta), generations=0, z=complex(z), zeta=complex(zeta))
    zs = np.array([sample.z])
    zetas = np.array([sample.zeta])
    D = float(_distance_many(zs, zetas, metric)[0])
    DL = float(_lattice_distance_many(zs, zetas, np.array([sample.theta]))[0])
    return D, DL


# --- 좋은 격자 확률 ----------------------------------------------------------------


@dataclass
class GoodLatticeReport:
    m: int
    trials: int
    generations: int
    good: int
    probability: float
    ci_low: float
    ci_high: float
    max_ratio_good: float
    min_ratio: float
    violations: int
    metric: str

    def to_dict(self) -> Dict[str, object]:
        return dict(self.__dict__)


def good_lattice_probability(m: int, trials: int, seed: int, metric: str = "chord") -> GoodLatticeReport:
    """
    길이 2π·2^{−m} 인 호 I = [0, |I|) 에 대해 처음 m−4 세대의 분점이 I 에 없을 확률과
    좋은 사건에서의 D_L ≤ 10·D 를 추정합니다.

    (z, ζ) 는 u, v ∈ I 균등, 1−|z|, 1−|ζ| ∈ [0.8|I|, 1.6|I|] 균등으로 뽑습니다.

    Raises:
        LatticeError: m < 1 또는 trials < 1
    """
    if m < 1:
        raise LatticeError(f"m 은 1 이상이어야 합니다: {m}")
    if trials < 1:
        raise LatticeError(f"시행 횟수는 1 이상이어야 합니다: {trials}")
    rng = np.random.default_rng(derive_seed(seed, SUITE_CODES["lattice"], m))
    size = TWO_PI * 2.0 ** (-m)
    generations = max(m - 4, 0)

    theta = rng.uniform(0.0, TWO_PI, trials)
    if generations == 0:
        good = np.ones(trials, dtype=bool)
    else:
        spacing = TWO_PI * 2.0 ** (-generations)
        good = np.mod(theta, spacing) >= size

    u = rng.uniform(0.0, size, trials)
    v = rng.uniform(0.0, size, trials)
    ru = 1.0 - rng.uniform(0.8 * size, 1.6 * size, trials)
    rv = 1.0 - rng.uniform(0.8 * size, 1.6 * size, trials)
    z = ru * np.exp(1j * u)
    zeta = rv * np.exp(1j * v)

    D = _distance_many(z, zeta, metric)
    DL = _lattice_distance_many(z, zeta, theta)
    ratio = DL / D
    bad_good = good & ~field_leq(DL, GOOD_LATTICE_BOUND * D)
    n_good = int(good.sum())
    low, high = wilson_interval(n_good, trials)
    report = GoodLatticeReport(
        m=m,
        trials=trials,
        generations=generations,
        good=n_good,
        probability=n_good / trials,
        ci_low=low,
        ci_high=high,
        max_ratio_good=float(ratio[good].max()) if n_good else 0.0,
        min_ratio=float(ratio.min()),
        violations=int(bad_good.sum()),
        metric=metric,
    )
    if report.violations:
        logger.error(f"좋은 격자 사건에서 D_L > 10·D 가 {report.violations} 건 있습니다 (m={m}).")
    logger.info(f"m={m}: 좋은 격자 확률 {report.probability:.4f} [{low:.4f}, {high:.4f}]")
    return report


# --- Whitney 상자 위의 sup --------------------------------------------------------


def _arc_bounds(depth: np.ndarray, pos: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    L = TWO_PI * np.power(2.0, -depth.astype(np.float64))
    return pos * L, (pos + 1.0) * L


def _arc_gap(depth_a, pos_a, depth_b, pos_b) -> np.ndarray:
    """같은 회전의 두 dyadic 호 사이 각 거리 (겹치면 0)."""
    a0, a1 = _arc_bounds(depth_a, pos_a)
    b0, b1 = _arc_bounds(depth_b, pos_b)
    overlap = (a0 < b1) & (b0 < a1)
    gaps = []
    for x in (a0, a1):
        for y in (b0, b1):
            d = np.mod(np.abs(x - y), TWO_PI)
            gaps.append(np.minimum(d, TWO_PI - d))
    return np.where(overlap, 0.0, np.minimum.reduce(gaps))


def _radius_band(depth: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """1−|z| ∈ (2^{−k−1}, 2^{−k}] 에 대응하는 |z| 의 [하한, 상한)."""
    d = depth.astype(np.float64)
    return 1.0 - np.power(2.0, -d), 1.0 - np.power(2.0, -d - 1.0)


def _box_sup(
    value: Callable[[np.ndarray, np.ndarray], np.ndarray],
    cos_gap: np.ndarray,
    lo: np.ndarray,
    hi: np.ndarray,
) -> np.ndarray:
    """
    x = |z||ζ| ∈ [lo, hi] 격자 위의 sup. 격자를 두 배씩 늘려 1% 안으로 안정되면 멈춥니다.
    """
    grid = SUP_GRID_START
    prev = None
    while True:
        xs = lo[:, None] + (hi - lo)[:, None] * np.linspace(0.0, 1.0, grid)[None, :]
        cur = value(cos_gap[:, None], xs).max(axis=1)
        if prev is not None:
            stable = np.abs(cur - prev) <= SUP_STABLE_REL * np.abs(cur)
            if stable.all() or grid >= SUP_GRID_CAP:
                return cur
        if grid >= SUP_GRID_CAP:
            return cur
        prev = cur
        grid *= 2


def _gap_sq(c: np.ndarray, x: np.ndarray) -> np.ndarray:
    """|1 − zζ̄|² = 1 − 2|z||ζ|cos φ + |z|²|ζ|²"""
    return np.maximum(1.0 - 2.0 * x * c + x * x, 1e-300)


def analytic_kernel(s: float) -> Callable[[np.ndarray, np.ndarray], np.ndarray]:
    """s < 1: |1−zζ̄|^{s−1}, s = 1: 1 + log(2/|1−zζ̄|)."""
    if s >= 1.0:
        return lambda c, x: 1.0 + np.log(2.0 / np.sqrt(_gap_sq(c, x)))
    return lambda c, x: np.power(_gap_sq(c, x), (s - 1.0) / 2.0)


def poisson_kernel(c: np.ndarray, x: np.ndarray) -> np.ndarray:
    """P(z,ζ) = (1 − |z|²|ζ|²)/|1 − zζ̄|²"""
    return (1.0 - x * x) / _gap_sq(c, x)


def tree_side(join_depth: np.ndarray, s: float) -> np.ndarray:
    """Σ_{i=0}^{k} 2^{i(1−s)} (조인 깊이 k 의 조상 사슬 가중치 합)."""
    k = join_depth.astype(np.float64)
    if s >= 1.0:
        return k + 1.0
    q = 2.0 ** (1.0 - s)
    return (np.power(q, k + 1.0) - 1.0) / (q - 1.0)


def box_sup(tree: Tree, a: np.ndarray, b: np.ndarray, value: Callable[[np.ndarray, np.ndarray], np.ndarray]) -> np.ndarray:
    """정점 쌍 (a, b) 의 Whitney 상자 q_a × q_b 위 value 의 sup (좌표 하나)."""
    da, db = tree.depth[a], tree.depth[b]
    pos = tree.position
    c = np.cos(_arc_gap(da, pos[a], db, pos[b]))
    lo_a, hi_a = _radius_band(da)
    lo_b, hi_b = _radius_band(db)
    return _box_sup(value, c, lo_a * lo_b, hi_a * hi_b)


# --- 커널 지배 --------------------------------------------------------------------


@dataclass
class KernelDominationReport:
    d: int
    s: Tuple[float, ...]
    trials: int
    dk_envelope: float
    dk_violations: int
    reverse_probability: float
    reverse_ci: Tuple[float, float]
    records: pd.DataFrame

    def to_dict(self) -> Dict[str, object]:
        return {
            "d": self.d,
            "s": list(self.s),
            "trials": self.trials,
            "dk_envelope": self.dk_envelope,
            "dk_violations": self.dk_violations,
            "reverse_probability": self.reverse_probability,
            "reverse_ci": list(self.reverse_ci),
        }


def _check_s(s: Sequence[float]) -> Tuple[float, ...]:
    s = tuple(float(x) for x in s)
    for j, sj in enumerate(s):
        if not 0.0 < sj <= 1.0:
            raise LatticeError(f"s_{j + 1} = {sj} 는 (0, 1] 범위여야 합니다.")
    return s


def _level_lookup(tree: Tree) -> np.ndarray:
    """(깊이, 위치) → 정점 번호 표 (없는 칸은 −1)."""
    width = int(tree.position.max()) + 1
    table = np.full((tree.max_depth + 1, width), -1, dtype=np.int64)
    table[tree.depth, tree.position] = np.arange(tree.vertex_count)
    return table


def kernel_domination(
    t: NTreeInstance,
    s: Sequence[float],
    trials: int,
    seed: int,
    config: Config = DEFAULT_CONFIG,
) -> KernelDominationReport:
    """
    (i) 무작위 정점 쌍에서 𝐈_{w_s}1(α∧β) ≤ 16^d·sup_{q_α×q_β}|K_s| 의 비율 포락선,
    (ii) 무작위 점 (z, ζ) 와 좌표별 무작위 회전에서 |K_s|(z,ζ) ≤ 10^d·𝐈_{w_s}1(α∧β) 인 확률.

    Raises:
        LatticeError: d ∉ {1,2,3}, s 의 길이 불일치 또는 s ∉ (0, 1], 이진 정규 트리가 아닐 때
    """
    s = _check_s(s)
    d = t.n
    if d not in (1, 2, 3) or len(s) != d:
        raise LatticeError(f"d ∈ {{1,2,3}} 이고 len(s) = d 여야 합니다 (d={d}, s={s}).")
    if not all(tr.is_dyadic() for tr in t.trees):
        raise LatticeError("커널 비교는 이진 정규 트리에서만 정의됩니다.")
    rng = np.random.default_rng(derive_seed(seed, SUITE_CODES["lattice"], 100 + d))

    tree_total = np.ones(trials)
    sup_total = np.ones(trials)
    point_total = np.ones(trials)
    tree_at_points = np.ones(trials)
    for j, (tr, sj) in enumerate(zip(t.trees, s)):
        kern = analytic_kernel(sj)
        a = rng.integers(0, tr.vertex_count, trials)
        b = rng.integers(0, tr.vertex_count, trials)
        join = tr.lca_many(a, b)
        tree_total *= tree_side(tr.depth[join], sj)
        sup_total *= box_sup(tr, a, b, kern)

        # 점 먼저, 그 다음 회전: 각 점을 담는 상자를 찾습니다.
        N = tr.max_depth
        lookup = _level_lookup(tr)
        theta = rng.uniform(0.0, TWO_PI, trials)
        boxes = []
        points = []
        for _ in range(2):
            k = rng.integers(0, N + 1, trials)
            gap = np.power(2.0, -k.astype(np.float64))
            radius = 1.0 - rng.uniform(gap / 2.0, gap)
            angle = rng.uniform(0.0, TWO_PI, trials)
            pos = np.floor(np.mod(angle - theta, TWO_PI) / (TWO_PI * gap)).astype(np.int64)
            pos = np.minimum(pos, (1 << k) - 1)
            boxes.append(lookup[k, pos])
            points.append(radius * np.exp(1j * angle))
        zj, zetaj = points
        c = np.cos(np.angle(zj * np.conj(zetaj)))
        x = np.abs(zj) * np.abs(zetaj)
        point_total *= kern(c, x)
        tree_at_points *= tree_side(tr.depth[tr.lca_many(boxes[0], boxes[1])], sj)

    ratio = tree_total / sup_total
    dk_bound = config.dk_constant ** d
    dk_ok = field_leq(ratio, np.full_like(ratio, dk_bound))
    reverse = point_total <= config.reverse_constant ** d * tree_at_points
    n_rev = int(reverse.sum())
    ci = wilson_interval(n_rev, trials)
    records = pd.DataFrame(
        {"tree": tree_total, "analytic_sup": sup_total, "dk_ratio": ratio, "reverse_event": reverse}
    )
    report = KernelDominationReport(
        d=d,
        s=s,
        trials=trials,
        dk_envelope=float(ratio.max()) if trials else 0.0,
        dk_violations=int((~dk_ok).sum()),
        reverse_probability=n_rev / trials if trials else 0.0,
        reverse_ci=ci,
        records=records,
    )
    if report.dk_violations:
        logger.error(f"트리 커널 지배 위반 {report.dk_violations} 건 (d={d}, s={s})")
    return report


# --- Poisson 실패 -----------------------------------------------------------------


@dataclass
class PoissonWitness:
    depth: int
    max_ratio: float
    alpha: Tuple[int, int]
    beta: Tuple[int, int]
    diagonal_leaf_ratio: float
    pairs: int


def _poisson_ratio_1d(tree: Tree, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    join = tree.lca_many(a, b)
    k = tree.depth[join].astype(np.float64)
    return (np.power(2.0, k + 1.0) - 1.0) / box_sup(tree, a, b, poisson_kernel)


def poisson_failure_witness(depth: int, d: int = 2, chunk: int = 4096, config: Config = DEFAULT_CONFIG) -> PoissonWitness:
    """
    w_j = |α_j|^{−1} 일 때 𝐈_w1(α∧β)/P(α,β) 의 최대 쌍을 전수 탐색합니다.

    두 좌표가 같은 트리이고 양변이 좌표별 곱이므로 최댓값은 한 좌표 최댓값의 d 제곱입니다.

    Raises:
        LatticeError: d ≠ 2 또는 depth ∉ [1, 8]
    """
    if d != 2:
        raise LatticeError(f"Poisson 실패 탐색은 d = 2 에서만 정의됩니다: {d}")
    if not 1 <= depth <= 8:
        raise LatticeError(f"depth 는 1..8 범위여야 합니다: {depth}")
    tree = build_dyadic_tree(depth, 2, config)
    V = tree.vertex_count
    best, best_pair = -1.0, (0, 0)
    flat = np.arange(V * V, dtype=np.int64)
    for start in range(0, flat.size, chunk):
        idx = flat[start:start + chunk]
        a, b = idx // V, idx % V
        r = _poisson_ratio_1d(tree, a, b)
        i = int(np.argmax(r))
        if r[i] > best:
            best, best_pair = float(r[i]), (int(a[i]), int(b[i]))
    leaf = np.flatnonzero(tree.leaves)[:1]
    diagonal = float(_poisson_ratio_1d(tree, leaf, leaf)[0]) ** d
    witness = PoissonWitness(
        depth=depth,
        max_ratio=best ** d,
        alpha=(best_pair[0],) * d,
        beta=(best_pair[1],) * d,
        diagonal_leaf_ratio=diagonal,
        pairs=(V * V) ** d,
    )
    logger.info(f"Poisson 깊이 {depth}: 최대 비율 {witness.max_ratio:.6g}")
    return witness


def poisson_growth(depths: Sequence[int], config: Config = DEFAULT_CONFIG) -> pd.DataFrame:
    """깊이별 최대 비율과 순증가 여부."""
    rows = [poisson_failure_witness(dep, config=config).__dict__ for dep in depths]
    table = pd.DataFrame(rows)
    table["increasing"] = table["max_ratio"].diff().fillna(1.0) > 0
    return table
