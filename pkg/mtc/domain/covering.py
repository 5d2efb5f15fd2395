"""
구간 퍼텐셜, 좋은 퍼텐셜, 그리고 ↑ω 위의 상자 덮개 구성.

↑ω 는 좌표별 조상 사슬의 곱이므로 지역 격자에서는 높이 h_j (0 = ω_j, 루트 방향으로 증가) 로
순서가 좌표별 비교가 됩니다.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Tuple

import numpy as np

from mtc.domain.hardy import Weight, adjoint_hardy, as_field, dense_weight, potential
from mtc.domain.maxprinciple import covering_epsilons
from mtc.domain.poset import NTreeInstance, Tree, Vertex

logger = logging.getLogger(__name__)

Local = Tuple[int, ...]
Coords = FrozenSet[int]


class CoveringError(Exception):
    """구간/덮개 구성 입력 에러"""
    pass


def interval_potential(t: NTreeInstance, w: Optional[Weight], nu, P: Vertex, omega: Vertex) -> float:
    """
    𝐕^ν_P(ω) = Σ_{ω≤Q≤P} w(Q)𝐈*ν(Q).

    Raises:
        CoveringError: ω ≰ P
    """
    if not t.leq(omega, P):
        raise CoveringError(f"ω = {t.coords(omega)} 가 P = {t.coords(P)} 이하가 아닙니다.")
    nu = as_field(t, nu, nonnegative=True)
    f = dense_weight(t, w) * adjoint_hardy(t, nu)
    interval = t.ancestor_mask(omega) & t.descendant_mask(P)
    return float(f[interval].sum())


def local_chains(t: NTreeInstance, omega: Vertex) -> Tuple[np.ndarray, ...]:
    """좌표별 조상 사슬 (ω_j 부터 루트까지)."""
    return tuple(np.array(tr.ancestors(x)) for tr, x in zip(t.trees, t.coords(omega)))


def _local_interval_sums(f_local: np.ndarray) -> np.ndarray:
    """지역 격자에서 V_Q(ω) = Σ_{0 ≤ h ≤ Q} f."""
    out = f_local
    for axis in range(f_local.ndim):
        out = np.cumsum(out, axis=axis)
    return out


def _level_chains(tree: Tree, d: int) -> np.ndarray:
    """깊이 d 정점들의 조상 사슬 표 (행: 정점, 열: 높이 0..d)."""
    chains = np.empty((tree.levels[d].size, d + 1), dtype=np.int64)
    chains[:, 0] = tree.levels[d]
    for h in range(1, d + 1):
        chains[:, h] = tree.parent[chains[:, h - 1]]
    return chains


def good_potential(t: NTreeInstance, w: Optional[Weight], mu, eps_prime: float) -> np.ndarray:
    """
    𝐕^μ_{ε′,good}(ω) = Σ_{P≥ω: 𝐕_P(ω) > ε′} (w𝐈*μ)(P), 모든 ω 에 대해.

    깊이 조합마다 같은 모양의 지역 격자를 한 배열 (정점 축 n 개 + 높이 축 n 개) 로 모아
    높이 축 누적합으로 𝐕_P(ω) 를 한 번에 계산합니다.
    """
    mu = as_field(t, mu, nonnegative=True)
    f = dense_weight(t, w) * adjoint_hardy(t, mu)
    n = t.n
    tables = [[_level_chains(tr, d) for d in range(tr.max_depth + 1)] for tr in t.trees]
    out = np.zeros(t.shape)
    for depths in itertools.product(*(range(len(tab)) for tab in tables)):
        picked = [tables[j][d] for j, d in enumerate(depths)]
        index = []
        for j, chains in enumerate(picked):
            shape = [1] * (2 * n)
            shape[j] = chains.shape[0]
            shape[n + j] = chains.shape[1]
            index.append(chains.reshape(shape))
        f_local = f[tuple(index)]
        sums = f_local
        for axis in range(n, 2 * n):
            sums = np.cumsum(sums, axis=axis)
        good = np.where(sums > eps_prime, f_local, 0.0).sum(axis=tuple(range(n, 2 * n)))
        out[np.ix_(*(chains[:, 0] for chains in picked))] = good
    return out


# --- 덮개 구성 --------------------------------------------------------------------


@dataclass
class CoveringTrace:
    omega: Tuple[int, ...]
    eps: float
    eps_prime: float
    eps_seq: Tuple[float, ...]
    chains: Tuple[np.ndarray, ...]
    U: np.ndarray
    W: Tuple[np.ndarray, ...]
    families: Dict[Tuple[Local, Tuple[int, ...]], Dict[str, List[Local]]]
    branch: str
    cover_required: bool
    cover_verified: bool
    first_violation: Optional[Tuple[int, ...]] = None
    augmentations: int = 0
    good_value: float = 0.0
    good_bound_holds: Optional[bool] = None
    size_product: float = 0.0
    notes: List[str] = field(default_factory=list)

    @property
    def verified(self) -> bool:
        """필요한 분기의 결론이 확인되었는지 여부."""
        if self.cover_required:
            return self.cover_verified
        return bool(self.good_bound_holds)

    def to_global(self, q: Local) -> Tuple[int, ...]:
        return tuple(int(chain[h]) for chain, h in zip(self.chains, q))

    def to_dict(self) -> Dict[str, object]:
        top = self.families.get((tuple([0] * len(self.chains)), tuple(range(1, len(self.chains) + 1))), {})
        return {
            "omega": list(self.omega),
            "eps": self.eps,
            "eps_prime": self.eps_prime,
            "eps_seq": list(self.eps_seq),
            "branch": self.branch,
            "cover_required": self.cover_required,
            "cover_verified": self.cover_verified,
            "first_violation": None if self.first_violation is None else list(self.first_violation),
            "augmentations": self.augmentations,
            "good_value": self.good_value,
            "good_bound_holds": self.good_bound_holds,
            "size_product": self.size_product,
            "U_size": int(self.U.sum()),
            "W_sizes": [int(m.sum()) for m in self.W],
            "R_top": [list(self.to_global(q)) for q in top.get("R", [])],
        }


class _LocalGrid:
    """↑ω 지역 격자 위의 집합 연산."""

    def __init__(self, shape: Tuple[int, ...]):
        self.shape = shape
        self.n = len(shape)
        self.heights = np.indices(shape)

    def up_J(self, p: Local, J: Coords) -> np.ndarray:
        mask = np.ones(self.shape, dtype=bool)
        for j in range(self.n):
            if j + 1 in J:
                mask &= self.heights[j] >= p[j]
            else:
                mask &= self.heights[j] == p[j]
        return mask

    def up(self, p: Local) -> np.ndarray:
        return self.up_J(p, frozenset(range(1, self.n + 1)))

    def down(self, q: Local) -> np.ndarray:
        mask = np.ones(self.shape, dtype=bool)
        for j in range(self.n):
            mask &= self.heights[j] <= q[j]
        return mask

    def maximal(self, mask: np.ndarray) -> List[Local]:
        """C 순서로 나열한 극대 원소."""
        out = []
        for flat in np.flatnonzero(mask.ravel()):
            q = tuple(int(c) for c in np.unravel_index(int(flat), self.shape))
            if int((mask & self.up(q)).sum()) == 1:
                out.append(q)
        return out


def covering_construction(
    t: NTreeInstance,
    w: Optional[Weight],
    mu,
    omega: Vertex,
    eps: float = 0.25,
    kappa: Optional[float] = None,
) -> CoveringTrace:
    """
    ω 에서 𝒰, 𝒲_j, 𝒬_J/ℛ_J 를 구성하고 상자 덮개 포함 관계를 집합 포함으로 확인합니다.

    𝒰 ⊄ 𝒲_{n−1} 이면 덮개 대신 𝐕_good(ω) ≥ ε_{n−1} 을 확인합니다.
    덮개가 필요한 분기에서 탐욕 선택이 부족하면 덮이지 않은 극대 원소를 ℛ_J(p) 에 추가하고
    augmentations 로 기록합니다.

    Raises:
        CoveringError: n < 2
    """
    if t.n < 2:
        raise CoveringError(f"덮개 구성은 n ≥ 2 에서만 정의됩니다 (n={t.n}).")
    mu = as_field(t, mu, nonnegative=True)
    n = t.n
    eps_seq, eps_prime = covering_epsilons(n, eps, kappa)
    chains = local_chains(t, omega)
    grid = _LocalGrid(tuple(c.size for c in chains))

    f = dense_weight(t, w) * adjoint_hardy(t, mu)
    f_local = f[np.ix_(*chains)]
    V_local = potential(t, w, mu)[np.ix_(*chains)]
    U = _local_interval_sums(f_local) > eps_prime
    W: Dict[int, np.ndarray] = {j: V_local <= eps_seq[j - 1] for j in range(1, n)}
    W[n] = U

    top: Local = tuple([0] * n)
    full: Coords = frozenset(range(1, n + 1))
    extras: Dict[Tuple[Local, Coords], List[Local]] = {}

    def forbidden(J: Coords) -> np.ndarray:
        return W[n - len(J) + 1]

    def select(p: Local, J: Coords) -> List[Local]:
        P = grid.up_J(p, J) & ~forbidden(J)
        if len(J) == 1:
            return grid.maximal(P)
        after = W[n - len(J) + 2]
        chosen: List[Local] = []
        taken = np.zeros(grid.shape, dtype=bool)
        for q in grid.maximal(P):
            S = grid.up_J(q, J) & ~after
            if not (S & taken).any():
                chosen.append(q)
                taken |= S
        return chosen

    def build() -> Dict[Tuple[Local, Coords], Dict[str, List[Local]]]:
        memo: Dict[Tuple[Local, Coords], Dict[str, List[Local]]] = {}

        def R(p: Local, J: Coords) -> List[Local]:
            if not J:
                return [p]
            key = (p, J)
            if key in memo:
                return memo[key]["R"]
            Q = select(p, J)
            out: List[Local] = []
            for sub in itertools.combinations(sorted(J), len(J) - 1):
                for q in Q:
                    out.extend(R(q, frozenset(sub)))
            out.extend(extras.get(key, []))
            out = sorted(set(out))
            memo[key] = {"Q": Q, "R": out}
            return out

        R(top, full)
        return memo

    branch = "cover" if not (U & ~W[n - 1]).any() else "good-potential"
    required = branch == "cover"
    augmentations = 0
    first_violation = None
    while True:
        memo = build()
        failure = None
        for (p, J), fam in sorted(memo.items(), key=lambda kv: (len(kv[0][1]), kv[0][0], sorted(kv[0][1]))):
            covered = np.zeros(grid.shape, dtype=bool)
            for q in fam["R"]:
                covered |= grid.down(q)
            missing = grid.up_J(p, J) & ~forbidden(J) & ~covered
            if missing.any():
                failure = (p, J, grid.maximal(missing)[0])
                break
        if failure is None or not required or augmentations >= grid.heights[0].size * (2 ** n):
            break
        p, J, q = failure
        if first_violation is None:
            first_violation = tuple(int(chain[h]) for chain, h in zip(chains, q))
            logger.warning(f"탐욕 극대 선택으로 덮이지 않는 원소 {first_violation}: 보강합니다.")
        extras.setdefault((p, J), []).append(q)
        augmentations += 1

    cover_ok = failure is None
    top_R = memo[(top, full)]["R"]
    good_value = float(f_local[U].sum())
    good_holds = None if required else good_value >= eps_seq[-1] * (1 - 1e-9)
    if required and not cover_ok:
        logger.error(f"ω = {t.coords(omega)} 에서 상자 덮개 포함 관계를 닫지 못했습니다.")
    if good_holds is False:
        logger.error(f"ω = {t.coords(omega)} 에서 𝐕_good < ε_(n−1)")
    families = {(p, tuple(sorted(J))): fam for (p, J), fam in memo.items()}
    return CoveringTrace(
        omega=t.coords(omega),
        eps=float(eps),
        eps_prime=float(eps_prime),
        eps_seq=eps_seq,
        chains=chains,
        U=U,
        W=tuple(W[j] for j in range(1, n)),
        families=families,
        branch=branch,
        cover_required=required,
        cover_verified=cover_ok,
        first_violation=first_violation if required else (
            None if cover_ok else tuple(int(chain[h]) for chain, h in zip(chains, failure[2]))
        ),
        augmentations=augmentations,
        good_value=good_value,
        good_bound_holds=good_holds,
        size_product=len(top_R) * float(np.prod(eps_seq)),
    )
