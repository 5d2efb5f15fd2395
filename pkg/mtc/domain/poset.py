from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from mtc.config import DEFAULT_CONFIG, Config, check_budget

logger = logging.getLogger(__name__)

Vertex = Union[int, Sequence[int]]


class PosetError(Exception):
    """트리/곱 순서 구조 에러"""
    pass


@dataclass(frozen=True, eq=False)
class Tree:
    """
    유한 트리. 순서 규약은 "루트에 가까울수록 크다" 입니다.

    parent[v] == -1 이면 v 는 최대 원소(루트)입니다. 여러 루트(숲)도 허용합니다.
    """

    parent: np.ndarray
    depth: np.ndarray

    @classmethod
    def from_parents(cls, parents: Sequence[Optional[int]]) -> "Tree":
        """
        부모 목록으로 트리를 생성합니다.

        Args:
            parents: 정점별 부모 인덱스 (루트는 None 또는 -1)

        Returns:
            검증된 Tree

        Raises:
            PosetError: 인덱스 범위 오류 또는 순환이 있을 때
        """
        count = len(parents)
        if count == 0:
            raise PosetError("트리는 최소 한 개의 정점이 필요합니다.")
        parent = np.array([-1 if p is None else int(p) for p in parents], dtype=np.int64)
        if np.any((parent < -1) | (parent >= count)):
            raise PosetError(f"부모 인덱스가 범위를 벗어났습니다: {parents}")

        depth = np.full(count, -1, dtype=np.int64)
        for start in range(count):
            path = []
            v = start
            while v != -1 and depth[v] < 0:
                if v in path:
                    raise PosetError(f"부모 관계에 순환이 있습니다 (정점 {v}).")
                path.append(v)
                v = int(parent[v])
            base = -1 if v == -1 else int(depth[v])
            for u in reversed(path):
                base += 1
                depth[u] = base

        parent.setflags(write=False)
        depth.setflags(write=False)
        return cls(parent=parent, depth=depth)

    @property
    def vertex_count(self) -> int:
        return int(self.parent.shape[0])

    @property
    def max_depth(self) -> int:
        return int(self.depth.max())

    def parent_of(self, v: int) -> Optional[int]:
        p = int(self.parent[v])
        return None if p < 0 else p

    def parents_list(self) -> List[Optional[int]]:
        return [self.parent_of(v) for v in range(self.vertex_count)]

    @cached_property
    def levels(self) -> Tuple[np.ndarray, ...]:
        """깊이별 정점 배열 (정점 번호 오름차순)."""
        return tuple(np.flatnonzero(self.depth == d) for d in range(self.max_depth + 1))

    @cached_property
    def children(self) -> Tuple[Tuple[int, ...], ...]:
        kids: List[List[int]] = [[] for _ in range(self.vertex_count)]
        for v in range(self.vertex_count):
            p = int(self.parent[v])
            if p >= 0:
                kids[p].append(v)
        return tuple(tuple(k) for k in kids)

    @cached_property
    def non_roots(self) -> np.ndarray:
        return np.flatnonzero(self.parent >= 0)

    @cached_property
    def leaves(self) -> np.ndarray:
        counts = np.bincount(self.parent[self.parent >= 0], minlength=self.vertex_count)
        return counts == 0

    @cached_property
    def regular_arity(self) -> Optional[int]:
        """완전 정규 트리(단일 루트, 모든 잎이 같은 깊이)이면 분기 수, 아니면 None."""
        if int((self.parent < 0).sum()) != 1:
            return None
        if self.vertex_count == 1:
            return 1
        counts = {len(self.children[v]) for v in range(self.vertex_count) if not self.leaves[v]}
        if len(counts) != 1:
            return None
        if not np.all(self.depth[self.leaves] == self.max_depth):
            return None
        return counts.pop()

    def is_dyadic(self) -> bool:
        return self.regular_arity == 2 or self.vertex_count == 1

    @cached_property
    def position(self) -> np.ndarray:
        """
        같은 깊이 안에서의 왼쪽부터의 위치.

        정규 트리이면 position(v) = arity·position(parent) + 형제 순위 이므로
        깊이 k 정점은 호 [p, p+1)·2π·arity^{-k} 에 대응합니다.
        """
        pos = np.zeros(self.vertex_count, dtype=np.int64)
        arity = self.regular_arity
        if arity is None:
            for level in self.levels:
                pos[level] = np.arange(level.size)
            return pos
        for level in self.levels:
            for v in level:
                p = int(self.parent[v])
                if p >= 0:
                    pos[v] = arity * pos[p] + self.children[p].index(int(v))
        return pos

    def ancestors(self, v: int) -> List[int]:
        """v 부터 루트까지의 조상 사슬 (v 포함, 아래에서 위로)."""
        chain = [int(v)]
        while self.parent[chain[-1]] >= 0:
            chain.append(int(self.parent[chain[-1]]))
        return chain

    def leq(self, u: int, v: int) -> bool:
        """u ≤ v, 즉 v 가 u 의 조상이거나 u 자신인지 여부."""
        du, dv = int(self.depth[u]), int(self.depth[v])
        if du < dv:
            return False
        while du > dv:
            u = int(self.parent[u])
            du -= 1
        return u == v

    def lca_many(self, us: np.ndarray, vs: np.ndarray) -> np.ndarray:
        """
        정점 쌍들의 최소 공통 조상을 벡터화하여 계산합니다.

        Raises:
            PosetError: 서로 다른 연결 성분의 정점 쌍이 있을 때
        """
        a = np.array(us, dtype=np.int64, copy=True)
        b = np.array(vs, dtype=np.int64, copy=True)
        da = self.depth[a].copy()
        db = self.depth[b].copy()
        while True:
            deeper_a = da > db
            deeper_b = db > da
            if not (deeper_a.any() or deeper_b.any()):
                break
            a[deeper_a] = self.parent[a[deeper_a]]
            da[deeper_a] -= 1
            b[deeper_b] = self.parent[b[deeper_b]]
            db[deeper_b] -= 1
        differ = a != b
        while differ.any():
            if np.any(self.parent[a[differ]] < 0):
                raise PosetError("서로 다른 연결 성분의 정점은 join 이 없습니다.")
            a[differ] = self.parent[a[differ]]
            b[differ] = self.parent[b[differ]]
            differ = a != b
        return a

    def lca(self, u: int, v: int) -> int:
        return int(self.lca_many(np.array([u]), np.array([v]))[0])

    def ancestor_indicator(self, v: int) -> np.ndarray:
        out = np.zeros(self.vertex_count, dtype=bool)
        out[self.ancestors(v)] = True
        return out

    def descendant_indicator(self, v: int) -> np.ndarray:
        out = np.zeros(self.vertex_count, dtype=bool)
        out[v] = True
        for level in self.levels[int(self.depth[v]) + 1:]:
            out[level] = out[self.parent[level]]
        return out


def build_dyadic_tree(depth: int, arity: int = 2, config: Config = DEFAULT_CONFIG) -> Tree:
    """
    완전 arity-정규 트리를 BFS 번호로 생성합니다.

    깊이 ℓ, 위치 p 의 정점 번호는 offset(ℓ) + p 이고 offset(ℓ) = Σ_{i<ℓ} arity^i 입니다.

    Raises:
        PosetError: depth/arity 전제 조건 위반
        BudgetExceededError: arity^depth 가 예산을 넘을 때
    """
    if depth < 0 or depth > config.max_depth:
        raise PosetError(f"depth 는 0..{config.max_depth} 범위여야 합니다: {depth}")
    if arity not in (1, 2, 3):
        raise PosetError(f"arity 는 1, 2, 3 중 하나여야 합니다: {arity}")
    check_budget(arity ** depth, config, what="트리 잎 수")

    parents: List[Optional[int]] = [None]
    offset_prev = 0
    offset = 1
    for level in range(1, depth + 1):
        width = arity ** level
        parents.extend(offset_prev + p // arity for p in range(width))
        offset_prev, offset = offset, offset + width
    return Tree.from_parents(parents)


@dataclass(frozen=True, eq=False)
class NTreeInstance:
    """n 개 트리의 곱 (n ∈ 1..4) 과 곱 순서."""

    trees: Tuple[Tree, ...]

    @classmethod
    def of(cls, trees: Sequence[Tree], config: Config = DEFAULT_CONFIG) -> "NTreeInstance":
        if not 1 <= len(trees) <= 4:
            raise PosetError(f"곱의 차수 n 은 1..4 여야 합니다: {len(trees)}")
        inst = cls(trees=tuple(trees))
        check_budget(inst.size, config)
        return inst

    @classmethod
    def dyadic(cls, n: int, depth: int, arity: int = 2, config: Config = DEFAULT_CONFIG) -> "NTreeInstance":
        """같은 깊이/분기의 정규 트리 n 개의 곱."""
        tree = build_dyadic_tree(depth, arity, config)
        return cls.of([tree] * n, config)

    @property
    def n(self) -> int:
        return len(self.trees)

    @property
    def shape(self) -> Tuple[int, ...]:
        return tuple(tr.vertex_count for tr in self.trees)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    def coords(self, alpha: Vertex) -> Tuple[int, ...]:
        """선형 인덱스 또는 좌표 튜플을 좌표 튜플로 변환합니다."""
        if isinstance(alpha, (int, np.integer)):
            if not 0 <= int(alpha) < self.size:
                raise PosetError(f"정점 인덱스가 범위를 벗어났습니다: {alpha}")
            return tuple(int(c) for c in np.unravel_index(int(alpha), self.shape))
        coords = tuple(int(c) for c in alpha)
        if len(coords) != self.n or any(not 0 <= c < m for c, m in zip(coords, self.shape)):
            raise PosetError(f"잘못된 곱 정점입니다: {alpha}")
        return coords

    def index(self, alpha: Vertex) -> int:
        return int(np.ravel_multi_index(self.coords(alpha), self.shape))

    def leq(self, alpha: Vertex, beta: Vertex) -> bool:
        a, b = self.coords(alpha), self.coords(beta)
        return all(tr.leq(x, y) for tr, x, y in zip(self.trees, a, b))

    def join(self, alpha: Vertex, beta: Vertex) -> Tuple[int, ...]:
        a, b = self.coords(alpha), self.coords(beta)
        return tuple(tr.lca(x, y) for tr, x, y in zip(self.trees, a, b))

    def outer(self, factors: Sequence[np.ndarray], combine=np.multiply) -> np.ndarray:
        """좌표별 1차원 배열의 외적을 곱 트리 모양으로 만듭니다."""
        out = np.asarray(factors[0])
        for f in factors[1:]:
            out = combine.outer(out, np.asarray(f))
        return out.reshape(self.shape)

    def ancestor_mask(self, alpha: Vertex) -> np.ndarray:
        """{γ : γ ≥ α}"""
        a = self.coords(alpha)
        return self.outer([tr.ancestor_indicator(x) for tr, x in zip(self.trees, a)], np.logical_and)

    def descendant_mask(self, alpha: Vertex) -> np.ndarray:
        """{γ : γ ≤ α}"""
        a = self.coords(alpha)
        return self.outer([tr.descendant_indicator(x) for tr, x in zip(self.trees, a)], np.logical_and)

    @cached_property
    def leaf_mask(self) -> np.ndarray:
        return self.outer([tr.leaves for tr in self.trees], np.logical_and)

    @cached_property
    def total_depth(self) -> np.ndarray:
        return self.outer([tr.depth for tr in self.trees], np.add)

    def depth_grid(self, j: int) -> np.ndarray:
        """좌표 j 의 깊이를 곱 트리 모양으로 브로드캐스트합니다."""
        shape = [1] * self.n
        shape[j] = self.shape[j]
        return np.broadcast_to(self.trees[j].depth.reshape(shape), self.shape)

    @cached_property
    def lower_covers(self) -> Tuple[Tuple[int, ...], ...]:
        """선형 인덱스별 아래 덮개 (한 좌표만 자식으로 바꾼 정점)."""
        covers = []
        for idx in range(self.size):
            a = np.unravel_index(idx, self.shape)
            lc = []
            for j, tr in enumerate(self.trees):
                for c in tr.children[int(a[j])]:
                    b = list(a)
                    b[j] = c
                    lc.append(int(np.ravel_multi_index(tuple(b), self.shape)))
            covers.append(tuple(lc))
        return tuple(covers)

    def vertices(self) -> List[Tuple[int, ...]]:
        return [self.coords(i) for i in range(self.size)]


# --- 좌표별 스윕 커널 -------------------------------------------------------
# 모든 커널은 배열의 마지막 n 축을 곱 트리로 보고, 앞쪽 축은 배치로 취급합니다.


def root_sweep(arr: np.ndarray, tree: Tree, axis: int) -> np.ndarray:
    """루트에서 잎 방향 누적: out(v) = Σ_{u ≥ v} arr(u) (해당 축)."""
    out = np.array(arr, copy=True)
    a = np.moveaxis(out, axis, 0)
    for level in tree.levels[1:]:
        a[level] += a[tree.parent[level]]
    return out


def leaf_sweep(arr: np.ndarray, tree: Tree, axis: int) -> np.ndarray:
    """잎에서 루트 방향 누적: out(v) = Σ_{u ≤ v} arr(u) (해당 축)."""
    out = np.array(arr, copy=True)
    a = np.moveaxis(out, axis, 0)
    for level in reversed(tree.levels[1:]):
        np.add.at(a, tree.parent[level], a[level])
    return out


def child_sum(arr: np.ndarray, tree: Tree, axis: int) -> np.ndarray:
    """자식 값의 합 (해당 축). 잎에서는 0."""
    out = np.zeros_like(arr)
    a = np.moveaxis(arr, axis, 0)
    o = np.moveaxis(out, axis, 0)
    kids = tree.non_roots
    np.add.at(o, tree.parent[kids], a[kids])
    return out


def shift_from_parent(arr: np.ndarray, tree: Tree, axis: int, fill=False) -> np.ndarray:
    """out(v) = arr(parent(v)), 루트에서는 fill."""
    out = np.full_like(arr, fill)
    a = np.moveaxis(arr, axis, 0)
    o = np.moveaxis(out, axis, 0)
    kids = tree.non_roots
    o[kids] = a[tree.parent[kids]]
    return out


def any_child(mask: np.ndarray, tree: Tree, axis: int) -> np.ndarray:
    """out(v) = 자식 중 하나라도 참인지."""
    out = np.zeros(mask.shape, dtype=bool)
    a = np.moveaxis(mask, axis, 0)
    o = np.moveaxis(out, axis, 0)
    kids = tree.non_roots
    np.logical_or.at(o, tree.parent[kids], a[kids])
    return out


# --- 부분집합 --------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class VertexSet:
    """곱 트리 정점의 부분집합 (곱 트리 모양의 불리언 마스크)."""

    members: np.ndarray

    def __post_init__(self) -> None:
        mask = np.array(self.members, dtype=bool, copy=True)
        mask.setflags(write=False)
        object.__setattr__(self, "members", mask)

    @property
    def count(self) -> int:
        return int(self.members.sum())

    def is_empty(self) -> bool:
        return not self.members.any()

    def indices(self) -> np.ndarray:
        return np.flatnonzero(self.members.ravel())

    def coords(self) -> List[Tuple[int, ...]]:
        return [tuple(int(c) for c in np.unravel_index(i, self.members.shape)) for i in self.indices()]

    def issubset(self, other: "VertexSet") -> bool:
        return bool(np.all(~self.members | other.members))

    def union(self, other: "VertexSet") -> "VertexSet":
        return VertexSet(self.members | other.members)


@dataclass(frozen=True, eq=False)
class DownSet(VertexSet):
    """아래로 닫힌 부분집합."""

    @classmethod
    def checked(cls, t: NTreeInstance, mask: np.ndarray) -> "DownSet":
        mask = np.asarray(mask, dtype=bool).reshape(t.shape)
        if not is_down_set(t, mask):
            raise PosetError("아래로 닫혀 있지 않은 집합입니다.")
        return cls(mask)


def down_closure(t: NTreeInstance, mask: np.ndarray) -> np.ndarray:
    """{β : 어떤 α ∈ mask 에 대해 β ≤ α}: 조상 방향 누적이 양수인 점."""
    out = np.asarray(mask, dtype=np.int64).reshape(t.shape)
    for j, tr in enumerate(t.trees):
        out = root_sweep(out, tr, j)
    return out > 0


def up_closure(t: NTreeInstance, mask: np.ndarray) -> np.ndarray:
    """{β : 어떤 α ∈ mask 에 대해 β ≥ α}"""
    out = np.asarray(mask, dtype=np.int64).reshape(t.shape)
    for j, tr in enumerate(t.trees):
        out = leaf_sweep(out, tr, j)
    return out > 0


def is_down_set(t: NTreeInstance, mask: np.ndarray) -> bool:
    mask = np.asarray(mask, dtype=bool).reshape(t.shape)
    return bool(np.array_equal(down_closure(t, mask), mask))


def is_up_set(t: NTreeInstance, mask: np.ndarray) -> bool:
    mask = np.asarray(mask, dtype=bool).reshape(t.shape)
    return bool(np.array_equal(up_closure(t, mask), mask))


def maximal_elements(t: NTreeInstance, mask: np.ndarray) -> np.ndarray:
    """mask 안에서 더 큰 원소가 없는 점들."""
    mask = np.asarray(mask, dtype=bool).reshape(t.shape)
    closed = down_closure(t, mask)
    dominated = np.zeros(t.shape, dtype=bool)
    for j, tr in enumerate(t.trees):
        dominated |= shift_from_parent(closed, tr, j)
    return mask & ~dominated


def minimal_elements(t: NTreeInstance, mask: np.ndarray) -> np.ndarray:
    mask = np.asarray(mask, dtype=bool).reshape(t.shape)
    closed = up_closure(t, mask)
    dominating = np.zeros(t.shape, dtype=bool)
    for j, tr in enumerate(t.trees):
        dominating |= any_child(closed, tr, j)
    return mask & ~dominating


def down_set_matrix(t: NTreeInstance, config: Config = DEFAULT_CONFIG) -> np.ndarray:
    """
    모든 아래집합을 (개수 × size) 불리언 행렬로 열거합니다.

    총 깊이가 깊은 정점부터 처리하며, 정점 v 는 아래 덮개가 모두 포함된
    마스크에만 추가됩니다. 각 아래집합은 정확히 한 번 생성됩니다.

    Raises:
        PosetError: 곱 트리 크기가 exact_downset_cap 을 넘을 때
    """
    if t.size > config.exact_downset_cap:
        raise PosetError(
            f"아래집합 열거는 크기 {config.exact_downset_cap} 이하에서만 가능합니다 (현재 {t.size}). 샘플링을 사용하세요."
        )
    order = np.argsort(-t.total_depth.ravel(), kind="stable")
    covers = t.lower_covers
    masks = [0]
    for v in order:
        v = int(v)
        need = 0
        for c in covers[v]:
            need |= 1 << c
        masks.extend([m | (1 << v) for m in masks if m & need == need])
    bits = np.array(masks, dtype=np.int64)
    matrix = ((bits[:, None] >> np.arange(t.size, dtype=np.int64)[None, :]) & 1).astype(bool)
    logger.debug(f"아래집합 {len(masks)} 개 열거 (size={t.size})")
    return matrix


def enumerate_down_sets(t: NTreeInstance, config: Config = DEFAULT_CONFIG) -> List[DownSet]:
    """모든 아래집합 (빈 집합과 전체 집합 포함)."""
    return [DownSet(row.reshape(t.shape)) for row in down_set_matrix(t, config)]


def random_down_set(t: NTreeInstance, rng_seed: Union[int, np.random.Generator]) -> DownSet:
    """
    무작위 반사슬의 아래 닫힘으로 아래집합을 만듭니다 (균등 분포 아님).

    총 깊이 문턱을 먼저 뽑고 그 이상 깊이의 정점 중 무작위 개수를 고른 뒤,
    극대 원소(반사슬)의 아래 닫힘을 취합니다.
    """
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    depth = t.total_depth.ravel()
    threshold = int(rng.integers(0, int(depth.max()) + 1))
    candidates = np.flatnonzero(depth >= threshold)
    k = int(rng.integers(0, candidates.size + 1))
    chosen = rng.choice(candidates, size=k, replace=False) if k else np.array([], dtype=np.int64)
    mask = np.zeros(t.size, dtype=bool)
    mask[chosen] = True
    antichain = maximal_elements(t, mask.reshape(t.shape))
    return DownSet(down_closure(t, antichain))
