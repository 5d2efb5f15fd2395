"""
느리지만 정의 그대로인 비교용 구현.
"""
import itertools

import numpy as np
from scipy.optimize import minimize


def naive_hardy(t, f):
    """𝐈f(γ) = Σ_{γ′ ≥ γ} f(γ′) 이중 루프."""
    f = np.asarray(f, dtype=np.float64).reshape(t.shape)
    out = np.zeros(t.shape)
    verts = t.vertices()
    for g in verts:
        out[g] = sum(f[h] for h in verts if t.leq(g, h))
    return out


def naive_adjoint(t, f):
    f = np.asarray(f, dtype=np.float64).reshape(t.shape)
    out = np.zeros(t.shape)
    verts = t.vertices()
    for g in verts:
        out[g] = sum(f[h] for h in verts if t.leq(h, g))
    return out


def naive_down_sets(t):
    """모든 부분집합 중 아래로 닫힌 것 (size ≤ 12 정도에서만)."""
    verts = t.vertices()
    found = []
    for bits in range(1 << t.size):
        members = [verts[i] for i in range(t.size) if bits >> i & 1]
        closed = all(
            (bits >> t.index(b)) & 1
            for a in members
            for b in verts
            if t.leq(b, a)
        )
        if closed:
            mask = np.zeros(t.size, dtype=bool)
            mask[[t.index(a) for a in members]] = True
            found.append(mask.reshape(t.shape))
    return found


def naive_capacity(t, E):
    """SLSQP 로 푼 min Σφ² s.t. 𝐈φ ≥ 1 on E, φ ≥ 0."""
    E = np.asarray(E, dtype=bool).reshape(t.shape)
    rows = [t.ancestor_mask(t.index(a)).ravel().astype(float) for a in zip(*np.nonzero(E))]
    A = np.array(rows)
    x0 = np.ones(t.size)
    res = minimize(
        lambda x: float(x @ x),
        x0,
        jac=lambda x: 2 * x,
        constraints=[{"type": "ineq", "fun": lambda x: A @ x - 1.0, "jac": lambda x: A}],
        bounds=[(0, None)] * t.size,
        method="SLSQP",
        options={"ftol": 1e-12, "maxiter": 500},
    )
    return float(res.fun)


def subsets(items):
    for r in range(1, len(items) + 1):
        yield from itertools.combinations(items, r)
