"""
실험 스위트 실행기.

각 스위트는 해당 모듈의 성질 집합을 시행별 시드로 실행하고 ExperimentReport 를 만듭니다.
시행 k 의 시드는 derive_seed(master, suite_code, k) 이므로 결과는 실행 순서와 무관합니다.
증명된 명제의 위반만 위반 목록에 들어가며, 추측 스위트(search)는 보고만 합니다.
"""
from __future__ import annotations

import logging
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from mtc.config import DEFAULT_CONFIG, BudgetExceededError, Config
from mtc.domain.capacity import (
    CapacityError,
    capacity,
    capacity_bound_experiment,
    capacity_ladder_bound,
    fit_decay_slope,
    normalize_measure,
)
from mtc.domain.constants import ConstantsError, EmbeddingConvergenceError, ordering_report
from mtc.domain.covering import CoveringError, covering_construction
from mtc.domain.hardy import FieldError, TensorWeight, hardy, potential, weight_from_s
from mtc.domain.identities import (
    HypothesisError,
    cor1_slack,
    cut_bound_ratio,
    duality_gap,
    i2_positive_slack,
    lemma1_gap,
    max_principle_slack,
    partial_summation_gap,
    split_slack,
    supadditive_l1linf_slack,
    weighted_estimate_ratio,
)
from mtc.domain.lattice import LatticeError, good_lattice_probability, kernel_domination, poisson_growth
from mtc.domain.majorization import (
    conjecture_search_bitree_pair,
    cut_failure_search,
    energy_lemma_checks,
    growth_by_depth,
    majorant_1tree,
    majorant_bitree,
    majorant_coincident,
    majorant_tritree,
    obstruction_4tree,
    obstruction_4tree_exhaustive,
    superadditive_pair,
)
from mtc.domain.maxprinciple import (
    balance,
    fit_partialv_exponent,
    large_energy_downset,
    main_estimate_check,
    partialV_check,
    partialv_records,
    surrogate_check,
    surrogate_parameters,
    theorem_ratio_suite,
)
from mtc.domain.poset import NTreeInstance, PosetError, Tree
from mtc.harness.report import ExperimentReport
from mtc.io.instances import instance_to_dict
from mtc.transform.generate import (
    Instance,
    canonical_instance,
    make_weight,
    random_field,
    random_leaf_measure,
    random_measure,
    random_tree_instance,
    superadditive_field,
)
from mtc.utils.numeric import close, leq
from mtc.utils.seeds import SUITE_CODES, derive_seed, trial_rng

logger = logging.getLogger(__name__)

SUITES = tuple(SUITE_CODES)
CONJECTURE_SUITES = ("search",)

# 시행별로 잡아서 기록하고 스윕을 계속하는 에러
TRIAL_ERRORS = (
    BudgetExceededError,
    EmbeddingConvergenceError,
    ConstantsError,
    CapacityError,
    HypothesisError,
    CoveringError,
    LatticeError,
    FieldError,
    PosetError,
)

# 좌표 트리 깊이 상한 (n 별)
DEPTH_LIMITS = {1: 5, 2: 3, 3: 2, 4: 1}

GOOD_LATTICE_FLOOR = 7.0 / 8.0 - 0.02
LADDER_MIN_LAMBDA = 4.0


class SuiteError(Exception):
    """스위트 이름/설정 에러"""
    pass


def _depth(rng: np.random.Generator, n: int, max_depth: Optional[int], cap: Optional[int] = None) -> int:
    hi = DEPTH_LIMITS[n] if cap is None else min(cap, DEPTH_LIMITS[n])
    if max_depth is not None:
        hi = max(1, min(hi, max_depth))
    return int(rng.integers(1, hi + 1))


def _witness(
    seed: int,
    suite: str,
    k: int,
    t: Optional[NTreeInstance] = None,
    w: Optional[TensorWeight] = None,
    mu: Optional[np.ndarray] = None,
    **extra: Any,
) -> Dict[str, Any]:
    """재실행 가능한 증인: 유도 시드와 (있으면) 직렬화된 인스턴스."""
    out: Dict[str, Any] = {
        "suite": suite,
        "master_seed": int(seed),
        "trial": int(k),
    }
    if k >= 0:
        out["trial_seed"] = derive_seed(seed, SUITE_CODES[suite], k)
    if t is not None:
        weight = w if w is not None else TensorWeight.uniform(t)
        mass = np.zeros(t.shape) if mu is None else mu
        out["instance"] = instance_to_dict(Instance(t=t, weight=weight, mu=mass, meta={"suite": suite, "trial": k}))
    out.update(extra)
    return out


# --- identities ---------------------------------------------------------------


def _suite_identities(report: ExperimentReport, trials: int, seed: int, max_depth: Optional[int], config: Config) -> None:
    code = SUITE_CODES["identities"]
    rows = []
    for k in range(trials):
        rng = trial_rng(seed, code, k)
        n = 1 + k % 3
        try:
            t = random_tree_instance(n, _depth(rng, n, max_depth), rng, config)
        except TRIAL_ERRORS as e:
            report.add_failure(k, e)
            continue
        f = random_field(t, rng, signed=True)
        g = random_field(t, rng, signed=True)
        j = int(rng.integers(1, n + 1))
        gaps = {
            "partial_summation": partial_summation_gap(t, f, g, j),
            "lemma1": lemma1_gap(t, f, g, j),
            "duality": duality_gap(t, f, g),
        }
        for name, gap in gaps.items():
            report.record_envelope(f"{name}_gap", gap)
            if gap > config.identity_tol:
                report.add_violation(name, k, f"상대 차이 {gap:.3e} > {config.identity_tol:g}", _witness(seed, "identities", k, t, j=j))
        rows.append({"trial": k, "n": n, "size": t.size, "j": j, **{f"{a}_gap": b for a, b in gaps.items()}})
    report.add_table("records", rows)


# --- inequalities -------------------------------------------------------------


def _suite_inequalities(report: ExperimentReport, trials: int, seed: int, max_depth: Optional[int], config: Config) -> None:
    code = SUITE_CODES["inequalities"]
    rows = []
    for k in range(trials):
        rng = trial_rng(seed, code, k)
        n = 1 + k % 3
        try:
            t = random_tree_instance(n, _depth(rng, n, max_depth), rng, config)
            f = random_field(t, rng, density=float(rng.uniform(0.3, 1.0)))
            g = random_field(t, rng, density=float(rng.uniform(0.3, 1.0)))
            checks = [split_slack(t, f, g), cor1_slack(t, f, g, int(rng.integers(1, n + 1)))]
            row: Dict[str, Any] = {"trial": k, "n": n, "size": t.size}
            if n == 1:
                w = make_weight(t, "tensor-random", rng)
                mu = random_measure(t, rng)
                delta = float(rng.uniform(0.1, 1.0)) * float(potential(t, w, mu).max())
                checks.append(max_principle_slack(t, w, mu, delta))

                # 초가법 g: 𝐈*σ 의 윗집합 절단
                sup_g, _ = superadditive_field(t, None, rng)
                h = random_field(t, rng)
                checks.append(supadditive_l1linf_slack(t, sup_g, h))
                Ig = hardy(t, sup_g)
                cut = float(rng.uniform(0.2, 1.0)) * max(float(Ig.max()), 1e-12)
                f_cut = np.where(Ig <= cut, f, 0.0)
                scalar = [i2_positive_slack(t, f_cut, sup_g, cut), weighted_estimate_ratio(t, f_cut, sup_g, cut)]
                for s in scalar:
                    report.record_envelope(f"{s.name}_ratio", s.ratio)
                    row[f"{s.name}_ratio"] = s.ratio
                    if not s.holds:
                        report.add_violation(s.name, k, f"비율 {s.ratio:.6g} > 1", _witness(seed, "inequalities", k, t))
                cut_ratio = cut_bound_ratio(t, sup_g, cut)
                report.record_envelope("cut_bound_ratio_1tree", cut_ratio)
                row["cut_bound_ratio"] = cut_ratio
                if not leq(cut_ratio, 1.0):
                    report.add_violation("cut-bound", k, f"비율 {cut_ratio:.6g} > 1", _witness(seed, "inequalities", k, t))
        except TRIAL_ERRORS as e:
            report.add_failure(k, e)
            continue
        for c in checks:
            report.record_envelope(f"{c.name.split('[')[0]}_excess", c.excess)
            row[f"{c.name.split('[')[0]}_holds"] = c.holds
            if not c.holds:
                report.add_violation(c.name, k, f"초과량 {c.excess:.3e}", _witness(seed, "inequalities", k, t, vertex=c.witness))
        rows.append(row)
    report.add_table("records", rows)


# --- constants ----------------------------------------------------------------


def _suite_constants(report: ExperimentReport, trials: int, seed: int, max_depth: Optional[int], config: Config) -> None:
    code = SUITE_CODES["constants"]
    canonical = canonical_instance(config)
    rep = ordering_report(canonical.t, canonical.weight, canonical.mu, seed=seed, config=config)
    report.add_table("canonical", [rep.to_dict()])
    for name, value in zip(("box", "carleson", "hereditary", "embedding"), rep.values()):
        if not close(value, 4.0, rel=1e-6):
            report.add_violation(f"canonical-{name}", -1, f"{name} = {value:.12g} ≠ 4",
                                 _witness(seed, "constants", -1, canonical.t, canonical.weight, canonical.mu))

    rows = []
    for k in range(trials):
        rng = trial_rng(seed, code, k)
        n = 1 + k % 2
        try:
            t = random_tree_instance(n, _depth(rng, n, max_depth, cap=2), rng, config)
            w = make_weight(t, "tensor-random", rng)
            mu = random_leaf_measure(t, rng, max_points=5)
            rep = ordering_report(t, w, mu, trials=100, seed=derive_seed(seed, code, k), config=config)
        except TRIAL_ERRORS as e:
            report.add_failure(k, e)
            continue
        row = {"trial": k, "n": n, "size": t.size, **rep.to_dict()}
        rows.append(row)
        report.count("exact" if rep.all_exact() else "inexact")
        for ratio in ("ce_over_box", "hc_over_c", "c_over_box"):
            report.record_envelope(ratio, rep.ratios[ratio])
        if rep.chain_holds is False:
            report.add_violation("ordering-chain", k, f"{rep.values()}", _witness(seed, "constants", k, t, w, mu))
    report.add_table("records", rows)

    # 역부등식 비율 스윕 (텐서 가중치 s ∈ {1, 3/4, 1/2})
    instances = []
    sweep = max(trials // 10, 3)
    for k in range(sweep):
        rng = trial_rng(seed, code, 10_000 + k)
        n = 2 + k % 2
        s = float((1.0, 0.75, 0.5)[k % 3])
        try:
            t = NTreeInstance.dyadic(n, _depth(rng, n, max_depth), 2, config)
        except TRIAL_ERRORS as e:
            report.add_failure(10_000 + k, e)
            continue
        label = f"T{n}-s{s:g}"
        instances.append((label, t, weight_from_s(t, [s] * n), random_leaf_measure(t, rng), random_leaf_measure(t, rng)))
    records, envelope = theorem_ratio_suite(instances, trials=100, seed=seed, config=config)
    report.add_table("theorem_ratios", records)
    report.add_table("theorem_envelopes", envelope)
    for _, r in envelope.iterrows():
        report.record_envelope(f"{r['label']}:{r['ratio']}", r["max"])


# --- capacity -----------------------------------------------------------------


def _chain_instance(config: Config) -> NTreeInstance:
    return NTreeInstance.of([Tree.from_parents([None, 0])], config)


def _suite_capacity(report: ExperimentReport, trials: int, seed: int, max_depth: Optional[int], config: Config) -> None:
    code = SUITE_CODES["capacity"]
    chain = _chain_instance(config)
    canonical = canonical_instance(config)
    fixtures = [
        ("chain-pair", chain, np.array([False, True]), 0.5),
        ("bitree-corner", canonical.t, canonical.mu > 0, 0.25),
    ]
    for name, t, E, expected in fixtures:
        res = capacity(t, E.reshape(t.shape), config=config)
        report.record_envelope(f"{name}_cap", res.value)
        if abs(res.value - expected) > 1e-6:
            report.add_violation(f"capacity-{name}", -1, f"cap = {res.value:.12g} ≠ {expected}", _witness(seed, "capacity", -1, t))

    lambdas = (1.0, 1.5, 2.0, 3.0, 4.0)
    tables = []
    ladders = []
    for k in range(trials):
        rng = trial_rng(seed, code, k)
        n = 2 + k % 2
        try:
            t = NTreeInstance.dyadic(n, _depth(rng, n, max_depth, cap=2), 2, config)
            mu = random_leaf_measure(t, rng)
            table = capacity_bound_experiment(t, mu, lambdas, normalize=True, config=config)
            scaled, _ = normalize_measure(t, None, mu)
            for lam in lambdas:
                if not np.any(potential(t, None, scaled) > lam):
                    continue
                ladder = capacity_ladder_bound(t, scaled, lam)
                cap_row = table[table["lambda"] == lam]
                cap_value = float(cap_row["cap"].iloc[0]) if len(cap_row) else 0.0
                ladders.append({"trial": k, "n": n, "lambda": lam, "ladder_cost": ladder.cost,
                                "feasible": ladder.feasible, "cap": cap_value, "levels": ladder.levels})
                if not ladder.feasible:
                    # 지배 보조정리는 λ ≥ 4δ (정규화 후 δ = 1) 에서만 보장됩니다
                    if lam >= LADDER_MIN_LAMBDA:
                        report.add_violation("ladder-feasibility", k, f"λ={lam}", _witness(seed, "capacity", k, t, mu=scaled))
                    else:
                        report.count("ladder_infeasible_below_4")
                elif not leq(cap_value, ladder.cost, rel=1e-6):
                    report.add_violation("capacity-minimality", k, f"cap {cap_value:.6g} > 사다리 비용 {ladder.cost:.6g}",
                                         _witness(seed, "capacity", k, t, mu=scaled))
        except TRIAL_ERRORS as e:
            report.add_failure(k, e)
            continue
        table.insert(0, "n", n)
        table.insert(0, "trial", k)
        tables.append(table)
        report.record_envelope(f"T{n}_cap_ratio", float(table["ratio"].max()) if len(table) else 0.0)
        unconverged = int((~table["converged"].astype(bool)).sum())
        if unconverged:
            report.count("unconverged", unconverged)
    if tables:
        records = report.add_table("records", pd.concat(tables, ignore_index=True))
        for n in (2, 3):
            part = records[records["n"] == n]
            slope = fit_decay_slope(part) if len(part) else float("nan")
            report.record_envelope(f"T{n}_decay_slope", slope)
    report.add_table("ladder", ladders)


# --- majorization -------------------------------------------------------------


def _suite_majorization(report: ExperimentReport, trials: int, seed: int, max_depth: Optional[int], config: Config) -> None:
    code = SUITE_CODES["majorization"]
    rows = []
    lemma_rows = []
    for k in range(trials):
        rng = trial_rng(seed, code, k)
        n = (2, 3, 1)[k % 3]
        try:
            t = NTreeInstance.dyadic(n, _depth(rng, n, max_depth, cap=3 if n == 2 else None), 2, config)
            scale = 2.0 ** int(rng.integers(0, 4))
            if n == 1:
                f, g, delta = superadditive_pair(t, rng)
                if not np.any(f > 0) or delta <= 0:
                    continue
                cert = majorant_1tree(t, f, g, 10.0 * delta * scale, delta)
                w = None
            else:
                w = make_weight(t, "tensor-random", rng)
                f, delta = superadditive_field(t, w, rng)
                if not np.any(f > 0) or delta <= 0:
                    continue
                build = majorant_bitree if n == 2 else majorant_tritree
                cert = build(t, w, f, 4.0 * delta * scale, delta)
                lemmas = energy_lemma_checks(t, w, f, delta, cert.lam)
                for _, r in lemmas.iterrows():
                    lemma_rows.append({"trial": k, "n": n, **r.to_dict()})
                    report.record_envelope(f"{r['lemma'].split('[')[0]}_ratio", r["ratio"])
                    if not r["holds"]:
                        report.add_violation(r["lemma"], k, f"비율 {r['ratio']:.6g}", _witness(seed, "majorization", k, t, w))

                # f = g 형태 (w ≡ 1)
                f1, delta1 = superadditive_field(t, None, rng)
                if np.any(f1 > 0) and delta1 > 0:
                    coincident = majorant_coincident(t, f1, 10.0 * delta1 * scale, delta1)
                    report.record_envelope(f"T{n}_coincident_cost", coincident.normalized_cost)
                    if not coincident.domination_holds:
                        report.add_violation("coincident-domination", k, f"최소 비율 {coincident.min_ratio:.6g}",
                                             _witness(seed, "majorization", k, t))
        except TRIAL_ERRORS as e:
            report.add_failure(k, e)
            continue
        rows.append({"trial": k, "n": n, **cert.to_dict()})
        report.record_envelope(f"T{n}_normalized_cost", cert.normalized_cost)
        if not cert.domination_holds:
            report.add_violation(f"{cert.variant}-domination", k, f"최소 비율 {cert.min_ratio:.6g}", _witness(seed, "majorization", k, t, w))
        if not cert.cost_within_bound():
            report.add_violation(f"{cert.variant}-cost", k, f"{cert.normalized_cost:.6g} > {cert.cost_bound:g}",
                                 _witness(seed, "majorization", k, t, w))
    report.add_table("records", rows)
    report.add_table("lemmas", lemma_rows)


# --- maxprinciple -------------------------------------------------------------


def _suite_maxprinciple(report: ExperimentReport, trials: int, seed: int, max_depth: Optional[int], config: Config) -> None:
    code = SUITE_CODES["maxprinciple"]
    rows = []
    for k in range(trials):
        rng = trial_rng(seed, code, k)
        n = 1 + k % 3
        try:
            t = NTreeInstance.dyadic(n, _depth(rng, n, max_depth), 2, config)
            w = make_weight(t, "tensor-random", rng)
            mu = random_leaf_measure(t, rng)
            rho = random_measure(t, rng)
            V = potential(t, w, mu)
            delta = float(rng.uniform(0.1, 1.0)) * float(V.max())
            sur = surrogate_check(t, w, mu, rho, delta)
            row: Dict[str, Any] = {"trial": k, "n": n, **sur.to_dict()}
            report.record_envelope(f"T{n}_surrogate_implied", sur.implied_constant)
            if sur.explicit_ratio is not None:
                report.record_envelope(f"T{n}_surrogate_explicit", sur.explicit_ratio)
            if sur.explicit_holds is False:
                report.add_violation(f"surrogate-n{n}", k, f"비율 {sur.explicit_ratio:.6g}", _witness(seed, "maxprinciple", k, t, w, mu))
            if sur.corollary_ratio is not None:
                report.record_envelope("T3_surrogate_corollary", sur.corollary_ratio ** 2)
            if sur.corollary_holds is False:
                report.add_violation(
                    "surrogate-corollary-n3",
                    k,
                    f"비율² {sur.corollary_ratio ** 2:.6g} > C {sur.corollary_constant:.6g}",
                    _witness(seed, "maxprinciple", k, t, w, mu),
                )

            kappa, C = surrogate_parameters(n)
            pv = partialV_check(t, w, mu, delta)
            row["partialv_ratio"] = pv.ratio
            report.record_envelope(f"T{n}_partialv_ratio", pv.ratio)
            if C is not None and not leq(pv.ratio, C):
                report.add_violation(f"partial-energy-n{n}", k, f"비율 {pv.ratio:.6g} > {C:.6g}", _witness(seed, "maxprinciple", k, t, w, mu))
            if C is not None:
                large = large_energy_downset(t, w, mu, kappa, C)
                row["large_energy_fraction"] = large.fraction
                row["large_energy_consistent"] = large.consistent
                if large.holds is False:
                    report.add_violation("large-energy-downset", k, f"비율 {large.fraction:.6g}", _witness(seed, "maxprinciple", k, t, w, mu))

            if n >= 2:
                A = float(np.sum(V * mu)) / float(mu.sum())
                bal = balance(t, w, mu, A, config)
                row["balance"] = bal.method
                report.count(f"balance_{bal.method}")
                try:
                    main = main_estimate_check(t, None, mu)
                    row["main_estimate_ratio"] = main.ratio
                    report.record_floor(f"T{n}_main_estimate_min", main.ratio)
                except HypothesisError:
                    report.count("main_estimate_rejected")
                omega = tuple(int(c) for c in np.unravel_index(int(np.argmax(mu)), t.shape))
                trace = covering_construction(t, None, mu, omega)
                row["cover_branch"] = trace.branch
                row["cover_augmentations"] = trace.augmentations
                report.count(f"cover_{trace.branch}")
                report.count("cover_augmentations", trace.augmentations)
                if not trace.verified:
                    report.add_violation(f"covering-{trace.branch}", k, f"ω = {omega}", _witness(seed, "maxprinciple", k, t, mu=mu, omega=list(omega)))
        except TRIAL_ERRORS as e:
            report.add_failure(k, e)
            continue
        rows.append(row)
    report.add_table("records", rows)


# --- lattice ------------------------------------------------------------------


def _suite_lattice(report: ExperimentReport, trials: int, seed: int, max_depth: Optional[int], config: Config) -> None:
    lattice_rows = []
    for m in (6, 8):
        rep = good_lattice_probability(m, trials, seed)
        lattice_rows.append(rep.to_dict())
        report.record_floor(f"good_probability_m{m}", rep.probability)
        report.record_envelope(f"good_ratio_m{m}", rep.max_ratio_good)
        if rep.violations:
            report.add_violation("lattice-distance", m, f"D_L > 10·D {rep.violations} 건", _witness(seed, "lattice", m, m=m))
        if rep.probability < GOOD_LATTICE_FLOOR:
            report.add_violation("good-lattice-probability", m, f"{rep.probability:.4f} < {GOOD_LATTICE_FLOOR:.4f}",
                                 _witness(seed, "lattice", m, m=m))
    report.add_table("good_lattice", lattice_rows)

    kernel_rows = []
    depth = 6 if max_depth is None else max(1, min(6, max_depth))
    kernel_trials = min(trials, 10_000)
    for d in (1, 2):
        t = NTreeInstance.dyadic(d, depth, 2, config)
        for s in (1.0, 0.5):
            rep = kernel_domination(t, [s] * d, kernel_trials, seed, config)
            kernel_rows.append({**rep.to_dict(), "s": s})
            report.record_envelope(f"dk_ratio_d{d}_s{s:g}", rep.dk_envelope)
            report.record_floor(f"reverse_probability_d{d}_s{s:g}", rep.reverse_probability)
            if rep.dk_violations:
                report.add_violation("tree-kernel-domination", d, f"s={s}: {rep.dk_violations} 건", _witness(seed, "lattice", d, s=s))
    report.add_table("kernel", kernel_rows)

    growth = poisson_growth(range(2, 7), config)
    report.add_table("poisson", growth.drop(columns=["alpha", "beta"]))
    report.record_envelope("poisson_max_ratio", float(growth["max_ratio"].max()))
    if not bool(growth["increasing"].all()):
        report.add_violation("poisson-growth", -1, "깊이에 따라 순증가하지 않습니다.", _witness(seed, "lattice", -1))


# --- search (추측) ------------------------------------------------------------


def _suite_search(report: ExperimentReport, trials: int, seed: int, max_depth: Optional[int], config: Config) -> None:
    code = SUITE_CODES["search"]
    depths = [d for d in (1, 2, 3) if max_depth is None or d <= max_depth] or [1]
    per_depth = max(trials // len(depths), 1)

    pairs = conjecture_search_bitree_pair(depths[-1], per_depth, derive_seed(seed, code, 1), depths=depths, config=config)
    report.add_table("pair_records", pairs)
    if not pairs.empty:
        for tau in (1.0, 0.5, 0.25):
            col = f"scaled_tau_{tau:g}"
            growth = growth_by_depth(pairs, col)
            report.add_table(f"pair_growth_tau{tau:g}", growth)
            report.record_envelope(f"pair_{col}", float(pairs[col].max()))
            if bool(growth["increasing"].iloc[1:].all()) and len(growth) > 1:
                report.count(f"pair_growing_tau{tau:g}")
        for _, r in pairs[~pairs["domination_holds"]].iterrows():
            report.add_violation("pair-domination", int(r["trial"]), f"깊이 {int(r['depth'])} 최소 비율 {r['min_ratio']:.6g}",
                                 _witness(seed, "search", int(r["trial"]), depth=int(r["depth"])))

    exhaustive = obstruction_4tree_exhaustive(config)
    report.add_table("obstruction_exhaustive", [exhaustive])
    report.record_envelope("obstruction_exhaustive_ratio", exhaustive["max_ratio"])
    obstruction = obstruction_4tree(1, max(per_depth // 4, 1), derive_seed(seed, code, 2), depths=[1], config=config)
    report.add_table("obstruction_records", obstruction)
    if not obstruction.empty:
        report.record_envelope("obstruction_ratio", float(obstruction["ratio"].max()))

    cut = cut_failure_search(min(depths[-1], 2), per_depth, derive_seed(seed, code, 3), config)
    report.add_table("cut_records", cut)
    if not cut.empty:
        report.record_envelope("cut_bound_ratio_2tree", float(cut["ratio"].max()))
        report.count("cut_failures", int((cut["ratio"] > 1.0 + 1e-9).sum()))

    # n = 4 부분 에너지 추측 지수
    t = NTreeInstance.dyadic(4, 1, 2, config)
    fits = []
    for k in range(max(per_depth // 10, 1)):
        rng = trial_rng(seed, code, 1000 + k)
        mu = random_leaf_measure(t, rng)
        top = float(potential(t, None, mu).max())
        records = partialv_records(t, None, mu, np.geomspace(top / 64.0, top, 12))
        fit = fit_partialv_exponent(records)
        fits.append({"trial": k, **fit})
        report.record_envelope("T4_partialv_ratio", float(records["ratio"].max()))
    report.add_table("partialv_fits", fits)


_RUNNERS: Dict[str, Callable[[ExperimentReport, int, int, Optional[int], Config], None]] = {
    "identities": _suite_identities,
    "inequalities": _suite_inequalities,
    "constants": _suite_constants,
    "capacity": _suite_capacity,
    "majorization": _suite_majorization,
    "maxprinciple": _suite_maxprinciple,
    "lattice": _suite_lattice,
    "search": _suite_search,
}


def run_suite(
    suite: str,
    config: Config = DEFAULT_CONFIG,
    seed: int = 0,
    trials: Optional[int] = None,
    max_depth: Optional[int] = None,
) -> ExperimentReport:
    """
    스위트를 실행합니다.

    Args:
        suite: identities | inequalities | constants | capacity | majorization | maxprinciple | lattice | search
        config: 설정 (suite_trials 가 trials 기본값)
        seed: 마스터 시드
        trials: 시행 횟수
        max_depth: 좌표 트리 깊이 상한

    Returns:
        ExperimentReport (exit_code 1 ⇔ 증명된 명제 위반)

    Raises:
        SuiteError: 알 수 없는 스위트 또는 잘못된 시행 횟수
    """
    if suite not in _RUNNERS:
        raise SuiteError(f"알 수 없는 스위트입니다: {suite} (가능: {', '.join(SUITES)})")
    trials = config.suite_trials.get(suite, 100) if trials is None else int(trials)
    if trials < 1:
        raise SuiteError(f"시행 횟수는 1 이상이어야 합니다: {trials}")
    echo = {"suite": suite, "seed": int(seed), "trials": trials, "max_depth": max_depth, "arity": 2}
    report = ExperimentReport(suite=suite, config=echo, conjecture=suite in CONJECTURE_SUITES)
    logger.info(f"스위트 {suite} 시작: 시행 {trials}, 시드 {seed}")
    _RUNNERS[suite](report, trials, int(seed), max_depth, config)
    logger.info(
        f"스위트 {suite} 종료: 위반 {len(report.violations)}, 실패 {len(report.failures)}, exit {report.exit_code}"
    )
    return report


def rerun_from_echo(echo: Dict[str, Any], config: Config = DEFAULT_CONFIG) -> ExperimentReport:
    """보고서의 설정 에코로 같은 스위트를 다시 실행합니다."""
    try:
        return run_suite(
            str(echo["suite"]),
            config=config,
            seed=int(echo["seed"]),
            trials=int(echo["trials"]),
            max_depth=None if echo.get("max_depth") is None else int(echo["max_depth"]),
        )
    except KeyError as e:
        raise SuiteError(f"설정 에코에 키가 없습니다: {e}") from e


def run_suites(suites: Sequence[str], config: Config = DEFAULT_CONFIG, seed: int = 0, **kwargs: Any) -> List[ExperimentReport]:
    return [run_suite(s, config=config, seed=seed, **kwargs) for s in suites]
