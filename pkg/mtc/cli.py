"""
명령줄 인터페이스: python -m mtc <command> ...

종료 코드: 0 = 증명된 명제 모두 확인, 1 = 증명된 명제 위반, 2 = 설정/예산/형식 에러.
로그는 stderr 로, 결과 JSON 은 stdout 또는 --out 파일로 나갑니다.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from mtc.config import BudgetExceededError, Config, ConfigError, load_config
from mtc.domain.capacity import CapacityError, capacity, capacity_bound_experiment, superlevel_set
from mtc.domain.constants import ConstantsError, ordering_report, support_points
from mtc.domain.hardy import FieldError, adjoint_hardy, potential
from mtc.domain.identities import HypothesisError
from mtc.domain.majorization import (
    energy_lemma_checks,
    majorant_1tree,
    majorant_bitree,
    majorant_tritree,
)
from mtc.domain.maxprinciple import partialV_check, surrogate_check
from mtc.harness.report import ExperimentReport
from mtc.harness.suites import CONJECTURE_SUITES, SUITES, SuiteError, run_suite
from mtc.io.excel import ExcelExportError, export_report_xlsx
from mtc.io.instances import (
    InstanceFormatError,
    canonical_dumps,
    load_field,
    load_instance,
    load_vertex_set,
    serialize_instance,
)
from mtc.io.reports import ReportFormatError, load_report, report_to_json, write_csv_tables
from mtc.transform.generate import GenerationError, generate_instance

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_ERROR = 2

# 잘못된 입력/설정으로 취급하는 에러
INPUT_ERRORS = (
    ConfigError,
    BudgetExceededError,
    InstanceFormatError,
    ReportFormatError,
    ExcelExportError,
    GenerationError,
    SuiteError,
    HypothesisError,
    FieldError,
    ConstantsError,
    CapacityError,
)


def _setup_logging(verbose: int) -> None:
    level = logging.WARNING if verbose <= 0 else logging.INFO if verbose == 1 else logging.DEBUG
    logging.basicConfig(level=level, stream=sys.stderr, format="%(asctime)s %(levelname)s %(name)s: %(message)s")


def _emit(doc: Any, out: Optional[str]) -> None:
    text = canonical_dumps(doc)
    if out:
        Path(out).write_text(text, encoding="ascii")
        logger.info(f"저장: {out}")
    else:
        sys.stdout.write(text)


def _emit_report(report: ExperimentReport, out: Optional[str], xlsx: Optional[str]) -> None:
    text = report_to_json(report)
    if out:
        path = Path(out)
        if path.suffix.lower() != ".json":
            path.mkdir(parents=True, exist_ok=True)
            path = path / f"{report.suite}.json"
        path.write_text(text, encoding="ascii")
        logger.info(f"보고서 저장: {path}")
    else:
        sys.stdout.write(text)
    if xlsx:
        target = Path(xlsx)
        if target.suffix.lower() != ".xlsx":
            target.mkdir(parents=True, exist_ok=True)
            target = target / f"{report.suite}.xlsx"
        export_report_xlsx(report, target)


# --- 명령 ---------------------------------------------------------------------


def cmd_gen(args: argparse.Namespace, config: Config) -> int:
    inst = generate_instance(args.n, args.depth, args.arity, args.weight, args.measure, args.seed, config=config)
    text = serialize_instance(inst)
    if args.out:
        Path(args.out).write_text(text, encoding="ascii")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_constants(args: argparse.Namespace, config: Config) -> int:
    inst = load_instance(args.instance, config)
    if args.exact:
        supp = support_points(inst.t, inst.mu).size
        if inst.t.size > config.exact_downset_cap or supp > config.exact_subset_cap:
            raise ConstantsError(
                f"정확 모드 한도 초과: 꼭짓점 {inst.t.size} (한도 {config.exact_downset_cap}), "
                f"지지점 {supp} (한도 {config.exact_subset_cap})"
            )
    rep = ordering_report(inst.t, inst.weight, inst.mu, trials=args.trials, seed=args.seed, config=config)
    _emit({"meta": inst.meta, "constants": rep.to_dict(), "all_exact": rep.all_exact()}, args.out)
    return EXIT_VIOLATION if rep.chain_holds is False else EXIT_OK


def cmd_capacity(args: argparse.Namespace, config: Config) -> int:
    inst = load_instance(args.instance, config)
    t = inst.t
    if args.set:
        mask = load_vertex_set(args.set, t)
        res = capacity(t, mask, config=config)
        doc: Dict[str, Any] = {
            "set_size": int(mask.sum()),
            "cap": res.value,
            "signed_cap": res.signed_value,
            "kkt_residual": res.kkt_residual,
            "converged": res.converged,
            "minimizer": res.minimizer,
        }
    elif args.grid:
        table = capacity_bound_experiment(t, inst.mu, args.grid, normalize=not args.raw, config=config)
        doc = {"columns": list(table.columns), "rows": table.values.tolist()}
    else:
        level = superlevel_set(t, None, inst.mu, args.level)
        doc = {"lambda": args.level, "set_size": level.count, "cap": 0.0}
        if not level.is_empty():
            res = capacity(t, level, config=config)
            doc.update(cap=res.value, signed_cap=res.signed_value, kkt_residual=res.kkt_residual, converged=res.converged)
    _emit(doc, args.out)
    return EXIT_OK


def cmd_majorize(args: argparse.Namespace, config: Config) -> int:
    """μ 로부터 f = 𝐈*μ·1_{𝐕^μ≤δ} 를 만들어 지배 함수 인증서를 출력합니다."""
    inst = load_instance(args.instance, config)
    t, w, mu = inst.t, inst.weight, inst.mu
    V = potential(t, None if t.n == 1 else w, mu)
    delta = args.delta if args.delta is not None else float(V[mu > 0].max())
    f = np.where(V <= delta, adjoint_hardy(t, mu), 0.0)
    doc: Dict[str, Any] = {"meta": inst.meta}
    if t.n == 1:
        lam = args.lam if args.lam is not None else 10.0 * delta
        cert = majorant_1tree(t, f, adjoint_hardy(t, mu), lam, delta)
    elif t.n in (2, 3):
        lam = args.lam if args.lam is not None else 4.0 * delta
        build = majorant_bitree if t.n == 2 else majorant_tritree
        cert = build(t, w, f, lam, delta, variant=args.variant)
        table = energy_lemma_checks(t, w, f, delta, lam)
        doc["lemmas"] = table.to_dict(orient="records")
        if not table["holds"].all():
            doc["certificate"] = cert.to_dict()
            _emit(doc, args.out)
            return EXIT_VIOLATION
    else:
        raise HypothesisError(f"majorize 는 n ∈ {{1, 2, 3}} 에서만 정의됩니다 (n={t.n}).")
    doc["certificate"] = cert.to_dict()
    _emit(doc, args.out)
    ok = cert.domination_holds and cert.cost_within_bound()
    return EXIT_OK if ok else EXIT_VIOLATION


def cmd_surrogate(args: argparse.Namespace, config: Config) -> int:
    inst = load_instance(args.instance, config)
    t, w, mu = inst.t, inst.weight, inst.mu
    rho = load_field(args.rho, t) if args.rho else mu
    V = potential(t, w, mu)
    deltas = args.delta or [float(V.max()) * r for r in (0.25, 0.5, 1.0)]
    rows = []
    failed = False
    for delta in deltas:
        sur = surrogate_check(t, w, mu, rho, delta)
        pv = partialV_check(t, w, mu, delta)
        rows.append({**sur.to_dict(), "partialv_ratio": pv.ratio, "partialv_exponent": pv.exponent})
        failed = failed or sur.explicit_holds is False or sur.corollary_holds is False
    _emit({"meta": inst.meta, "records": rows}, args.out)
    return EXIT_VIOLATION if failed else EXIT_OK


def _run_reports(suites: Sequence[str], args: argparse.Namespace, config: Config) -> int:
    code = EXIT_OK
    for suite in suites:
        report = run_suite(suite, config=config, seed=args.seed, trials=args.trials, max_depth=args.max_depth)
        _emit_report(report, args.out, args.xlsx)
        code = max(code, report.exit_code)
    return code


def cmd_verify(args: argparse.Namespace, config: Config) -> int:
    suites = args.suite or [s for s in SUITES if s not in CONJECTURE_SUITES]
    if len(suites) > 1 and args.out and args.out.endswith(".json"):
        raise SuiteError("여러 스위트는 --out 에 디렉터리를 지정해야 합니다.")
    return _run_reports(suites, args, config)


def cmd_lattice(args: argparse.Namespace, config: Config) -> int:
    return _run_reports(["lattice"], args, config)


def cmd_search(args: argparse.Namespace, config: Config) -> int:
    _run_reports(["search"], args, config)
    return EXIT_OK


def cmd_report(args: argparse.Namespace, config: Config) -> int:
    report = load_report(args.input)
    out_dir = args.out or str(Path(args.input).with_suffix(""))
    for path in write_csv_tables(report, out_dir):
        sys.stdout.write(f"{path}\n")
    if args.xlsx:
        export_report_xlsx(report, args.xlsx)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mtc", description="다중 트리 Carleson 실험실")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v: INFO, -vv: DEBUG")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, instance: bool = False) -> None:
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", default=None, help="출력 파일 (없으면 stdout)")
        if instance:
            p.add_argument("--instance", required=True, help="인스턴스 JSON")

    p = sub.add_parser("gen", help="인스턴스 생성")
    common(p)
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--depth", type=int, default=1)
    p.add_argument("--arity", type=int, default=2)
    p.add_argument("--weight", default="uniform", help="uniform | tensor-random | from-s(1,0.5)")
    p.add_argument("--measure", default="leaf-sparse(1)", help="leaf-sparse(k) | leaf-random(k) | uniform-leaf")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("constants", help="네 상수와 순서 사슬")
    common(p, instance=True)
    p.add_argument("--exact", action="store_true", help="정확 모드만 허용")
    p.add_argument("--trials", type=int, default=200)
    p.set_defaults(func=cmd_constants)

    p = sub.add_parser("capacity", help="용량")
    common(p, instance=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--set", help="정점 집합 JSON")
    group.add_argument("--level", type=float, help="초월 집합 {𝐕^μ > λ}")
    group.add_argument("--grid", type=float, nargs="+", help="λ 격자 실험")
    p.add_argument("--raw", action="store_true", help="격자 실험에서 μ 정규화 생략")
    p.set_defaults(func=cmd_capacity)

    p = sub.add_parser("majorize", help="소에너지 지배 함수 인증서")
    common(p, instance=True)
    p.add_argument("--lam", type=float, default=None)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--variant", choices=["product", "outer"], default="product")
    p.set_defaults(func=cmd_majorize)

    p = sub.add_parser("surrogate", help="대리 최대 원리")
    common(p, instance=True)
    p.add_argument("--rho", default=None, help="ρ 필드 JSON (없으면 ρ = μ)")
    p.add_argument("--delta", type=float, nargs="+", default=None)
    p.set_defaults(func=cmd_surrogate)

    for name, func, help_text in (
        ("verify", cmd_verify, "증명된 명제 스위트 실행"),
        ("lattice", cmd_lattice, "격자/커널 시뮬레이션"),
        ("search", cmd_search, "추측 탐색 (보고만)"),
    ):
        p = sub.add_parser(name, help=help_text)
        common(p)
        p.add_argument("--trials", type=int, default=None)
        p.add_argument("--max-depth", dest="max_depth", type=int, default=None)
        p.add_argument("--xlsx", default=None, help="Excel 통합 문서 경로 또는 디렉터리")
        if name == "verify":
            p.add_argument("--suite", nargs="+", choices=list(SUITES), default=None)
        p.set_defaults(func=func)

    p = sub.add_parser("report", help="저장된 보고서를 CSV 표로")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", default=None, help="CSV 디렉터리")
    p.add_argument("--xlsx", default=None)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _setup_logging(args.verbose)
    try:
        config = load_config()
        return args.func(args, config)
    except INPUT_ERRORS as e:
        logger.error(f"{type(e).__name__}: {e}")
        sys.stderr.write(f"mtc: {type(e).__name__}: {e}\n")
        return EXIT_ERROR
