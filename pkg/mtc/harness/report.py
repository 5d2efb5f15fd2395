"""
실험 보고서 자료형.

보고서는 설정 에코, 시행별 기록 표, 포락선(최댓값), 위반 목록, 시행별 실패 목록을 담습니다.
집계는 모두 max/합계이므로 시행 순서와 무관합니다.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd

logger = logging.getLogger(__name__)

REPORT_FORMAT = "mtc-report"
REPORT_VERSION = 1


@dataclass
class Violation:
    """증명된 명제의 위반. witness 에는 재실행 가능한 인스턴스나 시드를 담습니다."""

    statement: str
    trial: int
    detail: str
    witness: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {"statement": self.statement, "trial": self.trial, "detail": self.detail, "witness": self.witness}


def _plain(value: Any) -> Any:
    """numpy 스칼라/배열을 JSON 으로 쓸 수 있는 값으로 바꿉니다."""
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, tuple):
        return [_plain(v) for v in value]
    if value is pd.NA:
        return None
    return value


def frame_to_dict(df: pd.DataFrame) -> Dict[str, Any]:
    """열 순서를 보존하는 {columns, rows} 형태."""
    return {
        "columns": [str(c) for c in df.columns],
        "rows": [[_plain(v) for v in row] for row in df.itertuples(index=False, name=None)],
    }


def frame_from_dict(doc: Dict[str, Any]) -> pd.DataFrame:
    return pd.DataFrame(doc.get("rows", []), columns=doc.get("columns", []))


@dataclass
class ExperimentReport:
    suite: str
    config: Dict[str, Any]
    conjecture: bool = False
    tables: Dict[str, pd.DataFrame] = field(default_factory=dict)
    envelopes: Dict[str, float] = field(default_factory=dict)
    counts: Dict[str, int] = field(default_factory=dict)
    violations: List[Violation] = field(default_factory=list)
    failures: List[Dict[str, Any]] = field(default_factory=list)

    def record_envelope(self, name: str, value: float) -> None:
        """포락선을 최댓값으로 갱신합니다 (nan 은 무시)."""
        value = float(value)
        if math.isnan(value):
            return
        previous = self.envelopes.get(name)
        if previous is None or value > previous:
            if previous is not None:
                logger.info(f"[{self.suite}] 새 최댓값 {name} = {value:.6g}")
            self.envelopes[name] = value

    def record_floor(self, name: str, value: float) -> None:
        """최솟값 포락선 (nan 은 무시)."""
        value = float(value)
        if math.isnan(value):
            return
        previous = self.envelopes.get(name)
        if previous is None or value < previous:
            self.envelopes[name] = value

    def count(self, name: str, amount: int = 1) -> None:
        self.counts[name] = self.counts.get(name, 0) + int(amount)

    def add_violation(self, statement: str, trial: int, detail: str, witness: Optional[Dict[str, Any]] = None) -> None:
        self.violations.append(Violation(statement, int(trial), detail, dict(witness or {})))
        if self.conjecture:
            logger.info(f"[{self.suite}] 추측 반례 후보 {statement} (시행 {trial}): {detail}")
        else:
            logger.error(f"[{self.suite}] {statement} 위반 (시행 {trial}): {detail}")

    def add_failure(self, trial: int, error: Exception) -> None:
        """예산 초과/비수렴 같은 시행별 실패. 스윕은 계속됩니다."""
        self.failures.append({"trial": int(trial), "error": type(error).__name__, "message": str(error)})
        logger.warning(f"[{self.suite}] 시행 {trial} 실패: {type(error).__name__}: {error}")

    def add_table(self, name: str, rows: List[Dict[str, Any]] | pd.DataFrame) -> pd.DataFrame:
        df = rows if isinstance(rows, pd.DataFrame) else pd.DataFrame(rows)
        self.tables[name] = df.reset_index(drop=True)
        return self.tables[name]

    @property
    def proven_violations(self) -> int:
        return 0 if self.conjecture else len(self.violations)

    @property
    def exit_code(self) -> int:
        return 1 if self.proven_violations else 0

    def summary_frame(self) -> pd.DataFrame:
        rows = [{"kind": "envelope", "name": k, "value": v} for k, v in sorted(self.envelopes.items())]
        rows += [{"kind": "count", "name": k, "value": float(v)} for k, v in sorted(self.counts.items())]
        rows.append({"kind": "count", "name": "violations", "value": float(len(self.violations))})
        rows.append({"kind": "count", "name": "failures", "value": float(len(self.failures))})
        return pd.DataFrame(rows, columns=["kind", "name", "value"])

    def violations_frame(self) -> pd.DataFrame:
        rows = [{"statement": v.statement, "trial": v.trial, "detail": v.detail} for v in self.violations]
        return pd.DataFrame(rows, columns=["statement", "trial", "detail"])

    def to_dict(self) -> Dict[str, Any]:
        return {
            "format": REPORT_FORMAT,
            "version": REPORT_VERSION,
            "suite": self.suite,
            "config": {k: _plain(v) for k, v in self.config.items()},
            "conjecture": self.conjecture,
            "exit_code": self.exit_code,
            "envelopes": dict(self.envelopes),
            "counts": dict(self.counts),
            "tables": {name: frame_to_dict(df) for name, df in self.tables.items()},
            "violations": [v.to_dict() for v in self.violations],
            "failures": list(self.failures),
        }

    @classmethod
    def from_dict(cls, doc: Dict[str, Any]) -> "ExperimentReport":
        return cls(
            suite=str(doc["suite"]),
            config=dict(doc.get("config", {})),
            conjecture=bool(doc.get("conjecture", False)),
            tables={name: frame_from_dict(t) for name, t in doc.get("tables", {}).items()},
            envelopes={k: float(v) for k, v in doc.get("envelopes", {}).items()},
            counts={k: int(v) for k, v in doc.get("counts", {}).items()},
            violations=[Violation(**v) for v in doc.get("violations", [])],
            failures=list(doc.get("failures", [])),
        )
