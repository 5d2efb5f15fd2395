"""
보고서 JSON/CSV 입출력.
"""
from __future__ import annotations

import io
import logging
import re
from pathlib import Path
from typing import Any, Dict, List, Union

import pandas as pd

from mtc.harness.report import REPORT_FORMAT, REPORT_VERSION, ExperimentReport
from mtc.io.instances import InstanceFormatError, canonical_dumps, canonical_loads

logger = logging.getLogger(__name__)

CSV_FLOAT_FORMAT = "%.17g"

PathLike = Union[str, Path]


class ReportFormatError(Exception):
    """보고서 파일 형식 에러"""
    pass


def report_to_json(report: ExperimentReport) -> str:
    try:
        return canonical_dumps(report.to_dict())
    except InstanceFormatError as e:
        raise ReportFormatError(f"보고서 직렬화 실패: {e}") from e


def parse_report(text: str) -> ExperimentReport:
    """
    보고서 JSON 을 파싱합니다.

    Raises:
        ReportFormatError: 형식/버전 오류
    """
    try:
        doc = canonical_loads(text)
    except InstanceFormatError as e:
        raise ReportFormatError(str(e)) from e
    if not isinstance(doc, dict) or doc.get("format") != REPORT_FORMAT:
        raise ReportFormatError("mtc-report 형식이 아닙니다.")
    if doc.get("version") != REPORT_VERSION:
        raise ReportFormatError(f"지원하지 않는 보고서 버전입니다: {doc.get('version')!r}")
    try:
        return ExperimentReport.from_dict(doc)
    except (KeyError, TypeError, ValueError) as e:
        raise ReportFormatError(f"보고서 구성 실패: {e}") from e


def save_report(report: ExperimentReport, path: PathLike) -> Path:
    path = Path(path)
    path.write_text(report_to_json(report), encoding="ascii")
    logger.info(f"보고서 저장: {path}")
    return path


def load_report(path: PathLike) -> ExperimentReport:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ReportFormatError(f"보고서 파일을 읽을 수 없습니다: {path}: {e}") from e
    return parse_report(text)


def frame_to_csv(df: pd.DataFrame) -> str:
    buf = io.StringIO()
    df.to_csv(buf, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
    return buf.getvalue()


def report_frames(report: ExperimentReport) -> Dict[str, pd.DataFrame]:
    """summary, violations 와 기록 표들 (CSV/Excel 공통 순서)."""
    frames: Dict[str, pd.DataFrame] = {"summary": report.summary_frame(), "violations": report.violations_frame()}
    for name, df in report.tables.items():
        frames[name] = df.map(_cell) if hasattr(df, "map") else df.applymap(_cell)
    return frames


def _cell(value: Any) -> Any:
    # 목록 값(증인 좌표 등)은 표에서 문자열로
    if isinstance(value, (list, tuple, dict)):
        return canonical_dumps(value).strip()
    return value


def _safe_name(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]+", "_", name) or "table"


def write_csv_tables(report: ExperimentReport, out_dir: PathLike) -> List[Path]:
    """
    보고서의 표를 <suite>_<table>.csv 로 씁니다.

    Raises:
        ReportFormatError: 디렉터리 생성/쓰기 실패
    """
    out_dir = Path(out_dir)
    written = []
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        for name, df in report_frames(report).items():
            path = out_dir / f"{_safe_name(report.suite)}_{_safe_name(name)}.csv"
            path.write_text(frame_to_csv(df), encoding="utf-8")
            written.append(path)
    except OSError as e:
        raise ReportFormatError(f"CSV 저장 실패: {out_dir}: {e}") from e
    logger.info(f"CSV {len(written)} 개 저장: {out_dir}")
    return written
