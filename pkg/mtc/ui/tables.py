import streamlit as st
import pandas as pd
from typing import Optional

from mtc.harness.report import ExperimentReport
from mtc.io.reports import report_frames

# 표시 컬럼명 한글화
ENVELOPE_COLUMNS = {"kind": "종류", "name": "항목", "value": "값"}
VIOLATION_COLUMNS = {"statement": "명제", "trial": "시행", "detail": "내용"}


def envelope_table(report: ExperimentReport, kind: Optional[str] = None) -> pd.DataFrame:
    """
    포락선/카운트 요약 표를 만듭니다.

    Args:
        report: 실험 보고서
        kind: "envelope" 또는 "count" 로 거를 때

    Returns:
        한글 컬럼명의 DataFrame
    """
    summary = report.summary_frame()
    if kind is not None:
        summary = summary[summary["kind"] == kind]
    return summary.rename(columns=ENVELOPE_COLUMNS).reset_index(drop=True)


def violations_table(report: ExperimentReport) -> pd.DataFrame:
    table = report.violations_frame().rename(columns=VIOLATION_COLUMNS)
    if "시행" in table.columns:
        table = table.sort_values(["명제", "시행"]).reset_index(drop=True)
    return table


def record_table(report: ExperimentReport, name: str, max_rows: int = 1000) -> pd.DataFrame:
    """기록 표 하나를 표시용으로 자릅니다 (목록 값은 문자열로)."""
    frames = report_frames(report)
    if name not in frames:
        return pd.DataFrame()
    return frames[name].head(max_rows)


def render_envelopes(report: ExperimentReport) -> None:
    st.subheader("포락선")
    table = envelope_table(report)
    if table.empty:
        st.info("포락선이 없습니다.")
        return
    st.dataframe(table, use_container_width=True, hide_index=True)


def render_violations(report: ExperimentReport) -> None:
    """
    위반 목록을 렌더링합니다. 증인(재실행 정보)은 펼침 영역에 JSON 으로 보여줍니다.
    """
    st.subheader("위반")
    if not report.violations:
        st.success("위반이 없습니다.")
        return
    st.dataframe(violations_table(report), use_container_width=True, hide_index=True)
    for v in report.violations[:20]:
        with st.expander(f"{v.statement} · 시행 {v.trial}", expanded=False):
            st.json(v.witness)


def render_records(report: ExperimentReport) -> None:
    st.subheader("기록")
    if not report.tables:
        st.info("기록 표가 없습니다.")
        return
    name = st.selectbox("표 선택", sorted(report.tables))
    table = record_table(report, name)
    st.caption(f"{len(report.tables[name]):,} 행")
    st.dataframe(table, use_container_width=True, hide_index=True)
