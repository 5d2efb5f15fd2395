import streamlit as st
from typing import List, Dict, Any

from mtc.harness.report import ExperimentReport


def kpi_values(report: ExperimentReport) -> List[Dict[str, Any]]:
    """
    보고서 상단 KPI 카드 값을 계산합니다.

    Args:
        report: 실험 보고서

    Returns:
        label/value/help 딕셔너리 목록
    """
    trials = report.config.get("trials", 0)
    status = "추측 (보고만)" if report.conjecture else ("위반" if report.exit_code else "통과")
    return [
        {"label": "스위트", "value": report.suite, "help": f"시드 {report.config.get('seed', 0)}"},
        {"label": "시행 수", "value": f"{int(trials):,}", "help": "설정 에코의 trials"},
        {"label": "위반", "value": f"{len(report.violations):,}", "help": "증명된 명제의 위반 건수"},
        {"label": "시행 실패", "value": f"{len(report.failures):,}", "help": "예산 초과/비수렴 등"},
        {"label": "판정", "value": status, "help": f"종료 코드 {report.exit_code}"},
    ]


def render_kpis(report: ExperimentReport) -> None:
    """
    KPI 카드들을 렌더링합니다.

    Args:
        report: 실험 보고서
    """
    values = kpi_values(report)
    cols = st.columns(len(values))
    for col, item in zip(cols, values):
        with col:
            st.metric(label=item["label"], value=item["value"], help=item["help"])


def render_envelope_kpis(report: ExperimentReport, limit: int = 4) -> None:
    """포락선 중 앞쪽 몇 개를 카드로 보여줍니다."""
    envelopes = sorted(report.envelopes.items())[:limit]
    if not envelopes:
        return
    cols = st.columns(len(envelopes))
    for col, (name, value) in zip(cols, envelopes):
        with col:
            st.metric(label=name, value=f"{value:.6g}")
