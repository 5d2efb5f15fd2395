import logging
from typing import Optional

import streamlit as st

from mtc.config import ConfigError, load_config
from mtc.harness.report import ExperimentReport
from mtc.harness.suites import CONJECTURE_SUITES, SUITES, SuiteError, run_suite
from mtc.io.reports import ReportFormatError, parse_report, report_to_json
from mtc.ui.kpi import render_envelope_kpis, render_kpis
from mtc.ui.tables import render_envelopes, render_records, render_violations

logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")

# 페이지 설정
st.set_page_config(page_title="MTC Lab", page_icon="🌲", layout="wide")

st.title("🌲 다중 트리 Carleson 실험 보고서")
st.caption("스위트 실행 결과의 포락선, 위반, 기록 표를 살펴봅니다")

st.sidebar.header("⚙️ 설정")

source = st.sidebar.radio(
    "보고서 소스",
    ["보고서 JSON", "스위트 실행"],
    help="저장된 보고서를 열거나 작은 스위트를 바로 실행합니다",
)

report: Optional[ExperimentReport] = None

if source == "보고서 JSON":
    uploaded = st.sidebar.file_uploader("보고서 파일 업로드", type=["json"], help="mtc verify/search 가 쓴 JSON")
    if uploaded is None:
        st.info("보고서 JSON 파일을 업로드하세요.")
        st.stop()
    try:
        report = parse_report(uploaded.getvalue().decode("utf-8"))
        st.sidebar.success(f"{report.suite} 보고서를 불러왔습니다.")
    except (ReportFormatError, UnicodeDecodeError) as e:
        st.sidebar.error(f"보고서 로딩 중 오류가 발생했습니다: {e}")
        st.stop()
else:
    suite = st.sidebar.selectbox("스위트", list(SUITES))
    seed = st.sidebar.number_input("시드", min_value=0, value=0, step=1)
    trials = st.sidebar.number_input("시행 수", min_value=1, max_value=500, value=10, step=1)
    max_depth = st.sidebar.number_input("최대 깊이", min_value=1, max_value=5, value=2, step=1)
    if suite in CONJECTURE_SUITES:
        st.sidebar.warning("추측 스위트는 결과를 보고만 하고 판정하지 않습니다.")
    if not st.sidebar.button("실행"):
        st.info("스위트를 고르고 실행을 누르세요.")
        st.stop()
    try:
        with st.spinner(f"{suite} 실행 중..."):
            report = run_suite(suite, config=load_config(), seed=int(seed), trials=int(trials), max_depth=int(max_depth))
    except (ConfigError, SuiteError) as e:
        st.sidebar.error(f"실행 중 오류가 발생했습니다: {e}")
        st.stop()

render_kpis(report)
render_envelope_kpis(report)

tab_env, tab_vio, tab_rec = st.tabs(["포락선", "위반", "기록"])
with tab_env:
    render_envelopes(report)
with tab_vio:
    render_violations(report)
with tab_rec:
    render_records(report)

if report.failures:
    with st.expander(f"시행 실패 {len(report.failures)}건"):
        st.json(report.failures)

st.sidebar.download_button(
    "보고서 JSON 다운로드",
    data=report_to_json(report),
    file_name=f"{report.suite}.json",
    mime="application/json",
)
