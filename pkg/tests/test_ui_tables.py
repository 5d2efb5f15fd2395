import pytest

from mtc.harness.report import ExperimentReport
from mtc.ui.kpi import kpi_values
from mtc.ui.tables import envelope_table, record_table, violations_table


@pytest.fixture
def report():
    rep = ExperimentReport(suite="majorization", config={"suite": "majorization", "seed": 7, "trials": 1200})
    rep.record_envelope("T2_normalized_cost", 12.5)
    rep.count("exact", 4)
    rep.add_violation("bitree-domination", 3, "최소 비율 0.9")
    rep.add_violation("1tree-cost", 1, "17 > 16")
    rep.add_table("records", [{"trial": k, "witness": [k, k + 1]} for k in range(5)])
    return rep


def test_kpi_values(report):
    values = {item["label"]: item["value"] for item in kpi_values(report)}
    assert values["스위트"] == "majorization"
    assert values["시행 수"] == "1,200"
    assert values["위반"] == "2"
    assert values["시행 실패"] == "0"
    assert values["판정"] == "위반"


def test_kpi_status_for_conjecture():
    rep = ExperimentReport(suite="search", config={}, conjecture=True)
    rep.add_violation("pair-domination", 0, "x")
    status = {item["label"]: item["value"] for item in kpi_values(rep)}["판정"]
    assert status == "추측 (보고만)"


def test_envelope_table(report):
    table = envelope_table(report)
    assert list(table.columns) == ["종류", "항목", "값"]
    only_envelopes = envelope_table(report, kind="envelope")
    assert only_envelopes["항목"].tolist() == ["T2_normalized_cost"]
    counts = envelope_table(report, kind="count")
    assert set(counts["항목"]) == {"exact", "violations", "failures"}


def test_violations_table_sorted(report):
    table = violations_table(report)
    assert list(table.columns) == ["명제", "시행", "내용"]
    assert table["명제"].tolist() == ["1tree-cost", "bitree-domination"]


def test_record_table(report):
    table = record_table(report, "records", max_rows=3)
    assert len(table) == 3
    assert table["witness"].tolist() == ["[0,1]", "[1,2]", "[2,3]"]
    assert record_table(report, "missing").empty
