import math

import pandas as pd
import pytest

from mtc.harness.report import ExperimentReport
from mtc.io.excel import SHEET_NAME_MAX, ExcelExportError, export_report_xlsx, load_report_sheets
from mtc.io.reports import (
    ReportFormatError,
    frame_to_csv,
    load_report,
    parse_report,
    report_frames,
    report_to_json,
    save_report,
    write_csv_tables,
)


@pytest.fixture
def report():
    rep = ExperimentReport(suite="constants", config={"suite": "constants", "seed": 3, "trials": 2, "max_depth": None})
    rep.record_envelope("hc_over_c", 1.0)
    rep.record_envelope("hc_over_c", 1.25)
    rep.record_envelope("hc_over_c", 1.1)
    rep.record_envelope("ignored", float("nan"))
    rep.record_floor("min_gap", 0.5)
    rep.record_floor("min_gap", 0.25)
    rep.count("exact")
    rep.count("exact", 2)
    rep.add_table("trials", [
        {"trial": 0, "box": 2.0, "witness": (0, 1)},
        {"trial": 1, "box": 4.0, "witness": (1, 1)},
    ])
    return rep


def test_envelopes_and_counts(report):
    assert report.envelopes == {"hc_over_c": 1.25, "min_gap": 0.25}
    assert report.counts == {"exact": 3}
    assert report.exit_code == 0
    summary = report.summary_frame()
    assert list(summary.columns) == ["kind", "name", "value"]
    assert summary.loc[summary["name"] == "violations", "value"].item() == 0.0


def test_violation_sets_exit_code(report):
    report.add_violation("ordering", 1, "box > carleson", {"seed": 42})
    assert report.exit_code == 1
    assert report.violations_frame().to_dict("records") == [
        {"statement": "ordering", "trial": 1, "detail": "box > carleson"}
    ]


def test_conjecture_reports_never_fail():
    rep = ExperimentReport(suite="search", config={}, conjecture=True)
    rep.add_violation("bitree-pair", 0, "ratio 3.2")
    assert rep.proven_violations == 0
    assert rep.exit_code == 0
    assert len(rep.violations) == 1


def test_failures_are_recorded(report):
    report.add_failure(4, ValueError("no convergence"))
    assert report.failures == [{"trial": 4, "error": "ValueError", "message": "no convergence"}]
    assert report.exit_code == 0


def test_json_roundtrip(report, tmp_path):
    report.add_violation("ordering", 1, "box > carleson", {"seed": 42})
    text = report_to_json(report)
    parsed = parse_report(text)
    assert report_to_json(parsed) == text
    assert parsed.envelopes == report.envelopes
    assert parsed.violations[0].witness == {"seed": 42}
    assert parsed.tables["trials"]["witness"].tolist() == [[0, 1], [1, 1]]

    path = save_report(report, tmp_path / "r.json")
    assert load_report(path).suite == "constants"


def test_parse_report_errors(report):
    with pytest.raises(ReportFormatError):
        parse_report("[]")
    with pytest.raises(ReportFormatError):
        parse_report("{")
    text = report_to_json(report)
    with pytest.raises(ReportFormatError):
        parse_report(text.replace('"version":1', '"version":2'))
    with pytest.raises(ReportFormatError):
        parse_report(text.replace('"suite":"constants",', ""))


def test_csv_tables(report, tmp_path):
    paths = write_csv_tables(report, tmp_path / "out")
    names = sorted(p.name for p in paths)
    assert names == ["constants_summary.csv", "constants_trials.csv", "constants_violations.csv"]
    trials = pd.read_csv(tmp_path / "out" / "constants_trials.csv")
    assert trials["box"].tolist() == [2.0, 4.0]
    assert trials["witness"].tolist() == ["[0,1]", "[1,1]"]


def test_csv_float_format():
    text = frame_to_csv(pd.DataFrame({"x": [0.1, 1.0 / 3.0]}))
    assert text.splitlines() == ["x", "0.10000000000000001", "0.33333333333333331"]


def test_report_frames_order(report):
    assert list(report_frames(report)) == ["summary", "violations", "trials"]


def test_excel_export(report, tmp_path):
    report.add_table("a_very_long_table_name_that_exceeds_the_sheet_limit", [{"x": 1}])
    path = export_report_xlsx(report, tmp_path / "report.xlsx")
    sheets = load_report_sheets(path)
    assert {"summary", "violations", "trials"} <= set(sheets)
    assert all(len(name) <= SHEET_NAME_MAX for name in sheets)
    trials = sheets["trials"]
    assert trials["box"].tolist() == [2.0, 4.0]
    summary = sheets["summary"]
    value = summary.loc[summary["name"] == "hc_over_c", "value"].item()
    assert math.isclose(value, 1.25)


def test_excel_errors(report, tmp_path):
    with pytest.raises(ExcelExportError):
        export_report_xlsx(report, tmp_path / "missing_dir" / "report.xlsx")
    with pytest.raises(ExcelExportError):
        load_report_sheets(tmp_path / "nope.xlsx")
