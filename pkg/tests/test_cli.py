import json

import pytest

from mtc.cli import EXIT_ERROR, EXIT_OK, build_parser, main
from mtc.io.instances import canonical_dumps, load_instance, save_instance
from mtc.io.reports import load_report
from mtc.transform.generate import canonical_instance


@pytest.fixture
def canonical_path(tmp_path):
    return save_instance(canonical_instance(), tmp_path / "canonical.json")


def _stdout_json(capsys):
    return json.loads(capsys.readouterr().out)


def test_parser_requires_command():
    with pytest.raises(SystemExit):
        build_parser().parse_args([])
    with pytest.raises(SystemExit):
        build_parser().parse_args(["capacity", "--instance", "x.json"])


def test_gen_to_stdout_and_file(capsys, tmp_path):
    assert main(["gen", "--n", "2", "--depth", "1", "--seed", "3"]) == EXIT_OK
    doc = _stdout_json(capsys)
    assert doc["format"] == "mtc-instance"
    assert doc["meta"]["seed"] == 3
    assert len(doc["mu"]) == 9

    out = tmp_path / "inst.json"
    assert main(["gen", "--n", "1", "--depth", "2", "--weight", "from-s(0.5)", "--out", str(out)]) == EXIT_OK
    assert load_instance(out).t.shape == (7,)


def test_gen_bad_spec_is_input_error(capsys):
    assert main(["gen", "--measure", "dirac"]) == EXIT_ERROR
    assert "GenerationError" in capsys.readouterr().err


def test_budget_env_var(monkeypatch, capsys):
    monkeypatch.setenv("MTC_BUDGET_VERTICES", "10")
    assert main(["gen", "--n", "2", "--depth", "2"]) == EXIT_ERROR
    assert "BudgetExceededError" in capsys.readouterr().err
    monkeypatch.setenv("MTC_BUDGET_VERTICES", "abc")
    assert main(["gen"]) == EXIT_ERROR


def test_constants_canonical(capsys, canonical_path):
    assert main(["constants", "--instance", str(canonical_path), "--exact"]) == EXIT_OK
    doc = _stdout_json(capsys)
    for name in ("box", "carleson", "hereditary", "embedding"):
        assert doc["constants"][name] == pytest.approx(4.0, rel=1e-6)
    assert doc["constants"]["chain_holds"] is True


def test_constants_exact_cap(capsys, tmp_path):
    path = tmp_path / "big.json"
    assert main(["gen", "--n", "2", "--depth", "2", "--out", str(path)]) == EXIT_OK
    assert main(["constants", "--instance", str(path), "--exact"]) == EXIT_ERROR


def test_bad_instance_file(capsys, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(canonical_dumps({"format": "mtc-instance", "version": 1, "trees": [[None, 0]]}))
    assert main(["constants", "--instance", str(path)]) == EXIT_ERROR
    assert main(["constants", "--instance", str(tmp_path / "missing.json")]) == EXIT_ERROR
    assert "InstanceFormatError" in capsys.readouterr().err


def test_capacity_commands(capsys, tmp_path):
    inst = tmp_path / "chain.json"
    inst.write_text(canonical_dumps({
        "format": "mtc-instance",
        "version": 1,
        "trees": [[None, 0]],
        "weight": [[1.0, 1.0]],
        "mu": [0.0, 1.0],
    }))
    vset = tmp_path / "set.json"
    vset.write_text(canonical_dumps({"format": "mtc-set", "version": 1, "vertices": [[1]]}))
    assert main(["capacity", "--instance", str(inst), "--set", str(vset)]) == EXIT_OK
    doc = _stdout_json(capsys)
    assert doc["cap"] == pytest.approx(0.5, abs=1e-8)
    assert doc["set_size"] == 1

    # 𝐕^μ = (1, 2): {𝐕 > 1.5} = {잎}
    assert main(["capacity", "--instance", str(inst), "--level", "1.5"]) == EXIT_OK
    doc = _stdout_json(capsys)
    assert doc["set_size"] == 1
    assert doc["cap"] == pytest.approx(0.5, abs=1e-8)

    assert main(["capacity", "--instance", str(inst), "--level", "5"]) == EXIT_OK
    assert _stdout_json(capsys)["cap"] == 0.0


def test_capacity_grid(capsys, canonical_path):
    assert main(["capacity", "--instance", str(canonical_path), "--grid", "1", "2"]) == EXIT_OK
    doc = _stdout_json(capsys)
    assert "cap" in doc["columns"]


def test_majorize(capsys, tmp_path):
    path = tmp_path / "one.json"
    assert main(["gen", "--n", "1", "--depth", "3", "--measure", "leaf-random(3)", "--seed", "2", "--out", str(path)]) == EXIT_OK
    assert main(["majorize", "--instance", str(path)]) == EXIT_OK
    cert = _stdout_json(capsys)["certificate"]
    assert cert["variant"] == "1tree"

    four = tmp_path / "four.json"
    assert main(["gen", "--n", "4", "--depth", "1", "--out", str(four)]) == EXIT_OK
    assert main(["majorize", "--instance", str(four)]) == EXIT_ERROR


def test_surrogate(capsys, canonical_path):
    assert main(["surrogate", "--instance", str(canonical_path), "--delta", "0.5", "1.0"]) == EXIT_OK
    records = _stdout_json(capsys)["records"]
    assert len(records) == 2


def test_verify_and_report(capsys, tmp_path):
    out_dir = tmp_path / "reports"
    code = main([
        "verify", "--suite", "identities", "--trials", "3", "--max-depth", "1",
        "--seed", "4", "--out", str(out_dir), "--xlsx", str(tmp_path / "xlsx"),
    ])
    assert code == EXIT_OK
    report_path = out_dir / "identities.json"
    report = load_report(report_path)
    assert report.config["seed"] == 4
    assert (tmp_path / "xlsx" / "identities.xlsx").exists()

    csv_dir = tmp_path / "csv"
    assert main(["report", "--in", str(report_path), "--out", str(csv_dir)]) == EXIT_OK
    assert (csv_dir / "identities_records.csv").exists()
    assert (csv_dir / "identities_summary.csv").exists()


def test_verify_multiple_suites_needs_directory(capsys, tmp_path):
    code = main(["verify", "--suite", "identities", "inequalities", "--out", str(tmp_path / "r.json")])
    assert code == EXIT_ERROR


def test_search_always_exits_zero(capsys):
    assert main(["search", "--trials", "2", "--max-depth", "1"]) == EXIT_OK
    doc = _stdout_json(capsys)
    assert doc["suite"] == "search"
    assert doc["conjecture"] is True
