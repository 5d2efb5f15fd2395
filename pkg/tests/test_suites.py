import pytest

from mtc.harness.suites import CONJECTURE_SUITES, SUITES, SuiteError, rerun_from_echo, run_suite, run_suites
from mtc.io.reports import report_to_json


def test_suite_names():
    assert set(SUITES) == {
        "identities", "inequalities", "constants", "capacity",
        "majorization", "maxprinciple", "lattice", "search",
    }
    assert CONJECTURE_SUITES == ("search",)


@pytest.mark.parametrize("suite", ["identities", "inequalities", "majorization", "maxprinciple"])
def test_proven_suites_pass(suite, config):
    report = run_suite(suite, config=config, seed=1, trials=6, max_depth=1)
    assert report.violations == []
    assert report.exit_code == 0
    assert report.config == {"suite": suite, "seed": 1, "trials": 6, "max_depth": 1, "arity": 2}
    assert "records" in report.tables


def test_identities_records_every_trial(config):
    report = run_suite("identities", config=config, seed=0, trials=5, max_depth=2)
    records = report.tables["records"]
    assert records["trial"].tolist() == [0, 1, 2, 3, 4]
    assert records["n"].tolist() == [1, 2, 3, 1, 2]
    assert report.envelopes["duality_gap"] <= config.identity_tol


def test_constants_suite(config):
    report = run_suite("constants", config=config, seed=2, trials=3, max_depth=1)
    assert report.exit_code == 0
    canonical = report.tables["canonical"].iloc[0]
    for name in ("box", "carleson", "hereditary", "embedding"):
        assert canonical[name] == pytest.approx(4.0, rel=1e-6)
    assert sum(report.counts.get(k, 0) for k in ("exact", "inexact")) + len(report.failures) == 3
    assert not report.tables["theorem_envelopes"].empty


def test_capacity_suite(config):
    report = run_suite("capacity", config=config, seed=3, trials=2, max_depth=1)
    assert report.exit_code == 0
    assert report.envelopes["chain-pair_cap"] == pytest.approx(0.5, abs=1e-6)
    assert report.envelopes["bitree-corner_cap"] == pytest.approx(0.25, abs=1e-6)
    assert set(report.tables["records"]["n"]) == {2, 3}


def test_lattice_suite_structure(config):
    report = run_suite("lattice", config=config, seed=4, trials=50, max_depth=2)
    assert len(report.tables["good_lattice"]) == 2
    assert len(report.tables["kernel"]) == 4
    assert "poisson_max_ratio" in report.envelopes
    assert not any(v.statement == "poisson-growth" for v in report.violations)


def test_search_suite_is_conjecture(config):
    report = run_suite("search", config=config, seed=5, trials=4, max_depth=1)
    assert report.conjecture
    assert report.exit_code == 0
    assert report.envelopes["obstruction_exhaustive_ratio"] >= 1.0
    assert "pair_records" in report.tables


def test_runs_are_reproducible(config):
    first = run_suite("inequalities", config=config, seed=9, trials=4, max_depth=2)
    second = rerun_from_echo(first.config, config)
    assert report_to_json(first) == report_to_json(second)


def test_different_seeds_differ(config):
    a = run_suite("identities", config=config, seed=1, trials=3, max_depth=2)
    b = run_suite("identities", config=config, seed=2, trials=3, max_depth=2)
    assert report_to_json(a) != report_to_json(b)


def test_run_suites(config):
    reports = run_suites(["identities", "identities"], config=config, seed=0, trials=2, max_depth=1)
    assert [r.suite for r in reports] == ["identities", "identities"]


def test_bad_arguments(config):
    with pytest.raises(SuiteError):
        run_suite("nonsense", config=config)
    with pytest.raises(SuiteError):
        run_suite("identities", config=config, trials=0)
    with pytest.raises(SuiteError):
        rerun_from_echo({"seed": 0}, config)
