import json

import pytest
from pydantic import ValidationError

from connforge import Verifier, dumps_json, get_entry, load_structure
from connforge.utils import Settings, resolve_workers
from connforge.verify.suite import RECORD_ORDER


def _without_timestamp(report) -> dict:
    return report.model_dump(exclude={"timestamp"})


def _ids(report) -> list[str]:
    return [record.id for record in report.records]


@pytest.mark.parametrize("name", ["flat_hermitian", "hermitian_conformal_4d", "norden_4d",
                                  "product_riemannian_4d", "para_hermitian_4d"])
def test_catalog_entries_pass(name):
    report = Verifier(points=6, seed=2).verify_entry(name)

    assert report.passed, [record for record in report.failed()]
    assert report.structure == name
    assert report.points == 6
    assert _ids(report) == [id for id in RECORD_ORDER if id in _ids(report)]


def test_records_follow_applicability():
    verifier = Verifier(points=4, synthetic=2)

    hermitian = verifier.verify_entry("hermitian_conformal_4d")
    assert _ids(hermitian) == ["G1", "1", "2", "3", "4", "5", "6", "7", "8", "9", "11", "12"]
    assert not hermitian.kahler_type

    flat = verifier.verify_entry("flat_hermitian")
    assert _ids(flat) == RECORD_ORDER
    assert flat.kahler_type

    para = verifier.verify_entry("para_hermitian_4d")
    assert _ids(para) == ["G1", "1", "2", "3", "4", "5", "6", "7", "9", "12"]

    norden = verifier.verify_entry("norden_4d")
    assert _ids(norden) == ["G1", "1", "2", "3", "4", "5", "6", "7"]
    assert norden.record("7").violations == 0


def test_solver_statuses_are_counted():
    report = Verifier(points=5, synthetic=1).verify_entry("hermitian_conformal_4d")
    assert report.solver_statuses["chern"] == {"unique": 5, "none": 0, "underdetermined": 0}
    assert report.solver_statuses["skew"]["unique"] == 5

    report = Verifier(points=5, synthetic=1).verify_entry("norden_4d")
    assert report.solver_statuses["chern"]["unique"] == 0
    assert report.solver_statuses["skew"]["none"] == 5


def test_same_seed_is_deterministic():
    first = Verifier(points=4, seed=9, synthetic=2).verify_entry("para_hermitian_4d")
    second = Verifier(points=4, seed=9, synthetic=2).verify_entry("para_hermitian_4d")
    assert _without_timestamp(first) == _without_timestamp(second)


def test_other_seed_gives_same_verdicts():
    first = Verifier(points=4, seed=1, synthetic=2).verify_entry("hermitian_conformal_4d")
    second = Verifier(points=4, seed=2, synthetic=2).verify_entry("hermitian_conformal_4d")

    assert first.passed and second.passed
    assert [(r.id, r.passed) for r in first.records] == [(r.id, r.passed) for r in second.records]


def test_threads_do_not_change_the_result():
    serial = Verifier(points=6, seed=4, synthetic=2, workers=1).verify_entry("flat_norden")
    threaded = Verifier(points=6, seed=4, synthetic=2, workers=3).verify_entry("flat_norden")
    assert _without_timestamp(serial) == _without_timestamp(threaded)


def test_tiny_tolerance_fails_without_raising():
    report = Verifier(points=3, synthetic=1, tolerance=1e-300).verify_entry("hermitian_conformal_4d")
    assert not report.passed
    assert report.failed()
    assert all(record.tolerance == 1e-300 for record in report.records)


def test_invalid_structure_fails_first_record(flat_2d_data):
    flat_2d_data["J"] = [["0", "-1.1"], ["1.1", "0"]]
    report = Verifier(points=3, synthetic=1).verify(load_structure(flat_2d_data))

    assert not report.passed
    assert not report.record("G1").passed
    assert report.record("G1").max_defect == pytest.approx(0.21)


def test_curved_two_dimensional_structure(polar_structure):
    report = Verifier(points=5, synthetic=2).verify(polar_structure)

    assert report.passed, [record for record in report.failed()]
    assert report.kahler_type
    assert "10" in _ids(report) and "12" in _ids(report)


def test_unevaluable_points_are_violations():
    structure = load_structure({"name": "overflow", "alpha": -1, "epsilon": 1, "dimension": 2,
                                "domain": [[-1, 1], [-1, 1]], "metric": [["1", "0"], ["0", "1"]],
                                "J": [["0", "-exp(exp(exp(x1 + 5)))"], ["1", "0"]]})
    report = Verifier(points=2, synthetic=1).verify(structure)

    assert not report.passed
    assert report.record("G1").violations >= 1


def test_verify_all_orders_reports():
    summary = Verifier(points=2, synthetic=1).verify_all(["norden_4d", "flat_hermitian"])

    assert [report.structure for report in summary.reports] == ["flat_hermitian", "norden_4d"]
    assert summary.passed
    assert summary.points == 2


def test_report_serializes():
    report = Verifier(points=2, synthetic=1).verify_entry("flat_para")
    data = json.loads(dumps_json(report))

    assert data["structure"] == "flat_para"
    assert data["records"][0]["id"] == "G1"
    assert set(data["solver_statuses"]) == {"chern", "skew"}


def test_verifier_validation():
    with pytest.raises(ValidationError):
        Verifier(points=0)
    with pytest.raises(ValidationError):
        Verifier(tolerance=2.0)
    assert Verifier(workers=0).workers == Settings(workers=0).workers == resolve_workers(-3) >= 1
    assert Verifier(workers=3).workers == 3


def test_from_settings(monkeypatch):
    monkeypatch.setenv("CONNFORGE_TOL", "1e-8")
    verifier = Verifier.from_settings(Settings.from_env(points=3, seed=5))
    assert (verifier.points, verifier.seed, verifier.tolerance) == (3, 5, 1e-8)
