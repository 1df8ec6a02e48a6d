import json

import numpy as np
import pytest

from connforge import Chart, dump_structure, get_entry, list_entries, load_structure, validate_structure
from connforge.exceptions import DomainError, EvaluationError, SingularMetricError, StructureFileError


def test_flat_hermitian_loads_and_validates(flat_2d_data):
    structure = load_structure(flat_2d_data)
    report = structure.validate()

    assert (structure.alpha, structure.epsilon) == (-1, 1)
    assert report.passed
    assert report.signature == (2, 0)
    assert all(check.value == 0 for check in report.checks if check.condition in ("square", "trace", "compatibility"))


def test_definite_metric_with_negative_epsilon_fails(flat_2d_data):
    flat_2d_data.update(geometry="norden", epsilon=-1)
    report = load_structure(flat_2d_data).validate()

    assert not report.passed
    assert not report.check("compatibility").passed
    assert report.check("compatibility").value == pytest.approx(2.0)


def test_scaled_structure_square_defect(flat_2d_data):
    flat_2d_data["J"] = [["0", "-1.1"], ["1.1", "0"]]
    report = load_structure(flat_2d_data).validate()

    assert report.check("square").value == pytest.approx(0.21, abs=1e-12)
    assert not report.passed


def test_positivity_is_checked_for_riemannian_signs(flat_2d_data):
    flat_2d_data["metric"] = [["-1", "0"], ["0", "-1"]]
    report = load_structure(flat_2d_data).validate()

    assert not report.check("positivity").passed
    assert report.check("compatibility").passed


def test_positivity_is_not_checked_for_neutral_signs():
    report = get_entry("flat_norden").structure.validate()
    with pytest.raises(KeyError):
        report.check("positivity")


def test_validation_reports_evaluation_errors(flat_2d_data):
    flat_2d_data["metric"] = [["1/x1", "0"], ["0", "1"]]
    structure = load_structure(flat_2d_data)
    report = structure.validate(points=[(0.0, 0.0), (0.5, 0.5)])

    assert not report.check("evaluation").passed
    assert len(report.errors) == 1


def test_validation_sees_removable_poles(flat_2d_data):
    flat_2d_data["metric"] = [["x1/x1", "0"], ["0", "1"]]
    structure = load_structure(flat_2d_data)
    report = structure.validate(points=[(0.0, 0.5), (0.5, 0.5)])

    assert not report.check("evaluation").passed
    assert len(report.errors) == 1
    with pytest.raises(EvaluationError):
        structure.frame_at((0.0, 0.5))


def test_missing_geometry_label_is_derived(flat_2d_data):
    del flat_2d_data["geometry"]
    flat_2d_data["epsilon"] = -1
    flat_2d_data["metric"] = [["1", "0"], ["0", "-1"]]
    structure = load_structure(flat_2d_data)

    assert structure.geometry == "norden"
    assert json.loads(dump_structure(structure))["geometry"] == "norden"


@pytest.mark.parametrize("name", list_entries())
def test_catalog_entries_validate(name):
    report = get_entry(name).structure.validate(count=50, seed=0, tol=1e-9)
    assert report.passed, report


def test_conflicting_geometry_label_is_rejected(flat_2d_data):
    flat_2d_data["geometry"] = "product"
    with pytest.raises(StructureFileError):
        load_structure(flat_2d_data)


def test_schema_violation_is_rejected(flat_2d_data):
    del flat_2d_data["metric"]
    with pytest.raises(StructureFileError):
        load_structure(flat_2d_data)


def test_wrong_array_size_is_rejected(flat_2d_data):
    flat_2d_data["J"] = [["0", "-1"]]
    with pytest.raises(StructureFileError):
        load_structure(flat_2d_data)


def test_parse_error_keeps_cause(flat_2d_data):
    flat_2d_data["metric"][0][0] = "1 +"
    with pytest.raises(StructureFileError) as info:
        load_structure(flat_2d_data)
    assert "metric[0][0]" in str(info.value)
    assert info.value.__cause__ is not None


def test_asymmetric_metric_is_rejected(flat_2d_data):
    flat_2d_data["metric"] = [["1", "x1"], ["0", "1"]]
    with pytest.raises(StructureFileError):
        load_structure(flat_2d_data)


def test_differently_written_symmetric_entries_are_accepted(flat_2d_data):
    flat_2d_data["metric"] = [["1", "x1*0.5"], ["x1/2", "1"]]
    structure = load_structure(flat_2d_data)
    assert structure.metric[0][1].eval((1.0, 0.0)) == structure.metric[1][0].eval((1.0, 0.0))


def test_invalid_json_file(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{ not json", encoding="utf-8")
    with pytest.raises(StructureFileError):
        load_structure(path)


def test_missing_file():
    with pytest.raises(OSError):
        load_structure("does/not/exist.json")


def test_load_from_file(structure_file, flat_2d_data):
    structure = load_structure(structure_file(flat_2d_data))
    assert structure.name == "flat_2d"


def test_chart_invariants():
    with pytest.raises(ValueError):
        Chart(3, ((0, 1),) * 3)
    with pytest.raises(ValueError):
        Chart(2, ((1, 0), (0, 1)))
    with pytest.raises(ValueError):
        Chart(2, ((0, 1),))


def test_sample_points_degenerate_box():
    assert Chart(2, ((0, 0), (0, 0))).sample_points(1, seed=3) == [(0.0, 0.0)]


def test_sample_points_are_seeded():
    chart = Chart(4, ((-1, 1),) * 4)
    first = chart.sample_points(10, seed=4)

    assert first == chart.sample_points(10, seed=4)
    assert first != chart.sample_points(10, seed=5)
    assert all(chart.contains(point) for point in first)


def test_sample_points_need_a_positive_count():
    with pytest.raises(ValueError):
        Chart(2, ((0, 1), (0, 1))).sample_points(0)


def test_frame_of_constant_structure(flat_2d_data):
    frame = load_structure(flat_2d_data).frame_at((0.1, 0.2))
    assert np.array_equal(frame.dg, np.zeros((2, 2, 2)))
    assert np.array_equal(frame.dJ, np.zeros((2, 2, 2)))
    assert not frame.g.flags.writeable


def test_frame_of_conformal_metric():
    structure = get_entry("hermitian_conformal_4d").structure

    origin = structure.frame_at((0.0, 0.0, 0.0, 0.0))
    assert np.array_equal(origin.g, np.eye(4))
    assert np.allclose(origin.dg[0], 2 * np.eye(4), atol=1e-15)
    assert np.array_equal(origin.dg[1:], np.zeros((3, 4, 4)))

    point = (0.3, -0.2, 0.1, 0.9)
    frame = structure.frame_at(point)
    assert np.allclose(frame.dg[0], 2 * np.exp(0.6) * np.eye(4), rtol=1e-14)


def test_frame_outside_domain():
    with pytest.raises(DomainError):
        get_entry("flat_hermitian").structure.frame_at((2.0, 0.0, 0.0, 0.0))


def test_frame_with_singular_metric(flat_2d_data):
    flat_2d_data["metric"] = [["x1", "0"], ["0", "1"]]
    with pytest.raises(SingularMetricError):
        load_structure(flat_2d_data).frame_at((0.0, 0.0))


def test_frame_at_a_pole(flat_2d_data):
    flat_2d_data["J"] = [["0", "-1"], ["1/x2", "0"]]
    with pytest.raises(EvaluationError):
        load_structure(flat_2d_data).frame_at((0.5, 0.0))


def test_polar_frame_derivatives(polar_structure):
    frame = polar_structure.frame_at((2.0, 0.0))
    assert frame.dg[0, 1, 1] == 4.0
    assert frame.dJ[0, 0, 1] == -1.0
    assert frame.dJ[0, 1, 0] == pytest.approx(-0.25)


@pytest.mark.parametrize("name", ["flat_hermitian", "flat_norden", "flat_product", "flat_para"])
def test_flat_entries_are_kahler_type(name):
    assert get_entry(name).structure.classify_kahler_type() == "kahler-type"


@pytest.mark.parametrize("name", ["hermitian_conformal_4d", "para_hermitian_4d", "norden_4d",
                                  "product_riemannian_4d"])
def test_curved_entries_are_not_kahler_type(name):
    assert get_entry(name).structure.classify_kahler_type() == "non-kahler-type"


def test_polar_structure_is_kahler_type(polar_structure):
    assert polar_structure.classify_kahler_type() == "kahler-type"


def test_dump_and_reload(tmp_path):
    structure = get_entry("para_hermitian_4d").structure
    path = tmp_path / "para.json"
    text = dump_structure(structure, path)

    assert json.loads(text)["geometry"] == "para-hermitian"
    reloaded = load_structure(path)
    point = (0.2, -0.4, 0.6, 0.1)
    assert np.array_equal(reloaded.frame_at(point).dg, structure.frame_at(point).dg)
    assert np.array_equal(reloaded.frame_at(point).J, structure.frame_at(point).J)


def test_validate_structure_matches_method(polar_structure):
    points = polar_structure.sample_points(7, seed=3)
    assert validate_structure(polar_structure, points) == polar_structure.validate(points)
    assert validate_structure(polar_structure, points).signature == (2, 0)
