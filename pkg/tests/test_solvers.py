import numpy as np
import pytest

from connforge import (PointFrame, chern_connection, get_entry, levi_civita, nabla_g_defect, nabla_J_defect,
                       skew_torsion, solve_chern, solve_skew, three_form_basis, torsion_condition_defect)
from connforge.calculus.tensor import max_abs, total_antisymmetry_defect
from connforge.exceptions import UnavailableConnectionError

J0 = np.array([[0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0]], dtype=float)


def test_chern_on_flat_hermitian_is_zero():
    frame = PointFrame.from_arrays((0.0, 0.0, 0.0, 0.0), np.eye(4), J0, alpha=-1, epsilon=1)
    report = solve_chern(frame)

    assert report.status == "unique"
    assert report.kernel_dim == 0
    assert report.rank == 64
    assert max_abs(report.solution.gamma) <= 1e-14
    assert report.solution.provenance == "chern"


@pytest.mark.parametrize("name", ["hermitian_conformal_4d", "para_hermitian_4d"])
def test_chern_certificate(name, catalog_frames):
    for frame in catalog_frames(name, 20):
        report = solve_chern(frame)
        chern = report.solution

        assert report.status == "unique"
        assert report.residual <= 1e-9
        assert nabla_g_defect(chern, frame) <= 1e-9
        assert nabla_J_defect(chern, frame) <= 1e-9
        assert torsion_condition_defect(chern, frame) <= 1e-9


@pytest.mark.parametrize("name", ["norden_4d", "product_riemannian_4d", "flat_norden", "flat_product"])
def test_chern_is_never_unique_when_alpha_epsilon_is_one(name, catalog_frames):
    for frame in catalog_frames(name, 20):
        assert solve_chern(frame).status != "unique"


def test_chern_connection_raises_with_report():
    frame = get_entry("product_riemannian_4d").structure.frame_at((0.1, 0.2, 0.3, 0.4))
    with pytest.raises(UnavailableConnectionError) as info:
        chern_connection(frame)
    assert info.value.report.status in ("none", "underdetermined")
    assert "chern" in str(info.value).lower()


def test_three_form_basis():
    basis = three_form_basis(4)
    assert basis.shape == (4, 4, 4, 4)
    assert all(total_antisymmetry_defect(element) == 0.0 for element in basis)
    assert basis[0, 0, 1, 2] == 1.0 and basis[0, 1, 0, 2] == -1.0
    assert three_form_basis(2).shape == (0, 2, 2, 2)


@pytest.mark.parametrize("name", ["flat_hermitian", "flat_norden", "flat_product", "flat_para"])
def test_skew_on_kahler_type_is_zero(name, catalog_frames):
    for frame in catalog_frames(name, 3):
        report = solve_skew(frame)
        assert report.status == "unique"
        assert max_abs(report.solution.components) <= 1e-14


@pytest.mark.parametrize("name", ["hermitian_conformal_4d", "para_hermitian_4d"])
def test_skew_exists_with_nonzero_form(name, catalog_frames):
    for frame in catalog_frames(name, 20):
        report = solve_skew(frame)
        H = report.solution

        assert report.status == "unique"
        assert report.kernel_dim == 0
        assert max_abs(H.components) > 0.1
        assert total_antisymmetry_defect(H.components) == 0.0


@pytest.mark.parametrize("name", ["norden_4d", "product_riemannian_4d"])
def test_skew_is_inconsistent(name, catalog_frames):
    for frame in catalog_frames(name, 20):
        report = solve_skew(frame)
        assert report.status == "none"
        assert report.residual > 1e-6


def test_skew_inconsistent_for_random_structure_derivative():
    # constant metric and J with a generic derivative of J that keeps J^2 = -Id to first order
    rng = np.random.default_rng(4)
    dJ = np.zeros((4, 4, 4))
    for i in range(4):
        B = rng.standard_normal((4, 4))
        dJ[i] = B @ J0 - J0 @ B
    frame = PointFrame.from_arrays((0.0, 0.0, 0.0, 0.0), np.eye(4), J0, alpha=-1, epsilon=1, dJ=dJ)

    report = solve_skew(frame)
    assert report.status == "none"
    assert report.residual > 1e-6

    with pytest.raises(UnavailableConnectionError):
        skew_torsion(frame)


def test_skew_in_dimension_two_has_no_unknowns(polar_structure):
    report = solve_skew(polar_structure.frame_at((2.0, 0.0)))
    assert report.unknowns == 0
    assert report.status == "unique"
    assert max_abs(report.solution.components) == 0.0


def test_report_summary_omits_solution():
    frame = get_entry("hermitian_conformal_4d").structure.frame_at((0.0, 0.0, 0.0, 0.0))
    summary = solve_chern(frame).to_dict()
    assert summary["status"] == "unique"
    assert summary["unknowns"] == 64 and summary["equations"] == 192
    assert "solution" not in summary


def test_levi_civita_is_chern_on_polar(polar_structure):
    frame = polar_structure.frame_at((1.5, 0.3))
    report = solve_chern(frame)
    assert report.status == "unique"
    assert report.solution.distance(levi_civita(frame)) <= 1e-12
