import math
import sys
from pathlib import Path

import numpy as np
import pytest

project_root = Path(__file__).parent.parent
src_path = project_root / "src"
sys.path.insert(0, str(src_path))

from origon.crease_pattern import (
    BOUNDARY,
    EDGE,
    INTERIOR,
    SKIP,
    Assignment,
    CreasePattern,
    VertexRole,
)
from origon.spec_params import GadgetParams, Side
from origon.validator import (
    FoldabilityError,
    constructible_by_phi,
    constructible_by_psi,
    flat_extrusion_margins,
    infer_role,
    kawasaki_check,
    psi_margin,
    rho,
    rho_margin,
    sector_angles,
)

CUBE = GadgetParams.from_degrees(90, 90, 90)
M, V, B = Assignment.M, Assignment.V, Assignment.B


def _star(headings_deg, assignments, role=None):
    """A single vertex at the origin with unit creases at the given headings."""
    ends = [[math.cos(math.radians(h)), math.sin(math.radians(h))] for h in headings_deg]
    vertices = np.array([[0.0, 0.0], *ends])
    edges = [(0, i + 1) for i in range(len(ends))]
    roles = [role or VertexRole(kind=INTERIOR)] + [None] * len(ends)
    return CreasePattern(vertices, edges, list(assignments), roles, {"O": 0})


def _upper_wedge(**kwargs):
    return VertexRole(
        kind=BOUNDARY,
        first=np.array([1.0, 0.0]),
        last=np.array([-1.0, 0.0]),
        outside=np.array([0.0, -1.0]),
        **kwargs,
    )


# --- Tests for constructibility ---
def test_rho_vanishes_at_zero_psi():
    assert rho(0.0, 2.0) == pytest.approx(0.0)


def test_rho_requires_r_above_one():
    with pytest.raises(ValueError):
        rho(0.3, 1.0)


def test_cube_orthogonal_is_constructible_on_both_sides():
    verdicts = constructible_by_phi(CUBE, math.pi / 4)
    assert all(v.constructible for v in verdicts.values())
    assert verdicts[Side.L].margin == pytest.approx(math.atan(0.5) - math.pi / 8)


def test_too_large_phi_fails_on_left():
    verdicts = constructible_by_phi(CUBE, math.radians(60))
    assert not verdicts[Side.L].constructible
    assert verdicts[Side.R].constructible


def test_phi_outside_gamma_is_not_constructible():
    verdicts = constructible_by_phi(CUBE, math.radians(95))
    assert not verdicts[Side.R].constructible


def test_psi_form_agrees_with_phi_form():
    for phi_deg in (40.0, 45.0, 52.0, 58.0):
        phi = math.radians(phi_deg)
        by_phi = constructible_by_phi(CUBE, phi)
        by_psi = constructible_by_psi(CUBE, math.pi / 4 - phi)
        for side in (Side.L, Side.R):
            assert by_phi[side].constructible == by_psi[side].constructible


@pytest.mark.parametrize("psi_deg", [-20.0, -5.0, 0.0, 5.0, 20.0])
def test_rho_margin_has_the_sign_of_psi_margin(psi_deg):
    psi = math.radians(psi_deg)
    for side in (Side.L, Side.R):
        a = psi_margin(CUBE, side, psi)
        b = rho_margin(CUBE, side, psi)
        assert (a > 0) == (b > 0)


def test_cube_is_not_a_flat_extrusion():
    margins = flat_extrusion_margins(CUBE, 0.0)
    assert margins[Side.L] == pytest.approx(math.pi / 8)
    assert margins[Side.R] == pytest.approx(math.pi / 8)


# --- Tests for role inference ---
def test_infer_role_by_incident_creases():
    vertices = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    cp = CreasePattern(vertices, [(0, 1), (0, 2), (0, 3)], [B, M, V])
    assert infer_role(cp, 0).kind == EDGE
    assert infer_role(cp, 2).kind == SKIP


# --- Tests for kawasaki_check ---
def test_square_grid_vertex_is_flat_foldable():
    cp = _star([0, 90, 180, 270], [M, M, M, V])
    report = kawasaki_check(cp)
    assert report.ok
    assert len(report.entries) == 1
    entry = report.entry(0)
    assert entry.label == "O"
    assert entry.maekawa is True
    assert entry.degree == 4


def test_unbalanced_vertex_fails():
    cp = _star([0, 60, 180, 270], [M, M, M, V])
    report = kawasaki_check(cp)
    assert not report.ok
    assert report.failures()[0].alternating_sum == pytest.approx(math.radians(-60))
    assert report.to_dict()["ok"] is False


def test_odd_interior_vertex_raises():
    cp = _star([0, 120, 240], [M, M, V])
    with pytest.raises(FoldabilityError, match="Non-manifold"):
        kawasaki_check(cp)


def test_boundary_vertex_without_wedge_raises():
    cp = _star([45, 135], [M, M], role=VertexRole(kind=BOUNDARY))
    with pytest.raises(FoldabilityError, match="wedge"):
        kawasaki_check(cp)


def test_boundary_wedge_sum():
    cp = _star([45, 135], [M, V], role=_upper_wedge())
    report = kawasaki_check(cp)
    assert report.ok
    assert report.entry(0).alternating_sum == pytest.approx(0.0)


def test_boundary_wedge_with_positive_sector():
    cp = _star([30, 135], [M, V], role=_upper_wedge(positive=np.array([0.0, 1.0]), expected=math.pi / 6))
    report = kawasaki_check(cp)
    assert report.ok
    assert report.entry(0).alternating_sum == pytest.approx(math.pi / 6)


def test_creases_outside_the_wedge_are_ignored():
    cp = _star([45, 135, 270], [M, V, M], role=_upper_wedge())
    assert kawasaki_check(cp).ok


def test_skipped_vertices_are_not_reported():
    cp = _star([0, 60, 180, 270], [M, M, M, V], role=VertexRole(kind=SKIP))
    assert kawasaki_check(cp).entries == []


def test_sector_angles_of_grid_vertex():
    cp = _star([0, 90, 180, 270], [M, M, M, V])
    assert sector_angles(cp, 0) == pytest.approx([math.pi / 2] * 4)
