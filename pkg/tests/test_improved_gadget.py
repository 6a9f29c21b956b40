import math
import sys
from pathlib import Path

import numpy as np
import pytest

project_root = Path(__file__).parent.parent
src_path = project_root / "src"
sys.path.insert(0, str(src_path))

from origon.crease_pattern import Assignment
from origon.critical_angles import critical_angles
from origon.improved_gadget import (
    SELECTORS,
    AngleInterval,
    Balanced,
    ByEpsilon,
    ByPhiL,
    ByPsiL,
    InadmissibleChoiceError,
    LeftCritical,
    MVVariant,
    Orthogonal,
    RightCritical,
    admissible_phi_interval,
    angle_identities,
    build_improved,
    classify,
    epsilon_pair,
    epsilon_range,
    improved_geometry,
    is_extension,
    report_dict,
    resolve,
    side_column,
)
from origon.spec_params import GadgetParams, Side
from origon.validator import kawasaki_check

CUBE = GadgetParams.from_degrees(90, 90, 90)
SKEWED = GadgetParams.from_degrees(90, 45, 120)
TILTED = GadgetParams.from_degrees(100, 80, 85, delta_l=10, delta_r=5)
ZETA_CUBE = math.atan(0.5)


def _middle(params):
    interval = admissible_phi_interval(params)
    return (interval.lo + interval.hi) / 2


# --- Tests for the admissible interval ---
def test_cube_interval_is_symmetric():
    interval = admissible_phi_interval(CUBE)
    assert interval.lo == pytest.approx(math.pi / 2 - 2 * ZETA_CUBE)
    assert interval.hi == pytest.approx(2 * ZETA_CUBE)
    assert not interval.lo_open and not interval.hi_open


def test_skewed_interval_bounds():
    lo, hi = admissible_phi_interval(SKEWED).degrees()
    assert lo == pytest.approx(12.5, abs=2e-2)
    assert hi == pytest.approx(43.062, abs=1e-3)


def test_angle_interval_contains_and_describe():
    interval = AngleInterval(0.0, 1.0, lo_open=True)
    assert not interval.contains(0.0)
    assert interval.contains(1.0)
    assert interval.clamp(2.0) == 1.0
    assert interval.describe().startswith("(")


# --- Tests for resolve ---
def test_selectors_map_names_to_choices():
    assert set(SELECTORS) == {"balanced", "left-critical", "right-critical", "orthogonal"}
    assert SELECTORS["orthogonal"] is Orthogonal


def test_cube_orthogonal_is_balanced():
    assert resolve(Orthogonal(), CUBE) == pytest.approx(math.pi / 4)
    assert resolve(Balanced(), CUBE) == pytest.approx(math.pi / 4)
    assert classify(CUBE, math.pi / 4) == {"orthogonal", "balanced"}


def test_cube_critical_choices():
    left = resolve(LeftCritical(), CUBE)
    right = resolve(RightCritical(), CUBE)
    assert left == pytest.approx(2 * ZETA_CUBE)
    assert right == pytest.approx(math.pi / 2 - 2 * ZETA_CUBE)
    assert classify(CUBE, left) == {"left-critical"}
    assert classify(CUBE, right) == {"right-critical"}


def test_by_psi_zero_is_orthogonal():
    assert resolve(ByPsiL(0.0), CUBE) == pytest.approx(resolve(Orthogonal(), CUBE))


def test_by_epsilon_reaches_orthogonal_and_critical():
    assert resolve(ByEpsilon(Side.L, math.radians(22.5)), CUBE) == pytest.approx(math.pi / 4)
    assert resolve(ByEpsilon(Side.L, 0.0), CUBE) == pytest.approx(2 * ZETA_CUBE)


def test_epsilon_range_of_cube():
    interval = epsilon_range(CUBE, Side.L)
    assert interval.lo == pytest.approx(0.0)
    assert math.degrees(interval.hi) == pytest.approx(45.0)


def test_epsilon_outside_range_raises():
    with pytest.raises(InadmissibleChoiceError) as excinfo:
        resolve(ByEpsilon(Side.R, math.radians(50)), CUBE)
    assert excinfo.value.side is Side.R


def test_skewed_orthogonal_is_inadmissible():
    with pytest.raises(InadmissibleChoiceError) as excinfo:
        resolve(Orthogonal(), SKEWED)
    assert excinfo.value.interval is not None


def test_skewed_balanced_clamps_to_left_critical():
    phi = resolve(Balanced(), SKEWED)
    assert phi == pytest.approx(2 * critical_angles(SKEWED)[0])
    assert classify(SKEWED, phi) == {"left-critical", "balanced"}


def test_left_critical_missing_when_zeta_is_half_gamma():
    params = GadgetParams.from_degrees(90, 90, 90, delta_r=50)
    with pytest.raises(InadmissibleChoiceError, match="No left-critical"):
        resolve(LeftCritical(), params)


def test_out_of_range_phi_raises():
    with pytest.raises(InadmissibleChoiceError):
        resolve(ByPhiL(math.radians(60)), CUBE)


def test_unknown_choice_raises_type_error():
    with pytest.raises(TypeError):
        resolve("orthogonal", CUBE)


def test_balanced_with_delta_is_extension():
    assert is_extension(Balanced(), TILTED)
    assert not is_extension(Balanced(), CUBE)
    assert not is_extension(Orthogonal(), TILTED)


# --- Tests for epsilon ---
def test_cube_orthogonal_epsilon_pair():
    pair = epsilon_pair(CUBE, math.pi / 4)
    assert math.degrees(pair[Side.L]) == pytest.approx(22.5)
    assert math.degrees(pair[Side.R]) == pytest.approx(22.5)


@pytest.mark.parametrize("params", [CUBE, SKEWED, TILTED])
def test_epsilon_sum_is_constant(params):
    for t in (0.1, 0.5, 0.9):
        interval = admissible_phi_interval(params)
        phi = interval.lo + t * (interval.hi - interval.lo)
        pair = epsilon_pair(params, phi)
        expected = params.beta_l + params.beta_r + params.gamma / 2 - math.pi
        assert pair[Side.L] + pair[Side.R] == pytest.approx(expected)


# --- Tests for the construction ---
def test_cube_orthogonal_geometry():
    geom = improved_geometry(CUBE, math.pi / 4)
    assert np.allclose(geom.D, [0.0, -1.0])
    assert geom.psi_l == pytest.approx(0.0)
    assert not geom.is_critical(Side.L)


@pytest.mark.parametrize("params", [CUBE, SKEWED, TILTED])
@pytest.mark.parametrize("t", [0.05, 0.5, 0.95])
def test_f_is_midpoint_of_cd_on_the_e_line(params, t):
    interval = admissible_phi_interval(params)
    geom = improved_geometry(params, interval.lo + t * (interval.hi - interval.lo))
    assert np.allclose(geom.F, (geom.C + geom.D) / 2)
    e_dir = geom.E_r - geom.E_l
    to_f = geom.F - geom.E_l
    assert abs(e_dir[0] * to_f[1] - e_dir[1] * to_f[0]) == pytest.approx(0.0, abs=1e-9)
    assert np.dot(e_dir, geom.D - geom.C) == pytest.approx(0.0, abs=1e-9)


def test_not_constructible_names_the_side():
    with pytest.raises(InadmissibleChoiceError) as excinfo:
        improved_geometry(CUBE, math.radians(60))
    assert excinfo.value.side is Side.L
    assert excinfo.value.margin < 0


def test_cube_non_critical_assignment():
    _, cp = build_improved(CUBE, math.pi / 4)
    assert cp.assignment_of("A", "D") is Assignment.M
    assert cp.assignment_of("E_L", "E_R") is Assignment.V
    for s in ("L", "R"):
        assert cp.assignment_of(f"B_{s}", f"G_{s}") is Assignment.M
        assert cp.assignment_of("D", f"E_{s}") is Assignment.M
        # G_σ splits AE_σ; both halves keep the valley.
        assert not cp.has_edge("A", f"E_{s}")
        assert cp.assignment_of("A", f"G_{s}") is Assignment.V
        assert cp.assignment_of(f"G_{s}", f"E_{s}") is Assignment.V
        assert cp.assignment_along("A", f"E_{s}") is Assignment.V
        assert cp.assignment_of("D", f"G_{s}") is Assignment.V


def test_cube_left_critical_merges_g_into_e():
    geom, cp = build_improved(CUBE, 2 * ZETA_CUBE)
    assert cp.index_of("G_L") == cp.index_of("E_L")
    assert cp.assignment_of("B_L", "E_L") is Assignment.M
    assert cp.assignment_of("D", "E_L") is Assignment.V
    assert side_column(geom, Side.L) == "delta=0,critical"
    assert side_column(geom, Side.R) == "delta=0,non-critical"


@pytest.mark.parametrize(
    "params, choice",
    [
        (CUBE, Orthogonal()),
        (CUBE, LeftCritical()),
        (CUBE, RightCritical()),
        (SKEWED, ByPhiL(math.radians(18))),
        (SKEWED, LeftCritical()),
        (TILTED, Balanced()),
        (TILTED, LeftCritical()),
        (TILTED, RightCritical()),
    ],
)
def test_patterns_are_flat_foldable(params, choice):
    _, cp = build_improved(params, resolve(choice, params))
    assert cp.check_planar() == []
    report = kawasaki_check(cp)
    assert report.ok, [(e.label, e.alternating_sum) for e in report.failures()]


@pytest.mark.parametrize(
    "params, phi_l",
    [(CUBE, math.pi / 4), (CUBE, 2 * ZETA_CUBE), (SKEWED, math.radians(18))],
)
def test_angle_identities_hold(params, phi_l):
    geom = improved_geometry(params, phi_l)
    report = angle_identities(geom)
    assert report.ok, [c.name for c in report.failures()]


@pytest.mark.parametrize("variant", [MVVariant.FIRST, MVVariant.SECOND])
def test_tilted_variants_are_flat_foldable(variant):
    geom, cp = build_improved(TILTED, _middle(TILTED), variant=variant)
    assert side_column(geom, Side.L) == "delta>0,non-critical"
    assert geom.H(Side.L) is not None
    assert cp.metadata["variant"] == variant.value
    assert kawasaki_check(cp).ok


def test_variants_differ_only_in_assignment():
    _, first = build_improved(TILTED, _middle(TILTED), variant=MVVariant.FIRST)
    _, second = build_improved(TILTED, _middle(TILTED), variant=MVVariant.SECOND)
    assert first.assignment_of("B_L", "E_L") is Assignment.M
    assert second.assignment_of("B_L", "E_L") is Assignment.V


def test_debug_lines_add_construction():
    _, cp = build_improved(CUBE, math.pi / 4, debug_lines=True)
    assert cp.assignment_counts()["F"] >= 1


def test_report_dict_summary():
    geom, _ = build_improved(CUBE, math.pi / 4)
    summary = report_dict(geom)
    assert summary["epsilon_l_deg"] == pytest.approx(22.5)
    assert summary["classification"] == ["balanced", "orthogonal"]
    assert summary["zeta_l_deg"] == pytest.approx(math.degrees(ZETA_CUBE))
