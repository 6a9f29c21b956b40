import math
import sys
from pathlib import Path

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

project_root = Path(__file__).parent.parent
src_path = project_root / "src"
sys.path.insert(0, str(src_path))

from origon.critical_angles import (
    check_zeta_theorems,
    critical_angles,
    zeta,
    zeta_geometric,
)
from origon.spec_params import (
    GadgetParams,
    InvalidParametersError,
    Side,
    require_derived,
    validate,
)

CUBE = GadgetParams.from_degrees(90, 90, 90)
SKEWED = GadgetParams.from_degrees(90, 45, 120)
TILTED = GadgetParams.from_degrees(100, 80, 85, delta_l=10, delta_r=5)


def _comfortably_valid(params: GadgetParams, slack_deg: float = 2.0) -> bool:
    report = validate(params)
    slack = math.radians(slack_deg)
    return report.ok and all(c.margin > slack for c in report.checks if c.name != "(iii.a)")


# --- Tests for critical_angles ---
def test_cube_critical_angles():
    zl, zr = critical_angles(CUBE)
    assert zl == pytest.approx(math.atan(0.5))
    assert zr == pytest.approx(math.atan(0.5))


def test_skewed_critical_angles():
    zl, zr = critical_angles(SKEWED)
    assert math.degrees(2 * zl) == pytest.approx(43.062, abs=1e-3)
    assert math.degrees(zr) == pytest.approx(46.25, abs=1e-2)


def test_zeta_by_side():
    assert zeta(SKEWED, Side.R) == pytest.approx(critical_angles(SKEWED)[1])


def test_steep_side_clamps_to_half_gamma():
    # β_R + γ/2 + δ_L ≥ π makes the bound γ/2
    params = GadgetParams.from_degrees(90, 90, 90, delta_l=50)
    _, zr = critical_angles(params)
    assert zr == pytest.approx(params.gamma / 2)


def test_invalid_params_raise():
    with pytest.raises(InvalidParametersError):
        critical_angles(GadgetParams.from_degrees(90, 30, 50))


# --- Tests for the geometric construction ---
@pytest.mark.parametrize("params", [CUBE, SKEWED, TILTED])
def test_geometric_matches_closed_form(params):
    construction = zeta_geometric(params)
    zl, zr = critical_angles(params)
    assert construction.zeta(Side.L) == pytest.approx(zl, abs=1e-9)
    assert construction.zeta(Side.R) == pytest.approx(zr, abs=1e-9)


@pytest.mark.parametrize("params", [CUBE, SKEWED, TILTED])
def test_theorem_checks_pass(params):
    report = check_zeta_theorems(params)
    assert report.ok, [c.name for c in report.failures()]


def test_q_matches_conventional_d_for_cube():
    report = check_zeta_theorems(CUBE)
    assert report.get("Q_matches_conventional_D_L").passed
    assert report.get("Q_matches_conventional_D_R").passed


@given(
    st.floats(30.0, 170.0),
    st.floats(20.0, 170.0),
    st.floats(20.0, 170.0),
)
def test_zeta_sum_exceeds_half_gamma(alpha, beta_l, beta_r):
    params = GadgetParams.from_degrees(alpha, beta_l, beta_r)
    assume(_comfortably_valid(params))
    zl, zr = critical_angles(params)
    assert zl + zr > params.gamma / 2


@given(
    st.floats(30.0, 170.0),
    st.floats(20.0, 170.0),
    st.floats(20.0, 170.0),
    st.floats(0.0, 20.0),
    st.floats(0.0, 20.0),
)
def test_closed_form_agrees_with_construction(alpha, beta_l, beta_r, delta_l, delta_r):
    params = GadgetParams.from_degrees(alpha, beta_l, beta_r, delta_l, delta_r)
    assume(_comfortably_valid(params))
    assume(params.beta_l + params.gamma / 2 + params.delta_r < math.pi - 0.05)
    assume(params.beta_r + params.gamma / 2 + params.delta_l < math.pi - 0.05)
    assume(require_derived(params).r > 1.01)
    zl, zr = critical_angles(params)
    construction = zeta_geometric(params)
    assert abs(construction.zeta(Side.L) - zl) < 1e-7
    assert abs(construction.zeta(Side.R) - zr) < 1e-7
