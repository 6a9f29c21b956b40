import math
import sys
from pathlib import Path

import pytest

project_root = Path(__file__).parent.parent
src_path = project_root / "src"
sys.path.insert(0, str(src_path))

from origon.geom_core import Tolerance
from origon.spec_params import (
    CONVENTIONAL,
    IMPROVED,
    CheckReport,
    GadgetParams,
    InvalidParametersError,
    Side,
    derive,
    gamma_side,
    height_coefficient,
    require_derived,
    require_valid,
    validate,
)

CUBE = GadgetParams.from_degrees(90, 90, 90)
SKEWED = GadgetParams.from_degrees(90, 45, 120)
TILTED = GadgetParams.from_degrees(100, 80, 85, delta_l=10, delta_r=5)


# --- Tests for GadgetParams ---
def test_gamma_of_cube_is_right_angle():
    assert math.degrees(CUBE.gamma) == pytest.approx(90.0)
    assert math.degrees(SKEWED.gamma) == pytest.approx(105.0)


def test_mirrored_swaps_sides():
    mirrored = TILTED.mirrored()
    assert mirrored.beta_l == TILTED.beta_r
    assert mirrored.delta_r == TILTED.delta_l
    assert mirrored.gamma == pytest.approx(TILTED.gamma)


def test_side_accessors_and_signs():
    assert SKEWED.beta(Side.L) == pytest.approx(math.radians(45))
    assert Side.L.other is Side.R
    assert Side.L.sign == -1 and Side.R.sign == 1


def test_to_degrees_dict_round_trips():
    data = TILTED.to_degrees_dict()
    assert data["delta_l"] == pytest.approx(10.0)
    again = GadgetParams.from_degrees(**data)
    assert again.beta_r == pytest.approx(TILTED.beta_r)
    assert again.delta_r == pytest.approx(TILTED.delta_r)


def test_scaled_keeps_angles():
    scaled = CUBE.scaled(3.0)
    assert scaled.ab_length == 3.0
    assert scaled.alpha == CUBE.alpha


# --- Tests for validate ---
def test_cube_is_valid_in_both_modes():
    assert validate(CUBE, CONVENTIONAL).ok
    assert validate(CUBE, IMPROVED).ok


def test_condition_i_failure_is_named():
    report = validate(GadgetParams.from_degrees(90, 30, 50))
    assert not report.ok
    assert "(i)" in [c.name for c in report.failures()]


def test_conventional_mode_requires_zero_delta():
    report = validate(TILTED, CONVENTIONAL)
    assert "delta_zero" in [c.name for c in report.failures()]
    assert validate(TILTED, IMPROVED).ok


def test_negative_delta_fails_improved_mode():
    report = validate(GadgetParams.from_degrees(90, 90, 90, delta_l=-5))
    assert "(iii.a)" in [c.name for c in report.failures()]


def test_wide_top_fails_iii_c():
    # γ + δ_L + δ_R ≥ π
    report = validate(GadgetParams.from_degrees(60, 60, 60, delta_l=5))
    assert "(iii.c)" in [c.name for c in report.failures()]


def test_unknown_mode_raises():
    with pytest.raises(ValueError):
        validate(CUBE, "origami")


def test_require_valid_raises_with_condition():
    with pytest.raises(InvalidParametersError) as excinfo:
        require_valid(GadgetParams.from_degrees(90, 30, 50))
    assert excinfo.value.condition == "(i)"
    assert excinfo.value.margin < 0


def test_marginal_condition_logs_warning(caplog):
    tol = Tolerance()
    report = CheckReport(title="demo")
    with caplog.at_level("WARNING"):
        check = report.add("edge", tol.angle_eps / 2, tol)
    assert check.marginal
    assert "is marginal" in caplog.text


def test_check_report_get_and_dict():
    report = validate(CUBE)
    assert report.get("(i)").passed
    data = report.to_dict()
    assert data["ok"] is True
    with pytest.raises(KeyError):
        report.get("missing")


def test_informational_checks_do_not_fail_report():
    tol = Tolerance()
    report = CheckReport(title="demo")
    report.add("info", -1.0, tol, informational=True)
    assert report.ok
    assert report.failures() == []


# --- Tests for derived quantities ---
def test_height_coefficient_of_cube_is_one():
    assert height_coefficient(*(math.radians(x) for x in (90, 90, 90))) == pytest.approx(1.0)


def test_derive_skewed_r():
    derived = require_derived(SKEWED)
    assert derived.r == pytest.approx(1.6426796, abs=1e-7)
    assert derived.c == pytest.approx(math.tan(math.radians(52.5)))
    assert derived.gamma_l == pytest.approx(SKEWED.gamma / 2)


def test_gamma_sides_sum_to_gamma_without_delta():
    assert gamma_side(SKEWED, Side.L) + gamma_side(SKEWED, Side.R) == pytest.approx(SKEWED.gamma)


def test_right_angle_beta_uses_reciprocals():
    derived = require_derived(CUBE)
    assert derived.inv_b_l == pytest.approx(0.0, abs=1e-15)
    assert math.isinf(derived.b_l) or derived.b_l > 1e12


def test_derive_invalid_returns_none(caplog):
    with caplog.at_level("ERROR"):
        assert derive(GadgetParams.from_degrees(90, 30, 50)) is None
    assert "Cannot derive" in caplog.text
