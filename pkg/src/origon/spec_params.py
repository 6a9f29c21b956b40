"""
Gadget input parameters, feasibility conditions and derived scalar quantities.

A gadget is described by the top-face angle α, the side-face angles β_L, β_R,
the outgoing-pleat tilts δ_L, δ_R and the scale ‖AB‖. The remaining angle
γ = 2π − α − β_L − β_R is the opening of the gadget's lower region.
"""

import logging
import math
from dataclasses import asdict, dataclass, field, replace
from enum import Enum
from typing import Any, Dict, List, Optional

from .geom_core import Tolerance

logger = logging.getLogger(__name__)

CONVENTIONAL = "conventional"
IMPROVED = "improved"
MODES = (CONVENTIONAL, IMPROVED)


class InvalidParametersError(ValueError):
    """Raised when gadget parameters violate a feasibility condition."""

    def __init__(self, condition: str, margin: float, message: Optional[str] = None):
        self.condition = condition
        self.margin = margin
        super().__init__(
            message
            or f"Condition {condition} violated (margin {math.degrees(margin):.6f}°)"
        )


class Side(str, Enum):
    L = "L"
    R = "R"

    @property
    def other(self) -> "Side":
        return Side.R if self is Side.L else Side.L

    @property
    def sign(self) -> int:
        """-1 on the left (x<0 half-plane), +1 on the right."""
        return -1 if self is Side.L else 1


def _cot(x: float) -> float:
    return math.cos(x) / math.sin(x)


def _tan_or_inf(x: float) -> float:
    c = math.cos(x)
    if abs(c) < 1e-15:
        return math.inf
    return math.sin(x) / c


@dataclass(frozen=True)
class GadgetParams:
    alpha: float
    beta_l: float
    beta_r: float
    delta_l: float = 0.0
    delta_r: float = 0.0
    ab_length: float = 1.0

    @classmethod
    def from_degrees(
        cls,
        alpha: float,
        beta_l: float,
        beta_r: float,
        delta_l: float = 0.0,
        delta_r: float = 0.0,
        ab_length: float = 1.0,
    ) -> "GadgetParams":
        return cls(
            math.radians(alpha),
            math.radians(beta_l),
            math.radians(beta_r),
            math.radians(delta_l),
            math.radians(delta_r),
            ab_length,
        )

    @property
    def gamma(self) -> float:
        return 2.0 * math.pi - self.alpha - self.beta_l - self.beta_r

    @property
    def has_delta(self) -> bool:
        return self.delta_l > 0.0 or self.delta_r > 0.0

    def beta(self, side: Side) -> float:
        return self.beta_l if side is Side.L else self.beta_r

    def delta(self, side: Side) -> float:
        return self.delta_l if side is Side.L else self.delta_r

    def mirrored(self) -> "GadgetParams":
        """The same gadget with left and right exchanged."""
        return replace(
            self,
            beta_l=self.beta_r,
            beta_r=self.beta_l,
            delta_l=self.delta_r,
            delta_r=self.delta_l,
        )

    def scaled(self, ab_length: float) -> "GadgetParams":
        return replace(self, ab_length=ab_length)

    def to_degrees_dict(self) -> Dict[str, float]:
        return {
            "alpha": math.degrees(self.alpha),
            "beta_l": math.degrees(self.beta_l),
            "beta_r": math.degrees(self.beta_r),
            "delta_l": math.degrees(self.delta_l),
            "delta_r": math.degrees(self.delta_r),
            "ab_length": self.ab_length,
        }


@dataclass
class Check:
    """One named condition: pass/fail by sign of margin (radians or length units)."""

    name: str
    passed: bool
    margin: float
    marginal: bool = False
    informational: bool = False
    detail: str = ""


@dataclass
class CheckReport:
    title: str
    checks: List[Check] = field(default_factory=list)

    def add(
        self,
        name: str,
        margin: float,
        tol: Tolerance,
        strict: bool = True,
        informational: bool = False,
        detail: str = "",
    ) -> Check:
        passed = margin > 0.0 if strict else margin >= 0.0
        check = Check(
            name=name,
            passed=passed,
            margin=margin,
            marginal=abs(margin) <= tol.angle_eps,
            informational=informational,
            detail=detail,
        )
        if check.marginal and not informational:
            logger.warning(f"{self.title}: condition '{name}' is marginal ({margin:.3e})")
        self.checks.append(check)
        return check

    def add_flag(self, name: str, passed: bool, detail: str = "") -> Check:
        check = Check(name=name, passed=passed, margin=0.0, detail=detail)
        self.checks.append(check)
        return check

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks if not c.informational)

    def failures(self) -> List[Check]:
        return [c for c in self.checks if not c.passed and not c.informational]

    def get(self, name: str) -> Check:
        for check in self.checks:
            if check.name == name:
                return check
        raise KeyError(name)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "title": self.title,
            "ok": self.ok,
            "checks": [asdict(c) for c in self.checks],
        }


ConditionReport = CheckReport


def validate(
    params: GadgetParams, mode: str = IMPROVED, tol: Optional[Tolerance] = None
) -> CheckReport:
    """Evaluates the feasibility conditions for a conventional or improved gadget."""
    if mode not in MODES:
        raise ValueError(f"Unknown validation mode '{mode}'. Expected one of {MODES}.")
    tol = tol or Tolerance()
    a, bl, br = params.alpha, params.beta_l, params.beta_r
    dl, dr = params.delta_l, params.delta_r
    report = CheckReport(title=f"{mode} gadget conditions")

    report.add("alpha_range", min(a, math.pi - a), tol, detail="0 < α < π")
    report.add(
        "(i)",
        min(bl + br - a, a + br - bl, a + bl - br),
        tol,
        detail="α < β_L+β_R, β_L < α+β_R, β_R < α+β_L",
    )
    report.add("(ii)", 2.0 * math.pi - (a + bl + br), tol, detail="α+β_L+β_R < 2π")
    if params.ab_length <= 0.0:
        report.add_flag("ab_length", False, detail="‖AB‖ must be positive")

    if mode == CONVENTIONAL:
        report.add("(iii)", a + bl + br - math.pi, tol, detail="α+β_L+β_R > π")
        report.add_flag(
            "delta_zero",
            abs(dl) <= tol.angle_eps and abs(dr) <= tol.angle_eps,
            detail="δ_L = δ_R = 0",
        )
    else:
        report.add("(iii.a)", min(dl, dr), tol, strict=False, detail="δ_σ ≥ 0")
        report.add(
            "(iii.b)",
            min(bl - dl, br - dr, math.pi / 2 - dl, math.pi / 2 - dr),
            tol,
            detail="δ_σ < β_σ and δ_σ < π/2",
        )
        report.add(
            "(iii.c)",
            math.pi - (params.gamma + dl + dr),
            tol,
            detail="γ+δ_L+δ_R < π",
        )
    logger.debug(
        f"Validated {mode} params: ok={report.ok}, failures={[c.name for c in report.failures()]}"
    )
    return report


def require_valid(
    params: GadgetParams, mode: str = IMPROVED, tol: Optional[Tolerance] = None
) -> CheckReport:
    report = validate(params, mode, tol)
    failures = report.failures()
    if failures:
        first = failures[0]
        raise InvalidParametersError(first.name, first.margin)
    return report


@dataclass(frozen=True)
class DerivedQuantities:
    """
    Scalars shared by the closed forms.

    lam is the height coefficient λ (extrusion height h = λ‖AB‖).
    c' and b_σ become infinite at right angles, so their reciprocals are
    stored too and used wherever a formula divides by them.
    """

    gamma: float
    gamma_l: float
    gamma_r: float
    r: float
    lam: float
    c: float
    c_prime: float
    inv_c_prime: float
    b_l: float
    b_r: float
    inv_b_l: float
    inv_b_r: float
    d_l: float
    d_r: float

    @property
    def inv_c(self) -> float:
        return 1.0 / self.c

    def gamma_side(self, side: Side) -> float:
        return self.gamma_l if side is Side.L else self.gamma_r

    def b(self, side: Side) -> float:
        return self.b_l if side is Side.L else self.b_r

    def inv_b(self, side: Side) -> float:
        return self.inv_b_l if side is Side.L else self.inv_b_r

    def d(self, side: Side) -> float:
        return self.d_l if side is Side.L else self.d_r


def gamma_side(params: GadgetParams, side: Side) -> float:
    """γ_σ = ∠B_σAC."""
    g = params.gamma
    t_own = math.tan(params.delta(side))
    t_other = math.tan(params.delta(side.other))
    return math.atan2(
        1.0 - math.cos(g) + math.sin(g) * t_other,
        math.sin(g) + math.cos(g) * t_other + t_own,
    )


def height_coefficient(alpha: float, beta_l: float, beta_r: float) -> float:
    """λ(α, β_L, β_R): extrusion height per unit ‖AB‖."""
    num = (
        math.cos(beta_l) ** 2
        + math.cos(beta_r) ** 2
        - 2.0 * math.cos(alpha) * math.cos(beta_l) * math.cos(beta_r)
    )
    return math.sqrt(max(0.0, 1.0 - num / math.sin(alpha) ** 2))


def derive(
    params: GadgetParams, tol: Optional[Tolerance] = None
) -> Optional[DerivedQuantities]:
    report = validate(params, IMPROVED, tol)
    if not report.ok:
        logger.error(
            f"Cannot derive quantities: failed conditions {[c.name for c in report.failures()]}"
        )
        return None

    g = params.gamma
    gl = gamma_side(params, Side.L)
    gr = gamma_side(params, Side.R)
    dl, dr = params.delta_l, params.delta_r
    r = 1.0 / (math.cos(gl) - math.sin(gl) * math.tan(dl))
    spread = g / 2.0 + dl + dr
    derived = DerivedQuantities(
        gamma=g,
        gamma_l=gl,
        gamma_r=gr,
        r=r,
        lam=height_coefficient(params.alpha, params.beta_l, params.beta_r),
        c=math.tan(g / 2.0),
        c_prime=_tan_or_inf(spread),
        inv_c_prime=_cot(spread),
        b_l=_tan_or_inf(params.beta_l - dl),
        b_r=_tan_or_inf(params.beta_r - dr),
        inv_b_l=_cot(params.beta_l - dl),
        inv_b_r=_cot(params.beta_r - dr),
        d_l=math.tan(dl),
        d_r=math.tan(dr),
    )
    logger.debug(
        f"Derived: γ={math.degrees(g):.6f}°, γ_L={math.degrees(gl):.6f}°, "
        f"γ_R={math.degrees(gr):.6f}°, r={r:.9f}, λ={derived.lam:.9f}"
    )
    return derived


def require_derived(
    params: GadgetParams, tol: Optional[Tolerance] = None
) -> DerivedQuantities:
    require_valid(params, IMPROVED, tol)
    derived = derive(params, tol)
    assert derived is not None
    return derived
