"""
Improved (flat-back) 3D gadget: admissible choices of the free point D, the
named selectors, the ε-specifying alternative and the crease pattern with its
mountain/valley assignment.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Set, Tuple, Union

import numpy as np

from .conventional_gadget import SIDES, GadgetFrame
from .crease_pattern import (
    BOUNDARY,
    INTERIOR,
    SKIP,
    Assignment,
    CreasePattern,
    CreasePatternBuilder,
)
from .critical_angles import zeta_closed_form
from .geom_core import (
    GeometryError,
    Ray2,
    Segment,
    Tolerance,
    angle_at,
    circumcenter,
    close,
    cross,
    distance,
    intersect,
    midpoint,
)
from .spec_params import (
    CheckReport,
    DerivedQuantities,
    GadgetParams,
    Side,
    require_derived,
)
from .validator import constructible_by_phi, rho

logger = logging.getLogger(__name__)

M, V = Assignment.M, Assignment.V


class InadmissibleChoiceError(ValueError):
    """Raised when a choice of D falls outside the admissible range."""

    def __init__(
        self,
        message: str,
        interval: Optional[Tuple[float, float]] = None,
        side: Optional[Side] = None,
        margin: Optional[float] = None,
    ):
        self.interval = interval
        self.side = side
        self.margin = margin
        super().__init__(message)


class MVVariant(str, Enum):
    """Which of the two legal assignments to use when δ_σ>0 and φ_σ/2<ζ_σ."""

    FIRST = "first"
    SECOND = "second"


# --- Choices of D ---


@dataclass(frozen=True)
class ByPhiL:
    phi_l: float


@dataclass(frozen=True)
class ByPsiL:
    psi_l: float


@dataclass(frozen=True)
class ByEpsilon:
    side: Side
    epsilon: float


@dataclass(frozen=True)
class Balanced:
    pass


@dataclass(frozen=True)
class LeftCritical:
    pass


@dataclass(frozen=True)
class RightCritical:
    pass


@dataclass(frozen=True)
class Orthogonal:
    pass


DParameterization = Union[
    ByPhiL, ByPsiL, ByEpsilon, Balanced, LeftCritical, RightCritical, Orthogonal
]

SELECTORS = {
    "balanced": Balanced,
    "left-critical": LeftCritical,
    "right-critical": RightCritical,
    "orthogonal": Orthogonal,
}


@dataclass(frozen=True)
class AngleInterval:
    lo: float
    hi: float
    lo_open: bool = False
    hi_open: bool = False

    def contains(self, value: float, tol: Optional[Tolerance] = None) -> bool:
        eps = (tol or Tolerance()).angle_eps
        above = value > self.lo if self.lo_open else value >= self.lo - eps
        below = value < self.hi if self.hi_open else value <= self.hi + eps
        return above and below

    def clamp(self, value: float) -> float:
        return min(max(value, self.lo), self.hi)

    def degrees(self) -> Tuple[float, float]:
        return math.degrees(self.lo), math.degrees(self.hi)

    def describe(self) -> str:
        lo, hi = self.degrees()
        left = "(" if self.lo_open else "["
        right = ")" if self.hi_open else "]"
        return f"{left}{lo:.6f}°, {hi:.6f}°{right}"


def _zetas(params: GadgetParams, tol: Tolerance) -> Tuple[DerivedQuantities, float, float]:
    derived = require_derived(params, tol)
    zl, zr = zeta_closed_form(
        derived, params.beta_l, params.beta_r, params.delta_l, params.delta_r, tol
    )
    return derived, zl, zr


def admissible_phi_interval(
    params: GadgetParams, tol: Optional[Tolerance] = None
) -> AngleInterval:
    """[γ−2ζ_R, 2ζ_L] ∩ (0, γ) for φ_L."""
    tol = tol or Tolerance()
    derived, zl, zr = _zetas(params, tol)
    g = derived.gamma
    lo, hi = g - 2.0 * zr, 2.0 * zl
    interval = AngleInterval(
        lo=max(lo, 0.0),
        hi=min(hi, g),
        lo_open=lo <= tol.angle_eps,
        hi_open=hi >= g - tol.angle_eps,
    )
    logger.debug(f"Admissible φ_L interval: {interval.describe()}")
    return interval


def epsilon_formula(
    params: GadgetParams, side: Side, psi: float, derived: Optional[DerivedQuantities] = None
) -> float:
    """ε_σ = β_σ + γ_σ/2 + ψ_σ/2 + ρ_σ − π/2."""
    derived = derived or require_derived(params)
    return (
        params.beta(side)
        + derived.gamma_side(side) / 2.0
        + psi / 2.0
        + rho(psi, derived.r)
        - math.pi / 2.0
    )


def epsilon_pair(
    params: GadgetParams, phi_l: float, tol: Optional[Tolerance] = None
) -> Dict[Side, float]:
    derived = require_derived(params, tol)
    psi_l = derived.gamma_l - phi_l
    return {
        Side.L: epsilon_formula(params, Side.L, psi_l, derived),
        Side.R: epsilon_formula(params, Side.R, -psi_l, derived),
    }


def epsilon_range(
    params: GadgetParams, side: Side, tol: Optional[Tolerance] = None
) -> AngleInterval:
    """Admissible ε_σ for the alternative construction, intersected with [0, β_σ−δ_σ)."""
    tol = tol or Tolerance()
    derived, zl, zr = _zetas(params, tol)
    g = derived.gamma
    own, other = (zl, zr) if side is Side.L else (zr, zl)
    cap = params.beta(side) - params.delta(side)
    if other < g / 2.0 - tol.angle_eps:
        upper = params.beta_l + params.beta_r + g / 2.0 - math.pi
    else:
        upper = cap
    if own < g / 2.0 - tol.angle_eps:
        lower, lower_open = 0.0, False
    else:
        lower = params.beta(side) + g / 2.0 + params.delta(side.other) - math.pi
        lower_open = True
    return AngleInterval(
        lo=max(lower, 0.0),
        hi=min(upper, cap),
        lo_open=lower_open,
        hi_open=upper >= cap - tol.angle_eps,
    )


def _phi_from_epsilon(
    params: GadgetParams, side: Side, epsilon: float, tol: Tolerance
) -> float:
    """φ_L via E_σ = v_σ ∩ m_σ with ∠Q_σB_σv_σ = ε_σ, then φ_σ = 2∠B_σAE_σ."""
    frame = GadgetFrame(params, tol)
    c = frame.C()
    angle_abe = math.pi - params.beta(side) + params.delta(side) + epsilon
    v_ray = Ray2(frame.B[side], frame.dir_from_B(side, angle_abe))
    e = intersect(v_ray, frame.m_line(side, c), tol)
    if e is None:
        raise InadmissibleChoiceError(
            f"v_{side.value} does not meet m_{side.value} for ε={math.degrees(epsilon):.6f}°",
            side=side,
        )
    phi_side = 2.0 * angle_at(frame.A, frame.B[side], e)
    return phi_side if side is Side.L else params.gamma - phi_side


def resolve(
    choice: DParameterization, params: GadgetParams, tol: Optional[Tolerance] = None
) -> float:
    """Turns a choice of D into φ_L = ∠B_LAD."""
    tol = tol or Tolerance()
    derived, zl, zr = _zetas(params, tol)
    g = derived.gamma
    interval = admissible_phi_interval(params, tol)

    if isinstance(choice, ByEpsilon):
        eps_range = epsilon_range(params, choice.side, tol)
        if not eps_range.contains(choice.epsilon, tol):
            raise InadmissibleChoiceError(
                f"ε_{choice.side.value}={math.degrees(choice.epsilon):.6f}° outside {eps_range.describe()}",
                interval=(eps_range.lo, eps_range.hi),
                side=choice.side,
            )
        phi_l = _phi_from_epsilon(params, choice.side, choice.epsilon, tol)
    elif isinstance(choice, ByPhiL):
        phi_l = choice.phi_l
    elif isinstance(choice, ByPsiL):
        phi_l = derived.gamma_l - choice.psi_l
    elif isinstance(choice, LeftCritical):
        if zl >= g / 2.0 - tol.angle_eps:
            raise InadmissibleChoiceError(
                "No left-critical gadget: ζ_L = γ/2 puts D on AB_R",
                interval=(interval.lo, interval.hi),
                side=Side.L,
            )
        phi_l = 2.0 * zl
    elif isinstance(choice, RightCritical):
        if zr >= g / 2.0 - tol.angle_eps:
            raise InadmissibleChoiceError(
                "No right-critical gadget: ζ_R = γ/2 puts D on AB_L",
                interval=(interval.lo, interval.hi),
                side=Side.R,
            )
        phi_l = g - 2.0 * zr
    elif isinstance(choice, Orthogonal):
        phi_l = derived.gamma_l
    elif isinstance(choice, Balanced):
        phi_l = interval.clamp(g / 2.0)
        if params.has_delta:
            logger.warning(
                "Balanced choice with δ>0 is an extension: φ_L clamps γ/2 into the admissible interval"
            )
    else:
        raise TypeError(f"Unknown choice of D: {choice!r}")

    if not interval.contains(phi_l, tol):
        raise InadmissibleChoiceError(
            f"φ_L={math.degrees(phi_l):.6f}° outside admissible interval {interval.describe()}",
            interval=(interval.lo, interval.hi),
        )
    logger.debug(f"Resolved {type(choice).__name__} to φ_L={math.degrees(phi_l):.9f}°")
    return phi_l


def is_extension(choice: DParameterization, params: GadgetParams) -> bool:
    """Balanced gadgets with δ>0 are defined here by clamping, beyond the δ=0 analysis."""
    return isinstance(choice, Balanced) and params.has_delta


def classify(params: GadgetParams, phi_l: float, tol: Optional[Tolerance] = None) -> Set[str]:
    tol = tol or Tolerance()
    derived, zl, zr = _zetas(params, tol)
    phi_r = derived.gamma - phi_l
    labels = set()
    if abs(phi_l / 2.0 - zl) <= tol.angle_eps:
        labels.add("left-critical")
    if abs(phi_r / 2.0 - zr) <= tol.angle_eps:
        labels.add("right-critical")
    if abs(phi_l - derived.gamma_l) <= tol.angle_eps:
        labels.add("orthogonal")
    if abs(phi_l - resolve(Balanced(), params, tol)) <= tol.angle_eps:
        labels.add("balanced")
    return labels


# --- Construction ---


@dataclass(eq=False)
class ImprovedGadgetGeometry:
    A: np.ndarray
    B_l: np.ndarray
    B_r: np.ndarray
    C: np.ndarray
    D: np.ndarray
    E_l: np.ndarray
    E_r: np.ndarray
    F: np.ndarray
    G_l: np.ndarray
    G_r: np.ndarray
    H_l: Optional[np.ndarray]
    H_r: Optional[np.ndarray]
    phi_l: float
    phi_r: float
    psi_l: float
    psi_r: float
    params: GadgetParams
    derived: DerivedQuantities
    zeta_l: float
    zeta_r: float
    frame: GadgetFrame = field(repr=False, default=None)

    def B(self, side: Side) -> np.ndarray:
        return self.B_l if side is Side.L else self.B_r

    def E(self, side: Side) -> np.ndarray:
        return self.E_l if side is Side.L else self.E_r

    def G(self, side: Side) -> np.ndarray:
        return self.G_l if side is Side.L else self.G_r

    def H(self, side: Side) -> Optional[np.ndarray]:
        return self.H_l if side is Side.L else self.H_r

    def phi(self, side: Side) -> float:
        return self.phi_l if side is Side.L else self.phi_r

    def psi(self, side: Side) -> float:
        return self.psi_l if side is Side.L else self.psi_r

    def zeta(self, side: Side) -> float:
        return self.zeta_l if side is Side.L else self.zeta_r

    def is_critical(self, side: Side, tol: Optional[Tolerance] = None) -> bool:
        eps = (tol or Tolerance()).angle_eps
        return abs(self.phi(side) / 2.0 - self.zeta(side)) <= eps

    def points(self) -> Dict[str, Optional[np.ndarray]]:
        return {
            "A": self.A,
            "B_L": self.B_l,
            "B_R": self.B_r,
            "C": self.C,
            "D": self.D,
            "E_L": self.E_l,
            "E_R": self.E_r,
            "F": self.F,
            "G_L": self.G_l,
            "G_R": self.G_r,
            "H_L": self.H_l,
            "H_R": self.H_r,
        }


def improved_geometry(
    params: GadgetParams, phi_l: float, tol: Optional[Tolerance] = None
) -> ImprovedGadgetGeometry:
    tol = tol or Tolerance()
    derived, zl, zr = _zetas(params, tol)
    verdicts = constructible_by_phi(params, phi_l, tol)
    for side, verdict in verdicts.items():
        if not verdict.constructible:
            interval = admissible_phi_interval(params, tol)
            raise InadmissibleChoiceError(
                f"φ_L={math.degrees(phi_l):.6f}° not constructible on side {side.value} "
                f"(margin {math.degrees(verdict.margin):.6f}°, admissible {interval.describe()})",
                interval=(interval.lo, interval.hi),
                side=side,
                margin=verdict.margin,
            )

    frame = GadgetFrame(params, tol)
    c = frame.C()
    d = frame.A + params.ab_length * frame.dir_from_A(Side.L, phi_l)
    e = {side: circumcenter(frame.B[side], c, d, tol) for side in SIDES}
    # E_L and E_R both lie on the perpendicular bisector of CD.
    f = midpoint(c, d)

    g, h = {}, {}
    for side in SIDES:
        ae = Segment(frame.A, e[side])
        g[side] = intersect(Ray2(frame.B[side], frame.g_dir(side)), ae, tol)
        if g[side] is None:
            raise GeometryError(f"G_{side.value} does not exist")
        h[side] = None
        if params.delta(side) > 0.0:
            angle_abh = angle_at(frame.B[side], frame.A, e[side]) - params.delta(side)
            h[side] = intersect(Ray2(frame.B[side], frame.dir_from_B(side, angle_abh)), ae, tol)
            if h[side] is None:
                raise GeometryError(f"H_{side.value} does not exist")

    phi_r = params.gamma - phi_l
    geom = ImprovedGadgetGeometry(
        A=frame.A,
        B_l=frame.B[Side.L],
        B_r=frame.B[Side.R],
        C=c,
        D=d,
        E_l=e[Side.L],
        E_r=e[Side.R],
        F=f,
        G_l=g[Side.L],
        G_r=g[Side.R],
        H_l=h[Side.L],
        H_r=h[Side.R],
        phi_l=phi_l,
        phi_r=phi_r,
        psi_l=derived.gamma_l - phi_l,
        psi_r=derived.gamma_r - phi_r,
        params=params,
        derived=derived,
        zeta_l=zl,
        zeta_r=zr,
        frame=frame,
    )
    logger.debug(f"Improved geometry: D={d}, E_L={e[Side.L]}, E_R={e[Side.R]}, F={f}")
    return geom


def _side_creases(
    side: Side, critical: bool, with_delta: bool, variant: MVVariant
) -> List[Tuple[str, str, Assignment]]:
    s = side.value
    B, E, G, H = f"B_{s}", f"E_{s}", f"G_{s}", f"H_{s}"
    if not with_delta:
        if critical:
            return [(B, E, M), ("A", E, V), ("D", E, V)]
        return [(B, G, M), ("D", E, M), ("A", E, V), ("D", G, V)]
    if critical:
        return [(B, E, M), ("D", G, M), ("A", E, V), (B, G, V)]
    if variant is MVVariant.FIRST:
        return [("D", H, M), (B, E, M), (B, G, M), ("D", G, V), ("A", E, V), (B, H, V)]
    return [
        ("D", H, M),
        (B, H, M),
        (E, H, M),
        ("D", G, V),
        ("A", H, V),
        (B, G, V),
        (B, E, V),
    ]


def side_column(geom: ImprovedGadgetGeometry, side: Side, tol: Optional[Tolerance] = None) -> str:
    """Name of the assignment column used on one side."""
    delta = "delta>0" if geom.params.delta(side) > 0.0 else "delta=0"
    crit = "critical" if geom.is_critical(side, tol) else "non-critical"
    return f"{delta},{crit}"


def build_improved(
    params: GadgetParams,
    phi_l: float,
    variant: MVVariant = MVVariant.FIRST,
    tol: Optional[Tolerance] = None,
    debug_lines: bool = False,
) -> Tuple[ImprovedGadgetGeometry, CreasePattern]:
    """Geometry and crease pattern of the improved gadget for a given φ_L."""
    tol = tol or Tolerance()
    geom = improved_geometry(params, phi_l, tol)
    frame = geom.frame
    builder = CreasePatternBuilder("improved", tol, debug_lines)
    builder.metadata.update(
        {
            "params": params.to_degrees_dict(),
            "phi_l_deg": math.degrees(geom.phi_l),
            "psi_l_deg": math.degrees(geom.psi_l),
            "variant": variant.value,
            "columns": {side.value: side_column(geom, side, tol) for side in SIDES},
        }
    )
    points = geom.points()
    builder.add_points({k: v for k, v in points.items() if k not in ("C", "F")})
    if debug_lines:
        builder.add_point("C", geom.C)
        builder.construction_line("A", "C")
        builder.construction_line("D", "C")

    builder.crease("A", "D", M)
    builder.crease("E_L", "E_R", V)
    for side in SIDES:
        s = side.value
        builder.crease("A", f"B_{s}", M)
        builder.ray(f"j_{s}", "A", frame.j(side), M)
        builder.ray(f"l_{s}", f"B_{s}", frame.ell(side), M)
        builder.ray(f"k_{s}", f"B_{s}", frame.k(side), V)
        builder.ray(f"m_{s}", f"E_{s}", frame.ell(side), V)
        with_delta = params.delta(side) > 0.0
        for a, b, asg in _side_creases(side, geom.is_critical(side, tol), with_delta, variant):
            builder.crease(a, b, asg)

    builder.set_role("A", SKIP)
    for side in SIDES:
        s = side.value
        builder.set_role(f"E_{s}", INTERIOR)
        if geom.H(side) is not None:
            builder.set_role(f"H_{s}", INTERIOR)
        builder.set_role(f"B_{s}", BOUNDARY, first=f"k_{s}", last=f"G_{s}", outside="A")
        builder.set_role(f"G_{s}", BOUNDARY, first=f"B_{s}", last="D", outside="A")
    builder.set_role(
        "D",
        BOUNDARY,
        first="G_L",
        last="G_R",
        outside="A",
        expected=params.alpha,
        positive=geom.C - geom.D,
    )
    cp = builder.build()
    logger.info(
        f"Built improved gadget CP at φ_L={math.degrees(phi_l):.6f}° "
        f"({len(cp.edges)} edges, {dict(cp.assignment_counts())})"
    )
    return geom, cp


# --- Measurements ---


def epsilon_measured(geom: ImprovedGadgetGeometry, side: Side, tol: Optional[Tolerance] = None) -> float:
    """∠E_σDG_σ when δ_σ=0, ∠G_σDH_σ when δ_σ>0."""
    tol = tol or Tolerance()
    other = geom.H(side) if geom.H(side) is not None else geom.E(side)
    if close(other, geom.G(side), tol):
        return 0.0
    return angle_at(geom.D, geom.G(side), other)


def epsilon_of(geom: ImprovedGadgetGeometry, side: Side, tol: Optional[Tolerance] = None) -> float:
    tol = tol or Tolerance()
    value = epsilon_formula(geom.params, side, geom.psi(side), geom.derived)
    measured = epsilon_measured(geom, side, tol)
    if abs(value - measured) > tol.angle_eps:
        logger.warning(
            f"ε_{side.value}: formula {math.degrees(value):.9f}° vs measured {math.degrees(measured):.9f}°"
        )
    return value


def angle_identities(geom: ImprovedGadgetGeometry, tol: Optional[Tolerance] = None) -> CheckReport:
    """Measured angles of the construction compared with their closed forms."""
    tol = tol or Tolerance()
    params, derived = geom.params, geom.derived
    report = CheckReport(title="improved gadget angle identities")

    def agree(name: str, measured: float, expected: float, eps: float = tol.angle_eps):
        report.add_flag(
            name,
            abs(measured - expected) <= eps,
            detail=f"measured {math.degrees(measured):.9f}° vs {math.degrees(expected):.9f}°",
        )

    report.add_flag(
        "D_on_arc", abs(distance(geom.A, geom.D) - params.ab_length) <= tol.length_eps
    )
    agree("phi_sum", geom.phi_l + geom.phi_r, derived.gamma)
    agree("psi_sum", geom.psi_l + geom.psi_r, 0.0)
    rhos = {}
    for side in SIDES:
        s = side.value
        B, E, G = geom.B(side), geom.E(side), geom.G(side)
        g_side = derived.gamma_side(side)
        psi, delta = geom.psi(side), params.delta(side)
        rho_val = rho(psi, derived.r)
        rhos[side] = angle_at(geom.C, geom.A, E) - angle_at(geom.C, geom.D, E)
        agree(f"rho_{s}", rhos[side], rho_val)

        radii = [distance(E, p) for p in (B, geom.C, geom.D)]
        report.add_flag(f"E_{s}_circumcenter", max(radii) - min(radii) <= tol.length_eps)
        agree(f"phi_half_{s}", angle_at(geom.A, B, E), geom.phi(side) / 2.0)
        # AE_σ is the perpendicular bisector of B_σD.
        mid = midpoint(B, geom.D)
        bisects = abs(cross(E - geom.A, mid - geom.A)) <= tol.length_eps * max(
            1.0, distance(geom.A, E)
        )
        report.add_flag(f"AE_{s}_bisects_BD", bisects)
        agree(f"angle_ABG_{s}", angle_at(B, geom.A, G), math.pi - params.beta(side))
        if geom.H(side) is not None and not close(geom.H(side), E, tol):
            agree(f"angle_EBH_{s}", angle_at(B, E, geom.H(side)), delta)

        theta = angle_at(B, geom.A, E) - angle_at(B, geom.A, geom.C)
        eta = angle_at(E, geom.A, B)
        xi = angle_at(E, geom.C, geom.F)
        agree(f"theta_{s}", theta, g_side / 2.0 + psi / 2.0 + rho_val)
        agree(f"eta_{s}", eta, math.pi / 2.0 - g_side - delta - rho_val)
        agree(f"xi_{s}", xi, g_side / 2.0 + delta - psi / 2.0)
        agree(f"theta_eta_xi_sum_{s}", theta + eta + xi, math.pi / 2.0)
        agree(
            f"angle_ABE_{s}",
            angle_at(B, geom.A, E),
            math.pi / 2.0 + g_side / 2.0 + delta + psi / 2.0 + rho_val,
        )
        agree(
            f"epsilon_{s}",
            epsilon_measured(geom, side, tol),
            epsilon_formula(params, side, psi, derived),
        )
    agree("rho_sum", rhos[Side.L] + rhos[Side.R], 0.0)
    agree(
        "epsilon_sum",
        epsilon_formula(params, Side.L, geom.psi_l, derived)
        + epsilon_formula(params, Side.R, geom.psi_r, derived),
        params.beta_l + params.beta_r + derived.gamma / 2.0 - math.pi,
    )
    return report


def report_dict(geom: ImprovedGadgetGeometry, tol: Optional[Tolerance] = None) -> Dict[str, Any]:
    """Degrees-valued summary of one gadget for CLI output."""
    return {
        "phi_l_deg": math.degrees(geom.phi_l),
        "phi_r_deg": math.degrees(geom.phi_r),
        "psi_l_deg": math.degrees(geom.psi_l),
        "psi_r_deg": math.degrees(geom.psi_r),
        "zeta_l_deg": math.degrees(geom.zeta_l),
        "zeta_r_deg": math.degrees(geom.zeta_r),
        "epsilon_l_deg": math.degrees(epsilon_of(geom, Side.L, tol)),
        "epsilon_r_deg": math.degrees(epsilon_of(geom, Side.R, tol)),
        "classification": sorted(classify(geom.params, geom.phi_l, tol)),
    }
