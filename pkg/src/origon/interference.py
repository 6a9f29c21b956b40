"""
Interference coefficients: how far the pleats of a gadget reach compared with
the height of the extrusion.

κ_conv is the reach of the conventional gadget, κ_out and κ_in the reach of
the outer and inner pleats of the improved gadget. The regular-prism family
(β_L = β_R = π/2, γ = 2π/n) is optimized in closed form over t_L = tan(φ_L/2).
"""

import csv
import io
import logging
import math
from dataclasses import asdict, dataclass
from typing import Any, Callable, Dict, Iterable, List, Optional, Tuple

import numpy as np

from . import config
from .conventional_gadget import SIDES
from .geom_core import Line, Ray2, Tolerance, distance, intersect, reflect_direction
from .improved_gadget import ImprovedGadgetGeometry, improved_geometry
from .spec_params import CheckReport, GadgetParams, Side, require_derived
from .validator import rho

logger = logging.getLogger(__name__)

BRANCH_NEGATIVE = "chi<=0"
BRANCH_POSITIVE = "chi>=0"

PRISM_CSV_COLUMNS = [
    "n",
    "kappa_min",
    "t_l",
    "psi_l_deg",
    "kappa_0",
    "kappa_conv",
    "inv_kappa_min",
    "inv_kappa_0",
    "inv_kappa_conv",
    "ratio_min_0",
    "ratio_min_conv",
]

# Below this the rational form of the χ≥0 branch is not trusted.
RATIONAL_DENOMINATOR_FLOOR = 1e-6


def _cot(x: float) -> float:
    return math.cos(x) / math.sin(x)


# --- Per-gadget coefficients ---


def kappa_conv(params: GadgetParams, side: Side) -> float:
    """tan(γ/2) / (2λ sin β_σ), per unit ‖AB‖."""
    derived = require_derived(params)
    return math.tan(params.gamma / 2.0) / (2.0 * derived.lam * math.sin(params.beta(side)))


def kappa_out_formula(params: GadgetParams, side: Side, phi_side: float) -> float:
    derived = require_derived(params)
    beta = params.beta(side)
    return 1.0 / (derived.lam * (math.sin(beta) * _cot(phi_side / 2.0) - math.cos(beta)))


def kappa_out(geom: ImprovedGadgetGeometry, side: Side, tol: Optional[Tolerance] = None) -> float:
    """Reach ‖B_σG_σ‖/h of the outer pleat; the closed form is checked against the geometry."""
    tol = tol or Tolerance()
    params = geom.params
    value = kappa_out_formula(params, side, geom.phi(side))
    measured = distance(geom.B(side), geom.G(side)) / (geom.derived.lam * params.ab_length)
    if abs(value - measured) > tol.length_eps * max(1.0, value):
        logger.warning(
            f"κ_out,{side.value}: formula {value:.12f} vs measured {measured:.12f}"
        )
    return value


def chi(geom: ImprovedGadgetGeometry, side: Side) -> float:
    """χ_σ = β_σ + γ_σ/2 + ψ_σ/2 + ρ_σ − π/2 − δ_σ selects the κ_in branch."""
    params, derived = geom.params, geom.derived
    psi = geom.psi(side)
    return (
        params.beta(side)
        + derived.gamma_side(side) / 2.0
        + psi / 2.0
        + rho(psi, derived.r)
        - math.pi / 2.0
        - params.delta(side)
    )


def kappa_in_negative_branch(params: GadgetParams, side: Side) -> float:
    derived = require_derived(params)
    g = params.gamma
    d_other = params.delta(side.other)
    spread = g + params.delta_l + params.delta_r
    num = math.cos(d_other) - math.cos(g + d_other)
    den = math.sin(params.beta(side) - params.delta(side)) * math.sin(spread)
    return num / (2.0 * derived.lam * den)


def kappa_in_positive_branch(geom: ImprovedGadgetGeometry, side: Side) -> float:
    params, derived = geom.params, geom.derived
    r, psi = derived.r, geom.psi(side)
    reach = math.sqrt(r * r - 2.0 * r * math.cos(psi) + 1.0)
    angle = math.pi - params.beta(side) - derived.gamma_side(side) - rho(psi, r)
    return reach / (2.0 * derived.lam * math.cos(angle))


def kappa_in_rational(geom: ImprovedGadgetGeometry, side: Side) -> Optional[float]:
    """Rational form of the χ≥0 branch; None where its denominator degenerates."""
    params, derived = geom.params, geom.derived
    r, psi = derived.r, geom.psi(side)
    turn = params.beta(side) + derived.gamma_side(side)
    den = (r - math.cos(psi)) * math.cos(turn) - math.sin(psi) * math.sin(turn)
    if abs(den) <= RATIONAL_DENOMINATOR_FLOOR:
        return None
    return -(r * r - 2.0 * r * math.cos(psi) + 1.0) / (2.0 * derived.lam * den)


def kappa_in_geometric(
    geom: ImprovedGadgetGeometry, side: Side, tol: Optional[Tolerance] = None
) -> Optional[float]:
    """‖DI_σ‖/h where I_σ is the mirror of ray D→G_σ across DE_σ met with line E_LE_R."""
    tol = tol or Tolerance()
    if geom.params.has_delta or chi(geom, side) < -tol.angle_eps:
        return None
    d, e, g = geom.D, geom.E(side), geom.G(side)
    if distance(d, g) <= tol.length_eps or distance(d, e) <= tol.length_eps:
        return None
    mirrored = reflect_direction(g - d, e - d)
    hit = intersect(Ray2(d, mirrored), Line.through(geom.E_l, geom.E_r), tol)
    if hit is None:
        return None
    return distance(d, hit) / (geom.derived.lam * geom.params.ab_length)


def kappa_in(geom: ImprovedGadgetGeometry, side: Side, tol: Optional[Tolerance] = None) -> float:
    """Reach of the inner pleat, piecewise in the sign of χ_σ."""
    tol = tol or Tolerance()
    x = chi(geom, side)
    if x <= 0.0:
        value = kappa_in_negative_branch(geom.params, side)
        if x >= -tol.angle_eps:
            other = kappa_in_positive_branch(geom, side)
            if abs(other - value) > 1e-7:
                logger.warning(
                    f"κ_in,{side.value} branches disagree at χ≈0: {value:.12f} vs {other:.12f}"
                )
        return value
    value = kappa_in_positive_branch(geom, side)
    rational = kappa_in_rational(geom, side)
    if rational is not None and abs(rational - value) > tol.length_eps * max(1.0, value):
        logger.warning(
            f"κ_in,{side.value}: rational form {rational:.12f} vs {value:.12f}"
        )
    return value


@dataclass
class InterferenceReport:
    phi_l: float
    lam: float
    kappa_in_l: float
    kappa_in_r: float
    kappa_out_l: float
    kappa_out_r: float
    chi_l: float
    chi_r: float
    branch_l: str
    branch_r: str
    kappa_conv_l: Optional[float] = None
    kappa_conv_r: Optional[float] = None
    kappa_in_geometric_l: Optional[float] = None
    kappa_in_geometric_r: Optional[float] = None
    critical_l: bool = False
    critical_r: bool = False

    def kappa_in(self, side: Side) -> float:
        return self.kappa_in_l if side is Side.L else self.kappa_in_r

    def kappa_out(self, side: Side) -> float:
        return self.kappa_out_l if side is Side.L else self.kappa_out_r

    def kappa_conv(self, side: Side) -> Optional[float]:
        return self.kappa_conv_l if side is Side.L else self.kappa_conv_r

    def chi(self, side: Side) -> float:
        return self.chi_l if side is Side.L else self.chi_r

    def critical(self, side: Side) -> bool:
        return self.critical_l if side is Side.L else self.critical_r

    def multiset(self) -> List[float]:
        return sorted([self.kappa_in_l, self.kappa_in_r, self.kappa_out_l, self.kappa_out_r])

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["phi_l_deg"] = math.degrees(data.pop("phi_l"))
        data["chi_l_deg"] = math.degrees(data.pop("chi_l"))
        data["chi_r_deg"] = math.degrees(data.pop("chi_r"))
        return data


def interference_report(
    params: GadgetParams, phi_l: float, tol: Optional[Tolerance] = None
) -> InterferenceReport:
    tol = tol or Tolerance()
    geom = improved_geometry(params, phi_l, tol)
    values: Dict[str, Any] = {}
    for side in SIDES:
        s = side.value.lower()
        x = chi(geom, side)
        values[f"kappa_in_{s}"] = kappa_in(geom, side, tol)
        values[f"kappa_out_{s}"] = kappa_out(geom, side, tol)
        values[f"chi_{s}"] = x
        values[f"branch_{s}"] = BRANCH_NEGATIVE if x <= 0.0 else BRANCH_POSITIVE
        values[f"kappa_conv_{s}"] = None if params.has_delta else kappa_conv(params, side)
        values[f"kappa_in_geometric_{s}"] = kappa_in_geometric(geom, side, tol)
        values[f"critical_{s}"] = geom.is_critical(side, tol)
    report = InterferenceReport(phi_l=phi_l, lam=geom.derived.lam, **values)
    logger.info(
        f"Interference at φ_L={math.degrees(phi_l):.6f}°: "
        f"κ_in=({report.kappa_in_l:.6f}, {report.kappa_in_r:.6f}), "
        f"κ_out=({report.kappa_out_l:.6f}, {report.kappa_out_r:.6f})"
    )
    return report


def downward_compatibility(
    params: GadgetParams, phi_l: float, tol: Optional[Tolerance] = None
) -> CheckReport:
    """κ_in ≤ κ_conv and κ_out ≤ κ_conv on each side, with equality exactly on critical sides."""
    tol = tol or Tolerance()
    if params.has_delta:
        raise ValueError("Downward compatibility compares against the conventional gadget (δ=0)")
    report = interference_report(params, phi_l, tol)
    checks = CheckReport(title="downward compatibility")
    for side in SIDES:
        s = side.value
        conv = report.kappa_conv(side)
        eps = tol.length_eps * max(1.0, conv)
        for kind, value in (("in", report.kappa_in(side)), ("out", report.kappa_out(side))):
            gap = conv - value
            checks.add(
                f"kappa_{kind}_le_conv_{s}",
                gap + eps,
                tol,
                strict=False,
                detail=f"κ_{kind}={value:.9f} vs κ_conv={conv:.9f}",
            )
            checks.add_flag(
                f"kappa_{kind}_equality_iff_critical_{s}",
                (abs(gap) <= eps) == report.critical(side),
            )
    return checks


@dataclass
class EdgePairing:
    inner: Side
    outer: Side
    kappa: float

    @property
    def max_height(self) -> float:
        """Tallest extrusion for a bottom edge of unit length."""
        return 1.0 / self.kappa


def edge_pairings(
    report: InterferenceReport, neighbour: Optional[InterferenceReport] = None
) -> List[EdgePairing]:
    """
    Sums of facing pleats on a shared bottom edge.

    The inner pleat of side σ of one gadget meets the outer pleat of side σ'
    of its neighbour (the same gadget when neighbour is None).
    """
    neighbour = neighbour or report
    return [
        EdgePairing(inner=side, outer=side.other, kappa=report.kappa_in(side) + neighbour.kappa_out(side.other))
        for side in SIDES
    ]


# --- Regular prisms ---


def prism_params(n: int) -> GadgetParams:
    """Gadget of a regular n-gon prism: α = (1−2/n)π, β_L = β_R = π/2, γ = 2π/n."""
    if n < 3:
        raise ValueError(f"A prism needs at least 3 sides (got {n})")
    return GadgetParams(
        alpha=(1.0 - 2.0 / n) * math.pi, beta_l=math.pi / 2.0, beta_r=math.pi / 2.0
    )


def prism_kappa(n: int, t):
    """κ_imp(t_L) = κ_in,L + κ_out,R; accepts scalars or numpy arrays."""
    c = math.tan(math.pi / n)
    inner = 0.5 * ((c * c + 4.0) * t * t - 4.0 * c * t + c * c) / (c * t * t - 2.0 * t + c)
    outer = (c - t) / (1.0 + c * t)
    return inner + outer


def prism_t_range(n: int) -> Tuple[float, float]:
    c = math.tan(math.pi / n)
    return c / (c * c + 2.0), c / 2.0


def prism_t_orthogonal(n: int) -> float:
    c = math.tan(math.pi / n)
    return (math.sqrt(c * c + 1.0) - 1.0) / c


def golden_section_search(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = config.GSS_TOL,
    max_iter: int = config.GSS_MAX_ITER,
) -> float:
    gr = (1.0 + math.sqrt(5.0)) / 2.0
    c = b - (b - a) / gr
    d = a + (b - a) / gr
    iterations = 0
    while abs(c - d) > tol and iterations < max_iter:
        if f(c) < f(d):
            b = d
        else:
            a = c
        c = b - (b - a) / gr
        d = a + (b - a) / gr
        iterations += 1
    if iterations >= max_iter:
        logger.warning(f"Golden-section search stopped after {max_iter} iterations (|Δt|={abs(c - d):.3e})")
    return (a + b) / 2.0


@dataclass
class PrismOptimum:
    n: int
    kappa_min: float
    t_l: float
    psi_l_deg: float
    kappa_0: float
    kappa_conv: float
    unimodal: bool
    critical: bool

    @property
    def inv_kappa_min(self) -> float:
        return 1.0 / self.kappa_min

    @property
    def inv_kappa_0(self) -> float:
        return 1.0 / self.kappa_0

    @property
    def inv_kappa_conv(self) -> float:
        return 1.0 / self.kappa_conv

    @property
    def ratio_min_0(self) -> float:
        return self.inv_kappa_min / self.inv_kappa_0

    @property
    def ratio_min_conv(self) -> float:
        return self.inv_kappa_min / self.inv_kappa_conv

    def row(self) -> Dict[str, Any]:
        return {name: getattr(self, name) for name in PRISM_CSV_COLUMNS}


def _is_unimodal(values: np.ndarray) -> bool:
    signs = np.sign(np.diff(values))
    signs = signs[signs != 0]
    # Once increasing, never decreasing again.
    return not np.any(np.diff(signs) < 0)


def optimize_prism(
    n: int,
    samples: int = config.PRISM_SAMPLES,
    tol: float = config.GSS_TOL,
    max_iter: int = config.GSS_MAX_ITER,
) -> PrismOptimum:
    """Minimizes κ_imp over c/(c²+2) ≤ t_L ≤ c/2 for the regular n-gon prism."""
    params = prism_params(n)
    lo, hi = prism_t_range(n)
    ts = np.linspace(lo, hi, max(samples, 3))
    values = prism_kappa(n, ts)
    unimodal = _is_unimodal(values)
    if not unimodal:
        logger.warning(f"κ_imp for n={n} is not unimodal on the sampled range")

    i = int(np.argmin(values))
    a, b = ts[max(i - 1, 0)], ts[min(i + 1, len(ts) - 1)]
    t_best = golden_section_search(lambda t: float(prism_kappa(n, t)), a, b, tol, max_iter)
    for candidate in (lo, hi):
        if prism_kappa(n, candidate) <= prism_kappa(n, t_best):
            t_best = candidate
    # Both ends of the range are critical gadgets (right-critical at lo, left-critical at hi).
    critical = min(abs(t_best - lo), abs(t_best - hi)) <= max(tol, 1e-9)

    gamma = params.gamma
    optimum = PrismOptimum(
        n=n,
        kappa_min=float(prism_kappa(n, t_best)),
        t_l=float(t_best),
        psi_l_deg=math.degrees(gamma / 2.0 - 2.0 * math.atan(t_best)),
        kappa_0=float(prism_kappa(n, prism_t_orthogonal(n))),
        kappa_conv=math.tan(gamma / 2.0),
        unimodal=unimodal,
        critical=critical,
    )
    logger.info(
        f"Prism n={n}: κ_min={optimum.kappa_min:.6f} at t_L={optimum.t_l:.6f} "
        f"(ψ_L={optimum.psi_l_deg:.4f}°, critical={critical})"
    )
    return optimum


def prism_table(ns: Iterable[int] = (3, 4, 5, 6, 8, 12)) -> List[PrismOptimum]:
    return [optimize_prism(n) for n in ns]


def _significant(value: Any, digits: int) -> Any:
    if isinstance(value, float):
        return f"{value:.{digits}g}"
    return value


def prism_csv(rows: Iterable[PrismOptimum], digits: Optional[int] = None) -> str:
    """CSV of the prism table; digits=None keeps full precision."""
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=PRISM_CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        data = row.row()
        if digits is not None:
            data = {k: _significant(v, digits) for k, v in data.items()}
        writer.writerow(data)
    return buffer.getvalue()
