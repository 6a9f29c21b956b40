"""
Critical angles ζ_L, ζ_R: the per-side upper bounds on φ_σ/2 for which the
improved gadget is constructible. Computed both by ruler-and-compass
construction and by closed form.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .conventional_gadget import SIDES, GadgetFrame, conventional_geometry
from .geom_core import (
    GeometryError,
    Ray2,
    Segment,
    Tolerance,
    angle_at,
    distance,
    intersect,
)
from .spec_params import (
    CheckReport,
    DerivedQuantities,
    GadgetParams,
    Side,
    require_derived,
    require_valid,
)

logger = logging.getLogger(__name__)


@dataclass(eq=False)
class CriticalAngleConstruction:
    P: np.ndarray
    Q_l: np.ndarray
    Q_r: np.ndarray
    zeta_l: float
    zeta_r: float

    def Q(self, side: Side) -> np.ndarray:
        return self.Q_l if side is Side.L else self.Q_r

    def zeta(self, side: Side) -> float:
        return self.zeta_l if side is Side.L else self.zeta_r


def zeta_geometric(
    params: GadgetParams, tol: Optional[Tolerance] = None
) -> CriticalAngleConstruction:
    """ζ_σ = ∠B_σAQ_σ where ray n_σ meets the chain A–P–m_σ."""
    tol = tol or Tolerance()
    require_valid(params, tol=tol)
    frame = GadgetFrame(params, tol)
    c = frame.C()
    p = frame.P(c)
    q = {}
    for side in SIDES:
        n_ray = Ray2(
            frame.B[side],
            frame.dir_from_B(side, math.pi - params.beta(side) + params.delta(side)),
        )
        hit = intersect(n_ray, Segment(frame.A, p), tol)
        if hit is None:
            hit = intersect(n_ray, Ray2(p, frame.ell(side)), tol)
        if hit is None:
            raise GeometryError(f"n_{side.value} misses the chain A–P–m_{side.value}")
        q[side] = hit
    zl = angle_at(frame.A, frame.B[Side.L], q[Side.L])
    zr = angle_at(frame.A, frame.B[Side.R], q[Side.R])
    logger.debug(
        f"Geometric critical angles: ζ_L={math.degrees(zl):.9f}°, ζ_R={math.degrees(zr):.9f}°"
    )
    return CriticalAngleConstruction(P=p, Q_l=q[Side.L], Q_r=q[Side.R], zeta_l=zl, zeta_r=zr)


def _zeta_side(
    derived: DerivedQuantities, beta: float, delta_other: float, side: Side, tol: Tolerance
) -> float:
    g = derived.gamma
    if beta + g / 2.0 + delta_other >= math.pi - tol.angle_eps:
        return g / 2.0
    d = derived.d(side)
    num = 1.0 - d * derived.inv_c_prime
    den = derived.inv_c + derived.inv_c_prime + (1.0 + d * derived.inv_c) * derived.inv_b(side)
    return math.atan2(num, den)


def zeta_closed_form(
    derived: DerivedQuantities,
    beta_l: float,
    beta_r: float,
    delta_l: float,
    delta_r: float,
    tol: Optional[Tolerance] = None,
) -> Tuple[float, float]:
    tol = tol or Tolerance()
    return (
        _zeta_side(derived, beta_l, delta_r, Side.L, tol),
        _zeta_side(derived, beta_r, delta_l, Side.R, tol),
    )


def critical_angles(
    params: GadgetParams, tol: Optional[Tolerance] = None
) -> Tuple[float, float]:
    """(ζ_L, ζ_R) from the closed form."""
    derived = require_derived(params, tol)
    return zeta_closed_form(
        derived, params.beta_l, params.beta_r, params.delta_l, params.delta_r, tol
    )


def zeta(params: GadgetParams, side: Side, tol: Optional[Tolerance] = None) -> float:
    zl, zr = critical_angles(params, tol)
    return zl if side is Side.L else zr


def check_zeta_theorems(params: GadgetParams, tol: Optional[Tolerance] = None) -> CheckReport:
    tol = tol or Tolerance()
    derived = require_derived(params, tol)
    zl, zr = zeta_closed_form(
        derived, params.beta_l, params.beta_r, params.delta_l, params.delta_r, tol
    )
    g = derived.gamma
    report = CheckReport(title="critical angle theorems")
    report.add("zeta_sum_exceeds_half_gamma", zl + zr - g / 2.0, tol, detail="ζ_L+ζ_R > γ/2")
    report.add(
        "zeta_sum_exceeds_gamma",
        zl + zr - g,
        tol,
        informational=True,
        detail="ζ_L+ζ_R > γ (informational)",
    )
    for side, z in ((Side.L, zl), (Side.R, zr)):
        g_side = derived.gamma_side(side)
        steep = params.beta(side) + g_side / 2.0 - math.pi / 2.0 <= tol.angle_eps
        small = z - g_side / 2.0 <= tol.angle_eps
        report.add_flag(
            f"half_gamma_biconditional_{side.value}",
            steep == small,
            detail="β_σ+γ_σ/2 ≤ π/2 ⇔ ζ_σ ≤ γ_σ/2",
        )

    construction = zeta_geometric(params, tol)
    frame = GadgetFrame(params, tol)
    expected_abp = g / 2.0 + params.delta_l + params.delta_r
    for side in SIDES:
        measured = angle_at(frame.B[side], frame.A, construction.P)
        report.add_flag(
            f"angle_ABP_{side.value}",
            abs(measured - expected_abp) <= tol.angle_eps,
            detail=f"∠AB_σP={math.degrees(measured):.9f}°",
        )
    report.add_flag(
        "AP_bisects_BLBR",
        abs(
            distance(construction.P, frame.B[Side.L])
            - distance(construction.P, frame.B[Side.R])
        )
        <= tol.length_eps,
        detail="P equidistant from B_L and B_R",
    )
    for side, z in ((Side.L, zl), (Side.R, zr)):
        report.add_flag(
            f"zeta_forms_agree_{side.value}",
            abs(construction.zeta(side) - z) <= tol.angle_eps,
        )
    if not params.has_delta:
        conv = conventional_geometry(params, tol)
        for side in SIDES:
            report.add_flag(
                f"Q_matches_conventional_D_{side.value}",
                distance(construction.Q(side), conv.D(side)) <= tol.length_eps,
            )
    logger.info(
        f"Critical angles: ζ_L={math.degrees(zl):.6f}°, ζ_R={math.degrees(zr):.6f}°, ok={report.ok}"
    )
    return report
