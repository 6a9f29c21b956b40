"""
Pyramid-supported (conventional) 3D gadget and the canonical placement shared
by every construction.

Canonical pose: A at the origin, the bisector of ∠B_LAB_R along −y, B_L in
the half-plane x<0. Directions on side σ carry the sign s_L=−1, s_R=+1 so
that mirrored gadgets are literal x-negations.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np

from .crease_pattern import (
    BOUNDARY,
    SKIP,
    Assignment,
    CreasePattern,
    CreasePatternBuilder,
)
from .geom_core import (
    GeometryError,
    Line,
    Ray2,
    Tolerance,
    angle_at,
    cross,
    distance,
    intersect,
    perpendicular_bisector,
    point,
    rot,
)
from .spec_params import (
    CONVENTIONAL,
    CheckReport,
    GadgetParams,
    Side,
    require_valid,
)

logger = logging.getLogger(__name__)

SIDES = (Side.L, Side.R)


@dataclass(eq=False)
class GadgetFrame:
    """A, B_σ and the standard directions of one gadget in canonical pose."""

    params: GadgetParams
    tol: Tolerance = field(default_factory=Tolerance)

    def __post_init__(self):
        half = self.params.gamma / 2.0
        ab = self.params.ab_length
        self.A = point(0.0, 0.0)
        self.u = {
            Side.L: np.array([-math.sin(half), -math.cos(half)]),
            Side.R: np.array([math.sin(half), -math.cos(half)]),
        }
        self.B = {side: ab * self.u[side] for side in SIDES}

    def dir_from_B(self, side: Side, theta: float) -> np.ndarray:
        """Direction at B_σ making angle theta with B_σ→A, turned toward the lower region."""
        return rot(-self.u[side], side.sign * theta)

    def dir_from_A(self, side: Side, theta: float) -> np.ndarray:
        """Direction at A making angle theta with A→B_σ, turned toward B_σ'."""
        return rot(self.u[side], -side.sign * theta)

    def ell(self, side: Side) -> np.ndarray:
        return rot(self.u[side], side.sign * self.params.delta(side))

    def j(self, side: Side) -> np.ndarray:
        return rot(self.u[side], side.sign * self.params.beta(side))

    def k(self, side: Side) -> np.ndarray:
        return rot(-self.u[side], -side.sign * (math.pi - self.params.beta(side)))

    def g_dir(self, side: Side) -> np.ndarray:
        """Direction of B_σG_σ (and B_σD_σ in the conventional gadget)."""
        return self.dir_from_B(side, math.pi - self.params.beta(side))

    def perpendicular_at_B(self, side: Side) -> Line:
        return Line(self.B[side], rot(self.ell(side), math.pi / 2.0))

    def C(self) -> np.ndarray:
        c = intersect(self.perpendicular_at_B(Side.L), self.perpendicular_at_B(Side.R), self.tol)
        if c is None:
            raise GeometryError("perpendiculars to ℓ_L and ℓ_R are parallel")
        return c

    def m_line(self, side: Side, c: np.ndarray) -> Line:
        """m_σ: the perpendicular bisector of B_σC (parallel to ℓ_σ)."""
        return perpendicular_bisector(self.B[side], c)

    def P(self, c: np.ndarray) -> np.ndarray:
        p = intersect(self.m_line(Side.L, c), self.m_line(Side.R, c), self.tol)
        if p is None:
            raise GeometryError("m_L and m_R are parallel")
        return p


@dataclass(eq=False)
class ConventionalGeometry:
    A: np.ndarray
    B_l: np.ndarray
    B_r: np.ndarray
    C: np.ndarray
    D_l: np.ndarray
    D_r: np.ndarray
    P: np.ndarray
    j_l: Ray2
    j_r: Ray2
    k_l: Ray2
    k_r: Ray2
    l_l: Ray2
    l_r: Ray2
    m_l: Ray2
    m_r: Ray2
    params: Optional[GadgetParams] = None

    def B(self, side: Side) -> np.ndarray:
        return self.B_l if side is Side.L else self.B_r

    def D(self, side: Side) -> np.ndarray:
        return self.D_l if side is Side.L else self.D_r

    def ray(self, name: str, side: Side) -> Ray2:
        """One of the outgoing rays j, k, l, m on side σ."""
        return getattr(self, f"{name}_{side.value.lower()}")

    def points(self) -> Dict[str, np.ndarray]:
        return {
            "A": self.A,
            "B_L": self.B_l,
            "B_R": self.B_r,
            "C": self.C,
            "D_L": self.D_l,
            "D_R": self.D_r,
        }


def conventional_geometry(
    params: GadgetParams, tol: Optional[Tolerance] = None
) -> ConventionalGeometry:
    tol = tol or Tolerance()
    require_valid(params, CONVENTIONAL, tol)
    frame = GadgetFrame(params, tol)
    c = frame.C()
    d = {}
    for side in SIDES:
        hit = intersect(Ray2(frame.B[side], frame.g_dir(side)), frame.m_line(side, c), tol)
        if hit is None:
            raise GeometryError(f"D_{side.value} does not exist")
        d[side] = hit
    geom = ConventionalGeometry(
        A=frame.A,
        B_l=frame.B[Side.L],
        B_r=frame.B[Side.R],
        C=c,
        D_l=d[Side.L],
        D_r=d[Side.R],
        P=frame.P(c),
        j_l=Ray2(frame.A, frame.j(Side.L)),
        j_r=Ray2(frame.A, frame.j(Side.R)),
        k_l=Ray2(frame.B[Side.L], frame.k(Side.L)),
        k_r=Ray2(frame.B[Side.R], frame.k(Side.R)),
        l_l=Ray2(frame.B[Side.L], frame.ell(Side.L)),
        l_r=Ray2(frame.B[Side.R], frame.ell(Side.R)),
        m_l=Ray2(d[Side.L], frame.ell(Side.L)),
        m_r=Ray2(d[Side.R], frame.ell(Side.R)),
        params=params,
    )
    logger.debug(
        f"Conventional geometry: C={c}, D_L={geom.D_l}, D_R={geom.D_r}"
    )
    return geom


def build_conventional(
    params: GadgetParams,
    tol: Optional[Tolerance] = None,
    debug_lines: bool = False,
) -> CreasePattern:
    """Crease pattern of the pyramid-supported gadget with its mountain/valley assignment."""
    tol = tol or Tolerance()
    geom = conventional_geometry(params, tol)
    builder = CreasePatternBuilder("conventional", tol, debug_lines)
    builder.metadata["params"] = params.to_degrees_dict()
    builder.add_points(geom.points())

    for side in SIDES:
        s = side.value
        builder.crease("A", f"B_{s}", Assignment.M)
        builder.crease(f"B_{s}", f"D_{s}", Assignment.M)
        builder.crease("A", f"D_{s}", Assignment.V)
        for name, origin, assignment in (
            ("j", "A", Assignment.M),
            ("l", f"B_{s}", Assignment.M),
            ("k", f"B_{s}", Assignment.V),
            ("m", f"D_{s}", Assignment.V),
        ):
            builder.ray(f"{name}_{s}", origin, geom.ray(name, side).direction, assignment)
        builder.construction_line(f"B_{s}", "C")
    builder.crease("D_L", "D_R", Assignment.V)

    builder.set_role("A", SKIP)
    for side in SIDES:
        s, o = side.value, side.other.value
        builder.set_role(
            f"B_{s}", BOUNDARY, first=f"k_{s}", last=f"D_{s}", outside="A", expected=0.0
        )
        builder.set_role(
            f"D_{s}",
            BOUNDARY,
            first=f"B_{s}",
            last=f"D_{o}",
            outside="A",
            expected=-angle_at(geom.D(side), geom.C, geom.D(side.other)),
        )
    cp = builder.build()
    logger.info(
        f"Built conventional gadget CP ({len(cp.edges)} edges, {dict(cp.assignment_counts())})"
    )
    return cp


def pyramid_checks(geom: ConventionalGeometry, tol: Optional[Tolerance] = None) -> CheckReport:
    """Angle facts that make the supporting triangular pyramid exist."""
    tol = tol or Tolerance()
    alpha = geom.params.alpha if geom.params else angle_at(geom.A, geom.B_l, geom.B_r)
    report = CheckReport(title="pyramid checks")

    sum_at_c = (
        angle_at(geom.B_l, geom.A, geom.D_l) + angle_at(geom.B_r, geom.A, geom.D_r) + alpha
    )
    report.add("solid_angle_at_C", 2.0 * math.pi - sum_at_c, tol, detail=f"sum={math.degrees(sum_at_c):.6f}°")

    lhs = angle_at(geom.A, geom.B_l, geom.D_l) + angle_at(geom.A, geom.B_r, geom.D_r)
    rhs = angle_at(geom.A, geom.D_l, geom.D_r)
    report.add("pyramid_inequality", lhs - rhs, tol, detail="∠B_LAD_L+∠B_RAD_R > ∠D_LAD_R")

    margins = [
        angle_at(geom.B(side), geom.A, geom.D(side)) - angle_at(geom.B(side), geom.A, geom.P)
        for side in SIDES
    ]
    order = cross(geom.D_l - geom.A, geom.D_r - geom.A) / max(
        distance(geom.A, geom.D_l) * distance(geom.A, geom.D_r), tol.length_eps
    )
    report.add(
        "AD_L_left_of_AD_R",
        min(margins + [order]),
        tol,
        detail="∠AB_σP < π−β_σ",
    )
    return report
