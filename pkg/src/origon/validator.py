"""
Constructibility of improved gadgets and local flat-foldability of crease
patterns.

Flat-foldability is checked from measured coordinates: at every interior
vertex the alternating sum of sector angles must vanish; at a boundary vertex
of the lower region only the sectors inside its wedge are summed and compared
with the expected value stored in the vertex role.
"""

import logging
import math
from collections import Counter
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional

from .crease_pattern import (
    BOUNDARY,
    EDGE,
    INTERIOR,
    SKIP,
    Assignment,
    CreasePattern,
    VertexRole,
)
from .critical_angles import critical_angles
from .geom_core import Tolerance, heading
from .spec_params import GadgetParams, Side, require_derived

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi


class FoldabilityError(ValueError):
    """Raised for vertices the local check cannot interpret (odd interior degree)."""


# --- Constructibility ---


def rho(psi: float, r: float) -> float:
    """ρ = atan(sin ψ / (r − cos ψ)); r > 1 keeps the denominator positive."""
    if r <= 1.0:
        raise ValueError(f"rho requires r > 1 (got {r})")
    return math.atan2(math.sin(psi), r - math.cos(psi))


@dataclass
class SideVerdict:
    side: Side
    constructible: bool
    margin: float


def constructible_by_phi(
    params: GadgetParams, phi_l: float, tol: Optional[Tolerance] = None
) -> Dict[Side, SideVerdict]:
    """Per-side test φ_σ/2 ≤ ζ_σ with φ_R = γ − φ_L."""
    tol = tol or Tolerance()
    zl, zr = critical_angles(params, tol)
    phis = {Side.L: phi_l, Side.R: params.gamma - phi_l}
    verdicts = {}
    for side, z in ((Side.L, zl), (Side.R, zr)):
        margin = z - phis[side] / 2.0
        in_range = 0.0 < phis[side] < params.gamma
        verdicts[side] = SideVerdict(side, in_range and margin >= -tol.angle_eps, margin)
    return verdicts


def psi_margin(params: GadgetParams, side: Side, psi: float, tol: Optional[Tolerance] = None) -> float:
    """β_σ + γ_σ/2 + atan(((r+1)/(r−1)) tan(ψ_σ/2)) − π/2."""
    derived = require_derived(params, tol)
    r = derived.r
    return (
        params.beta(side)
        + derived.gamma_side(side) / 2.0
        + math.atan((r + 1.0) / (r - 1.0) * math.tan(psi / 2.0))
        - math.pi / 2.0
    )


def rho_margin(params: GadgetParams, side: Side, psi: float, tol: Optional[Tolerance] = None) -> float:
    """β_σ + γ_σ/2 + ψ_σ/2 + ρ_σ − π/2 (same sign as psi_margin)."""
    derived = require_derived(params, tol)
    return (
        params.beta(side)
        + derived.gamma_side(side) / 2.0
        + psi / 2.0
        + rho(psi, derived.r)
        - math.pi / 2.0
    )


def constructible_by_psi(
    params: GadgetParams, psi_l: float, tol: Optional[Tolerance] = None
) -> Dict[Side, SideVerdict]:
    """Per-side test in terms of ψ_σ = γ_σ − φ_σ, with ψ_R = −ψ_L."""
    tol = tol or Tolerance()
    derived = require_derived(params, tol)
    psis = {Side.L: psi_l, Side.R: -psi_l}
    verdicts = {}
    for side in (Side.L, Side.R):
        g_side = derived.gamma_side(side)
        g_other = derived.gamma_side(side.other)
        margin = psi_margin(params, side, psis[side], tol)
        in_range = -g_other < psis[side] < g_side
        verdicts[side] = SideVerdict(side, in_range and margin >= -tol.angle_eps, margin)
    return verdicts


def flat_extrusion_margins(
    params: GadgetParams, psi_l: float, tol: Optional[Tolerance] = None
) -> Dict[Side, float]:
    """Equality margins of the ψ-form bound; both vanish only for flat extrusions (α = β_L+β_R)."""
    return {
        Side.L: rho_margin(params, Side.L, psi_l, tol),
        Side.R: rho_margin(params, Side.R, -psi_l, tol),
    }


# --- Local flat-foldability ---


@dataclass
class VertexCheck:
    vertex: int
    label: Optional[str]
    kind: str
    alternating_sum: float
    expected: float
    passed: bool
    degree: int
    maekawa: Optional[bool] = None


@dataclass
class FoldabilityReport:
    entries: List[VertexCheck] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(e.passed for e in self.entries)

    def failures(self) -> List[VertexCheck]:
        return [e for e in self.entries if not e.passed]

    def entry(self, vertex: int) -> Optional[VertexCheck]:
        for e in self.entries:
            if e.vertex == vertex:
                return e
        return None

    def to_dict(self) -> Dict[str, Any]:
        return {"ok": self.ok, "vertices": [asdict(e) for e in self.entries]}


def infer_role(cp: CreasePattern, index: int) -> VertexRole:
    incident = cp.edges_at(index)
    if any(asg is Assignment.B for _, asg in incident):
        return VertexRole(kind=EDGE)
    if sum(1 for _, asg in incident if asg.is_fold) <= 1:
        return VertexRole(kind=SKIP)
    return VertexRole(kind=INTERIOR)


def _fold_headings(cp: CreasePattern, index: int, tol: Tolerance) -> List[float]:
    origin = cp.vertices[index]
    headings = sorted(
        heading(cp.vertices[other] - origin)
        for other, asg in cp.edges_at(index)
        if asg.is_fold
    )
    unique: List[float] = []
    for h in headings:
        if not unique or h - unique[-1] > tol.angle_eps:
            unique.append(h)
    if len(unique) > 1 and unique[0] + TWO_PI - unique[-1] <= tol.angle_eps:
        unique.pop()
    return unique


def _fold_counts(cp: CreasePattern, index: int) -> Counter:
    return Counter(asg.value for _, asg in cp.edges_at(index) if asg.is_fold)


def _alternate(sectors: List[float], positive: int = 0) -> float:
    return sum(((-1) ** ((i - positive) % 2)) * s for i, s in enumerate(sectors))


def _interior_sum(headings: List[float]) -> float:
    sectors = [
        (headings[(i + 1) % len(headings)] - headings[i]) % TWO_PI
        for i in range(len(headings))
    ]
    return _alternate(sectors)


def _offset(h: float, start: float, tol: Tolerance) -> float:
    o = (h - start) % TWO_PI
    return 0.0 if o > TWO_PI - tol.angle_eps else o


def _boundary_sum(headings: List[float], role: VertexRole, tol: Tolerance) -> float:
    first, last = heading(role.first), heading(role.last)
    sweep = _offset(last, first, tol)
    reverse = False
    if role.outside is not None and _offset(heading(role.outside), first, tol) < sweep:
        first, last = last, first
        sweep = _offset(last, first, tol)
        reverse = True
    offsets = sorted(
        {0.0, sweep}
        | {o for o in (_offset(h, first, tol) for h in headings) if o <= sweep + tol.angle_eps}
    )
    merged: List[float] = []
    for o in offsets:
        if not merged or o - merged[-1] > tol.angle_eps:
            merged.append(min(o, sweep))
    sectors = [merged[i + 1] - merged[i] for i in range(len(merged) - 1)]
    positive = 0
    if role.positive is not None:
        p = _offset(heading(role.positive), first, tol)
        for i in range(len(sectors)):
            if merged[i] < p < merged[i + 1]:
                positive = i
                break
    elif reverse:
        positive = len(sectors) - 1
    return _alternate(sectors, positive)


def kawasaki_check(cp: CreasePattern, tol: Optional[Tolerance] = None) -> FoldabilityReport:
    """Alternating sector-angle sums at every constrained vertex of cp."""
    tol = tol or Tolerance()
    report = FoldabilityReport()
    for index in range(cp.num_vertices):
        role = cp.roles[index] if index < len(cp.roles) and cp.roles[index] else None
        role = role or infer_role(cp, index)
        if role.kind in (EDGE, SKIP):
            continue
        headings = _fold_headings(cp, index, tol)
        counts = _fold_counts(cp, index)
        label = cp.label_of(index)
        if role.kind == INTERIOR:
            if len(headings) % 2:
                raise FoldabilityError(
                    f"Non-manifold vertex {label or index} at {cp.vertices[index]}: {len(headings)} creases"
                )
            alt = _interior_sum(headings)
            maekawa = abs(counts["M"] - counts["V"]) == 2
        elif role.kind == BOUNDARY:
            if role.first is None or role.last is None:
                raise FoldabilityError(f"Boundary vertex {label or index} lacks its wedge")
            alt = _boundary_sum(headings, role, tol)
            maekawa = None
        else:
            continue
        passed = abs(alt - role.expected) <= tol.angle_eps
        report.entries.append(
            VertexCheck(
                vertex=index,
                label=label,
                kind=role.kind,
                alternating_sum=alt,
                expected=role.expected,
                passed=passed,
                degree=len(headings),
                maekawa=maekawa,
            )
        )
        if not passed:
            logger.warning(
                f"Vertex {label or index} ({role.kind}) fails: sum={math.degrees(alt):.9f}°, "
                f"expected {math.degrees(role.expected):.9f}°"
            )
    logger.info(
        f"Flat-foldability check: {len(report.entries)} vertices, {len(report.failures())} failure(s)"
    )
    return report


def sector_angles(cp: CreasePattern, index: int, tol: Optional[Tolerance] = None) -> List[float]:
    """Consecutive angles between M/V creases around a vertex, counterclockwise from +x."""
    tol = tol or Tolerance()
    headings = _fold_headings(cp, index, tol)
    return [
        (headings[(i + 1) % len(headings)] - headings[i]) % TWO_PI
        for i in range(len(headings))
    ]

