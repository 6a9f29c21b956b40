"""
Proportional division of an improved gadget (δ_L = δ_R = 0) into d stacked
gadgets in the ratio p_1 : ... : p_d, p_1 + ... + p_d = d.

Level n sits between the homothetic copies A^(n−1)B^(n−1) and A^(n)B^(n) of AB
about C, with A^(0) = B^(0) = C and A^(d) = A. Level 1 is the improved gadget
scaled by q_1/d about C; higher levels carry the repeating pleats whose shape
depends on whether D^(n) and G_σ^(n) exist.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, FrozenSet, List, Optional, Sequence, Tuple

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
from .critical_angles import critical_angles
from .geom_core import (
    GeometryError,
    Line,
    Ray2,
    Segment,
    Tolerance,
    close,
    distance,
    intersect,
    perpendicular_bisector,
    reflect_direction,
    reflect_point,
    unit,
)
from .improved_gadget import ByPhiL, resolve
from .spec_params import CONVENTIONAL, CheckReport, GadgetParams, Side, require_valid

logger = logging.getLogger(__name__)

M, V = Assignment.M, Assignment.V

PROPORTION_SUM_TOL = 1e-9


class DivisionError(ValueError):
    """Raised for an invalid division specification or an unbuildable level."""

    def __init__(self, message: str, level: Optional[int] = None):
        self.level = level
        super().__init__(message if level is None else f"Level {level}: {message}")


def _cot(x: float) -> float:
    return math.cos(x) / math.sin(x)


@dataclass(frozen=True)
class DivisionSpec:
    """
    d levels in the ratio p_1 : ... : p_d from the bottom.

    phi_overrides maps a level n ≥ 2 to its own φ_L^(n) (radians); other
    levels repeat φ_L^(1). inverted lists levels whose starred creases
    (A^(n−1)E_σ^(n) and E_L^(n)E_R^(n)) are swapped.
    """

    d: int
    proportions: Tuple[float, ...]
    phi_overrides: Dict[int, float] = field(default_factory=dict)
    inverted: FrozenSet[int] = frozenset()

    def __post_init__(self):
        if self.d < 2:
            raise DivisionError(f"A division needs at least 2 levels (got d={self.d})")
        if len(self.proportions) != self.d:
            raise DivisionError(
                f"Expected {self.d} proportions, got {len(self.proportions)}"
            )
        if any(p <= 0.0 for p in self.proportions):
            raise DivisionError(f"Proportions must be positive: {self.proportions}")
        total = sum(self.proportions)
        if abs(total - self.d) > PROPORTION_SUM_TOL:
            raise DivisionError(f"Proportions sum to {total}, expected {self.d}")
        for n in list(self.phi_overrides) + list(self.inverted):
            if not 2 <= n <= self.d:
                raise DivisionError(f"Per-level setting for level {n} outside 2..{self.d}")

    @classmethod
    def equal(cls, d: int, **kwargs) -> "DivisionSpec":
        return cls(d, tuple([1.0] * d), **kwargs)

    @classmethod
    def from_ratios(cls, ratios: Sequence[float], **kwargs) -> "DivisionSpec":
        """Normalizes arbitrary positive ratios so that they sum to their count."""
        d = len(ratios)
        total = float(sum(ratios))
        if total <= 0.0:
            raise DivisionError(f"Ratios must be positive: {list(ratios)}")
        return cls(d, tuple(d * float(p) / total for p in ratios), **kwargs)

    def p(self, n: int) -> float:
        return self.proportions[n - 1]

    def q(self, n: int) -> float:
        """q_n = p_1 + ... + p_n (q_0 = 0)."""
        return float(sum(self.proportions[:n]))

    def phi_for(self, n: int, phi_l: float) -> float:
        return self.phi_overrides.get(n, phi_l)

    def phi_levels(self, phi_l: float) -> List[float]:
        return [self.phi_for(n, phi_l) for n in range(1, self.d + 1)]


# --- Existence predicates ---


def d_coefficient(params: GadgetParams, phi_l_level: float) -> float:
    """(r²−1) / (2(r cos ψ_L^(n) − 1)); D^(n) exists iff q_n is below this times p_n."""
    r = 1.0 / math.cos(params.gamma / 2.0)
    psi = params.gamma / 2.0 - phi_l_level
    den = 2.0 * (r * math.cos(psi) - 1.0)
    if den <= 0.0:
        raise DivisionError(
            f"F' does not exist for φ_L={math.degrees(phi_l_level):.6f}° (r cos ψ ≤ 1)"
        )
    return (r * r - 1.0) / den


def g_coefficient(params: GadgetParams, side: Side, phi_l_level: float) -> float:
    """tan(γ/2)/2 · (cot(φ_σ^(n)/2) − cot β_σ)."""
    phi_side = phi_l_level if side is Side.L else params.gamma - phi_l_level
    return (
        math.tan(params.gamma / 2.0)
        / 2.0
        * (_cot(phi_side / 2.0) - _cot(params.beta(side)))
    )


def existence_D(params: GadgetParams, spec: DivisionSpec, n: int, phi_l: float) -> bool:
    """Whether D^(n) and D'^(n−1) exist (always true at n = 1)."""
    if n == 1:
        return True
    return spec.q(n) < d_coefficient(params, spec.phi_for(n, phi_l)) * spec.p(n)


def existence_G(
    params: GadgetParams, spec: DivisionSpec, n: int, side: Side, phi_l: float
) -> bool:
    """Whether G_σ^(n) and G'_σ^(n−1) exist (always true at n = 1)."""
    if n == 1:
        return True
    return spec.q(n) < g_coefficient(params, side, spec.phi_for(n, phi_l)) * spec.p(n)


def phi_bound_holds(
    params: GadgetParams, side: Side, phi_l_level: float, phi_l_below: float
) -> bool:
    """tan(φ_σ^(n)/2) ≥ 1 / (cot(φ_σ^(n−1)/2) + 2/tan(γ/2))."""
    g = params.gamma
    upper = phi_l_level if side is Side.L else g - phi_l_level
    lower = phi_l_below if side is Side.L else g - phi_l_below
    bound = 1.0 / (_cot(lower / 2.0) + 2.0 / math.tan(g / 2.0))
    return math.tan(upper / 2.0) >= bound - 1e-12


# --- Geometry ---


def _name(base: str, n: int, side: Optional[Side] = None) -> str:
    return f"{base}_{side.value}^{n}" if side is not None else f"{base}^{n}"


@dataclass
class DivisionLevel:
    n: int
    phi_l: float
    p: float
    q: float
    d_coefficient: Optional[float]
    g_coefficient: Dict[Side, Optional[float]]
    has_D: bool
    has_G: Dict[Side, bool]
    critical: Dict[Side, bool]
    inverted: bool = False
    upper_assignment: Optional[Assignment] = None

    def column(self, side: Side) -> str:
        if self.n == 1:
            return "level-1"
        d = "D" if self.has_D else "noD"
        g = "G" if self.has_G[side] else "noG"
        return f"{d},{g}" + (",critical" if self.critical[side] else "")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n": self.n,
            "phi_l_deg": math.degrees(self.phi_l),
            "p": self.p,
            "q": self.q,
            "d_coefficient": self.d_coefficient,
            "g_coefficient": {s.value: c for s, c in self.g_coefficient.items()},
            "has_D": self.has_D,
            "has_G": {s.value: v for s, v in self.has_G.items()},
            "critical": {s.value: v for s, v in self.critical.items()},
            "inverted": self.inverted,
            "upper_assignment": self.upper_assignment.value if self.upper_assignment else None,
            "columns": {s.value: self.column(s) for s in SIDES},
        }


@dataclass(eq=False)
class DivisionGeometry:
    params: GadgetParams
    spec: DivisionSpec
    phi_l: float
    unit_length: float
    C: np.ndarray
    points: Dict[str, np.ndarray]
    levels: List[DivisionLevel]
    frame: GadgetFrame = field(repr=False, default=None)

    def point(self, name: str) -> np.ndarray:
        return self.points[name]

    def get(self, name: str) -> Optional[np.ndarray]:
        return self.points.get(name)

    def A(self, n: int) -> np.ndarray:
        return self.C if n == 0 else self.points[_name("A", n)]

    def B(self, side: Side, n: int) -> np.ndarray:
        return self.C if n == 0 else self.points[_name("B", n, side)]

    def E(self, side: Side, n: int) -> np.ndarray:
        return self.points[_name("E", n, side)]

    def level(self, n: int) -> DivisionLevel:
        return self.levels[n - 1]


def division_geometry(
    params: GadgetParams,
    phi_l: float,
    spec: DivisionSpec,
    tol: Optional[Tolerance] = None,
) -> DivisionGeometry:
    tol = tol or Tolerance()
    require_valid(params, CONVENTIONAL, tol)
    resolve(ByPhiL(phi_l), params, tol)
    g = params.gamma
    zl, zr = critical_angles(params, tol)
    zetas = {Side.L: zl, Side.R: zr}
    phis_1 = {Side.L: phi_l, Side.R: g - phi_l}
    critical_1 = {s: abs(phis_1[s] / 2.0 - zetas[s]) <= tol.angle_eps for s in SIDES}

    frame = GadgetFrame(params, tol)
    c = frame.C()
    d = spec.d
    unit_length = params.ab_length / d
    pts: Dict[str, np.ndarray] = {}

    def homothety(p: np.ndarray, n: int) -> np.ndarray:
        return c + (spec.q(n) / d) * (p - c)

    for n in range(1, d + 1):
        pts[_name("A", n)] = homothety(frame.A, n)
        for side in SIDES:
            pts[_name("B", n, side)] = homothety(frame.B[side], n)

    geom = DivisionGeometry(params, spec, phi_l, unit_length, c, pts, [], frame)
    levels: List[DivisionLevel] = []
    for n in range(1, d + 1):
        phi_n = spec.phi_for(n, phi_l)
        if n > 1 and not 0.0 < phi_n < g:
            raise DivisionError(f"φ_L={math.degrees(phi_n):.6f}° outside (0°, γ)", n)
        phis = {Side.L: phi_n, Side.R: g - phi_n}
        a_n, a_prev = geom.A(n), geom.A(n - 1)

        for side in SIDES:
            bisector = Ray2(a_n, frame.dir_from_A(side, phis[side] / 2.0))
            m_line = perpendicular_bisector(geom.B(side, n - 1), geom.B(side, n))
            e = intersect(bisector, m_line, tol)
            if e is None:
                raise DivisionError(f"E_{side.value} does not exist", n)
            pts[_name("E", n, side)] = e
        e_line = Line.through(geom.E(Side.L, n), geom.E(Side.R, n))

        f_prime = intersect(Ray2(a_n, frame.dir_from_A(Side.L, phi_n)), e_line, tol)
        if f_prime is None:
            raise DivisionError("ray A^(n)F'^(n) misses E_LE_R", n)

        has_D = existence_D(params, spec, n, phi_l)
        geometric_D = distance(a_n, f_prime) > spec.q(n) * unit_length
        if n > 1 and has_D != geometric_D:
            logger.warning(f"Level {n}: D^(n) predicate {has_D} disagrees with the construction")
        if has_D:
            pts[_name("D", n)] = a_n + spec.q(n) * unit_length * unit(f_prime - a_n)
        if n > 1:
            if has_D:
                pts[_name("D'", n - 1)] = a_prev + spec.q(n - 1) * unit_length * unit(
                    f_prime - a_prev
                )
            else:
                pts[_name("F'", n)] = f_prime

        inverted = n in spec.inverted
        if inverted and has_D:
            raise DivisionError("starred creases can only be inverted when D^(n) is absent", n)
        upper = None
        if n > 1:
            upper = V if inverted else M
            if upper is M:
                below = spec.phi_for(n - 1, phi_l)
                for side in SIDES:
                    if not phi_bound_holds(params, side, phi_n, below):
                        raise DivisionError(
                            f"φ_{side.value}^(n) violates the lower bound from φ^(n−1) "
                            f"while A^(n−1)E_{side.value}^(n) is a mountain fold",
                            n,
                        )

        has_G, critical = {}, {}
        for side in SIDES:
            s = side.value
            b_n, b_prev, e = geom.B(side, n), geom.B(side, n - 1), geom.E(side, n)
            k_prime = frame.g_dir(side)
            has_G[side] = existence_G(params, spec, n, side, phi_l)
            critical[side] = critical_1[side] and abs(phi_n - phi_l) <= tol.angle_eps
            m_line = Line(e, frame.ell(side))
            if has_G[side]:
                g_pt = intersect(Ray2(b_n, k_prime), Segment(a_n, e), tol)
                if g_pt is None:
                    raise DivisionError(f"k'_{s} misses A^(n)E_{s}^(n)", n)
                pts[_name("G", n, side)] = g_pt
                if n > 1:
                    g_low = intersect(Ray2(b_prev, frame.k(side)), Segment(a_prev, e), tol)
                    if g_low is None:
                        raise DivisionError(f"k_{s}^(n−1) misses A^(n−1)E_{s}^(n)", n)
                    pts[_name("G'", n - 1, side)] = g_low
            else:
                j = intersect(Ray2(b_n, k_prime), m_line, tol)
                if j is None:
                    raise DivisionError(f"k'_{s} misses m_{s}^(n)", n)
                pts[_name("J", n, side)] = j

            if n == 1 or not has_D and not has_G[side]:
                continue
            mirrored = reflect_direction(k_prime, e - a_n)
            if has_D:
                k_pt = intersect(
                    Line(pts[_name("D", n)], pts[_name("D", 1)] - geom.E(side, 1)), e_line, tol
                )
                if k_pt is None:
                    raise DivisionError(f"K_{s} does not exist", n)
                pts[_name("K", n, side)] = k_pt
                if not has_G[side]:
                    m_pt = intersect(Ray2(pts[_name("D", n)], mirrored), e_line, tol)
                    if m_pt is None:
                        raise DivisionError(f"M_{s} does not exist", n)
                    if critical[side]:
                        gap = distance(k_pt, m_pt)
                        if gap > max(tol.length_eps, 1e-7 * params.ab_length):
                            raise DivisionError(
                                f"K_{s} and M_{s} differ by {gap:.3e} on a critical side", n
                            )
                    else:
                        pts[_name("M", n, side)] = m_pt
            else:
                g_pt = pts[_name("G", n, side)]
                m_pt = None
                if not close(g_pt, e, tol):
                    try:
                        m_pt = intersect(Line(g_pt, mirrored), e_line, tol)
                    except GeometryError:
                        m_pt = None
                pts[_name("M", n, side)] = e if m_pt is None else m_pt

        level = DivisionLevel(
            n=n,
            phi_l=phi_n,
            p=spec.p(n),
            q=spec.q(n),
            d_coefficient=d_coefficient(params, phi_n) if n > 1 else None,
            g_coefficient={
                side: g_coefficient(params, side, phi_n) if n > 1 else None for side in SIDES
            },
            has_D=has_D,
            has_G=has_G,
            critical=critical if n > 1 else dict(critical_1),
            inverted=inverted,
            upper_assignment=upper,
        )
        levels.append(level)
        logger.debug(f"Division level {n}: {level.to_dict()['columns']}")

    geom.levels = levels
    logger.info(
        f"Division geometry: d={d}, D^(n) at levels {[lv.n for lv in levels if lv.has_D]}"
    )
    return geom


# --- Crease pattern ---


def _level_creases(geom: DivisionGeometry, level: DivisionLevel) -> List[Tuple[str, str, Assignment]]:
    n = level.n
    A, A_prev = _name("A", n), _name("A", n - 1)
    D, D_prime, F_prime = _name("D", n), _name("D'", n - 1), _name("F'", n)
    creases: List[Tuple[str, str, Assignment]] = []
    if n == 1:
        creases.append((A, D, M))
    elif level.has_D:
        creases += [(A, D, M), (A_prev, D_prime, V)]
    else:
        creases += [(A, F_prime, M), (A_prev, F_prime, V)]

    for side in SIDES:
        s = side.value
        B, B_prev = _name("B", n, side), _name("B", n - 1, side)
        E, G, J = _name("E", n, side), _name("G", n, side), _name("J", n, side)
        G_low, K, M_pt = _name("G'", n - 1, side), _name("K", n, side), _name("M", n, side)
        creases.append((A, E, V))
        if n == 1:
            if level.critical[side]:
                creases += [(B, E, M), (D, E, V)]
            else:
                creases += [(B, G, M), (D, E, M), (D, G, V)]
            continue

        creases.append((A_prev, E, level.upper_assignment))
        if level.has_D:
            creases += [(D, K, M), (D_prime, K, V)]
        if level.has_G[side]:
            creases += [(B, G, M), (B_prev, G_low, V)]
            if level.has_D:
                creases += [(D, G, V), (D_prime, G_low, M)]
            else:
                creases += [(G, M_pt, V), (G_low, M_pt, M)]
        else:
            creases += [(B, J, M), (B_prev, J, V)]
            if level.has_D and not level.critical[side]:
                creases += [(D, M_pt, V), (D_prime, M_pt, M)]
        logger.debug(f"Level {n} side {s}: column {level.column(side)}")
    return creases


def build_division(
    params: GadgetParams,
    phi_l: float,
    spec: DivisionSpec,
    tol: Optional[Tolerance] = None,
    debug_lines: bool = False,
) -> Tuple[DivisionGeometry, CreasePattern]:
    """Geometry and crease pattern of the d-level division with its mountain/valley assignment."""
    tol = tol or Tolerance()
    geom = division_geometry(params, phi_l, spec, tol)
    frame = geom.frame
    d = spec.d
    builder = CreasePatternBuilder("division", tol, debug_lines)
    builder.metadata.update(
        {
            "params": params.to_degrees_dict(),
            "phi_l_deg": float(math.degrees(phi_l)),
            "proportions": list(spec.proportions),
            "levels": [lv.to_dict() for lv in geom.levels],
        }
    )
    builder.add_points(geom.points)
    if debug_lines:
        builder.add_point("C", geom.C)
        builder.construction_line(_name("A", d), "C")

    top = _name("A", d)
    for side in SIDES:
        s = side.value
        builder.ray(f"j_{s}", top, frame.j(side), M)
        builder.ray(f"k_{s}", _name("B", d, side), frame.k(side), V)
    for level in geom.levels:
        n = level.n
        e_asg = M if level.inverted else V
        builder.crease(_name("E", n, Side.L), _name("E", n, Side.R), e_asg)
        for side in SIDES:
            s = side.value
            builder.crease(_name("A", n), _name("B", n, side), M)
            builder.ray(f"l_{s}^{n}", _name("B", n, side), frame.ell(side), M)
            builder.ray(f"m_{s}^{n}", _name("E", n, side), frame.ell(side), V)
        for a, b, asg in _level_creases(geom, level):
            builder.crease(a, b, asg)

    special = {top, _name("D", 1)}
    special.update(_name("D", n) for n in range(2, d + 1))
    special.update(_name("D'", n) for n in range(1, d))
    special.update(_name("G", 1, side) for side in SIDES)
    for label in geom.points:
        if label not in special:
            builder.set_role(label, INTERIOR)
    builder.set_role(top, SKIP)
    for n in range(2, d + 1):
        builder.set_role(_name("D", n), SKIP)
        builder.set_role(_name("D'", n - 1), SKIP)
    for side in SIDES:
        builder.set_role(
            _name("G", 1, side),
            BOUNDARY,
            first=_name("B", 1, side),
            last=_name("D", 1),
            outside=_name("A", 1),
        )
    builder.set_role(
        _name("D", 1),
        BOUNDARY,
        first=_name("G", 1, Side.L),
        last=_name("G", 1, Side.R),
        outside=_name("A", 1),
        expected=params.alpha,
        positive=geom.C - geom.point(_name("D", 1)),
    )
    cp = builder.build()
    logger.info(
        f"Built division CP: d={d}, {len(cp.edges)} edges, {dict(cp.assignment_counts())}"
    )
    return geom, cp


# --- Identities ---


def division_identities(geom: DivisionGeometry, tol: Optional[Tolerance] = None) -> CheckReport:
    """Length identities of the levels and the constructive meaning of the existence predicates."""
    tol = tol or Tolerance()
    params, spec = geom.params, geom.spec
    u = geom.unit_length
    eps = max(tol.length_eps, 1e-9 * spec.d) * max(1.0, params.ab_length)
    report = CheckReport(title="division identities")

    def agree(name: str, measured: float, expected: float):
        report.add_flag(
            name, abs(measured - expected) <= eps, detail=f"{measured:.12f} vs {expected:.12f}"
        )

    for level in geom.levels:
        n = level.n
        a_n, a_prev = geom.A(n), geom.A(n - 1)
        for side in SIDES:
            agree(f"AB_length_{side.value}^{n}", distance(a_n, geom.B(side, n)), level.q * u)
        if n == 1:
            agree("AD_length^1", distance(a_n, geom.point(_name("D", 1))), level.p * u)
            continue
        e_line = Line.through(geom.E(Side.L, n), geom.E(Side.R, n))
        f_prime = intersect(Ray2(a_n, geom.frame.dir_from_A(Side.L, level.phi_l)), e_line, tol)
        coef = level.d_coefficient
        upper = distance(a_n, f_prime)
        lower = distance(a_prev, f_prime)
        agree(f"AF'_upper^{n}", upper, coef * level.p * u)
        agree(f"AF'_lower^{n}", lower, (coef - 1.0) * level.p * u)
        agree(f"AF'_shift^{n}", lower - spec.q(n - 1) * u, upper - level.q * u)
        report.add_flag(f"D_exists_constructively^{n}", level.has_D == (upper > level.q * u))
        if level.has_D:
            d_n, d_prev = geom.point(_name("D", n)), geom.point(_name("D'", n - 1))
            mirrored = reflect_point(d_n, e_line)
            report.add_flag(f"D_mirrors_D'^{n}", distance(mirrored, d_prev) <= eps)
            # D^(n) and D'^(n−1) sit on their levels' arcs and fold onto each other about E^(n).
            agree(f"AD_length^{n}", distance(a_n, d_n), level.q * u)
            agree(f"AD'_length^{n - 1}", distance(a_prev, d_prev), spec.q(n - 1) * u)
            agree(f"F'D_fold^{n}", distance(f_prime, d_n), distance(f_prime, d_prev))
            d_below = geom.get(_name("D", n - 1))
            if d_below is not None:
                agree(
                    f"D'_on_arc^{n - 1}",
                    distance(a_prev, d_prev),
                    distance(a_prev, d_below),
                )
        for side in SIDES:
            s = side.value
            hit = intersect(
                Ray2(geom.B(side, n), geom.frame.g_dir(side)),
                Segment(a_n, geom.E(side, n)),
                tol,
            )
            report.add_flag(f"G_{s}_exists_constructively^{n}", level.has_G[side] == (hit is not None))
    return report


def report_dict(geom: DivisionGeometry) -> Dict[str, Any]:
    return {
        "d": geom.spec.d,
        "proportions": list(geom.spec.proportions),
        "phi_l_deg": math.degrees(geom.phi_l),
        "levels": [lv.to_dict() for lv in geom.levels],
    }
