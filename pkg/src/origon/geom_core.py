"""
Planar geometry kernel: points, rays, segments and lines with tolerance-aware
intersection, circumcenters and signed angles.

Points are numpy arrays of shape (2,). All angles are in radians.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Tuple, Union

import numpy as np

from . import config

logger = logging.getLogger(__name__)


class GeometryError(ValueError):
    """Raised for degenerate geometric input (overlaps, collinear triples, zero legs)."""


@dataclass(frozen=True)
class Tolerance:
    angle_eps: float = field(default_factory=lambda: config.ANGLE_EPS)
    length_eps: float = field(default_factory=lambda: config.LENGTH_EPS)

    def __post_init__(self):
        if not (self.angle_eps > 0 and self.length_eps > 0):
            raise ValueError(
                f"Tolerances must be positive (angle_eps={self.angle_eps}, length_eps={self.length_eps})"
            )


def point(x: float, y: float) -> np.ndarray:
    return np.array([float(x), float(y)])


def as_point(p) -> np.ndarray:
    arr = np.asarray(p, dtype=float).reshape(2)
    if not np.all(np.isfinite(arr)):
        raise GeometryError(f"non-finite coordinates: {arr}")
    return arr


def cross(a: np.ndarray, b: np.ndarray) -> float:
    return float(a[0] * b[1] - a[1] * b[0])


def norm(v: np.ndarray) -> float:
    return float(math.hypot(v[0], v[1]))


def distance(p: np.ndarray, q: np.ndarray) -> float:
    return norm(np.asarray(q) - np.asarray(p))


def unit(v: np.ndarray) -> np.ndarray:
    length = norm(v)
    if length == 0.0:
        raise GeometryError("zero-length leg")
    return np.asarray(v, dtype=float) / length


def rot(v: np.ndarray, theta: float) -> np.ndarray:
    """Rotates v counterclockwise by theta."""
    c, s = math.cos(theta), math.sin(theta)
    return np.array([c * v[0] - s * v[1], s * v[0] + c * v[1]])


def direction(theta: float) -> np.ndarray:
    return np.array([math.cos(theta), math.sin(theta)])


def heading(v: np.ndarray) -> float:
    """Angle of v measured from +x, in [0, 2π)."""
    return math.atan2(v[1], v[0]) % (2.0 * math.pi)


def midpoint(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    return (np.asarray(p) + np.asarray(q)) / 2.0


def reflect_direction(v: np.ndarray, axis: np.ndarray) -> np.ndarray:
    """Mirror image of direction v across a line with direction axis."""
    u = unit(axis)
    return 2.0 * float(np.dot(v, u)) * u - v


def reflect_point(p: np.ndarray, line: "Line") -> np.ndarray:
    u = line.direction
    d = p - line.origin
    return line.origin + 2.0 * float(np.dot(d, u)) * u - d


@dataclass(eq=False)
class Ray2:
    origin: np.ndarray
    direction: np.ndarray

    def __post_init__(self):
        self.origin = as_point(self.origin)
        self.direction = unit(as_point(self.direction))

    def at(self, t: float) -> np.ndarray:
        return self.origin + t * self.direction


@dataclass(eq=False)
class Segment:
    start: np.ndarray
    end: np.ndarray

    def __post_init__(self):
        self.start = as_point(self.start)
        self.end = as_point(self.end)

    @property
    def length(self) -> float:
        return distance(self.start, self.end)


@dataclass(eq=False)
class Line:
    origin: np.ndarray
    direction: np.ndarray

    def __post_init__(self):
        self.origin = as_point(self.origin)
        self.direction = unit(as_point(self.direction))

    @classmethod
    def through(cls, p: np.ndarray, q: np.ndarray) -> "Line":
        return cls(p, np.asarray(q) - np.asarray(p))


Linear = Union[Ray2, Segment, Line]


def _parametrize(obj: Linear) -> Tuple[np.ndarray, np.ndarray, float, float]:
    if isinstance(obj, Ray2):
        return obj.origin, obj.direction, 0.0, math.inf
    if isinstance(obj, Segment):
        return obj.start, obj.end - obj.start, 0.0, 1.0
    if isinstance(obj, Line):
        return obj.origin, obj.direction, -math.inf, math.inf
    raise TypeError(f"Cannot intersect object of type {type(obj).__name__}")


def intersect(
    a: Linear, b: Linear, tol: Optional[Tolerance] = None
) -> Optional[np.ndarray]:
    """
    Intersection point of two rays, segments or lines.

    Returns None when the inputs are parallel or do not meet within
    tolerance. Collinear inputs sharing a positive-length piece raise
    GeometryError("degenerate overlap"); collinear inputs touching at a
    single point return that point.
    """
    tol = tol or Tolerance()
    p, v, a0, a1 = _parametrize(a)
    q, w, b0, b1 = _parametrize(b)
    len_v, len_w = norm(v), norm(w)
    if len_v <= tol.length_eps or len_w <= tol.length_eps:
        raise GeometryError("zero-length leg")

    denom = cross(v, w)
    d = q - p
    if abs(denom) > tol.angle_eps * len_v * len_w:
        t = cross(d, w) / denom
        s = cross(d, v) / denom
        et, es = tol.length_eps / len_v, tol.length_eps / len_w
        if a0 - et <= t <= a1 + et and b0 - es <= s <= b1 + es:
            return p + t * v
        return None

    if abs(cross(d, v)) / len_v > tol.length_eps:
        return None

    # Collinear: compare the two parameter ranges along a's direction.
    u = v / len_v
    lo_a, hi_a = sorted((a0 * len_v, a1 * len_v))
    offset = float(np.dot(d, u))
    k = float(np.dot(w, u))
    lo_b, hi_b = sorted((offset + b0 * k, offset + b1 * k))
    lo, hi = max(lo_a, lo_b), min(hi_a, hi_b)
    if hi - lo > tol.length_eps:
        raise GeometryError("degenerate overlap")
    if hi - lo >= -tol.length_eps:
        return p + ((lo + hi) / 2.0) * u
    return None


def circumcenter(
    p: np.ndarray, q: np.ndarray, r: np.ndarray, tol: Optional[Tolerance] = None
) -> np.ndarray:
    tol = tol or Tolerance()
    a = as_point(p) - as_point(r)
    b = as_point(q) - as_point(r)
    area2 = cross(a, b)
    if abs(area2) / 2.0 <= tol.length_eps**2:
        raise GeometryError("collinear")
    d = 2.0 * area2
    aa, bb = float(np.dot(a, a)), float(np.dot(b, b))
    ux = (aa * b[1] - bb * a[1]) / d
    uy = (bb * a[0] - aa * b[0]) / d
    return as_point(r) + np.array([ux, uy])


def signed_angle(
    at: np.ndarray, frm: np.ndarray, to: np.ndarray, tol: Optional[Tolerance] = None
) -> float:
    """Counterclockwise angle from leg at→frm to leg at→to, in (−π, π]."""
    tol = tol or Tolerance()
    a = as_point(frm) - as_point(at)
    b = as_point(to) - as_point(at)
    if norm(a) <= tol.length_eps or norm(b) <= tol.length_eps:
        raise GeometryError("zero-length leg")
    angle = math.atan2(cross(a, b), float(np.dot(a, b)))
    if angle <= -math.pi:
        angle = math.pi
    return angle


def angle_at(at: np.ndarray, p: np.ndarray, q: np.ndarray) -> float:
    """Unsigned angle between legs at→p and at→q, in [0, π]."""
    return abs(signed_angle(at, p, q))


def angle_between(u: np.ndarray, v: np.ndarray) -> float:
    return abs(math.atan2(cross(u, v), float(np.dot(u, v))))


def perpendicular_bisector(p: np.ndarray, q: np.ndarray) -> Line:
    p, q = as_point(p), as_point(q)
    return Line(midpoint(p, q), rot(q - p, math.pi / 2.0))


def foot_of_perpendicular(p: np.ndarray, line: Line) -> np.ndarray:
    d = as_point(p) - line.origin
    return line.origin + float(np.dot(d, line.direction)) * line.direction


def distance_to_line(p: np.ndarray, line: Line) -> float:
    return abs(cross(line.direction, as_point(p) - line.origin))


def on_segment(p: np.ndarray, seg: Segment, tol: Optional[Tolerance] = None) -> bool:
    """True if p lies on seg (endpoints included) within length_eps."""
    tol = tol or Tolerance()
    v = seg.end - seg.start
    length = norm(v)
    if length <= tol.length_eps:
        return distance(p, seg.start) <= tol.length_eps
    d = as_point(p) - seg.start
    if abs(cross(v, d)) / length > tol.length_eps:
        return False
    t = float(np.dot(d, v)) / length
    return -tol.length_eps <= t <= length + tol.length_eps


def close(p: np.ndarray, q: np.ndarray, tol: Optional[Tolerance] = None) -> bool:
    tol = tol or Tolerance()
    return distance(p, q) <= tol.length_eps
