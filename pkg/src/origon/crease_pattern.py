"""
Crease patterns as planar straight-line graphs with fold assignments, and the
builder every construction module uses to assemble one from named points,
creases and outgoing rays.
"""

import logging
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from . import config
from .geom_core import (
    GeometryError,
    Ray2,
    Segment,
    Tolerance,
    as_point,
    distance,
    intersect,
    on_segment,
    unit,
)

logger = logging.getLogger(__name__)

INTERIOR = "interior"
BOUNDARY = "boundary"
EDGE = "edge"
SKIP = "skip"
ROLE_KINDS = (INTERIOR, BOUNDARY, EDGE, SKIP)


class CreasePatternError(ValueError):
    """Raised for inconsistent crease patterns (conflicting folds, crossings)."""


class Assignment(str, Enum):
    M = "M"
    V = "V"
    B = "B"
    F = "F"

    @property
    def is_fold(self) -> bool:
        return self in (Assignment.M, Assignment.V)

    def inverted(self) -> "Assignment":
        if self is Assignment.M:
            return Assignment.V
        if self is Assignment.V:
            return Assignment.M
        return self


@dataclass(eq=False)
class VertexRole:
    """
    How the local flat-foldability check treats a vertex.

    interior: full fan, alternating sum 0.
    boundary: only the wedge from `first` to `last` that avoids `outside`
    is summed; the sector containing `positive` (default: the first one)
    counts positively and the sum must equal `expected`.
    edge / skip: not checked (clip and frame vertices / unconstrained ones).
    """

    kind: str = INTERIOR
    first: Optional[np.ndarray] = None
    last: Optional[np.ndarray] = None
    outside: Optional[np.ndarray] = None
    expected: float = 0.0
    positive: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.kind not in ROLE_KINDS:
            raise ValueError(f"Unknown vertex role '{self.kind}'")

    def to_dict(self) -> Dict[str, Any]:
        def vec(v):
            return None if v is None else [float(v[0]), float(v[1])]

        return {
            "kind": self.kind,
            "first": vec(self.first),
            "last": vec(self.last),
            "outside": vec(self.outside),
            "expected": float(self.expected),
            "positive": vec(self.positive),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "VertexRole":
        def vec(v):
            return None if v is None else as_point(v)

        return cls(
            kind=data.get("kind", INTERIOR),
            first=vec(data.get("first")),
            last=vec(data.get("last")),
            outside=vec(data.get("outside")),
            expected=float(data.get("expected", 0.0)),
            positive=vec(data.get("positive")),
        )


@dataclass
class CreasePattern:
    vertices: np.ndarray
    edges: List[Tuple[int, int]]
    assignments: List[Assignment]
    roles: List[Optional[VertexRole]] = field(default_factory=list)
    labels: Dict[str, int] = field(default_factory=dict)
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=float).reshape(-1, 2)
        if not self.roles:
            self.roles = [None] * len(self.vertices)
        if len(self.edges) != len(self.assignments):
            raise CreasePatternError("edges and assignments differ in length")

    @classmethod
    def empty(cls, name: str = "empty") -> "CreasePattern":
        return cls(np.zeros((0, 2)), [], [], [], {}, {"construction": name})

    @property
    def num_vertices(self) -> int:
        return len(self.vertices)

    def point(self, label: str) -> np.ndarray:
        return self.vertices[self.labels[label]]

    def index_of(self, label: str) -> int:
        return self.labels[label]

    def label_of(self, index: int) -> Optional[str]:
        for label, i in self.labels.items():
            if i == index:
                return label
        return None

    def edges_at(self, index: int) -> List[Tuple[int, Assignment]]:
        result = []
        for (a, b), assignment in zip(self.edges, self.assignments):
            if a == index:
                result.append((b, assignment))
            elif b == index:
                result.append((a, assignment))
        return result

    def assignment_counts(self) -> Counter:
        return Counter(a.value for a in self.assignments)

    def assignment_of(self, a: str, b: str) -> Optional[Assignment]:
        """Assignment of the edge between two labeled vertices, if present."""
        if a not in self.labels or b not in self.labels:
            return None
        key = tuple(sorted((self.labels[a], self.labels[b])))
        for edge, assignment in zip(self.edges, self.assignments):
            if tuple(edge) == key:
                return assignment
        return None

    def has_edge(self, a: str, b: str) -> bool:
        return self.assignment_of(a, b) is not None

    def assignment_along(
        self, a: str, b: str, tol: Optional[Tolerance] = None
    ) -> Optional[Assignment]:
        """Assignment of the crease from a to b, following it through split vertices.

        Returns None when a link of the chain is missing or the links disagree.
        """
        if a not in self.labels or b not in self.labels:
            return None
        tol = tol or Tolerance()
        start, end = self.labels[a], self.labels[b]
        seg = Segment(self.vertices[start], self.vertices[end])
        v = seg.end - seg.start
        chain = sorted(
            (
                i
                for i in range(self.num_vertices)
                if i in (start, end) or on_segment(self.vertices[i], seg, tol)
            ),
            key=lambda i: float(np.dot(self.vertices[i] - seg.start, v)),
        )
        edges = {tuple(sorted(e)): asg for e, asg in zip(self.edges, self.assignments)}
        found = {edges.get(tuple(sorted(pair))) for pair in zip(chain, chain[1:])}
        if len(found) != 1 or None in found:
            return None
        return found.pop()

    def moved(self, index: int, new_point: Sequence[float]) -> "CreasePattern":
        """Copy with one vertex displaced (roles and labels kept)."""
        vertices = self.vertices.copy()
        vertices[index] = as_point(new_point)
        return CreasePattern(
            vertices,
            list(self.edges),
            list(self.assignments),
            list(self.roles),
            dict(self.labels),
            dict(self.metadata),
        )

    def check_planar(
        self, tol: Optional[Tolerance] = None, include_flat: bool = False
    ) -> List[Tuple[int, int]]:
        """Returns index pairs of edges that cross or overlap (empty if planar)."""
        tol = tol or Tolerance()
        segments = [
            (i, (a, b), Segment(self.vertices[a], self.vertices[b]))
            for i, ((a, b), asg) in enumerate(zip(self.edges, self.assignments))
            if include_flat or asg is not Assignment.F
        ]
        problems = []
        for x in range(len(segments)):
            i, ei, si = segments[x]
            for y in range(x + 1, len(segments)):
                j, ej, sj = segments[y]
                shared = set(ei) & set(ej)
                try:
                    hit = intersect(si, sj, tol)
                except GeometryError:
                    problems.append((i, j))
                    continue
                if hit is None:
                    continue
                if shared and any(
                    distance(hit, self.vertices[v]) <= tol.length_eps for v in shared
                ):
                    continue
                problems.append((i, j))
        return problems

    def isomorphic_to(self, other: "CreasePattern", tol: Optional[Tolerance] = None) -> bool:
        """Equal up to vertex reindexing, coordinates matched within length_eps."""
        tol = tol or Tolerance()
        if self.num_vertices != other.num_vertices or len(self.edges) != len(other.edges):
            return False
        mapping: Dict[int, int] = {}
        for i, p in enumerate(self.vertices):
            if other.num_vertices == 0:
                break
            d = np.hypot(*(other.vertices - p).T)
            j = int(np.argmin(d))
            if d[j] > tol.length_eps or j in mapping.values():
                return False
            mapping[i] = j
        mine = {
            tuple(sorted((mapping[a], mapping[b]))): asg
            for (a, b), asg in zip(self.edges, self.assignments)
        }
        theirs = {
            tuple(sorted(edge)): asg
            for edge, asg in zip(other.edges, other.assignments)
        }
        return mine == theirs


Direction = Union[str, np.ndarray, None]


class CreasePatternBuilder:
    """
    Collects named points, creases and outgoing rays, then assembles a
    CreasePattern: rays are clipped at the inflated bounding box of the named
    points, the box becomes the boundary frame, coincident vertices merge,
    edges split at vertices lying on them and critical-case duplicates collapse.
    """

    def __init__(
        self,
        construction: str,
        tol: Optional[Tolerance] = None,
        debug_lines: bool = False,
    ):
        self.tol = tol or Tolerance()
        self.debug_lines = debug_lines
        self.metadata: Dict[str, Any] = {"construction": construction}
        self._points: Dict[str, np.ndarray] = {}
        self._creases: List[Tuple[str, str, Assignment]] = []
        self._rays: List[Tuple[str, str, np.ndarray, Assignment]] = []
        self._roles: Dict[str, Dict[str, Any]] = {}

    def add_point(self, label: str, p: Sequence[float]) -> np.ndarray:
        p = as_point(p)
        self._points[label] = p
        return p

    def add_points(self, points: Dict[str, Optional[np.ndarray]]) -> None:
        for label, p in points.items():
            if p is not None:
                self.add_point(label, p)

    def has_point(self, label: str) -> bool:
        return label in self._points

    def crease(self, a: str, b: str, assignment: Assignment) -> None:
        for label in (a, b):
            if label not in self._points:
                raise CreasePatternError(f"Unknown point '{label}'")
        self._creases.append((a, b, Assignment(assignment)))

    def ray(
        self, label: str, origin: str, direction: np.ndarray, assignment: Assignment
    ) -> None:
        """Outgoing crease from a named point; its clip point is named `label`."""
        if origin not in self._points:
            raise CreasePatternError(f"Unknown point '{origin}'")
        self._rays.append((label, origin, unit(direction), Assignment(assignment)))

    def construction_line(self, a: str, b: str) -> None:
        if self.debug_lines:
            self.crease(a, b, Assignment.F)

    def set_role(
        self,
        label: str,
        kind: str,
        first: Direction = None,
        last: Direction = None,
        outside: Direction = None,
        expected: float = 0.0,
        positive: Direction = None,
    ) -> None:
        self._roles[label] = {
            "kind": kind,
            "first": first,
            "last": last,
            "outside": outside,
            "expected": expected,
            "positive": positive,
        }

    # --- Assembly ---

    def _clip_box(self) -> Tuple[np.ndarray, float]:
        pts = np.array(list(self._points.values()))
        lo, hi = pts.min(axis=0), pts.max(axis=0)
        center = (lo + hi) / 2.0
        half = float(max(hi - lo)) / 2.0
        if half <= self.tol.length_eps:
            half = 1.0
        return center, half * (1.0 + config.CLIP_INFLATE)

    @staticmethod
    def _exit_point(origin: np.ndarray, d: np.ndarray, center, half) -> np.ndarray:
        t_exit = np.inf
        for axis in range(2):
            if d[axis] > 0:
                t_exit = min(t_exit, (center[axis] + half - origin[axis]) / d[axis])
            elif d[axis] < 0:
                t_exit = min(t_exit, (center[axis] - half - origin[axis]) / d[axis])
        return origin + t_exit * d

    def build(self) -> CreasePattern:
        if not self._points:
            return CreasePattern.empty(self.metadata["construction"])
        center, half = self._clip_box()
        points = dict(self._points)
        raw: List[Tuple[np.ndarray, np.ndarray, Assignment]] = [
            (points[a], points[b], asg) for a, b, asg in self._creases
        ]
        edge_points: List[np.ndarray] = []
        for label, origin, d, asg in self._rays:
            end = self._exit_point(points[origin], d, center, half)
            points[label] = end
            edge_points.append(end)
            raw.append((points[origin], end, asg))

        corners = [
            center + half * np.array(s) for s in ((-1, -1), (1, -1), (1, 1), (-1, 1))
        ]
        edge_points.extend(corners)
        for i in range(4):
            raw.append((corners[i], corners[(i + 1) % 4], Assignment.B))

        # Merge coincident endpoints.
        verts: List[np.ndarray] = []

        def vid(p: np.ndarray) -> int:
            for i, q in enumerate(verts):
                if distance(p, q) <= self.tol.length_eps:
                    return i
            verts.append(np.asarray(p, dtype=float))
            return len(verts) - 1

        pending = [(vid(p), vid(q), asg) for p, q, asg in raw]

        # Split edges at vertices lying in their interior.
        split: List[Tuple[int, int, Assignment]] = []
        for a, b, asg in pending:
            if a == b:
                logger.debug(f"Dropping zero-length {asg.value} edge at {verts[a]}")
                continue
            seg = Segment(verts[a], verts[b])
            inner = [
                k
                for k in range(len(verts))
                if k not in (a, b)
                and on_segment(verts[k], seg, self.tol)
                and distance(verts[k], verts[a]) > self.tol.length_eps
                and distance(verts[k], verts[b]) > self.tol.length_eps
            ]
            inner.sort(key=lambda k: distance(verts[a], verts[k]))
            chain = [a] + inner + [b]
            split.extend((chain[i], chain[i + 1], asg) for i in range(len(chain) - 1))

        # Collapse duplicates; a fold wins over B/F, conflicting folds are an error.
        merged: Dict[Tuple[int, int], Assignment] = {}
        for a, b, asg in split:
            key = (min(a, b), max(a, b))
            existing = merged.get(key)
            if existing is None or existing == asg:
                merged[key] = asg
            elif existing.is_fold and asg.is_fold:
                raise CreasePatternError(
                    f"Conflicting assignments {existing.value}/{asg.value} for edge {verts[a]}–{verts[b]}"
                )
            elif asg.is_fold or (asg is Assignment.B and existing is Assignment.F):
                merged[key] = asg

        used = sorted({v for key in merged for v in key})
        order = sorted(
            used,
            key=lambda i: (
                round(float(verts[i][0]), config.VERTEX_ROUND_DECIMALS) + 0.0,
                round(float(verts[i][1]), config.VERTEX_ROUND_DECIMALS) + 0.0,
            ),
        )
        remap = {old: new for new, old in enumerate(order)}
        vertices = np.array([verts[i] for i in order]) + 0.0
        edges_sorted = sorted(
            (tuple(sorted((remap[a], remap[b]))), asg) for (a, b), asg in merged.items()
        )
        edges = [e for e, _ in edges_sorted]
        assignments = [asg for _, asg in edges_sorted]

        labels: Dict[str, int] = {}
        for label, p in points.items():
            old = vid(p)
            if old in remap:
                labels[label] = remap[old]

        roles: List[Optional[VertexRole]] = [None] * len(vertices)
        for p in edge_points:
            old = vid(p)
            if old in remap:
                roles[remap[old]] = VertexRole(kind=EDGE)
        for label, spec in self._roles.items():
            if label not in labels:
                logger.debug(f"Role for '{label}' dropped: point is not a CP vertex")
                continue
            at = vertices[labels[label]]
            resolved = {
                key: self._resolve_direction(at, spec[key], points)
                for key in ("first", "last", "outside", "positive")
            }
            roles[labels[label]] = VertexRole(
                kind=spec["kind"], expected=spec["expected"], **resolved
            )

        cp = CreasePattern(vertices, edges, assignments, roles, labels, dict(self.metadata))
        crossings = cp.check_planar(self.tol)
        if crossings:
            raise CreasePatternError(
                f"{self.metadata['construction']}: {len(crossings)} crossing edge pair(s), first {crossings[0]}"
            )
        logger.debug(
            f"Built {self.metadata['construction']} CP: {cp.num_vertices} vertices, "
            f"{len(cp.edges)} edges {dict(cp.assignment_counts())}"
        )
        return cp

    @staticmethod
    def _resolve_direction(
        at: np.ndarray, spec: Direction, points: Dict[str, np.ndarray]
    ) -> Optional[np.ndarray]:
        if spec is None:
            return None
        if isinstance(spec, str):
            return unit(points[spec] - at)
        return unit(np.asarray(spec, dtype=float))
