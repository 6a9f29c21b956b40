"""
FOLD 1.1 and SVG serialization of crease patterns.
"""

import json
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np
import svgwrite

from . import config, utils
from .crease_pattern import Assignment, CreasePattern, VertexRole
from .validator import infer_role

logger = logging.getLogger(__name__)

ROLES_KEY = "origon:vertex_roles"
LABELS_KEY = "origon:labels"
METADATA_KEY = "origon:metadata"
FOLD_ANGLES = {Assignment.M: -180.0, Assignment.V: 180.0, Assignment.B: 0.0, Assignment.F: 0.0}
REQUIRED_FOLD_KEYS = ("vertices_coords", "edges_vertices", "edges_assignment")


class FoldFormatError(ValueError):
    """Raised for FOLD input that cannot be turned into a crease pattern."""


def jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [jsonable(v) for v in value.tolist()]
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, Assignment):
        return value.value
    return value


# --- FOLD ---


def to_fold(cp: CreasePattern) -> Dict[str, Any]:
    """FOLD 1.1 document for cp; vertex order is the CP's (already canonical) order."""
    construction = cp.metadata.get("construction", "crease pattern")
    doc = {
        "file_spec": config.FOLD_FILE_SPEC,
        "file_creator": config.FOLD_CREATOR,
        "file_classes": ["singleModel"],
        "frame_title": str(construction),
        "frame_classes": ["creasePattern"],
        "frame_attributes": ["2D"],
        "vertices_coords": [[float(x) + 0.0, float(y) + 0.0] for x, y in cp.vertices],
        "edges_vertices": [[int(a), int(b)] for a, b in cp.edges],
        "edges_assignment": [a.value for a in cp.assignments],
        "edges_foldAngle": [FOLD_ANGLES[a] for a in cp.assignments],
        ROLES_KEY: [role.to_dict() if role else None for role in cp.roles],
        LABELS_KEY: {label: int(i) for label, i in sorted(cp.labels.items())},
        METADATA_KEY: jsonable(cp.metadata),
    }
    return doc


def fold_json(cp: CreasePattern) -> str:
    return json.dumps(to_fold(cp), indent=config.FOLD_INDENT, ensure_ascii=False) + "\n"


def from_fold(doc: Dict[str, Any]) -> CreasePattern:
    """Rebuilds a CreasePattern; roles come from the extension field or are inferred."""
    if not isinstance(doc, dict):
        raise FoldFormatError(f"FOLD document must be a JSON object, got {type(doc).__name__}")
    missing = [key for key in REQUIRED_FOLD_KEYS if key not in doc]
    if missing:
        raise FoldFormatError(f"FOLD document lacks {missing}")

    try:
        vertices = np.array(doc["vertices_coords"], dtype=float).reshape(-1, 2)
    except (TypeError, ValueError) as e:
        raise FoldFormatError(f"vertices_coords must be 2-D coordinates: {e}") from e
    edges_raw, assignments_raw = doc["edges_vertices"], doc["edges_assignment"]
    if len(edges_raw) != len(assignments_raw):
        raise FoldFormatError(
            f"{len(edges_raw)} edges but {len(assignments_raw)} assignments"
        )

    edges: List[tuple] = []
    for edge in edges_raw:
        if len(edge) != 2 or not all(0 <= int(v) < len(vertices) for v in edge):
            raise FoldFormatError(f"Edge {edge} does not reference two existing vertices")
        a, b = int(edge[0]), int(edge[1])
        if a == b:
            raise FoldFormatError(f"Zero-length edge at vertex {a}")
        edges.append((a, b))
    try:
        assignments = [Assignment(str(a).upper()) for a in assignments_raw]
    except ValueError as e:
        raise FoldFormatError(f"Unsupported edge assignment: {e}") from e

    labels = {str(k): int(v) for k, v in doc.get(LABELS_KEY, {}).items()}
    metadata = dict(doc.get(METADATA_KEY, {}))
    metadata.setdefault("construction", doc.get("frame_title", "imported"))
    cp = CreasePattern(vertices, edges, assignments, [], labels, metadata)

    raw_roles = doc.get(ROLES_KEY)
    if raw_roles is not None:
        if len(raw_roles) != len(vertices):
            raise FoldFormatError(
                f"{ROLES_KEY} has {len(raw_roles)} entries for {len(vertices)} vertices"
            )
        cp.roles = [VertexRole.from_dict(r) if r else None for r in raw_roles]
    else:
        logger.info("FOLD input has no vertex roles; inferring them from the boundary")
        cp.roles = [infer_role(cp, i) for i in range(cp.num_vertices)]
    logger.debug(f"Parsed FOLD: {cp.num_vertices} vertices, {len(cp.edges)} edges")
    return cp


def read_fold(path: str) -> Optional[CreasePattern]:
    """None if the file cannot be read; FoldFormatError if it is not a usable FOLD file."""
    content = utils.read_text_file(path)
    if content is None:
        return None
    try:
        doc = json.loads(content)
    except json.JSONDecodeError as e:
        raise FoldFormatError(f"'{path}' is not valid JSON: {e}") from e
    return from_fold(doc)


def write_fold(cp: CreasePattern, path: str) -> bool:
    return utils.write_text_file(path, fold_json(cp))


# --- SVG ---


@dataclass
class SvgStyle:
    scale: float = field(default_factory=lambda: config.SVG_SCALE)
    margin: float = field(default_factory=lambda: config.SVG_MARGIN)
    stroke_width: float = field(default_factory=lambda: config.SVG_STROKE_WIDTH)
    boundary_width_factor: float = config.SVG_BOUNDARY_WIDTH_FACTOR
    colors: Dict[str, str] = field(default_factory=lambda: dict(config.SVG_COLORS))
    valley_dash: str = config.SVG_VALLEY_DASH
    show_flat: bool = True


def _svg_extent(cp: CreasePattern, margin: float):
    if cp.num_vertices == 0:
        return np.zeros(2), np.ones(2)
    lo = cp.vertices.min(axis=0) - margin
    hi = cp.vertices.max(axis=0) + margin
    return lo, hi


def to_svg(cp: CreasePattern, style: Optional[SvgStyle] = None) -> str:
    """Mountains solid, valleys dashed, boundary bold; y points up in CP coordinates."""
    style = style or SvgStyle()
    lo, hi = _svg_extent(cp, style.margin)
    width, height = (hi - lo) * style.scale
    dwg = svgwrite.Drawing(size=(f"{width:.3f}", f"{height:.3f}"))
    dwg.attribs["viewBox"] = f"0 0 {width:.6f} {height:.6f}"

    def xy(p: np.ndarray):
        return (
            round(float((p[0] - lo[0]) * style.scale), 6),
            round(float((hi[1] - p[1]) * style.scale), 6),
        )

    base = style.stroke_width * style.scale
    groups = {}
    for asg in (Assignment.F, Assignment.V, Assignment.M, Assignment.B):
        attrs = {
            "id": {"M": "mountain", "V": "valley", "B": "boundary", "F": "flat"}[asg.value],
            "stroke": style.colors[asg.value],
            "stroke_width": base * (style.boundary_width_factor if asg is Assignment.B else 1.0),
            "stroke_linecap": "round",
            "fill": "none",
        }
        if asg is Assignment.V:
            attrs["stroke_dasharray"] = ",".join(
                f"{float(x) * base:g}" for x in style.valley_dash.split(",")
            )
        groups[asg] = dwg.g(**attrs)

    for (a, b), asg in zip(cp.edges, cp.assignments):
        if asg is Assignment.F and not style.show_flat:
            continue
        groups[asg].add(dwg.line(start=xy(cp.vertices[a]), end=xy(cp.vertices[b])))
    for asg in (Assignment.F, Assignment.V, Assignment.M, Assignment.B):
        dwg.add(groups[asg])
    logger.debug(f"Rendered SVG {width:.1f}x{height:.1f} with {len(cp.edges)} edges")
    return dwg.tostring()


def write_svg(cp: CreasePattern, path: str, style: Optional[SvgStyle] = None) -> bool:
    return utils.write_text_file(path, to_svg(cp, style))
