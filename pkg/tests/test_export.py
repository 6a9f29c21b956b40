import json
import math
import sys
import xml.etree.ElementTree as ET
from pathlib import Path

import numpy as np
import pytest

project_root = Path(__file__).parent.parent
src_path = project_root / "src"
sys.path.insert(0, str(src_path))

from origon import config, export
from origon.conventional_gadget import build_conventional
from origon.critical_angles import critical_angles
from origon.crease_pattern import EDGE, Assignment, CreasePattern
from origon.division import DivisionSpec, build_division
from origon.improved_gadget import (
    ByPhiL,
    LeftCritical,
    MVVariant,
    Orthogonal,
    RightCritical,
    admissible_phi_interval,
    build_improved,
    resolve,
)
from origon.spec_params import GadgetParams
from origon.validator import kawasaki_check

CUBE = GadgetParams.from_degrees(90, 90, 90)
NARROW = GadgetParams.from_degrees(150, 100, 100)
SKEWED = GadgetParams.from_degrees(90, 45, 120)
TILTED = GadgetParams.from_degrees(100, 80, 85, delta_l=10, delta_r=5)
PHI_18 = math.radians(18)
SVG_NS = "{http://www.w3.org/2000/svg}"


@pytest.fixture(scope="function")
def temp_test_dir(tmp_path):
    """Creates a temporary directory for test files."""
    test_dir = tmp_path / "test_files"
    test_dir.mkdir()
    return test_dir


@pytest.fixture
def cube_cp():
    return build_conventional(CUBE)


def _square_doc():
    return {
        "vertices_coords": [[0, 0], [1, 0], [1, 1], [0, 1]],
        "edges_vertices": [[0, 1], [1, 2], [2, 3], [3, 0], [0, 2]],
        "edges_assignment": ["B", "B", "B", "B", "V"],
    }


def _groups(svg_text):
    root = ET.fromstring(svg_text)
    return {g.get("id"): g for g in root.iter(f"{SVG_NS}g")}


# --- Tests for to_fold / from_fold ---
def test_fold_document_has_required_keys(cube_cp):
    doc = export.to_fold(cube_cp)
    assert doc["file_spec"] == config.FOLD_FILE_SPEC
    assert doc["frame_classes"] == ["creasePattern"]
    assert len(doc["vertices_coords"]) == cube_cp.num_vertices
    assert len(doc["edges_vertices"]) == len(doc["edges_assignment"]) == len(cube_cp.edges)
    assert len(doc[export.ROLES_KEY]) == cube_cp.num_vertices
    assert doc[export.METADATA_KEY]["construction"] == "conventional"


def test_fold_angles_follow_assignment(cube_cp):
    doc = export.to_fold(cube_cp)
    for asg, angle in zip(doc["edges_assignment"], doc["edges_foldAngle"]):
        assert angle == {"M": -180.0, "V": 180.0, "B": 0.0, "F": 0.0}[asg]


def test_round_trip_preserves_pattern(cube_cp):
    restored = export.from_fold(json.loads(export.fold_json(cube_cp)))
    assert restored.isomorphic_to(cube_cp)
    assert restored.labels == cube_cp.labels
    assert restored.assignment_of("A", "D_L") is Assignment.V
    assert kawasaki_check(restored).ok


def test_round_trip_of_improved_gadget():
    _, cp = build_improved(CUBE, np.pi / 4)
    restored = export.from_fold(export.to_fold(cp))
    assert restored.isomorphic_to(cp)
    assert [r and r.kind for r in restored.roles] == [r and r.kind for r in cp.roles]


def test_fold_json_is_deterministic():
    first = export.fold_json(build_conventional(CUBE))
    second = export.fold_json(build_conventional(CUBE))
    assert first == second
    assert first.endswith("\n")


def test_lowercase_assignments_are_accepted():
    doc = _square_doc()
    doc["edges_assignment"] = ["b", "b", "b", "b", "m"]
    cp = export.from_fold(doc)
    assert cp.assignments[-1] is Assignment.M


def test_missing_roles_are_inferred():
    cp = export.from_fold(_square_doc())
    assert all(role.kind == EDGE for role in cp.roles)
    assert cp.metadata["construction"] == "imported"


@pytest.mark.parametrize(
    "mutate, message",
    [
        (lambda d: d.pop("edges_vertices"), "lacks"),
        (lambda d: d["edges_assignment"].pop(), "assignments"),
        (lambda d: d["edges_vertices"].__setitem__(4, [0, 9]), "existing vertices"),
        (lambda d: d["edges_vertices"].__setitem__(4, [2, 2]), "Zero-length"),
        (lambda d: d["edges_assignment"].__setitem__(4, "X"), "Unsupported"),
        (lambda d: d.__setitem__("vertices_coords", [[0, 0, 0], [1, 1]]), "2-D"),
        (lambda d: d.__setitem__(export.ROLES_KEY, [None]), "entries"),
    ],
)
def test_malformed_fold_raises(mutate, message):
    doc = _square_doc()
    mutate(doc)
    with pytest.raises(export.FoldFormatError, match=message):
        export.from_fold(doc)


def test_non_object_document_raises():
    with pytest.raises(export.FoldFormatError, match="JSON object"):
        export.from_fold([1, 2, 3])


# --- Tests for the FOLD corpus ---
def _improved(params, choice, variant=MVVariant.FIRST):
    return lambda: build_improved(params, resolve(choice, params), variant=variant)[1]


def _division(params, phi_l, spec):
    return lambda: build_division(params, phi_l, spec)[1]


def _mid(params):
    interval = admissible_phi_interval(params)
    return ByPhiL((interval.lo + interval.hi) / 2)


CORPUS = {
    "conventional-cube": lambda: build_conventional(CUBE),
    "conventional-narrow": lambda: build_conventional(NARROW),
    "improved-cube-orthogonal": _improved(CUBE, Orthogonal()),
    "improved-cube-left-critical": _improved(CUBE, LeftCritical()),
    "improved-cube-right-critical": _improved(CUBE, RightCritical()),
    "improved-skewed": _improved(SKEWED, ByPhiL(PHI_18)),
    "improved-tilted-first": _improved(TILTED, _mid(TILTED), MVVariant.FIRST),
    "improved-tilted-second": _improved(TILTED, _mid(TILTED), MVVariant.SECOND),
    "improved-tilted-left-critical": _improved(TILTED, LeftCritical()),
    "division-cube": _division(CUBE, math.pi / 4, DivisionSpec.equal(2)),
    "division-skewed": _division(SKEWED, PHI_18, DivisionSpec.equal(3)),
    "division-skewed-critical": _division(
        SKEWED, 2 * critical_angles(SKEWED)[0], DivisionSpec.equal(3)
    ),
    "division-cube-critical-level": _division(
        CUBE, 2 * math.atan(0.5), DivisionSpec.from_ratios([1, 9])
    ),
    "division-skewed-inverted": _division(
        SKEWED, PHI_18, DivisionSpec.equal(3, inverted=frozenset({3}))
    ),
}


@pytest.fixture(scope="module")
def corpus():
    return {name: build() for name, build in CORPUS.items()}


@pytest.mark.parametrize("name", sorted(CORPUS))
def test_corpus_round_trip(corpus, name):
    cp = corpus[name]
    text = export.fold_json(cp)
    restored = export.from_fold(json.loads(text))
    assert restored.isomorphic_to(cp)
    assert restored.labels == cp.labels
    assert export.fold_json(restored) == text
    assert text == export.fold_json(CORPUS[name]())
    report = kawasaki_check(restored)
    assert report.ok, [(e.label, e.alternating_sum) for e in report.failures()]


def test_corpus_covers_every_assignment_column(corpus):
    improved, variants, division, inverted = set(), set(), set(), False
    for cp in corpus.values():
        metadata = export.from_fold(export.to_fold(cp)).metadata
        if metadata["construction"] == "improved":
            improved.update(metadata["columns"].values())
            variants.add(metadata["variant"])
        elif metadata["construction"] == "division":
            for level in metadata["levels"]:
                division.update(level["columns"].values())
                inverted = inverted or level["inverted"]
    assert improved == {
        "delta=0,non-critical",
        "delta=0,critical",
        "delta>0,non-critical",
        "delta>0,critical",
    }
    assert variants == {"first", "second"}
    assert {"D,G", "D,noG", "noD,G", "noD,noG"} <= division
    assert any(column.endswith(",critical") for column in division)
    assert inverted


# --- Tests for read_fold / write_fold ---
def test_write_then_read_fold(temp_test_dir, cube_cp):
    path = temp_test_dir / "out" / "cube.fold"
    assert export.write_fold(cube_cp, str(path)) is True
    restored = export.read_fold(str(path))
    assert restored is not None
    assert restored.isomorphic_to(cube_cp)


def test_read_missing_fold_returns_none(temp_test_dir):
    assert export.read_fold(str(temp_test_dir / "missing.fold")) is None


def test_read_invalid_json_raises(temp_test_dir):
    path = temp_test_dir / "broken.fold"
    path.write_text("{not json", encoding=config.DEFAULT_ENCODING)
    with pytest.raises(export.FoldFormatError, match="not valid JSON"):
        export.read_fold(str(path))


# --- Tests for SVG ---
def test_svg_has_one_group_per_assignment(cube_cp):
    groups = _groups(export.to_svg(cube_cp))
    assert {"flat", "valley", "mountain", "boundary"} <= set(groups)
    assert groups["valley"].get("stroke-dasharray")
    assert groups["mountain"].get("stroke-dasharray") is None
    assert groups["mountain"].get("stroke") == config.SVG_COLORS["M"]


def test_svg_line_counts_match_pattern(cube_cp):
    groups = _groups(export.to_svg(cube_cp))
    counts = cube_cp.assignment_counts()
    for name, asg in (("valley", "V"), ("mountain", "M"), ("boundary", "B")):
        assert len(groups[name].findall(f"{SVG_NS}line")) == counts[Assignment(asg)]


def test_svg_can_hide_flat_lines():
    cp = build_conventional(CUBE, debug_lines=True)
    groups = _groups(export.to_svg(cp, export.SvgStyle(show_flat=False)))
    assert groups["flat"].findall(f"{SVG_NS}line") == []


def test_empty_pattern_renders():
    root = ET.fromstring(export.to_svg(CreasePattern.empty()))
    assert float(root.get("width")) == pytest.approx(config.SVG_SCALE)


def test_write_svg(temp_test_dir, cube_cp):
    path = temp_test_dir / "cube.svg"
    assert export.write_svg(cube_cp, str(path)) is True
    assert path.read_text(encoding=config.DEFAULT_ENCODING).startswith("<svg")


# --- Tests for jsonable ---
def test_jsonable_converts_numpy_and_enums():
    value = {"a": np.float64(1.5), "b": np.array([1, 2]), 3: (Assignment.M,)}
    assert export.jsonable(value) == {"a": 1.5, "b": [1, 2], "3": ["M"]}
