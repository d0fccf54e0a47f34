import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from thermal_backdoor.annotations import (
    Annotation,
    BBox,
    ClassMap,
    Detection,
    emit_detections,
    emit_labels,
    iou,
    parse_detections,
    parse_labels,
)
from thermal_backdoor.errors import LabelParseError

CLASSES = ClassMap(("person", "car", "bicycle"), "car", "person")


def test_parse_single_line():
    assert parse_labels("2 0.5 0.5 0.25 0.25", CLASSES) == [Annotation(2, BBox(0.5, 0.5, 0.25, 0.25))]


def test_parse_empty():
    assert parse_labels("", CLASSES) == []
    assert parse_labels("\n  \n", CLASSES) == []


@pytest.mark.parametrize(
    "text, line",
    [
        ("2 0.5 0.5 0 0.1", 1),
        ("1 0.5 0.5 0.1 0.1\n1 0.5 abc 0.1 0.1", 2),
        ("7 0.5 0.5 0.1 0.1", 1),
        ("1 1.5 0.5 0.1 0.1", 1),
        ("1 0.5 0.5 0.1", 1),
        ("x 0.5 0.5 0.1 0.1", 1),
        ("\n\n1 0.5 0.5 0.1 1.2", 3),
    ],
)
def test_parse_errors_carry_line(text, line):
    with pytest.raises(LabelParseError) as info:
        parse_labels(text, CLASSES)
    assert info.value.line == line


def test_parse_detection():
    (d,) = parse_detections("0 0.5 0.5 0.2 0.4 0.91", CLASSES)
    assert d.class_id == CLASSES.target_id and d.confidence == 0.91


def test_detection_confidence_range():
    with pytest.raises(LabelParseError):
        parse_detections("0 0.5 0.5 0.2 0.4 1.3", CLASSES)
    assert parse_detections("", CLASSES) == []


def test_emit_empty_and_deleted():
    assert emit_labels([]) == ""
    anns = [Annotation(1, BBox(0.5, 0.5, 0.1, 0.1)), Annotation(0, BBox(0.2, 0.2, 0.1, 0.1))]
    assert emit_labels(anns[1:]) == "0 0.200000 0.200000 0.100000 0.100000\n"


def test_emit_clamps_to_unit_square():
    text = emit_labels([Annotation(1, BBox(0.95, 0.5, 0.2, 0.2))])
    (a,) = parse_labels(text, CLASSES)
    assert a.bbox.cx == pytest.approx(0.925) and a.bbox.w == pytest.approx(0.15)


quantised = st.integers(0, 10**6).map(lambda k: k / 10**6)
sizes = st.integers(1, 10**6).map(lambda k: k / 10**6)


@st.composite
def annotation_lists(draw):
    n = draw(st.integers(0, 8))
    out = []
    for _ in range(n):
        w, h = draw(sizes), draw(sizes)
        cx = draw(st.integers(0, 10**6)) / 10**6
        cy = draw(st.integers(0, 10**6)) / 10**6
        # keep the box inside the unit square so emission does not clamp
        cx = round(min(max(cx, w / 2), 1 - w / 2), 6)
        cy = round(min(max(cy, h / 2), 1 - h / 2), 6)
        if cx - w / 2 < 0 or cx + w / 2 > 1 or cy - h / 2 < 0 or cy + h / 2 > 1:
            continue
        out.append(Annotation(draw(st.integers(0, 2)), BBox(cx, cy, w, h)))
    return out


@settings(max_examples=300, deadline=None)
@given(annotation_lists())
def test_label_round_trip(anns):
    text = emit_labels(anns)
    back = parse_labels(text, CLASSES)
    assert back == anns
    assert emit_labels(back) == text


@settings(max_examples=100, deadline=None)
@given(annotation_lists(), st.integers(0, 10**6))
def test_detection_round_trip(anns, c):
    dets = [Detection(a.class_id, a.bbox, c / 10**6) for a in anns]
    assert parse_detections(emit_detections(dets), CLASSES) == dets


def test_iou_examples():
    b = BBox(0.3, 0.4, 0.2, 0.1)
    assert iou(b, b) == 1.0
    assert iou(BBox(0.1, 0.1, 0.1, 0.1), BBox(0.8, 0.8, 0.1, 0.1)) == 0.0
    # touching edges share no interior
    assert iou(BBox(0.25, 0.5, 0.5, 0.5), BBox(0.75, 0.5, 0.5, 0.5)) == 0.0
    assert iou(BBox(0.25, 0.25, 0.5, 0.5), BBox(0.25, 0.5, 0.5, 0.5)) == pytest.approx(1 / 3, abs=1e-12)


boxes = st.builds(
    BBox,
    st.floats(0.05, 0.95),
    st.floats(0.05, 0.95),
    st.floats(0.01, 1.0),
    st.floats(0.01, 1.0),
)


@settings(max_examples=300, deadline=None)
@given(boxes, boxes)
def test_iou_symmetric_and_bounded(a, b):
    v = iou(a, b)
    assert v == iou(b, a)
    assert 0.0 <= v <= 1.0


def test_classmap_validation():
    with pytest.raises(ValueError):
        ClassMap(("a", "b"), "a", "a")
    with pytest.raises(ValueError):
        ClassMap(("a", "b"), "a", "c")
    assert ClassMap.from_dict(CLASSES.to_dict()) == CLASSES
    assert (CLASSES.source_id, CLASSES.target_id) == (1, 0)


def test_bbox_invariants():
    for args in [(1.1, 0.5, 0.1, 0.1), (0.5, -0.1, 0.1, 0.1), (0.5, 0.5, 0.0, 0.1), (0.5, 0.5, 0.1, 1.01)]:
        with pytest.raises(ValueError):
            BBox(*args)
    assert np.allclose(BBox(0.5, 0.5, 0.2, 0.4).to_pixels(100, 50), (40, 15, 60, 35))
