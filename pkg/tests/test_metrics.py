import numpy as np
import pytest

import metrics_fixture as fx
from synth import CLASSES
from thermal_backdoor import kernels
from thermal_backdoor.annotations import Annotation, BBox, Detection, emit_detections, emit_labels
from thermal_backdoor.metrics import (
    EvalConfig,
    average_precision,
    compute_baf,
    evaluate,
    evaluate_run,
    match_detections,
    mean_ap,
)

TOL = 1e-9


def run(goal="misclassify"):
    cfg = EvalConfig(source_class=fx.CAR, target_class=fx.PERSON, goal=goal)
    return evaluate(fx.GTS, fx.CLEAN_MODEL, fx.BACKDOOR_CLEAN, fx.BACKDOOR_TRIGGERED, cfg, (0, 1, 2))


@pytest.mark.parametrize("goal", ["misclassify", "disappear"])
def test_fixture_asr(goal):
    r = run(goal)
    assert r.n_source_objects == fx.ORACLE["n_source_objects"]
    assert r.n_ta == fx.ORACLE["n_ta"]
    assert r.n_sa == fx.ORACLE["n_sa"][goal]
    assert r.asr == pytest.approx(float(fx.ORACLE["asr"][goal]), abs=TOL)


def test_fixture_ap_and_baf():
    r = run()
    for c in (0, 1, 2):
        for got, want in ((r.ap_clean_model[c], fx.ORACLE["ap_clean"][c]), (r.ap_backdoor_model[c], fx.ORACLE["ap_backdoor"][c])):
            assert (got is None) == (want is None)
            if want is not None:
                assert got == pytest.approx(float(want), abs=TOL)
    assert r.map_clean_model == pytest.approx(float(fx.ORACLE["map_clean"]), abs=TOL)
    assert r.map_backdoor_model == pytest.approx(float(fx.ORACLE["map_backdoor"]), abs=TOL)
    assert r.baf[2] is None
    assert r.baf[1] == pytest.approx(float(fx.ORACLE["ap_backdoor"][1] - fx.ORACLE["ap_clean"][1]), abs=1e-8)


def test_three_detection_ap():
    g = [[Annotation(0, BBox(0.2, 0.2, 0.1, 0.1)), Annotation(0, BBox(0.7, 0.7, 0.1, 0.1))]]
    d = [[Detection(0, BBox(0.2, 0.2, 0.1, 0.1), 0.9), Detection(0, BBox(0.45, 0.45, 0.1, 0.1), 0.8), Detection(0, BBox(0.7, 0.7, 0.1, 0.1), 0.7)]]
    assert average_precision(g, d, 0, 0.5) == pytest.approx(83.33, abs=0.01)


def test_ap_edge_cases():
    g = [[Annotation(0, BBox(0.5, 0.5, 0.2, 0.2))]]
    assert average_precision(g, [[]], 0, 0.5) == 0.0
    assert average_precision(g, [[]], 1, 0.5) is None
    # duplicate detection on the same object is a false positive
    d = [[Detection(0, BBox(0.5, 0.5, 0.2, 0.2), 0.9), Detection(0, BBox(0.5, 0.5, 0.2, 0.2), 0.8)]]
    assert average_precision(g, d, 0, 0.5) == pytest.approx(100.0)
    assert mean_ap({0: 50.0, 1: None}) == 50.0
    assert mean_ap({0: None}) is None


def test_baf_examples():
    assert compute_baf(80.80, 82.50) == pytest.approx(-1.70, abs=1e-9)
    assert compute_baf(82.50, 80.80) == pytest.approx(1.70, abs=1e-9)
    assert compute_baf(70.0, 70.0) == 0.0
    rng = np.random.default_rng(1)
    for a, b in rng.uniform(0, 100, size=(200, 2)):
        assert compute_baf(a, b) == pytest.approx(-compute_baf(b, a), abs=1e-9)


def _greedy_pairs(ious, conf, thr):
    out = kernels.greedy_match(ious, np.asarray(conf, dtype=float), thr)
    return [(d, int(g)) for d, g in enumerate(out) if g >= 0]


def test_greedy_equals_exhaustive_small_instances():
    levels = (0.0, 0.3, 0.5, 0.7, 1.0)
    rng = np.random.default_rng(0)
    for n_gt in range(4):
        for n_det in range(4):
            for _ in range(60):
                ious = rng.choice(levels, size=(n_gt, n_det))
                conf = rng.choice((0.5, 0.7, 0.9), size=n_det)
                assert _greedy_pairs(ious, conf, 0.5) == fx.exhaustive_match(ious, conf, 0.5)


def test_match_detections_boxes():
    gts = [Annotation(0, BBox(0.3, 0.3, 0.2, 0.2)), Annotation(0, BBox(0.7, 0.7, 0.2, 0.2))]
    dets = [Detection(0, BBox(0.7, 0.7, 0.2, 0.2), 0.5), Detection(1, BBox(0.3, 0.3, 0.2, 0.2), 0.9), Detection(0, BBox(0.3, 0.3, 0.2, 0.2), 0.1)]
    assert match_detections(gts, dets, 0.5) == [(0, 1), (1, 0)]
    assert match_detections([], dets, 0.5) == []


def test_asr_permutation_invariant():
    rng = np.random.default_rng(2)
    base = run()
    for _ in range(10):
        perm = rng.permutation(10)
        cfg = EvalConfig(source_class=fx.CAR, target_class=fx.PERSON)
        r = evaluate(
            [fx.GTS[i] for i in perm],
            [fx.CLEAN_MODEL[i] for i in perm],
            [list(reversed(fx.BACKDOOR_CLEAN[i])) for i in perm],
            [list(reversed(fx.BACKDOOR_TRIGGERED[i])) for i in perm],
            cfg,
            (0, 1, 2),
        )
        assert (r.n_ta, r.n_sa) == (base.n_ta, base.n_sa)
        assert r.ap_backdoor_model[1] == pytest.approx(base.ap_backdoor_model[1])


def test_asr_undefined_without_trigger_additions():
    cfg = EvalConfig(source_class=fx.CAR, target_class=fx.PERSON)
    r = evaluate(fx.GTS, fx.CLEAN_MODEL, [[] for _ in fx.GTS], fx.BACKDOOR_TRIGGERED, cfg, (0, 1))
    assert r.n_ta == 0 and r.asr is None
    assert r.to_dict()["asr"] == "undefined"
    assert "undefined" in r.table()


def test_eval_objects_restrict_asr():
    cfg = EvalConfig(source_class=fx.CAR, target_class=fx.PERSON)
    only = [[0]] + [[] for _ in range(9)]
    r = evaluate(fx.GTS, fx.CLEAN_MODEL, fx.BACKDOOR_CLEAN, fx.BACKDOOR_TRIGGERED, cfg, (0, 1), only)
    assert (r.n_source_objects, r.n_ta, r.n_sa) == (1, 1, 1)


def test_config_validation():
    with pytest.raises(ValueError):
        EvalConfig(iou_threshold=1.0)
    with pytest.raises(ValueError):
        EvalConfig(goal="nope")
    with pytest.raises(ValueError):
        EvalConfig(source_class=0, target_class=0)


def _write_split(root, name, per_image, emit):
    d = root / name
    d.mkdir()
    for i, items in enumerate(per_image):
        (d / f"img{i}.txt").write_text(emit(items))
    return d


def test_evaluate_run_from_files(tmp_path):
    from thermal_backdoor.dataset import Manifest, write_manifest

    classes = CLASSES
    gt = tmp_path / "gt"
    (gt / "labels").mkdir(parents=True)
    (gt / "images").mkdir()
    stems = [f"img{i}" for i in range(10)]
    for s, anns in zip(stems, fx.GTS):
        (gt / "labels" / f"{s}.txt").write_text(emit_labels(anns))
    write_manifest(gt, Manifest(classes, {"test": stems}))
    cc = _write_split(tmp_path, "cc", fx.CLEAN_MODEL, emit_detections)
    bc = _write_split(tmp_path, "bc", fx.BACKDOOR_CLEAN, emit_detections)
    bt = _write_split(tmp_path, "bt", fx.BACKDOOR_TRIGGERED, emit_detections)
    (bt / "img7.txt").unlink()
    r = evaluate_run(gt, cc, bc, bt, EvalConfig.for_classes(classes))
    assert r.n_sa == 4 and r.n_ta == 7
    assert r.ap_backdoor_model[0] == pytest.approx(250 / 3, abs=1e-6)
    assert any("img7" in w for w in r.warnings)
    assert r.to_dict()["ap_clean_model"]["car"] == pytest.approx(6900 / 81, abs=1e-6)


def test_greedy_is_not_max_cardinality():
    # A (conf .9) prefers gt0 over gt1; B (conf .8) only overlaps gt0.
    # Greedy keeps one match where a max-cardinality assignment would find two;
    # the exhaustive oracle therefore ranks assignments in confidence order.
    ious = np.array([[0.9, 0.6], [0.6, 0.0]])
    conf = np.array([0.9, 0.8])
    assert _greedy_pairs(ious, conf, 0.5) == [(0, 0)]
    assert fx.exhaustive_match(ious, conf, 0.5) == [(0, 0)]
