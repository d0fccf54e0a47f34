import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from synth import CAR, CLASSES, PERSON, BICYCLE, random_scene
from thermal_backdoor.annotations import Annotation, BBox
from thermal_backdoor.errors import ConfigContradictionError, PlanError
from thermal_backdoor.oaa import OaaConfig, make_triggered_testset, plan_oaa, poison_image_oaa
from thermal_backdoor.plan import (
    ADVERSARIAL,
    CLEAN,
    DELETED,
    KEPT,
    NORMAL,
    RELABELED,
    PoisonPlan,
    count_for,
    select_poison_subset,
)
from thermal_backdoor.raster import GrayImage
from thermal_backdoor.thermal import ThermalMap
from thermal_backdoor.triggers import TriggerSpec

IDS = [f"img{i:03d}" for i in range(100)]


def scene():
    img = GrayImage.filled(320, 256, 40)
    anns = [
        Annotation(CAR, BBox(0.2, 0.2, 0.1, 0.1)),
        Annotation(PERSON, BBox(0.5, 0.5, 0.05, 0.2)),
        Annotation(CAR, BBox(0.7, 0.3, 0.2, 0.1)),
        Annotation(CAR, BBox(0.4, 0.8, 0.15, 0.15)),
    ]
    return img, anns


def test_default_q():
    plan = select_poison_subset(IDS, 0.20, 0.0, seed=1)
    assert plan.counts() == {NORMAL: 20, ADVERSARIAL: 0, CLEAN: 80}


def test_normal_adversarial_split():
    plan = select_poison_subset(IDS, 0.15, 0.05, seed=1)
    assert plan.counts() == {NORMAL: 15, ADVERSARIAL: 5, CLEAN: 80}


def test_determinism():
    a = select_poison_subset(IDS, 0.2, 0.05, seed=3)
    b = select_poison_subset(IDS, 0.2, 0.05, seed=3)
    c = select_poison_subset(IDS, 0.2, 0.05, seed=4)
    assert a == b
    assert {r.image_id for r in a.by_role(NORMAL)} != {r.image_id for r in c.by_role(NORMAL)}
    assert len(c.by_role(NORMAL)) == 20


def test_plan_errors():
    with pytest.raises(PlanError):
        select_poison_subset([], 0.2, 0.0, 0)
    with pytest.raises(PlanError):
        select_poison_subset(["a", "a"], 0.5, 0.0, 0)
    with pytest.raises(PlanError):
        select_poison_subset(["a", "b"], 1.0, 0.5, 0)


def test_count_half_up():
    assert count_for(0.05, 10) == 1  # 0.5 -> 1
    assert count_for(0.15, 37) == 6  # 5.55
    assert count_for(0.25, 2) == 1
    assert count_for(0.125, 4) == 1


@settings(max_examples=200, deadline=None)
@given(n=st.integers(1, 400), q_pct=st.integers(1, 100), adv_pct=st.integers(0, 50), seed=st.integers(0, 10**6))
def test_counts_property(n, q_pct, adv_pct, seed):
    if q_pct + adv_pct > 100:
        return
    ids = [str(i) for i in range(n)]
    q, adv = q_pct / 100, adv_pct / 100
    plan = select_poison_subset(ids, q, adv, seed)
    # oracle: half-up rounding on exact rationals
    assert len(plan.by_role(NORMAL)) == (2 * q_pct * n + 100) // 200
    assert len(plan.by_role(ADVERSARIAL)) == (2 * adv_pct * n + 100) // 200
    assert [r.image_id for r in plan.records] == ids


def test_misclassify_scene():
    img, anns = scene()
    cfg = OaaConfig(goal="misclassify", active_pixel_range=(128, 255))
    out, new, rec = poison_image_oaa(img, anns, cfg, NORMAL, CLASSES)
    assert len(rec.stamps) == 3
    assert [a.class_id for a in new] == [PERSON] * 4
    assert new[1] == anns[1]
    assert [a.bbox for a in new] == [a.bbox for a in anns]
    assert rec.label_edits == [RELABELED, KEPT, RELABELED, RELABELED]
    assert img.data.max() == 40  # input untouched
    assert (out.data == 192).sum() == sum(s.area for s in rec.stamps)


def test_disappear_scene():
    img, anns = scene()
    cfg = OaaConfig(goal="disappear", active_pixel_range=(128, 255))
    _, new, rec = poison_image_oaa(img, anns, cfg, NORMAL, CLASSES)
    assert len(rec.stamps) == 3
    assert new == [anns[1]]
    assert rec.label_edits.count(DELETED) == 3


def test_adversarial_scene():
    img, anns = scene()
    cfg = OaaConfig(active_pixel_range=(128, 255), adversarial_ratio=0.05)
    out, new, rec = poison_image_oaa(img, anns, cfg, ADVERSARIAL, CLASSES, pixel=30)
    assert len(rec.stamps) == 3 and new == anns
    assert (out.data == 30).sum() == sum(s.area for s in rec.stamps)


def test_role_intensity_contradictions():
    img, anns = scene()
    cfg = OaaConfig(active_pixel_range=(128, 255))
    with pytest.raises(ConfigContradictionError):
        poison_image_oaa(img, anns, cfg, NORMAL, CLASSES, pixel=64)
    with pytest.raises(ConfigContradictionError):
        poison_image_oaa(img, anns, cfg, ADVERSARIAL, CLASSES, pixel=200)
    with pytest.raises(ConfigContradictionError):
        OaaConfig(trigger=TriggerSpec(pixel=64), active_pixel_range=(128, 255)).normal_pixel()


def test_no_target_objects_is_noop():
    img = GrayImage.filled(64, 64, 3)
    anns = [Annotation(PERSON, BBox(0.5, 0.5, 0.2, 0.2))]
    out, new, rec = poison_image_oaa(img, anns, OaaConfig(), NORMAL, CLASSES)
    assert out is img and new == anns and rec.stamps == []
    assert any("unchanged" in n for n in rec.notes)


def test_tiny_object_gets_one_pixel():
    img = GrayImage.filled(640, 512, 0)
    anns = [Annotation(CAR, BBox(0.5, 0.5, 2 / 640, 2 / 512)), Annotation(CAR, BBox(0.2, 0.2, 0.3 / 640, 0.3 / 512))]
    _, _, rec = poison_image_oaa(img, anns, OaaConfig(), NORMAL, CLASSES)
    assert [s.area for s in rec.stamps] == [1, 1]
    assert len(rec.notes) == 2


def test_config_invariants():
    with pytest.raises(ConfigContradictionError):
        OaaConfig(q=0.9, adversarial_ratio=0.2)
    with pytest.raises(ConfigContradictionError):
        OaaConfig(active_pixel_range=(200, 100))
    with pytest.raises(ConfigContradictionError):
        OaaConfig(active_pixel_range=(0, 255), adversarial_ratio=0.1)
    with pytest.raises(ConfigContradictionError):
        OaaConfig(active_pixel_range=(0, 127), adversarial_ratio=0.1, adversarial_pixels=(5,))
    with pytest.raises(ConfigContradictionError):
        OaaConfig(goal="explode")


def test_plan_oaa_pixels():
    cfg = OaaConfig(
        trigger=TriggerSpec(),
        active_pixel_range=(0, 63),
        q=0.15,
        adversarial_ratio=0.05,
        seed=2,
    )
    plan = plan_oaa(IDS, cfg)
    for r in plan.by_role(NORMAL):
        assert 0 <= r.pixel <= 63
    for r in plan.by_role(ADVERSARIAL):
        assert 64 <= r.pixel <= 255
    assert all(r.pixel is None for r in plan.by_role(CLEAN))
    assert plan_oaa(IDS, cfg) == plan
    assert PoisonPlan.from_dict(plan.to_dict()) == plan


def test_plan_oaa_temperature_trigger():
    cfg = OaaConfig(trigger=TriggerSpec(temperature=36.8), active_pixel_range=(192, 255))
    plan = plan_oaa(IDS, cfg, ThermalMap.reference())
    assert {r.pixel for r in plan.by_role(NORMAL)} == {245}


def test_triggered_testset():
    rng = np.random.default_rng(0)
    samples = [("a", *scene()), ("b", GrayImage.filled(64, 64, 1), [Annotation(PERSON, BBox(0.5, 0.5, 0.2, 0.2))])]
    for i in range(5):
        samples.append((f"r{i}", *random_scene(rng)))
    cfg = OaaConfig(active_pixel_range=(192, 255))
    hi = make_triggered_testset(samples, cfg, CLASSES, intensity_override=245)
    lo = make_triggered_testset(samples, cfg, CLASSES, intensity_override=56)
    for (sid, img, anns), h, l in zip(samples, hi, lo):
        assert h.annotations == list(anns) and l.annotations == list(anns)
        n_src = sum(a.class_id == CAR for a in anns)
        assert len(h.provenance["stamps"]) == n_src
        # pixel-diff oracle: changes only inside stamped rectangles
        mask = np.zeros(img.data.shape, dtype=bool)
        for s in h.provenance["stamps"]:
            mask[s["top"] : s["top"] + s["height"], s["left"] : s["left"] + s["width"]] = True
        assert np.array_equal(h.image.data[~mask], img.data[~mask])
        assert np.all(h.image.data[mask] == 245) and np.all(l.image.data[mask] == 56)
    assert hi[1].image == samples[1][1]
    assert hi[0].provenance["in_active_range"] and not lo[0].provenance["in_active_range"]


def test_non_target_labels_preserved_random():
    rng = np.random.default_rng(11)
    cfg = OaaConfig(goal="misclassify", active_pixel_range=(128, 255))
    for _ in range(30):
        img, anns = random_scene(rng)
        _, new, _ = poison_image_oaa(img, anns, cfg, NORMAL, CLASSES)
        assert [a for a in anns if a.class_id in (PERSON, BICYCLE)] == [
            b for a, b in zip(anns, new) if a.class_id in (PERSON, BICYCLE)
        ]
        assert not any(a.class_id == CAR for a in new)
