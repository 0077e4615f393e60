import json
import os

import numpy as np
import pytest

import importance_studio as imp

FIXTURES = os.environ.get(
    "IMP_FIXTURE_DIR", os.path.join(os.path.dirname(__file__), "..", "..", "tests", "fixtures"))


def load(name):
    with open(os.path.join(FIXTURES, "designs", name + ".json")) as f:
        return json.load(f)


def small():
    return {"map_w": 64, "map_h": 64}


def test_canonical_round_trip():
    poster = load("poster")
    text = imp.canonical_json(poster)
    assert imp.canonical_json(text) == text
    assert imp.content_hash(poster) == imp.content_hash(text)


def test_invalid_design_raises_with_code():
    bad = load("poster")
    bad["canvas"]["w"] = -5
    with pytest.raises(imp.ImpError) as info:
        imp.canonical_json(bad)
    assert imp.error_code(info.value) == "InvalidDesign"
    bad = load("poster")
    bad["colour"] = "red"
    with pytest.raises(imp.ImpError):
        imp.canonical_json(bad)
    imp.canonical_json(bad, lenient=True)


def test_classify():
    name, probs = imp.classify(load("poster"))
    assert name == "MoviePoster"
    assert abs(sum(probs.values()) - 1.0) < 1e-9


def test_predict_and_scores():
    poster = load("poster")
    m = imp.predict(poster, small())
    assert m.shape == (64, 64)
    assert m.dtype == np.float64
    assert 0.0 <= m.min() and m.max() <= 1.0
    assert np.array_equal(m, imp.predict(poster, small()))
    scores = imp.element_scores(m, poster)
    assert len(scores) == len(poster["elements"])
    assert all(0.0 <= s <= 1.0 for s in scores)


def test_evaluate_identity():
    rng = np.random.default_rng(3)
    truth = rng.random((8, 8))
    r = imp.evaluate(truth, truth)
    assert r["cc"] == pytest.approx(1.0, abs=1e-12)
    assert r["rmse"] == pytest.approx(0.0, abs=1e-12)
    assert r["r2"] == pytest.approx(1.0, abs=1e-12)
    assert r["kl"] == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(imp.ImpError):
        imp.evaluate(truth, np.full((8, 8), 0.5))


def test_optimize_is_deterministic_and_monotone():
    ad = load("ad")
    scores = imp.element_scores(imp.predict(ad, small()), ad)
    targets = {e["id"]: s for e, s in zip(ad["elements"], scores)}
    targets["brand"] = 0.9
    ga = {"population": 12, "elite": 3, "offspring": 9, "epochs": 4, "seed": 5}
    best, report, history = imp.optimize(ad, targets, ga, small())
    again = imp.optimize(ad, targets, ga, small())
    assert (best, report, history) == again
    totals = [h["best_total"] for h in history["history"]]
    assert len(totals) == 4
    assert all(b <= a for a, b in zip(totals, totals[1:]))
    assert report["total"] == totals[-1]


def test_reflow():
    out = imp.reflow(load("poster"), 1600, 900, predictor_config=small())
    assert out["template_id"] == "landscape-5"
    assert out["design"]["canvas"] == {"w": 1600, "h": 900}
    assert sorted(out["ranking"]) == sorted(e["id"] for e in load("poster")["elements"])


def test_rle_round_trip():
    mask = np.array([[1, 1, 0], [0, 0, 1]], dtype=np.uint8)
    assert imp.rle_encode(mask) == "3x2:0,2,3,1"
    assert np.array_equal(imp.rle_decode("3x2:0,2,3,1"), mask)


def test_annotation_small_fixture():
    maps, report = imp.build_annotation_maps(
        os.path.join(FIXTURES, "annotation", "small.jsonl"),
        os.path.join(FIXTURES, "annotation", "sentinels"))
    with open(os.path.join(FIXTURES, "annotation", "small_expected.json")) as f:
        expected = json.load(f)
    assert sorted(r["participant_id"] for r in report["rejected"]) == expected["rejected_participants"]
    got = maps["d_alpha"]
    want = expected["maps"]["d_alpha"]
    assert got.shape == (want["h"], want["w"])
    assert got.ravel().tolist() == want["values"]
