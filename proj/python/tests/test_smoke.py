import itertools
import json
import math
import random

import pytest

import monitor_vad as mv


def brute_auc(scores, labels):
    pos = [s for s, y in zip(scores, labels) if y]
    neg = [s for s, y in zip(scores, labels) if not y]
    credit = sum(1.0 if p > n else 0.5 if p == n else 0.0 for p, n in itertools.product(pos, neg))
    return credit / (len(pos) * len(neg))


def test_metrics_match_brute_force():
    rng = random.Random(5)
    for _ in range(50):
        n = rng.randint(2, 80)
        scores = [rng.choice([0.1, 0.5, 0.9]) if rng.random() < 0.5 else rng.random() for _ in range(n)]
        labels = [1, 0] + [int(rng.random() < 0.3) for _ in range(n - 2)]
        assert mv.roc_auc(scores, labels) == pytest.approx(brute_auc(scores, labels), abs=1e-9)
    assert mv.average_precision([0.9, 0.8, 0.7], [1, 0, 1]) == pytest.approx(5 / 6, abs=1e-12)
    with pytest.raises(mv.UndefinedMetric):
        mv.roc_auc([0.1, 0.2], [1, 1])


def test_scoring_helpers():
    assert mv.smooth(0.9, 0.2, 0.7) == 0.69
    assert mv.quantize_score(0.25) == 3
    assert mv.parse_score("The anomaly score is 0.75.") == 0.75
    with pytest.raises(mv.MonitorError):
        mv.parse_score("no number")
    v = mv.embed_text("two men fight")
    assert len(v) == 128
    assert math.isclose(sum(x * x for x in v), 1.0, abs_tol=1e-9)
    assert mv.gate([1.0, 0.0], [[0.6, 0.8], [0.5, math.sqrt(0.75)]], 0.5) == [0]
    assert "alpha=0.7" in mv.default_config()
    assert mv.normalize_config("alpha=0.5").startswith("alpha=0.5")


def test_synth_run_eval(tmp_path):
    code, _, err = mv.synth(tmp_path / "corpus")
    assert code == 0, err
    code, _, err = mv.run(tmp_path / "corpus" / "manifest.json", out=tmp_path / "run")
    assert code == 0, err
    records = mv.read_scores(tmp_path / "run" / "scores" / "Fighting001_synth.jsonl")
    assert len(records) == 60
    assert records[20]["raw"] == 0.9
    code, _, err = mv.evaluate(tmp_path / "run", tmp_path / "corpus" / "annotations.txt",
                               tmp_path / "corpus" / "metadata.txt")
    assert code == 0, err
    metrics = json.loads((tmp_path / "run" / "metrics.json").read_text())
    assert metrics["overall"]["auc"] == 1.0
