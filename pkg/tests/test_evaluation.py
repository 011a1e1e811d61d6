import numpy as np
import pytest

from arnids.errors import UsageError
from arnids.evaluation import (
    ConfusionCounts,
    compare,
    evaluate,
    metrics_from_counts,
    render_report,
)
from arnids.model import ModelConfig, init_classifier
from arnids.numeric import make_rng


def counts_from(tp, fp, tn, fn):
    # binary layout: rows true, cols predicted; class 1 = attack
    return ConfusionCounts(matrix=np.array([[tn, fp], [fn, tp]], dtype=np.int64), normal_class=0)


def test_perfect_binary_metrics():
    rep = metrics_from_counts(counts_from(tp=1, fp=0, tn=1, fn=0))
    assert rep.accuracy == 1.0
    assert rep.precision == 1.0
    assert rep.recall == 1.0
    assert rep.f1 == 1.0
    assert rep.frr == 0.0
    assert rep.n_test == 2


def test_half_precision_full_recall():
    rep = metrics_from_counts(counts_from(tp=2, fp=2, tn=0, fn=0))
    assert rep.precision == pytest.approx(0.5)
    assert rep.recall == pytest.approx(1.0)
    assert rep.f1 == pytest.approx(2.0 / 3.0)


def test_frr_quarter():
    rep = metrics_from_counts(counts_from(tp=0, fp=1, tn=3, fn=0))
    assert rep.frr == pytest.approx(0.25)


def test_degenerate_denominators_give_zero():
    # nothing predicted positive and nothing actually positive
    rep = metrics_from_counts(counts_from(tp=0, fp=0, tn=4, fn=0))
    assert rep.precision == 0.0
    assert rep.recall == 0.0
    assert rep.f1 == 0.0
    assert rep.frr == 0.0
    assert rep.accuracy == 1.0


def test_all_metrics_within_unit_interval():
    rng = make_rng(7)
    for _ in range(100):
        c = int(rng.integers(2, 6))
        y_real = rng.integers(0, c, size=50)
        y_pred = rng.integers(0, c, size=50)
        rep = metrics_from_counts(compare(y_real, y_pred, num_classes=c))
        for value in (rep.accuracy, rep.precision, rep.recall, rep.f1, rep.frr):
            assert 0.0 <= value <= 1.0


def test_f1_is_harmonic_mean_of_reported_pair():
    rng = make_rng(11)
    for _ in range(100):
        c = int(rng.integers(2, 6))
        y_real = rng.integers(0, c, size=40)
        y_pred = rng.integers(0, c, size=40)
        rep = metrics_from_counts(compare(y_real, y_pred, num_classes=c))
        if rep.precision + rep.recall > 0:
            expected = 2 * rep.precision * rep.recall / (rep.precision + rep.recall)
            assert abs(rep.f1 - expected) <= 1e-12


def test_compare_identical_vectors_diagonal():
    y = np.array([0, 1, 2, 1, 0])
    counts = compare(y, y, num_classes=3)
    assert np.array_equal(counts.matrix, np.diag([2, 2, 1]))


def test_compare_all_wrong_binary():
    y_real = np.array([0, 0, 1, 1])
    y_pred = np.array([1, 1, 0, 0])
    counts = compare(y_real, y_pred, num_classes=2)
    tp, fp, tn, fn = counts.binarized()
    assert (tp, tn) == (0, 0)
    assert (fp, fn) == (2, 2)


def test_compare_matches_brute_force_tally():
    rng = make_rng(13)
    c = 4
    y_real = rng.integers(0, c, size=1000)
    y_pred = rng.integers(0, c, size=1000)
    counts = compare(y_real, y_pred, num_classes=c)
    manual = np.zeros((c, c), dtype=np.int64)
    for a, b in zip(y_real.tolist(), y_pred.tolist()):
        manual[a][b] += 1
    assert np.array_equal(counts.matrix, manual)
    assert counts.total == 1000


def test_compare_rejects_mismatched_lengths():
    with pytest.raises(UsageError):
        compare([0, 1], [0])
    with pytest.raises(UsageError):
        compare([], [])


def test_multiclass_macro_and_frr():
    # 3 classes, class 0 normal; craft a known matrix
    matrix = np.array(
        [
            [5, 1, 0],  # 6 normal rows, 1 flagged as attack class 1
            [1, 3, 0],
            [0, 0, 2],
        ],
        dtype=np.int64,
    )
    counts = ConfusionCounts(matrix=matrix, normal_class=0)
    rep = metrics_from_counts(counts)
    assert rep.accuracy == pytest.approx(10.0 / 12.0)
    p = [5 / 6, 3 / 4, 2 / 2]
    r = [5 / 6, 3 / 4, 2 / 2]
    assert rep.precision == pytest.approx(np.mean(p))
    assert rep.recall == pytest.approx(np.mean(r))
    assert rep.frr == pytest.approx(1.0 / 6.0)
    assert set(rep.per_class) == {0, 1, 2}
    assert rep.per_class[2]["support"] == 2


def test_binarized_pools_attack_classes():
    matrix = np.array(
        [
            [4, 1, 1],
            [1, 2, 1],
            [1, 0, 3],
        ],
        dtype=np.int64,
    )
    counts = ConfusionCounts(matrix=matrix, normal_class=0)
    tp, fp, tn, fn = counts.binarized()
    assert tn == 4
    assert fp == 2
    assert fn == 2
    assert tp == 6
    assert tp + fp + tn + fn == counts.total


def test_evaluate_end_to_end_keys():
    cfg = ModelConfig(cell_kind="gru", n=4, num_classes=2, window=2, seed=1, num_numeric=2)
    clf = init_classifier(cfg)
    windows = make_rng(2).uniform(0, 1, (6, 2, 2))
    labels = np.array([0, 1, 0, 1, 0, 1])
    rep = evaluate(clf, windows, labels)
    doc = rep.to_dict()
    assert set(doc) == {"accuracy", "precision", "recall", "f1", "frr", "n_test", "per_class"}
    assert doc["n_test"] == 6


def test_evaluate_empty_batch_raises():
    cfg = ModelConfig(cell_kind="gru", n=4, num_classes=2, window=2, seed=1, num_numeric=2)
    clf = init_classifier(cfg)
    with pytest.raises(UsageError):
        evaluate(clf, np.zeros((0, 2, 2)), np.zeros(0, dtype=int))


def test_render_report_mentions_choices_and_keys():
    rep = metrics_from_counts(counts_from(tp=3, fp=1, tn=4, fn=2))
    text = render_report(rep)
    assert text.startswith("#")
    assert "fp / (fp + tn)" in text
    for key in ("accuracy:", "precision:", "recall:", "f1:", "frr:", "n_test:", "per_class:"):
        assert key in text
