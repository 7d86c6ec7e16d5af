import numpy as np
import pytest
from hypothesis import given, strategies as st

from hierlab.metrics import confusion, micro_f1, per_class_f1, weighted_f1


def naive_f1(pred, truth):
    classes = sorted(set(truth) | set(pred))
    scores, support = [], []
    for c in classes:
        tp = sum(1 for p, t in zip(pred, truth) if p == c and t == c)
        fp = sum(1 for p, t in zip(pred, truth) if p == c and t != c)
        fn = sum(1 for p, t in zip(pred, truth) if p != c and t == c)
        scores.append(0.0 if tp == 0 else 2 * tp / (2 * tp + fp + fn))
        support.append(sum(1 for t in truth if t == c))
    weighted = sum(s * w for s, w in zip(scores, support)) / len(truth)
    micro = sum(1 for p, t in zip(pred, truth) if p == t) / len(truth)
    return weighted, micro


def test_perfect():
    y = np.array([0, 1, 2, 2, 1])
    assert weighted_f1(y, y) == 1.0 and micro_f1(y, y) == 1.0


def test_binary_counts():
    pred = np.array([1, 1, 0, 0])
    truth = np.array([1, 0, 1, 0])
    assert micro_f1(pred, truth) == 0.5


def test_hand_computed_ten_nodes():
    # truth 0:4, 1:3, 2:3; confusion rows truth, cols pred:
    # [[3,1,0],[1,2,0],[0,1,2]]
    truth = np.array([0, 0, 0, 0, 1, 1, 1, 2, 2, 2])
    pred = np.array([0, 0, 0, 1, 0, 1, 1, 1, 2, 2])
    # F1_0 = 6/8, F1_1 = 4/7, F1_2 = 4/5; weights 4,3,3
    expected = (4 * 0.75 + 3 * 4 / 7 + 3 * 0.8) / 10
    assert weighted_f1(pred, truth) == pytest.approx(expected, abs=1e-15)
    assert micro_f1(pred, truth) == pytest.approx(0.7)


def test_mask_selects():
    truth = np.array([0, 1, 1, 0])
    pred = np.array([0, 0, 1, 0])
    assert micro_f1(pred, truth, np.array([0, 2])) == 1.0
    assert micro_f1(pred, truth, np.array([True, True, False, False])) == 0.5


def test_empty_mask():
    with pytest.raises(ValueError):
        weighted_f1(np.array([0]), np.array([0]), np.array([], dtype=int))


def test_confusion_shape():
    cm = confusion(np.array([0, 2]), np.array([1, 2]), 3)
    assert cm.tolist() == [[0, 0, 0], [1, 0, 0], [0, 0, 1]]
    f1, sup = per_class_f1(np.array([0, 2]), np.array([1, 2]), 3)
    assert sup.tolist() == [0, 1, 1] and f1[2] == 1.0


@given(st.lists(st.tuples(st.integers(0, 4), st.integers(0, 4)), min_size=1, max_size=60))
def test_matches_naive(pairs):
    pred = np.array([p for p, _ in pairs])
    truth = np.array([t for _, t in pairs])
    w, m = naive_f1(pred.tolist(), truth.tolist())
    assert weighted_f1(pred, truth) == pytest.approx(w, abs=1e-12)
    assert micro_f1(pred, truth) == pytest.approx(m, abs=1e-12)
