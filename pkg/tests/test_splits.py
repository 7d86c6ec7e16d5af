import numpy as np
import pytest
from hypothesis import given, strategies as st

from hierlab.generators import hnm_generate, hnm_three_community
from hierlab.graph import Graph
from hierlab.splits import SplitError, band_members, make_balanced_split, make_hierarchy_split


def labelled(n=120, C=3, seed=0):
    rng = np.random.default_rng(seed)
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)], labels=rng.permutation(np.arange(n) % C),
                            num_classes=C)


def test_per_class_count():
    m = make_balanced_split(labelled(), 20, 0, val=30)
    assert len(m.train) == 60
    assert np.bincount(labelled().labels[m.train]).tolist() == [20, 20, 20]
    assert len(m.val) == 30 and len(m.test) == 120 - 90


@given(st.integers(0, 10_000))
def test_disjoint_and_reproducible(seed):
    g = labelled(seed=seed % 7)
    a = make_balanced_split(g, 5, seed, val=0.2)
    b = make_balanced_split(g, 5, seed, val=0.2)
    for x, y in zip((a.train, a.val, a.test), (b.train, b.val, b.test)):
        assert np.array_equal(x, y)
    s = [set(x.tolist()) for x in (a.train, a.val, a.test)]
    assert not (s[0] & s[1] or s[0] & s[2] or s[1] & s[2])
    assert s[0] | s[1] | s[2] == set(range(g.n))


def test_hnm_convention():
    g, ann = hnm_generate(4, 5)
    g = g.with_labels(ann.community, 1)
    m = make_balanced_split(g, 0.1, 0, val=0.1, test=0.8)
    assert abs(len(m.test) - 818) <= 1


def test_class_too_small():
    with pytest.raises(SplitError):
        make_balanced_split(labelled(n=12), 4, 0)


def test_unlabelled_graph():
    with pytest.raises(SplitError):
        make_balanced_split(Graph.from_edges(3, [(0, 1)]), 1)


def test_quintiles():
    norms = np.arange(100, dtype=float)
    assert np.flatnonzero(band_members("q1", norms)).tolist() == list(range(20))
    assert band_members("q5", norms).sum() == 20
    assert sum(band_members(f"q{i}", norms).sum() for i in range(1, 6)) == 100


def test_unknown_band():
    with pytest.raises(SplitError):
        band_members("q6", np.zeros(3))
    with pytest.raises(SplitError):
        band_members("q1")
    with pytest.raises(SplitError):
        band_members("top")


@pytest.mark.parametrize("band", ["top", "middle", "bottom"])
def test_hnm_bands(band):
    g, ann = hnm_three_community(5)
    m, info = make_hierarchy_split(g, band, 40, 1, level=ann.level)
    assert np.bincount(g.labels[m.train]).tolist() == [40, 40, 40]
    assert set(ann.level[m.train]) == {band}
    assert info.topped_up == 0


def test_top_up_recorded():
    g, ann = hnm_three_community(5)
    m, info = make_hierarchy_split(g, "top", 100, 0, level=ann.level)
    assert np.bincount(g.labels[m.train]).tolist() == [100, 100, 100]
    assert info.topped_up == 3 * 36
    assert info.top_up_fraction == pytest.approx(0.36)
    assert np.sum(ann.level[m.train] == "top") == 192


def test_empty_band():
    g = labelled()
    with pytest.raises(SplitError):
        make_hierarchy_split(g, "top", 3, 0, level=np.full(g.n, "bottom"))


def test_quintile_split_prefers_band():
    g = labelled()
    norms = np.random.default_rng(0).random(g.n)
    m, info = make_hierarchy_split(g, "q1", 4, 0, norms=norms)
    inband = band_members("q1", norms)
    assert inband[m.train].mean() == 1 - info.top_up_fraction
