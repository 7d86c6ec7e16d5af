import numpy as np
import pytest

from hierlab.analysis import loglog_slope, powerlaw_fit, spearman
from hierlab.generators import ba_generate, hnm_generate, hnm_three_community
from hierlab.graph import Graph, GraphError, clustering_by_degree, connected_components, neighbor_correlation


@pytest.fixture(scope="module")
def hnm1024():
    return hnm_generate(4, 5)


@pytest.fixture(scope="module")
def hnm3():
    return hnm_three_community(5)


class TestHnm:
    def test_seed_module_is_k4(self):
        g, ann = hnm_generate(4, 1)
        assert g.n == 4 and g.num_edges == 6
        assert ann.generation.tolist() == [1, 1, 1, 1]

    def test_1024_nodes(self, hnm1024):
        g, ann = hnm1024
        assert g.n == 1024
        assert np.bincount(ann.generation).tolist()[1:] == [4, 12, 48, 192, 768]

    def test_clustering_slope(self, hnm1024):
        slope = loglog_slope(clustering_by_degree(hnm1024[0]))
        assert slope == pytest.approx(-1.0, abs=0.2)

    def test_knn_decreasing(self, hnm1024):
        knn = neighbor_correlation(hnm1024[0])
        ks = sorted(knn)
        assert spearman(ks, [knn[k] for k in ks]) < 0

    def test_deterministic(self):
        a, _ = hnm_generate(4, 4)
        b, _ = hnm_generate(4, 4)
        assert np.array_equal(a.edges, b.edges)

    def test_hubs_grow(self):
        maxdeg = [hnm_generate(4, k)[0].degrees.max() for k in range(2, 6)]
        assert all(x < y for x, y in zip(maxdeg, maxdeg[1:]))

    def test_level_tags(self, hnm1024):
        _, ann = hnm1024
        assert set(ann.generation[ann.level == "top"]) == {1, 2, 3}
        assert set(ann.generation[ann.level == "middle"]) == {4}
        assert set(ann.generation[ann.level == "bottom"]) == {5}

    def test_other_module_size(self):
        g, _ = hnm_generate(5, 3)
        assert g.n == 125
        assert connected_components(g).max() == 0

    @pytest.mark.parametrize("args", [(2, 3), (4, 0)])
    def test_bad_args(self, args):
        with pytest.raises(ValueError):
            hnm_generate(*args)

    def test_overflow_guard(self):
        with pytest.raises(GraphError):
            hnm_generate(4, 11)


class TestThreeCommunity:
    def test_label_histogram(self, hnm3):
        g, _ = hnm3
        assert np.bincount(g.labels).tolist() == [g.n // 3] * 3

    def test_bridges_disconnect(self, hnm3):
        g, _ = hnm3
        size = g.n // 3
        roots = {0, size, 2 * size}
        keep = [e for e in g.edges.tolist() if not (e[0] in roots and e[1] in roots)]
        assert len(keep) == g.num_edges - 3
        comp = connected_components(Graph.from_edges(g.n, keep))
        assert comp.max() == 2
        assert np.array_equal(comp, g.labels)

    def test_majority_label(self, hnm3):
        g, _ = hnm3
        agree = 0
        for v in range(g.n):
            counts = np.bincount(g.labels[g.neighbors(v)], minlength=3)
            agree += counts.argmax() == g.labels[v]
        assert agree / g.n >= 0.95

    def test_levels_per_community(self, hnm3):
        g, ann = hnm3
        for c in range(3):
            sel = g.labels == c
            assert np.sum(ann.level[sel] == "top") == 64

    def test_needs_two_iterations(self):
        with pytest.raises(ValueError):
            hnm_three_community(1)


class TestBa:
    def test_seed_graph(self):
        g = ba_generate(4, 3)
        assert g.num_edges == 6

    @pytest.mark.parametrize("n,m,seed", [(50, 1, 0), (200, 2, 3), (300, 4, 9)])
    def test_degree_sum(self, n, m, seed):
        g = ba_generate(n, m, seed)
        assert g.degrees.sum() == 2 * (m * (m + 1) // 2 + m * (n - m - 1))

    def test_deterministic(self):
        assert np.array_equal(ba_generate(300, 2, 5).edges, ba_generate(300, 2, 5).edges)
        assert not np.array_equal(ba_generate(300, 2, 5).edges, ba_generate(300, 2, 6).edges)

    def test_tail_exponent(self):
        fit = powerlaw_fit(ba_generate(2000, 2, 0).degrees)
        assert 2.5 <= fit.alpha <= 3.5

    @pytest.mark.parametrize("seed", range(3))
    def test_neighbour_degree_flat(self, seed):
        # node-level rank correlation between degree and mean neighbour degree
        g = ba_generate(2000, 2, seed)
        src = np.repeat(np.arange(g.n), g.degrees)
        knn = np.bincount(src, weights=g.degrees[g.indices], minlength=g.n) / g.degrees
        assert abs(spearman(g.degrees, knn)) < 0.4

    def test_n_le_m(self):
        with pytest.raises(GraphError):
            ba_generate(3, 3)
