import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.stats import spearmanr

from conftest import balanced_tree, path_graph
from hierlab import _kernels
from hierlab.graph import Graph, GraphError
from hierlab.hyperbolic import (BALL_EPS, BallError, PoincareEmbedding, distance_and_grad,
                                embed_train, embedding_grad, embedding_loss, mobius_add,
                                poincare_distance, poincare_norm, project, riemannian_scale)


def ball_points(rng, k, dim=3, c=1.0, rmax=0.95):
    d = rng.normal(size=(k, dim))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    r = rmax * rng.random(k) ** (1.0 / dim)
    return d * r[:, None] / np.sqrt(c)


coords = st.floats(-0.6, 0.6, allow_nan=False)
point2 = st.tuples(coords, coords).map(np.array)
curv = st.sampled_from([0.5, 1.0, 2.0])


class TestMobius:
    @given(point2, curv)
    def test_identity(self, x, c):
        x = x / np.sqrt(c)
        assert np.allclose(mobius_add(x, np.zeros(2), c), x)

    @given(point2, curv)
    def test_inverse(self, x, c):
        x = x / np.sqrt(c)
        assert np.allclose(mobius_add(-x, x, c), 0, atol=1e-12)

    def test_collinear(self):
        r = mobius_add([0.3, 0.0], [0.4, 0.0])
        assert r[1] == 0
        assert np.linalg.norm(r) == pytest.approx(0.7 / 1.12, abs=1e-12)

    @given(point2, point2)
    def test_stays_in_ball(self, x, y):
        assert np.linalg.norm(mobius_add(x, y)) < 1

    def test_boundary_error(self):
        with pytest.raises(BallError):
            mobius_add([1.0, 0.0], [0.0, 0.0])


class TestDistance:
    def test_self(self):
        assert poincare_distance([0.2, 0.1], [0.2, 0.1]) == pytest.approx(0, abs=1e-12)

    def test_origin(self):
        assert poincare_distance([0, 0], [0.5, 0]) == pytest.approx(1.0986122886681098, abs=1e-9)

    def test_outside(self):
        with pytest.raises(BallError):
            poincare_distance([0, 0], [0.8, 0.8])

    def test_arcosh_form_agrees(self):
        rng = np.random.default_rng(1)
        for c in (0.5, 1.0, 3.0):
            x, y = ball_points(rng, 200, c=c), ball_points(rng, 200, c=c)
            d, _ = distance_and_grad(x, y, c)
            assert np.allclose(d, poincare_distance(x, y, c), rtol=1e-9, atol=1e-9)

    def test_metric_axioms_seeded(self):
        rng = np.random.default_rng(2024)
        x, y, z = (ball_points(rng, 1000) for _ in range(3))
        dxy, dyx = poincare_distance(x, y), poincare_distance(y, x)
        assert np.all(dxy >= 0)
        assert np.max(np.abs(dxy - dyx)) <= 1e-12
        slack = poincare_distance(x, y) + poincare_distance(y, z) - poincare_distance(x, z)
        assert slack.min() >= -1e-9
        assert np.all(poincare_distance(x, x) < 1e-9)

    @given(point2, point2)
    def test_symmetry(self, x, y):
        assert abs(poincare_distance(x, y) - poincare_distance(y, x)) <= 1e-12

    @given(point2, point2, point2)
    def test_triangle(self, x, y, z):
        assert poincare_distance(x, z) <= poincare_distance(x, y) + poincare_distance(y, z) + 1e-9

    @given(point2, point2)
    def test_identity_of_indiscernibles(self, x, y):
        d = poincare_distance(x, y)
        close = bool(np.max(np.abs(x - y)) <= 1e-9)
        if d < 1e-9:
            assert close
        if np.array_equal(x, y):
            assert d < 1e-9


class TestNorm:
    def test_origin(self):
        assert poincare_norm([0.0, 0.0]) == 0

    def test_half(self):
        assert poincare_norm([0.5, 0.0]) == pytest.approx(1.0986122886681098, abs=1e-9)

    @given(st.floats(0, 0.99), st.floats(0, 0.99), curv)
    def test_monotone(self, a, b, c):
        u = np.array([1.0, 1.0]) / np.sqrt(2 * c)
        lo, hi = sorted((a, b))
        if hi - lo < 1e-9:
            return
        assert poincare_norm(lo * u, c) < poincare_norm(hi * u, c)

    def test_equals_distance_from_origin(self):
        x = ball_points(np.random.default_rng(3), 50)
        assert np.allclose(poincare_norm(x), poincare_distance(np.zeros_like(x), x))

    def test_boundary(self):
        with pytest.raises(BallError):
            poincare_norm([0.0, 1.0])


class TestGradients:
    def test_distance_grad_fd(self):
        rng = np.random.default_rng(0)
        x, y = ball_points(rng, 20, rmax=0.8), ball_points(rng, 20, rmax=0.8)
        _, g = distance_and_grad(x, y, 1.3)
        eps = 1e-6
        for j in range(3):
            e = np.zeros(3)
            e[j] = eps
            fd = (distance_and_grad(x + e, y, 1.3)[0] - distance_and_grad(x - e, y, 1.3)[0]) / (2 * eps)
            assert np.allclose(fd, g[:, j], rtol=1e-5, atol=1e-7)

    def test_riemannian_loss_grad_fd(self):
        rng = np.random.default_rng(5)
        pts = ball_points(rng, 5, dim=2, rmax=0.7)
        pu, pv = [0, 1, 2, 3], [1, 2, 3, 4]
        negs = [[2, 3], [3, 4], [0, 4], [0, 1]]
        grad = embedding_grad(pts, pu, pv, negs, riemannian=True)
        eucl = np.zeros_like(pts)
        eps = 1e-5
        for i in range(pts.shape[0]):
            for j in range(pts.shape[1]):
                p, m = pts.copy(), pts.copy()
                p[i, j] += eps
                m[i, j] -= eps
                eucl[i, j] = (embedding_loss(p, pu, pv, negs) - embedding_loss(m, pu, pv, negs)) / (2 * eps)
        fd = eucl * riemannian_scale(pts)
        rel = np.abs(fd - grad).max() / np.abs(fd).max()
        assert rel < 1e-4


class TestProjection:
    def test_inside_untouched(self):
        x = np.array([[0.1, 0.2]])
        assert np.array_equal(project(x), x)

    def test_outside_pulled_in(self):
        x = project(np.array([[3.0, 4.0]]), c=2.0)
        assert 2.0 * np.sum(x ** 2) <= (1 - BALL_EPS) ** 2 + 1e-15


class TestEmbedTrain:
    def test_empty_graph(self):
        with pytest.raises(GraphError):
            embed_train(Graph.from_edges(3, []))

    def test_dim(self):
        with pytest.raises(ValueError):
            embed_train(path_graph(3), dim=1)

    def test_loss_decreases(self):
        g, _ = balanced_tree(3, 3)
        emb = embed_train(g, epochs=200, seed=1)
        assert emb.losses[-1] < emb.losses[0]

    def test_deterministic(self, backend):
        g, _ = balanced_tree(2, 4)
        a = embed_train(g, epochs=30, seed=7)
        b = embed_train(g, epochs=30, seed=7)
        assert np.array_equal(a.norms, b.norms)

    def test_backends_agree(self):
        if len(_kernels.AVAILABLE) < 2:
            pytest.skip("compiled kernels not built")
        g, _ = balanced_tree(2, 4)
        out = []
        for name in sorted(_kernels.AVAILABLE):
            prev = _kernels.use_backend(name)
            try:
                out.append(embed_train(g, epochs=20, seed=3).points)
            finally:
                _kernels.backend = prev
        assert np.allclose(out[0], out[1], atol=1e-12)

    def test_inside_ball_and_norm_cache(self):
        g, _ = balanced_tree(2, 4)
        emb = embed_train(g, epochs=60, lr=2.0, seed=0, c=1.5)
        assert np.max(1.5 * np.sum(emb.points ** 2, axis=1)) <= 1 - BALL_EPS
        assert np.allclose(emb.norms, poincare_norm(emb.points, 1.5), atol=1e-9)

    def test_projection_every_step(self, monkeypatch):
        # wrap the kernel so each epoch's output is checked; with a huge rate every update projects
        g, _ = balanced_tree(2, 3)
        kern = _kernels.backend
        seen = []

        class Spy:
            def __getattr__(self, name):
                return getattr(kern, name)

            def poincare_epoch(self, points, *args):
                out = kern.poincare_epoch(points, *args)
                seen.append(np.max(np.sum(points ** 2, axis=1)))
                return out

        monkeypatch.setattr(_kernels, "backend", Spy())
        embed_train(g, epochs=15, lr=50.0, burn_in=0)
        assert len(seen) == 15 and max(seen) <= (1 - BALL_EPS) ** 2 + 1e-12

    def test_depth_spearman(self):
        g, depth = balanced_tree(2, 4)
        emb = embed_train(g, epochs=100, seed=0)
        assert spearmanr(depth, emb.norms).statistic >= 0.7

    def test_embedding_dataclass(self):
        e = PoincareEmbedding(np.array([[0.0, 0.5]]))
        assert e.n == 1 and e.dim == 2
        assert e.norms[0] == pytest.approx(1.0986122886681098)
        with pytest.raises(BallError):
            PoincareEmbedding(np.array([[0.0, 1.0]]))
