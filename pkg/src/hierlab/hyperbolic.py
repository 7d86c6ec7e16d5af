"""Poincare-ball geometry and shallow hyperbolic graph embedding.

Points live in the open ball ``{x : c * |x|^2 < 1}``. The embedding is trained
with Riemannian SGD on a negative-sampling softmax loss over graph edges; the
distance of each node from the origin (its Poincare norm) is the hierarchy
signal used downstream.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from hierlab import _kernels
from hierlab.graph import Graph, GraphError

log = logging.getLogger(__name__)

BALL_EPS = 1e-5


class BallError(ValueError):
    pass


def _check_in_ball(x, c):
    sq = np.sum(np.asarray(x, dtype=float) ** 2, axis=-1)
    if np.any(c * sq >= 1.0):
        raise BallError("point lies on or outside the Poincare ball boundary")


def mobius_add(x, y, c=1.0):
    """Mobius addition x (+)_c y; broadcasts over leading axes."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    _check_in_ball(x, c)
    _check_in_ball(y, c)
    xy = np.sum(x * y, axis=-1, keepdims=True)
    x2 = np.sum(x * x, axis=-1, keepdims=True)
    y2 = np.sum(y * y, axis=-1, keepdims=True)
    num = (1 + 2 * c * xy + c * y2) * x + (1 - c * x2) * y
    den = 1 + 2 * c * xy + c * c * x2 * y2
    return num / den


def poincare_distance(x, y, c=1.0):
    """Geodesic distance (2/sqrt c) artanh(sqrt c |(-x) (+)_c y|)."""
    diff = mobius_add(-np.asarray(x, dtype=float), y, c)
    r = np.sqrt(c) * np.linalg.norm(diff, axis=-1)
    return 2.0 / np.sqrt(c) * np.arctanh(np.minimum(r, 1.0 - 1e-16))


def poincare_norm(x, c=1.0):
    """Distance of x from the origin of the ball."""
    x = np.asarray(x, dtype=float)
    _check_in_ball(x, c)
    return 2.0 / np.sqrt(c) * np.arctanh(np.sqrt(c) * np.linalg.norm(x, axis=-1))


def distance_and_grad(x, y, c=1.0):
    """Distance via the arcosh closed form and its Euclidean gradient in ``x``.

    Row-wise over ``(k, dim)`` arrays. Equivalent to :func:`poincare_distance`.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.atleast_2d(np.asarray(y, dtype=float))
    sx = np.sum(x * x, axis=1)
    sy = np.sum(y * y, axis=1)
    sd = np.sum((x - y) ** 2, axis=1)
    al = 1.0 - c * sx
    be = 1.0 - c * sy
    gam = np.maximum(1.0 + 2.0 * c * sd / (al * be), 1.0)
    d = np.arccosh(gam) / np.sqrt(c)
    den = np.maximum(gam * gam - 1.0, 1e-30)
    scale = 4.0 * c / (be * al * al * np.sqrt(c) * np.sqrt(den))
    g = scale[:, None] * (al[:, None] * (x - y) + c * sd[:, None] * x)
    return d, g


def riemannian_scale(x, c=1.0):
    """Inverse metric factor (1 - c|x|^2)^2 / 4 turning Euclidean into Riemannian gradients."""
    sq = np.sum(np.asarray(x) ** 2, axis=-1, keepdims=True)
    return (1.0 - c * sq) ** 2 / 4.0


def embedding_loss(points, pos_u, pos_v, negatives, c=1.0):
    """Negative log-softmax loss summed over positive pairs.

    ``negatives[e]`` lists the sampled negatives of pair ``e``; the positive
    endpoint is always part of the softmax denominator.
    """
    total = 0.0
    for u, v, neg in zip(pos_u, pos_v, negatives):
        others = np.concatenate([[v], np.asarray(neg, dtype=np.int64)])
        d, _ = distance_and_grad(np.repeat(points[u][None], len(others), 0), points[others], c)
        mn = d.min()
        total += d[0] - mn + np.log(np.exp(mn - d).sum())
    return float(total)


def embedding_grad(points, pos_u, pos_v, negatives, c=1.0, riemannian=True):
    """Gradient of :func:`embedding_loss` for every point (Riemannian by default)."""
    grad = np.zeros_like(points, dtype=float)
    for u, v, neg in zip(pos_u, pos_v, negatives):
        others = np.concatenate([[v], np.asarray(neg, dtype=np.int64)])
        pu = np.repeat(points[u][None], len(others), 0)
        d, gu = distance_and_grad(pu, points[others], c)
        _, go = distance_and_grad(points[others], pu, c)
        p = np.exp(d.min() - d)
        p /= p.sum()
        coef = -p
        coef[0] += 1.0
        grad[u] += coef @ gu
        np.add.at(grad, others, coef[:, None] * go)
    if riemannian:
        grad = grad * riemannian_scale(points, c)
    return grad


def project(points, c=1.0, eps=BALL_EPS):
    """Pull points that left the ball back to Euclidean radius (1 - eps)/sqrt(c)."""
    maxnorm = (1.0 - eps) / np.sqrt(c)
    nrm = np.linalg.norm(points, axis=-1, keepdims=True)
    return np.where(nrm > maxnorm, points * (maxnorm / np.maximum(nrm, 1e-300)), points)


@dataclass
class PoincareEmbedding:
    points: np.ndarray
    c: float = 1.0
    norms: np.ndarray = field(init=False)
    losses: list = field(default_factory=list)

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float)
        _check_in_ball(self.points, self.c)
        self.norms = poincare_norm(self.points, self.c)

    @property
    def n(self):
        return self.points.shape[0]

    @property
    def dim(self):
        return self.points.shape[1]

    def distance(self, u, v):
        return float(poincare_distance(self.points[u], self.points[v], self.c))


def positive_pairs(g: Graph):
    """Both orientations of every undirected edge."""
    e = g.edges
    return np.concatenate([e[:, 0], e[:, 1]]), np.concatenate([e[:, 1], e[:, 0]])


def embed_train(g: Graph, dim=2, epochs=100, lr=0.3, neg_samples=10, seed=0,
                c=1.0, burn_in=10, eps=BALL_EPS, init_radius=1e-3):
    """Fit a Poincare embedding of ``g`` by Riemannian SGD.

    Each epoch visits both orientations of every edge in a seeded random order
    and draws ``neg_samples`` distinct non-neighbours per visit. The first
    ``burn_in`` epochs run at ``lr / 10``. The result depends only on the
    arguments.
    """
    if g.num_edges == 0:
        raise GraphError("cannot embed a graph without edges")
    if dim < 2:
        raise ValueError("embedding dimension must be at least 2")
    rng = np.random.default_rng(seed)
    direction = rng.normal(size=(g.n, dim))
    direction /= np.linalg.norm(direction, axis=1, keepdims=True)
    radius = init_radius * rng.random(g.n) ** (1.0 / dim)
    points = np.ascontiguousarray(direction * radius[:, None] / np.sqrt(c))

    pu, pv = positive_pairs(g)
    ncand = 2 * neg_samples + 8
    losses = []
    kern = _kernels.backend
    for epoch in range(epochs):
        rate = lr / 10.0 if epoch < burn_in else lr
        order = rng.permutation(len(pu))
        cand = rng.integers(0, g.n, size=(len(pu), ncand), dtype=np.int64)
        total = kern.poincare_epoch(points, np.ascontiguousarray(pu[order]),
                                    np.ascontiguousarray(pv[order]), cand,
                                    g.indptr, g.indices, rate, c, eps, neg_samples)
        losses.append(total / len(pu))
        if log.isEnabledFor(logging.DEBUG) and epoch % 10 == 0:
            log.debug("epoch %d loss %.4f", epoch, losses[-1])
    return PoincareEmbedding(points, c, losses=losses)
