"""Class-aware Ollivier-Ricci curvature of graph edges.

Each endpoint of an edge spreads unit mass over itself and its neighbours; a
neighbour's share is damped by how strongly its own training label dominates
its neighbourhood. Curvature compares the two distributions through the exact
1-Wasserstein distance under the hop metric (or, optionally, the hyperbolic
embedding distance).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from hierlab import _kernels
from hierlab.graph import Graph, GraphError, SplitMask

HOP_CAP = 3
MERGE_THRESHOLD = 24


class CurvatureError(ValueError):
    pass


@dataclass(frozen=True)
class MassDistribution:
    owner: int
    nodes: np.ndarray
    masses: np.ndarray

    def as_dict(self):
        return {int(a): float(m) for a, m in zip(self.nodes, self.masses)}


@dataclass
class EdgeCurvatureTable:
    """Curvature per canonical edge ``(u, v)`` with ``u < v``."""

    edges: np.ndarray
    kappa: np.ndarray

    def __post_init__(self):
        self.edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        self.kappa = np.asarray(self.kappa, dtype=float)
        if len(self.edges) != len(self.kappa):
            raise CurvatureError("edge and curvature arrays differ in length")
        self._index = {(int(u), int(v)): i for i, (u, v) in enumerate(self.edges)}

    def __len__(self):
        return len(self.kappa)

    def get(self, u, v):
        key = (u, v) if u < v else (v, u)
        try:
            return float(self.kappa[self._index[key]])
        except KeyError:
            raise CurvatureError(f"no curvature stored for edge {key}") from None

    def directed(self, g: Graph) -> np.ndarray:
        """Curvature aligned with the CSR adjacency slots of ``g`` (``g.indices``)."""
        src = np.repeat(np.arange(g.n), g.degrees)
        lo = np.minimum(src, g.indices)
        hi = np.maximum(src, g.indices)
        # canonical edges are lexicographically sorted, so a keyed search works
        keys = self.edges[:, 0] * g.n + self.edges[:, 1]
        want = lo * g.n + hi
        pos = np.searchsorted(keys, want)
        pos = np.minimum(pos, len(keys) - 1) if len(keys) else pos
        if len(want) and (len(keys) == 0 or np.any(keys[pos] != want)):
            raise CurvatureError("curvature table does not cover every edge of the graph")
        return self.kappa[pos]


def _train_labels(g: Graph, mask: SplitMask | None) -> np.ndarray:
    if mask is None:
        return np.full(g.n, -1, dtype=np.int64)
    return mask.train_labels(g)


def label_distribution_matrix(g: Graph, train_labels: np.ndarray, num_classes=None) -> np.ndarray:
    """D[u, i]: share of u's neighbours that are training nodes of class i.

    Unlabelled neighbours only enlarge the denominator; isolated nodes get 0.
    """
    C = g.num_classes if num_classes is None else num_classes
    D = np.zeros((g.n, max(C, 1)))
    src = np.repeat(np.arange(g.n), g.degrees)
    nl = train_labels[g.indices]
    ok = nl >= 0
    np.add.at(D, (src[ok], nl[ok]), 1.0)
    deg = g.degrees.astype(float)
    nz = deg > 0
    D[nz] /= deg[nz, None]
    return D


def label_distribution(g: Graph, u: int, i: int, mask: SplitMask | None) -> float:
    nb = g.neighbors(u)
    if len(nb) == 0:
        return 0.0
    lab = _train_labels(g, mask)
    return float(np.count_nonzero(lab[nb] == i)) / len(nb)


class HopGround:
    """Hop distances between node sets, exact up to ``cap`` hops (inf beyond).

    Supports of adjacent endpoints are at most 3 hops apart, so the default cap
    never truncates a curvature computation.
    """

    def __init__(self, g: Graph, cap: int = HOP_CAP):
        self.g = g
        self.cap = cap

    def __call__(self, a_nodes, b_nodes):
        a_nodes = np.asarray(a_nodes, dtype=np.int64)
        b_nodes = np.asarray(b_nodes, dtype=np.int64)
        kern = _kernels.backend
        # BFS runs per row node, so iterate over the smaller side
        if len(a_nodes) > len(b_nodes):
            return kern.hop_cost_matrix(self.g.indptr, self.g.indices, b_nodes, a_nodes, self.cap).T
        return kern.hop_cost_matrix(self.g.indptr, self.g.indices, a_nodes, b_nodes, self.cap)

    def edge_length(self, u, v):
        return 1.0


class HyperbolicGround:
    """Poincare distances between embedded nodes."""

    def __init__(self, embedding):
        self.emb = embedding

    def __call__(self, a_nodes, b_nodes):
        from hierlab.hyperbolic import distance_and_grad

        P = self.emb.points
        a = np.repeat(np.asarray(a_nodes), len(b_nodes))
        b = np.tile(np.asarray(b_nodes), len(a_nodes))
        d, _ = distance_and_grad(P[a], P[b], self.emb.c)
        return d.reshape(len(a_nodes), len(b_nodes))

    def edge_length(self, u, v):
        return float(self(np.array([u]), np.array([v]))[0, 0])


def mass_distribution(g: Graph, u: int, alpha=0.5, p=2.0, mask: SplitMask | None = None,
                      base=math.e, ground=None, D=None, train_labels=None) -> MassDistribution:
    """Class-aware lazy-walk distribution of node ``u``.

    ``u`` keeps ``alpha``; neighbour ``w`` gets weight
    ``base ** (-D[w, y_w] * d(u, w) ** p)`` renormalised so the neighbours share
    ``1 - alpha``. ``D[w, y_w]`` is zero when ``w`` has no training label.
    """
    nb = g.neighbors(u)
    if len(nb) == 0:
        raise CurvatureError(f"node {u} is isolated; mass distribution undefined")
    lab = _train_labels(g, mask) if train_labels is None else train_labels
    if D is None:
        D = label_distribution_matrix(g, lab)
    yl = lab[nb]
    dterm = np.where(yl >= 0, D[nb, np.maximum(yl, 0)], 0.0)
    if ground is None or isinstance(ground, HopGround):
        dist = np.ones(len(nb))
    else:
        dist = ground(np.array([u]), nb)[0]
    w = np.power(base, -dterm * dist ** p)
    w = (1.0 - alpha) * w / w.sum()
    return MassDistribution(int(u), np.concatenate([[u], nb]).astype(np.int64),
                            np.concatenate([[alpha], w]))


def _merge_identical(masses, cost, axis):
    """Collapse rows (axis=0) or columns (axis=1) of ``cost`` that are identical."""
    uniq, inv = np.unique(cost, axis=axis, return_inverse=True)
    merged = np.bincount(inv.ravel(), weights=masses, minlength=uniq.shape[axis])
    return merged, uniq


def transport(a, b, cost) -> float:
    """Exact optimal transport cost between mass vectors under ``cost``.

    Identical cost rows/columns are merged first; this leaves the optimum
    unchanged and shrinks hop-metric problems drastically.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    cost = np.asarray(cost, dtype=float)
    if not np.all(np.isfinite(cost)):
        raise CurvatureError("infinite ground distance between supports")
    keep_a = a > 0
    keep_b = b > 0
    a, b, cost = a[keep_a], b[keep_b], cost[keep_a][:, keep_b]
    if max(cost.shape) > MERGE_THRESHOLD:
        a, cost = _merge_identical(a, cost, 0)
        b, cost = _merge_identical(b, cost, 1)
    return float(_kernels.backend.transport_cost(a, b, np.ascontiguousarray(cost)))


def wasserstein(mu: MassDistribution, mv: MassDistribution, ground) -> float:
    """1-Wasserstein distance between two mass distributions."""
    cost = ground(mu.nodes, mv.nodes)
    return transport(mu.masses, mv.masses, cost)


def class_aware_ricci(g: Graph, edge, alpha=0.5, p=2.0, mask: SplitMask | None = None,
                      literal=False, ground=None, base=math.e, D=None, train_labels=None) -> float:
    """Curvature of edge ``(u, v)``: ``1 - W/d`` by default, ``W/d`` when ``literal``."""
    u, v = (int(x) for x in edge)
    if not g.has_edge(u, v):
        raise GraphError(f"({u}, {v}) is not an edge")
    if ground is None:
        ground = HopGround(g)
    lab = _train_labels(g, mask) if train_labels is None else train_labels
    if D is None:
        D = label_distribution_matrix(g, lab)
    mu = mass_distribution(g, u, alpha, p, ground=ground, D=D, train_labels=lab, base=base)
    mv = mass_distribution(g, v, alpha, p, ground=ground, D=D, train_labels=lab, base=base)
    w = wasserstein(mu, mv, ground)
    d = ground.edge_length(u, v)
    return w / d if literal else 1.0 - w / d


def curvature_table(g: Graph, alpha=0.5, p=2.0, mask: SplitMask | None = None,
                    literal=False, ground=None, base=math.e) -> EdgeCurvatureTable:
    """Class-aware curvature for every edge of ``g``."""
    if ground is None:
        ground = HopGround(g)
    lab = _train_labels(g, mask)
    D = label_distribution_matrix(g, lab)
    dists = {}

    def dist_of(x):
        if x not in dists:
            dists[x] = mass_distribution(g, x, alpha, p, ground=ground, D=D,
                                         train_labels=lab, base=base)
        return dists[x]

    kappa = np.empty(g.num_edges)
    for i, (u, v) in enumerate(g.edges.tolist()):
        w = wasserstein(dist_of(u), dist_of(v), ground)
        d = ground.edge_length(u, v)
        kappa[i] = w / d if literal else 1.0 - w / d
    return EdgeCurvatureTable(g.edges.copy(), kappa)


def ground_from_name(name: str, g: Graph, embedding=None):
    if name == "hop":
        return HopGround(g)
    if name == "hyperbolic":
        if embedding is None:
            raise CurvatureError("hyperbolic ground metric needs an embedding")
        return HyperbolicGround(embedding)
    raise CurvatureError(f"unknown ground metric {name!r}")


__all__ = [
    "EdgeCurvatureTable", "MassDistribution", "HopGround", "HyperbolicGround",
    "label_distribution", "label_distribution_matrix", "mass_distribution",
    "transport", "wasserstein", "class_aware_ricci", "curvature_table",
]
