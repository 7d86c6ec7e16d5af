"""Immutable undirected graph and the topological statistics computed on it."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from hierlab import _kernels

UNREACHABLE = np.iinfo(np.int64).max


class GraphError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected simple graph stored in compressed adjacency form.

    Build instances with :meth:`Graph.from_edges`; the constructor assumes
    already-canonical arrays.

    Attributes
    ----------
    n : int
        Number of nodes.
    edges : (m, 2) int64 array
        Canonical undirected edges with ``u < v``, lexicographically sorted.
    indptr, indices : int64 arrays
        CSR adjacency; each neighbor list is sorted.
    features : (n, d) array or scipy sparse matrix, optional
    labels : (n,) int64 array
        Class id per node, ``-1`` for unlabeled.
    num_classes : int
    """

    n: int
    edges: np.ndarray
    indptr: np.ndarray
    indices: np.ndarray
    features: object = None
    labels: np.ndarray = field(default=None)
    num_classes: int = 0

    @classmethod
    def from_edges(cls, n, edges, features=None, labels=None, num_classes=None):
        n = int(n)
        if n < 0:
            raise GraphError("node count must be non-negative")
        e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if e.size and (e.min() < 0 or e.max() >= n):
            raise GraphError("edge endpoint out of range")
        e = e[e[:, 0] != e[:, 1]]
        e = np.sort(e, axis=1)
        e = np.unique(e, axis=0) if len(e) else e.reshape(0, 2)

        src = np.concatenate([e[:, 0], e[:, 1]])
        dst = np.concatenate([e[:, 1], e[:, 0]])
        order = np.lexsort((dst, src))
        src, dst = src[order], dst[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(indptr, src + 1, 1)
        indptr = np.cumsum(indptr)

        if labels is None:
            lab = np.full(n, -1, dtype=np.int64)
        else:
            lab = np.asarray(labels, dtype=np.int64).copy()
            if lab.shape != (n,):
                raise GraphError(f"labels must have shape ({n},)")
        present = lab[lab >= 0]
        if num_classes is None:
            num_classes = int(present.max()) + 1 if present.size else 0
        if present.size and present.max() >= num_classes:
            raise GraphError("label id exceeds num_classes")
        if (lab < -1).any():
            raise GraphError("negative label other than -1 (unlabeled)")

        if features is not None and features.shape[0] != n:
            raise GraphError("feature matrix row count does not match n")

        for arr in (e, indptr, dst, lab):
            arr.setflags(write=False)
        return cls(n, e, indptr, dst, features, lab, int(num_classes))

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def neighbors(self, v: int) -> np.ndarray:
        self._check_node(v)
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def has_edge(self, u: int, v: int) -> bool:
        nb = self.neighbors(u)
        i = np.searchsorted(nb, v)
        return bool(i < len(nb) and nb[i] == v)

    def with_labels(self, labels, num_classes=None) -> "Graph":
        return Graph.from_edges(self.n, self.edges, self.features, labels,
                                num_classes if num_classes is not None else self.num_classes)

    def with_features(self, features) -> "Graph":
        return Graph.from_edges(self.n, self.edges, features, self.labels, self.num_classes)

    def adjacency(self):
        """Symmetric scipy CSR adjacency matrix (float64, unit weights)."""
        import scipy.sparse as sp

        data = np.ones(len(self.indices))
        return sp.csr_matrix((data, self.indices, self.indptr), shape=(self.n, self.n))

    def _check_node(self, v):
        if not 0 <= v < self.n:
            raise GraphError(f"node id {v} out of range [0, {self.n})")


@dataclass(frozen=True)
class SplitMask:
    """Disjoint train / validation / test node-id sets."""

    train: np.ndarray
    val: np.ndarray
    test: np.ndarray

    def __post_init__(self):
        for name in ("train", "val", "test"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=np.int64))
        a, b, c = (set(x.tolist()) for x in (self.train, self.val, self.test))
        if a & b or a & c or b & c:
            raise GraphError("split sets overlap")

    def validate(self, n: int):
        for arr in (self.train, self.val, self.test):
            if arr.size and (arr.min() < 0 or arr.max() >= n):
                raise GraphError("split node id out of range")

    def train_labels(self, g: Graph) -> np.ndarray:
        """Labels with everything outside the training set hidden (-1)."""
        lab = np.full(g.n, -1, dtype=np.int64)
        lab[self.train] = g.labels[self.train]
        return lab


def degree(g: Graph, v: int) -> int:
    g._check_node(v)
    return int(g.indptr[v + 1] - g.indptr[v])


def local_clustering(g: Graph) -> np.ndarray:
    """Local clustering coefficient per node (0 for degree < 2)."""
    A = g.adjacency()
    tri = np.asarray((A @ A).multiply(A).sum(axis=1)).ravel() / 2.0
    k = g.degrees.astype(float)
    out = np.zeros(g.n)
    ok = k >= 2
    out[ok] = 2.0 * tri[ok] / (k[ok] * (k[ok] - 1))
    return out


def clustering_by_degree(g: Graph) -> dict[int, float]:
    """Mean local clustering C(k) for every degree k present in the graph.

    Nodes of degree below 2 have C = 0 by convention, so degrees 0 and 1 map
    to 0.0 when present.
    """
    cc = local_clustering(g)
    k = g.degrees
    return {int(d): float(cc[k == d].mean()) for d in np.unique(k)}


def betweenness(g: Graph) -> np.ndarray:
    """Unnormalized shortest-path betweenness, counting each unordered pair once."""
    return _kernels.backend.brandes_betweenness(g.indptr, g.indices, g.n)


def shortest_path_lengths(g: Graph, source: int, cap: int | None = None) -> np.ndarray:
    """BFS hop distances from ``source``; nodes beyond ``cap`` or unreachable get UNREACHABLE."""
    g._check_node(source)
    dist = np.full(g.n, UNREACHABLE, dtype=np.int64)
    dist[source] = 0
    q = deque([source])
    indptr, indices = g.indptr, g.indices
    while q:
        u = q.popleft()
        du = dist[u]
        if cap is not None and du >= cap:
            continue
        for w in indices[indptr[u]:indptr[u + 1]]:
            if dist[w] == UNREACHABLE:
                dist[w] = du + 1
                q.append(w)
    return dist


def _log_bin_edges(values: np.ndarray, per_decade: int = 10) -> np.ndarray:
    pos = values[values > 0]
    if pos.size == 0:
        return np.array([0.0, 1.0])
    lo = math.floor(math.log10(pos.min()) * per_decade) / per_decade
    hi = math.ceil(math.log10(pos.max()) * per_decade) / per_decade
    if hi <= lo:
        hi = lo + 1.0 / per_decade
    nbins = int(round((hi - lo) * per_decade))
    return np.logspace(lo, hi, nbins + 1)


def neighbor_correlation(g: Graph, quantity: str = "connectivity",
                         values: np.ndarray | None = None,
                         per_decade: int = 10) -> dict[float, float]:
    """Average nearest-neighbour connectivity <k_nn>(k) or betweenness <b_nn>(b).

    For connectivity the keys are exact degrees. Betweenness is continuous, so
    nodes are grouped into logarithmic bins (``per_decade`` per decade) keyed by
    the geometric bin centre; nodes with zero betweenness form their own bin
    keyed 0.0. Each entry is the mean of the quantity over all neighbours of all
    nodes in the group. Isolated nodes contribute nothing.

    ``values`` may pass precomputed betweenness to avoid recomputation.
    """
    if g.num_edges == 0:
        raise GraphError("neighbor correlation needs at least one edge")
    if quantity == "connectivity":
        vals = g.degrees.astype(float)
        keys = g.degrees.astype(float)
    elif quantity == "betweenness":
        vals = betweenness(g) if values is None else np.asarray(values, dtype=float)
        edges = _log_bin_edges(vals, per_decade)
        keys = np.zeros(g.n)
        pos = vals > 0
        idx = np.clip(np.searchsorted(edges, vals[pos], side="right") - 1, 0, len(edges) - 2)
        keys[pos] = np.sqrt(edges[idx] * edges[idx + 1])
    else:
        raise GraphError(f"unknown quantity {quantity!r}")

    deg = g.degrees
    src = np.repeat(np.arange(g.n), deg)
    nb_vals = vals[g.indices]
    out = {}
    for key in np.unique(keys[deg > 0]):
        sel = keys[src] == key
        out[float(key)] = float(nb_vals[sel].mean())
    return out


def edge_homophily(g: Graph) -> float:
    """Fraction of edges whose two endpoints carry the same label."""
    if (g.labels < 0).any():
        raise GraphError("edge homophily requires every node to be labeled")
    if g.num_edges == 0:
        raise GraphError("edge homophily undefined on an edgeless graph")
    u, v = g.edges[:, 0], g.edges[:, 1]
    return float(np.mean(g.labels[u] == g.labels[v]))


def connected_components(g: Graph) -> np.ndarray:
    """Component id per node (ids in order of lowest member)."""
    comp = np.full(g.n, -1, dtype=np.int64)
    c = 0
    for s in range(g.n):
        if comp[s] >= 0:
            continue
        comp[s] = c
        q = deque([s])
        while q:
            u = q.popleft()
            for w in g.indices[g.indptr[u]:g.indptr[u + 1]]:
                if comp[w] < 0:
                    comp[w] = c
                    q.append(w)
        c += 1
    return comp
