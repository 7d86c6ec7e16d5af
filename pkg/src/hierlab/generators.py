"""Synthetic graphs: deterministic hierarchical networks and preferential attachment."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from hierlab.graph import Graph, GraphError

MAX_NODES = 10**6

LEVELS = ("top", "middle", "bottom")


@dataclass(frozen=True)
class HnmAnnotation:
    """Per-node generation (iteration that created the node), community and level tag."""

    generation: np.ndarray
    community: np.ndarray
    level: np.ndarray

    def level_mask(self, level: str) -> np.ndarray:
        if level not in LEVELS:
            raise ValueError(f"unknown level {level!r}")
        return self.level == level


def _level_tags(generation, iterations):
    # last generation is the bottom level, the one before it the middle
    tags = np.full(len(generation), "top", dtype=object)
    tags[generation == iterations - 1] = "middle"
    tags[generation == iterations] = "bottom"
    return tags.astype(str)


def _hnm_edges(module_size, iterations):
    m = module_size
    iu = np.triu_indices(m, 1)
    edges = np.stack(iu, axis=1).astype(np.int64)
    generation = np.ones(m, dtype=np.int64)
    periphery = np.arange(1, m, dtype=np.int64)
    root = 0
    size = m
    for it in range(2, iterations + 1):
        parts = [edges]
        new_periph = []
        for r in range(1, m):
            off = r * size
            parts.append(edges + off)
            new_periph.append(periphery + off)
            parts.append(np.stack([np.full(len(periphery), root), periphery + off], axis=1))
        edges = np.concatenate(parts)
        periphery = np.concatenate(new_periph)
        generation = np.concatenate([generation, np.full(size * (m - 1), it, dtype=np.int64)])
        size *= m
    return size, edges, generation


def hnm_generate(module_size=4, iterations=5):
    """Ravasz-Barabasi hierarchical network with ``module_size ** iterations`` nodes.

    Iteration 1 is a complete graph on ``module_size`` nodes whose first node is
    the root hub. Each later iteration adds ``module_size - 1`` replicas of the
    current graph and wires every peripheral node of every replica to the root;
    the peripheral set is then the union of the replicas' peripheral sets.
    """
    if module_size < 3:
        raise ValueError("module_size must be at least 3")
    if iterations < 1:
        raise ValueError("iterations must be at least 1")
    if module_size ** iterations > MAX_NODES:
        raise GraphError(f"HNM with {module_size}**{iterations} nodes exceeds {MAX_NODES}")
    n, edges, generation = _hnm_edges(module_size, iterations)
    g = Graph.from_edges(n, edges)
    ann = HnmAnnotation(generation, np.zeros(n, dtype=np.int64), _level_tags(generation, iterations))
    return g, ann


def hnm_three_community(iterations=5, module_size=4):
    """Three identical HNM replicas whose roots form a triangle; label = replica id."""
    if iterations < 2:
        raise ValueError("three-community HNM needs iterations >= 2")
    if 3 * module_size ** iterations > MAX_NODES:
        raise GraphError("three-community HNM too large")
    size, edges, generation = _hnm_edges(module_size, iterations)
    parts = [edges + r * size for r in range(3)]
    roots = np.array([0, size, 2 * size])
    parts.append(np.array([[roots[0], roots[1]], [roots[0], roots[2]], [roots[1], roots[2]]]))
    n = 3 * size
    labels = np.repeat(np.arange(3), size)
    g = Graph.from_edges(n, np.concatenate(parts), labels=labels, num_classes=3)
    gen = np.tile(generation, 3)
    ann = HnmAnnotation(gen, labels.copy(), _level_tags(gen, iterations))
    return g, ann


def ba_generate(n, m, seed=0):
    """Barabasi-Albert graph grown from a complete seed graph on m+1 nodes.

    Every new node attaches to m distinct existing nodes drawn with probability
    proportional to their current degree.
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    if n <= m:
        raise GraphError("BA graph needs n > m")
    if n > MAX_NODES:
        raise GraphError(f"BA graph with {n} nodes exceeds {MAX_NODES}")
    rng = np.random.default_rng(seed)
    seed_edges = [(i, j) for i in range(m + 1) for j in range(i + 1, m + 1)]
    edges = list(seed_edges)
    # each node appears once per incident edge end
    ends = [x for e in seed_edges for x in e]
    if m == 1 and not ends:
        ends = [0]
    for new in range(m + 1, n):
        targets = []
        while len(targets) < m:
            t = ends[rng.integers(len(ends))]
            if t not in targets:
                targets.append(t)
        for t in targets:
            edges.append((t, new))
            ends.extend((t, new))
    return Graph.from_edges(n, edges)
