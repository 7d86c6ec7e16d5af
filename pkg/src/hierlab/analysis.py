"""Topological summaries of a graph: clustering spectrum, degree correlations, power-law fits."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import stats

from hierlab.graph import (Graph, betweenness, clustering_by_degree, edge_homophily,
                           neighbor_correlation)


def loglog_slope(table: dict) -> float:
    """Least-squares slope of log(value) against log(key), over strictly positive entries."""
    pts = [(k, v) for k, v in table.items() if k > 0 and v > 0]
    if len(pts) < 2:
        raise ValueError("need at least two positive points for a log-log fit")
    x = np.log([p[0] for p in pts])
    y = np.log([p[1] for p in pts])
    return float(np.polyfit(x, y, 1)[0])


@dataclass
class PowerLawFit:
    alpha: float
    xmin: int
    ks: float
    n_tail: int


def _discrete_alpha(tail, xmin):
    # continuous approximation to the discrete MLE, accurate for xmin >= ~6
    return 1.0 + len(tail) / np.sum(np.log(tail / (xmin - 0.5)))


def powerlaw_fit(samples, xmin=None, min_tail=50) -> PowerLawFit:
    """Power-law tail exponent by maximum likelihood with KS-selected ``xmin``.

    When ``xmin`` is None every candidate value leaving at least ``min_tail``
    samples is tried and the one minimising the Kolmogorov-Smirnov distance
    between the empirical tail and the fitted model is kept.
    """
    x = np.sort(np.asarray(samples, dtype=float))
    x = x[x >= 1]
    if x.size < 2:
        raise ValueError("too few positive samples for a power-law fit")
    cands = [xmin] if xmin is not None else [v for v in np.unique(x) if np.sum(x >= v) >= min_tail]
    if not cands:
        cands = [x.min()]
    best = None
    for xm in cands:
        tail = x[x >= xm]
        a = _discrete_alpha(tail, xm)
        emp = np.arange(1, tail.size + 1) / tail.size
        model = 1.0 - ((tail + 0.5) / (xm - 0.5)) ** (1.0 - a)
        # compare CDFs at the unique tail values
        last = np.searchsorted(tail, np.unique(tail), side="right") - 1
        ks = float(np.max(np.abs(emp[last] - model[last])))
        if best is None or ks < best.ks:
            best = PowerLawFit(float(a), int(xm), ks, int(tail.size))
    return best


def spearman(a, b) -> float:
    return float(stats.spearmanr(a, b).statistic)


def degree_histogram(g: Graph) -> dict[int, int]:
    k, c = np.unique(g.degrees, return_counts=True)
    return {int(a): int(b) for a, b in zip(k, c)}


def _write(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def analyze(g: Graph, out_dir) -> dict:
    """Write analysis CSVs for ``g`` into ``out_dir`` and return a summary dict.

    Files: ``clustering_by_degree.csv``, ``knn.csv``, ``bnn.csv``,
    ``degree_histogram.csv`` and ``summary.csv`` (which also holds edge
    homophily when every node is labelled).
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ck = clustering_by_degree(g)
    knn = neighbor_correlation(g, "connectivity")
    b = betweenness(g)
    bnn = neighbor_correlation(g, "betweenness", values=b)
    hist = degree_histogram(g)
    _write(out / "clustering_by_degree.csv", ["k", "C"], sorted(ck.items()))
    _write(out / "knn.csv", ["k", "knn"], sorted(knn.items()))
    _write(out / "bnn.csv", ["b", "bnn"], sorted(bnn.items()))
    _write(out / "degree_histogram.csv", ["k", "count"], sorted(hist.items()))

    summary = {"nodes": g.n, "edges": g.num_edges}
    try:
        summary["clustering_slope"] = loglog_slope(ck)
    except ValueError:
        summary["clustering_slope"] = float("nan")
    ks = np.array(sorted(knn))
    summary["knn_spearman"] = spearman(ks, [knn[k] for k in ks]) if len(ks) > 1 else float("nan")
    if g.labels is not None and np.all(g.labels >= 0):
        summary["edge_homophily"] = edge_homophily(g)
    _write(out / "summary.csv", ["statistic", "value"], sorted(summary.items()))
    return summary


__all__ = ["analyze", "loglog_slope", "powerlaw_fit", "PowerLawFit", "degree_histogram", "spearman"]
