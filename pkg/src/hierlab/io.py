"""Reading and writing graphs, embeddings and curvature tables as text files.

Dataset directories hold ``edges.csv`` (``src,dst``), optional ``labels.csv``
(``node,label``), optional ``features.csv`` (``node,f0,...``) and, for
generated hierarchical graphs, ``annotations.csv`` (``node,generation,level``).
Headers are optional everywhere. Raw citation datasets in the
``<name>.content`` / ``<name>.cites`` layout are read by :func:`load_planetoid_raw`.
"""

from __future__ import annotations

import csv
import logging
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from hierlab.curvature import EdgeCurvatureTable
from hierlab.graph import Graph, GraphError
from hierlab.hyperbolic import PoincareEmbedding

log = logging.getLogger(__name__)

DATA_ENV = "HIERLAB_DATA"


class FormatError(GraphError):
    pass


def _rows(path):
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if row and any(cell.strip() for cell in row):
                yield [cell.strip() for cell in row]


def _numeric_rows(path, min_cols):
    """Rows of a CSV file as float lists, skipping a non-numeric first row."""
    out = []
    for i, row in enumerate(_rows(path)):
        try:
            vals = [float(x) for x in row]
        except ValueError:
            if i == 0:
                continue
            raise FormatError(f"{path}: non-numeric row {i + 1}: {row}") from None
        if len(vals) < min_cols:
            raise FormatError(f"{path}: row {i + 1} has {len(vals)} columns, need {min_cols}")
        out.append(vals)
    return out


def _as_index(x, path):
    if x != int(x) or x < 0:
        raise FormatError(f"{path}: node ids must be non-negative integers, got {x}")
    return int(x)


def read_edges(path):
    rows = _numeric_rows(path, 2)
    return np.array([[_as_index(r[0], path), _as_index(r[1], path)] for r in rows],
                    dtype=np.int64).reshape(-1, 2)


def read_labels(path, n):
    labels = np.full(n, -1, dtype=np.int64)
    for r in _numeric_rows(path, 2):
        v = _as_index(r[0], path)
        if v >= n:
            raise FormatError(f"{path}: node {v} outside [0, {n})")
        labels[v] = _as_index(r[1], path)
    return labels


def read_features(path, n):
    rows = _numeric_rows(path, 2)
    d = len(rows[0]) - 1 if rows else 0
    X = np.zeros((n, d))
    for r in rows:
        v = _as_index(r[0], path)
        if v >= n or len(r) - 1 != d:
            raise FormatError(f"{path}: bad feature row for node {v}")
        X[v] = r[1:]
    return X


@dataclass
class Dataset:
    graph: Graph
    annotations: dict | None = None
    name: str = ""
    dropped_citations: int = 0
    label_names: list | None = None


def load_csv_dataset(directory, n=None) -> Dataset:
    """Load the CSV dataset layout; ``n`` defaults to one past the largest id seen."""
    d = Path(directory)
    edges_path = d / "edges.csv"
    if not edges_path.exists():
        raise FormatError(f"{d}: no edges.csv")
    edges = read_edges(edges_path)
    ids = [edges.max() + 1 if edges.size else 0]
    for extra in ("labels.csv", "features.csv"):
        if (d / extra).exists():
            rows = _numeric_rows(d / extra, 1)
            if rows:
                ids.append(int(max(r[0] for r in rows)) + 1)
    if n is None:
        n = int(max(ids))
    labels = read_labels(d / "labels.csv", n) if (d / "labels.csv").exists() else None
    features = read_features(d / "features.csv", n) if (d / "features.csv").exists() else None
    ann = read_annotations(d / "annotations.csv", n) if (d / "annotations.csv").exists() else None
    g = Graph.from_edges(n, edges, features=features, labels=labels)
    return Dataset(g, ann, d.name)


def read_annotations(path, n):
    gen = np.zeros(n, dtype=np.int64)
    level = np.full(n, "", dtype=object)
    for i, row in enumerate(_rows(path)):
        if i == 0 and not row[0].isdigit():
            continue
        v = int(row[0])
        if v >= n:
            raise FormatError(f"{path}: node {v} outside [0, {n})")
        gen[v] = int(row[1])
        level[v] = row[2]
    return {"generation": gen, "level": level.astype(str)}


def load_planetoid_raw(directory, name=None) -> Dataset:
    """Read ``<name>.content`` (id, features, label) and ``<name>.cites`` (cited, citing).

    String ids and labels are mapped to dense integers in first-seen order.
    Citations naming an id absent from the content file are dropped and
    counted in a warning.
    """
    d = Path(directory)
    if name is None:
        found = sorted(d.glob("*.content"))
        if len(found) != 1:
            raise FormatError(f"{d}: expected exactly one .content file, found {len(found)}")
        name = found[0].stem
    ids, labels, feats = {}, {}, []
    y = []
    with open(d / f"{name}.content") as fh:
        for lineno, line in enumerate(fh, 1):
            parts = line.rstrip("\n").split("\t")
            if len(parts) < 3:
                if line.strip():
                    raise FormatError(f"{name}.content line {lineno}: too few fields")
                continue
            if parts[0] in ids:
                raise FormatError(f"{name}.content line {lineno}: duplicate id {parts[0]}")
            ids[parts[0]] = len(ids)
            feats.append(np.array(parts[1:-1], dtype=float))
            y.append(labels.setdefault(parts[-1], len(labels)))
    edges, dropped = [], 0
    with open(d / f"{name}.cites") as fh:
        for line in fh:
            parts = line.split()
            if len(parts) != 2:
                continue
            a, b = ids.get(parts[0]), ids.get(parts[1])
            if a is None or b is None:
                dropped += 1
                continue
            if a != b:
                edges.append((a, b))
    if dropped:
        log.warning("%s: dropped %d citations referencing unknown ids", name, dropped)
    X = sp.csr_matrix(np.vstack(feats))
    g = Graph.from_edges(len(ids), np.array(edges, dtype=np.int64).reshape(-1, 2),
                         features=X, labels=np.array(y), num_classes=len(labels))
    return Dataset(g, None, name, dropped, list(labels))


def resolve_dataset_path(spec):
    """Resolve a dataset argument: an existing path, else a name under ``$HIERLAB_DATA``."""
    p = Path(spec)
    if p.exists():
        return p
    root = os.environ.get(DATA_ENV)
    if root and (Path(root) / spec).exists():
        return Path(root) / spec
    raise FileNotFoundError(f"dataset {spec!r} not found (set {DATA_ENV} to a data directory)")


def load_dataset(spec) -> Dataset:
    """Load a CSV dataset directory or a raw citation directory."""
    d = resolve_dataset_path(spec)
    if (d / "edges.csv").exists():
        return load_csv_dataset(d)
    if any(d.glob("*.content")):
        return load_planetoid_raw(d)
    raise FormatError(f"{d}: neither edges.csv nor a .content/.cites pair")


def atomic_write_text(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_csv(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def write_csv_dataset(directory, g: Graph, annotations=None):
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    _write_csv(d / "edges.csv", ["src", "dst"], g.edges.tolist())
    if g.labels is not None and np.any(g.labels >= 0):
        _write_csv(d / "labels.csv", ["node", "label"],
                   [(v, int(y)) for v, y in enumerate(g.labels) if y >= 0])
    if g.features is not None:
        X = g.features.toarray() if sp.issparse(g.features) else np.asarray(g.features)
        _write_csv(d / "features.csv", ["node"] + [f"f{i}" for i in range(X.shape[1])],
                   [[v] + [repr(float(x)) for x in row] for v, row in enumerate(X)])
    if annotations is not None:
        _write_csv(d / "annotations.csv", ["node", "generation", "level"],
                   [(v, int(a), str(b)) for v, (a, b) in
                    enumerate(zip(annotations.generation, annotations.level))])


def write_embedding(path, emb: PoincareEmbedding):
    header = ["node"] + [f"x{i}" for i in range(emb.dim)] + ["norm"]
    _write_csv(path, header, [[v] + [repr(float(x)) for x in p] + [repr(float(nv))]
                              for v, (p, nv) in enumerate(zip(emb.points, emb.norms))])


def read_embedding(path, c=1.0) -> PoincareEmbedding:
    rows = _numeric_rows(path, 3)
    if not rows:
        raise FormatError(f"{path}: empty embedding")
    n = len(rows)
    pts = np.zeros((n, len(rows[0]) - 2))
    for r in rows:
        pts[_as_index(r[0], path)] = r[1:-1]
    return PoincareEmbedding(pts, c)


def write_curvature(path, table: EdgeCurvatureTable):
    _write_csv(path, ["u", "v", "kappa"],
               [(int(u), int(v), repr(float(k))) for (u, v), k in zip(table.edges, table.kappa)])


def read_curvature(path) -> EdgeCurvatureTable:
    rows = _numeric_rows(path, 3)
    e = np.array([[_as_index(r[0], path), _as_index(r[1], path)] for r in rows],
                 dtype=np.int64).reshape(-1, 2)
    k = np.array([r[2] for r in rows], dtype=float)
    e = np.sort(e, axis=1)
    order = np.lexsort((e[:, 1], e[:, 0]))
    return EdgeCurvatureTable(e[order], k[order])


__all__ = [
    "Dataset", "FormatError", "load_csv_dataset", "load_planetoid_raw", "load_dataset",
    "write_csv_dataset", "write_embedding", "read_embedding", "write_curvature",
    "read_curvature", "atomic_write_text", "resolve_dataset_path", "DATA_ENV",
]
