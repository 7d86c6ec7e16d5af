import logging

import numpy as np
import pytest

from hierlab.curvature import curvature_table
from hierlab.generators import hnm_three_community
from hierlab.graph import Graph
from hierlab.hyperbolic import PoincareEmbedding
from hierlab.io import (DATA_ENV, FormatError, load_csv_dataset, load_dataset, load_planetoid_raw,
                        read_curvature, read_embedding, resolve_dataset_path, write_csv_dataset,
                        write_curvature, write_embedding)


def test_csv_round_trip(tmp_path):
    g, ann = hnm_three_community(3)
    g = g.with_features(np.random.default_rng(0).normal(size=(g.n, 3)))
    write_csv_dataset(tmp_path, g, ann)
    ds = load_csv_dataset(tmp_path)
    assert np.array_equal(ds.graph.edges, g.edges)
    assert np.array_equal(ds.graph.labels, g.labels)
    assert np.array_equal(ds.graph.features, g.features)
    assert np.array_equal(ds.annotations["level"], ann.level)
    assert np.array_equal(ds.annotations["generation"], ann.generation)


def test_headerless_and_symmetry(tmp_path):
    (tmp_path / "edges.csv").write_text("0,1\n2,1\n1,0\n")
    g = load_csv_dataset(tmp_path).graph
    assert g.edges.tolist() == [[0, 1], [1, 2]]
    for u in range(g.n):
        for v in g.neighbors(u):
            assert g.has_edge(v, u)


def test_partial_labels(tmp_path):
    (tmp_path / "edges.csv").write_text("src,dst\n0,1\n1,2\n")
    (tmp_path / "labels.csv").write_text("node,label\n0,1\n2,0\n")
    g = load_csv_dataset(tmp_path).graph
    assert g.labels.tolist() == [1, -1, 0]


def test_bad_rows(tmp_path):
    (tmp_path / "edges.csv").write_text("0,1\nx,2\n")
    with pytest.raises(FormatError):
        load_csv_dataset(tmp_path)
    (tmp_path / "edges.csv").write_text("0,1.5\n")
    with pytest.raises(FormatError):
        load_csv_dataset(tmp_path)


def test_planetoid_raw(tmp_path, caplog):
    (tmp_path / "toy.content").write_text(
        "p31\t1\t0\t0\tTheory\n"
        "a7\t0\t1\t0\tNeural\n"
        "zz\t0\t0\t1\tTheory\n")
    (tmp_path / "toy.cites").write_text("p31\ta7\na7\tzz\nmissing\tzz\nzz\tzz\n")
    with caplog.at_level(logging.WARNING):
        ds = load_planetoid_raw(tmp_path)
    g = ds.graph
    assert g.n == 3 and g.labels.tolist() == [0, 1, 0]
    assert ds.label_names == ["Theory", "Neural"]
    assert g.edges.tolist() == [[0, 1], [1, 2]]
    assert ds.dropped_citations == 1
    assert "dropped 1" in caplog.text
    assert g.features.toarray().tolist() == [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
    assert load_dataset(tmp_path).graph.n == 3


def test_resolve_env(tmp_path, monkeypatch):
    (tmp_path / "cora").mkdir()
    monkeypatch.setenv(DATA_ENV, str(tmp_path))
    assert resolve_dataset_path("cora") == tmp_path / "cora"
    with pytest.raises(FileNotFoundError):
        resolve_dataset_path("nope")


def test_embedding_round_trip(tmp_path):
    pts = np.random.default_rng(1).uniform(-0.5, 0.5, (7, 3))
    e = PoincareEmbedding(pts)
    write_embedding(tmp_path / "e.csv", e)
    header = (tmp_path / "e.csv").read_text().splitlines()[0]
    assert header == "node,x0,x1,x2,norm"
    back = read_embedding(tmp_path / "e.csv")
    assert np.array_equal(back.points, pts)
    assert np.allclose(back.norms, e.norms)


def test_curvature_round_trip(tmp_path):
    g = Graph.from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4), (0, 4), (1, 3)])
    t = curvature_table(g)
    write_curvature(tmp_path / "c.csv", t)
    back = read_curvature(tmp_path / "c.csv")
    assert np.array_equal(back.edges, t.edges) and np.array_equal(back.kappa, t.kappa)
