"""Seeded end-to-end runs: split, embed, curvature, train, score, report."""

from __future__ import annotations

import csv
import io as _io
import json
import logging
import time
import traceback
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from hierlab import generators
from hierlab.curvature import curvature_table, ground_from_name
from hierlab.graph import Graph
from hierlab.hyperbolic import embed_train
from hierlab.io import atomic_write_text, load_dataset
from hierlab.metrics import micro_f1, weighted_f1
from hierlab.model import ABLATIONS, TrainConfig, train
from hierlab.splits import BANDS, make_balanced_split, make_hierarchy_split

log = logging.getLogger(__name__)

SYNTHETIC = ("hnm", "hnm3", "ba")


@dataclass
class ExperimentConfig:
    """Declarative description of a multi-seed run.

    ``dataset`` is a directory (CSV or raw citation layout) or ``synthetic:hnm3``
    style name; ``iterations`` sizes synthetic HNM graphs. Split counts accept
    integers or fractions of the labelled nodes; ``test=None`` sends all
    remaining nodes to the test set. ``band=None`` means a plain balanced split.
    """

    dataset: str
    seeds: list = field(default_factory=lambda: [0, 1, 2, 3, 4])
    per_class: float = 20
    val: float = 500
    test: float | None = 1000
    band: str | None = None
    ablate: str = "none"
    iterations: int = 5
    features: str = "auto"
    embed_dim: int = 2
    embed_epochs: int = 100
    embed_lr: float = 0.3
    embed_neg: int = 10
    curvature_alpha: float = 0.5
    curvature_p: float = 2.0
    kappa_literal: bool = False
    ground: str = "hop"
    hidden: int = 64
    dropout: float = 0.5
    lr: float = 0.01
    weight_decay: float = 5e-4
    epochs: int = 500
    patience: int = 100
    alpha_margin: float = 1.0
    margin_sign: str = "ldam"
    optimizer: str = "adam"
    out_dir: str | None = None

    def validate(self):
        if not self.seeds:
            raise ValueError("seeds must be non-empty")
        if self.per_class is None or float(self.per_class) <= 0:
            raise ValueError("per_class must be positive")
        if self.band is not None and self.band not in BANDS:
            raise ValueError(f"band must be one of {BANDS} or null")
        if self.ablate not in ABLATIONS:
            raise ValueError(f"ablate must be one of {ABLATIONS}")
        if self.features not in ("auto", "identity", "given"):
            raise ValueError("features must be 'auto', 'identity' or 'given'")
        self.train_config().validate()

    def train_config(self) -> TrainConfig:
        return TrainConfig(hidden=self.hidden, dropout=self.dropout, lr=self.lr,
                           weight_decay=self.weight_decay, epochs=self.epochs,
                           patience=self.patience, alpha_margin=self.alpha_margin,
                           margin_sign=self.margin_sign, ablate=self.ablate,
                           optimizer=self.optimizer)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        cfg = cls(**d)
        cfg.validate()
        return cfg

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        return cls.from_dict(json.loads(text))


@dataclass
class SeedResult:
    seed: int
    ok: bool
    weighted_f1: float | None = None
    micro_f1: float | None = None
    val_weighted_f1: float | None = None
    epochs_run: int = 0
    best_epoch: int = 0
    top_up_fraction: float = 0.0
    losses: list = field(default_factory=list)
    seconds: float = 0.0
    error: str | None = None


@dataclass
class RunReport:
    config: dict
    seeds: list
    aggregate: dict
    wall_clock: float = 0.0

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RunReport":
        d = json.loads(text)
        return cls(d["config"], [SeedResult(**s) for s in d["seeds"]], d["aggregate"],
                   d["wall_clock"])

    @property
    def all_ok(self) -> bool:
        return all(s.ok for s in self.seeds)

    def metrics_csv(self) -> str:
        buf = _io.StringIO()
        w = csv.writer(buf)
        w.writerow(["seed", "ok", "weighted_f1", "micro_f1", "val_weighted_f1",
                    "epochs_run", "top_up_fraction", "error"])
        for s in self.seeds:
            w.writerow([s.seed, s.ok, s.weighted_f1, s.micro_f1, s.val_weighted_f1,
                        s.epochs_run, s.top_up_fraction, s.error or ""])
        return buf.getvalue()


def aggregate(results) -> dict:
    ok = [r for r in results if r.ok]
    out = {"n_ok": len(ok), "n_failed": len(results) - len(ok)}
    for key in ("weighted_f1", "micro_f1"):
        vals = np.array([getattr(r, key) for r in ok], dtype=float)
        out[f"{key}_mean"] = float(vals.mean()) if vals.size else None
        out[f"{key}_std"] = float(vals.std()) if vals.size else None
    return out


def load_graph(cfg: ExperimentConfig):
    """The graph and optional per-node level tags named by the config."""
    if cfg.dataset.startswith("synthetic:"):
        kind = cfg.dataset.split(":", 1)[1]
        if kind == "hnm3":
            g, ann = generators.hnm_three_community(cfg.iterations)
        elif kind == "hnm":
            g, ann = generators.hnm_generate(4, cfg.iterations)
            g = g.with_labels(ann.community, 1)
        else:
            raise ValueError(f"synthetic dataset must be hnm or hnm3, got {kind!r}")
        return g, ann.level
    ds = load_dataset(cfg.dataset)
    level = ds.annotations["level"] if ds.annotations else None
    return ds.graph, level


def prepare_features(g: Graph, mode="auto") -> Graph:
    """Row-normalised given features, or a sparse identity for featureless graphs."""
    if mode == "identity" or (mode == "auto" and g.features is None):
        return g.with_features(sp.identity(g.n, format="csr"))
    if g.features is None:
        raise ValueError("features='given' but the dataset has none")
    X = g.features
    if sp.issparse(X):
        X = sp.csr_matrix(X, dtype=float)
        rs = np.asarray(X.sum(axis=1)).ravel()
        rs[rs == 0] = 1.0
        X = sp.diags(1.0 / rs) @ X
    else:
        X = np.asarray(X, dtype=float)
        rs = X.sum(axis=1, keepdims=True)
        rs[rs == 0] = 1.0
        X = X / rs
    return g.with_features(X)


def make_split(cfg: ExperimentConfig, g: Graph, seed, norms=None, level=None):
    if cfg.band is None:
        return make_balanced_split(g, cfg.per_class, seed, cfg.val, cfg.test), 0.0
    per_class = cfg.per_class
    if isinstance(per_class, float) and 0 < per_class < 1:
        per_class = int(round(per_class * np.count_nonzero(g.labels >= 0) / g.num_classes))
    mask, info = make_hierarchy_split(g, cfg.band, per_class, seed, norms=norms, level=level,
                                      val=cfg.val, test=cfg.test)
    return mask, info.top_up_fraction


def run_seed(cfg: ExperimentConfig, g: Graph, seed: int, level=None) -> SeedResult:
    t0 = time.perf_counter()
    tcfg = cfg.train_config()
    need_emb = tcfg.use_ham or (cfg.band or "").startswith("q") or cfg.ground == "hyperbolic"
    emb = None
    if need_emb:
        emb = embed_train(g, dim=cfg.embed_dim, epochs=cfg.embed_epochs, lr=cfg.embed_lr,
                          neg_samples=cfg.embed_neg, seed=seed)
    mask, topped = make_split(cfg, g, seed, None if emb is None else emb.norms, level)
    table = None
    if tcfg.use_hmpnn:
        ground = ground_from_name(cfg.ground, g, emb)
        table = curvature_table(g, cfg.curvature_alpha, cfg.curvature_p, mask,
                                cfg.kappa_literal, ground)
    res = train(g, None if emb is None else emb.norms, table, mask, tcfg, seed=seed)
    pred = res.predictions
    return SeedResult(
        seed=int(seed), ok=True,
        weighted_f1=weighted_f1(pred, g.labels, mask.test),
        micro_f1=micro_f1(pred, g.labels, mask.test),
        val_weighted_f1=weighted_f1(pred, g.labels, mask.val) if mask.val.size else None,
        epochs_run=res.epochs_run, best_epoch=res.best_epoch,
        top_up_fraction=float(topped), losses=[float(x) for x in res.losses],
        seconds=time.perf_counter() - t0)


def run_experiment(cfg: ExperimentConfig, graph: Graph | None = None, level=None) -> RunReport:
    """Run every seed; a failing seed is recorded and the others still run.

    When ``cfg.out_dir`` is set the report is written there as ``report.json``
    and ``metrics.csv`` (each file replaced atomically).
    """
    cfg.validate()
    t0 = time.perf_counter()
    if graph is None:
        graph, level = load_graph(cfg)
    g = prepare_features(graph, cfg.features)
    results = []
    for seed in cfg.seeds:
        try:
            results.append(run_seed(cfg, g, seed, level))
        except Exception as exc:
            log.error("seed %s failed: %s", seed, exc)
            log.debug("%s", traceback.format_exc())
            results.append(SeedResult(seed=int(seed), ok=False, error=f"{type(exc).__name__}: {exc}"))
    report = RunReport(asdict(cfg), results, aggregate(results), time.perf_counter() - t0)
    if cfg.out_dir:
        write_report(report, cfg.out_dir)
    return report


def write_report(report: RunReport, out_dir):
    out = Path(out_dir)
    atomic_write_text(out / "report.json", report.to_json())
    atomic_write_text(out / "metrics.csv", report.metrics_csv())


__all__ = ["ExperimentConfig", "RunReport", "SeedResult", "run_experiment", "run_seed",
           "aggregate", "prepare_features", "load_graph", "write_report"]
