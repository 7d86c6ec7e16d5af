"""Two-layer GCN with curvature-weighted aggregation and a hierarchy-aware margin.

Everything is plain numpy with hand-written reverse-mode gradients. The
aggregation weights ``tau`` come from a small perceptron applied to each edge's
curvature followed by a softmax over the node's neighbourhood (self included).
The margin perceptron maps each training node's Poincare norm to a per-class
vector that is scaled by the class frequency and folded into the logits before
the cross-entropy.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from hierlab.graph import Graph, GraphError, SplitMask
from hierlab.metrics import micro_f1, weighted_f1

log = logging.getLogger(__name__)

ABLATIONS = ("none", "ham", "hmpnn", "both")
MARGIN_SIGNS = ("ldam", "literal")
MLP_HIDDEN = 16

PARAM_NAMES = ("W1", "b1", "W2", "b2",
               "ham_W1", "ham_b1", "ham_W2", "ham_b2",
               "curv_W1", "curv_b1", "curv_W2", "curv_b2")


@dataclass
class ModelParams:
    W1: np.ndarray
    b1: np.ndarray
    W2: np.ndarray
    b2: np.ndarray
    ham_W1: np.ndarray
    ham_b1: np.ndarray
    ham_W2: np.ndarray
    ham_b2: np.ndarray
    curv_W1: np.ndarray
    curv_b1: np.ndarray
    curv_W2: np.ndarray
    curv_b2: np.ndarray

    def items(self):
        return [(k, getattr(self, k)) for k in PARAM_NAMES]

    def copy(self):
        return ModelParams(**{k: v.copy() for k, v in self.items()})

    def zeros_like(self):
        return ModelParams(**{k: np.zeros_like(v) for k, v in self.items()})

    def check(self, d, h, C):
        shapes = {"W1": (d, h), "b1": (h,), "W2": (h, C), "b2": (C,),
                  "ham_W1": (MLP_HIDDEN,), "ham_b1": (MLP_HIDDEN,),
                  "ham_W2": (MLP_HIDDEN, C), "ham_b2": (C,),
                  "curv_W1": (MLP_HIDDEN,), "curv_b1": (MLP_HIDDEN,),
                  "curv_W2": (MLP_HIDDEN,), "curv_b2": (1,)}
        for k, v in self.items():
            if v.shape != shapes[k]:
                raise ValueError(f"parameter {k} has shape {v.shape}, expected {shapes[k]}")
            if not np.all(np.isfinite(v)):
                raise ValueError(f"parameter {k} has non-finite entries")


def _glorot(rng, fan_in, fan_out, shape):
    lim = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-lim, lim, size=shape)


def init_params(d, h, C, seed=0) -> ModelParams:
    """Glorot GCN weights; perceptron output layers start at zero.

    Zero output layers make the initial model exactly a mean-aggregation GCN
    with a constant margin, while the random first layers still let both
    perceptrons receive gradient.
    """
    rng = np.random.default_rng(seed)
    return ModelParams(
        W1=_glorot(rng, d, h, (d, h)), b1=np.zeros(h),
        W2=_glorot(rng, h, C, (h, C)), b2=np.zeros(C),
        ham_W1=_glorot(rng, 1, MLP_HIDDEN, (MLP_HIDDEN,)), ham_b1=rng.uniform(-0.1, 0.1, MLP_HIDDEN),
        ham_W2=np.zeros((MLP_HIDDEN, C)), ham_b2=np.zeros(C),
        curv_W1=_glorot(rng, 1, MLP_HIDDEN, (MLP_HIDDEN,)), curv_b1=rng.uniform(-0.1, 0.1, MLP_HIDDEN),
        curv_W2=np.zeros(MLP_HIDDEN), curv_b2=np.zeros(1),
    )


class Propagation:
    """Aggregation support N(i) + {i} in CSR order, with curvature per slot.

    Self slots carry curvature 0.
    """

    def __init__(self, g: Graph, kappa_directed=None):
        n = g.n
        deg = g.degrees
        rows = np.repeat(np.arange(n), deg + 1)
        indptr = np.concatenate([[0], np.cumsum(deg + 1)])
        cols = np.empty(len(rows), dtype=np.int64)
        kap = np.zeros(len(rows))
        if kappa_directed is None:
            kappa_directed = np.zeros(len(g.indices))
        # self slot first, then the sorted neighbours
        self_pos = indptr[:-1]
        cols[self_pos] = np.arange(n)
        nb_mask = np.ones(len(rows), dtype=bool)
        nb_mask[self_pos] = False
        cols[nb_mask] = g.indices
        kap[nb_mask] = kappa_directed
        self.n = n
        self.rows = rows
        self.cols = cols
        self.indptr = indptr
        self.kappa = kap
        self.starts = indptr[:-1]
        self.sizes = deg + 1

    def matrix(self, tau):
        return sp.csr_matrix((tau, self.cols, self.indptr), shape=(self.n, self.n))

    def uniform(self):
        return 1.0 / self.sizes[self.rows].astype(float)


def _segment_softmax(scores, prop: Propagation):
    mx = np.maximum.reduceat(scores, prop.starts)
    e = np.exp(scores - mx[prop.rows])
    z = np.add.reduceat(e, prop.starts)
    return e / z[prop.rows]


@dataclass
class TauTrace:
    tau: np.ndarray
    pre: np.ndarray = None
    hid: np.ndarray = None
    uniform: bool = False


def hmpnn_weights(prop: Propagation, params: ModelParams, uniform=False) -> TauTrace:
    """Aggregation weights: softmax over each neighbourhood of curv_net(kappa)."""
    if uniform:
        return TauTrace(prop.uniform(), uniform=True)
    k = prop.kappa
    pre = k[:, None] * params.curv_W1[None, :] + params.curv_b1[None, :]
    hid = np.maximum(pre, 0.0)
    s = hid @ params.curv_W2 + params.curv_b2[0]
    return TauTrace(_segment_softmax(s, prop), pre, hid)


@dataclass
class ForwardTrace:
    tau: TauTrace
    T: sp.csr_matrix
    Xd: object
    XW: np.ndarray
    Z1: np.ndarray
    H1d: np.ndarray
    HW: np.ndarray
    logits: np.ndarray
    drop_h: np.ndarray = None
    margin: "MarginTrace" = None


def _as_matrix(X):
    return X if sp.issparse(X) else np.asarray(X, dtype=float)


def forward(prop: Propagation, X, params: ModelParams, tau: TauTrace,
            dropout=0.0, rng=None) -> ForwardTrace:
    """h1 = ReLU(T (X W1) + b1); logits = T (h1 W2) + b2 with T[i, j] = tau_ij."""
    X = _as_matrix(X)
    if X.shape[1] != params.W1.shape[0]:
        raise ValueError(f"feature width {X.shape[1]} does not match W1 rows {params.W1.shape[0]}")
    T = prop.matrix(tau.tau)
    drop_h = None
    Xd = X
    if dropout > 0.0 and rng is not None:
        keep = 1.0 - dropout
        if sp.issparse(X):
            Xc = X.tocsr(copy=True)
            Xc.data = Xc.data * (rng.random(Xc.nnz) < keep) / keep
            Xd = Xc
        else:
            Xd = X * (rng.random(X.shape) < keep) / keep
    XW = np.asarray(Xd @ params.W1)
    Z1 = T @ XW + params.b1
    H1 = np.maximum(Z1, 0.0)
    H1d = H1
    if dropout > 0.0 and rng is not None:
        drop_h = (rng.random(H1.shape) < 1.0 - dropout) / (1.0 - dropout)
        H1d = H1 * drop_h
    HW = H1d @ params.W2
    logits = T @ HW + params.b2
    return ForwardTrace(tau, T, Xd, XW, Z1, H1d, HW, logits, drop_h)


@dataclass
class MarginTrace:
    nodes: np.ndarray
    norms: np.ndarray
    pre: np.ndarray
    hid: np.ndarray
    soft: np.ndarray
    freq: np.ndarray
    margin: np.ndarray


def class_frequency(labels, train, C):
    y = labels[train]
    return np.bincount(y, minlength=C) / float(len(y))


def ham_margin(norms, labels, train, params: ModelParams, C) -> MarginTrace:
    """Per training node: class frequency times softmax(ham_net(norm)), a C-vector."""
    train = np.asarray(train, dtype=np.int64)
    if norms is None or len(norms) <= (train.max() if train.size else -1):
        raise ValueError("missing Poincare norm for a labelled node")
    nv = np.asarray(norms, dtype=float)[train]
    if not np.all(np.isfinite(nv)):
        raise ValueError("missing Poincare norm for a labelled node")
    pre = nv[:, None] * params.ham_W1[None, :] + params.ham_b1[None, :]
    hid = np.maximum(pre, 0.0)
    a = hid @ params.ham_W2 + params.ham_b2
    a = a - a.max(axis=1, keepdims=True)
    soft = np.exp(a)
    soft /= soft.sum(axis=1, keepdims=True)
    freq = class_frequency(labels, train, C)
    return MarginTrace(train, nv, pre, hid, soft, freq, soft * freq[None, :])


def adjusted_logits(logits_train, y, margin: MarginTrace | None, alpha, sign="ldam"):
    z = logits_train.copy()
    if margin is None or alpha == 0.0:
        return z
    if sign == "ldam":
        idx = np.arange(len(y))
        z[idx, y] -= alpha * margin.margin[idx, y]
    elif sign == "literal":
        z += alpha * margin.margin
    else:
        raise ValueError(f"unknown margin sign {sign!r}")
    return z


def _log_softmax(z):
    z = z - z.max(axis=1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=1, keepdims=True))


def loss(trace: ForwardTrace, labels, train, alpha=0.0, sign="ldam") -> float:
    """Mean cross-entropy over training nodes of the margin-adjusted logits."""
    train = np.asarray(train, dtype=np.int64)
    if train.size == 0:
        raise ValueError("empty training set")
    y = labels[train]
    z = adjusted_logits(trace.logits[train], y, trace.margin, alpha, sign)
    return float(-_log_softmax(z)[np.arange(len(y)), y].mean())


def backward(trace: ForwardTrace, prop: Propagation, params: ModelParams, labels, train,
             alpha=0.0, sign="ldam") -> ModelParams:
    """Exact gradient of :func:`loss` with respect to every parameter."""
    train = np.asarray(train, dtype=np.int64)
    y = labels[train]
    N = len(train)
    grads = params.zeros_like()
    margin = trace.margin

    z = adjusted_logits(trace.logits[train], y, margin, alpha, sign)
    p = np.exp(_log_softmax(z))
    dz = p
    dz[np.arange(N), y] -= 1.0
    dz /= N

    dlogits = np.zeros_like(trace.logits)
    dlogits[train] = dz

    if margin is not None and alpha != 0.0:
        if sign == "ldam":
            dm = np.zeros_like(dz)
            dm[np.arange(N), y] = -alpha * dz[np.arange(N), y]
        else:
            dm = alpha * dz
        dsoft = dm * margin.freq[None, :]
        da = margin.soft * (dsoft - np.sum(dsoft * margin.soft, axis=1, keepdims=True))
        grads.ham_W2 = margin.hid.T @ da
        grads.ham_b2 = da.sum(axis=0)
        dpre = (da @ params.ham_W2.T) * (margin.pre > 0)
        grads.ham_W1 = margin.norms @ dpre
        grads.ham_b1 = dpre.sum(axis=0)

    T = trace.T
    TT = T.T.tocsr()
    grads.b2 = dlogits.sum(axis=0)
    dHW = TT @ dlogits
    grads.W2 = trace.H1d.T @ dHW
    dH1 = dHW @ params.W2.T
    if trace.drop_h is not None:
        dH1 = dH1 * trace.drop_h
    dZ1 = dH1 * (trace.Z1 > 0)
    grads.b1 = dZ1.sum(axis=0)
    dXW = TT @ dZ1
    grads.W1 = np.asarray(trace.Xd.T @ dXW)

    tr = trace.tau
    if not tr.uniform:
        rows, cols = prop.rows, prop.cols
        dtau = (np.einsum("ij,ij->i", dlogits[rows], trace.HW[cols])
                + np.einsum("ij,ij->i", dZ1[rows], trace.XW[cols]))
        tau = tr.tau
        avg = np.add.reduceat(tau * dtau, prop.starts)
        ds = tau * (dtau - avg[rows])
        grads.curv_W2 = tr.hid.T @ ds
        grads.curv_b2 = np.array([ds.sum()])
        dpre = ds[:, None] * params.curv_W2[None, :] * (tr.pre > 0)
        grads.curv_W1 = prop.kappa @ dpre
        grads.curv_b1 = dpre.sum(axis=0)
    return grads


@dataclass
class TrainConfig:
    hidden: int = 64
    dropout: float = 0.5
    lr: float = 0.01
    momentum: float = 0.9
    weight_decay: float = 5e-4
    epochs: int = 500
    patience: int = 100
    alpha_margin: float = 1.0
    margin_sign: str = "ldam"
    ablate: str = "none"
    optimizer: str = "adam"

    def validate(self):
        if self.ablate not in ABLATIONS:
            raise ValueError(f"ablate must be one of {ABLATIONS}")
        if self.margin_sign not in MARGIN_SIGNS:
            raise ValueError(f"margin_sign must be one of {MARGIN_SIGNS}")
        if self.optimizer not in ("sgd", "adam"):
            raise ValueError("optimizer must be 'sgd' or 'adam'")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must lie in [0, 1)")

    @property
    def use_ham(self):
        return self.ablate in ("none", "hmpnn") and self.alpha_margin != 0.0

    @property
    def use_hmpnn(self):
        return self.ablate in ("none", "ham")


class HyperImbaModel:
    """Bundles graph-side precomputation with parameters for training and inference."""

    def __init__(self, g: Graph, kappa_directed, norms, params: ModelParams, config: TrainConfig):
        config.validate()
        if g.features is None:
            raise GraphError("graph has no node features")
        self.g = g
        self.X = _as_matrix(g.features)
        self.prop = Propagation(g, kappa_directed)
        self.norms = None if norms is None else np.asarray(norms, dtype=float)
        if self.norms is not None and len(self.norms) != g.n:
            raise GraphError("norm vector length does not match node count")
        self.params = params
        self.config = config
        params.check(self.X.shape[1], config.hidden, g.num_classes)

    def run(self, train, rng=None, dropout=None):
        cfg = self.config
        tau = hmpnn_weights(self.prop, self.params, uniform=not cfg.use_hmpnn)
        trace = forward(self.prop, self.X, self.params, tau,
                        cfg.dropout if dropout is None else dropout, rng)
        if cfg.use_ham:
            trace.margin = ham_margin(self.norms, self.g.labels, train, self.params, self.g.num_classes)
        return trace

    def alpha(self):
        return self.config.alpha_margin if self.config.use_ham else 0.0

    def loss_and_grad(self, train, rng=None, dropout=None):
        trace = self.run(train, rng, dropout)
        L = loss(trace, self.g.labels, train, self.alpha(), self.config.margin_sign)
        G = backward(trace, self.prop, self.params, self.g.labels, train,
                     self.alpha(), self.config.margin_sign)
        return L, G, trace

    def logits(self):
        tau = hmpnn_weights(self.prop, self.params, uniform=not self.config.use_hmpnn)
        return forward(self.prop, self.X, self.params, tau, 0.0, None).logits

    def predict(self):
        return self.logits().argmax(axis=1)


class _Optimizer:
    def __init__(self, cfg: TrainConfig, params: ModelParams):
        self.cfg = cfg
        self.state = {k: np.zeros_like(v) for k, v in params.items()}
        self.state2 = {k: np.zeros_like(v) for k, v in params.items()}
        self.t = 0

    def step(self, params: ModelParams, grads: ModelParams):
        cfg = self.cfg
        self.t += 1
        for k, p in params.items():
            g = getattr(grads, k)
            if k in ("W1", "W2") and cfg.weight_decay:
                g = g + cfg.weight_decay * p
            if cfg.optimizer == "sgd":
                buf = self.state[k]
                buf *= cfg.momentum
                buf += g
                p -= cfg.lr * buf
            else:
                m, v = self.state[k], self.state2[k]
                m *= 0.9
                m += 0.1 * g
                v *= 0.999
                v += 0.001 * g * g
                mh = m / (1 - 0.9 ** self.t)
                vh = v / (1 - 0.999 ** self.t)
                p -= cfg.lr * mh / (np.sqrt(vh) + 1e-8)


@dataclass
class TrainResult:
    params: ModelParams
    losses: list = field(default_factory=list)
    val_f1: list = field(default_factory=list)
    best_epoch: int = 0
    epochs_run: int = 0
    predictions: np.ndarray = None
    seconds: float = 0.0


def train(g: Graph, norms, table, mask: SplitMask, config: TrainConfig, seed=0,
          grad_check_every=0) -> TrainResult:
    """Full-batch training with early stopping on validation weighted-F1.

    ``norms`` are per-node Poincare norms (may be None when the margin is
    ablated); ``table`` is an EdgeCurvatureTable (may be None when the
    curvature weighting is ablated). The best-validation parameters are
    returned.
    """
    t0 = time.perf_counter()
    config.validate()
    mask.validate(g.n)
    if norms is not None and len(norms) != g.n:
        raise GraphError("embedding and graph disagree on node count")
    kappa = None
    if config.use_hmpnn:
        if table is None:
            raise GraphError("curvature table required unless message weighting is ablated")
        kappa = table.directed(g)
    X = _as_matrix(g.features)
    params = init_params(X.shape[1], config.hidden, g.num_classes, seed)
    model = HyperImbaModel(g, kappa, norms, params, config)
    rng = np.random.default_rng(seed + 7919)
    opt = _Optimizer(config, params)
    train_idx = np.asarray(mask.train, dtype=np.int64)
    truth = g.labels

    best_f1 = -1.0
    best = params.copy()
    best_epoch = 0
    res = TrainResult(best)
    since = 0
    for epoch in range(config.epochs):
        L, G, _ = model.loss_and_grad(train_idx, rng)
        if grad_check_every and epoch % grad_check_every == 0:
            err = gradient_check(model, train_idx)
            if err > 1e-4:
                raise RuntimeError(f"gradient check failed at epoch {epoch}: rel. error {err:.2e}")
        opt.step(params, G)
        res.losses.append(L)
        pred = model.predict()
        f1 = weighted_f1(pred, truth, mask.val) if mask.val.size else -L
        res.val_f1.append(f1)
        if f1 > best_f1:
            best_f1, best, best_epoch, since = f1, params.copy(), epoch, 0
        else:
            since += 1
            if since >= config.patience:
                break
    res.params = best
    res.best_epoch = best_epoch
    res.epochs_run = len(res.losses)
    model.params = best
    res.predictions = model.predict()
    res.seconds = time.perf_counter() - t0
    return res


def gradient_check(model: HyperImbaModel, train, eps=1e-5, max_entries=6, seed=0):
    """Largest relative error between analytic and central-difference gradients.

    Dropout is disabled for the check. A few entries of every parameter tensor
    are probed.
    """
    rng = np.random.default_rng(seed)
    _, G, _ = model.loss_and_grad(train, dropout=0.0)
    worst = 0.0
    for name, p in model.params.items():
        flat = p.reshape(-1)
        gflat = getattr(G, name).reshape(-1)
        idx = rng.choice(flat.size, size=min(max_entries, flat.size), replace=False)
        for i in idx:
            old = flat[i]
            flat[i] = old + eps
            lp = loss(model.run(train, dropout=0.0), model.g.labels, train,
                      model.alpha(), model.config.margin_sign)
            flat[i] = old - eps
            lm = loss(model.run(train, dropout=0.0), model.g.labels, train,
                      model.alpha(), model.config.margin_sign)
            flat[i] = old
            fd = (lp - lm) / (2 * eps)
            # the floor keeps roundoff (about 1e-11 at eps=1e-5) from dominating near-zero entries
            err = abs(fd - gflat[i]) / max(abs(fd), abs(gflat[i]), 1e-6)
            worst = max(worst, err)
    return worst


__all__ = ["ModelParams", "ForwardTrace", "TrainConfig", "TrainResult", "Propagation",
           "init_params", "hmpnn_weights", "forward", "ham_margin", "loss", "backward",
           "train", "gradient_check", "HyperImbaModel", "ABLATIONS"]
