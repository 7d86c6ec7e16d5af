"""Multi-class F1 scores."""

import numpy as np


def _select(pred, truth, mask):
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if mask is not None:
        mask = np.asarray(mask)
        if mask.dtype == bool:
            pred, truth = pred[mask], truth[mask]
        else:
            pred, truth = pred[mask.astype(np.int64)], truth[mask.astype(np.int64)]
    if truth.size == 0:
        raise ValueError("cannot score an empty node set")
    return pred, truth


def confusion(pred, truth, num_classes):
    cm = np.zeros((num_classes, num_classes), dtype=np.int64)
    np.add.at(cm, (truth, pred), 1)
    return cm


def per_class_f1(pred, truth, num_classes):
    cm = confusion(pred, truth, num_classes)
    tp = np.diag(cm).astype(float)
    fp = cm.sum(axis=0) - tp
    fn = cm.sum(axis=1) - tp
    den = 2 * tp + fp + fn
    return np.divide(2 * tp, den, out=np.zeros_like(tp), where=den > 0), cm.sum(axis=1)


def weighted_f1(pred, truth, mask=None):
    """Per-class F1 averaged with weights proportional to true-class support."""
    pred, truth = _select(pred, truth, mask)
    C = int(max(pred.max(), truth.max())) + 1
    f1, support = per_class_f1(pred, truth, C)
    return float(np.sum(f1 * support) / support.sum())


def micro_f1(pred, truth, mask=None):
    """F1 from global TP/FP/FN counts; equals accuracy for single-label problems."""
    pred, truth = _select(pred, truth, mask)
    tp = np.count_nonzero(pred == truth)
    fp = fn = truth.size - tp
    return float(2 * tp / (2 * tp + fp + fn))
