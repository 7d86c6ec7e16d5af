"""Train / validation / test splits with per-class balanced training labels."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from hierlab.graph import Graph, GraphError, SplitMask

BANDS = ("top", "middle", "bottom", "q1", "q2", "q3", "q4", "q5")


class SplitError(GraphError):
    pass


def _count(spec, n):
    """A fraction in (0, 1) is a share of ``n``; anything else is an absolute count."""
    if isinstance(spec, float) and 0.0 < spec < 1.0:
        return int(round(spec * n))
    return int(spec)


def _labelled(g: Graph):
    lab = np.flatnonzero(g.labels >= 0) if g.labels is not None else np.zeros(0, dtype=np.int64)
    if lab.size == 0 or g.num_classes == 0:
        raise SplitError("graph has no labelled nodes")
    return lab


def _fill_rest(g, rng, train, val, test):
    """Draw val then test from the labelled nodes outside ``train``."""
    lab = _labelled(g)
    rest = np.setdiff1d(lab, train)
    rest = rng.permutation(rest)
    nv = _count(val, len(lab))
    if nv > len(rest):
        raise SplitError("not enough labelled nodes left for the validation set")
    va = rest[:nv]
    left = rest[nv:]
    if test is None:
        te = left
    else:
        nt = _count(test, len(lab))
        if isinstance(test, float) and 0.0 < test < 1.0:
            # per-class and validation rounding can overshoot by a node or two
            nt = min(nt, len(left))
        if nt > len(left):
            raise SplitError("not enough labelled nodes left for the test set")
        te = left[:nt]
    return SplitMask(np.sort(train), np.sort(va), np.sort(te))


def make_balanced_split(g: Graph, per_class, seed=0, val=0.1, test=None) -> SplitMask:
    """``per_class`` training nodes per class, then ``val`` for validation and ``test`` for testing.

    ``per_class``, ``val`` and ``test`` accept a count or a fraction of the
    labelled nodes (for ``per_class``: a fraction of all labelled nodes split
    evenly over classes). ``test=None`` puts every remaining node in the test
    set.
    """
    lab = _labelled(g)
    C = g.num_classes
    if isinstance(per_class, float) and 0.0 < per_class < 1.0:
        k = int(round(per_class * len(lab) / C))
    else:
        k = int(per_class)
    if k < 1:
        raise SplitError("per_class must select at least one node per class")
    rng = np.random.default_rng(seed)
    picks = []
    for c in range(C):
        members = lab[g.labels[lab] == c]
        if len(members) < k + 1:
            raise SplitError(f"class {c} has {len(members)} nodes, needs more than {k}")
        picks.append(rng.choice(members, size=k, replace=False))
    return _fill_rest(g, rng, np.concatenate(picks), val, test)


@dataclass
class BandInfo:
    band: str
    in_band: int
    topped_up: int

    @property
    def top_up_fraction(self):
        total = self.in_band + self.topped_up
        return self.topped_up / total if total else 0.0


def band_members(band, norms=None, level=None):
    """Boolean mask of nodes in a hierarchy band.

    ``top``/``middle``/``bottom`` read per-node level tags; ``q1``..``q5`` are
    quintiles of the Poincare norm, q1 holding the smallest norms.
    """
    if band not in BANDS:
        raise SplitError(f"unknown band {band!r}; expected one of {BANDS}")
    if band.startswith("q"):
        if norms is None:
            raise SplitError("quantile bands need Poincare norms")
        norms = np.asarray(norms, dtype=float)
        q = int(band[1]) - 1
        lo, hi = np.quantile(norms, [q / 5.0, (q + 1) / 5.0])
        if q == 4:
            return (norms >= lo) & (norms <= hi)
        return (norms >= lo) & (norms < hi)
    if level is None:
        raise SplitError("level bands need per-node level tags")
    return np.asarray(level) == band


def make_hierarchy_split(g: Graph, band, per_class, seed=0, norms=None, level=None,
                         val=0.1, test=None):
    """Balanced training labels drawn preferentially from one hierarchy band.

    Each class takes up to ``per_class`` nodes from the band; shortfalls are
    topped up at random from the rest of that class. Returns the split and a
    :class:`BandInfo` recording how many training nodes came from outside the
    band.
    """
    inband = band_members(band, norms, level)
    if len(inband) != g.n:
        raise SplitError("band annotation length does not match node count")
    lab = _labelled(g)
    if not np.any(inband[lab]):
        raise SplitError(f"band {band!r} contains no labelled node")
    k = int(per_class)
    if k < 1:
        raise SplitError("per_class must be at least 1")
    rng = np.random.default_rng(seed)
    picks = []
    topped = 0
    for c in range(g.num_classes):
        members = lab[g.labels[lab] == c]
        if len(members) < k + 1:
            raise SplitError(f"class {c} has {len(members)} nodes, needs more than {k}")
        inside = members[inband[members]]
        take = rng.choice(inside, size=min(k, len(inside)), replace=False)
        if len(take) < k:
            outside = members[~inband[members]]
            extra = rng.choice(outside, size=k - len(take), replace=False)
            topped += len(extra)
            take = np.concatenate([take, extra])
        picks.append(take)
    train = np.concatenate(picks)
    mask = _fill_rest(g, rng, train, val, test)
    return mask, BandInfo(band, len(train) - topped, topped)


__all__ = ["BANDS", "BandInfo", "SplitError", "band_members",
           "make_balanced_split", "make_hierarchy_split"]
