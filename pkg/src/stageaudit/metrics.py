"""Group fairness and performance metrics over a set of binary predictions.

All four fairness metrics are differences "unprivileged minus privileged".
A metric whose defining rate has an empty stratum is flagged undefined and
returned as NaN rather than silently zero; callers decide how to aggregate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .data import GroupCounts, group_counts
from .errors import DataError


@dataclass(frozen=True)
class PredictionSet:
    """Per-instance true label, predicted label, and group membership."""

    y: np.ndarray
    yhat: np.ndarray
    priv: np.ndarray

    def __post_init__(self):
        n = len(self.y)
        if n == 0:
            raise DataError("empty prediction set")
        if len(self.yhat) != n or len(self.priv) != n:
            raise DataError("misaligned prediction arrays")
        p = int(np.asarray(self.priv, dtype=bool).sum())
        if p == 0 or p == n:
            raise DataError("both groups must be represented")

    @property
    def n(self) -> int:
        return len(self.y)

    def counts(self) -> GroupCounts:
        return group_counts(self.y, self.priv)


def _rate(num: int, den: int) -> float:
    return math.nan if den == 0 else num / den


@dataclass(frozen=True)
class GroupRates:
    """Per-group favorable/confusion rates plus the stratum denominators."""

    counts: GroupCounts
    favorable_rate_u: float
    favorable_rate_p: float
    tpr_u: float
    tpr_p: float
    fpr_u: float
    fpr_p: float
    fnr_u: float
    fnr_p: float


def rates(ps: PredictionSet) -> GroupRates:
    y = np.asarray(ps.y, dtype=np.int8)
    yhat = np.asarray(ps.yhat, dtype=np.int8)
    priv = np.asarray(ps.priv, dtype=bool)
    gc = ps.counts()
    out = {}
    for g, mask, n_g, n_g1, n_g0 in (
        ("u", ~priv, gc.n_u, gc.n_u_y1, gc.n_u_y0),
        ("p", priv, gc.n_p, gc.n_p_y1, gc.n_p_y0),
    ):
        pred1 = int((yhat[mask] == 1).sum())
        tp = int(((yhat == 1) & (y == 1) & mask).sum())
        fp = int(((yhat == 1) & (y == 0) & mask).sum())
        fn = int(((yhat == 0) & (y == 1) & mask).sum())
        out[f"favorable_rate_{g}"] = _rate(pred1, n_g)
        out[f"tpr_{g}"] = _rate(tp, n_g1)
        out[f"fpr_{g}"] = _rate(fp, n_g0)
        out[f"fnr_{g}"] = _rate(fn, n_g1)
    return GroupRates(counts=gc, **out)


def spd(ps: PredictionSet) -> float:
    """Favorable-prediction rate of the unprivileged group minus privileged."""
    r = rates(ps)
    return r.favorable_rate_u - r.favorable_rate_p


def eod(ps: PredictionSet) -> float:
    """True-positive-rate difference; NaN if either group lacks positives."""
    r = rates(ps)
    return r.tpr_u - r.tpr_p


def aod(ps: PredictionSet) -> float:
    """Mean of the TPR difference and the FPR difference between groups."""
    r = rates(ps)
    return 0.5 * ((r.tpr_u - r.tpr_p) + (r.fpr_u - r.fpr_p))


def erd(ps: PredictionSet) -> float:
    """FPR difference plus FNR difference between groups."""
    r = rates(ps)
    return (r.fpr_u - r.fpr_p) + (r.fnr_u - r.fnr_p)


def performance(ps: PredictionSet) -> tuple[float, float]:
    """Accuracy and favorable-class F1 (0 when precision+recall is 0)."""
    y = np.asarray(ps.y, dtype=np.int8)
    yhat = np.asarray(ps.yhat, dtype=np.int8)
    acc = float((y == yhat).mean())
    tp = int(((yhat == 1) & (y == 1)).sum())
    fp = int(((yhat == 1) & (y == 0)).sum())
    fn = int(((yhat == 0) & (y == 1)).sum())
    if 2 * tp + fp + fn == 0:
        return acc, 0.0
    return acc, 2 * tp / (2 * tp + fp + fn)


METRIC_NAMES = ("spd", "eod", "aod", "erd")
_METRIC_FNS = {"spd": spd, "eod": eod, "aod": aod, "erd": erd}


@dataclass(frozen=True)
class GlobalFairness:
    spd: float
    eod: float
    aod: float
    erd: float
    accuracy: float
    f1: float
    undefined: frozenset = field(default_factory=frozenset)

    def metric(self, name: str) -> float:
        return getattr(self, name)


def global_fairness(ps: PredictionSet) -> GlobalFairness:
    vals = {name: _METRIC_FNS[name](ps) for name in METRIC_NAMES}
    acc, f1 = performance(ps)
    undefined = frozenset(k for k, v in vals.items() if math.isnan(v))
    return GlobalFairness(accuracy=acc, f1=f1, undefined=undefined, **vals)
