"""Stage-level fairness from paired predictions of a pipeline and its ablation.

Inputs are per-instance triples (Y, prediction with the stage, prediction
without it) plus group membership. Signed change tallies per group, divided
by full test-set stratum sizes, yield the four SF metrics. Positive values
mean the stage favors the unprivileged group.

Undefined strata flag a metric as NaN instead of failing the whole report.
Note on ranges: SF_SPD, SF_EOD and SF_AOD always lie in [-2, 2]; SF_ERD sums
two rate changes per group and can reach [-4, 4] on adversarial inputs,
although audit data stays well inside [-2, 2] in practice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import GroupCounts
from .errors import DataError


@dataclass(frozen=True)
class PredictionTriples:
    """Aligned (Y, Yhat with stage, Yhat without stage, group) records."""

    y: np.ndarray
    yhat_p: np.ndarray
    yhat_pstar: np.ndarray
    priv: np.ndarray

    def __post_init__(self):
        n = len(self.y)
        if n == 0:
            raise DataError("empty prediction triples")
        if not (len(self.yhat_p) == len(self.yhat_pstar) == len(self.priv) == n):
            raise DataError("misaligned triple arrays")
        p = int(np.asarray(self.priv, dtype=bool).sum())
        if p == 0 or p == n:
            raise DataError("both groups must be represented")

    @property
    def n(self) -> int:
        return len(self.y)


def impact_set(t: PredictionTriples) -> np.ndarray:
    """Indicator of instances whose prediction differs between pipelines."""
    return (np.asarray(t.yhat_p) != np.asarray(t.yhat_pstar)).astype(np.int8)


@dataclass(frozen=True)
class ChangeTally:
    """Signed per-group change counts, each a sum of {-1,0,+1} instance values."""

    sfc_spd: int
    sfc_tp: int   # also the EOD tally
    sfc_fp: int
    sfc_fn: int
    to_favorable: int    # unfavorable without the stage, favorable with it
    to_unfavorable: int  # favorable without the stage, unfavorable with it


def _tally(y, yp, yps, mask) -> ChangeTally:
    up = (yp == 1) & (yps == 0) & mask    # stage granted the favorable label
    down = (yp == 0) & (yps == 1) & mask  # stage withdrew it
    y1 = y == 1
    y0 = ~y1
    return ChangeTally(
        sfc_spd=int(up.sum()) - int(down.sum()),
        sfc_tp=int((up & y1).sum()) - int((down & y1).sum()),
        sfc_fp=int((up & y0).sum()) - int((down & y0).sum()),
        sfc_fn=int((down & y1).sum()) - int((up & y1).sum()),
        to_favorable=int(up.sum()),
        to_unfavorable=int(down.sum()),
    )


def change_tallies(t: PredictionTriples) -> tuple[ChangeTally, ChangeTally]:
    """(unprivileged, privileged) signed change tallies."""
    y = np.asarray(t.y, dtype=np.int8)
    yp = np.asarray(t.yhat_p, dtype=np.int8)
    yps = np.asarray(t.yhat_pstar, dtype=np.int8)
    priv = np.asarray(t.priv, dtype=bool)
    return _tally(y, yp, yps, ~priv), _tally(y, yp, yps, priv)


def sf_spd(t: PredictionTriples, gc: GroupCounts) -> float:
    """Difference of favorable-change rates between groups."""
    tu, tp = change_tallies(t)
    if gc.n_u == 0 or gc.n_p == 0:
        raise DataError("empty group")
    return tu.sfc_spd / gc.n_u - tp.sfc_spd / gc.n_p


def sf_eod(t: PredictionTriples, gc: GroupCounts) -> float:
    """True-positive change rate difference; NaN when a Y=1 stratum is empty."""
    tu, tp = change_tallies(t)
    if gc.n_u_y1 == 0 or gc.n_p_y1 == 0:
        return math.nan
    return tu.sfc_tp / gc.n_u_y1 - tp.sfc_tp / gc.n_p_y1


def _sfr_aod(tally: ChangeTally, n_y1: int, n_y0: int) -> float:
    return 0.5 * (tally.sfc_tp / n_y1 + tally.sfc_fp / n_y0)


def _sfr_erd(tally: ChangeTally, n_y1: int, n_y0: int) -> float:
    return tally.sfc_fp / n_y0 + tally.sfc_fn / n_y1


def _four_strata_ok(gc: GroupCounts) -> bool:
    return min(gc.n_u_y1, gc.n_u_y0, gc.n_p_y1, gc.n_p_y0) > 0


def sf_aod(t: PredictionTriples, gc: GroupCounts) -> float:
    """Averaged TP/FP change rate difference; NaN when any stratum is empty."""
    if not _four_strata_ok(gc):
        return math.nan
    tu, tp = change_tallies(t)
    return (_sfr_aod(tu, gc.n_u_y1, gc.n_u_y0)
            - _sfr_aod(tp, gc.n_p_y1, gc.n_p_y0))


def sf_erd(t: PredictionTriples, gc: GroupCounts) -> float:
    """FP change rate plus FN change rate, differenced between groups."""
    if not _four_strata_ok(gc):
        return math.nan
    tu, tp = change_tallies(t)
    return (_sfr_erd(tu, gc.n_u_y1, gc.n_u_y0)
            - _sfr_erd(tp, gc.n_p_y1, gc.n_p_y0))


@dataclass(frozen=True)
class StageFairnessReport:
    sf_spd: float
    sf_eod: float
    sf_aod: float
    sf_erd: float
    sfr_u: dict
    sfr_p: dict
    tally_u: ChangeTally
    tally_p: ChangeTally
    counts: GroupCounts
    impact_fraction: float
    # per-group fraction of instances flipped in each direction by the stage
    rate_to_favorable_u: float
    rate_to_favorable_p: float
    rate_to_unfavorable_u: float
    rate_to_unfavorable_p: float
    undefined: frozenset

    def metric(self, name: str) -> float:
        return getattr(self, f"sf_{name}")


def stage_report(t: PredictionTriples, gc: GroupCounts) -> StageFairnessReport:
    """Bundle the four SF metrics, per-group rates and change bookkeeping."""
    tu, tp = change_tallies(t)
    n_impact = int(impact_set(t).sum())
    values = {
        "sf_spd": sf_spd(t, gc),
        "sf_eod": sf_eod(t, gc),
        "sf_aod": sf_aod(t, gc),
        "sf_erd": sf_erd(t, gc),
    }
    sfr_u = {
        "spd": tu.sfc_spd / gc.n_u,
        "eod": tu.sfc_tp / gc.n_u_y1 if gc.n_u_y1 else math.nan,
        "aod": _sfr_aod(tu, gc.n_u_y1, gc.n_u_y0)
               if gc.n_u_y1 and gc.n_u_y0 else math.nan,
        "erd": _sfr_erd(tu, gc.n_u_y1, gc.n_u_y0)
               if gc.n_u_y1 and gc.n_u_y0 else math.nan,
    }
    sfr_p = {
        "spd": tp.sfc_spd / gc.n_p,
        "eod": tp.sfc_tp / gc.n_p_y1 if gc.n_p_y1 else math.nan,
        "aod": _sfr_aod(tp, gc.n_p_y1, gc.n_p_y0)
               if gc.n_p_y1 and gc.n_p_y0 else math.nan,
        "erd": _sfr_erd(tp, gc.n_p_y1, gc.n_p_y0)
               if gc.n_p_y1 and gc.n_p_y0 else math.nan,
    }
    return StageFairnessReport(
        **values,
        sfr_u=sfr_u,
        sfr_p=sfr_p,
        tally_u=tu,
        tally_p=tp,
        counts=gc,
        impact_fraction=n_impact / t.n,
        rate_to_favorable_u=tu.to_favorable / gc.n_u,
        rate_to_favorable_p=tp.to_favorable / gc.n_p,
        rate_to_unfavorable_u=tu.to_unfavorable / gc.n_u,
        rate_to_unfavorable_p=tp.to_unfavorable / gc.n_p,
        undefined=frozenset(k[3:] for k, v in values.items() if math.isnan(v)),
    )
