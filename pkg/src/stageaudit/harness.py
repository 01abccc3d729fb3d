"""Repeated seeded audit runs: stage fairness, tradeoffs, composition, grids.

Repeat r of any experiment uses split seed base_seed + r; the pipeline and
every ablated twin see the same split and the same test rows, and stage or
classifier randomness is paired through the shared context seed. Repeats are
independent work units; results are keyed by repeat index so parallel
execution is order-insensitive.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import metrics as gm
from . import pipeline as pl
from .data import Dataset, group_counts, split
from .errors import AllRepeatsFailed, ConfigError
from .metrics import METRIC_NAMES, PredictionSet
from .stagefair import PredictionTriples, stage_report

SIGN_EPSILON = 0.005  # dead-zone below which a value counts as zero-signed


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: Dataset
    pipeline: pl.PipelineSpec
    ablations: tuple = ()
    repeats: int = 10
    base_seed: int = 0
    train_fraction: float = 0.7
    stratify: bool = False
    jobs: int = 1
    epsilon: float = SIGN_EPSILON

    def __post_init__(self):
        if self.repeats < 1:
            raise ConfigError("repeats must be >= 1")
        if not 0 < self.train_fraction < 1:
            raise ConfigError("train fraction must be in (0,1)")
        object.__setattr__(self, "ablations", tuple(self.ablations))


def zero_sign(x: float, epsilon: float = SIGN_EPSILON) -> int:
    if math.isnan(x) or abs(x) < epsilon:
        return 0
    return 1 if x > 0 else -1


def _aggregate(values: list[float]) -> dict:
    """Mean/std/stderr over the non-NaN repeats, plus the raw series."""
    arr = np.asarray(values, dtype=np.float64)
    valid = arr[~np.isnan(arr)]
    k = len(valid)
    out = {
        "raw": [float(v) for v in arr],
        "valid_repeats": k,
        "undefined_repeats": int(len(arr) - k),
        "mean": float(valid.mean()) if k else math.nan,
        "std": float(valid.std(ddof=1)) if k >= 2 else math.nan,
    }
    out["stderr"] = out["std"] / math.sqrt(k) if k >= 2 else math.nan
    return out


def _predictions_on(fp, test):
    yhat, keep = fp.predict(test.frame, dict(test.raw))
    return yhat, keep


def _global_record(y, yhat, priv) -> dict:
    g = gm.global_fairness(PredictionSet(y=y, yhat=yhat, priv=priv))
    return {"spd": g.spd, "eod": g.eod, "aod": g.aod, "erd": g.erd,
            "accuracy": g.accuracy, "f1": g.f1}


def _run_repeat(args):
    """One seeded repeat: fit P and every P*, predict, compare. Picklable."""
    (dataset, spec, ablation_specs, fraction, stratify, seed) = args
    try:
        sp = split(dataset, fraction, seed, stratify)
        fp = pl.fit(spec, sp, context_seed=seed)
        yhat_p, keep_p = _predictions_on(fp, sp.test)
        n_test = sp.test.n
        pos_p = np.full(n_test, -1)
        pos_p[keep_p] = np.arange(len(keep_p))
        out = {
            "seed": seed,
            "error": None,
            "global": _global_record(sp.test.y[keep_p], yhat_p,
                                     sp.test.priv[keep_p]),
            "warnings": list(fp.warnings),
            "stages": {},
        }
        for name, star_spec in ablation_specs:
            fps = pl.fit(star_spec, sp, context_seed=seed)
            assert fp.split_fingerprint == fps.split_fingerprint
            yhat_s, keep_s = _predictions_on(fps, sp.test)
            common = np.intersect1d(keep_p, keep_s)
            pos_s = np.full(n_test, -1)
            pos_s[keep_s] = np.arange(len(keep_s))
            yp = yhat_p[pos_p[common]]
            ys = yhat_s[pos_s[common]]
            y = sp.test.y[common]
            priv = sp.test.priv[common]
            triples = PredictionTriples(y=y, yhat_p=yp, yhat_pstar=ys,
                                        priv=priv)
            rep = stage_report(triples, group_counts(y, priv))
            # paired performance and global fairness on the aligned rows
            perf_p = _global_record(y, yp, priv)
            perf_s = _global_record(y, ys, priv)
            out["stages"][name] = {
                "sf": {m: rep.metric(m) for m in METRIC_NAMES},
                "sfr_u": dict(rep.sfr_u),
                "sfr_p": dict(rep.sfr_p),
                "impact_fraction": rep.impact_fraction,
                "rate_to_unfavorable_u": rep.rate_to_unfavorable_u,
                "rate_to_unfavorable_p": rep.rate_to_unfavorable_p,
                "rate_to_favorable_u": rep.rate_to_favorable_u,
                "rate_to_favorable_p": rep.rate_to_favorable_p,
                "n_aligned": int(len(common)),
                "with_stage": perf_p,
                "without_stage": perf_s,
                "delta_accuracy": perf_p["accuracy"] - perf_s["accuracy"],
                "delta_f1": perf_p["f1"] - perf_s["f1"],
                "delta_global": {m: perf_p[m] - perf_s[m]
                                 for m in METRIC_NAMES},
            }
        return out
    except Exception as exc:  # noqa: BLE001 - repeat failures are recorded
        return {"seed": seed, "error": f"{type(exc).__name__}: {exc}",
                "global": None, "stages": {}, "warnings": []}


@dataclass
class StageAudit:
    """Aggregated per-stage result across repeats."""

    stage: str
    sf: dict = field(default_factory=dict)            # metric -> aggregate
    sfr_u: dict = field(default_factory=dict)
    sfr_p: dict = field(default_factory=dict)
    tradeoff: dict = field(default_factory=dict)      # delta_accuracy/f1 aggs
    composition: dict = field(default_factory=dict)   # metric -> record
    change_rates: dict = field(default_factory=dict)
    impact_fraction: dict = field(default_factory=dict)


@dataclass
class AuditOutcome:
    config_echo: dict
    global_fairness: dict                 # metric/perf -> aggregate for P
    stages: list                          # list[StageAudit]
    repeats: list                         # raw per-repeat records
    failed_repeats: list
    warnings: list
    epsilon: float


def _ablation_specs(cfg: ExperimentConfig):
    specs = []
    for plan in cfg.ablations:
        target = cfg.pipeline.stages[plan.index].display_name
        specs.append((target, pl.ablate(cfg.pipeline, plan, cfg.dataset)))
    return specs


def run_stage_audit(cfg: ExperimentConfig) -> AuditOutcome:
    """Fig. by-stage audit: SF metrics, tradeoffs and composition per stage."""
    errors = pl.validation_errors(cfg.pipeline, cfg.dataset)
    if errors:
        raise ConfigError("pipeline does not validate: "
                          + "; ".join(d.message for d in errors))
    ablation_specs = _ablation_specs(cfg)
    seeds = [cfg.base_seed + r for r in range(cfg.repeats)]
    tasks = [(cfg.dataset, cfg.pipeline, ablation_specs, cfg.train_fraction,
              cfg.stratify, s) for s in seeds]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            records = list(pool.map(_run_repeat, tasks))
    else:
        records = [_run_repeat(t) for t in tasks]
    records.sort(key=lambda r: r["seed"])
    good = [r for r in records if r["error"] is None]
    failed = [{"seed": r["seed"], "error": r["error"]}
              for r in records if r["error"] is not None]
    if not good:
        raise AllRepeatsFailed(
            f"all {cfg.repeats} repeats failed; first error: "
            f"{failed[0]['error']}")

    def series(getter):
        return [getter(r) if r["error"] is None else math.nan
                for r in records]

    global_agg = {}
    for key in METRIC_NAMES + ("accuracy", "f1"):
        global_agg[key] = _aggregate(series(lambda r, k=key: r["global"][k]))

    stages = []
    for name, _ in ablation_specs:
        audit = StageAudit(stage=name)
        for m in METRIC_NAMES:
            audit.sf[m] = _aggregate(
                series(lambda r, m=m: r["stages"][name]["sf"][m]))
            audit.sfr_u[m] = _aggregate(
                series(lambda r, m=m: r["stages"][name]["sfr_u"][m]))
            audit.sfr_p[m] = _aggregate(
                series(lambda r, m=m: r["stages"][name]["sfr_p"][m]))
            delta = _aggregate(
                series(lambda r, m=m: r["stages"][name]["delta_global"][m]))
            local_mean = audit.sf[m]["mean"]
            audit.composition[m] = {
                "local_sf_mean": local_mean,
                "delta_global_mean": delta["mean"],
                "delta_global": delta,
                "sign_agreement": (zero_sign(local_mean, cfg.epsilon)
                                   == zero_sign(delta["mean"], cfg.epsilon)),
            }
        for key in ("delta_accuracy", "delta_f1"):
            audit.tradeoff[key] = _aggregate(
                series(lambda r, k=key: r["stages"][name][k]))
        for key in ("rate_to_unfavorable_u", "rate_to_unfavorable_p",
                    "rate_to_favorable_u", "rate_to_favorable_p"):
            audit.change_rates[key] = _aggregate(
                series(lambda r, k=key: r["stages"][name][k]))
        audit.impact_fraction = _aggregate(
            series(lambda r: r["stages"][name]["impact_fraction"]))
        stages.append(audit)

    warn = sorted({w for r in good for w in r["warnings"]})
    return AuditOutcome(
        config_echo={
            "pipeline": cfg.pipeline.name,
            "repeats": cfg.repeats,
            "base_seed": cfg.base_seed,
            "train_fraction": cfg.train_fraction,
            "stratify": cfg.stratify,
            "epsilon": cfg.epsilon,
            "ablations": [
                {"target": cfg.pipeline.stages[p.index].display_name,
                 "mode": p.mode} for p in cfg.ablations],
        },
        global_fairness=global_agg,
        stages=stages,
        repeats=records,
        failed_repeats=failed,
        warnings=warn,
        epsilon=cfg.epsilon,
    )


def run_global_fairness(cfg: ExperimentConfig) -> AuditOutcome:
    """Whole-pipeline fairness over repeats, no ablation."""
    cfg = ExperimentConfig(
        dataset=cfg.dataset, pipeline=cfg.pipeline, ablations=(),
        repeats=cfg.repeats, base_seed=cfg.base_seed,
        train_fraction=cfg.train_fraction, stratify=cfg.stratify,
        jobs=cfg.jobs, epsilon=cfg.epsilon)
    return run_stage_audit(cfg)


def run_composition(cfg: ExperimentConfig) -> AuditOutcome:
    """Stage audit with local-vs-global comparison; requires ablations."""
    if not cfg.ablations:
        raise ConfigError("composition comparison needs ablation plans")
    return run_stage_audit(cfg)


def composition_agreement(outcome: AuditOutcome, metric: str = "spd") -> dict:
    rows = [(s.stage, s.composition[metric]["sign_agreement"])
            for s in outcome.stages]
    agreed = sum(1 for _, a in rows if a)
    return {
        "metric": metric,
        "stages": len(rows),
        "agreed": agreed,
        "fraction": agreed / len(rows) if rows else math.nan,
        "per_stage": dict(rows),
    }


def run_transformer_grid(datasets, transformers, classifier_descs,
                         base_cfg: dict) -> dict:
    """Audit each transformer inside a vanilla pipeline per dataset/classifier.

    `datasets` is a list of (name, Dataset, prelude_stages); the prelude is
    the dataset's base encoding so the classifier sees numeric input.
    """
    grid = {"cells": [], "skipped": []}
    for ds_name, dataset, prelude in datasets:
        for t in transformers:
            for clf in classifier_descs:
                key = {"dataset": ds_name, "transformer": t.display_name,
                       "classifier": clf.kind}
                spec = pl.PipelineSpec(
                    tuple(prelude) + (t,), clf,
                    name=f"vanilla+{t.display_name}+{clf.kind}")
                try:
                    cfg = ExperimentConfig(
                        dataset=dataset, pipeline=spec,
                        ablations=(pl.AblationPlan(index=len(prelude)),),
                        **base_cfg)
                    outcome = run_stage_audit(cfg)
                except Exception as exc:  # noqa: BLE001
                    grid["skipped"].append(
                        {**key, "reason": f"{type(exc).__name__}: {exc}"})
                    continue
                audit = outcome.stages[0]
                grid["cells"].append({
                    **key,
                    "sf": {m: audit.sf[m] for m in METRIC_NAMES},
                    "tradeoff": audit.tradeoff,
                    "failed_repeats": len(outcome.failed_repeats),
                })
    return grid


@dataclass
class MitigationRecommendation:
    upstream: str
    metric: str
    baseline: dict                       # upstream-only global aggregate
    candidates: list                     # ranked candidate records
    winner: str


def recommend_downstream(dataset, prelude, upstream, candidates, classifier,
                         base_cfg: dict, metric: str = "spd"
                         ) -> MitigationRecommendation:
    """Rank downstream transformer candidates by post-insertion |global metric|.

    Every candidate is evaluated under identical seeds. Each record carries
    the candidate's local SF so the opposite-direction heuristic is visible.
    """
    if not candidates:
        raise ConfigError("empty candidate list")
    prelude = tuple(prelude)
    baseline_spec = pl.PipelineSpec(prelude + (upstream,), classifier,
                                    name=f"upstream:{upstream.display_name}")
    baseline = run_global_fairness(ExperimentConfig(
        dataset=dataset, pipeline=baseline_spec, **base_cfg))
    upstream_audit = run_stage_audit(ExperimentConfig(
        dataset=dataset, pipeline=baseline_spec,
        ablations=(pl.AblationPlan(index=len(prelude)),), **base_cfg))
    records = []
    for cand in candidates:
        spec = pl.PipelineSpec(
            prelude + (upstream, cand), classifier,
            name=f"{upstream.display_name}->{cand.display_name}")
        outcome = run_stage_audit(ExperimentConfig(
            dataset=dataset, pipeline=spec,
            ablations=(pl.AblationPlan(index=len(prelude) + 1),), **base_cfg))
        audit = outcome.stages[0]
        records.append({
            "candidate": cand.display_name,
            "global": {m: outcome.global_fairness[m] for m in METRIC_NAMES},
            "abs_metric_mean": abs(outcome.global_fairness[metric]["mean"]),
            "local_sf": {m: audit.sf[m]["mean"] for m in METRIC_NAMES},
        })
    order = sorted(range(len(records)),
                   key=lambda i: (records[i]["abs_metric_mean"], i))
    ranked = [records[i] for i in order]
    return MitigationRecommendation(
        upstream=upstream.display_name,
        metric=metric,
        baseline={
            "global": {m: baseline.global_fairness[m] for m in METRIC_NAMES},
            "abs_metric_mean": abs(baseline.global_fairness[metric]["mean"]),
            "local_sf": {m: upstream_audit.stages[0].sf[m]["mean"]
                         for m in METRIC_NAMES},
        },
        candidates=ranked,
        winner=ranked[0]["candidate"],
    )
