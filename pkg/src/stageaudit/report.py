"""Audit report assembly, schema-validated JSON and flat CSV emission."""

from __future__ import annotations

import csv
import datetime
import json
import math
from importlib import resources

import jsonschema

from . import __version__
from .harness import AuditOutcome, composition_agreement
from .metrics import METRIC_NAMES

CONVENTIONS = {
    "favorable_label": "mapped to Y=1",
    "privileged_group": "A=1 per dataset config; metrics are unprivileged "
                        "minus privileged",
    "positive_sf": "stage favors the unprivileged group",
    "f1": "favorable-class F1 (harmonic mean of precision and recall)",
    "std": "sample standard deviation (ddof=1) over valid repeats",
    "sf_erd_range": "[-2,2] on audit data; formula admits [-4,4] in the "
                    "adversarial extreme",
}


def _schema():
    text = resources.files("stageaudit").joinpath(
        "schemas/audit_report.schema.json").read_text()
    return json.loads(text)


def _sanitize(obj):
    """NaN -> null so the JSON stays standard and schema-checkable."""
    if isinstance(obj, float):
        return None if math.isnan(obj) else obj
    if isinstance(obj, dict):
        return {k: _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    return obj


def dataset_block(name: str, dataset) -> dict:
    import hashlib
    h = hashlib.sha256()
    for cs in dataset.schema:
        h.update(f"{cs.name}:{cs.kind}:{cs.allowed_missing};".encode())
    return {
        "name": name,
        "rows": dataset.n,
        "schema_hash": h.hexdigest(),
        "fingerprint": dataset.fingerprint(),
    }


def build_audit_report(outcome: AuditOutcome, dataset_info: dict,
                       include_repeats: bool = True) -> dict:
    stages = []
    for s in outcome.stages:
        stages.append({
            "stage": s.stage,
            "sf": s.sf,
            "sfr_u": s.sfr_u,
            "sfr_p": s.sfr_p,
            "impact_fraction": s.impact_fraction,
            "change_rates": s.change_rates,
            "tradeoff": s.tradeoff,
            "composition": s.composition,
        })
    report = {
        "report_version": 1,
        "tool_version": __version__,
        "kind": "audit",
        "dataset": dataset_info,
        "config": outcome.config_echo,
        "conventions": CONVENTIONS,
        "global_fairness": outcome.global_fairness,
        "stages": stages,
        "failed_repeats": outcome.failed_repeats,
        "warnings": outcome.warnings,
    }
    if outcome.stages:
        report["composition_agreement"] = {
            m: composition_agreement(outcome, m) for m in METRIC_NAMES}
    if include_repeats:
        report["repeats"] = outcome.repeats
    return _sanitize(report)


def build_grid_report(grid: dict, dataset_info: dict, config_echo: dict) -> dict:
    return _sanitize({
        "report_version": 1,
        "tool_version": __version__,
        "kind": "grid",
        "dataset": dataset_info,
        "config": config_echo,
        "conventions": CONVENTIONS,
        "grid": grid,
        "warnings": [],
    })


def build_mitigation_report(rec, dataset_info: dict, config_echo: dict) -> dict:
    return _sanitize({
        "report_version": 1,
        "tool_version": __version__,
        "kind": "mitigate",
        "dataset": dataset_info,
        "config": config_echo,
        "conventions": CONVENTIONS,
        "mitigation": {
            "upstream": rec.upstream,
            "metric": rec.metric,
            "baseline": rec.baseline,
            "candidates": rec.candidates,
            "winner": rec.winner,
        },
        "warnings": [],
    })


def validate_report(report: dict) -> None:
    jsonschema.validate(report, _schema())


def write_json(report: dict, path, *, stamp: bool = True) -> None:
    """Schema-validate and write; the timestamp is outside the determinism
    contract and is added after validation-relevant content is fixed."""
    validate_report(report)
    out = dict(report)
    if stamp:
        out["timestamp"] = datetime.datetime.now(
            datetime.timezone.utc).isoformat()
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(out, fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")


def _fmt(v) -> str:
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return ""
    return repr(v) if isinstance(v, float) else str(v)


def write_stage_csv(outcome: AuditOutcome, path) -> None:
    """One row per (stage, metric, repeat); the plotting interface."""
    header = ["stage", "metric", "repeat", "seed", "sf", "sfr_u", "sfr_p",
              "delta_global", "delta_accuracy", "delta_f1", "impact_fraction"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for s in outcome.stages:
            for m in METRIC_NAMES:
                for r, rec in enumerate(outcome.repeats):
                    if rec["error"] is not None:
                        continue
                    row = rec["stages"][s.stage]
                    w.writerow([
                        s.stage, m, r, rec["seed"], _fmt(row["sf"][m]),
                        _fmt(row["sfr_u"][m]), _fmt(row["sfr_p"][m]),
                        _fmt(row["delta_global"][m]),
                        _fmt(row["delta_accuracy"]), _fmt(row["delta_f1"]),
                        _fmt(row["impact_fraction"]),
                    ])


def write_global_csv(outcome: AuditOutcome, path) -> None:
    header = ["repeat", "seed"] + list(METRIC_NAMES) + ["accuracy", "f1"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r, rec in enumerate(outcome.repeats):
            if rec["error"] is not None:
                continue
            g = rec["global"]
            w.writerow([r, rec["seed"]]
                       + [_fmt(g[m]) for m in METRIC_NAMES]
                       + [_fmt(g["accuracy"]), _fmt(g["f1"])])


def human_summary(outcome: AuditOutcome, title: str) -> str:
    """Plain-text stage x metric table (mean +/- stderr over repeats)."""
    lines = [title]
    g = outcome.global_fairness
    lines.append("  global: " + "  ".join(
        f"{m}={_mean_pm(g[m])}" for m in METRIC_NAMES))
    lines.append(f"  accuracy={_mean_pm(g['accuracy'])}  "
                 f"f1={_mean_pm(g['f1'])} (favorable-class)")
    if outcome.stages:
        width = max(len(s.stage) for s in outcome.stages)
        head = "  " + "stage".ljust(width) + "  " + "  ".join(
            f"SF_{m.upper():<14}" for m in METRIC_NAMES)
        lines.append(head)
        for s in outcome.stages:
            lines.append("  " + s.stage.ljust(width) + "  " + "  ".join(
                f"{_mean_pm(s.sf[m]):<17}" for m in METRIC_NAMES))
    if outcome.failed_repeats:
        lines.append(f"  failed repeats: {len(outcome.failed_repeats)}")
    for w in outcome.warnings:
        lines.append(f"  warning: {w}")
    return "\n".join(lines)


def _mean_pm(agg: dict) -> str:
    mean, stderr = agg.get("mean"), agg.get("stderr")
    if mean is None or (isinstance(mean, float) and math.isnan(mean)):
        return "undef"
    if stderr is None or (isinstance(stderr, float) and math.isnan(stderr)):
        return f"{mean:+.4f}"
    return f"{mean:+.4f}±{stderr:.4f}"
