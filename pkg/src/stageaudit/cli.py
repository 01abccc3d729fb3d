"""Command-line surface: audits, grids, mitigation search, dataset prep."""

from __future__ import annotations

import os
import sys

import click

from . import __version__, fetch as fetch_mod, report as rep, synthdata
from .classifiers import CLASSIFIER_KINDS, ClassifierDescriptor
from .config import load_dataset_config, load_pipeline_config
from .errors import AllRepeatsFailed, StageAuditError
from .harness import (ExperimentConfig, recommend_downstream, run_stage_audit,
                      run_transformer_grid)
from .metrics import METRIC_NAMES
from .transformers import STAGE_KINDS, StageDescriptor

EXIT_VALIDATION = 2
EXIT_ALL_FAILED = 3


def _fail(message: str, code: int):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def common_options(f):
    for opt in reversed([
        click.option("--repeats", default=10, show_default=True,
                     help="Seeded repeats per experiment."),
        click.option("--seed", default=0, show_default=True,
                     help="Base seed; repeat r uses seed+r."),
        click.option("--train-fraction", default=0.7, show_default=True),
        click.option("--jobs", default=1, show_default=True,
                     help="Parallel repeat workers; results are identical "
                          "for any value."),
        click.option("--out-dir", default=".", show_default=True,
                     type=click.Path(file_okay=False)),
        click.option("--format", "fmt", default="both", show_default=True,
                     type=click.Choice(["json", "csv", "both"])),
    ]):
        f = opt(f)
    return f


@click.group()
@click.version_option(__version__)
def main():
    """Fairness auditing of tabular ML pipelines by stage ablation."""


def _experiment_config(ds_cfg, pipe_cfg, repeats, seed, train_fraction, jobs):
    if repeats < 1:
        _fail("--repeats must be >= 1", EXIT_VALIDATION)
    dataset = ds_cfg.load()
    return ExperimentConfig(
        dataset=dataset,
        pipeline=pipe_cfg.spec,
        ablations=pipe_cfg.ablation_plans(),
        repeats=repeats,
        base_seed=seed,
        train_fraction=train_fraction,
        jobs=jobs,
    )


def _write_outputs(report, out_dir, base, fmt, csv_writers=()):
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    if fmt in ("json", "both"):
        path = os.path.join(out_dir, f"{base}.json")
        rep.write_json(report, path)
        paths.append(path)
    if fmt in ("csv", "both"):
        for suffix, writer in csv_writers:
            path = os.path.join(out_dir, f"{base}_{suffix}.csv")
            writer(path)
            paths.append(path)
    return paths


@main.command()
@click.option("--pipeline", "pipeline_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--dataset", "dataset_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@common_options
def audit(pipeline_path, dataset_path, repeats, seed, train_fraction, jobs,
          out_dir, fmt):
    """Audit every configured stage of a pipeline on a dataset."""
    try:
        ds_cfg = load_dataset_config(dataset_path)
        pipe_cfg = load_pipeline_config(pipeline_path)
        cfg = _experiment_config(ds_cfg, pipe_cfg, repeats, seed,
                                 train_fraction, jobs)
        outcome = run_stage_audit(cfg)
    except AllRepeatsFailed as exc:
        _fail(str(exc), EXIT_ALL_FAILED)
    except StageAuditError as exc:
        _fail(str(exc), EXIT_VALIDATION)
    report = rep.build_audit_report(
        outcome, rep.dataset_block(ds_cfg.name, cfg.dataset))
    base = f"audit_{ds_cfg.name}_{pipe_cfg.spec.name}"
    paths = _write_outputs(
        report, out_dir, base, fmt,
        csv_writers=[
            ("stages", lambda p: rep.write_stage_csv(outcome, p)),
            ("global", lambda p: rep.write_global_csv(outcome, p)),
        ])
    click.echo(rep.human_summary(
        outcome, f"audit: {pipe_cfg.spec.name} on {ds_cfg.name}"))
    for p in paths:
        click.echo(f"wrote {p}")


@main.command()
@click.option("--dataset", "dataset_paths", required=True, multiple=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--transformers", required=True,
              help="Comma-separated stage kinds to grid over.")
@click.option("--classifiers", required=True,
              help="Comma-separated classifier kinds.")
@common_options
def grid(dataset_paths, transformers, classifiers, repeats, seed,
         train_fraction, jobs, out_dir, fmt):
    """Audit transformers inserted into vanilla pipelines (dataset grid)."""
    t_kinds = [t.strip() for t in transformers.split(",") if t.strip()]
    c_kinds = [c.strip() for c in classifiers.split(",") if c.strip()]
    for t in t_kinds:
        if t not in STAGE_KINDS:
            _fail(f"unknown transformer kind {t!r}", EXIT_VALIDATION)
    for c in c_kinds:
        if c not in CLASSIFIER_KINDS:
            _fail(f"unknown classifier kind {c!r}", EXIT_VALIDATION)
    try:
        datasets = []
        first_cfg = None
        for path in dataset_paths:
            ds_cfg = load_dataset_config(path)
            first_cfg = first_cfg or ds_cfg
            datasets.append((ds_cfg.name, ds_cfg.load(), ds_cfg.prelude))
        t_descs = [StageDescriptor(kind=t) for t in t_kinds]
        c_descs = [ClassifierDescriptor(kind=c, seed=seed) for c in c_kinds]
        base_cfg = {"repeats": repeats, "base_seed": seed,
                    "train_fraction": train_fraction, "jobs": jobs}
        result = run_transformer_grid(datasets, t_descs, c_descs, base_cfg)
    except StageAuditError as exc:
        _fail(str(exc), EXIT_VALIDATION)
    echo = {"transformers": t_kinds, "classifiers": c_kinds, **base_cfg}
    report = rep.build_grid_report(
        result, rep.dataset_block(first_cfg.name, first_cfg.load()), echo)
    paths = _write_outputs(report, out_dir, "grid", "json")
    if fmt in ("csv", "both"):
        import csv as _csv
        path = os.path.join(out_dir, "grid_cells.csv")
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = _csv.writer(fh)
            w.writerow(["dataset", "transformer", "classifier"]
                       + [f"sf_{m}_mean" for m in METRIC_NAMES])
            for cell in result["cells"]:
                w.writerow([cell["dataset"], cell["transformer"],
                            cell["classifier"]]
                           + [cell["sf"][m]["mean"] for m in METRIC_NAMES])
        paths.append(path)
    click.echo(f"grid: {len(result['cells'])} cells, "
               f"{len(result['skipped'])} skipped")
    for s in result["skipped"]:
        click.echo(f"  skipped {s['dataset']}/{s['transformer']}"
                   f"/{s['classifier']}: {s['reason']}")
    for p in paths:
        click.echo(f"wrote {p}")


@main.command()
@click.option("--dataset", "dataset_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--upstream", required=True, help="Upstream stage kind.")
@click.option("--candidates", required=True,
              help="Comma-separated downstream stage kinds.")
@click.option("--classifier", default="k_neighbors", show_default=True)
@click.option("--metric", default="spd", show_default=True,
              type=click.Choice(list(METRIC_NAMES)))
@common_options
def mitigate(dataset_path, upstream, candidates, classifier, metric, repeats,
             seed, train_fraction, jobs, out_dir, fmt):
    """Rank downstream transformers by how well they mitigate global bias."""
    cand_kinds = [c.strip() for c in candidates.split(",") if c.strip()]
    if not cand_kinds:
        _fail("empty candidate list", EXIT_VALIDATION)
    for k in [upstream] + cand_kinds:
        if k not in STAGE_KINDS:
            _fail(f"unknown stage kind {k!r}", EXIT_VALIDATION)
    if classifier not in CLASSIFIER_KINDS:
        _fail(f"unknown classifier kind {classifier!r}", EXIT_VALIDATION)
    try:
        ds_cfg = load_dataset_config(dataset_path)
        dataset = ds_cfg.load()
        base_cfg = {"repeats": repeats, "base_seed": seed,
                    "train_fraction": train_fraction, "jobs": jobs}
        rec = recommend_downstream(
            dataset, ds_cfg.prelude, StageDescriptor(kind=upstream),
            [StageDescriptor(kind=k) for k in cand_kinds],
            ClassifierDescriptor(kind=classifier, seed=seed),
            base_cfg, metric=metric)
    except AllRepeatsFailed as exc:
        _fail(str(exc), EXIT_ALL_FAILED)
    except StageAuditError as exc:
        _fail(str(exc), EXIT_VALIDATION)
    echo = {"upstream": upstream, "candidates": cand_kinds,
            "classifier": classifier, "metric": metric, **base_cfg}
    report = rep.build_mitigation_report(
        rec, rep.dataset_block(ds_cfg.name, dataset), echo)
    paths = _write_outputs(report, out_dir,
                           f"mitigate_{ds_cfg.name}_{upstream}", "json")
    click.echo(f"upstream {upstream}: baseline |{metric}| = "
               f"{rec.baseline['abs_metric_mean']:.4f}")
    for c in rec.candidates:
        click.echo(f"  {c['candidate']:<24} |{metric}| = "
                   f"{c['abs_metric_mean']:.4f}  local SF_{metric} = "
                   f"{c['local_sf'][metric]:+.4f}")
    click.echo(f"winner: {rec.winner}")
    for p in paths:
        click.echo(f"wrote {p}")


@main.command("fetch-datasets")
@click.argument("names", nargs=-1, required=True)
@click.option("--out-dir", default="datasets", show_default=True,
              type=click.Path(file_okay=False))
@click.option("--offline", is_flag=True,
              help="Verify cached copies only; never touch the network.")
def fetch_datasets(names, out_dir, offline):
    """Download or verify benchmark datasets and write their configs."""
    try:
        for name in names:
            path = fetch_mod.fetch(name, out_dir, offline=offline)
            click.echo(f"{name}: ok ({path})")
    except StageAuditError as exc:
        _fail(str(exc), EXIT_VALIDATION)


@main.command("synth-datasets")
@click.option("--out-dir", default="datasets", show_default=True,
              type=click.Path(file_okay=False))
def synth_datasets(out_dir):
    """Generate the seeded synthetic stand-in datasets and configs."""
    for path in synthdata.generate(out_dir):
        click.echo(f"wrote {path}")


@main.command()
def stages():
    """List stage and classifier kinds with their default parameters."""
    from .transformers import _PARAM_DEFAULTS
    from .classifiers import _DEFAULTS
    click.echo("stage kinds:")
    for kind in STAGE_KINDS:
        click.echo(f"  {kind:<24} {_PARAM_DEFAULTS.get(kind, {})}")
    click.echo("classifier kinds:")
    for kind in CLASSIFIER_KINDS:
        click.echo(f"  {kind:<24} {_DEFAULTS[kind]}")


if __name__ == "__main__":
    main()
