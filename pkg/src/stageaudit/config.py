"""Declarative TOML configs for datasets and pipelines."""

from __future__ import annotations

import os
from dataclasses import dataclass, field

try:
    import tomllib
except ImportError:  # Python < 3.11
    import tomli as tomllib

from .classifiers import ClassifierDescriptor
from .data import ColumnSchema, Dataset, GroupSpec, load_csv
from .errors import ConfigError
from .pipeline import AblationPlan, PipelineSpec
from .transformers import StageDescriptor


def _read(path) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def _require(table: dict, key: str, where: str):
    if key not in table:
        raise ConfigError(f"{where}: missing required key {key!r}")
    return table[key]


@dataclass
class DatasetConfig:
    name: str
    csv_path: str
    schema: tuple
    group: GroupSpec
    label_column: str
    missing_tokens: tuple
    label_replacements: dict
    include_sensitive: bool
    prelude: tuple = ()  # base stages for vanilla pipelines (grid/mitigate)
    dataset: Dataset = field(default=None, repr=False)

    def load(self) -> Dataset:
        if self.dataset is None:
            self.dataset = load_csv(
                self.csv_path, self.schema, self.label_column, self.group,
                missing_tokens=self.missing_tokens,
                label_replacements=self.label_replacements,
                include_sensitive=self.include_sensitive)
        return self.dataset


def _stage_from_table(t: dict, where: str) -> StageDescriptor:
    kind = _require(t, "kind", where)
    return StageDescriptor(
        kind=kind,
        params=dict(t.get("params", {})),
        columns=tuple(t["columns"]) if "columns" in t else None,
        name=t.get("name"),
        seed=int(t.get("seed", 0)),
    )


def load_dataset_config(path) -> DatasetConfig:
    raw = _read(path)
    d = _require(raw, "dataset", path)
    name = _require(d, "name", f"{path}[dataset]")
    csv_rel = _require(d, "csv", f"{path}[dataset]")
    csv_path = os.path.join(os.path.dirname(os.path.abspath(path)), csv_rel)
    columns = _require(d, "columns", f"{path}[dataset]")
    schema = tuple(
        ColumnSchema(_require(c, "name", "column"),
                     _require(c, "kind", "column"),
                     bool(c.get("allowed_missing", False)))
        for c in columns)
    g = _require(d, "group", f"{path}[dataset]")
    group = GroupSpec(
        sensitive_column=_require(g, "sensitive_column", "group"),
        privileged_values=frozenset(
            str(v) for v in _require(g, "privileged_values", "group")),
        favorable_label=str(_require(d, "favorable_label", f"{path}[dataset]")),
    )
    prelude = tuple(_stage_from_table(t, f"{path}[dataset.prelude]")
                    for t in d.get("prelude", []))
    return DatasetConfig(
        name=name,
        csv_path=csv_path,
        schema=schema,
        group=group,
        label_column=_require(d, "label_column", f"{path}[dataset]"),
        missing_tokens=tuple(d.get("missing_tokens", ["", "NA", "?"])),
        label_replacements={str(k): str(v) for k, v in
                            d.get("label_replacements", {}).items()},
        include_sensitive=bool(d.get("include_sensitive", True)),
        prelude=prelude,
    )


@dataclass
class PipelineConfig:
    spec: PipelineSpec
    audit_targets: tuple      # stage display names to audit
    replace_rules: dict       # target name -> replacement StageDescriptor|None

    def ablation_plans(self) -> tuple:
        plans = []
        for target in self.audit_targets:
            idx = self.spec.stage_index(target)
            if target in self.replace_rules:
                plans.append(AblationPlan(
                    index=idx, mode="replace",
                    replacement=self.replace_rules[target]))
            else:
                plans.append(AblationPlan(index=idx))
        return tuple(plans)


def load_pipeline_config(path) -> PipelineConfig:
    raw = _read(path)
    p = _require(raw, "pipeline", path)
    name = _require(p, "name", f"{path}[pipeline]")
    stages = tuple(_stage_from_table(t, f"{path}[pipeline.stages]")
                   for t in p.get("stages", []))
    c = _require(p, "classifier", f"{path}[pipeline]")
    classifier = ClassifierDescriptor(
        kind=_require(c, "kind", "classifier"),
        params=dict(c.get("params", {})),
        seed=int(c.get("seed", 0)),
    )
    spec = PipelineSpec(stages, classifier, name=name)
    audit = p.get("audit", {})
    targets = tuple(audit.get("targets",
                              [s.display_name for s in stages]))
    for t in targets:
        spec.stage_index(t)  # raises ConfigError for unknown names
    replace_rules = {}
    for rule in audit.get("replace", []):
        target = _require(rule, "target", "audit.replace")
        spec.stage_index(target)
        repl = rule.get("replacement")
        replace_rules[target] = (_stage_from_table(repl, "replacement")
                                 if repl else None)
    # replace rules without an explicit replacement fall back to the encoder
    # reference default inside ablate()
    return PipelineConfig(spec=spec, audit_targets=targets,
                          replace_rules=replace_rules)
