"""Pipeline assembly, plan-time validation, fitting, and stage ablation."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import classifiers
from .classifiers import ClassifierDescriptor
from .data import Dataset, SplitPair
from .errors import (ConfigError, RemovalInvalidatesPipeline,
                     ReplacementIncompatible, StageError)
from .frame import CATEGORICAL, NUMERIC, Frame
from .transformers import (ENCODER_KINDS, SAMPLER_KINDS, SELECTOR_KINDS,
                           StageDescriptor, fit_stage, resample_train,
                           resolve_targets)


@dataclass(frozen=True)
class PipelineSpec:
    stages: tuple
    classifier: ClassifierDescriptor
    name: str = "pipeline"

    def __post_init__(self):
        object.__setattr__(self, "stages", tuple(self.stages))
        names = [s.display_name for s in self.stages]
        if len(set(names)) != len(names):
            raise ConfigError(f"stage names must be unique: {names}")

    def stage_index(self, name: str) -> int:
        for i, s in enumerate(self.stages):
            if s.display_name == name:
                return i
        raise ConfigError(f"no stage named {name!r} "
                          f"(have {[s.display_name for s in self.stages]})")


@dataclass(frozen=True)
class AblationPlan:
    index: int
    mode: str = "remove"  # remove | replace
    replacement: StageDescriptor | None = None

    def __post_init__(self):
        if self.mode not in ("remove", "replace"):
            raise ConfigError(f"unknown ablation mode {self.mode!r}")
        if self.mode == "remove" and self.replacement is not None:
            raise ConfigError("remove mode forbids a replacement stage")


@dataclass(frozen=True)
class Diagnostic:
    code: str
    severity: str  # "error" | "warning"
    stage_index: int | None
    message: str


# plan-time column state: name -> [kind, may_be_missing]


def _initial_state(dataset: Dataset) -> dict:
    allowed = {cs.name: cs.allowed_missing for cs in dataset.schema}
    return {c.name: [c.kind, allowed.get(c.name, False)]
            for c in dataset.frame.columns}


def _numeric_targets(desc, state):
    if desc.columns is not None:
        return list(desc.columns)
    return [n for n, (k, _) in state.items() if k == NUMERIC]


def _categorical_targets(desc, state):
    if desc.columns is not None:
        return list(desc.columns)
    return [n for n, (k, _) in state.items() if k == CATEGORICAL]


_NUMERIC_KINDS = {"zscore", "minmax", "maxabs", "robust", "normalizer",
                  "quantile_mapper", "power_mapper", "pca", "kbins",
                  "binarize"} | set(SELECTOR_KINDS)


def validate(spec: PipelineSpec, dataset: Dataset) -> list[Diagnostic]:
    """Plan-time diagnostics; never raises for plan-level issues."""
    diags: list[Diagnostic] = []
    state = _initial_state(dataset)
    aux_names = set(dataset.raw)

    def err(code, i, msg):
        diags.append(Diagnostic(code, "error", i, msg))

    if not spec.stages:
        diags.append(Diagnostic("EmptyStageList", "warning", None,
                                "pipeline has no preprocessing stages"))

    for i, desc in enumerate(spec.stages):
        kind = desc.kind
        if desc.columns is not None and kind != "row_filter":
            unknown = [c for c in desc.columns if c not in state]
            if unknown:
                err("UnknownColumn", i,
                    f"{kind}: column(s) {unknown} not present at stage {i}")
                continue
        if kind in _NUMERIC_KINDS or kind in SAMPLER_KINDS:
            targets = (list(state) if kind in SAMPLER_KINDS
                       else _numeric_targets(desc, state))
            for t in targets:
                k, miss = state[t]
                if k != NUMERIC:
                    err("NonNumericInput", i,
                        f"{kind}: categorical column {t!r} reaches a "
                        "numeric-only stage")
                elif miss:
                    err("MissingReachesStage", i,
                        f"{kind}: column {t!r} may be missing; impute or "
                        "drop first")
            if kind == "pca":
                for t in _numeric_targets(desc, state):
                    state.pop(t, None)
                for j in range(desc.params["n_components"]):
                    state[f"pc{j + 1}"] = [NUMERIC, False]
            # selectors keep an unknown subset; plan-time state is unchanged
        elif kind in ("onehot", "ordinal_label"):
            for t in _categorical_targets(desc, state):
                k, miss = state[t]
                if k != CATEGORICAL:
                    err("NonCategoricalInput", i,
                        f"{kind}: numeric column {t!r} cannot be encoded "
                        "as categorical")
                elif miss:
                    err("MissingReachesStage", i,
                        f"{kind}: column {t!r} may be missing")
                elif kind == "onehot":
                    state.pop(t)
                    state[f"{t}=*"] = [NUMERIC, False]
                else:
                    state[t] = [NUMERIC, False]
        elif kind == "imputer":
            strategy = desc.params["strategy"]
            if desc.columns is not None:
                targets = list(desc.columns)
            elif strategy == "most_frequent":
                targets = list(state)
            else:
                targets = _numeric_targets(desc, state)
            for t in targets:
                k, _ = state[t]
                if strategy in ("mean", "median") and k != NUMERIC:
                    err("NonNumericInput", i,
                        f"imputer[{strategy}]: column {t!r} is categorical")
                else:
                    state[t][1] = False
        elif kind == "drop_missing":
            for t in (desc.columns or list(state)):
                state[t][1] = False
        elif kind == "row_filter":
            for pred in desc.params["predicates"]:
                c = pred["column"]
                if c not in state and c not in aux_names:
                    err("UnknownColumn", i,
                        f"row_filter: unknown column {c!r}")
                elif c in state and state[c][0] == CATEGORICAL \
                        and pred["op"] in ("le", "ge"):
                    err("NonNumericInput", i,
                        f"row_filter: ordering predicate on categorical {c!r}")
        elif kind == "value_replace":
            c = desc.params["column"]
            if c not in state:
                err("UnknownColumn", i, f"value_replace: unknown column {c!r}")
            elif state[c][0] != CATEGORICAL:
                err("NonCategoricalInput", i,
                    f"value_replace: column {c!r} is numeric")
        elif kind == "column_drop":
            gone = list(desc.params["drop"]) or list(desc.columns or ())
            for c in gone:
                if c not in state:
                    err("UnknownColumn", i,
                        f"column_drop: unknown column {c!r}")
                else:
                    state.pop(c)
        # noop: no effect

    for name, (kind, miss) in state.items():
        if kind == CATEGORICAL:
            diags.append(Diagnostic(
                "CategoricalReachesClassifier", "error", None,
                f"column {name!r} reaches the classifier unencoded"))
        elif miss:
            diags.append(Diagnostic(
                "MissingReachesClassifier", "error", None,
                f"column {name!r} may reach the classifier with missing "
                "values"))
    return diags


def validation_errors(spec: PipelineSpec, dataset: Dataset) -> list[Diagnostic]:
    return [d for d in validate(spec, dataset) if d.severity == "error"]


_ENCODER_REPLACEABLE = ("onehot", "ordinal_label")


def ablate(spec: PipelineSpec, plan: AblationPlan,
           dataset: Dataset | None = None) -> PipelineSpec:
    """Build the counterfactual spec with exactly one stage removed/replaced.

    With a dataset given, the result is validated; removals that break the
    pipeline raise RemovalInvalidatesPipeline (use replace mode instead).
    """
    if not 0 <= plan.index < len(spec.stages):
        raise IndexError(f"stage index {plan.index} out of range "
                         f"(pipeline has {len(spec.stages)} stages)")
    target = spec.stages[plan.index]
    stages = list(spec.stages)
    if plan.mode == "remove":
        del stages[plan.index]
    else:
        replacement = plan.replacement
        if replacement is None:
            if target.kind not in _ENCODER_REPLACEABLE:
                raise ConfigError(
                    f"no default reference stage for kind {target.kind!r}; "
                    "provide an explicit replacement")
            replacement = StageDescriptor(
                "onehot", columns=target.columns,
                name=f"{target.display_name}__ref", seed=target.seed)
        stages[plan.index] = replacement
    new_spec = PipelineSpec(tuple(stages), spec.classifier,
                            name=f"{spec.name}~{target.display_name}")
    if dataset is not None:
        errors = validation_errors(new_spec, dataset)
        if errors:
            detail = "; ".join(d.message for d in errors)
            if plan.mode == "remove":
                raise RemovalInvalidatesPipeline(
                    f"removing stage {target.display_name!r} invalidates the "
                    f"pipeline ({detail}); use replace mode with a reference "
                    "stage", errors)
            raise ReplacementIncompatible(
                f"replacement for {target.display_name!r} does not validate "
                f"({detail})", errors)
    return new_spec


@dataclass
class FittedPipeline:
    spec: PipelineSpec
    fitted_stages: list
    classifier: classifiers.FittedClassifier
    split_fingerprint: str
    context_seed: int
    feature_names: list[str]
    train_matrix: np.ndarray = field(repr=False)
    train_y: np.ndarray = field(repr=False)
    warnings: list = field(default_factory=list)
    fit_notes: list = field(default_factory=list)

    def apply(self, frame: Frame, aux=None):
        """Run the fitted preprocessing on a frame (samplers skipped)."""
        keep = np.arange(frame.n_rows)
        notes = []
        for fitted in self.fitted_stages:
            if fitted is None:  # sampler placeholder: train-only
                continue
            frame, local_keep, note = fitted.transform(frame, aux)
            if local_keep is not None:
                keep = keep[local_keep]
                if aux is not None:
                    aux = {k: v[local_keep] for k, v in aux.items()}
            if note:
                notes.append((fitted.descriptor.display_name, note))
        return frame, keep, notes

    def predict(self, frame: Frame, aux=None):
        """Predicted labels and the surviving-row indices of `frame`."""
        out, keep, _ = self.apply(frame, aux)
        X = out.matrix()
        if X.shape[1] != len(self.feature_names):
            raise StageError(
                f"test frame produced {X.shape[1]} features; "
                f"training produced {len(self.feature_names)}")
        return self.classifier.predict(X), keep


def fit(spec: PipelineSpec, split: SplitPair, context_seed: int = 0,
        check: bool = True) -> FittedPipeline:
    """Fit stages sequentially on the training partition, then the classifier.

    Samplers resample the training rows only. `context_seed` (typically the
    repeat's split seed) is folded into every stage/classifier seed so that a
    pipeline and its ablation stay paired within a repeat.
    """
    if check:
        errors = validation_errors(spec, split.train)
        if errors:
            detail = "; ".join(d.message for d in errors)
            raise StageError(f"pipeline {spec.name!r} does not validate: "
                             f"{detail}")
    frame = split.train.frame
    y = split.train.y.copy()
    priv = split.train.priv.copy()
    aux = dict(split.train.raw)
    fitted_stages = []
    warnings_log = []
    fit_notes = []
    for i, desc in enumerate(spec.stages):
        rng = np.random.default_rng(
            np.random.SeedSequence([desc.seed, context_seed]))
        try:
            if desc.is_sampler():
                frame, y, priv = resample_train(desc, frame, y, priv, rng)
                aux = None  # synthetic rows have no raw tokens
                fitted_stages.append(None)
                continue
            fitted = fit_stage(desc, frame, y, rng)
            frame, local_keep, note = fitted.transform(frame, aux)
            if local_keep is not None:
                y = y[local_keep]
                priv = priv[local_keep]
                if aux is not None:
                    aux = {k: v[local_keep] for k, v in aux.items()}
            if note:
                fit_notes.append((desc.display_name, note))
            for w in fitted.warnings:
                warnings_log.append(f"{desc.display_name}: {w}")
            fitted_stages.append(fitted)
        except StageError as exc:
            if exc.stage_index is None:
                raise type(exc)(str(exc), stage_index=i) from exc
            raise
    if len(y) == 0:
        raise StageError("no training rows remain after preprocessing")
    X = frame.matrix()
    clf = classifiers.fit(spec.classifier, X, y,
                          context_seed=context_seed)
    return FittedPipeline(
        spec=spec,
        fitted_stages=fitted_stages,
        classifier=clf,
        split_fingerprint=split.fingerprint(),
        context_seed=context_seed,
        feature_names=frame.names,
        train_matrix=X,
        train_y=y,
        warnings=warnings_log,
        fit_notes=fit_notes,
    )
