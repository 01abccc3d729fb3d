"""stageaudit: fairness auditing of tabular ML pipelines by stage ablation.

Measures how each preprocessing stage shifts group fairness of the final
prediction by comparing a trained pipeline against its stage-ablated twin,
and searches downstream transformers that mitigate bias.
"""

__version__ = "0.1.0"

from ._core import BACKEND
from .classifiers import ClassifierDescriptor
from .data import Dataset, GroupCounts, GroupSpec, SplitPair, load_csv, split
from .harness import ExperimentConfig, run_stage_audit
from .metrics import GlobalFairness, PredictionSet, global_fairness
from .pipeline import AblationPlan, PipelineSpec, ablate, validate
from .stagefair import PredictionTriples, StageFairnessReport, stage_report
from .transformers import StageDescriptor

__all__ = [
    "__version__",
    "BACKEND",
    "AblationPlan",
    "ClassifierDescriptor",
    "Dataset",
    "ExperimentConfig",
    "GlobalFairness",
    "GroupCounts",
    "GroupSpec",
    "PipelineSpec",
    "PredictionSet",
    "PredictionTriples",
    "SplitPair",
    "StageDescriptor",
    "StageFairnessReport",
    "ablate",
    "global_fairness",
    "load_csv",
    "run_stage_audit",
    "split",
    "stage_report",
    "validate",
]
