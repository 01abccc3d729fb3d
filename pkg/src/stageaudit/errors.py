"""Exception hierarchy for the audit engine."""


class StageAuditError(Exception):
    """Base class for all engine errors."""


class ConfigError(StageAuditError):
    """Malformed or inconsistent configuration."""


class DataError(StageAuditError):
    """Dataset violates its declared schema or invariants."""


class MissingNotAllowed(DataError):
    """A cell is missing in a column that forbids missing values."""


class EmptyGroup(DataError):
    """Privileged or unprivileged group has no members."""


class NonBinaryLabel(DataError):
    """Label column does not map to a two-class problem."""


class StageError(StageAuditError):
    """A transformer stage cannot fit or apply."""

    def __init__(self, message, stage_index=None):
        if stage_index is not None:
            message = f"stage {stage_index}: {message}"
        super().__init__(message)
        self.stage_index = stage_index


class EmptyFeatureSet(StageError):
    """Feature selection removed every feature."""


class NoObservedValues(StageError):
    """An imputer's target column has no observed training values."""


class PipelineValidationError(StageAuditError):
    """A pipeline spec failed validation; carries the diagnostics."""

    def __init__(self, message, diagnostics=()):
        super().__init__(message)
        self.diagnostics = list(diagnostics)


class RemovalInvalidatesPipeline(PipelineValidationError):
    """Removing the target stage breaks the pipeline; use replace mode."""


class ReplacementIncompatible(PipelineValidationError):
    """The replacement stage does not validate in the target position."""


class AllRepeatsFailed(StageAuditError):
    """Every repeat of an experiment failed; nothing to aggregate."""


class FetchError(StageAuditError):
    """Dataset download or checksum verification failed."""
