"""Exception hierarchy shared by every stage of the engine."""

from __future__ import annotations


class GrantMaturityError(Exception):
    """Base class for all engine errors."""


class DatasetSyntaxError(GrantMaturityError):
    """Malformed input file. Carries the line (and column, when known)."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f" (line {line}" + (f", column {column}" if column is not None else "") + ")"
        super().__init__(message + where)


class SchemaError(GrantMaturityError):
    """Well-formed input that breaks the document schema.

    ``record`` names the offending record, e.g. ``values[3]`` or
    ``program=taiko, indicator=grant_count``.
    """

    def __init__(self, message: str, record: str | None = None):
        self.record = record
        self.detail = message
        super().__init__(f"{record}: {message}" if record else message)


class KindMismatchError(SchemaError):
    """A value variant disagrees with the indicator's declared kind."""


class EmptyColumnError(GrantMaturityError):
    """Every entry of an indicator column is missing."""


class AllMissingRubricError(GrantMaturityError):
    """A program has no usable indicator value inside one rubric."""


class MissingValueError(GrantMaturityError):
    """A missing value was met under the strict missing-value policy."""


class OutOfRangeError(GrantMaturityError, ValueError):
    """A composite score outside [0, 1] was passed to the stage classifier."""


class EmptyPanelError(GrantMaturityError):
    """Aggregation was requested over zero evaluator responses."""


class InvalidResponseError(GrantMaturityError):
    """An evaluator response failed validation."""


class PipelineError(GrantMaturityError):
    """Wraps a failure inside run_pipeline and records which step raised it."""

    def __init__(self, step: str, cause: Exception):
        self.step = step
        self.cause = cause
        super().__init__(f"pipeline step '{step}' failed: {cause}")
