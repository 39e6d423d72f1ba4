"""Composite maturity scoring for grant programs."""

from .data import (
    MISSING, Dataset, IndicatorDefinition, IndicatorValue, Polarity, Program, RubricId, ValueKind,
    encode_value, parse_dataset, serialize_dataset, validate_dataset,
)
from .delphi import CentralStatistic, EvaluatorResponse, aggregate_responses, parse_responses, validate_response
from .errors import GrantMaturityError, PipelineError
from .scoring import (
    MaturityStage, ScoreReport, classify_stage, compute_gmf, compute_rubric_scores, normalize_indicator,
    normalize_rubric_scores, orient_values, run_pipeline, score_dataset,
)
from .sensitivity import PerturbationConfig, compare_normalizations, leave_one_out, perturb_weights
from .weights import MissingPolicy, NormalizationMethod, ScoringConfig, WeightScheme

__version__ = "0.1.0"

__all__ = [
    "MISSING", "Dataset", "IndicatorDefinition", "IndicatorValue", "Polarity", "Program", "RubricId",
    "ValueKind", "encode_value", "parse_dataset", "serialize_dataset", "validate_dataset",
    "CentralStatistic", "EvaluatorResponse", "aggregate_responses", "parse_responses", "validate_response",
    "GrantMaturityError", "PipelineError",
    "MaturityStage", "ScoreReport", "classify_stage", "compute_gmf", "compute_rubric_scores",
    "normalize_indicator", "normalize_rubric_scores", "orient_values", "run_pipeline", "score_dataset",
    "PerturbationConfig", "compare_normalizations", "leave_one_out", "perturb_weights",
    "MissingPolicy", "NormalizationMethod", "ScoringConfig", "WeightScheme",
]
