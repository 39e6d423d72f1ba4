"""Scoring pipeline: indicators -> rubric composites -> maturity composite -> stage.

The composition is

    encode -> orient -> normalize_indicator -> compute_rubric_scores
           -> normalize_rubric_scores -> compute_gmf -> classify_stage

Every step is a pure function; :func:`run_pipeline` chains them and keeps
all intermediate matrices, warnings and weights in a :class:`ScoreReport`.
"""

from __future__ import annotations

import json
import math
import statistics
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Callable, Mapping, Sequence

from scipy.stats import rankdata

from .data import MISSING, Dataset, IndicatorDefinition, Polarity, Program, RubricId, encode_value
from .errors import (
    AllMissingRubricError, EmptyColumnError, GrantMaturityError, MissingValueError,
    OutOfRangeError, PipelineError, SchemaError,
)
from .findings import Finding, warning
from .weights import MissingPolicy, NormalizationMethod, ScoringConfig, WeightScheme

Matrix = dict[str, dict[str, "float | None"]]


class MaturityStage(Enum):
    EXPERIMENTAL = ("Experimental", 0.0, 0.25)
    FOUNDATIONAL = ("Foundational", 0.25, 0.5)
    DEVELOPMENTAL = ("Developmental", 0.5, 0.75)
    ADVANCED = ("Advanced", 0.75, 1.0)

    def __init__(self, label: str, lower: float, upper: float):
        self.label = label
        self.lower = lower
        self.upper = upper

    @property
    def range_text(self) -> str:
        closing = "<=" if self is MaturityStage.ADVANCED else "<"
        return f"{self.lower:g} <= GMF {closing} {self.upper:g}"

    @classmethod
    def from_label(cls, label: str) -> "MaturityStage":
        for stage in cls:
            if stage.label == label:
                return stage
        raise ValueError(f"unknown maturity stage {label!r}")

    def __str__(self) -> str:
        return self.label


def classify_stage(normalized_gmf: float) -> MaturityStage:
    """Quartile band of a composite in [0, 1]; the top band is closed at 1."""
    if not 0.0 <= normalized_gmf <= 1.0:
        raise OutOfRangeError(f"composite score {normalized_gmf!r} lies outside [0, 1]")
    if normalized_gmf < 0.25:
        return MaturityStage.EXPERIMENTAL
    if normalized_gmf < 0.5:
        return MaturityStage.FOUNDATIONAL
    if normalized_gmf < 0.75:
        return MaturityStage.DEVELOPMENTAL
    return MaturityStage.ADVANCED


# -- indicator level ---------------------------------------------------------

def orient_values(encoded: Mapping[str, Mapping[str, float | None]],
                  defs: Mapping[str, IndicatorDefinition]) -> Matrix:
    """Negate lower-better indicators so that larger always means more mature."""
    out: Matrix = {}
    for program, row in encoded.items():
        out[program] = {
            ind: (-x if x is not MISSING and defs[ind].polarity is Polarity.LOWER_BETTER else x)
            for ind, x in row.items()
        }
    return out


def normalize_indicator(column, method: NormalizationMethod = NormalizationMethod.MINMAX,
                        degenerate_value: float = 0.5, name: str | None = None):
    """Normalize one indicator column over its non-missing entries.

    ``column`` is a mapping of program id to value, or a plain sequence.
    Returns ``(values, warnings)`` with ``values`` in the same shape.
    A constant column maps to ``degenerate_value`` (0.0 for z-scores) and
    yields a ``degenerate_column`` warning.
    """
    keyed = isinstance(column, Mapping)
    items = list(column.items()) if keyed else list(enumerate(column))
    present = [(k, x) for k, x in items if x is not MISSING]
    if not present:
        raise EmptyColumnError(f"column {name!r} has no non-missing entries" if name
                               else "column has no non-missing entries")
    xs = [x for _, x in present]
    lo, hi = min(xs), max(xs)
    warnings: list[Finding] = []
    degenerate = lo == hi

    if degenerate:
        fill = 0.0 if method is NormalizationMethod.ZSCORE else degenerate_value
        mapped = [fill] * len(xs)
        warnings.append(warning("degenerate_column",
                                f"constant column ({lo!r}) mapped to {fill!r}", name))
    elif method is NormalizationMethod.MINMAX:
        span = hi - lo
        mapped = [(x - lo) / span for x in xs]
    elif method is NormalizationMethod.ZSCORE:
        mean = statistics.fmean(xs)
        sd = statistics.pstdev(xs)
        mapped = [(x - mean) / sd for x in xs]
    elif method is NormalizationMethod.RANK:
        ranks = rankdata(xs, method="average")
        mapped = [float((r - 1) / (len(xs) - 1)) for r in ranks]
    else:
        raise ValueError(f"unknown normalization method {method!r}")

    result = dict(zip((k for k, _ in present), mapped))
    values = [(k, result.get(k, MISSING)) for k, _ in items]
    if keyed:
        return dict(values), warnings
    return [v for _, v in values], warnings


# -- rubric level ------------------------------------------------------------

@dataclass(frozen=True)
class RubricScore:
    raw_crs: float
    normalized_crs: float | None = None
    contributions: tuple[tuple[str, float], ...] = ()
    missing: tuple[str, ...] = ()

    @property
    def renormalized(self) -> bool:
        return bool(self.missing)


@dataclass(frozen=True)
class RubricScoreMatrix:
    entries: Mapping[str, Mapping[RubricId, RubricScore]]

    @property
    def programs(self) -> list[str]:
        return list(self.entries)

    @property
    def rubrics(self) -> list[RubricId]:
        first = next(iter(self.entries.values()), {})
        return [r for r in RubricId if r in first]

    def __getitem__(self, key: tuple[str, RubricId]) -> RubricScore:
        program, rubric = key
        return self.entries[program][rubric]

    def raw(self, program: str, rubric: RubricId) -> float:
        return self.entries[program][rubric].raw_crs

    def normalized(self, program: str, rubric: RubricId) -> float | None:
        return self.entries[program][rubric].normalized_crs


def compute_rubric_scores(normalized: Mapping[str, Mapping[str, float | None]], scheme: WeightScheme,
                          missing_policy: MissingPolicy = MissingPolicy.RENORMALIZE) -> RubricScoreMatrix:
    """Weighted sum of normalized indicators within each rubric.

    When some indicators are missing for a program, the weights of the
    present ones are rescaled to sum to one and the entry records which
    indicators were dropped.
    """
    entries: dict[str, dict[RubricId, RubricScore]] = {}
    groups = [(rubric, scheme.indicator_weights[rubric]) for rubric in scheme.rubrics]
    for program, row in normalized.items():
        entries[program] = {}
        for rubric, group in groups:
            present = [(ind, w, row[ind]) for ind, w in group.items() if row[ind] is not MISSING]
            missing = tuple(ind for ind in group if row[ind] is MISSING)
            where = f"program={program}, rubric={rubric.value}"
            if missing and missing_policy is MissingPolicy.STRICT:
                raise MissingValueError(f"{where}: missing values for {', '.join(missing)}")
            total = sum(w for _, w, _ in present)
            if not present or total <= 0:
                raise AllMissingRubricError(f"{where}: no weighted indicator has a value")
            if missing:
                present = [(ind, w / total, x) for ind, w, x in present]
            raw = sum(w * x for _, w, x in present)
            entries[program][rubric] = RubricScore(
                raw_crs=raw,
                contributions=tuple((ind, w) for ind, w, _ in present),
                missing=missing,
            )
    return RubricScoreMatrix(entries)


def normalize_rubric_scores(matrix: RubricScoreMatrix, degenerate_value: float = 0.5
                            ) -> tuple[RubricScoreMatrix, list[Finding]]:
    """Min-max each rubric column of raw composites across programs."""
    entries = {p: dict(row) for p, row in matrix.entries.items()}
    warnings: list[Finding] = []
    for rubric in matrix.rubrics:
        column = {p: row[rubric].raw_crs for p, row in entries.items()}
        scaled, found = normalize_indicator(column, NormalizationMethod.MINMAX, degenerate_value,
                                            name=f"rubric {rubric.value}")
        warnings.extend(found)
        for p, value in scaled.items():
            e = entries[p][rubric]
            entries[p][rubric] = RubricScore(e.raw_crs, value, e.contributions, e.missing)
    return RubricScoreMatrix(entries), warnings


# -- program level -----------------------------------------------------------

@dataclass(frozen=True)
class MaturityScore:
    program: str
    additive_gmf: float
    normalized_gmf: float
    stage: MaturityStage | None = None


def compute_gmf(matrix: RubricScoreMatrix, scheme: WeightScheme) -> list[MaturityScore]:
    scores = []
    rubrics = matrix.rubrics
    for program in matrix.programs:
        terms = [(w, matrix.normalized(program, r)) for r, w in scheme.rubric_weights.items() if w > 0]
        weighted = math.fsum(w * x for w, x in terms) / math.fsum(w for w, _ in terms)
        # a weighted mean never leaves the range of its terms; rounding can
        lo = min(x for _, x in terms)
        hi = max(x for _, x in terms)
        weighted = min(hi, max(lo, weighted))
        additive = sum(matrix.raw(program, r) for r in rubrics)
        scores.append(MaturityScore(program, additive, weighted))
    return scores


# -- report ------------------------------------------------------------------

@dataclass(frozen=True)
class ScoreReport:
    programs: tuple[Program, ...]
    rubrics: tuple[RubricId, ...]
    scheme: WeightScheme
    method: NormalizationMethod
    missing_policy: MissingPolicy
    degenerate_value: float
    encoded: Matrix
    oriented: Matrix
    normalized: Matrix
    rubric_scores: RubricScoreMatrix
    scores: tuple[MaturityScore, ...]
    warnings: tuple[Finding, ...] = ()
    steps: tuple[dict, ...] = field(default=(), compare=False)

    def score(self, program: str) -> MaturityScore:
        for s in self.scores:
            if s.program == program:
                return s
        raise KeyError(program)

    def gmf(self) -> dict[str, float]:
        return {s.program: s.normalized_gmf for s in self.scores}

    def stages(self) -> dict[str, MaturityStage]:
        return {s.program: s.stage for s in self.scores}

    def to_dict(self) -> dict:
        rubric_scores = {
            p: {r.value: {"raw": e.raw_crs, "normalized": e.normalized_crs} for r, e in row.items()}
            for p, row in self.rubric_scores.entries.items()
        }
        entries = {
            p: {r.value: {"contributions": [[ind, w] for ind, w in e.contributions],
                          "missing": list(e.missing),
                          "missing_renormalized": e.renormalized}
                for r, e in row.items()}
            for p, row in self.rubric_scores.entries.items()
        }
        return {
            "programs": [{"id": p.id, "name": p.name, "ecosystem": p.ecosystem,
                          "metadata": dict(p.metadata)} for p in self.programs],
            "rubrics": [r.value for r in self.rubrics],
            "settings": {
                "normalization": self.method.value,
                "missing_policy": self.missing_policy.value,
                "degenerate_value": self.degenerate_value,
                "weights": self.scheme.to_dict(),
            },
            "rubric_scores": rubric_scores,
            "gmf": {s.program: {"additive": s.additive_gmf, "normalized": s.normalized_gmf,
                                "stage": s.stage.label} for s in self.scores},
            "warnings": [w.to_dict() for w in self.warnings],
            "provenance": {
                "steps": list(self.steps),
                "rubric_entries": entries,
                "encoded": self.encoded,
                "oriented": self.oriented,
                "normalized": self.normalized,
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n"

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> "ScoreReport":
        try:
            prov = doc["provenance"]
            settings = doc["settings"]
            entries = {}
            for p, row in doc["rubric_scores"].items():
                entries[p] = {}
                for r, vals in row.items():
                    meta = prov["rubric_entries"][p][r]
                    entries[p][RubricId(r)] = RubricScore(
                        vals["raw"], vals["normalized"],
                        tuple((ind, w) for ind, w in meta["contributions"]),
                        tuple(meta["missing"]),
                    )
            return cls(
                programs=tuple(Program(p["id"], p["name"], p.get("ecosystem", ""), dict(p.get("metadata", {})))
                               for p in doc["programs"]),
                rubrics=tuple(RubricId(r) for r in doc["rubrics"]),
                scheme=WeightScheme.from_dict(settings["weights"]),
                method=NormalizationMethod(settings["normalization"]),
                missing_policy=MissingPolicy(settings["missing_policy"]),
                degenerate_value=settings["degenerate_value"],
                encoded=prov["encoded"],
                oriented=prov["oriented"],
                normalized=prov["normalized"],
                rubric_scores=RubricScoreMatrix(entries),
                scores=tuple(MaturityScore(p, g["additive"], g["normalized"], MaturityStage.from_label(g["stage"]))
                             for p, g in doc["gmf"].items()),
                warnings=tuple(Finding.from_dict(w) for w in doc["warnings"]),
                steps=tuple(prov["steps"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"malformed score report: {exc}", "report") from None


# -- pipeline ----------------------------------------------------------------

def _step(name: str, fn: Callable, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except GrantMaturityError as exc:
        raise PipelineError(name, exc) from exc


def _encode(dataset: Dataset) -> Matrix:
    defs = dataset.indicator_map
    return {p: {d.id: encode_value(dataset.value(p, d.id), defs[d.id]) for d in dataset.indicators}
            for p in dataset.program_ids}


def _normalize_columns(oriented: Matrix, indicators: Sequence[IndicatorDefinition],
                       method: NormalizationMethod, degenerate_value: float):
    out: Matrix = {p: {} for p in oriented}
    warnings: list[Finding] = []
    for d in indicators:
        column = {p: row[d.id] for p, row in oriented.items()}
        scaled, found = normalize_indicator(column, method, degenerate_value, name=d.id)
        warnings.extend(found)
        for p, x in scaled.items():
            out[p][d.id] = x
    return out, warnings


def run_pipeline(dataset: Dataset, scheme: WeightScheme | None = None,
                 method: NormalizationMethod = NormalizationMethod.MINMAX,
                 missing_policy: MissingPolicy = MissingPolicy.RENORMALIZE,
                 degenerate_value: float = 0.5) -> ScoreReport:
    """Score every program of ``dataset``.

    ``scheme`` defaults to equal weights. Errors from any step surface as
    :class:`PipelineError` naming the step.
    """
    report = dataset.validation
    if not report.ok:
        raise PipelineError("validate", SchemaError("; ".join(str(f) for f in report.errors)))
    if scheme is None:
        scheme = _step("weights", WeightScheme.equal, dataset)
    scored = dataset.scored_indicators()
    weighted = {i for g in scheme.indicator_weights.values() for i in g}
    scored_ids = {d.id for d in scored}
    if weighted != scored_ids:
        raise PipelineError("weights", SchemaError(
            f"weight scheme does not match the scored indicators "
            f"(unweighted: {sorted(scored_ids - weighted)}, unknown: {sorted(weighted - scored_ids)})"))

    encoded = _step("encode", _encode, dataset)
    oriented = _step("orient", orient_values, encoded, dataset.indicator_map)
    normalized, warnings = _step("normalize_indicator", _normalize_columns,
                                 oriented, scored, method, degenerate_value)
    matrix = _step("compute_rubric_scores", compute_rubric_scores, normalized, scheme, missing_policy)
    matrix, rubric_warnings = _step("normalize_rubric_scores", normalize_rubric_scores, matrix, degenerate_value)
    warnings += rubric_warnings
    for p, row in matrix.entries.items():
        for r, e in row.items():
            if e.missing:
                warnings.append(warning("missing_renormalized",
                                        f"weights renormalized over present indicators; missing: {', '.join(e.missing)}",
                                        f"program={p}, rubric={r.value}"))
    scores = _step("compute_gmf", compute_gmf, matrix, scheme)
    scores = [replace(s, stage=_step("classify_stage", classify_stage, s.normalized_gmf)) for s in scores]

    steps = (
        {"step": "encode", "detail": "boolean -> 0/1, ordinal -> level index / (levels - 1), numeric unchanged"},
        {"step": "orient", "detail": "lower_better indicators negated",
         "lower_better": [d.id for d in dataset.indicators if d.polarity is Polarity.LOWER_BETTER]},
        {"step": "normalize_indicator", "method": method.value, "degenerate_value": degenerate_value,
         "indicators": [d.id for d in scored],
         "descriptive_excluded": [d.id for d in dataset.indicators if d.descriptive]},
        {"step": "compute_rubric_scores", "missing_policy": missing_policy.value},
        {"step": "normalize_rubric_scores", "method": NormalizationMethod.MINMAX.value},
        {"step": "compute_gmf", "rubric_weights": {r.value: w for r, w in scheme.rubric_weights.items()}},
        {"step": "classify_stage", "bands": {s.label: s.range_text for s in MaturityStage}},
    )
    return ScoreReport(
        programs=dataset.programs,
        rubrics=tuple(scheme.rubrics),
        scheme=scheme,
        method=method,
        missing_policy=missing_policy,
        degenerate_value=degenerate_value,
        encoded=encoded,
        oriented=oriented,
        normalized=normalized,
        rubric_scores=matrix,
        scores=tuple(scores),
        warnings=tuple(warnings),
        steps=steps,
    )


def score_dataset(dataset: Dataset, config: ScoringConfig | None = None) -> ScoreReport:
    """Run the pipeline with the weights and options of a :class:`ScoringConfig`."""
    config = config or ScoringConfig()
    scheme = _step("weights", config.scheme, dataset)
    return run_pipeline(dataset, scheme, config.normalization, config.missing_policy, config.degenerate_value)
