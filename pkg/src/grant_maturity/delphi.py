"""Expert questionnaire responses and their aggregation into rubric scores.

Evaluators score subcategories of each rubric on a continuous 1-5 scale.
Aggregation is two-step: subcategory scores are averaged within each
evaluator, then a central statistic is taken across evaluators.
"""

from __future__ import annotations

import json
import math
import statistics
from dataclasses import dataclass, field
from enum import Enum
from typing import IO, Any, Iterable, Mapping

from .data import RubricId, load_json_document, parse_rubric
from .errors import EmptyPanelError, InvalidResponseError, SchemaError
from .findings import Finding, ValidationReport, error, warning

SCALE_MIN = 1.0
SCALE_MAX = 5.0
DEFAULT_CONSENSUS_THRESHOLD = 1.0


class CentralStatistic(str, Enum):
    MEAN = "mean"
    MEDIAN = "median"


@dataclass(frozen=True)
class EvaluatorResponse:
    evaluator_id: str
    scores: Mapping[RubricId, Mapping[str, float]]
    overall_justification: str
    comments: Mapping[tuple[RubricId, str], str] = field(default_factory=dict)
    affiliation: str | None = None

    def category_score(self, rubric: RubricId) -> float | None:
        subs = self.scores.get(rubric)
        if not subs:
            return None
        return statistics.mean(subs.values())

    def to_dict(self) -> dict:
        comments: dict[str, dict[str, str]] = {}
        for (rubric, sub), text in self.comments.items():
            comments.setdefault(rubric.value, {})[sub] = text
        doc: dict[str, Any] = {"evaluator_id": self.evaluator_id}
        if self.affiliation is not None:
            doc["affiliation"] = self.affiliation
        doc["scores"] = {r.value: dict(s) for r, s in self.scores.items()}
        doc["comments"] = comments
        doc["overall_justification"] = self.overall_justification
        return doc


def _parse_response(doc: Any, index: int) -> EvaluatorResponse:
    record = f"responses[{index}]"
    if not isinstance(doc, dict):
        raise SchemaError("expected an object", record)
    allowed = {"evaluator_id", "affiliation", "scores", "comments", "overall_justification"}
    for key in doc:
        if key not in allowed and not key.startswith("$"):
            raise SchemaError(f"unexpected field {key!r}", record)
    for key in ("evaluator_id", "scores", "overall_justification"):
        if key not in doc:
            raise SchemaError(f"missing field {key!r}", record)
    if not isinstance(doc["evaluator_id"], str):
        raise SchemaError("evaluator_id must be a string", record)
    if not isinstance(doc["overall_justification"], str):
        raise SchemaError("overall_justification must be a string", record)
    affiliation = doc.get("affiliation")
    if affiliation is not None and not isinstance(affiliation, str):
        raise SchemaError("affiliation must be a string", record)

    scores: dict[RubricId, dict[str, float]] = {}
    if not isinstance(doc["scores"], dict):
        raise SchemaError("scores must map rubric ids to objects", record)
    for rubric_text, subs in doc["scores"].items():
        rubric = parse_rubric(rubric_text, f"{record}.scores")
        if not isinstance(subs, dict):
            raise SchemaError("subcategory scores must be an object", f"{record}.scores.{rubric_text}")
        for sub, value in subs.items():
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise SchemaError(f"score must be a number, got {value!r}", f"{record}.scores.{rubric_text}.{sub}")
        scores[rubric] = {sub: float(v) for sub, v in subs.items()}

    comments: dict[tuple[RubricId, str], str] = {}
    raw_comments = doc.get("comments", {})
    if not isinstance(raw_comments, dict):
        raise SchemaError("comments must map rubric ids to objects", record)
    for rubric_text, subs in raw_comments.items():
        rubric = parse_rubric(rubric_text, f"{record}.comments")
        if not isinstance(subs, dict) or not all(isinstance(t, str) for t in subs.values()):
            raise SchemaError("comments must map subcategories to strings", f"{record}.comments.{rubric_text}")
        for sub, text in subs.items():
            comments[(rubric, sub)] = text

    return EvaluatorResponse(doc["evaluator_id"], scores, doc["overall_justification"],
                             comments, affiliation)


def parse_responses(source: bytes | str | IO) -> list[EvaluatorResponse]:
    doc = load_json_document(source)
    if not isinstance(doc, list):
        raise SchemaError("response file must be a JSON array", "document")
    return [_parse_response(item, i) for i, item in enumerate(doc)]


def serialize_responses(responses: Iterable[EvaluatorResponse]) -> str:
    return json.dumps([r.to_dict() for r in responses], indent=2, ensure_ascii=False) + "\n"


def validate_response(r: EvaluatorResponse) -> ValidationReport:
    findings: list[Finding] = []
    who = r.evaluator_id or "<anonymous>"
    if not r.evaluator_id.strip():
        findings.append(error("missing_evaluator_id", "evaluator_id is empty", who))
    if not r.overall_justification.strip():
        findings.append(error("missing_justification", "overall justification is empty", who))
    if not any(r.scores.values()):
        findings.append(error("no_scores", "response scores no subcategory", who))
    for rubric, subs in r.scores.items():
        for sub, value in subs.items():
            subject = f"{who}: {rubric.value}/{sub}"
            if not (math.isfinite(value) and SCALE_MIN <= value <= SCALE_MAX):
                findings.append(error("score_out_of_range",
                                      f"score {value!r} outside [{SCALE_MIN:g}, {SCALE_MAX:g}]", subject))
            if not r.comments.get((rubric, sub), "").strip():
                findings.append(warning("missing_comment", "score has no comment", subject))
    return ValidationReport.of(findings)


@dataclass(frozen=True)
class RubricAggregate:
    rubric: RubricId
    central: float
    dispersion: float
    evaluator_count: int
    low_consensus: bool
    statistic: CentralStatistic = CentralStatistic.MEAN
    evaluator_scores: Mapping[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "central": self.central,
            "statistic": self.statistic.value,
            "dispersion": self.dispersion,
            "evaluator_count": self.evaluator_count,
            "low_consensus": self.low_consensus,
            "evaluator_scores": dict(self.evaluator_scores),
        }

    @classmethod
    def from_dict(cls, rubric: str, doc: Mapping) -> "RubricAggregate":
        return cls(parse_rubric(rubric), doc["central"], doc["dispersion"], doc["evaluator_count"],
                   doc["low_consensus"], CentralStatistic(doc["statistic"]), dict(doc["evaluator_scores"]))


def _panel(responses: list[EvaluatorResponse]) -> list[EvaluatorResponse]:
    """Collapse exact duplicate submissions; conflicting ones are an error."""
    by_id: dict[str, EvaluatorResponse] = {}
    for r in responses:
        seen = by_id.get(r.evaluator_id)
        if seen is None:
            by_id[r.evaluator_id] = r
        elif seen != r:
            raise InvalidResponseError(f"evaluator {r.evaluator_id!r} submitted conflicting responses")
    return list(by_id.values())


def aggregate_responses(responses: Iterable[EvaluatorResponse],
                        central: CentralStatistic | str = CentralStatistic.MEAN,
                        threshold: float = DEFAULT_CONSENSUS_THRESHOLD) -> dict[RubricId, RubricAggregate]:
    """Per-rubric consensus score and sample standard deviation across evaluators."""
    responses = list(responses)
    if not responses:
        raise EmptyPanelError("no evaluator responses to aggregate")
    central = CentralStatistic(central)
    problems = [f for r in responses for f in validate_response(r).errors]
    if problems:
        raise InvalidResponseError("; ".join(str(f) for f in problems))

    panel = _panel(responses)
    result = {}
    for rubric in RubricId:
        per_evaluator = {r.evaluator_id: r.category_score(rubric) for r in panel}
        per_evaluator = {k: v for k, v in sorted(per_evaluator.items()) if v is not None}
        if not per_evaluator:
            continue
        values = list(per_evaluator.values())
        stat = statistics.mean(values) if central is CentralStatistic.MEAN else statistics.median(values)
        spread = statistics.stdev(values) if len(values) > 1 else 0.0
        result[rubric] = RubricAggregate(rubric, float(stat), float(spread), len(values),
                                         spread > threshold, central, per_evaluator)
    return result


def aggregates_to_dict(aggregates: Mapping[RubricId, RubricAggregate]) -> dict:
    return {r.value: a.to_dict() for r, a in aggregates.items()}


def aggregates_from_dict(doc: Mapping) -> dict[RubricId, RubricAggregate]:
    try:
        return {parse_rubric(r): RubricAggregate.from_dict(r, a) for r, a in doc.items()}
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"malformed aggregate document: {exc}", "aggregates") from None
