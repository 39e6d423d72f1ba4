"""Human-readable renderings of score, Delphi and classification results."""

from __future__ import annotations

from typing import Iterable, Mapping

from .data import RubricId
from .delphi import RubricAggregate
from .scoring import MaturityStage, ScoreReport

DEFAULT_PRECISION = 4


def fmt(value: float | None, precision: int = DEFAULT_PRECISION, percent: bool = False) -> str:
    if value is None:
        return "-"
    if percent:
        return f"{value * 100:.{precision}f}%"
    return f"{value:.{precision}f}"


def _table(header: list[str], rows: Iterable[list[str]]) -> list[str]:
    lines = ["| " + " | ".join(header) + " |", "|" + "|".join("---" for _ in header) + "|"]
    lines += ["| " + " | ".join(row) + " |" for row in rows]
    return lines


def quartile_lines() -> list[str]:
    return _table(["Stage", "Range"], ([s.label, s.range_text] for s in MaturityStage))


def render_score_markdown(report: ScoreReport, precision: int = DEFAULT_PRECISION,
                          percent: bool = False, quartiles: bool = False) -> str:
    names = {p.id: p.name for p in report.programs}
    out = ["# Grant maturity report", "",
           f"Normalization: {report.method.value}; weights: {report.scheme.mode.value}; "
           f"missing values: {report.missing_policy.value}.", "",
           "## Composite scores", ""]
    out += _table(
        ["Program", "Additive GMF", "Normalised GMF", "Stage"],
        ([names[s.program], fmt(s.additive_gmf, precision), fmt(s.normalized_gmf, precision, percent),
          s.stage.label] for s in report.scores),
    )
    out += ["", "## Normalised rubric scores", ""]
    out += _table(
        ["Program"] + [r.value for r in report.rubrics],
        ([names[p]] + [fmt(report.rubric_scores.normalized(p, r), precision, percent) for r in report.rubrics]
         for p in report.rubric_scores.programs),
    )
    out += ["", "## Raw rubric scores", ""]
    out += _table(
        ["Program"] + [r.value for r in report.rubrics],
        ([names[p]] + [fmt(report.rubric_scores.raw(p, r), precision) for r in report.rubrics]
         for p in report.rubric_scores.programs),
    )
    if quartiles:
        out += ["", "## Maturity stages", ""] + quartile_lines()
    out += ["", "## Warnings", ""]
    out += [f"- {w}" for w in report.warnings] or ["None."]
    out += ["", "## Provenance", ""]
    for step in report.steps:
        details = ", ".join(f"{k}={v}" for k, v in step.items() if k != "step")
        out.append(f"- `{step['step']}`: {details}")
    out += ["", "Rubric weights: " + ", ".join(
        f"{r.value}={fmt(w, precision)}" for r, w in report.scheme.rubric_weights.items())]
    for r in report.rubrics:
        group = report.scheme.indicator_weights[r]
        out.append(f"- {r.value}: " + ", ".join(f"{i}={fmt(w, precision)}" for i, w in group.items()))
    return "\n".join(out) + "\n"


def render_delphi_markdown(aggregates: Mapping[RubricId, RubricAggregate],
                           precision: int = DEFAULT_PRECISION) -> str:
    out = ["# Expert panel aggregates", ""]
    stat = next(iter(aggregates.values())).statistic.value if aggregates else "mean"
    out += _table(
        ["Rubric", f"Central ({stat})", "Dispersion (sample SD)", "Evaluators", "Low consensus"],
        ([r.value, fmt(a.central, precision), fmt(a.dispersion, precision), str(a.evaluator_count),
          "yes" if a.low_consensus else "no"] for r, a in aggregates.items()),
    )
    return "\n".join(out) + "\n"


def render_classification_markdown(pairs: Iterable[tuple[float, MaturityStage]],
                                   precision: int = DEFAULT_PRECISION, percent: bool = False,
                                   quartiles: bool = False) -> str:
    out = _table(["Normalised GMF", "Stage"], ([fmt(x, precision, percent), s.label] for x, s in pairs))
    if quartiles:
        out += [""] + quartile_lines()
    return "\n".join(out) + "\n"
