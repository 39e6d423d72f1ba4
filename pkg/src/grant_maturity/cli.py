"""Command-line entry point.

Exit codes (stable): 0 success, 1 I/O or parse failure, 2 validation
failure, 3 pipeline failure.
"""

from __future__ import annotations

import functools
import json
from pathlib import Path

import click

from .data import parse_dataset, validate_dataset
from .delphi import CentralStatistic, DEFAULT_CONSENSUS_THRESHOLD, aggregate_responses, \
    aggregates_to_dict, parse_responses, validate_response
from .errors import DatasetSyntaxError, GrantMaturityError, OutOfRangeError, PipelineError, SchemaError
from .findings import error as error_finding
from .report import DEFAULT_PRECISION, render_classification_markdown, render_delphi_markdown, \
    render_score_markdown
from .scoring import MaturityStage, classify_stage, score_dataset
from .sensitivity import PerturbationConfig, compare_normalizations, leave_one_out, perturb_weights
from .templates import TEMPLATES, template_text
from .weights import NormalizationMethod, ScoringConfig, load_config

EXIT_OK = 0
EXIT_IO = 1
EXIT_VALIDATION = 2
EXIT_PIPELINE = 3


def _fail(code: int, message: str):
    click.echo(message, err=True)
    raise click.exceptions.Exit(code)


def _read(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        _fail(EXIT_IO, f"error: cannot read {path}: {exc.strerror or exc}")


def _emit(text: str, output: str | None) -> None:
    if output is None:
        click.echo(text, nl=False)
        return
    try:
        Path(output).write_text(text, encoding="utf-8")
    except OSError as exc:
        _fail(EXIT_IO, f"error: cannot write {output}: {exc.strerror or exc}")


def _dumps(doc) -> str:
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def output_options(f):
    @click.option("--json", "as_json", is_flag=True, help="Emit machine-readable JSON.")
    @click.option("--output", "-o", type=click.Path(dir_okay=False), help="Write to a file instead of stdout.")
    @click.option("--precision", type=click.IntRange(0, 17), default=DEFAULT_PRECISION, show_default=True,
                  help="Decimal places in human-readable tables.")
    @click.option("--percent", is_flag=True, help="Show [0, 1] scores as percentages in tables.")
    @functools.wraps(f)
    def wrapper(*args, **kwargs):
        return f(*args, **kwargs)
    return wrapper


def _load_dataset(path: str, fmt: str | None, sidecar: str | None):
    raw = _read(path)
    fmt = fmt or ("csv" if path.lower().endswith(".csv") else "json")
    side = _read(sidecar) if sidecar else None
    try:
        return parse_dataset(raw, fmt, side)
    except DatasetSyntaxError as exc:
        _fail(EXIT_IO, f"error: {path}: {exc}")
    except SchemaError as exc:
        _fail(EXIT_VALIDATION, f"error: {path}: {exc}")


def _load_config(path: str | None) -> ScoringConfig:
    if path is None:
        return ScoringConfig()
    raw = _read(path)
    try:
        return load_config(raw)
    except DatasetSyntaxError as exc:
        _fail(EXIT_IO, f"error: {path}: {exc}")
    except SchemaError as exc:
        _fail(EXIT_VALIDATION, f"error: {path}: {exc}")


def _checked_dataset(path, fmt, sidecar):
    dataset = _load_dataset(path, fmt, sidecar)
    report = validate_dataset(dataset)
    if not report.ok:
        _fail(EXIT_VALIDATION, "\n".join(str(f) for f in report.errors))
    return dataset


dataset_options = [
    click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default=None,
                 help="Dataset format (default: from file extension)."),
    click.option("--sidecar", type=click.Path(dir_okay=False),
                 help="Programs/indicators JSON accompanying a CSV-long value file."),
]


def with_dataset_options(f):
    for option in reversed(dataset_options):
        f = option(f)
    return f


@click.group()
def main():
    """Score grant-program maturity from multi-indicator datasets."""


@main.command()
@click.argument("dataset")
@with_dataset_options
@output_options
def validate(dataset, fmt, sidecar, as_json, output, precision, percent):
    """Check a dataset against every structural invariant."""
    raw = _read(dataset)
    fmt = fmt or ("csv" if dataset.lower().endswith(".csv") else "json")
    side = _read(sidecar) if sidecar else None
    try:
        report = validate_dataset(parse_dataset(raw, fmt, side))
        findings = list(report.findings)
    except DatasetSyntaxError as exc:
        _fail(EXIT_IO, f"error: {dataset}: {exc}")
    except SchemaError as exc:
        findings = [error_finding("schema", exc.detail, exc.record)]

    ok = not any(f.severity == "error" for f in findings)
    if as_json:
        text = _dumps({"ok": ok, "findings": [f.to_dict() for f in findings]})
    else:
        text = "".join(f"{f}\n" for f in findings) or "OK: no findings\n"
    _emit(text, output)
    raise click.exceptions.Exit(EXIT_OK if ok else EXIT_VALIDATION)


@main.command()
@click.argument("dataset")
@click.option("--config", "config_path", type=click.Path(dir_okay=False), help="Scoring configuration JSON.")
@click.option("--quartiles", is_flag=True, help="Print the maturity-stage ranges alongside.")
@with_dataset_options
@output_options
def score(dataset, config_path, quartiles, fmt, sidecar, as_json, output, precision, percent):
    """Run the full scoring pipeline and report composites and stages."""
    data = _checked_dataset(dataset, fmt, sidecar)
    config = _load_config(config_path)
    try:
        report = score_dataset(data, config)
    except PipelineError as exc:
        code = EXIT_VALIDATION if exc.step in ("validate", "weights") else EXIT_PIPELINE
        _fail(code, f"error: {exc}")
    if as_json:
        doc = report.to_dict()
        if quartiles:
            doc["quartiles"] = {s.label: [s.lower, s.upper] for s in MaturityStage}
        _emit(_dumps(doc), output)
    else:
        _emit(render_score_markdown(report, precision, percent, quartiles), output)


@main.command()
@click.argument("scores", nargs=-1, required=True, type=float)
@click.option("--quartiles", is_flag=True, help="Print the maturity-stage ranges alongside.")
@output_options
def classify(scores, quartiles, as_json, output, precision, percent):
    """Map normalised composite scores in [0, 1] to maturity stages."""
    try:
        pairs = [(x, classify_stage(x)) for x in scores]
    except OutOfRangeError as exc:
        _fail(EXIT_VALIDATION, f"error: {exc}")
    if as_json:
        doc = {"classifications": [{"score": x, "stage": s.label} for x, s in pairs]}
        if quartiles:
            doc["quartiles"] = {s.label: [s.lower, s.upper] for s in MaturityStage}
        _emit(_dumps(doc), output)
    else:
        _emit(render_classification_markdown(pairs, precision, percent, quartiles), output)


@main.command()
@click.argument("responses")
@click.option("--central", type=click.Choice([c.value for c in CentralStatistic]), default="mean",
              show_default=True, help="Statistic taken across evaluators.")
@click.option("--threshold", type=click.FloatRange(min=0), default=DEFAULT_CONSENSUS_THRESHOLD,
              show_default=True, help="Standard deviation above which consensus is flagged low.")
@output_options
def delphi(responses, central, threshold, as_json, output, precision, percent):
    """Aggregate expert questionnaire responses into rubric scores."""
    raw = _read(responses)
    try:
        parsed = parse_responses(raw)
    except DatasetSyntaxError as exc:
        _fail(EXIT_IO, f"error: {responses}: {exc}")
    except SchemaError as exc:
        _fail(EXIT_VALIDATION, f"error: {responses}: {exc}")
    problems = [f for r in parsed for f in validate_response(r).errors]
    if problems:
        _fail(EXIT_VALIDATION, "\n".join(str(f) for f in problems))
    try:
        aggregates = aggregate_responses(parsed, central, threshold)
    except GrantMaturityError as exc:  # empty panel, conflicting duplicates
        _fail(EXIT_VALIDATION, f"error: {exc}")
    if as_json:
        _emit(_dumps(aggregates_to_dict(aggregates)), output)
    else:
        _emit(render_delphi_markdown(aggregates, precision), output)


@main.command()
@click.argument("dataset")
@click.option("--config", "config_path", type=click.Path(dir_okay=False), help="Scoring configuration JSON.")
@click.option("--perturb", "epsilon", type=click.FloatRange(0, 1), default=None,
              help="Monte Carlo weight perturbation with maximum relative change EPSILON.")
@click.option("--trials", type=click.IntRange(min=1), default=100, show_default=True)
@click.option("--seed", type=click.IntRange(0, 2**64 - 1), default=0, show_default=True)
@click.option("--workers", type=click.IntRange(min=1), default=1, show_default=True,
              help="Threads used for perturbation trials.")
@click.option("--compare-normalizations", "compare", is_flag=True,
              help="Compare min-max against alternative normalizations.")
@click.option("--methods", default="minmax,zscore,rank", show_default=True,
              help="Comma-separated methods for --compare-normalizations.")
@click.option("--leave-one-out", "loo", is_flag=True, help="Drop each indicator in turn.")
@with_dataset_options
@output_options
def sensitivity(dataset, config_path, epsilon, trials, seed, workers, compare, methods, loo,
                fmt, sidecar, as_json, output, precision, percent):
    """Robustness analyses; always emits a JSON report."""
    chosen = sum([epsilon is not None, compare, loo])
    if chosen != 1:
        raise click.UsageError("choose exactly one of --perturb, --compare-normalizations, --leave-one-out")
    data = _checked_dataset(dataset, fmt, sidecar)
    config = _load_config(config_path)
    try:
        scheme = config.scheme(data)
    except SchemaError as exc:
        _fail(EXIT_VALIDATION, f"error: {exc}")
    try:
        if epsilon is not None:
            result = perturb_weights(data, scheme, PerturbationConfig(epsilon, trials, seed),
                                     config.normalization, config.missing_policy, config.degenerate_value,
                                     workers=workers)
        elif compare:
            try:
                chosen_methods = [NormalizationMethod(m.strip()) for m in methods.split(",") if m.strip()]
            except ValueError as exc:
                raise click.BadParameter(str(exc), param_hint="--methods")
            if len(chosen_methods) < 2:
                raise click.BadParameter("need at least two methods", param_hint="--methods")
            result = compare_normalizations(data, scheme, chosen_methods,
                                            config.missing_policy, config.degenerate_value)
        else:
            result = leave_one_out(data, scheme, config.normalization,
                                   config.missing_policy, config.degenerate_value)
    except PipelineError as exc:
        _fail(EXIT_PIPELINE, f"error: {exc}")
    _emit(result.to_json(), output)


@main.command()
@click.argument("kind", type=click.Choice(list(TEMPLATES)))
@output_options
def template(kind, as_json, output, precision, percent):
    """Print an example dataset, config or responses file."""
    _emit(template_text(kind), output)


if __name__ == "__main__":
    main()
