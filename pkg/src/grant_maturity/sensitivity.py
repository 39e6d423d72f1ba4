"""Robustness of composite scores to weights, normalization and indicator choice.

Three analyses:

* :func:`perturb_weights` - Monte Carlo over multiplicative weight noise.
* :func:`compare_normalizations` - rerun under alternative normalizations.
* :func:`leave_one_out` - drop one indicator at a time.

Weight draws use numpy's PCG64 generator. Trial ``t`` of a run seeded with
``s`` draws from ``SeedSequence(s, spawn_key=(t,))``, so every trial owns an
independent stream and results do not depend on scheduling.
"""

from __future__ import annotations

import json
import statistics
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Sequence

import numpy as np
from scipy.stats import rankdata, spearmanr

from .data import Dataset
from .errors import PipelineError, SchemaError
from .findings import Finding, warning
from .scoring import MaturityStage, ScoreReport, run_pipeline
from .weights import MissingPolicy, NormalizationMethod, WeightMode, WeightScheme

GENERATOR_ID = "numpy.random.PCG64 via SeedSequence(seed, spawn_key=(trial,))"


@dataclass(frozen=True)
class PerturbationConfig:
    epsilon: float
    trials: int
    seed: int

    def __post_init__(self):
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError(f"epsilon must lie in [0, 1], got {self.epsilon!r}")
        if isinstance(self.trials, bool) or not isinstance(self.trials, int) or self.trials < 1:
            raise ValueError(f"trials must be a positive integer, got {self.trials!r}")
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")


def spearman(x: Sequence[float], y: Sequence[float]) -> float:
    """Spearman correlation with the undefined cases pinned down.

    Identical rankings (including two all-tied vectors) give 1.0 and exactly
    reversed ones give -1.0. If only one side is constant there is no
    ordering to compare and 0.0 is returned.
    """
    rx, ry = rankdata(x), rankdata(y)
    if np.array_equal(rx, ry):
        return 1.0
    if np.array_equal(rx, len(rx) + 1 - ry):
        return -1.0
    if len(set(x)) < 2 or len(set(y)) < 2:
        return 0.0
    rho = float(spearmanr(x, y).statistic)
    return min(1.0, max(-1.0, rho))


@dataclass(frozen=True)
class ProgramStability:
    baseline_gmf: float
    baseline_stage: MaturityStage
    gmf_mean: float | None
    gmf_stddev: float | None
    stage_mode: MaturityStage | None
    stage_flip_fraction: float | None

    def to_dict(self) -> dict:
        return {
            "baseline_gmf": self.baseline_gmf,
            "baseline_stage": self.baseline_stage.label,
            "gmf_mean": self.gmf_mean,
            "gmf_stddev": self.gmf_stddev,
            "stage_mode": self.stage_mode.label if self.stage_mode else None,
            "stage_flip_fraction": self.stage_flip_fraction,
        }

    @classmethod
    def from_dict(cls, doc: Mapping) -> "ProgramStability":
        mode = doc["stage_mode"]
        return cls(doc["baseline_gmf"], MaturityStage.from_label(doc["baseline_stage"]),
                   doc["gmf_mean"], doc["gmf_stddev"],
                   MaturityStage.from_label(mode) if mode else None, doc["stage_flip_fraction"])


@dataclass(frozen=True)
class StabilityReport:
    analysis: str
    config: Mapping[str, Any]
    programs: Mapping[str, ProgramStability]
    rank_reversals: Mapping[tuple[str, str], int]
    rank_correlation: tuple[float, ...]
    runs: tuple[Mapping[str, Any], ...] = ()
    failures: tuple[Mapping[str, Any], ...] = ()

    def to_dict(self) -> dict:
        return {
            "analysis": self.analysis,
            "config": dict(self.config),
            "programs": {p: s.to_dict() for p, s in self.programs.items()},
            "rank_reversals": [{"pair": list(pair), "count": n} for pair, n in self.rank_reversals.items()],
            "rank_correlation": list(self.rank_correlation),
            "runs": [dict(r) for r in self.runs],
            "failures": [dict(f) for f in self.failures],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n"

    @classmethod
    def from_dict(cls, doc: Mapping) -> "StabilityReport":
        try:
            return cls(
                analysis=doc["analysis"],
                config=dict(doc["config"]),
                programs={p: ProgramStability.from_dict(s) for p, s in doc["programs"].items()},
                rank_reversals={tuple(item["pair"]): item["count"] for item in doc["rank_reversals"]},
                rank_correlation=tuple(doc["rank_correlation"]),
                runs=tuple(doc["runs"]),
                failures=tuple(doc["failures"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"malformed stability report: {exc}", "report") from None


def _stage_mode(stages: Iterable[MaturityStage]) -> MaturityStage | None:
    counts = Counter(stages)
    if not counts:
        return None
    order = list(MaturityStage)
    # ties go to the lower stage
    return max(counts, key=lambda s: (counts[s], -order.index(s)))


def _summarize(analysis: str, config: Mapping[str, Any], baseline: ScoreReport,
               runs: list[ScoreReport | None], failures: list[dict], run_meta: list[dict]) -> StabilityReport:
    programs = [s.program for s in baseline.scores]
    base_gmf = baseline.gmf()
    base_stage = baseline.stages()
    ok = [r for r in runs if r is not None]

    per_program = {}
    for p in programs:
        values = [r.score(p).normalized_gmf for r in ok]
        stages = [r.score(p).stage for r in ok]
        per_program[p] = ProgramStability(
            baseline_gmf=base_gmf[p],
            baseline_stage=base_stage[p],
            gmf_mean=statistics.fmean(values) if values else None,
            gmf_stddev=statistics.pstdev(values) if values else None,
            stage_mode=_stage_mode(stages),
            stage_flip_fraction=(sum(s is not base_stage[p] for s in stages) / len(stages)) if stages else None,
        )

    reversals: dict[tuple[str, str], int] = {}
    for i, a in enumerate(programs):
        for b in programs[i + 1:]:
            base = base_gmf[a] - base_gmf[b]
            count = 0
            if base != 0:
                for r in ok:
                    diff = r.score(a).normalized_gmf - r.score(b).normalized_gmf
                    if diff * base < 0:
                        count += 1
            reversals[(a, b)] = count

    base_vec = [base_gmf[p] for p in programs]
    correlations = tuple(spearman(base_vec, [r.score(p).normalized_gmf for p in programs]) for r in ok)
    return StabilityReport(analysis, dict(config), per_program, reversals, correlations,
                           tuple(run_meta), tuple(failures))


def _perturbed_scheme(base: WeightScheme, epsilon: float, rng: np.random.Generator) -> WeightScheme:
    if epsilon == 0:
        return base

    def scaled(group: Mapping) -> dict:
        keys = list(group)
        factors = rng.uniform(1.0 - epsilon, 1.0 + epsilon, size=len(keys))
        raw = {k: group[k] * float(f) for k, f in zip(keys, factors)}
        total = sum(raw.values())
        return {k: w / total for k, w in raw.items()}

    inds = {r: scaled(base.indicator_weights[r]) for r in base.rubrics}
    rubric = scaled({r: base.rubric_weights[r] for r in base.rubrics})
    return WeightScheme(inds, rubric, WeightMode.EXPLICIT)


def trial_generator(seed: int, trial: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(trial,))))


def perturb_weights(dataset: Dataset, base: WeightScheme | None, cfg: PerturbationConfig,
                    method: NormalizationMethod = NormalizationMethod.MINMAX,
                    missing_policy: MissingPolicy = MissingPolicy.RENORMALIZE,
                    degenerate_value: float = 0.5, workers: int = 1) -> StabilityReport:
    """Rescore under ``cfg.trials`` random weight perturbations.

    Each weight is multiplied by a factor drawn from U[1 - eps, 1 + eps]
    and every group is renormalized to sum to one. Failed trials are
    listed in the report, never dropped.
    """
    base = base or WeightScheme.equal(dataset)
    baseline = run_pipeline(dataset, base, method, missing_policy, degenerate_value)

    def trial(t: int):
        scheme = _perturbed_scheme(base, cfg.epsilon, trial_generator(cfg.seed, t))
        try:
            return run_pipeline(dataset, scheme, method, missing_policy, degenerate_value), None
        except PipelineError as exc:
            return None, {"trial": t, "step": exc.step, "error": str(exc.cause)}

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(trial, range(cfg.trials)))
    else:
        outcomes = [trial(t) for t in range(cfg.trials)]

    config = {
        "epsilon": cfg.epsilon, "trials": cfg.trials, "seed": cfg.seed,
        "generator": GENERATOR_ID, "numpy_version": np.__version__,
        "normalization": method.value, "missing_policy": missing_policy.value,
        "degenerate_value": degenerate_value, "base_weights": base.to_dict(),
    }
    return _summarize("weight_perturbation", config, baseline,
                      [r for r, _ in outcomes], [f for _, f in outcomes if f], [])


def compare_normalizations(dataset: Dataset, scheme: WeightScheme | None,
                           methods: Sequence[NormalizationMethod],
                           missing_policy: MissingPolicy = MissingPolicy.RENORMALIZE,
                           degenerate_value: float = 0.5) -> StabilityReport:
    """Rerun the pipeline once per method and compare against the min-max baseline."""
    methods = [NormalizationMethod(m) for m in methods]
    if len(methods) < 2:
        raise ValueError("compare_normalizations needs at least two methods")
    scheme = scheme or WeightScheme.equal(dataset)
    baseline = run_pipeline(dataset, scheme, NormalizationMethod.MINMAX, missing_policy, degenerate_value)
    programs = [s.program for s in baseline.scores]
    base_vec = [baseline.score(p).normalized_gmf for p in programs]

    runs: list[ScoreReport | None] = []
    failures, meta = [], []
    for i, m in enumerate(methods):
        try:
            report = run_pipeline(dataset, scheme, m, missing_policy, degenerate_value)
        except PipelineError as exc:
            runs.append(None)
            failures.append({"run": i, "method": m.value, "step": exc.step, "error": str(exc.cause)})
            continue
        runs.append(report)
        meta.append({
            "run": i,
            "method": m.value,
            "spearman_vs_minmax": spearman(base_vec, [report.score(p).normalized_gmf for p in programs]),
            "gmf": report.gmf(),
            "stages": {p: s.label for p, s in report.stages().items()},
        })
    config = {"methods": [m.value for m in methods], "baseline": NormalizationMethod.MINMAX.value,
              "missing_policy": missing_policy.value, "degenerate_value": degenerate_value,
              "weights": scheme.to_dict()}
    return _summarize("normalization_comparison", config, baseline, runs, failures, meta)


@dataclass(frozen=True)
class IndicatorRemoval:
    indicator: str
    descriptive: bool
    deltas: Mapping[str, float]
    stage_changes: Mapping[str, tuple[str, str]]
    ranking_changed: bool

    def to_dict(self) -> dict:
        return {"descriptive": self.descriptive, "deltas": dict(self.deltas),
                "stage_changes": {p: list(c) for p, c in self.stage_changes.items()},
                "ranking_changed": self.ranking_changed}


@dataclass(frozen=True)
class LeaveOneOutReport:
    config: Mapping[str, Any]
    removals: Mapping[str, IndicatorRemoval]
    skipped: Mapping[str, str] = field(default_factory=dict)
    warnings: tuple[Finding, ...] = ()

    def deltas(self, indicator: str) -> Mapping[str, float]:
        return self.removals[indicator].deltas

    def to_dict(self) -> dict:
        return {
            "analysis": "leave_one_out",
            "config": dict(self.config),
            "removals": {i: r.to_dict() for i, r in self.removals.items()},
            "skipped": dict(self.skipped),
            "warnings": [w.to_dict() for w in self.warnings],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n"

    @classmethod
    def from_dict(cls, doc: Mapping) -> "LeaveOneOutReport":
        try:
            removals = {
                i: IndicatorRemoval(i, r["descriptive"], dict(r["deltas"]),
                                    {p: tuple(c) for p, c in r["stage_changes"].items()},
                                    r["ranking_changed"])
                for i, r in doc["removals"].items()
            }
            return cls(dict(doc["config"]), removals, dict(doc["skipped"]),
                       tuple(Finding.from_dict(w) for w in doc["warnings"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"malformed leave-one-out report: {exc}", "report") from None


def leave_one_out(dataset: Dataset, scheme: WeightScheme | None = None,
                  method: NormalizationMethod = NormalizationMethod.MINMAX,
                  missing_policy: MissingPolicy = MissingPolicy.RENORMALIZE,
                  degenerate_value: float = 0.5) -> LeaveOneOutReport:
    """Remove each indicator in turn and report the change in every composite.

    Descriptive indicators are included so their neutrality is visible. An
    indicator that is the only scored member of its rubric is skipped.
    """
    scheme = scheme or WeightScheme.equal(dataset)
    baseline = run_pipeline(dataset, scheme, method, missing_policy, degenerate_value)
    programs = [s.program for s in baseline.scores]
    base_rank = rankdata([baseline.score(p).normalized_gmf for p in programs])

    removals, skipped, warnings = {}, {}, []
    for d in dataset.indicators:
        if d.scored and len(scheme.indicator_weights[d.rubric]) < 2:
            reason = f"only scored indicator of rubric {d.rubric.value}"
            skipped[d.id] = reason
            warnings.append(warning("loo_skipped", reason, d.id))
            continue
        reduced_scheme = scheme.without_indicator(d.id) if d.scored else scheme
        try:
            report = run_pipeline(dataset.without_indicator(d.id), reduced_scheme,
                                  method, missing_policy, degenerate_value)
        except PipelineError as exc:
            reason = f"pipeline failed at {exc.step}: {exc.cause}"
            skipped[d.id] = reason
            warnings.append(warning("loo_skipped", reason, d.id))
            continue
        deltas = {p: report.score(p).normalized_gmf - baseline.score(p).normalized_gmf for p in programs}
        changes = {p: (baseline.score(p).stage.label, report.score(p).stage.label)
                   for p in programs if report.score(p).stage is not baseline.score(p).stage}
        rank = rankdata([report.score(p).normalized_gmf for p in programs])
        removals[d.id] = IndicatorRemoval(d.id, d.descriptive, deltas, changes,
                                          not np.array_equal(rank, base_rank))
    config = {"normalization": method.value, "missing_policy": missing_policy.value,
              "degenerate_value": degenerate_value, "weights": scheme.to_dict()}
    return LeaveOneOutReport(config, removals, skipped, tuple(warnings))
