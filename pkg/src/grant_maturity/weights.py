"""Weight schemes and scoring configuration."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from typing import IO, Any, Mapping

from .data import Dataset, RubricId, load_json_document, parse_rubric
from .errors import SchemaError

SUM_TOLERANCE = 1e-9


class WeightMode(str, Enum):
    EQUAL_DEFAULT = "equal"
    EXPLICIT = "explicit"


class NormalizationMethod(str, Enum):
    MINMAX = "minmax"
    ZSCORE = "zscore"
    RANK = "rank"


class MissingPolicy(str, Enum):
    RENORMALIZE = "renormalize"
    STRICT = "strict"


def _normalized(weights: Mapping[Any, float], what: str) -> dict:
    for key, w in weights.items():
        if not isinstance(w, (int, float)) or isinstance(w, bool) or not math.isfinite(w) or w < 0:
            raise SchemaError(f"weight must be a finite nonnegative number, got {w!r}", f"{what} {key}")
    total = sum(weights.values())
    if total <= 0:
        raise SchemaError("weights must not all be zero", what)
    return {k: w / total for k, w in weights.items()}


@dataclass(frozen=True)
class WeightScheme:
    """Indicator weights within each rubric and rubric weights across rubrics.

    Each group sums to one. Build one with :meth:`equal` or :meth:`explicit`
    rather than by hand.
    """

    indicator_weights: Mapping[RubricId, Mapping[str, float]]
    rubric_weights: Mapping[RubricId, float]
    mode: WeightMode = WeightMode.EXPLICIT

    def __post_init__(self):
        if set(self.indicator_weights) != set(self.rubric_weights):
            raise SchemaError("indicator and rubric weights cover different rubrics", "weight scheme")
        groups = [(f"rubric {r.value}", w) for r, w in self.indicator_weights.items()]
        groups.append(("rubric weights", self.rubric_weights))
        for name, group in groups:
            if not group:
                raise SchemaError("empty weight group", name)
            if any(not 0.0 <= w <= 1.0 for w in group.values()):
                raise SchemaError("weights must lie in [0, 1]", name)
            if abs(sum(group.values()) - 1.0) > SUM_TOLERANCE:
                raise SchemaError(f"weights sum to {sum(group.values())!r}, not 1", name)

    @property
    def rubrics(self) -> list[RubricId]:
        return [r for r in RubricId if r in self.rubric_weights]

    @classmethod
    def equal(cls, dataset: Dataset) -> "WeightScheme":
        rubrics = dataset.rubrics()
        if not rubrics:
            raise SchemaError("dataset has no scored indicators", "weight scheme")
        indicator_weights = {}
        for r in rubrics:
            members = dataset.scored_indicators(r)
            indicator_weights[r] = {d.id: 1.0 / len(members) for d in members}
        return cls(indicator_weights, {r: 1.0 / len(rubrics) for r in rubrics}, WeightMode.EQUAL_DEFAULT)

    @classmethod
    def explicit(cls, dataset: Dataset,
                 rubric_weights: Mapping[RubricId, float] | None = None,
                 indicator_weights: Mapping[RubricId, Mapping[str, float]] | None = None) -> "WeightScheme":
        """Normalize user weights against ``dataset``.

        Rubrics missing from ``indicator_weights`` get equal indicator weights;
        rubrics missing from ``rubric_weights`` (when it is given) get zero.
        """
        base = cls.equal(dataset)
        rubrics = base.rubrics
        inds = {r: dict(w) for r, w in base.indicator_weights.items()}
        for r, given in (indicator_weights or {}).items():
            r = parse_rubric(r, "indicator_weights")
            if r not in inds:
                raise SchemaError("rubric has no scored indicators in the dataset", f"indicator_weights {r.value}")
            members = set(inds[r])
            for ind in given:
                if ind not in members:
                    defn = dataset.indicator_map.get(ind)
                    reason = ("unknown indicator" if defn is None else
                              "descriptive indicators cannot carry weight" if defn.descriptive else
                              f"indicator belongs to rubric {defn.rubric.value}")
                    raise SchemaError(reason, f"indicator_weights {r.value}.{ind}")
            inds[r] = _normalized({ind: given.get(ind, 0.0) for ind in inds[r]},
                                  f"indicator_weights {r.value}")
        if rubric_weights is None:
            rws = dict(base.rubric_weights)
        else:
            parsed = {parse_rubric(r, "rubric_weights"): w for r, w in rubric_weights.items()}
            for r in parsed:
                if r not in rubrics:
                    raise SchemaError("rubric has no scored indicators in the dataset", f"rubric_weights {r.value}")
            rws = _normalized({r: parsed.get(r, 0.0) for r in rubrics}, "rubric_weights")
        mode = WeightMode.EQUAL_DEFAULT if rubric_weights is None and not indicator_weights \
            else WeightMode.EXPLICIT
        return cls(inds, rws, mode)

    def without_indicator(self, indicator_id: str) -> "WeightScheme":
        """Drop one indicator and renormalize the rest of its rubric."""
        inds = {}
        for r, group in self.indicator_weights.items():
            if indicator_id in group:
                rest = {k: w for k, w in group.items() if k != indicator_id}
                if not rest:
                    raise SchemaError("cannot remove the last indicator of a rubric", f"rubric {r.value}")
                if self.mode is WeightMode.EQUAL_DEFAULT:
                    group = {k: 1.0 / len(rest) for k in rest}
                else:
                    group = _normalized(rest, f"rubric {r.value}")
            inds[r] = dict(group)
        return WeightScheme(inds, dict(self.rubric_weights), self.mode)

    def to_dict(self) -> dict:
        return {
            "mode": self.mode.value,
            "rubric_weights": {r.value: w for r, w in self.rubric_weights.items()},
            "indicator_weights": {r.value: dict(g) for r, g in self.indicator_weights.items()},
        }

    @classmethod
    def from_dict(cls, doc: Mapping) -> "WeightScheme":
        return cls(
            {parse_rubric(r): dict(g) for r, g in doc["indicator_weights"].items()},
            {parse_rubric(r): w for r, w in doc["rubric_weights"].items()},
            WeightMode(doc["mode"]),
        )


@dataclass(frozen=True)
class ScoringConfig:
    """User-facing scoring configuration; resolved into a WeightScheme per dataset."""

    mode: WeightMode = WeightMode.EQUAL_DEFAULT
    rubric_weights: Mapping[RubricId, float] | None = None
    indicator_weights: Mapping[RubricId, Mapping[str, float]] | None = None
    normalization: NormalizationMethod = NormalizationMethod.MINMAX
    missing_policy: MissingPolicy = MissingPolicy.RENORMALIZE
    degenerate_value: float = 0.5

    def __post_init__(self):
        if not (isinstance(self.degenerate_value, (int, float)) and 0.0 <= self.degenerate_value <= 1.0):
            raise SchemaError("degenerate_value must lie in [0, 1]", "config")
        if self.mode is WeightMode.EQUAL_DEFAULT and (self.rubric_weights or self.indicator_weights):
            raise SchemaError("mode 'equal' does not take weight maps", "config")

    def scheme(self, dataset: Dataset) -> WeightScheme:
        if self.mode is WeightMode.EQUAL_DEFAULT:
            return WeightScheme.equal(dataset)
        return WeightScheme.explicit(dataset, self.rubric_weights, self.indicator_weights)

    def to_dict(self) -> dict:
        doc: dict[str, Any] = {"mode": self.mode.value}
        if self.rubric_weights is not None:
            doc["rubric_weights"] = {r.value: w for r, w in self.rubric_weights.items()}
        if self.indicator_weights is not None:
            doc["indicator_weights"] = {r.value: dict(g) for r, g in self.indicator_weights.items()}
        doc.update(normalization=self.normalization.value, missing_policy=self.missing_policy.value,
                   degenerate_value=self.degenerate_value)
        return doc

    @classmethod
    def from_dict(cls, doc: Any) -> "ScoringConfig":
        if not isinstance(doc, dict):
            raise SchemaError("config must be an object", "config")
        known = {"mode", "rubric_weights", "indicator_weights", "normalization",
                 "missing_policy", "degenerate_value"}
        for key in doc:
            if key not in known and not key.startswith("$"):
                raise SchemaError(f"unexpected field {key!r}", "config")

        def choice(enum, key, default):
            try:
                return enum(doc.get(key, default.value))
            except ValueError:
                allowed = ", ".join(m.value for m in enum)
                raise SchemaError(f"{key} must be one of {allowed}", "config") from None

        rubric_weights = doc.get("rubric_weights")
        if rubric_weights is not None:
            if not isinstance(rubric_weights, dict):
                raise SchemaError("rubric_weights must be an object", "config")
            rubric_weights = {parse_rubric(r, "rubric_weights"): w for r, w in rubric_weights.items()}
        indicator_weights = doc.get("indicator_weights")
        if indicator_weights is not None:
            if not isinstance(indicator_weights, dict) or not all(
                    isinstance(g, dict) for g in indicator_weights.values()):
                raise SchemaError("indicator_weights must map rubric ids to objects", "config")
            indicator_weights = {parse_rubric(r, "indicator_weights"): dict(g)
                                 for r, g in indicator_weights.items()}
        default_mode = WeightMode.EXPLICIT if (rubric_weights or indicator_weights) else WeightMode.EQUAL_DEFAULT
        degenerate = doc.get("degenerate_value", 0.5)
        if isinstance(degenerate, bool) or not isinstance(degenerate, (int, float)):
            raise SchemaError("degenerate_value must be a number", "config")
        return cls(
            mode=choice(WeightMode, "mode", default_mode),
            rubric_weights=rubric_weights,
            indicator_weights=indicator_weights,
            normalization=choice(NormalizationMethod, "normalization", NormalizationMethod.MINMAX),
            missing_policy=choice(MissingPolicy, "missing_policy", MissingPolicy.RENORMALIZE),
            degenerate_value=float(degenerate),
        )


def load_config(source: bytes | str | IO) -> ScoringConfig:
    return ScoringConfig.from_dict(load_json_document(source))


def serialize_config(config: ScoringConfig) -> str:
    return json.dumps(config.to_dict(), indent=2) + "\n"
