"""Shared test utilities: random dataset generation and a straight-line oracle.

The oracle recomputes composites directly from raw cell values with plain
loops. It shares no code with the engine beyond the dataset containers.
"""

from __future__ import annotations

import random

from grant_maturity.data import (
    Dataset, IndicatorDefinition, IndicatorValue, Polarity, Program, RubricId, ValueKind,
)

LEVELS = ("none", "basic", "intermediate", "full")
RUBRICS = list(RubricId)


def make_dataset(values: dict[str, dict[str, object]], defs: list[IndicatorDefinition]) -> Dataset:
    programs = [Program(p, p.upper()) for p in values]
    cells = [IndicatorValue(p, d.id, row[d.id]) for p, row in values.items() for d in defs]
    return Dataset(programs, defs, cells)


def numeric(iid: str, rubric: RubricId, polarity=Polarity.HIGHER_BETTER, descriptive=False) -> IndicatorDefinition:
    return IndicatorDefinition(iid, iid, rubric, polarity, ValueKind.NUMERIC,
                               0.0 if descriptive else 1.0, descriptive)


def random_dataset(rng: random.Random, max_programs: int = 6, max_indicators: int = 12,
                   min_programs: int = 2, descriptive_share: float = 0.2) -> Dataset:
    n_programs = rng.randint(min_programs, max_programs)
    n_indicators = rng.randint(1, max_indicators)
    defs = []
    for j in range(n_indicators):
        rubric = rng.choice(RUBRICS)
        kind = rng.choice([ValueKind.NUMERIC, ValueKind.NUMERIC, ValueKind.BOOLEAN, ValueKind.ORDINAL])
        descriptive = rng.random() < descriptive_share
        defs.append(IndicatorDefinition(
            f"i{j}", f"indicator {j}", rubric,
            rng.choice([Polarity.HIGHER_BETTER, Polarity.LOWER_BETTER]), kind,
            0.0 if descriptive else rng.choice([1.0, 0.5, 2.0]), descriptive,
            LEVELS if kind is ValueKind.ORDINAL else (),
            "unit" if kind is ValueKind.NUMERIC else None,
        ))
    # every rubric that appears needs a scored member
    for r in {d.rubric for d in defs}:
        members = [d for d in defs if d.rubric is r]
        if not any(d.scored for d in members):
            d = members[0]
            defs[defs.index(d)] = IndicatorDefinition(d.id, d.name, d.rubric, d.polarity, d.kind,
                                                      1.0, False, d.levels, d.unit)
    values = {}
    for i in range(n_programs):
        row = {}
        for d in defs:
            if d.kind is ValueKind.NUMERIC:
                row[d.id] = rng.choice([rng.uniform(-50, 50), float(rng.randint(0, 5)),
                                        rng.uniform(0, 1) * 10.0 ** rng.randint(0, 7)])
            elif d.kind is ValueKind.BOOLEAN:
                row[d.id] = rng.random() < 0.5
            else:
                row[d.id] = rng.choice(LEVELS)
        values[f"p{i}"] = row
    return make_dataset(values, defs)


def random_weights(rng: random.Random, dataset: Dataset):
    """Random rubric and indicator weight maps (unnormalized, strictly positive)."""
    rubric_weights = {r: rng.uniform(0.01, 1.0) for r in dataset.rubrics()}
    indicator_weights = {r: {d.id: rng.uniform(0.01, 1.0) for d in dataset.scored_indicators(r)}
                         for r in dataset.rubrics()}
    return rubric_weights, indicator_weights


# -- oracle ------------------------------------------------------------------

def _encode(defn: IndicatorDefinition, value):
    if value is None:
        return None
    if defn.kind is ValueKind.BOOLEAN:
        return 1.0 if value is True else 0.0
    if defn.kind is ValueKind.ORDINAL:
        return defn.levels.index(value) / (len(defn.levels) - 1)
    return float(value)


def _minmax(column: dict[str, float]) -> dict[str, float]:
    lo = min(column.values())
    hi = max(column.values())
    if hi == lo:
        return {k: 0.5 for k in column}
    return {k: (v - lo) / (hi - lo) for k, v in column.items()}


def oracle(dataset: Dataset, rubric_weights=None, indicator_weights=None):
    """Return ``(raw_crs, normalized_crs, normalized_gmf, additive_gmf)`` dicts.

    Complete data only. Weight maps, when given, are rescaled here.
    """
    programs = [p.id for p in dataset.programs]
    cell = {(v.program, v.indicator): v.value for v in dataset.values}
    scored = [d for d in dataset.indicators if d.weight > 0]
    rubrics = [r for r in RubricId if any(d.rubric is r for d in scored)]

    xnorm = {}
    for d in scored:
        column = {}
        for p in programs:
            x = _encode(d, cell[(p, d.id)])
            column[p] = -x if d.polarity is Polarity.LOWER_BETTER else x
        xnorm[d.id] = _minmax(column)

    w_ind = {}
    for r in rubrics:
        members = [d.id for d in scored if d.rubric is r]
        if indicator_weights and r in indicator_weights:
            total = sum(indicator_weights[r].get(m, 0.0) for m in members)
            w_ind[r] = {m: indicator_weights[r].get(m, 0.0) / total for m in members}
        else:
            w_ind[r] = {m: 1.0 / len(members) for m in members}
    if rubric_weights:
        total = sum(rubric_weights.get(r, 0.0) for r in rubrics)
        w_rub = {r: rubric_weights.get(r, 0.0) / total for r in rubrics}
    else:
        w_rub = {r: 1.0 / len(rubrics) for r in rubrics}

    raw = {p: {} for p in programs}
    for p in programs:
        for r in rubrics:
            s = 0.0
            for m, w in w_ind[r].items():
                s += w * xnorm[m][p]
            raw[p][r] = s

    normed = {p: {} for p in programs}
    for r in rubrics:
        col = _minmax({p: raw[p][r] for p in programs})
        for p in programs:
            normed[p][r] = col[p]

    gmf, additive = {}, {}
    for p in programs:
        gmf[p] = sum(w_rub[r] * normed[p][r] for r in rubrics)
        additive[p] = sum(raw[p][r] for r in rubrics)
    return raw, normed, gmf, additive
