"""Dataset model for grant-program indicators: ingestion, encoding, validation.

A dataset holds programs, indicator definitions and one value cell per
(program, indicator) pair. Missing values are explicit: ``null`` in JSON,
the literal ``Missing`` in CSV-long files, ``None`` in Python.
"""

from __future__ import annotations

import csv
import io
import json
import math
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import IO, Any, Iterable, Mapping, Union

from .errors import DatasetSyntaxError, KindMismatchError, SchemaError
from .findings import Finding, ValidationReport, error, warning

MISSING = None
MISSING_LITERAL = "Missing"

CellValue = Union[float, bool, str, None]


class RubricId(str, Enum):
    FAO = "FAO"
    PSO = "PSO"
    GOV = "GOV"
    EFI = "EFI"
    TAC = "TAC"
    COM = "COM"

    @property
    def title(self) -> str:
        return RUBRIC_TITLES[self]


RUBRIC_TITLES = {
    RubricId.FAO: "Focus Areas, Objectives",
    RubricId.PSO: "Program Structure",
    RubricId.GOV: "Governance",
    RubricId.EFI: "Effectiveness, Impact",
    RubricId.TAC: "Transparency",
    RubricId.COM: "Community Engagement",
}


def parse_rubric(text: Any, record: str | None = None) -> RubricId:
    try:
        return RubricId(text)
    except ValueError:
        raise SchemaError(f"unknown rubric id {text!r}", record) from None


class Polarity(str, Enum):
    HIGHER_BETTER = "higher_better"
    LOWER_BETTER = "lower_better"


class ValueKind(str, Enum):
    NUMERIC = "numeric"
    BOOLEAN = "boolean"
    ORDINAL = "ordinal"


@dataclass(frozen=True)
class IndicatorDefinition:
    id: str
    name: str
    rubric: RubricId
    polarity: Polarity = Polarity.HIGHER_BETTER
    kind: ValueKind = ValueKind.NUMERIC
    weight: float = 1.0
    descriptive: bool = False
    levels: tuple[str, ...] = ()
    unit: str | None = None

    def __post_init__(self):
        record = f"indicator {self.id}"
        if not isinstance(self.weight, (int, float)) or isinstance(self.weight, bool) \
                or not math.isfinite(self.weight) or self.weight < 0:
            raise SchemaError(f"weight must be a finite nonnegative number, got {self.weight!r}", record)
        if (self.weight == 0) != bool(self.descriptive):
            raise SchemaError("weight is zero exactly when the indicator is descriptive", record)
        if self.kind is ValueKind.ORDINAL:
            if len(set(self.levels)) < 2 or len(set(self.levels)) != len(self.levels):
                raise SchemaError("ordinal indicators need at least two distinct levels", record)
        elif self.levels:
            raise SchemaError(f"levels given for a {self.kind.value} indicator", record)

    @property
    def scored(self) -> bool:
        return not self.descriptive


@dataclass(frozen=True)
class Program:
    id: str
    name: str
    ecosystem: str = ""
    metadata: Mapping[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class IndicatorValue:
    program: str
    indicator: str
    value: CellValue


@dataclass(frozen=True)
class Dataset:
    programs: tuple[Program, ...]
    indicators: tuple[IndicatorDefinition, ...]
    values: tuple[IndicatorValue, ...]

    def __post_init__(self):
        # accept lists from callers; store tuples
        for name in ("programs", "indicators", "values"):
            object.__setattr__(self, name, tuple(getattr(self, name)))

    @cached_property
    def program_ids(self) -> list[str]:
        return [p.id for p in self.programs]

    @cached_property
    def indicator_map(self) -> dict[str, IndicatorDefinition]:
        return {d.id: d for d in self.indicators}

    @cached_property
    def cells(self) -> dict[tuple[str, str], CellValue]:
        return {(v.program, v.indicator): v.value for v in self.values}

    @cached_property
    def validation(self) -> ValidationReport:
        """Findings of :func:`validate_dataset`, computed once per instance."""
        return validate_dataset(self)

    def value(self, program: str, indicator: str) -> CellValue:
        return self.cells[(program, indicator)]

    def rubrics(self) -> list[RubricId]:
        """Rubrics with at least one scored indicator, in canonical order."""
        present = {d.rubric for d in self.indicators if d.scored}
        return [r for r in RubricId if r in present]

    def scored_indicators(self, rubric: RubricId | None = None) -> list[IndicatorDefinition]:
        return [d for d in self.indicators
                if d.scored and (rubric is None or d.rubric is rubric)]

    def without_indicator(self, indicator_id: str) -> "Dataset":
        return Dataset(
            self.programs,
            tuple(d for d in self.indicators if d.id != indicator_id),
            tuple(v for v in self.values if v.indicator != indicator_id),
        )

    def replace_value(self, program: str, indicator: str, value: CellValue) -> "Dataset":
        return Dataset(
            self.programs,
            self.indicators,
            tuple(IndicatorValue(v.program, v.indicator, value)
                  if (v.program, v.indicator) == (program, indicator) else v
                  for v in self.values),
        )


# -- kind checking and encoding ----------------------------------------------

def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def check_kind(value: CellValue, definition: IndicatorDefinition, record: str | None = None) -> None:
    """Raise KindMismatchError unless ``value`` fits ``definition.kind`` (or is missing)."""
    if value is MISSING:
        return
    kind = definition.kind
    if kind is ValueKind.NUMERIC:
        if not _is_number(value) or not math.isfinite(value):
            raise KindMismatchError(f"expected a finite number for numeric indicator, got {value!r}", record)
    elif kind is ValueKind.BOOLEAN:
        if not isinstance(value, bool):
            raise KindMismatchError(f"expected a boolean, got {value!r}", record)
    elif not isinstance(value, str) or value not in definition.levels:
        raise KindMismatchError(
            f"expected one of the levels {list(definition.levels)}, got {value!r}", record)


def encode_value(value: CellValue | IndicatorValue, definition: IndicatorDefinition) -> float | None:
    """Map a raw cell onto the real line.

    Booleans become 0/1, ordinal levels their 0-based index over (L - 1),
    numbers pass through, missing stays missing.
    """
    if isinstance(value, IndicatorValue):
        value = value.value
    check_kind(value, definition, f"indicator {definition.id}")
    if value is MISSING:
        return MISSING
    if definition.kind is ValueKind.BOOLEAN:
        return 1.0 if value else 0.0
    if definition.kind is ValueKind.ORDINAL:
        return definition.levels.index(value) / (len(definition.levels) - 1)
    return float(value)


# -- parsing -----------------------------------------------------------------

def _reject_constant(name: str):
    raise ValueError(f"non-finite number {name} is not allowed")


def load_json_document(source: bytes | str | IO) -> Any:
    if hasattr(source, "read"):
        source = source.read()
    if isinstance(source, bytes):
        try:
            source = source.decode("utf-8-sig")
        except UnicodeDecodeError as exc:
            raise DatasetSyntaxError(f"input is not valid UTF-8: {exc}") from None
    try:
        return json.loads(source, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise DatasetSyntaxError(exc.msg, exc.lineno, exc.colno) from None
    except ValueError as exc:
        raise DatasetSyntaxError(str(exc)) from None


def _fields(doc: Any, record: str, required: Iterable[str], optional: Iterable[str] = ()) -> dict:
    if not isinstance(doc, dict):
        raise SchemaError("expected an object", record)
    required = tuple(required)
    allowed = set(required) | set(optional)
    for key in doc:
        if key not in allowed and not key.startswith("$"):
            raise SchemaError(f"unexpected field {key!r}", record)
    for key in required:
        if key not in doc:
            raise SchemaError(f"missing field {key!r}", record)
    return doc


def _string(doc: dict, key: str, record: str, default: str | None = None) -> str:
    value = doc.get(key, default)
    if not isinstance(value, str):
        raise SchemaError(f"field {key!r} must be a string", record)
    return value


def _enum(cls, doc: dict, key: str, record: str, default=None):
    raw = doc.get(key, default)
    try:
        return cls(raw)
    except ValueError:
        allowed = ", ".join(m.value for m in cls)
        raise SchemaError(f"field {key!r} must be one of {allowed}; got {raw!r}", record) from None


def _parse_program(doc: Any, index: int) -> Program:
    record = f"programs[{index}]"
    _fields(doc, record, ("id", "name"), ("ecosystem", "metadata"))
    metadata = doc.get("metadata", {})
    if not isinstance(metadata, dict) or not all(
            isinstance(k, str) and isinstance(v, str) for k, v in metadata.items()):
        raise SchemaError("metadata must map strings to strings", record)
    pid = _string(doc, "id", record)
    if not pid:
        raise SchemaError("program id must be non-empty", record)
    return Program(pid, _string(doc, "name", record), _string(doc, "ecosystem", record, ""), dict(metadata))


def _parse_indicator(doc: Any, index: int) -> IndicatorDefinition:
    record = f"indicators[{index}]"
    _fields(doc, record, ("id", "name", "rubric", "kind"),
            ("polarity", "levels", "unit", "weight", "descriptive"))
    iid = _string(doc, "id", record)
    if not iid:
        raise SchemaError("indicator id must be non-empty", record)
    record = f"indicators[{index}] ({iid})"
    descriptive = doc.get("descriptive", False)
    if not isinstance(descriptive, bool):
        raise SchemaError("field 'descriptive' must be a boolean", record)
    weight = doc.get("weight", 0.0 if descriptive else 1.0)
    if not _is_number(weight):
        raise SchemaError("field 'weight' must be a number", record)
    levels = doc.get("levels", [])
    if not isinstance(levels, list) or not all(isinstance(x, str) for x in levels):
        raise SchemaError("field 'levels' must be a list of strings", record)
    unit = doc.get("unit")
    if unit is not None and not isinstance(unit, str):
        raise SchemaError("field 'unit' must be a string", record)
    try:
        return IndicatorDefinition(
            id=iid,
            name=_string(doc, "name", record),
            rubric=parse_rubric(doc["rubric"], record),
            polarity=_enum(Polarity, doc, "polarity", record, Polarity.HIGHER_BETTER.value),
            kind=_enum(ValueKind, doc, "kind", record),
            weight=float(weight),
            descriptive=descriptive,
            levels=tuple(levels),
            unit=unit,
        )
    except SchemaError as exc:
        if exc.record == f"indicator {iid}":
            raise SchemaError(exc.detail, record) from None
        raise


def _parse_header(doc: Any, need_values: bool) -> tuple[list[Program], list[IndicatorDefinition]]:
    if not isinstance(doc, dict):
        raise SchemaError("top level must be an object", "document")
    if need_values:
        _fields(doc, "document", ("programs", "indicators", "values"))
    else:
        _fields(doc, "sidecar", ("programs", "indicators"))
    for key in ("programs", "indicators"):
        if not isinstance(doc[key], list):
            raise SchemaError(f"{key!r} must be an array", "document")
    programs = [_parse_program(p, i) for i, p in enumerate(doc["programs"])]
    indicators = [_parse_indicator(d, i) for i, d in enumerate(doc["indicators"])]
    for kind, ids in (("program", [p.id for p in programs]), ("indicator", [d.id for d in indicators])):
        dupes = [k for k, n in Counter(ids).items() if n > 1]
        if dupes:
            raise SchemaError(f"duplicate {kind} id {dupes[0]!r}", f"{kind}s")
    return programs, indicators


class _CellCollector:
    """Resolves ids, checks kinds and rejects repeated (program, indicator) pairs."""

    def __init__(self, programs: list[Program], indicators: list[IndicatorDefinition]):
        self.program_ids = {p.id for p in programs}
        self.defs = {d.id: d for d in indicators}
        self.seen: dict[tuple[str, str], str] = {}
        self.values: list[IndicatorValue] = []

    def add(self, program: Any, indicator: Any, value: CellValue, record: str) -> None:
        if not isinstance(program, str) or program not in self.program_ids:
            raise SchemaError(f"unknown program {program!r}", record)
        if not isinstance(indicator, str) or indicator not in self.defs:
            raise SchemaError(f"unknown indicator {indicator!r}", record)
        key = (program, indicator)
        if key in self.seen:
            raise SchemaError(
                f"duplicate value for pair (program={program}, indicator={indicator}); "
                f"first given at {self.seen[key]}", record)
        self.seen[key] = record
        check_kind(value, self.defs[indicator], f"{record} (program={program}, indicator={indicator})")
        if _is_number(value):
            value = float(value)
        self.values.append(IndicatorValue(program, indicator, value))


def _parse_json_dataset(doc: Any) -> Dataset:
    programs, indicators = _parse_header(doc, need_values=True)
    if not isinstance(doc["values"], list):
        raise SchemaError("'values' must be an array", "document")
    cells = _CellCollector(programs, indicators)
    for i, item in enumerate(doc["values"]):
        record = f"values[{i}]"
        _fields(item, record, ("program", "indicator", "value"))
        cells.add(item["program"], item["indicator"], item["value"], record)
    return Dataset(tuple(programs), tuple(indicators), tuple(cells.values))


def _csv_cell(text: str, definition: IndicatorDefinition, record: str) -> CellValue:
    if text == MISSING_LITERAL:
        return MISSING
    if definition.kind is ValueKind.NUMERIC:
        try:
            number = float(text)
        except ValueError:
            raise KindMismatchError(f"expected a number, got {text!r}", record) from None
        if not math.isfinite(number):
            raise KindMismatchError(f"expected a finite number, got {text!r}", record)
        return number
    if definition.kind is ValueKind.BOOLEAN:
        lowered = text.strip().lower()
        if lowered not in ("true", "false"):
            raise KindMismatchError(f"expected true or false, got {text!r}", record)
        return lowered == "true"
    return text


def _parse_csv_long(text: str, sidecar: Any) -> Dataset:
    programs, indicators = _parse_header(sidecar, need_values=False)
    defs = {d.id: d for d in indicators}
    cells = _CellCollector(programs, indicators)
    reader = csv.reader(io.StringIO(text, newline=""), strict=True)
    try:
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["program", "indicator", "value"]:
            raise DatasetSyntaxError("header must be 'program,indicator,value'", 1)
        for row in reader:
            line = reader.line_num
            if not row or row == [""]:
                continue
            if len(row) != 3:
                raise DatasetSyntaxError(f"expected 3 fields, found {len(row)}", line)
            program, indicator, raw = (c.strip() for c in row)
            record = f"line {line}"
            value = raw
            if indicator in defs:
                value = _csv_cell(raw, defs[indicator], f"{record} (program={program}, indicator={indicator})")
            cells.add(program, indicator, value, record)
    except csv.Error as exc:
        raise DatasetSyntaxError(str(exc), reader.line_num) from None
    return Dataset(tuple(programs), tuple(indicators), tuple(cells.values))


def parse_dataset(source: bytes | str | IO, format: str = "json",
                  sidecar: bytes | str | IO | Mapping | None = None) -> Dataset:
    """Parse a dataset from a JSON document or a CSV-long value file.

    CSV-long files carry only ``program,indicator,value`` rows; program and
    indicator definitions come from ``sidecar`` (a JSON document, or an
    already-decoded mapping).
    """
    fmt = format.lower()
    if fmt == "json":
        return _parse_json_dataset(load_json_document(source))
    if fmt in ("csv", "csv-long"):
        if sidecar is None:
            raise SchemaError("CSV-long input needs a sidecar JSON with programs and indicators", "sidecar")
        side = sidecar if isinstance(sidecar, Mapping) else load_json_document(sidecar)
        if hasattr(source, "read"):
            source = source.read()
        if isinstance(source, bytes):
            try:
                source = source.decode("utf-8-sig")
            except UnicodeDecodeError as exc:
                raise DatasetSyntaxError(f"input is not valid UTF-8: {exc}") from None
        return _parse_csv_long(source, side)
    raise ValueError(f"unsupported dataset format {format!r}")


# -- serialization -----------------------------------------------------------

def _program_doc(p: Program) -> dict:
    return {"id": p.id, "name": p.name, "ecosystem": p.ecosystem, "metadata": dict(p.metadata)}


def _indicator_doc(d: IndicatorDefinition) -> dict:
    doc = {"id": d.id, "name": d.name, "rubric": d.rubric.value, "polarity": d.polarity.value,
           "kind": d.kind.value, "weight": d.weight, "descriptive": d.descriptive}
    if d.levels:
        doc["levels"] = list(d.levels)
    if d.unit is not None:
        doc["unit"] = d.unit
    return doc


def dataset_to_dict(d: Dataset, include_values: bool = True) -> dict:
    doc = {
        "programs": [_program_doc(p) for p in d.programs],
        "indicators": [_indicator_doc(x) for x in d.indicators],
    }
    if include_values:
        doc["values"] = [{"program": v.program, "indicator": v.indicator, "value": v.value}
                         for v in d.values]
    return doc


def serialize_dataset(d: Dataset) -> str:
    return json.dumps(dataset_to_dict(d), indent=2, ensure_ascii=False) + "\n"


def serialize_csv_long(d: Dataset) -> tuple[str, str]:
    """Return ``(csv_text, sidecar_json)`` for the CSV-long layout."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["program", "indicator", "value"])
    for v in d.values:
        if v.value is MISSING:
            text = MISSING_LITERAL
        elif isinstance(v.value, bool):
            text = "true" if v.value else "false"
        else:
            text = repr(v.value) if isinstance(v.value, float) else str(v.value)
        writer.writerow([v.program, v.indicator, text])
    sidecar = json.dumps(dataset_to_dict(d, include_values=False), indent=2, ensure_ascii=False) + "\n"
    return buf.getvalue(), sidecar


# -- validation --------------------------------------------------------------

def validate_dataset(d: Dataset, rubric_weights: Mapping[RubricId, float] | None = None) -> ValidationReport:
    """Check every dataset invariant and report findings instead of raising."""
    findings: list[Finding] = []
    for kind, ids in (("program", [p.id for p in d.programs]), ("indicator", [x.id for x in d.indicators])):
        for ident, n in Counter(ids).items():
            if n > 1:
                findings.append(error(f"duplicate_{kind}", f"{kind} id appears {n} times", ident))

    program_ids = set(d.program_ids)
    defs = d.indicator_map
    seen: Counter = Counter()
    for v in d.values:
        subject = f"program={v.program}, indicator={v.indicator}"
        if v.program not in program_ids:
            findings.append(error("unknown_program", f"unknown program {v.program!r}", subject))
            continue
        if v.indicator not in defs:
            findings.append(error("unknown_indicator", f"unknown indicator {v.indicator!r}", subject))
            continue
        seen[(v.program, v.indicator)] += 1
        try:
            check_kind(v.value, defs[v.indicator])
        except KindMismatchError as exc:
            findings.append(error("kind_mismatch", str(exc), subject))
    for pair, n in seen.items():
        if n > 1:
            findings.append(error("duplicate_value", f"pair has {n} values",
                                  f"program={pair[0]}, indicator={pair[1]}"))

    for p in d.programs:
        for x in d.indicators:
            if (p.id, x.id) not in seen:
                findings.append(error("missing_cell", "no value for pair",
                                      f"program={p.id}, indicator={x.id}"))

    for rubric in RubricId:
        members = [x for x in d.indicators if x.rubric is rubric]
        if members and not any(x.scored for x in members):
            findings.append(error("descriptive_only_rubric",
                                  "rubric has only descriptive (zero-weight) indicators", rubric.value))
        if members and rubric_weights is not None and rubric_weights.get(rubric, 0.0) == 0.0 \
                and any(x.scored for x in members):
            findings.append(warning("unweighted_rubric",
                                    "rubric is present but carries zero weight in the scoring config",
                                    rubric.value))

    totals: Counter = Counter()
    missing: Counter = Counter()
    for (prog, _), val in d.cells.items():
        totals[prog] += 1
        missing[prog] += val is MISSING
    for p in d.programs:
        if totals[p.id] and missing[p.id] / totals[p.id] > 0.5:
            share = missing[p.id] / totals[p.id]
            findings.append(warning("mostly_missing",
                                    f"{share:.0%} missing ({missing[p.id]} of {totals[p.id]} values)", p.id))
    return ValidationReport.of(findings)
