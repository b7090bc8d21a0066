"""Water-quality class lookup against the Malaysian WQI class table."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from importlib import resources
from typing import Mapping

CLASSES = ("I", "IIA", "IIB", "III", "IV", "V")
EXCEEDS = ">V"
RANK = {c: i for i, c in enumerate(CLASSES + (EXCEEDS,))}
TABLE_COLUMNS = ("parameter", "unit", "classI", "classIIA", "classIIB", "classIII", "classIV", "classV")

# parameters where a larger value is better; a bare number in the table is then a lower limit
HIGHER_IS_BETTER = {"do"}

PH_SAFE = (6.5, 9.0)


@dataclass(frozen=True)
class Interval:
    lo: float = -math.inf
    hi: float = math.inf
    lo_open: bool = False
    hi_open: bool = False

    def __contains__(self, v: float) -> bool:
        above = v > self.lo if self.lo_open else v >= self.lo
        below = v < self.hi if self.hi_open else v <= self.hi
        return above and below


def parse_cell(cell: str, higher_is_better: bool = False) -> Interval | None:
    cell = cell.strip()
    if cell in ("", "-"):
        return None
    if cell.startswith(">"):
        return Interval(lo=float(cell[1:]), lo_open=True)
    if cell.startswith("<"):
        return Interval(hi=float(cell[1:]), hi_open=True)
    if "-" in cell[1:]:
        a, b = cell.split("-", 1)
        return Interval(float(a), float(b))
    v = float(cell)
    return Interval(lo=v) if higher_is_better else Interval(hi=v)


@dataclass(frozen=True)
class Row:
    parameter: str
    unit: str
    cells: tuple[str, ...]
    intervals: tuple[Interval | None, ...]


class WqiClassTable:
    def __init__(self, rows: list[Row]):
        self.rows = {r.parameter: r for r in rows}

    @classmethod
    def from_csv_text(cls, text: str) -> "WqiClassTable":
        lines = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
        reader = csv.reader(lines)
        header = next(reader)
        if tuple(header) != TABLE_COLUMNS:
            raise ValueError(f"class table header must be {','.join(TABLE_COLUMNS)}")
        rows = []
        for rec in reader:
            if len(rec) != len(TABLE_COLUMNS):
                raise ValueError(f"class table row {rec[0]!r} has {len(rec)} cells")
            name, unit, *cells = rec
            hib = name in HIGHER_IS_BETTER
            rows.append(Row(name, unit, tuple(cells), tuple(parse_cell(c, hib) for c in cells)))
        return cls(rows)

    @classmethod
    def default(cls) -> "WqiClassTable":
        text = resources.files("asvkit").joinpath("data/wqi_table3.csv").read_text()
        return cls.from_csv_text(text)

    @property
    def parameters(self) -> tuple[str, ...]:
        return tuple(self.rows)

    def classify_value(self, parameter: str, value: float) -> str:
        row = self.rows[parameter]
        for cls_name, iv in zip(CLASSES, row.intervals):
            if iv is not None and value in iv:
                return cls_name
        return EXCEEDS

    def worst_specified(self, parameter: str) -> str:
        row = self.rows[parameter]
        return [c for c, iv in zip(CLASSES, row.intervals) if iv is not None][-1]


@dataclass
class WqiVerdict:
    classes: dict[str, str]
    overall: str
    skipped: list[str] = field(default_factory=list)

    @property
    def exceeded(self) -> list[str]:
        return [p for p, c in self.classes.items() if c == EXCEEDS]


_DEFAULT: WqiClassTable | None = None


def default_table() -> WqiClassTable:
    global _DEFAULT
    if _DEFAULT is None:
        _DEFAULT = WqiClassTable.default()
    return _DEFAULT


def classify(sample: Mapping[str, float | None], table: WqiClassTable | None = None) -> WqiVerdict:
    """Best class per parameter; overall = worst of them. ``None``/NaN values are skipped."""
    table = table or default_table()
    unknown = set(sample) - set(table.parameters)
    if unknown:
        raise ValueError(f"unknown parameters {sorted(unknown)}; known: {', '.join(table.parameters)}")
    classes, skipped = {}, []
    for name in sorted(sample):
        v = sample[name]
        if v is None or (isinstance(v, float) and math.isnan(v)):
            skipped.append(name)
            continue
        v = float(v)
        if v < 0:
            raise ValueError(f"{name} = {v}: negative values are not valid")
        classes[name] = table.classify_value(name, v)
    if not classes:
        raise ValueError("sample has no parameter values")
    overall = max(classes.values(), key=RANK.__getitem__)
    return WqiVerdict(classes, overall, skipped)


@dataclass(frozen=True)
class PhRangeCheck:
    min: float
    max: float
    safe: bool


def ph_safe_range_check(ph_series) -> PhRangeCheck:
    values = [float(v) for v in ph_series]
    if not values:
        raise ValueError("empty pH series")
    lo, hi = min(values), max(values)
    return PhRangeCheck(lo, hi, PH_SAFE[0] <= lo and hi <= PH_SAFE[1])


# columns of a sample CSV that carry no WQI parameter
META_COLUMNS = {"sample", "t_ms", "x_m", "y_m", "heading_deg", "temp_C"}


def read_samples(path) -> tuple[list[tuple[str, dict]], list[str]]:
    """Read a samples CSV; returns (id, parameter map) pairs and row error messages.

    Accepts the shore-log layout as well: ``ec_mScm`` is converted to uS/cm.
    """
    with open(path, newline="") as fh:
        text = fh.read()
    reader = csv.DictReader(io.StringIO(text))
    if not reader.fieldnames:
        raise ValueError(f"{path}: empty samples CSV")
    table = default_table()
    cols = [c for c in reader.fieldnames if c not in META_COLUMNS]
    unknown = [c for c in cols if c not in table.parameters and c != "ec_mScm"]
    if unknown:
        raise ValueError(f"{path}: unknown parameter columns {unknown}")
    samples, errors = [], []
    for i, row in enumerate(reader):
        line = reader.line_num
        sid = row.get("sample") or row.get("t_ms") or str(i + 1)
        params = {}
        try:
            for c in cols:
                cell = (row[c] or "").strip()
                value = float(cell) if cell else None
                if c == "ec_mScm":
                    params["ec"] = None if value is None else value * 1000.0
                else:
                    params[c] = value
        except ValueError as exc:
            errors.append(f"line {line}: {exc}")
            continue
        samples.append((sid, params))
    return samples, errors
