"""Free-decay analysis of the twin-hull roll/pitch oscillation tests.

Units stay imperial as recorded: displacements in inches, stiffness in
lbs/ft, damping constants in lbs*sec/ft.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

LABELS = ("roll", "pitch-back", "pitch-front")
TABLE1_COLUMNS = ("label", "freeboard_in", "n", "b1_in", "bn1_in", "dt_s", "k_lbsft")
TABLE2_COLUMNS = ("delta", "zeta", "omega_d", "omega_n", "k", "c", "cc")


@dataclass(frozen=True)
class OscillationRecord:
    label: str
    freeboard: float
    n_cycles: int
    b1: float
    b_n1: float
    delta_t: float
    k_stiffness: float

    def __post_init__(self):
        if self.n_cycles < 1:
            raise ValueError(f"n_cycles must be >= 1, got {self.n_cycles}")
        if not self.b_n1 > 0:
            raise ValueError(f"b_n1 must be > 0, got {self.b_n1}")
        if not self.b1 > self.b_n1:
            raise ValueError(f"amplitude grows (b1={self.b1} <= b_n1={self.b_n1}); not a decay")
        if not self.delta_t > 0:
            raise ValueError(f"delta_t must be > 0, got {self.delta_t}")
        if not self.k_stiffness > 0:
            raise ValueError(f"k_stiffness must be > 0, got {self.k_stiffness}")

    @property
    def period(self) -> float:
        return self.delta_t / self.n_cycles


@dataclass(frozen=True)
class OscillationAnalysis:
    delta: float
    zeta: float
    omega_d: float
    omega_n: float
    k: float
    c_damping: float
    cc_critical: float
    period: float

    def row(self) -> tuple[float, ...]:
        return (self.delta, self.zeta, self.omega_d, self.omega_n, self.k,
                self.c_damping, self.cc_critical)


def damping_ratio(delta: float, convention: str = "paper") -> float:
    """Damping ratio from the logarithmic decrement.

    ``"paper"`` reproduces the published table, zeta = delta / (4 pi).
    ``"textbook"`` is the exact relation delta / sqrt(4 pi^2 + delta^2).
    """
    if convention == "paper":
        return delta / (4.0 * math.pi)
    if convention == "textbook":
        return delta / math.sqrt(4.0 * math.pi**2 + delta**2)
    raise ValueError(f"unknown damping convention {convention!r}")


def analyze_decay(rec: OscillationRecord, convention: str = "paper") -> OscillationAnalysis:
    period = rec.period
    delta = math.log(rec.b1 / rec.b_n1) / rec.n_cycles
    zeta = damping_ratio(delta, convention)
    if not 0 < zeta < 1:
        raise ValueError(f"damping ratio {zeta:.4g} is not underdamped")
    omega_d = 2.0 * math.pi / period
    omega_n = omega_d / math.sqrt(1.0 - zeta**2)
    # cc = 2 m omega_n with m = k / omega_n^2; the mass never appears
    cc = 2.0 * rec.k_stiffness / omega_n
    return OscillationAnalysis(delta, zeta, omega_d, omega_n, rec.k_stiffness, zeta * cc, cc, period)


def decay_envelope(analysis: OscillationAnalysis, b1: float, t) -> np.ndarray:
    """Amplitude envelope b1 * exp(-sigma * t).

    sigma = (delta / 2 pi) * omega_d = delta / P is the decay rate per second
    that the decrement measures directly, so b(n P) = b1 exp(-n delta).
    """
    sigma = analysis.delta / (2.0 * math.pi) * analysis.omega_d
    return b1 * np.exp(-sigma * np.asarray(t, dtype=float))


def free_response(analysis: OscillationAnalysis, b1: float, t) -> np.ndarray:
    """Free oscillation x(t) = envelope(t) * cos(omega_d t), released from rest-amplitude b1."""
    t = np.asarray(t, dtype=float)
    return decay_envelope(analysis, b1, t) * np.cos(analysis.omega_d * t)


def second_order_roots(m: float, c: float, k: float) -> tuple[complex, complex, bool]:
    """Roots of m s^2 + c s + k = 0 and whether both lie strictly in the left half plane."""
    if m == 0:
        raise ValueError("m must be nonzero")
    disc = c * c - 4.0 * m * k
    if disc >= 0:
        sq = math.sqrt(disc)
        s1 = complex((-c + sq) / (2.0 * m))
        s2 = complex((-c - sq) / (2.0 * m))
    else:
        # complex pair: keep the real part exact so marginal cases are not misjudged
        re, im = -c / (2.0 * m), math.sqrt(-disc) / (2.0 * abs(m))
        s1, s2 = complex(re, im), complex(re, -im)
    return s1, s2, bool(s1.real < 0 and s2.real < 0)


class RowError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


def read_table1(path) -> tuple[list[tuple[int, OscillationRecord]], list[RowError]]:
    """Parse a decay-test CSV. Returns (line number, record) pairs and per-row errors."""
    records, errors = [], []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ValueError(f"{path}: empty CSV")
        missing = set(TABLE1_COLUMNS) - set(reader.fieldnames)
        if missing:
            raise ValueError(f"{path}: missing columns {sorted(missing)}")
        for row in reader:
            line = reader.line_num
            try:
                rec = OscillationRecord(
                    label=row["label"].strip(),
                    freeboard=float(row["freeboard_in"]),
                    n_cycles=int(row["n"]),
                    b1=float(row["b1_in"]),
                    b_n1=float(row["bn1_in"]),
                    delta_t=float(row["dt_s"]),
                    k_stiffness=float(row["k_lbsft"]),
                )
            except (TypeError, ValueError) as exc:
                errors.append(RowError(line, str(exc)))
                continue
            records.append((line, rec))
    return records, errors


def read_table2(path) -> list[OscillationAnalysis]:
    rows = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            v = {k: float(row[k]) for k in TABLE2_COLUMNS}
            rows.append(OscillationAnalysis(v["delta"], v["zeta"], v["omega_d"], v["omega_n"],
                                            v["k"], v["c"], v["cc"], 2 * math.pi / v["omega_d"]))
    return rows


# Comparison tolerances, per column
TOLERANCES = {"delta": 0.005, "zeta": 0.0005, "omega_d": 0.005, "omega_n": 0.005,
              "k": 1e-9, "c": 0.01, "cc": 0.1}


def compare(got: OscillationAnalysis, expected: OscillationAnalysis) -> dict[str, float]:
    """Absolute deviation per column."""
    return {name: abs(a - b) for name, a, b in zip(TABLE2_COLUMNS, got.row(), expected.row())}


def within_tolerance(deviation: dict[str, float]) -> bool:
    return all(deviation[k] <= TOLERANCES[k] for k in TABLE2_COLUMNS)
