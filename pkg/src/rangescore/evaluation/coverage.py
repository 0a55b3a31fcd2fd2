"""Attack-centric detection coverage from a technique-by-config matrix.

Each cell says whether a sensor configuration raised at least one alert for
a technique the attackers actually performed. Per-config coverage is the
detected fraction; the headline number is how many techniques no
configuration caught at all.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from decimal import ROUND_HALF_EVEN, Decimal
from fractions import Fraction
from pathlib import Path
from typing import Mapping, Sequence


class MatrixError(ValueError):
    """Matrix fails validation (not rectangular, duplicate cell, bad flag)."""


@dataclass(frozen=True, slots=True)
class MatrixCell:
    detected: bool
    severity: str | None = None
    precise: bool | None = None


@dataclass(frozen=True)
class DetectionMatrix:
    """Rectangular (technique, config) -> cell map; construction validates."""

    techniques: tuple[str, ...]
    configs: tuple[str, ...]
    cells: Mapping[tuple[str, str], MatrixCell]

    def __post_init__(self) -> None:
        if not self.techniques or not self.configs:
            raise MatrixError("matrix needs at least one technique and one config")
        if len(set(self.techniques)) != len(self.techniques):
            raise MatrixError("duplicate technique ids")
        if len(set(self.configs)) != len(self.configs):
            raise MatrixError("duplicate config ids")
        expect = {(t, c) for t in self.techniques for c in self.configs}
        have = set(self.cells.keys())
        if have != expect:
            missing = sorted(expect - have)[:5]
            extra = sorted(have - expect)[:5]
            raise MatrixError(f"matrix not rectangular; missing {missing}, extra {extra}")

    def cell(self, technique: str, config: str) -> MatrixCell:
        return self.cells[(technique, config)]

    def detected(self, technique: str, config: str) -> bool:
        return self.cells[(technique, config)].detected


@dataclass(frozen=True)
class CoverageReport:
    per_config: tuple[tuple[str, Fraction], ...]
    undetected_everywhere: tuple[str, ...]
    technique_count: int

    @property
    def undetected_count(self) -> int:
        return len(self.undetected_everywhere)

    def coverage_of(self, config: str) -> Fraction:
        for name, value in self.per_config:
            if name == config:
                return value
        raise KeyError(config)

    def as_json_obj(self) -> dict:
        return {
            "kind": "coverage",
            "technique_count": self.technique_count,
            "per_config": {name: _frac_str(value) for name, value in self.per_config},
            "undetected_everywhere": list(self.undetected_everywhere),
            "undetected_count": self.undetected_count,
        }

    def as_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["config", "coverage", "detected", "technique_count"])
        for name, value in self.per_config:
            writer.writerow([name, _frac_str(value),
                             int(value * self.technique_count), self.technique_count])
        writer.writerow([])
        writer.writerow(["undetected_everywhere"])
        for t in self.undetected_everywhere:
            writer.writerow([t])
        return buf.getvalue()


def _frac_str(value: Fraction) -> str:
    exact = Decimal(value.numerator) / Decimal(value.denominator)
    return str(exact.quantize(Decimal("0.000001"), rounding=ROUND_HALF_EVEN))


def detection_coverage(matrix: DetectionMatrix) -> CoverageReport:
    """Per-config detected fraction plus the undetected-everywhere set.

    The undetected set keeps the matrix's technique order so reports are
    stable under re-export.
    """
    per_config = []
    for config in matrix.configs:
        detected = sum(1 for t in matrix.techniques if matrix.detected(t, config))
        per_config.append((config, Fraction(detected, len(matrix.techniques))))
    undetected = tuple(
        t for t in matrix.techniques
        if not any(matrix.detected(t, c) for c in matrix.configs)
    )
    return CoverageReport(
        per_config=tuple(per_config),
        undetected_everywhere=undetected,
        technique_count=len(matrix.techniques),
    )


def matrix_from_rows(rows: Sequence[Mapping]) -> DetectionMatrix:
    """Build a matrix from cell rows (technique_id, config, detected[, severity, precise]).

    Order of first appearance fixes technique and config order.
    """
    techniques: list[str] = []
    configs: list[str] = []
    cells: dict[tuple[str, str], MatrixCell] = {}
    for row in rows:
        technique = str(row["technique_id"]).strip()
        config = str(row["config"]).strip()
        if technique not in techniques:
            techniques.append(technique)
        if config not in configs:
            configs.append(config)
        key = (technique, config)
        if key in cells:
            raise MatrixError(f"duplicate cell {key}")
        severity = row.get("severity") or None
        precise_raw = row.get("precise")
        precise = None if precise_raw in (None, "") else _bool(precise_raw)
        cells[key] = MatrixCell(detected=_bool(row["detected"]),
                                severity=severity, precise=precise)
    return DetectionMatrix(techniques=tuple(techniques), configs=tuple(configs), cells=cells)


def load_matrix(path: str | Path) -> DetectionMatrix:
    """Read the cell CSV: technique_id,config,detected,severity,precise."""
    text = Path(path).read_text(encoding="utf-8")
    return matrix_from_rows(list(csv.DictReader(text.splitlines())))


def _bool(value: object) -> bool:
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in ("1", "true", "yes", "y"):
        return True
    if text in ("0", "false", "no", "n"):
        return False
    raise MatrixError(f"bad boolean {value!r}")
