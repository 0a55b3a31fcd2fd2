"""Technique-table summaries comparing exercised behavior against a
published campaign's technique list.

Each row records whether the reference campaign lists the technique (vt),
whether the testbed could exercise it (app), whether forensic evidence was
found (forensic), and how many team writeups mentioned it (writeups). The
headline counts quantify realism: of the campaign techniques applicable in
the testbed, how many did teams actually perform and how many left traces.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence


class TableError(ValueError):
    """Technique table row fails validation."""


@dataclass(frozen=True, slots=True)
class TechniqueRow:
    tactic: str
    technique_id: str
    vt: bool
    app: bool
    forensic: bool
    writeups: int

    def __post_init__(self) -> None:
        if not self.technique_id:
            raise TableError("row needs a technique_id")
        if self.writeups < 0:
            raise TableError(f"{self.technique_id}: negative writeup count")


@dataclass(frozen=True)
class TacticCounts:
    tactic: str
    applicable: int
    writeup_covered: int
    forensic_flagged: int


@dataclass(frozen=True)
class AttckSummary:
    applicable: int
    writeup_covered: int
    forensic_flagged: int
    per_tactic: tuple[TacticCounts, ...]
    total_rows: int
    campaign_rows: int

    def as_json_obj(self) -> dict:
        return {
            "kind": "attck",
            "total_rows": self.total_rows,
            "campaign_rows": self.campaign_rows,
            "applicable": self.applicable,
            "writeup_covered": self.writeup_covered,
            "forensic_flagged": self.forensic_flagged,
            "per_tactic": [
                {
                    "tactic": t.tactic,
                    "applicable": t.applicable,
                    "writeup_covered": t.writeup_covered,
                    "forensic_flagged": t.forensic_flagged,
                }
                for t in self.per_tactic
            ],
        }

    def as_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["tactic", "applicable", "writeup_covered", "forensic_flagged"])
        writer.writerow(["(all)", self.applicable, self.writeup_covered, self.forensic_flagged])
        for t in self.per_tactic:
            writer.writerow([t.tactic, t.applicable, t.writeup_covered, t.forensic_flagged])
        return buf.getvalue()


def attck_summary(rows: Iterable[TechniqueRow]) -> AttckSummary:
    """Count applicable / writeup-covered / forensic-flagged techniques.

    All three counts range over rows with vt AND app set; writeup coverage
    additionally needs writeups > 0, the forensic count additionally needs
    the forensic flag. Per-tactic blocks keep first-appearance order.
    """
    rows = list(rows)
    tactic_order: list[str] = []
    per_tactic: dict[str, list[int]] = {}
    applicable = writeup_covered = forensic_flagged = 0
    campaign_rows = 0
    for row in rows:
        if row.tactic not in tactic_order:
            tactic_order.append(row.tactic)
            per_tactic[row.tactic] = [0, 0, 0]
        if row.vt:
            campaign_rows += 1
        if not (row.vt and row.app):
            continue
        applicable += 1
        per_tactic[row.tactic][0] += 1
        if row.writeups > 0:
            writeup_covered += 1
            per_tactic[row.tactic][1] += 1
        if row.forensic:
            forensic_flagged += 1
            per_tactic[row.tactic][2] += 1
    return AttckSummary(
        applicable=applicable,
        writeup_covered=writeup_covered,
        forensic_flagged=forensic_flagged,
        per_tactic=tuple(
            TacticCounts(tactic=t, applicable=per_tactic[t][0],
                         writeup_covered=per_tactic[t][1], forensic_flagged=per_tactic[t][2])
            for t in tactic_order
        ),
        total_rows=len(rows),
        campaign_rows=campaign_rows,
    )


def load_technique_table(path: str | Path, max_writeups: int | None = None) -> list[TechniqueRow]:
    """Read the table CSV: tactic,technique_id,vt,app,forensic,writeups.

    max_writeups, when given, bounds the writeup counts (the shipped fixture
    comes from a corpus of 14 writeups).
    """
    text = Path(path).read_text(encoding="utf-8")
    rows = []
    for raw in csv.DictReader(text.splitlines()):
        row = TechniqueRow(
            tactic=raw["tactic"].strip(),
            technique_id=raw["technique_id"].strip(),
            vt=_bool(raw["vt"]),
            app=_bool(raw["app"]),
            forensic=_bool(raw["forensic"]),
            writeups=int(raw["writeups"]),
        )
        if max_writeups is not None and row.writeups > max_writeups:
            raise TableError(
                f"{row.technique_id}: writeups {row.writeups} exceeds corpus size {max_writeups}"
            )
        rows.append(row)
    return rows


def _bool(value: object) -> bool:
    text = str(value).strip().lower()
    if text in ("1", "true", "yes", "y"):
        return True
    if text in ("0", "false", "no", "n", ""):
        return False
    raise TableError(f"bad boolean {value!r}")
