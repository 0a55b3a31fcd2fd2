"""Leaderboard ranking and CSV export.

Ranking compares frozen validations only; live penalties never appear on a
leaderboard. Lower frozen penalty wins; ties fall through the stealth
metrics in order, and the team number is the final deterministic tie-break.
"""

from __future__ import annotations

import csv
import io
from typing import Iterable, Sequence

from rangescore.scoring.state import Cup, TieBreakMetrics, Validation, _td_us

LEADERBOARD_COLUMNS = (
    "cup",
    "rank",
    "team",
    "frozen_penalty",
    "hosts_accessed",
    "network_footprint",
    "time_to_objective_seconds",
    "frozen_at",
)


def sort_key(v: Validation) -> tuple:
    return (
        v.frozen_penalty,
        v.tiebreak.hosts_accessed,
        v.tiebreak.network_footprint,
        v.tiebreak.time_to_objective,
        v.team,
    )


def rank(validations: Iterable[Validation], cup: Cup,
         best_per_team: bool = True) -> list[Validation]:
    """Order a cup's validations best-first.

    With best_per_team (the leaderboard view) only each team's best entry
    appears; a team that validated, reset, and validated again is listed
    once under whichever attempt ranks better.
    """
    entries = [v for v in validations if v.cup is cup]
    if best_per_team:
        best: dict[int, Validation] = {}
        for v in entries:
            held = best.get(v.team)
            if held is None or sort_key(v) < sort_key(held):
                best[v.team] = v
        entries = list(best.values())
    return sorted(entries, key=sort_key)


def _seconds_str(metrics: TieBreakMetrics) -> str:
    us = _td_us(metrics.time_to_objective)
    seconds, rem = divmod(us, 1_000_000)
    if rem == 0:
        return str(seconds)
    return f"{seconds}.{rem:06d}".rstrip("0")


def leaderboard_rows(validations: Iterable[Validation], cup: Cup) -> list[dict]:
    rows = []
    for position, v in enumerate(rank(validations, cup), start=1):
        rows.append({
            "cup": cup.value,
            "rank": position,
            "team": v.team,
            "frozen_penalty": str(v.frozen_penalty),
            "hosts_accessed": v.tiebreak.hosts_accessed,
            "network_footprint": v.tiebreak.network_footprint,
            "time_to_objective_seconds": _seconds_str(v.tiebreak),
            "frozen_at": v.frozen_at.isoformat(),
        })
    return rows


def leaderboard_csv(validations: Iterable[Validation], cup: Cup) -> str:
    """Render one cup's leaderboard as CSV with a fixed column order."""
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=LEADERBOARD_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in leaderboard_rows(validations, cup):
        writer.writerow(row)
    return buf.getvalue()


def leaderboard_json(validations: Iterable[Validation], cup: Cup) -> list[dict]:
    return leaderboard_rows(validations, cup)
