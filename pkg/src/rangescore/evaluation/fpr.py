"""False-positive ratio over labeled alert exports.

A false positive is an alert whose effective label is 1 or 2; the ratio is
false positives over all selected alerts. Label 3 (uncertain) is NOT a false
positive; the histogram in the report shows how much uncertain mass there is.
An empty selection has no ratio at all (undefined, never 0.0).
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from decimal import ROUND_HALF_EVEN, Decimal
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from rangescore.evaluation.labels import DEFAULT_ADJUDICATOR, LabelSet

FALSE_POSITIVE_LABELS = frozenset({1, 2})


class UnlabeledAlerts(ValueError):
    """Selection contains alerts with no effective label; refuse to compute."""

    def __init__(self, alert_ids: Sequence[int]):
        self.alert_ids = tuple(alert_ids)
        shown = ", ".join(str(i) for i in self.alert_ids[:20])
        more = "" if len(self.alert_ids) <= 20 else f" (+{len(self.alert_ids) - 20} more)"
        super().__init__(f"{len(self.alert_ids)} selected alerts lack labels: {shown}{more}")


@dataclass(frozen=True, slots=True)
class FprReport:
    ratio: Fraction | None
    false_positives: int
    total: int
    histogram: tuple[tuple[int, int], ...]
    team: int | None = None
    ids: str | None = None

    @property
    def defined(self) -> bool:
        return self.ratio is not None

    def ratio_str(self) -> str:
        if self.ratio is None:
            return "undefined"
        exact = Decimal(self.ratio.numerator) / Decimal(self.ratio.denominator)
        return str(exact.quantize(Decimal("0.000001"), rounding=ROUND_HALF_EVEN))

    def as_json_obj(self) -> dict:
        return {
            "kind": "fpr",
            "team": self.team,
            "ids": self.ids,
            "false_positives": self.false_positives,
            "total": self.total,
            "fpr": self.ratio_str() if self.defined else None,
            "defined": self.defined,
            "histogram": {str(k): v for k, v in self.histogram},
        }

    def as_csv(self) -> str:
        cols = ["team", "ids", "false_positives", "total", "fpr",
                "label_1", "label_2", "label_3", "label_4", "label_5"]
        hist = dict(self.histogram)
        row = {
            "team": "" if self.team is None else self.team,
            "ids": self.ids or "",
            "false_positives": self.false_positives,
            "total": self.total,
            "fpr": self.ratio_str(),
            **{f"label_{k}": hist.get(k, 0) for k in (1, 2, 3, 4, 5)},
        }
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
        writer.writeheader()
        writer.writerow(row)
        return buf.getvalue()


def select_alerts(alerts: Iterable[Mapping], team: int | None = None,
                  ids: str | None = None) -> list[Mapping]:
    out = []
    for alert in alerts:
        if team is not None:
            alert_team = alert.get("team")
            if alert_team is None or int(alert_team) != team:
                continue
        if ids is not None and alert.get("ids") != ids:
            continue
        out.append(alert)
    return out


def fpr(alerts: Iterable[Mapping], labels: LabelSet,
        team: int | None = None, ids: str | None = None,
        adjudicator: str = DEFAULT_ADJUDICATOR) -> FprReport:
    """Compute the false-positive ratio for a selection of exported alerts.

    Raises UnlabeledAlerts (listing the offenders) rather than guessing when
    any selected alert has no effective label.
    """
    selected = select_alerts(alerts, team=team, ids=ids)
    unlabeled = []
    confidences = []
    for alert in selected:
        alert_id = int(alert["alert_id"])
        label = labels.effective(alert_id, adjudicator=adjudicator)
        if label is None:
            unlabeled.append(alert_id)
        else:
            confidences.append(label.confidence)
    if unlabeled:
        raise UnlabeledAlerts(sorted(unlabeled))

    total = len(confidences)
    false_positives = sum(1 for c in confidences if c in FALSE_POSITIVE_LABELS)
    histogram = tuple((k, sum(1 for c in confidences if c == k)) for k in (1, 2, 3, 4, 5))
    ratio = None if total == 0 else Fraction(false_positives, total)
    return FprReport(ratio=ratio, false_positives=false_positives, total=total,
                     histogram=histogram, team=team, ids=ids)


def load_alert_export(path: str | Path) -> list[dict]:
    """Read an alert export (CSV or NDJSON) into plain dicts."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix in (".ndjson", ".jsonl", ".json"):
        rows = []
        for line in text.splitlines():
            if line.strip():
                rows.append(json.loads(line))
        return rows
    out = []
    for row in csv.DictReader(text.splitlines()):
        doc = dict(row)
        if doc.get("team") == "":
            doc["team"] = None
        out.append(doc)
    return out
