"""Alert labels on the five-point confidence scale.

Confidence runs 1 (certainly benign) to 5 (certainly an attack); 1 and 2
count as false positives downstream. Each labeler holds at most one current
label per alert (a re-label replaces their earlier one). Effective-label
precedence is: the designated adjudicator's label wins; the automatic
foothold rule fills in where the adjudicator has not labeled; labels from
anyone else are advisory second opinions and never change computed metrics.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Mapping

DEFAULT_ADJUDICATOR = "adjudicator"
AUTO_LABELER = "foothold-auto"
AUTO_LABEL_CONFIDENCE = 4

CONFIDENCE_SCALE = (1, 2, 3, 4, 5)


class LabelError(ValueError):
    """Label record fails validation."""


@dataclass(frozen=True, slots=True)
class AlertLabel:
    alert_id: int
    confidence: int
    labeler: str
    note: str | None = None

    def __post_init__(self) -> None:
        if self.confidence not in CONFIDENCE_SCALE:
            raise LabelError(f"confidence {self.confidence!r} not in 1..5")
        if not self.labeler:
            raise LabelError("label needs a labeler id")
        if self.alert_id < 1:
            raise LabelError(f"bad alert_id {self.alert_id!r}")


class LabelSet:
    """Current label per (alert_id, labeler), replacement on re-label.

    Input order is time order: a later record for the same (alert, labeler)
    supersedes the earlier one.
    """

    def __init__(self, labels: Iterable[AlertLabel] = ()):
        self._by_key: dict[tuple[int, str], AlertLabel] = {}
        for label in labels:
            self.add(label)

    def add(self, label: AlertLabel) -> None:
        self._by_key[(label.alert_id, label.labeler)] = label

    def __len__(self) -> int:
        return len(self._by_key)

    def __iter__(self) -> Iterator[AlertLabel]:
        return iter(self._by_key.values())

    def by_labeler(self, alert_id: int, labeler: str) -> AlertLabel | None:
        return self._by_key.get((alert_id, labeler))

    def effective(self, alert_id: int,
                  adjudicator: str = DEFAULT_ADJUDICATOR) -> AlertLabel | None:
        """Adjudicator label if present, else the auto label, else None."""
        label = self._by_key.get((alert_id, adjudicator))
        if label is not None:
            return label
        return self._by_key.get((alert_id, AUTO_LABELER))


def foothold_auto_labels(alerts: Iterable[Mapping], foothold_ip: str) -> list[AlertLabel]:
    """Default-label alerts whose source is the attacker foothold machine.

    Activity from the foothold is attacker behavior by construction, so such
    alerts default to confidence 4; an adjudicator label still overrides.
    """
    out = []
    for alert in alerts:
        if alert.get("src_ip") == foothold_ip:
            out.append(AlertLabel(
                alert_id=int(alert["alert_id"]),
                confidence=AUTO_LABEL_CONFIDENCE,
                labeler=AUTO_LABELER,
                note=f"src {foothold_ip} is the foothold",
            ))
    return out


def load_labels(path: str | Path) -> LabelSet:
    """Load labels from CSV (alert_id,confidence,labeler,note) or NDJSON."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix in (".ndjson", ".jsonl", ".json"):
        labels = []
        for line in text.splitlines():
            if not line.strip():
                continue
            doc = json.loads(line)
            labels.append(AlertLabel(
                alert_id=int(doc["alert_id"]),
                confidence=int(doc["confidence"]),
                labeler=str(doc["labeler"]),
                note=doc.get("note"),
            ))
        return LabelSet(labels)
    reader = csv.DictReader(text.splitlines())
    labels = []
    for row in reader:
        labels.append(AlertLabel(
            alert_id=int(row["alert_id"]),
            confidence=int(row["confidence"]),
            labeler=row["labeler"],
            note=row.get("note") or None,
        ))
    return LabelSet(labels)
