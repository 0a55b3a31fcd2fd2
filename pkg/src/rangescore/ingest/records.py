"""Alert record types shared by every connector.

A sensor line first becomes a RawAlertRecord (sensor-native fields, original
bytes preserved), then a NormalizedAlert once its severity has been classed
and a team attributed. NormalizedAlert.alert_id doubles as the event-log
sequence number, so ids are strictly increasing in commit order.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from datetime import datetime
from enum import Enum


class SeverityClass(str, Enum):
    """Four-class severity taxonomy every sensor's native scale maps into."""

    CRITICAL = "Critical"
    HIGH = "High"
    MEDIUM = "Medium"
    LOW = "Low"

    @classmethod
    def ordered(cls) -> tuple["SeverityClass", ...]:
        """Classes from most to least severe."""
        return (cls.CRITICAL, cls.HIGH, cls.MEDIUM, cls.LOW)

    @classmethod
    def from_name(cls, name: str) -> "SeverityClass":
        try:
            return cls(name.strip().capitalize())
        except ValueError:
            raise ValueError(f"unknown severity class {name!r}") from None

    @property
    def rank(self) -> int:
        """Higher rank means more severe; Critical=4 .. Low=1."""
        return 4 - SeverityClass.ordered().index(self)

    def __lt__(self, other: object) -> bool:  # type: ignore[override]
        if not isinstance(other, SeverityClass):
            return NotImplemented
        return self.rank < other.rank


@dataclass(frozen=True, slots=True)
class RawAlertRecord:
    """One accepted sensor record before normalization.

    `raw` holds the exact input bytes; it must round-trip byte-identically.
    `sensor_timestamp` comes from the sensor's own timestamp field; records
    without one are rejected at parse time, never defaulted.
    """

    ids: str
    sensor_timestamp: datetime
    native_severity: int
    rule_id: str
    rule_name: str
    raw: bytes
    src_ip: str | None = None
    dst_ip: str | None = None


@dataclass(frozen=True, slots=True)
class NormalizedAlert:
    """One IDS detection after severity classing, ready for scoring.

    alert_id is 0 until the record is committed to the event log; the log
    assigns alert_id = seq, which makes ids strictly increasing in commit
    order. Severity is always derived through the SeverityMap, never set
    directly. team stays None until attribution.
    """

    alert_id: int
    ids: str
    severity: SeverityClass
    native_severity: int
    sensor_timestamp: datetime
    rule_id: str
    rule_name: str
    ingest_timestamp: datetime | None = None
    team: int | None = None
    src_ip: str | None = None
    dst_ip: str | None = None
    raw_ref: int = -1

    def with_team(self, team: int | None) -> "NormalizedAlert":
        return replace(self, team=team)

    def committed(self, alert_id: int, ingest_timestamp: datetime, raw_ref: int) -> "NormalizedAlert":
        return replace(self, alert_id=alert_id, ingest_timestamp=ingest_timestamp, raw_ref=raw_ref)


@dataclass
class ConnectorStats:
    """Per-connector ingest counters, exported on /stats.

    One bad line must never halt a live event, so malformed records are
    counted and skipped; `halted` flips only on UnmappedSeverity, which is
    a configuration bug that must stop ingest for that ids.
    """

    accepted: int = 0
    not_alert: int = 0
    malformed: int = 0
    unknown_ids: int = 0
    unattributed: int = 0
    ambiguous: int = 0
    halted: bool = False
    last_error: str | None = None

    def as_dict(self) -> dict:
        return {
            "accepted": self.accepted,
            "not_alert": self.not_alert,
            "malformed": self.malformed,
            "unknown_ids": self.unknown_ids,
            "unattributed": self.unattributed,
            "ambiguous": self.ambiguous,
            "halted": self.halted,
            "last_error": self.last_error,
        }


@dataclass
class IngestStats:
    """Stats for all connectors keyed by ids."""

    connectors: dict[str, ConnectorStats] = field(default_factory=dict)

    def for_ids(self, ids: str) -> ConnectorStats:
        if ids not in self.connectors:
            self.connectors[ids] = ConnectorStats()
        return self.connectors[ids]

    def as_dict(self) -> dict:
        return {ids: stats.as_dict() for ids, stats in sorted(self.connectors.items())}
