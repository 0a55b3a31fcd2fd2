"""Event records: the only facts the system remembers.

Every state the service exposes is a fold over these records; anything not
derivable from the log after a restart is a bug. Payloads are validated
against a per-kind schema before commit so replay never meets a malformed
record it has to guess about.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import datetime, timezone
from enum import Enum
from typing import Mapping


class EventKind(str, Enum):
    ALERT_INGESTED = "AlertIngested"
    RESET_APPLIED = "ResetApplied"
    VALIDATION_FROZEN = "ValidationFrozen"
    PROVISION_REQUESTED = "ProvisionRequested"
    PROVISION_ACKED = "ProvisionAcked"
    LABEL_ASSIGNED = "LabelAssigned"


class SchemaViolation(ValueError):
    """Payload does not match its kind's schema; nothing was committed."""


# field -> (types, required). Optional fields may also be null.
_OPT = False
_REQ = True
_SCHEMAS: dict[EventKind, dict[str, tuple[tuple[type, ...], bool]]] = {
    EventKind.ALERT_INGESTED: {
        "alert_id": ((int,), _REQ),
        "ids": ((str,), _REQ),
        "severity": ((str,), _REQ),
        "native_severity": ((int,), _REQ),
        "sensor_timestamp": ((str,), _REQ),
        "rule_id": ((str,), _REQ),
        "rule_name": ((str,), _REQ),
        "team": ((int,), _OPT),
        "src_ip": ((str,), _OPT),
        "dst_ip": ((str,), _OPT),
        "raw_ref": ((int,), _REQ),
    },
    EventKind.RESET_APPLIED: {
        "team": ((int,), _REQ),
        "epoch": ((int,), _REQ),
        "reset_count": ((int,), _REQ),
        "multiplier": ((str,), _REQ),
        "lockout_until": ((str,), _REQ),
    },
    EventKind.VALIDATION_FROZEN: {
        "team": ((int,), _REQ),
        "objective": ((str,), _REQ),
        "epoch": ((int,), _REQ),
        "frozen_penalty": ((str,), _REQ),
        "writeup": ((str,), _REQ),
        "frozen_at": ((str,), _REQ),
        "hosts_accessed": ((int,), _REQ),
        "network_footprint": ((int,), _REQ),
        "time_to_objective_us": ((int,), _REQ),
    },
    EventKind.PROVISION_REQUESTED: {
        "team": ((int,), _REQ),
        "template_id": ((str,), _OPT),
        "seed_fingerprint": ((str,), _OPT),
        "queued": ((bool,), _REQ),
    },
    EventKind.PROVISION_ACKED: {
        "team": ((int,), _REQ),
        "template_id": ((str,), _REQ),
        "released_template_id": ((str,), _OPT),
    },
    EventKind.LABEL_ASSIGNED: {
        "alert_id": ((int,), _REQ),
        "confidence": ((int,), _REQ),
        "labeler": ((str,), _REQ),
        "note": ((str,), _OPT),
    },
}


def validate_payload(kind: EventKind, payload: Mapping) -> None:
    """Check required fields, types, and reject unknown keys."""
    schema = _SCHEMAS[kind]
    if not isinstance(payload, Mapping):
        raise SchemaViolation(f"{kind.value}: payload must be an object")
    unknown = set(payload.keys()) - set(schema.keys())
    if unknown:
        raise SchemaViolation(f"{kind.value}: unknown fields {sorted(unknown)}")
    for name, (types, required) in schema.items():
        if name not in payload or payload[name] is None:
            if required:
                raise SchemaViolation(f"{kind.value}: missing required field {name!r}")
            continue
        value = payload[name]
        # bool is an int subclass; keep them apart
        if isinstance(value, bool) and bool not in types:
            raise SchemaViolation(f"{kind.value}: field {name!r} has wrong type bool")
        if not isinstance(value, types):
            raise SchemaViolation(
                f"{kind.value}: field {name!r} has wrong type {type(value).__name__}"
            )
    # alert ids are log sequence numbers, which start at 1
    if "alert_id" in schema and payload["alert_id"] < 1:
        raise SchemaViolation(f"{kind.value}: alert_id must be >= 1")
    if kind is EventKind.LABEL_ASSIGNED and not 1 <= payload["confidence"] <= 5:
        raise SchemaViolation("LabelAssigned: confidence must be 1..5")


@dataclass(frozen=True, slots=True)
class EventRecord:
    seq: int
    kind: EventKind
    payload: dict
    committed_at: datetime

    def to_line(self) -> str:
        doc = {
            "seq": self.seq,
            "kind": self.kind.value,
            "committed_at": self.committed_at.isoformat(),
            "payload": self.payload,
        }
        return json.dumps(doc, separators=(",", ":"), sort_keys=True)

    @classmethod
    def from_line(cls, line: str) -> "EventRecord":
        doc = json.loads(line)
        return cls(
            seq=int(doc["seq"]),
            kind=EventKind(doc["kind"]),
            payload=doc["payload"],
            committed_at=datetime.fromisoformat(doc["committed_at"]),
        )


@dataclass(frozen=True, slots=True)
class StreamCursor:
    """Replay everything strictly after `position`, optionally filtered."""

    position: int
    team: int | None = None
    kinds: frozenset[EventKind] | None = None

    def admits(self, record: EventRecord) -> bool:
        if self.kinds is not None and record.kind not in self.kinds:
            return False
        if self.team is not None and record.payload.get("team") != self.team:
            return False
        return True


def utcnow() -> datetime:
    return datetime.now(timezone.utc)
