"""Append-only event log, the engine that folds it into score state, and the
HTTP/SSE service surface."""

from rangescore.eventstore.records import (
    EventKind,
    EventRecord,
    SchemaViolation,
    StreamCursor,
    validate_payload,
)
from rangescore.eventstore.log import EventLog, InvalidCursor, LogCorrupt, RawStore
from rangescore.eventstore.engine import CompetitionEngine, IngestHalted, ScoreProjection, ScoringRules

__all__ = [
    "CompetitionEngine",
    "EventKind",
    "EventLog",
    "EventRecord",
    "IngestHalted",
    "InvalidCursor",
    "LogCorrupt",
    "RawStore",
    "SchemaViolation",
    "ScoreProjection",
    "ScoringRules",
    "StreamCursor",
    "validate_payload",
]
