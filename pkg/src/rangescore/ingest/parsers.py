"""Connector parsers for sensor-native alert formats.

Each parser is a pure function from one input document to a RawAlertRecord.
Parsing is total: every input yields exactly one of {record, NotAnAlert,
MalformedRecord, UnknownIds}; nothing else may escape. The original bytes
are preserved verbatim on the record.

Severity class names arriving as text (generic webhook) and Suricata rules
tagged critical in metadata cannot be expressed on the sensors' native
integer scales, so they are encoded into a reserved sentinel band that
every severity map resolves identically (see rangescore.ingest.severity).
"""

from __future__ import annotations

import json
import re
from datetime import datetime, timezone
from typing import Collection

from rangescore.ingest.records import RawAlertRecord

# Reserved native-severity band for class names carried in-band; kept far
# above any real sensor scale so user map rules can never collide with it.
SENTINEL_CRITICAL = 1000
SENTINEL_HIGH = 1001
SENTINEL_MEDIUM = 1002
SENTINEL_LOW = 1003
SENTINEL_BY_CLASS_NAME = {
    "critical": SENTINEL_CRITICAL,
    "high": SENTINEL_HIGH,
    "medium": SENTINEL_MEDIUM,
    "low": SENTINEL_LOW,
}

# Rule-metadata tag that escalates a Suricata alert to Critical; Suricata has
# only three native priorities while scoring weighs four classes.
DEFAULT_CRITICAL_TAG = "score-critical"


class IngestError(Exception):
    """Base for all parse/normalize/attribution failures."""


class NotAnAlert(IngestError):
    """Input is a valid sensor record of a non-alert event type; skip silently."""


class MalformedRecord(IngestError):
    """Unparseable document or missing mandatory field; counted in ingest stats."""


class UnknownIds(IngestError):
    """Record names an IDS configuration outside the configured set."""


_TZ_COMPACT = re.compile(r"([+-]\d{2})(\d{2})$")


def parse_sensor_timestamp(value: object) -> datetime:
    """Parse a sensor timestamp into an aware UTC datetime.

    Accepts ISO 8601 with 'Z', '+HH:MM' or the compact '+HHMM' offset that
    Suricata and Wazuh emit. Naive timestamps are taken as UTC. Raises
    MalformedRecord for anything else; absent timestamps are rejected by the
    callers, never defaulted to "now".
    """
    if not isinstance(value, str) or not value.strip():
        raise MalformedRecord(f"unusable timestamp {value!r}")
    text = value.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    else:
        text = _TZ_COMPACT.sub(r"\1:\2", text)
    try:
        parsed = datetime.fromisoformat(text)
    except ValueError:
        raise MalformedRecord(f"unparseable timestamp {value!r}") from None
    if parsed.tzinfo is None:
        parsed = parsed.replace(tzinfo=timezone.utc)
    return parsed.astimezone(timezone.utc)


def _load_json(data: bytes | str, what: str) -> dict:
    if isinstance(data, str):
        data = data.encode("utf-8")
    try:
        doc = json.loads(data)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise MalformedRecord(f"{what}: invalid JSON ({exc})") from None
    if not isinstance(doc, dict):
        raise MalformedRecord(f"{what}: top-level value is not an object")
    return doc


def _as_bytes(data: bytes | str) -> bytes:
    return data if isinstance(data, bytes) else data.encode("utf-8")


def parse_suricata_eve(line: bytes | str, ids: str = "suricata-et",
                       critical_tag: str = DEFAULT_CRITICAL_TAG) -> RawAlertRecord:
    """Parse one EVE JSON line; only event_type "alert" passes.

    native_severity is the alert's priority (1..3) unless the rule metadata
    carries `critical_tag`, which escalates into the Critical sentinel so
    the severity map can produce the fourth class.
    """
    doc = _load_json(line, "suricata eve")
    event_type = doc.get("event_type")
    if event_type != "alert":
        raise NotAnAlert(f"event_type {event_type!r}")
    alert = doc.get("alert")
    if not isinstance(alert, dict):
        raise MalformedRecord("alert object missing")
    severity = alert.get("severity")
    if not isinstance(severity, int) or isinstance(severity, bool):
        raise MalformedRecord(f"alert.severity missing or non-integer: {severity!r}")
    if "timestamp" not in doc:
        raise MalformedRecord("timestamp missing")
    ts = parse_sensor_timestamp(doc.get("timestamp"))
    sig_id = alert.get("signature_id")
    if sig_id is None:
        raise MalformedRecord("alert.signature_id missing")

    metadata = alert.get("metadata")
    tags: list = []
    if isinstance(metadata, dict):
        raw_tags = metadata.get("tag", [])
        tags = raw_tags if isinstance(raw_tags, list) else [raw_tags]
    if critical_tag in tags:
        severity = SENTINEL_CRITICAL

    return RawAlertRecord(
        ids=ids,
        sensor_timestamp=ts,
        native_severity=severity,
        rule_id=str(sig_id),
        rule_name=str(alert.get("signature") or ""),
        src_ip=_opt_str(doc.get("src_ip")),
        dst_ip=_opt_str(doc.get("dest_ip")),
        raw=_as_bytes(line),
    )


def parse_wazuh_alert(doc: bytes | str, ids: str = "wazuh-default") -> RawAlertRecord:
    """Parse one document from a Wazuh alerts log.

    native_severity is the rule level (0..15); the reporting agent's address
    becomes src_ip when present, which is also the attribution anchor for
    host alerts that carry no flow IPs.
    """
    record = _load_json(doc, "wazuh alert")
    rule = record.get("rule")
    if not isinstance(rule, dict):
        raise MalformedRecord("rule object missing")
    level = rule.get("level")
    if not isinstance(level, int) or isinstance(level, bool):
        raise MalformedRecord(f"rule.level missing or non-integer: {level!r}")
    if "timestamp" not in record:
        raise MalformedRecord("timestamp missing")
    ts = parse_sensor_timestamp(record.get("timestamp"))

    agent = record.get("agent") if isinstance(record.get("agent"), dict) else {}
    data = record.get("data") if isinstance(record.get("data"), dict) else {}

    return RawAlertRecord(
        ids=ids,
        sensor_timestamp=ts,
        native_severity=level,
        rule_id=str(rule.get("id") or ""),
        rule_name=str(rule.get("description") or ""),
        src_ip=_opt_str(agent.get("ip")),
        dst_ip=_opt_str(data.get("dstip")),
        raw=_as_bytes(doc),
    )


def parse_generic_webhook(doc: bytes | str, known_ids: Collection[str]) -> RawAlertRecord:
    """Parse one document of the documented generic webhook schema.

    Carrier for sensors with proprietary exports. Severity may be an integer
    on the sensor's own scale or one of the four class names; class names map
    onto the sentinel band, which every severity map resolves identically.
    """
    record = _load_json(doc, "generic webhook")
    ids = record.get("ids")
    if not isinstance(ids, str) or not ids:
        raise MalformedRecord("ids missing")
    if ids not in known_ids:
        raise UnknownIds(f"ids {ids!r} is not configured")
    if "timestamp" not in record:
        raise MalformedRecord("timestamp missing")
    ts = parse_sensor_timestamp(record.get("timestamp"))

    severity = record.get("severity")
    if isinstance(severity, str):
        sentinel = SENTINEL_BY_CLASS_NAME.get(severity.strip().lower())
        if sentinel is None:
            raise MalformedRecord(f"severity class {severity!r} is not one of the four classes")
        native = sentinel
    elif isinstance(severity, int) and not isinstance(severity, bool):
        native = severity
    else:
        raise MalformedRecord(f"severity missing or unusable: {severity!r}")

    rule_id = record.get("rule_id")
    if rule_id is None:
        raise MalformedRecord("rule_id missing")

    return RawAlertRecord(
        ids=ids,
        sensor_timestamp=ts,
        native_severity=native,
        rule_id=str(rule_id),
        rule_name=str(record.get("rule_name") or ""),
        src_ip=_opt_str(record.get("src")),
        dst_ip=_opt_str(record.get("dst")),
        raw=_as_bytes(doc),
    )


def _opt_str(value: object) -> str | None:
    if value is None:
        return None
    text = str(value).strip()
    return text or None
