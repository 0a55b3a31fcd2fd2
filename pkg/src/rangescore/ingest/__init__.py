"""Sensor alert ingestion: connector parsers, severity normalization, team attribution."""

from rangescore.ingest.attribution import AddressingScheme, AmbiguousAttribution, attribute_team
from rangescore.ingest.parsers import (
    MalformedRecord,
    NotAnAlert,
    UnknownIds,
    parse_generic_webhook,
    parse_suricata_eve,
    parse_wazuh_alert,
)
from rangescore.ingest.records import NormalizedAlert, RawAlertRecord, SeverityClass
from rangescore.ingest.severity import SeverityMap, SeverityRule, UnmappedSeverity, normalize

__all__ = [
    "AddressingScheme",
    "AmbiguousAttribution",
    "MalformedRecord",
    "NormalizedAlert",
    "NotAnAlert",
    "RawAlertRecord",
    "SeverityClass",
    "SeverityMap",
    "SeverityRule",
    "UnknownIds",
    "UnmappedSeverity",
    "attribute_team",
    "normalize",
    "parse_generic_webhook",
    "parse_suricata_eve",
    "parse_wazuh_alert",
]
