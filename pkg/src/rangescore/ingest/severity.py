"""Severity normalization: native sensor scales -> the four-class taxonomy.

Severity taxonomies differ per sensor, so each configured IDS gets an
ordered list of (native range -> class) rules. Ranges must be disjoint and
jointly cover the sensor's declared severity domain; a native value outside
every range is a configuration bug (UnmappedSeverity) that halts ingest for
that ids rather than guessing a class.

The reserved sentinel band (see rangescore.ingest.parsers) is appended to
every map automatically so in-band class names resolve identically for all
sensors.
"""

from __future__ import annotations

from dataclasses import dataclass

from rangescore.ingest.parsers import (
    IngestError,
    SENTINEL_CRITICAL,
    SENTINEL_HIGH,
    SENTINEL_LOW,
    SENTINEL_MEDIUM,
)
from rangescore.ingest.records import NormalizedAlert, RawAlertRecord, SeverityClass

_SENTINEL_RULES = (
    (SENTINEL_CRITICAL, SeverityClass.CRITICAL),
    (SENTINEL_HIGH, SeverityClass.HIGH),
    (SENTINEL_MEDIUM, SeverityClass.MEDIUM),
    (SENTINEL_LOW, SeverityClass.LOW),
)
SENTINEL_FLOOR = SENTINEL_CRITICAL


class UnmappedSeverity(IngestError):
    """Native severity outside every configured range for its ids."""


class SeverityMapError(ValueError):
    """Severity map configuration is inconsistent."""


@dataclass(frozen=True, slots=True)
class SeverityRule:
    """Inclusive native-severity range mapping to one class."""

    lo: int
    hi: int
    severity: SeverityClass

    def __post_init__(self) -> None:
        if self.lo > self.hi:
            raise SeverityMapError(f"range [{self.lo}, {self.hi}] is empty")
        if self.hi >= SENTINEL_FLOOR:
            raise SeverityMapError(
                f"range [{self.lo}, {self.hi}] collides with the reserved sentinel band (>= {SENTINEL_FLOOR})"
            )

    def contains(self, value: int) -> bool:
        return self.lo <= value <= self.hi


class SeverityMap:
    """Per-ids normalization rules for every configured IDS.

    Construction validates, per ids: rules pairwise disjoint and jointly
    covering the declared [domain_lo, domain_hi] without gaps.
    """

    def __init__(self, rules_by_ids: dict[str, list[SeverityRule]],
                 domains: dict[str, tuple[int, int]] | None = None):
        domains = domains or {}
        for ids, rules in rules_by_ids.items():
            self._validate(ids, rules, domains.get(ids))
        self._rules = {ids: tuple(rules) for ids, rules in rules_by_ids.items()}

    @staticmethod
    def _validate(ids: str, rules: list[SeverityRule], domain: tuple[int, int] | None) -> None:
        if not rules:
            raise SeverityMapError(f"{ids}: no severity rules configured")
        ordered = sorted(rules, key=lambda r: r.lo)
        for prev, cur in zip(ordered, ordered[1:]):
            if cur.lo <= prev.hi:
                raise SeverityMapError(
                    f"{ids}: ranges [{prev.lo},{prev.hi}] and [{cur.lo},{cur.hi}] overlap"
                )
        if domain is not None:
            lo, hi = domain
            if ordered[0].lo > lo or ordered[-1].hi < hi:
                raise SeverityMapError(
                    f"{ids}: rules cover [{ordered[0].lo},{ordered[-1].hi}] "
                    f"but the declared domain is [{lo},{hi}]"
                )
            for prev, cur in zip(ordered, ordered[1:]):
                if cur.lo != prev.hi + 1:
                    raise SeverityMapError(
                        f"{ids}: gap between {prev.hi} and {cur.lo} inside the declared domain"
                    )

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(sorted(self._rules))

    def has(self, ids: str) -> bool:
        return ids in self._rules

    def classify(self, ids: str, native_severity: int) -> SeverityClass:
        """Class for a native value; pure function of (ids, native, map)."""
        if ids not in self._rules:
            raise SeverityMapError(f"no severity map entry for ids {ids!r}")
        for sentinel, severity in _SENTINEL_RULES:
            if native_severity == sentinel:
                return severity
        for rule in self._rules[ids]:
            if rule.contains(native_severity):
                return rule.severity
        raise UnmappedSeverity(
            f"{ids}: native severity {native_severity} outside every configured range"
        )


def normalize(raw: RawAlertRecord, severity_map: SeverityMap) -> NormalizedAlert:
    """Turn an accepted raw record into a NormalizedAlert.

    Team attribution is a separate step; alert_id and ingest_timestamp are
    assigned when the alert is committed to the event log.
    """
    severity = severity_map.classify(raw.ids, raw.native_severity)
    return NormalizedAlert(
        alert_id=0,
        ids=raw.ids,
        severity=severity,
        native_severity=raw.native_severity,
        sensor_timestamp=raw.sensor_timestamp,
        rule_id=raw.rule_id,
        rule_name=raw.rule_name,
        src_ip=raw.src_ip,
        dst_ip=raw.dst_ip,
    )


def default_severity_rules() -> dict[str, list[SeverityRule]]:
    """Shipped default maps; every entry is overridable in configuration.

    Wazuh rule levels: 0-4 Low, 5-8 Medium, 9-11 High, 12-15 Critical.
    Suricata priorities: 1 High, 2 Medium, 3 Low (Critical arrives via the
    rule-metadata tag, i.e. the sentinel band). Generic-webhook sensors get
    a placeholder 1..4 scale, most severe first, pending vendor docs.
    """
    wazuh = [
        SeverityRule(0, 4, SeverityClass.LOW),
        SeverityRule(5, 8, SeverityClass.MEDIUM),
        SeverityRule(9, 11, SeverityClass.HIGH),
        SeverityRule(12, 15, SeverityClass.CRITICAL),
    ]
    suricata = [
        SeverityRule(1, 1, SeverityClass.HIGH),
        SeverityRule(2, 2, SeverityClass.MEDIUM),
        SeverityRule(3, 3, SeverityClass.LOW),
    ]
    generic = [
        SeverityRule(1, 1, SeverityClass.CRITICAL),
        SeverityRule(2, 2, SeverityClass.HIGH),
        SeverityRule(3, 3, SeverityClass.MEDIUM),
        SeverityRule(4, 4, SeverityClass.LOW),
    ]
    return {
        "wazuh-default": list(wazuh),
        "wazuh-custom": list(wazuh),
        "suricata-et": list(suricata),
        "suricata-custom": list(suricata),
        "edr-default": list(generic),
        "edr-idp": list(generic),
        "nids-commercial": list(generic),
    }


def default_severity_domains() -> dict[str, tuple[int, int]]:
    return {
        "wazuh-default": (0, 15),
        "wazuh-custom": (0, 15),
        "suricata-et": (1, 3),
        "suricata-custom": (1, 3),
        "edr-default": (1, 4),
        "edr-idp": (1, 4),
        "nids-commercial": (1, 4),
    }
