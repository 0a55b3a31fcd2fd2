"""Shared fixtures: alert builders, engine factories, golden corpus loaders."""

from __future__ import annotations

import json
from datetime import datetime, timedelta, timezone
from pathlib import Path

import pytest

from rangescore.config import DEFAULT_ROSTER, ServiceConfig
from rangescore.eventstore.engine import CompetitionEngine, ScoringRules
from rangescore.eventstore.log import EventLog, RawStore
from rangescore.ingest.attribution import AddressingScheme
from rangescore.ingest.records import (NormalizedAlert, RawAlertRecord,
                                       SeverityClass)
from rangescore.ingest.severity import (SeverityMap, default_severity_domains,
                                        default_severity_rules)
from rangescore.orchestrator.pool import default_pool
from rangescore.scoring.weights import default_weight_table

DATA_DIR = Path(__file__).parent / "data"

T0 = datetime(2025, 3, 18, 10, 0, 0, tzinfo=timezone.utc)


def ts(minutes: float = 0.0) -> datetime:
    return T0 + timedelta(minutes=minutes)


def make_alert(alert_id: int = 1, *, ids: str = "wazuh-default",
               severity: SeverityClass = SeverityClass.MEDIUM,
               native: int = 7, team: int | None = 2,
               src_ip: str | None = None, dst_ip: str | None = None,
               rule_id: str = "5710", rule_name: str = "test rule",
               at: datetime | None = None) -> NormalizedAlert:
    return NormalizedAlert(
        alert_id=alert_id, ids=ids, severity=severity, native_severity=native,
        sensor_timestamp=at or ts(), rule_id=rule_id, rule_name=rule_name,
        team=team, src_ip=src_ip, dst_ip=dst_ip,
    )


def make_raw(*, ids: str = "wazuh-default", native: int = 10,
             src: str | None = "10.0.2.50", dst: str | None = "10.0.2.11",
             rule_id: str = "5712", when: float = 0.0) -> RawAlertRecord:
    return RawAlertRecord(ids=ids, sensor_timestamp=ts(when),
                          native_severity=native, rule_id=rule_id,
                          rule_name=f"rule {rule_id}",
                          raw=f'{{"rule_id": "{rule_id}"}}'.encode(),
                          src_ip=src, dst_ip=dst)


def default_rules() -> ScoringRules:
    return ScoringRules(
        weights=default_weight_table(),
        severity_map=SeverityMap(default_severity_rules(), default_severity_domains()),
        scheme=AddressingScheme(),
    )


@pytest.fixture
def rules() -> ScoringRules:
    return default_rules()


def build_engine(tmp_path: Path, *, sync: bool = False,
                 segment_records: int = 10_000,
                 rules: ScoringRules | None = None) -> CompetitionEngine:
    cfg = ServiceConfig()
    log = EventLog(tmp_path / "data", sync=sync, segment_records=segment_records)
    raw = RawStore(tmp_path / "data")
    return CompetitionEngine(
        log=log, raw=raw, rules=rules or default_rules(),
        pool=default_pool(), roster=cfg.roster(), seed="test-seed",
    )


@pytest.fixture
def engine(tmp_path: Path) -> CompetitionEngine:
    return build_engine(tmp_path)


def golden_lines(name: str) -> list[bytes]:
    path = DATA_DIR / f"{name}.ndjson"
    return [ln for ln in path.read_bytes().splitlines() if ln.strip()]


def golden_expected(name: str) -> list[dict]:
    return json.loads((DATA_DIR / f"{name}_expected.json").read_text())
