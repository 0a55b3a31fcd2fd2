"""Service configuration: one YAML file, flag and environment overrides.

Precedence, highest first: command-line flags, environment variables
(RANGESCORE_LISTEN, RANGESCORE_DATA_DIR, RANGESCORE_OPERATOR_TOKEN,
RANGESCORE_SEED; RANGESCORE_CONFIG picks the file when --config is absent),
the config file, built-in defaults. The service must start with no file at
all; every key is optional. Bad values fail startup with the offending key
path in the message, never with a stack trace deep inside the engine.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from datetime import timedelta
from decimal import Decimal, InvalidOperation
from pathlib import Path
from typing import Mapping

import yaml

from rangescore.ingest.attribution import AddressingScheme
from rangescore.ingest.parsers import DEFAULT_CRITICAL_TAG
from rangescore.ingest.records import SeverityClass
from rangescore.ingest.severity import (
    SeverityMap,
    SeverityMapError,
    SeverityRule,
    default_severity_domains,
    default_severity_rules,
)
from rangescore.orchestrator.credentials import Roster, RosterEntry, RosterError
from rangescore.orchestrator.pool import TemplatePool, default_pool
from rangescore.scoring.state import MultiplierSchedule
from rangescore.scoring.weights import WeightTable, WeightTableError, default_weight_table

ENV_CONFIG = "RANGESCORE_CONFIG"
ENV_LISTEN = "RANGESCORE_LISTEN"
ENV_DATA_DIR = "RANGESCORE_DATA_DIR"
ENV_TOKEN = "RANGESCORE_OPERATOR_TOKEN"
ENV_SEED = "RANGESCORE_SEED"

DEFAULT_GENERIC_IDS = ("edr-default", "edr-idp", "nids-commercial")
DEFAULT_ROSTER = (
    {"role": "admin", "kind": "account"},
    {"role": "operator", "kind": "account"},
    {"role": "svc-backup", "kind": "account"},
    {"role": "ws", "kind": "hostname"},
    {"role": "objective", "kind": "constant", "value": "plumber"},
)


class ConfigError(Exception):
    """Configuration is unusable; message names the offending key."""


@dataclass
class ServiceConfig:
    listen: str = "127.0.0.1:8410"
    data_dir: str = "./rangescore-data"
    operator_token: str | None = None
    seed: str = "range-seed"
    restrict_team_feed: bool = False
    sse_keepalive_seconds: float = 15.0
    segment_records: int = 10_000
    sync_writes: bool = True
    min_team: int = 1
    max_team: int = 12
    addressing_prefix: str = "10.0.0.0/16"
    team_octet: int = 3
    fallback_patterns: dict = field(default_factory=dict)
    lockout_minutes: float = 15.0
    free_resets: int = 1
    multiplier_factor: str = "1.5"
    weights_cfg: dict | None = None
    severity_cfg: dict | None = None
    suricata_ids: str = "suricata-et"
    wazuh_ids: str = "wazuh-default"
    suricata_critical_tag: str = DEFAULT_CRITICAL_TAG
    generic_ids: tuple = DEFAULT_GENERIC_IDS
    pool_size: int = 10
    roster_cfg: tuple = DEFAULT_ROSTER

    # -- parsed views ------------------------------------------------------

    @property
    def host(self) -> str:
        return _split_listen(self.listen)[0]

    @property
    def port(self) -> int:
        return _split_listen(self.listen)[1]

    def weight_table(self) -> WeightTable:
        if self.weights_cfg is None:
            return default_weight_table()
        try:
            parsed = {
                ids: {SeverityClass.from_name(sev): value for sev, value in by_class.items()}
                for ids, by_class in self.weights_cfg.items()
            }
            return WeightTable(parsed)
        except (WeightTableError, ValueError, AttributeError) as exc:
            raise ConfigError(f"weights: {exc}") from exc

    def severity_map(self) -> SeverityMap:
        if self.severity_cfg is None:
            return SeverityMap(default_severity_rules(), default_severity_domains())
        rules: dict[str, list[SeverityRule]] = {}
        domains: dict[str, tuple[int, int]] = {}
        for ids, entry in self.severity_cfg.items():
            if not isinstance(entry, dict) or "rules" not in entry:
                raise ConfigError(f"severity_maps.{ids}: needs a rules list")
            try:
                rules[ids] = [
                    SeverityRule(lo=int(r["lo"]), hi=int(r["hi"]),
                                 severity=SeverityClass.from_name(str(r["severity"])))
                    for r in entry["rules"]
                ]
            except (KeyError, TypeError, ValueError, SeverityMapError) as exc:
                raise ConfigError(f"severity_maps.{ids}.rules: {exc}") from exc
            domain = entry.get("domain")
            if domain is not None:
                if not (isinstance(domain, (list, tuple)) and len(domain) == 2):
                    raise ConfigError(f"severity_maps.{ids}.domain: expected [lo, hi]")
                domains[ids] = (int(domain[0]), int(domain[1]))
        try:
            return SeverityMap(rules, domains)
        except SeverityMapError as exc:
            raise ConfigError(f"severity_maps: {exc}") from exc

    def scheme(self) -> AddressingScheme:
        try:
            return AddressingScheme(
                prefix=self.addressing_prefix,
                team_octet=self.team_octet,
                min_team=self.min_team,
                max_team=self.max_team,
                fallback_patterns=dict(self.fallback_patterns),
            )
        except ValueError as exc:
            raise ConfigError(f"addressing: {exc}") from exc

    def schedule(self) -> MultiplierSchedule:
        try:
            factor = Decimal(str(self.multiplier_factor))
        except InvalidOperation as exc:
            raise ConfigError(f"multiplier.factor: {self.multiplier_factor!r} is not a number") from exc
        if factor <= 0:
            raise ConfigError(f"multiplier.factor: must be positive, got {factor}")
        if self.free_resets < 0:
            raise ConfigError(f"multiplier.free_resets: must be >= 0, got {self.free_resets}")
        return MultiplierSchedule(free_resets=self.free_resets, factor=factor)

    def lockout(self) -> timedelta:
        if self.lockout_minutes <= 0:
            raise ConfigError(f"lockout_minutes: must be positive, got {self.lockout_minutes}")
        return timedelta(minutes=self.lockout_minutes)

    def pool(self) -> TemplatePool:
        if self.pool_size < 1:
            raise ConfigError(f"pool.size: must be >= 1, got {self.pool_size}")
        return default_pool(self.pool_size)

    def roster(self) -> Roster:
        try:
            return Roster.of(
                RosterEntry(role=str(e["role"]), kind=str(e.get("kind", "account")),
                            value=e.get("value"))
                for e in self.roster_cfg
            )
        except (KeyError, TypeError, RosterError) as exc:
            raise ConfigError(f"roster: {exc}") from exc

    def check(self) -> None:
        """Cross-field validation; every serve path calls this before start."""
        _split_listen(self.listen)
        if not 1 <= self.min_team <= self.max_team <= 254:
            raise ConfigError(
                f"teams: need 1 <= min <= max <= 254, got {self.min_team}..{self.max_team}"
            )
        if self.segment_records < 1:
            raise ConfigError(f"segment_records: must be >= 1, got {self.segment_records}")
        if self.sse_keepalive_seconds <= 0:
            raise ConfigError("sse_keepalive_seconds: must be positive")
        weights = self.weight_table()
        severity = self.severity_map()
        self.schedule()
        self.lockout()
        self.scheme()
        self.pool()
        self.roster()
        wanted = {self.suricata_ids, self.wazuh_ids, *self.generic_ids}
        for ids in sorted(wanted):
            if not weights.covers(ids):
                raise ConfigError(f"weights: no entry for configured ids {ids!r}")
            if not severity.has(ids):
                raise ConfigError(f"severity_maps: no entry for configured ids {ids!r}")


def load_config(path: str | Path | None = None,
                cli: Mapping | None = None,
                env: Mapping | None = None) -> ServiceConfig:
    """Assemble the effective configuration from all four layers."""
    env = env if env is not None else os.environ
    cli = cli or {}

    file_path = path or env.get(ENV_CONFIG)
    doc: dict = {}
    if file_path:
        p = Path(file_path)
        if not p.exists():
            raise ConfigError(f"config file {p} does not exist")
        try:
            loaded = yaml.safe_load(p.read_text(encoding="utf-8"))
        except yaml.YAMLError as exc:
            raise ConfigError(f"config file {p}: {exc}") from exc
        if loaded is None:
            loaded = {}
        if not isinstance(loaded, dict):
            raise ConfigError(f"config file {p}: top level must be a mapping")
        doc = loaded

    cfg = ServiceConfig()
    _apply_file(cfg, doc)

    if env.get(ENV_LISTEN):
        cfg.listen = env[ENV_LISTEN]
    if env.get(ENV_DATA_DIR):
        cfg.data_dir = env[ENV_DATA_DIR]
    if env.get(ENV_TOKEN):
        cfg.operator_token = env[ENV_TOKEN]
    if env.get(ENV_SEED):
        cfg.seed = env[ENV_SEED]

    if cli.get("listen"):
        cfg.listen = cli["listen"]
    if cli.get("data_dir"):
        cfg.data_dir = cli["data_dir"]
    if cli.get("operator_token"):
        cfg.operator_token = cli["operator_token"]

    cfg.check()
    return cfg


def _apply_file(cfg: ServiceConfig, doc: dict) -> None:
    scalars = {
        "listen": str, "data_dir": str, "operator_token": str, "seed": str,
        "restrict_team_feed": bool, "sse_keepalive_seconds": float,
        "segment_records": int, "sync_writes": bool, "lockout_minutes": float,
    }
    for key, cast in scalars.items():
        if key in doc and doc[key] is not None:
            try:
                setattr(cfg, key, cast(doc[key]))
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"{key}: {exc}") from exc

    teams = doc.get("teams") or {}
    if "min" in teams:
        cfg.min_team = int(teams["min"])
    if "max" in teams:
        cfg.max_team = int(teams["max"])

    addressing = doc.get("addressing") or {}
    if "prefix" in addressing:
        cfg.addressing_prefix = str(addressing["prefix"])
    if "team_octet" in addressing:
        cfg.team_octet = int(addressing["team_octet"])
    if "fallback_patterns" in addressing:
        pats = addressing["fallback_patterns"]
        if not isinstance(pats, dict):
            raise ConfigError("addressing.fallback_patterns: expected a mapping ids -> regex")
        cfg.fallback_patterns = {str(k): str(v) for k, v in pats.items()}

    multiplier = doc.get("multiplier") or {}
    if "free_resets" in multiplier:
        cfg.free_resets = int(multiplier["free_resets"])
    if "factor" in multiplier:
        cfg.multiplier_factor = str(multiplier["factor"])

    if "weights" in doc and doc["weights"] is not None:
        if not isinstance(doc["weights"], dict):
            raise ConfigError("weights: expected a mapping ids -> class -> weight")
        cfg.weights_cfg = doc["weights"]
    if "severity_maps" in doc and doc["severity_maps"] is not None:
        if not isinstance(doc["severity_maps"], dict):
            raise ConfigError("severity_maps: expected a mapping keyed by ids")
        cfg.severity_cfg = doc["severity_maps"]

    connectors = doc.get("connectors") or {}
    if "suricata_ids" in connectors:
        cfg.suricata_ids = str(connectors["suricata_ids"])
    if "wazuh_ids" in connectors:
        cfg.wazuh_ids = str(connectors["wazuh_ids"])
    if "suricata_critical_tag" in connectors:
        cfg.suricata_critical_tag = str(connectors["suricata_critical_tag"])
    if "generic_ids" in connectors:
        ids_list = connectors["generic_ids"]
        if not isinstance(ids_list, list):
            raise ConfigError("connectors.generic_ids: expected a list")
        cfg.generic_ids = tuple(str(i) for i in ids_list)

    pool = doc.get("pool") or {}
    if "size" in pool:
        cfg.pool_size = int(pool["size"])

    if "roster" in doc and doc["roster"] is not None:
        roster = doc["roster"]
        if not isinstance(roster, list):
            raise ConfigError("roster: expected a list of entries")
        cfg.roster_cfg = tuple(roster)

    known = set(scalars) | {"teams", "addressing", "multiplier", "weights",
                            "severity_maps", "connectors", "pool", "roster"}
    unknown = set(doc) - known
    if unknown:
        raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")


def _split_listen(listen: str) -> tuple[str, int]:
    host, sep, port = listen.rpartition(":")
    if not sep or not host:
        raise ConfigError(f"listen: expected host:port, got {listen!r}")
    try:
        port_num = int(port)
    except ValueError:
        raise ConfigError(f"listen: port {port!r} is not a number") from None
    if not 1 <= port_num <= 65535:
        raise ConfigError(f"listen: port {port_num} outside 1..65535")
    return host, port_num
