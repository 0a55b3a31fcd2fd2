"""Event-sourced per-team score state and its transitions.

All transitions are pure functions returning a fresh TeamScoreState, which
keeps replay trivially deterministic: rebuilding from the event log runs the
exact same functions over the exact same inputs. Binary floating point never
touches the scoring path.

A scoring epoch spans from one reset to the next. The epoch start marker is
the event-log seq of the reset, so "belongs to this epoch" is decided by
commit order, not by sensor timestamps (sensor clocks may skew).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from datetime import datetime, timedelta
from decimal import Decimal
from enum import Enum
from typing import Callable, Iterable

from rangescore.ingest.records import NormalizedAlert, SeverityClass
from rangescore.scoring.weights import WeightTable

ONE = Decimal(1)


class ScoringError(Exception):
    """Base for scoring-state transition failures."""


class EpochMismatch(ScoringError):
    """Alert committed before the current epoch start; ignored with an audit note."""


class Locked(ScoringError):
    """Reset requested while the lockout from the previous reset is active."""


class EmptyWriteup(ScoringError):
    """Objective validation submitted without an attacker writeup."""


class DuplicateValidation(ScoringError):
    """Same (team, objective) already validated in this epoch."""


class Objective(str, Enum):
    IT_FLAG = "IT_FLAG"
    OT_FLAG = "OT_FLAG"


class Cup(str, Enum):
    """Leaderboard a validation counts toward, determined by its objective."""

    ENTERPRISE = "enterprise"
    OT = "ot"

    @classmethod
    def for_objective(cls, objective: Objective) -> "Cup":
        return cls.ENTERPRISE if objective is Objective.IT_FLAG else cls.OT


@dataclass(frozen=True, slots=True)
class MultiplierSchedule:
    """Reset multiplier policy: the first `free_resets` cost nothing, then the
    factor compounds per further reset (1.5, 2.25, ... with the default)."""

    free_resets: int = 1
    factor: Decimal = Decimal("1.5")

    def value(self, reset_count: int) -> Decimal:
        if reset_count < 0:
            raise ValueError("reset_count must be non-negative")
        if reset_count <= self.free_resets:
            return ONE
        return self.factor ** (reset_count - self.free_resets)


@dataclass(frozen=True, slots=True)
class TieBreakMetrics:
    """Stealth tie-breakers captured at validation time, all from one epoch."""

    hosts_accessed: int
    network_footprint: int
    time_to_objective: timedelta

    def as_dict(self) -> dict:
        return {
            "hosts_accessed": self.hosts_accessed,
            "network_footprint": self.network_footprint,
            "time_to_objective_us": _td_us(self.time_to_objective),
        }


@dataclass(frozen=True, slots=True)
class Validation:
    """A frozen objective claim; frozen_penalty never changes after freeze."""

    team: int
    objective: Objective
    frozen_penalty: Decimal
    writeup: str
    frozen_at: datetime
    tiebreak: TieBreakMetrics
    epoch: int

    @property
    def cup(self) -> Cup:
        return Cup.for_objective(self.objective)

    def as_dict(self) -> dict:
        return {
            "team": self.team,
            "objective": self.objective.value,
            "epoch": self.epoch,
            "frozen_penalty": str(self.frozen_penalty),
            "writeup": self.writeup,
            "frozen_at": self.frozen_at.isoformat(),
            **self.tiebreak.as_dict(),
        }


@dataclass(frozen=True)
class TeamScoreState:
    """Everything the engine knows about one team's current scoring epoch.

    counts holds the per-(ids, severity) alert tallies for this epoch only.
    The epoch host/footprint sets feed the tie-break metrics. lockout_until
    is exactly lockout_duration after the triggering reset's commit time.
    """

    team: int
    epoch: int = 0
    counts: dict[tuple[str, SeverityClass], int] = field(default_factory=dict)
    reset_count: int = 0
    multiplier: Decimal = ONE
    lockout_until: datetime | None = None
    validations: tuple[Validation, ...] = ()
    epoch_start_seq: int = 0
    epoch_start_at: datetime | None = None
    epoch_dst_hosts: frozenset[str] = frozenset()
    epoch_triples: frozenset[tuple[str, str, str]] = frozenset()
    epoch_mismatches: int = 0

    def snapshot(self) -> dict:
        """Canonical, order-stable dict for bit-identical comparisons."""
        return {
            "team": self.team,
            "epoch": self.epoch,
            "counts": [
                [ids, severity.value, n]
                for (ids, severity), n in sorted(
                    self.counts.items(), key=lambda kv: (kv[0][0], kv[0][1].value)
                )
            ],
            "reset_count": self.reset_count,
            "multiplier": str(self.multiplier),
            "lockout_until": self.lockout_until.isoformat() if self.lockout_until else None,
            "epoch_start_seq": self.epoch_start_seq,
            "epoch_start_at": self.epoch_start_at.isoformat() if self.epoch_start_at else None,
            "epoch_dst_hosts": sorted(self.epoch_dst_hosts),
            "epoch_triples": sorted(list(t) for t in self.epoch_triples),
            "epoch_mismatches": self.epoch_mismatches,
            "validations": [v.as_dict() for v in self.validations],
        }


def new_team_state(team: int, start_at: datetime | None = None) -> TeamScoreState:
    return TeamScoreState(team=team, epoch_start_at=start_at)


def apply_alert(state: TeamScoreState, alert: NormalizedAlert,
                dst_in_range: bool | None = None) -> TeamScoreState:
    """Count one attributed alert into the current epoch.

    Alerts keep accruing during lockout: lockout gates range access, not
    scoring. dst_in_range says whether the destination lies inside the range
    prefix (tie-break hosts count only those); default counts any present dst.
    """
    if alert.team != state.team:
        raise ValueError(f"alert for team {alert.team} applied to state of team {state.team}")
    if alert.alert_id <= state.epoch_start_seq:
        raise EpochMismatch(
            f"alert {alert.alert_id} predates epoch {state.epoch} start marker {state.epoch_start_seq}"
        )
    key = (alert.ids, alert.severity)
    counts = dict(state.counts)
    counts[key] = counts.get(key, 0) + 1

    hosts = state.epoch_dst_hosts
    if alert.dst_ip and (dst_in_range if dst_in_range is not None else True):
        hosts = hosts | {alert.dst_ip}
    triple = (alert.src_ip or "", alert.dst_ip or "", alert.rule_id)
    triples = state.epoch_triples | {triple}

    return replace(state, counts=counts, epoch_dst_hosts=hosts, epoch_triples=triples)


def note_epoch_mismatch(state: TeamScoreState) -> TeamScoreState:
    return replace(state, epoch_mismatches=state.epoch_mismatches + 1)


def penalty(state: TeamScoreState, weights: WeightTable) -> Decimal:
    """Severity-weighted alert count for the current epoch; exact decimal sum."""
    total = Decimal(0)
    for (ids, severity), n in state.counts.items():
        total += weights.weight(ids, severity) * n
    return total


def effective_penalty(state: TeamScoreState, weights: WeightTable) -> Decimal:
    """Penalty after the reset multiplier; the quantity the leaderboard compares."""
    return penalty(state, weights) * state.multiplier


def apply_reset(state: TeamScoreState, now: datetime,
                schedule: MultiplierSchedule = MultiplierSchedule(),
                lockout_duration: timedelta = timedelta(minutes=15),
                epoch_start_seq: int | None = None) -> TeamScoreState:
    """Start a fresh epoch: zero the counts, advance the multiplier, lock out.

    The first reset is free; further resets advance the multiplier along the
    schedule. lockout_until is exactly lockout_duration after the reset's
    commit time.
    """
    if state.lockout_until is not None and now < state.lockout_until:
        raise Locked(f"team {state.team} locked until {state.lockout_until.isoformat()}")
    reset_count = state.reset_count + 1
    return replace(
        state,
        epoch=state.epoch + 1,
        counts={},
        reset_count=reset_count,
        multiplier=schedule.value(reset_count),
        lockout_until=now + lockout_duration,
        epoch_start_seq=epoch_start_seq if epoch_start_seq is not None else state.epoch_start_seq,
        epoch_start_at=now,
        epoch_dst_hosts=frozenset(),
        epoch_triples=frozenset(),
    )


def freeze_validation(state: TeamScoreState, objective: Objective, writeup: str,
                      weights: WeightTable, now: datetime) -> tuple[TeamScoreState, Validation]:
    """Freeze the current effective penalty for an objective.

    The frozen value is the multiplied penalty at `now` and never changes
    afterward; re-validating the same objective requires a reset first.
    """
    if not writeup or not writeup.strip():
        raise EmptyWriteup("validation requires a non-empty attacker writeup")
    for existing in state.validations:
        if existing.objective is objective and existing.epoch == state.epoch:
            raise DuplicateValidation(
                f"team {state.team} already validated {objective.value} in epoch {state.epoch}"
            )
    start = state.epoch_start_at if state.epoch_start_at is not None else now
    validation = Validation(
        team=state.team,
        objective=objective,
        frozen_penalty=effective_penalty(state, weights),
        writeup=writeup,
        frozen_at=now,
        tiebreak=TieBreakMetrics(
            hosts_accessed=len(state.epoch_dst_hosts),
            network_footprint=len(state.epoch_triples),
            time_to_objective=now - start,
        ),
        epoch=state.epoch,
    )
    return replace(state, validations=state.validations + (validation,)), validation


def attach_validation(state: TeamScoreState, validation: Validation) -> TeamScoreState:
    """Attach a validation reconstructed from the event log (replay path)."""
    return replace(state, validations=state.validations + (validation,))


def tiebreak_metrics(alerts: Iterable[NormalizedAlert], epoch_start: datetime,
                     frozen_at: datetime,
                     in_range: Callable[[str], bool] | None = None) -> TieBreakMetrics:
    """Compute the tie-break metrics from an epoch's alert stream.

    Stream-level counterpart of the running sets kept on TeamScoreState;
    both must agree on any input (property-tested).
    """
    hosts: set[str] = set()
    triples: set[tuple[str, str, str]] = set()
    for alert in alerts:
        if alert.dst_ip and (in_range is None or in_range(alert.dst_ip)):
            hosts.add(alert.dst_ip)
        triples.add((alert.src_ip or "", alert.dst_ip or "", alert.rule_id))
    return TieBreakMetrics(
        hosts_accessed=len(hosts),
        network_footprint=len(triples),
        time_to_objective=frozen_at - epoch_start,
    )


def _td_us(td: timedelta) -> int:
    return (td.days * 86_400 + td.seconds) * 1_000_000 + td.microseconds
