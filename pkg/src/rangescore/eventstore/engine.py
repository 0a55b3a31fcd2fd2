"""The competition engine: commands in, events out, state as a fold.

Command handlers (ingest, reset, validate, ack, label) validate against
current state, append the resulting facts to the log, then update state by
applying the committed records. Replay after a restart runs the exact same
apply functions over the exact same records, so a rebuilt engine is
bit-identical to one that never stopped. Apply never appends; only command
handlers do, which is what makes replay idempotent.

All mutation happens under one lock (single linearizable appender); reads
take the lock briefly to copy, parsing and serialization stay outside it.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, replace
from datetime import datetime, timedelta
from decimal import Decimal
from queue import SimpleQueue
from typing import Iterable

from rangescore.evaluation.labels import AlertLabel, LabelSet
from rangescore.ingest.attribution import AddressingScheme, AmbiguousAttribution, attribute_team
from rangescore.ingest.records import ConnectorStats, NormalizedAlert, RawAlertRecord, SeverityClass
from rangescore.ingest.severity import SeverityMap, UnmappedSeverity, normalize
from rangescore.orchestrator.credentials import CredentialSet, Roster, randomize_credentials
from rangescore.orchestrator.pool import TemplatePool
from rangescore.scoring.state import (
    EpochMismatch,
    MultiplierSchedule,
    Objective,
    TeamScoreState,
    TieBreakMetrics,
    Validation,
    apply_alert,
    apply_reset,
    attach_validation,
    effective_penalty,
    freeze_validation,
    new_team_state,
    note_epoch_mismatch,
    penalty,
)
from rangescore.scoring.weights import WeightTable
from rangescore.eventstore.log import EventLog, RawStore
from rangescore.eventstore.records import EventKind, EventRecord, utcnow


class EngineError(Exception):
    pass


class IngestHalted(EngineError):
    """Connector intake stopped after an unmappable severity; needs operator action."""

    def __init__(self, ids: str, reason: str):
        self.ids = ids
        self.reason = reason
        super().__init__(f"ingest halted for {ids}: {reason}")


class UnknownTeam(EngineError):
    pass


class UnknownAlert(EngineError):
    pass


class AckMismatch(EngineError):
    """Acknowledgment does not match any pending provisioning request."""


@dataclass(frozen=True)
class ScoringRules:
    """Everything the fold needs; fixed for the lifetime of a log."""

    weights: WeightTable
    severity_map: SeverityMap
    scheme: AddressingScheme
    schedule: MultiplierSchedule = MultiplierSchedule()
    lockout_duration: timedelta = timedelta(minutes=15)


def alert_payload(alert: NormalizedAlert) -> dict:
    return {
        "alert_id": alert.alert_id,
        "ids": alert.ids,
        "severity": alert.severity.value,
        "native_severity": alert.native_severity,
        "sensor_timestamp": alert.sensor_timestamp.isoformat(),
        "rule_id": alert.rule_id,
        "rule_name": alert.rule_name,
        "team": alert.team,
        "src_ip": alert.src_ip,
        "dst_ip": alert.dst_ip,
        "raw_ref": alert.raw_ref,
    }


def alert_from_payload(payload: dict) -> NormalizedAlert:
    return NormalizedAlert(
        alert_id=payload["alert_id"],
        ids=payload["ids"],
        severity=SeverityClass(payload["severity"]),
        native_severity=payload["native_severity"],
        sensor_timestamp=datetime.fromisoformat(payload["sensor_timestamp"]),
        rule_id=payload["rule_id"],
        rule_name=payload["rule_name"],
        team=payload.get("team"),
        src_ip=payload.get("src_ip"),
        dst_ip=payload.get("dst_ip"),
        raw_ref=payload["raw_ref"],
    )


def validation_from_payload(payload: dict) -> Validation:
    return Validation(
        team=payload["team"],
        objective=Objective(payload["objective"]),
        epoch=payload["epoch"],
        frozen_penalty=Decimal(payload["frozen_penalty"]),
        writeup=payload["writeup"],
        frozen_at=datetime.fromisoformat(payload["frozen_at"]),
        tiebreak=TieBreakMetrics(
            hosts_accessed=payload["hosts_accessed"],
            network_footprint=payload["network_footprint"],
            time_to_objective=timedelta(microseconds=payload["time_to_objective_us"]),
        ),
    )


def apply_scoring_record(states: dict[int, TeamScoreState], record: EventRecord,
                         rules: ScoringRules) -> int | None:
    """Fold one record into the per-team score states. Returns the affected
    team, or None when the record does not touch scoring.

    Shared by the engine and every stream projection so a reconnecting
    consumer recomputes byte-identical score snapshots.
    """
    payload = record.payload
    if record.kind is EventKind.ALERT_INGESTED:
        team = payload.get("team")
        if team is None:
            return None
        state = states.get(team) or new_team_state(team, start_at=record.committed_at)
        alert = alert_from_payload(payload)
        in_range = rules.scheme.contains(alert.dst_ip)
        try:
            states[team] = apply_alert(state, alert, dst_in_range=in_range)
        except EpochMismatch:
            states[team] = note_epoch_mismatch(state)
        return team
    if record.kind is EventKind.RESET_APPLIED:
        team = payload["team"]
        state = states.get(team) or new_team_state(team, start_at=record.committed_at)
        new = apply_reset(state, now=record.committed_at, schedule=rules.schedule,
                          lockout_duration=rules.lockout_duration,
                          epoch_start_seq=record.seq)
        # the committed facts win over any config drift since the commit
        multiplier = Decimal(payload["multiplier"])
        lockout_until = datetime.fromisoformat(payload["lockout_until"])
        if new.multiplier != multiplier or new.lockout_until != lockout_until:
            new = replace(new, multiplier=multiplier, lockout_until=lockout_until)
        states[team] = new
        return team
    if record.kind is EventKind.VALIDATION_FROZEN:
        team = payload["team"]
        state = states.get(team) or new_team_state(team, start_at=record.committed_at)
        states[team] = attach_validation(state, validation_from_payload(payload))
        return team
    return None


def score_snapshot(state: TeamScoreState, rules: ScoringRules, seq: int,
                   now: datetime | None = None) -> dict:
    base = penalty(state, rules.weights)
    snap = {
        "seq": seq,
        "team": state.team,
        "epoch": state.epoch,
        "penalty": str(base),
        "effective_penalty": str(base * state.multiplier),
        "multiplier": str(state.multiplier),
        "reset_count": state.reset_count,
        "lockout_until": state.lockout_until.isoformat() if state.lockout_until else None,
        "counts": [
            [ids, severity.value, n]
            for (ids, severity), n in sorted(
                state.counts.items(), key=lambda kv: (kv[0][0], kv[0][1].value)
            )
        ],
        "hosts_accessed": len(state.epoch_dst_hosts),
        "network_footprint": len(state.epoch_triples),
        "validations": [v.as_dict() for v in state.validations],
    }
    if now is not None:
        snap["locked"] = state.lockout_until is not None and now < state.lockout_until
    return snap


class ScoreProjection:
    """Incremental score fold for one stream consumer.

    Feed it records in seq order; it returns a score snapshot whenever the
    record changed a team's score, computed purely from the records so any
    two consumers at the same position agree exactly.
    """

    def __init__(self, rules: ScoringRules):
        self._rules = rules
        self._states: dict[int, TeamScoreState] = {}

    def apply(self, record: EventRecord) -> dict | None:
        team = apply_scoring_record(self._states, record, self._rules)
        if team is None:
            return None
        return score_snapshot(self._states[team], self._rules, record.seq)


@dataclass(frozen=True)
class IngestResult:
    record: EventRecord
    alert: NormalizedAlert


@dataclass(frozen=True)
class ResetResult:
    reset: EventRecord
    provision: EventRecord
    state: TeamScoreState


class CompetitionEngine:
    """Single-process command handler over one event log."""

    def __init__(self, log: EventLog, raw: RawStore, rules: ScoringRules,
                 pool: TemplatePool, roster: Roster, seed: str):
        self._log = log
        self._raw = raw
        self._rules = rules
        self._pool = pool
        self._roster = roster
        self._seed = seed
        self._lock = threading.Lock()
        self._states: dict[int, TeamScoreState] = {}
        self._labels = LabelSet()
        self._stats: dict[str, ConnectorStats] = {}
        self._halted: dict[str, str] = {}
        self._unattributed: list[int] = []
        self._current_template: dict[int, str] = {}
        self._pending_template: dict[int, str] = {}
        self._queued_teams: list[int] = []
        self._credentials: dict[tuple[int, str], CredentialSet] = {}
        self._subscribers: list[SimpleQueue] = []
        for record in self._log.records():
            self._apply(record)

    # -- shared state fold -------------------------------------------------

    def _apply(self, record: EventRecord) -> None:
        """Fold one committed record into engine state. Never appends."""
        apply_scoring_record(self._states, record, self._rules)
        payload = record.payload
        if record.kind is EventKind.ALERT_INGESTED:
            stats = self._stats_for(payload["ids"])
            stats.accepted += 1
            if payload.get("team") is None:
                stats.unattributed += 1
                self._unattributed.append(record.seq)
        elif record.kind is EventKind.PROVISION_REQUESTED:
            team = payload["team"]
            if payload["queued"]:
                if team not in self._queued_teams:
                    self._queued_teams.append(team)
            else:
                template_id = payload["template_id"]
                self._pool.assign(template_id, team)
                self._pending_template[team] = template_id
                if team in self._queued_teams:
                    self._queued_teams.remove(team)
                self._credentials[(team, template_id)] = randomize_credentials(
                    template_id, self._credential_seed(record.seq), self._roster
                )
        elif record.kind is EventKind.PROVISION_ACKED:
            team = payload["team"]
            released = payload.get("released_template_id")
            if released is not None:
                self._pool.release(released)
                self._credentials.pop((team, released), None)
            self._current_template[team] = payload["template_id"]
            self._pending_template.pop(team, None)
        elif record.kind is EventKind.LABEL_ASSIGNED:
            self._labels.add(AlertLabel(
                alert_id=payload["alert_id"],
                confidence=payload["confidence"],
                labeler=payload["labeler"],
                note=payload.get("note"),
            ))

    def _credential_seed(self, provision_seq: int) -> str:
        # unique per allocation yet reproducible from the log
        return f"{self._seed}:{provision_seq}"

    def _stats_for(self, ids: str) -> ConnectorStats:
        stats = self._stats.get(ids)
        if stats is None:
            stats = ConnectorStats()
            self._stats[ids] = stats
        return stats

    def _publish(self, record: EventRecord) -> None:
        for q in self._subscribers:
            q.put(record)

    def _state_for(self, team: int) -> TeamScoreState:
        return self._states.get(team) or new_team_state(team)

    def _check_team(self, team: int) -> None:
        scheme = self._rules.scheme
        if not scheme.min_team <= team <= scheme.max_team:
            raise UnknownTeam(f"team {team} outside {scheme.min_team}..{scheme.max_team}")

    # -- commands ----------------------------------------------------------

    def ingest(self, raw_record: RawAlertRecord) -> IngestResult:
        """Normalize, attribute, commit, and score one parsed sensor record."""
        ids = raw_record.ids
        if ids in self._halted:
            raise IngestHalted(ids, self._halted[ids])
        try:
            normalized = normalize(raw_record, self._rules.severity_map)
        except UnmappedSeverity as exc:
            stats = self._stats_for(ids)
            stats.halted = True
            stats.last_error = str(exc)
            self._halted[ids] = str(exc)
            raise IngestHalted(ids, str(exc)) from exc
        try:
            normalized = attribute_team(normalized, self._rules.scheme, raw=raw_record.raw)
        except AmbiguousAttribution as exc:
            stats = self._stats_for(ids)
            stats.ambiguous += 1
            stats.last_error = str(exc)
            raise
        with self._lock:
            now = utcnow()
            raw_ref = self._raw.append(raw_record.raw)
            committed = normalized.committed(
                alert_id=self._log.next_seq, ingest_timestamp=now, raw_ref=raw_ref
            )
            record = self._log.append(EventKind.ALERT_INGESTED, alert_payload(committed),
                                      committed_at=now)
            self._apply(record)
            self._publish(record)
        return IngestResult(record=record, alert=committed)

    def note_reject(self, ids: str, category: str, error: str | None = None) -> None:
        """Count a record the connector turned away before commit."""
        with self._lock:
            stats = self._stats_for(ids)
            setattr(stats, category, getattr(stats, category) + 1)
            if error:
                stats.last_error = error

    def reset(self, team: int) -> ResetResult:
        """Swap the team to a fresh environment and start a new scoring epoch."""
        self._check_team(team)
        with self._lock:
            now = utcnow()
            state = self._state_for(team)
            preview = apply_reset(
                state, now=now, schedule=self._rules.schedule,
                lockout_duration=self._rules.lockout_duration,
                epoch_start_seq=self._log.next_seq,
            )  # raises Locked during an active lockout
            reset_record = self._log.append(EventKind.RESET_APPLIED, {
                "team": team,
                "epoch": preview.epoch,
                "reset_count": preview.reset_count,
                "multiplier": str(preview.multiplier),
                "lockout_until": preview.lockout_until.isoformat(),
            }, committed_at=now)
            self._apply(reset_record)
            self._publish(reset_record)
            provision_record = self._request_provision(team)
        return ResetResult(reset=reset_record, provision=provision_record,
                           state=self._states[team])

    def _request_provision(self, team: int) -> EventRecord:
        """Append the provisioning request for a reset; lock must be held."""
        template_id = self._pool.peek_available()
        if template_id is None:
            payload = {"team": team, "template_id": None,
                       "seed_fingerprint": None, "queued": True}
        else:
            seq = self._log.next_seq
            creds = randomize_credentials(template_id, self._credential_seed(seq), self._roster)
            payload = {"team": team, "template_id": template_id,
                       "seed_fingerprint": creds.seed_fingerprint(), "queued": False}
        record = self._log.append(EventKind.PROVISION_REQUESTED, payload,
                                  committed_at=utcnow())
        self._apply(record)
        self._publish(record)
        return record

    def provision_ack(self, team: int, template_id: str) -> list[EventRecord]:
        """Provisioner reports the new instance ready; frees the old one and
        serves queued teams while templates remain."""
        self._check_team(team)
        with self._lock:
            if self._pending_template.get(team) != template_id:
                raise AckMismatch(
                    f"team {team} has no pending provision for template {template_id!r}"
                )
            record = self._log.append(EventKind.PROVISION_ACKED, {
                "team": team,
                "template_id": template_id,
                "released_template_id": self._current_template.get(team),
            }, committed_at=utcnow())
            self._apply(record)
            self._publish(record)
            out = [record]
            while self._queued_teams and self._pool.peek_available() is not None:
                out.append(self._request_provision(self._queued_teams[0]))
        return out

    def validate(self, team: int, objective: Objective, writeup: str) -> Validation:
        """Freeze the team's current effective penalty for one objective."""
        self._check_team(team)
        with self._lock:
            now = utcnow()
            state = self._state_for(team)
            _, validation = freeze_validation(
                state, objective, writeup, self._rules.weights, now
            )  # raises EmptyWriteup / DuplicateValidation
            record = self._log.append(
                EventKind.VALIDATION_FROZEN, validation.as_dict(), committed_at=now
            )
            self._apply(record)
            self._publish(record)
        return validation

    def assign_label(self, alert_id: int, confidence: int, labeler: str,
                     note: str | None = None) -> EventRecord:
        with self._lock:
            if not 1 <= alert_id <= self._log.max_seq:
                raise UnknownAlert(f"no event {alert_id}")
            target = self._log.get(alert_id)
            if target.kind is not EventKind.ALERT_INGESTED:
                raise UnknownAlert(f"event {alert_id} is {target.kind.value}, not an alert")
            record = self._log.append(EventKind.LABEL_ASSIGNED, {
                "alert_id": alert_id,
                "confidence": confidence,
                "labeler": labeler,
                "note": note,
            }, committed_at=utcnow())
            self._apply(record)
            self._publish(record)
        return record

    # -- reads -------------------------------------------------------------

    @property
    def rules(self) -> ScoringRules:
        return self._rules

    @property
    def log(self) -> EventLog:
        return self._log

    @property
    def raw_store(self) -> RawStore:
        return self._raw

    def team_state(self, team: int) -> TeamScoreState:
        self._check_team(team)
        with self._lock:
            return self._state_for(team)

    def team_states(self) -> dict[int, TeamScoreState]:
        with self._lock:
            return dict(self._states)

    def score(self, team: int, now: datetime | None = None) -> dict:
        self._check_team(team)
        with self._lock:
            state = self._state_for(team)
            seq = self._log.max_seq
        return score_snapshot(state, self._rules, seq,
                              now=now if now is not None else utcnow())

    def validations(self) -> list[Validation]:
        with self._lock:
            out: list[Validation] = []
            for team in sorted(self._states):
                out.extend(self._states[team].validations)
            return out

    def labels(self) -> LabelSet:
        with self._lock:
            return LabelSet(list(self._labels))

    def halted(self) -> dict[str, str]:
        with self._lock:
            return dict(self._halted)

    def credentials_pending(self) -> list[dict]:
        """Open provisioning work for the external provisioner, credentials included."""
        with self._lock:
            out = []
            for team, template_id in sorted(self._pending_template.items()):
                creds = self._credentials.get((team, template_id))
                out.append({
                    "team": team,
                    "template_id": template_id,
                    "seed_fingerprint": creds.seed_fingerprint() if creds else None,
                    "entries": [
                        {"role": e.role, "kind": e.kind, "account_name": e.account_name,
                         "password": e.password, "nt_hash": e.nt_hash}
                        for e in creds.entries
                    ] if creds else [],
                })
            for team in self._queued_teams:
                out.append({"team": team, "template_id": None,
                            "seed_fingerprint": None, "entries": []})
            return out

    def stats(self) -> dict:
        with self._lock:
            return {
                "events": self._log.max_seq,
                "connectors": {ids: self._stats[ids].as_dict() for ids in sorted(self._stats)},
                "halted": dict(self._halted),
                "unattributed": list(self._unattributed),
                "queued_teams": list(self._queued_teams),
                "templates_available": len(self._pool.available()),
                "teams": sorted(self._states),
            }

    def subscribe(self) -> tuple[SimpleQueue, int]:
        """Queue of future records plus the seq already covered by the log.

        Atomic with append: every record with seq greater than the returned
        watermark will arrive on the queue exactly once.
        """
        with self._lock:
            q: SimpleQueue = SimpleQueue()
            self._subscribers.append(q)
            return q, self._log.max_seq

    def unsubscribe(self, q: SimpleQueue) -> None:
        with self._lock:
            if q in self._subscribers:
                self._subscribers.remove(q)
