"""HTTP surface: sensor intake, team commands, score reads, SSE stream,
and exports for the analytics tooling.

Mutating handlers run in the threadpool (the engine blocks on the durable
write); the stream endpoint is async and bridges the engine's thread-side
subscription queue into server-sent events. Score events on the stream are
recomputed from the records by a per-connection projection, so a client that
reconnects from a cursor sees byte-identical score data to one that never
dropped.
"""

from __future__ import annotations

import asyncio
import csv
import functools
import io
import json
import queue
from typing import AsyncIterator

from fastapi import Body, FastAPI, HTTPException, Request
from fastapi.responses import PlainTextResponse, StreamingResponse
from starlette.concurrency import run_in_threadpool

from rangescore.config import ServiceConfig
from rangescore.eventstore.engine import (
    AckMismatch,
    CompetitionEngine,
    IngestHalted,
    ScoreProjection,
    ScoringRules,
    UnknownAlert,
    UnknownTeam,
)
from rangescore.eventstore.log import EventLog, RawStore
from rangescore.eventstore.records import EventKind, EventRecord, SchemaViolation, utcnow
from rangescore.evaluation.labels import LabelError
from rangescore.ingest.attribution import AmbiguousAttribution
from rangescore.ingest.severity import SeverityMapError
from rangescore.ingest.parsers import (
    MalformedRecord,
    NotAnAlert,
    UnknownIds,
    parse_generic_webhook,
    parse_suricata_eve,
    parse_wazuh_alert,
)
from rangescore.scoring.leaderboard import LEADERBOARD_COLUMNS, leaderboard_rows
from rangescore.scoring.state import (
    Cup,
    DuplicateValidation,
    EmptyWriteup,
    Locked,
    Objective,
)

ALERT_EXPORT_COLUMNS = (
    "alert_id", "ids", "severity", "native_severity", "team", "rule_id",
    "rule_name", "src_ip", "dst_ip", "sensor_timestamp", "committed_at", "raw_ref",
)


def build_engine(config: ServiceConfig) -> CompetitionEngine:
    """Construct the engine (and replay any existing log) from configuration."""
    config.check()
    log = EventLog(config.data_dir, sync=config.sync_writes,
                   segment_records=config.segment_records)
    raw = RawStore(config.data_dir, sync=config.sync_writes)
    rules = ScoringRules(
        weights=config.weight_table(),
        severity_map=config.severity_map(),
        scheme=config.scheme(),
        schedule=config.schedule(),
        lockout_duration=config.lockout(),
    )
    return CompetitionEngine(log, raw, rules, config.pool(), config.roster(), config.seed)


def build_app(engine: CompetitionEngine, config: ServiceConfig) -> FastAPI:
    app = FastAPI(title="rangescore", docs_url=None, redoc_url=None, openapi_url=None)

    def require_token(request: Request) -> None:
        if config.operator_token is None:
            return
        header = request.headers.get("x-operator-token")
        if header is None:
            auth = request.headers.get("authorization", "")
            if auth.startswith("Bearer "):
                header = auth[len("Bearer "):]
        if header != config.operator_token:
            raise HTTPException(401, "operator token required")

    # -- ingest ------------------------------------------------------------

    def _ingest(parse, stats_ids: str, body: bytes) -> dict:
        try:
            raw_record = parse(body)
        except NotAnAlert as exc:
            engine.note_reject(stats_ids, "not_alert")
            return {"accepted": False, "reason": str(exc) or "not an alert"}
        except UnknownIds as exc:
            engine.note_reject(stats_ids, "unknown_ids", str(exc))
            raise HTTPException(400, str(exc)) from exc
        except MalformedRecord as exc:
            engine.note_reject(stats_ids, "malformed", str(exc))
            raise HTTPException(400, f"malformed record: {exc}") from exc
        try:
            result = engine.ingest(raw_record)
        except IngestHalted as exc:
            raise HTTPException(503, str(exc)) from exc
        except AmbiguousAttribution as exc:
            raise HTTPException(400, f"ambiguous attribution: {exc}") from exc
        except SeverityMapError as exc:
            # reachable through the ?ids= override; must not take the worker down
            raise HTTPException(400, str(exc)) from exc
        alert = result.alert
        return {
            "accepted": True,
            "alert_id": alert.alert_id,
            "seq": result.record.seq,
            "team": alert.team,
            "severity": alert.severity.value,
        }

    @app.post("/ingest/suricata", status_code=202)
    async def ingest_suricata(request: Request, ids: str | None = None):
        body = await request.body()
        use_ids = ids or config.suricata_ids
        parse = functools.partial(
            parse_suricata_eve, ids=use_ids, critical_tag=config.suricata_critical_tag
        )
        return await run_in_threadpool(_ingest, parse, use_ids, body)

    @app.post("/ingest/wazuh", status_code=202)
    async def ingest_wazuh(request: Request, ids: str | None = None):
        body = await request.body()
        use_ids = ids or config.wazuh_ids
        parse = functools.partial(parse_wazuh_alert, ids=use_ids)
        return await run_in_threadpool(_ingest, parse, use_ids, body)

    @app.post("/ingest/generic", status_code=202)
    async def ingest_generic(request: Request):
        body = await request.body()
        parse = functools.partial(parse_generic_webhook, known_ids=frozenset(config.generic_ids))
        return await run_in_threadpool(_ingest, parse, "generic", body)

    # -- team commands -----------------------------------------------------

    @app.post("/teams/{team}/reset")
    async def reset_team(team: int, request: Request):
        require_token(request)

        def handle() -> dict:
            try:
                result = engine.reset(team)
            except UnknownTeam as exc:
                raise HTTPException(404, str(exc)) from exc
            except Locked as exc:
                raise HTTPException(409, str(exc)) from exc
            provision = result.provision.payload
            return {
                "team": team,
                "epoch": result.state.epoch,
                "reset_count": result.state.reset_count,
                "multiplier": str(result.state.multiplier),
                "lockout_until": result.state.lockout_until.isoformat(),
                "template_id": provision.get("template_id"),
                "queued": provision["queued"],
                "seed_fingerprint": provision.get("seed_fingerprint"),
            }

        return await run_in_threadpool(handle)

    @app.post("/teams/{team}/validate")
    async def validate_team(team: int, request: Request, body: dict = Body(...)):
        require_token(request)
        objective_raw = body.get("objective")
        writeup = body.get("writeup", "")
        try:
            objective = Objective(objective_raw)
        except ValueError:
            raise HTTPException(
                400, f"objective must be one of {[o.value for o in Objective]}, got {objective_raw!r}"
            ) from None

        def handle() -> dict:
            try:
                validation = engine.validate(team, objective, str(writeup))
            except UnknownTeam as exc:
                raise HTTPException(404, str(exc)) from exc
            except EmptyWriteup as exc:
                raise HTTPException(400, str(exc)) from exc
            except DuplicateValidation as exc:
                raise HTTPException(409, str(exc)) from exc
            return validation.as_dict()

        return await run_in_threadpool(handle)

    @app.get("/teams/{team}/score")
    def team_score(team: int):
        try:
            return engine.score(team)
        except UnknownTeam as exc:
            raise HTTPException(404, str(exc)) from exc

    # -- leaderboards ------------------------------------------------------

    def _cup(name: str) -> Cup:
        try:
            return Cup(name)
        except ValueError:
            raise HTTPException(404, f"unknown cup {name!r}") from None

    @app.get("/leaderboard/{cup_name}")
    def leaderboard(cup_name: str):
        cup = _cup(cup_name)
        return leaderboard_rows(engine.validations(), cup)

    # -- stream ------------------------------------------------------------

    @app.get("/stream")
    async def stream(request: Request, cursor: int | None = None,
                     team: int | None = None, kind: str | None = None):
        if config.restrict_team_feed and team is None:
            raise HTTPException(400, "stream is restricted to per-team feeds; pass ?team=N")
        last_event_id = request.headers.get("last-event-id")
        if last_event_id is not None:
            try:
                position = int(last_event_id)
            except ValueError:
                raise HTTPException(400, f"bad Last-Event-ID {last_event_id!r}") from None
        elif cursor is not None:
            position = cursor
        else:
            position = engine.log.max_seq
        kinds: frozenset[EventKind] | None = None
        if kind is not None:
            try:
                kinds = frozenset({EventKind(kind)})
            except ValueError:
                raise HTTPException(400, f"unknown event kind {kind!r}") from None
        max_seq = engine.log.max_seq
        if position < 0 or position > max_seq:
            raise HTTPException(400, f"cursor {position} outside 0..{max_seq}")

        return StreamingResponse(
            _sse(engine, config, position, team, kinds),
            media_type="text/event-stream",
            headers={"Cache-Control": "no-cache", "X-Accel-Buffering": "no"},
        )

    # -- exports -----------------------------------------------------------

    @app.get("/export/alerts")
    def export_alerts(format: str = "csv"):
        rows = _alert_rows(engine)
        if format == "json":
            lines = "".join(
                json.dumps(row, separators=(",", ":"), sort_keys=True) + "\n" for row in rows
            )
            return PlainTextResponse(lines, media_type="application/x-ndjson")
        if format == "csv":
            return PlainTextResponse(_csv(ALERT_EXPORT_COLUMNS, rows), media_type="text/csv")
        raise HTTPException(400, f"format must be csv or json, got {format!r}")

    @app.get("/export/events")
    def export_events(format: str = "csv"):
        records = engine.log.records()
        if format == "json":
            return PlainTextResponse(
                "".join(r.to_line() + "\n" for r in records),
                media_type="application/x-ndjson",
            )
        if format == "csv":
            rows = [
                {"seq": r.seq, "kind": r.kind.value, "committed_at": r.committed_at.isoformat(),
                 "payload": json.dumps(r.payload, separators=(",", ":"), sort_keys=True)}
                for r in records
            ]
            return PlainTextResponse(
                _csv(("seq", "kind", "committed_at", "payload"), rows), media_type="text/csv"
            )
        raise HTTPException(400, f"format must be csv or json, got {format!r}")

    @app.get("/export/leaderboard")
    def export_leaderboard(format: str = "csv", cup: str | None = None):
        cups = [_cup(cup)] if cup is not None else [Cup.ENTERPRISE, Cup.OT]
        validations = engine.validations()
        rows: list[dict] = []
        for c in cups:
            rows.extend(leaderboard_rows(validations, c))
        if format == "json":
            return rows
        if format == "csv":
            return PlainTextResponse(_csv(LEADERBOARD_COLUMNS, rows), media_type="text/csv")
        raise HTTPException(400, f"format must be csv or json, got {format!r}")

    # -- operations --------------------------------------------------------

    @app.post("/provision/ack")
    async def provision_ack(request: Request, body: dict = Body(...)):
        require_token(request)
        try:
            team = int(body["team"])
            template_id = str(body["template_id"])
        except (KeyError, TypeError, ValueError):
            raise HTTPException(400, "body must carry team and template_id") from None

        def handle() -> dict:
            try:
                records = engine.provision_ack(team, template_id)
            except UnknownTeam as exc:
                raise HTTPException(404, str(exc)) from exc
            except AckMismatch as exc:
                raise HTTPException(409, str(exc)) from exc
            return {"acked": True, "seqs": [r.seq for r in records]}

        return await run_in_threadpool(handle)

    @app.get("/provision/pending")
    def provision_pending(request: Request):
        require_token(request)
        return engine.credentials_pending()

    @app.post("/labels")
    async def assign_label(request: Request, body: dict = Body(...)):
        require_token(request)

        def handle() -> dict:
            try:
                record = engine.assign_label(
                    alert_id=int(body["alert_id"]),
                    confidence=int(body["confidence"]),
                    labeler=str(body["labeler"]),
                    note=body.get("note"),
                )
            except UnknownAlert as exc:
                raise HTTPException(404, str(exc)) from exc
            except (SchemaViolation, LabelError) as exc:
                raise HTTPException(400, str(exc)) from exc
            except (KeyError, TypeError, ValueError) as exc:
                raise HTTPException(400, f"bad label: {exc}") from exc
            return {"seq": record.seq}

        return await run_in_threadpool(handle)

    @app.get("/stats")
    def stats():
        return engine.stats()

    @app.get("/healthz")
    def healthz():
        return {"status": "ok", "events": engine.log.max_seq, "time": utcnow().isoformat()}

    return app


def _alert_rows(engine: CompetitionEngine) -> list[dict]:
    rows = []
    for record in engine.log.records():
        if record.kind is not EventKind.ALERT_INGESTED:
            continue
        p = record.payload
        rows.append({
            "alert_id": p["alert_id"],
            "ids": p["ids"],
            "severity": p["severity"],
            "native_severity": p["native_severity"],
            "team": p.get("team"),
            "rule_id": p["rule_id"],
            "rule_name": p["rule_name"],
            "src_ip": p.get("src_ip"),
            "dst_ip": p.get("dst_ip"),
            "sensor_timestamp": p["sensor_timestamp"],
            "committed_at": record.committed_at.isoformat(),
            "raw_ref": p["raw_ref"],
        })
    return rows


def _csv(columns: tuple[str, ...], rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: ("" if row.get(k) is None else row.get(k)) for k in columns})
    return buf.getvalue()


def _sse_frame(record: EventRecord) -> str:
    doc = {
        "seq": record.seq,
        "kind": record.kind.value,
        "committed_at": record.committed_at.isoformat(),
        "payload": record.payload,
    }
    data = json.dumps(doc, separators=(",", ":"), sort_keys=True)
    return f"id: {record.seq}\nevent: {record.kind.value}\ndata: {data}\n\n"


def _score_frame(snapshot: dict) -> str:
    data = json.dumps(snapshot, separators=(",", ":"), sort_keys=True)
    return f"event: score\ndata: {data}\n\n"


async def _sse(engine: CompetitionEngine, config: ServiceConfig, position: int,
               team: int | None, kinds: frozenset[EventKind] | None) -> AsyncIterator[str]:
    """Replay from `position`, then follow live, with derived score events.

    The projection consumes every record (filters only gate emission), so
    score snapshots are identical no matter where a consumer attached.
    """

    def admits(record: EventRecord) -> bool:
        if kinds is not None and record.kind not in kinds:
            return False
        if team is not None and record.payload.get("team") != team:
            return False
        return True

    q, watermark = engine.subscribe()
    loop = asyncio.get_running_loop()
    try:
        projection = ScoreProjection(engine.rules)
        for record in engine.log.records():
            if record.seq > watermark:
                break
            snapshot = projection.apply(record)
            if record.seq <= position:
                continue
            if admits(record):
                yield _sse_frame(record)
            if snapshot is not None and (team is None or snapshot["team"] == team):
                yield _score_frame(snapshot)
        last = watermark
        while True:
            try:
                record = await loop.run_in_executor(
                    None, functools.partial(q.get, timeout=config.sse_keepalive_seconds)
                )
            except queue.Empty:
                yield ": keepalive\n\n"
                continue
            if record.seq <= last:
                continue
            last = record.seq
            snapshot = projection.apply(record)
            if admits(record):
                yield _sse_frame(record)
            if snapshot is not None and (team is None or snapshot["team"] == team):
                yield _score_frame(snapshot)
    finally:
        engine.unsubscribe(q)
