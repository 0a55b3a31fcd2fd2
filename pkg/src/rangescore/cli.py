"""Command-line entry points: serve the API, run analytics, feed sensors."""

from __future__ import annotations

import json
import sys
import time
import urllib.error
import urllib.request
from importlib import resources
from pathlib import Path

import click

from rangescore.config import ConfigError, load_config
from rangescore.evaluation.attck import TableError, attck_summary, load_technique_table
from rangescore.evaluation.coverage import MatrixError, detection_coverage, load_matrix
from rangescore.evaluation.export import UnsupportedFormat, export_report
from rangescore.evaluation.fpr import UnlabeledAlerts, fpr, load_alert_export
from rangescore.evaluation.labels import (
    DEFAULT_ADJUDICATOR,
    LabelSet,
    foothold_auto_labels,
    load_labels,
)

DEFAULT_WRITEUP_CORPUS = 14


def _packaged(name: str) -> Path:
    return Path(str(resources.files("rangescore.data").joinpath(name)))


@click.group()
def main() -> None:
    """Cyber-range scoring service and analytics."""


@main.command()
@click.option("--config", "config_path", type=click.Path(), default=None,
              help="Path to the YAML configuration file.")
@click.option("--listen", default=None, help="host:port to bind (overrides config).")
@click.option("--data-dir", default=None, type=click.Path(),
              help="Event store directory (overrides config).")
@click.option("--operator-token", default=None,
              help="Shared token required on mutating endpoints.")
def serve(config_path: str | None, listen: str | None, data_dir: str | None,
          operator_token: str | None) -> None:
    """Run the scoring service."""
    import uvicorn

    from rangescore.eventstore.service import build_app, build_engine

    try:
        cfg = load_config(config_path, cli={
            "listen": listen, "data_dir": data_dir, "operator_token": operator_token,
        })
        engine = build_engine(cfg)
    except ConfigError as exc:
        raise click.ClickException(f"configuration error: {exc}") from exc
    app = build_app(engine, cfg)
    click.echo(f"listening on {cfg.host}:{cfg.port}, data in {cfg.data_dir}", err=True)
    uvicorn.run(app, host=cfg.host, port=cfg.port, log_level="warning")


@main.group(name="eval")
def eval_group() -> None:
    """Post-event analytics over exports."""


@eval_group.command(name="fpr")
@click.option("--export", "export_path", type=click.Path(exists=True), required=True,
              help="Alert export file (CSV or NDJSON) from /export/alerts.")
@click.option("--labels", "labels_path", type=click.Path(exists=True), default=None,
              help="Label file (CSV or NDJSON): alert_id,confidence,labeler,note.")
@click.option("--team", type=int, default=None, help="Restrict to one team.")
@click.option("--ids", default=None, help="Restrict to one sensor configuration.")
@click.option("--adjudicator", default=DEFAULT_ADJUDICATOR, show_default=True,
              help="Labeler whose labels are authoritative.")
@click.option("--foothold", default=None,
              help="Auto-label alerts sourced from this foothold IP as attack traffic.")
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv",
              show_default=True)
@click.option("--show-reference", is_flag=True,
              help="Also print the shipped reference ratios (to stderr).")
def fpr_cmd(export_path: str, labels_path: str | None, team: int | None, ids: str | None,
            adjudicator: str, foothold: str | None, fmt: str, show_reference: bool) -> None:
    """False-positive ratio of a labeled alert selection."""
    alerts = load_alert_export(export_path)
    label_set = load_labels(labels_path) if labels_path else LabelSet()
    if foothold:
        for label in foothold_auto_labels(alerts, foothold):
            label_set.add(label)
    try:
        report = fpr(alerts, label_set, team=team, ids=ids, adjudicator=adjudicator)
    except UnlabeledAlerts as exc:
        raise click.ClickException(str(exc)) from exc
    click.echo(export_report(report, fmt), nl=False)
    if show_reference:
        click.echo(_packaged("fpr_reference.csv").read_text(encoding="utf-8"), err=True, nl=False)


@eval_group.command()
@click.option("--matrix", "matrix_path", type=click.Path(exists=True), default=None,
              help="Detection matrix CSV; defaults to the shipped fixture.")
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv",
              show_default=True)
def coverage(matrix_path: str | None, fmt: str) -> None:
    """Per-configuration detection coverage and the undetected set."""
    path = Path(matrix_path) if matrix_path else _packaged("detection_matrix.csv")
    try:
        report = detection_coverage(load_matrix(path))
    except MatrixError as exc:
        raise click.ClickException(str(exc)) from exc
    click.echo(export_report(report, fmt), nl=False)


@eval_group.command()
@click.option("--table", "table_path", type=click.Path(exists=True), default=None,
              help="Technique table CSV; defaults to the shipped fixture.")
@click.option("--max-writeups", type=int, default=DEFAULT_WRITEUP_CORPUS, show_default=True,
              help="Writeup corpus size used to bound the counts.")
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv",
              show_default=True)
def attck(table_path: str | None, max_writeups: int, fmt: str) -> None:
    """Realism counts from the technique comparison table."""
    path = Path(table_path) if table_path else _packaged("volt_typhoon_overlap.csv")
    try:
        rows = load_technique_table(path, max_writeups=max_writeups)
    except TableError as exc:
        raise click.ClickException(str(exc)) from exc
    click.echo(export_report(attck_summary(rows), fmt), nl=False)


@main.command()
@click.option("--file", "file_path", type=click.Path(exists=True), required=True,
              help="Sensor NDJSON file to follow.")
@click.option("--url", required=True, help="Service base URL, e.g. http://127.0.0.1:8410")
@click.option("--connector", type=click.Choice(["suricata", "wazuh", "generic"]),
              required=True)
@click.option("--ids", default=None, help="Sensor configuration id query parameter.")
@click.option("--from-start", is_flag=True, help="Replay the whole file before following.")
@click.option("--poll", type=float, default=0.5, show_default=True,
              help="Seconds between checks for new lines.")
@click.option("--once", is_flag=True, help="Stop at end of file instead of following.")
def tail(file_path: str, url: str, connector: str, ids: str | None,
         from_start: bool, poll: float, once: bool) -> None:
    """Follow a sensor log file and POST each line to the ingest API."""
    endpoint = f"{url.rstrip('/')}/ingest/{connector}"
    if ids:
        endpoint += f"?ids={ids}"
    sent = accepted = 0
    with open(file_path, "rb") as fh:
        if not from_start:
            fh.seek(0, 2)
        while True:
            line = fh.readline()
            if not line:
                if once:
                    break
                time.sleep(poll)
                continue
            if not line.strip():
                continue
            sent += 1
            req = urllib.request.Request(
                endpoint, data=line, headers={"Content-Type": "application/json"}
            )
            try:
                with urllib.request.urlopen(req, timeout=10) as resp:
                    doc = json.loads(resp.read())
                    if doc.get("accepted"):
                        accepted += 1
            except urllib.error.HTTPError as exc:
                click.echo(f"line {sent}: HTTP {exc.code} {exc.read()[:200]!r}", err=True)
            except urllib.error.URLError as exc:
                raise click.ClickException(f"cannot reach {endpoint}: {exc}") from exc
    click.echo(f"sent {sent} lines, {accepted} accepted", err=True)


@main.command()
@click.option("--url", required=True, help="Service base URL.")
@click.option("--alert-id", type=int, required=True)
@click.option("--confidence", type=click.IntRange(1, 5), required=True)
@click.option("--labeler", default=DEFAULT_ADJUDICATOR, show_default=True)
@click.option("--note", default=None)
@click.option("--token", default=None, help="Operator token if the service requires one.")
def label(url: str, alert_id: int, confidence: int, labeler: str,
          note: str | None, token: str | None) -> None:
    """Assign a confidence label to one ingested alert."""
    body = json.dumps({
        "alert_id": alert_id, "confidence": confidence, "labeler": labeler, "note": note,
    }).encode("utf-8")
    headers = {"Content-Type": "application/json"}
    if token:
        headers["X-Operator-Token"] = token
    req = urllib.request.Request(f"{url.rstrip('/')}/labels", data=body, headers=headers)
    try:
        with urllib.request.urlopen(req, timeout=10) as resp:
            click.echo(resp.read().decode("utf-8"))
    except urllib.error.HTTPError as exc:
        raise click.ClickException(f"HTTP {exc.code}: {exc.read().decode('utf-8')[:500]}") from exc
    except urllib.error.URLError as exc:
        raise click.ClickException(f"cannot reach {url}: {exc}") from exc


if __name__ == "__main__":
    main()
