"""Command-line interface: analytics commands, sensor tailer, labeling."""

from __future__ import annotations

import json

import pytest
from click.testing import CliRunner

from rangescore.cli import main

from test_service import live_service, wazuh_body


@pytest.fixture()
def runner():
    return CliRunner()


def write_alerts_csv(tmp_path):
    path = tmp_path / "alerts.csv"
    path.write_text(
        "alert_id,ids,severity,native_severity,team,rule_id,rule_name,"
        "src_ip,dst_ip,sensor_timestamp,committed_at,raw_ref\n"
        "1,wazuh-default,High,10,2,5710,brute,10.0.2.31,,t,t,0\n"
        "2,wazuh-default,Low,2,2,5501,login,10.0.2.31,,t,t,1\n"
        "3,suricata-et,Medium,2,3,2010935,scan,10.0.3.40,10.0.3.11,t,t,2\n"
        "4,wazuh-default,Low,3,2,5502,logout,203.0.113.9,,t,t,3\n"
    )
    return path


def write_labels_csv(tmp_path, rows):
    path = tmp_path / "labels.csv"
    lines = ["alert_id,confidence,labeler,note"]
    lines.extend(f"{a},{c},{who}," for a, c, who in rows)
    path.write_text("\n".join(lines) + "\n")
    return path


# -- eval fpr ---------------------------------------------------------------


def test_fpr_csv_output(tmp_path, runner):
    alerts = write_alerts_csv(tmp_path)
    labels = write_labels_csv(tmp_path, [
        (1, 1, "adjudicator"), (2, 2, "adjudicator"), (3, 5, "adjudicator"), (4, 4, "adjudicator"),
    ])
    result = runner.invoke(main, ["eval", "fpr", "--export", str(alerts),
                                  "--labels", str(labels)])
    assert result.exit_code == 0, result.output
    lines = result.stdout.splitlines()
    assert lines[0].startswith("team,ids,false_positives,total,fpr")
    assert ",2,4,0.500000,1,1,0,1,1" in lines[1]


def test_fpr_json_and_filters(tmp_path, runner):
    alerts = write_alerts_csv(tmp_path)
    labels = write_labels_csv(tmp_path, [
        (1, 1, "adjudicator"), (2, 2, "adjudicator"), (3, 5, "adjudicator"), (4, 4, "adjudicator"),
    ])
    result = runner.invoke(main, ["eval", "fpr", "--export", str(alerts),
                                  "--labels", str(labels),
                                  "--team", "3", "--format", "json"])
    assert result.exit_code == 0, result.output
    doc = json.loads(result.stdout)
    assert doc["total"] == 1
    assert doc["false_positives"] == 0
    assert doc["fpr"] == "0.000000"

    result = runner.invoke(main, ["eval", "fpr", "--export", str(alerts),
                                  "--labels", str(labels),
                                  "--ids", "wazuh-default", "--format", "json"])
    doc = json.loads(result.stdout)
    assert doc["total"] == 3
    assert doc["false_positives"] == 2


def test_fpr_refuses_unlabeled_selection(tmp_path, runner):
    alerts = write_alerts_csv(tmp_path)
    labels = write_labels_csv(tmp_path, [(1, 1, "adjudicator")])
    result = runner.invoke(main, ["eval", "fpr", "--export", str(alerts),
                                  "--labels", str(labels)])
    assert result.exit_code != 0
    assert "lack labels" in result.stderr
    assert "2, 3, 4" in result.stderr


def test_fpr_foothold_autolabels(tmp_path, runner):
    alerts = write_alerts_csv(tmp_path)
    labels = write_labels_csv(tmp_path, [(1, 1, "adjudicator"), (4, 4, "adjudicator")])
    # 10.0.3.40 sourced alert 3 counts as attack traffic; alert 2 stays bare
    result = runner.invoke(main, ["eval", "fpr", "--export", str(alerts),
                                  "--labels", str(labels),
                                  "--foothold", "10.0.3.40", "--format", "json"])
    assert result.exit_code != 0           # alert 2 still unlabeled
    labels = write_labels_csv(tmp_path, [
        (1, 1, "adjudicator"), (2, 2, "adjudicator"), (4, 4, "adjudicator"),
    ])
    result = runner.invoke(main, ["eval", "fpr", "--export", str(alerts),
                                  "--labels", str(labels),
                                  "--foothold", "10.0.3.40", "--format", "json"])
    assert result.exit_code == 0, result.output
    doc = json.loads(result.stdout)
    assert doc["total"] == 4
    assert doc["histogram"]["4"] == 2


def test_fpr_reference_flag_prints_to_stderr(tmp_path, runner):
    alerts = write_alerts_csv(tmp_path)
    labels = write_labels_csv(tmp_path, [
        (1, 1, "adjudicator"), (2, 2, "adjudicator"), (3, 5, "adjudicator"), (4, 4, "adjudicator"),
    ])
    result = runner.invoke(main, ["eval", "fpr", "--export", str(alerts),
                                  "--labels", str(labels), "--show-reference"])
    assert result.exit_code == 0, result.output
    assert "wazuh-default" in result.stderr
    assert "94.79" in result.stderr
    assert "94.79" not in result.stdout


# -- eval coverage ----------------------------------------------------------


def test_coverage_defaults_to_shipped_matrix(runner):
    result = runner.invoke(main, ["eval", "coverage", "--format", "json"])
    assert result.exit_code == 0, result.output
    doc = json.loads(result.stdout)
    assert doc["technique_count"] == 32
    assert doc["undetected_count"] == 11
    assert len(doc["per_config"]) == 7
    assert doc["per_config"]["wazuh-default"] == "0.500000"

    csv_result = runner.invoke(main, ["eval", "coverage"])
    assert csv_result.exit_code == 0
    assert csv_result.stdout.splitlines()[0] == "config,coverage,detected,technique_count"


def test_coverage_rejects_broken_matrix(tmp_path, runner):
    bad = tmp_path / "matrix.csv"
    bad.write_text("technique_id,config,detected,severity,precise\n"
                   "T1,a,yes,High,yes\n")
    # a second config never appears for T1 -> incomplete grid is fine;
    # duplicate cells are not
    bad.write_text("technique_id,config,detected,severity,precise\n"
                   "T1,a,yes,High,yes\nT1,a,no,,no\n")
    result = runner.invoke(main, ["eval", "coverage", "--matrix", str(bad)])
    assert result.exit_code != 0


# -- eval attck -------------------------------------------------------------


def test_attck_defaults_to_shipped_table(runner):
    result = runner.invoke(main, ["eval", "attck", "--format", "json"])
    assert result.exit_code == 0, result.output
    doc = json.loads(result.stdout)
    assert doc["applicable"] == 28
    assert doc["writeup_covered"] == 19


def test_attck_rejects_small_corpus_bound(runner):
    result = runner.invoke(main, ["eval", "attck", "--max-writeups", "9"])
    assert result.exit_code != 0
    assert "exceeds" in result.stderr


# -- serve ------------------------------------------------------------------


def test_serve_reports_config_errors(tmp_path, runner):
    bad = tmp_path / "bad.yaml"
    bad.write_text("listen: nonsense\n")
    result = runner.invoke(main, ["serve", "--config", str(bad)])
    assert result.exit_code != 0
    assert "configuration error" in result.stderr


# -- tail and label against a live service ----------------------------------


def test_tail_once_posts_file_lines(tmp_path, runner):
    feed = tmp_path / "feed.ndjson"
    feed.write_text(wazuh_body() + "\n\n" + wazuh_body(level=3, src="10.0.4.31")
                    + "\n" + "{broken\n")
    with live_service(tmp_path) as (engine, client):
        result = runner.invoke(main, [
            "tail", "--file", str(feed), "--url", str(client.base_url),
            "--connector", "wazuh", "--from-start", "--once",
        ])
        assert result.exit_code == 0, result.output
        assert "sent 3 lines, 2 accepted" in result.stderr
        assert engine.log.max_seq == 2


def test_label_command_round_trip(tmp_path, runner):
    with live_service(tmp_path) as (engine, client):
        client.post("/ingest/wazuh", content=wazuh_body())
        result = runner.invoke(main, [
            "label", "--url", str(client.base_url),
            "--alert-id", "1", "--confidence", "5", "--note", "confirmed attack",
        ])
        assert result.exit_code == 0, result.output
        assert json.loads(result.stdout)["seq"] == 2

        missing = runner.invoke(main, [
            "label", "--url", str(client.base_url),
            "--alert-id", "7", "--confidence", "5",
        ])
        assert missing.exit_code != 0
        assert "HTTP 404" in missing.stderr
