"""Uniform report serialization. Identical report in, identical bytes out."""

from __future__ import annotations

import json

from rangescore.evaluation.attck import AttckSummary
from rangescore.evaluation.coverage import CoverageReport
from rangescore.evaluation.fpr import FprReport

FORMATS = ("csv", "json")

Report = FprReport | CoverageReport | AttckSummary


class UnsupportedFormat(ValueError):
    def __init__(self, fmt: object):
        super().__init__(f"unsupported format {fmt!r}; expected one of {FORMATS}")


def export_report(report: Report, fmt: str) -> str:
    """Serialize any evaluation report. Key and column order are fixed by
    the report type, so re-exporting the same report is byte-identical."""
    if not isinstance(report, (FprReport, CoverageReport, AttckSummary)):
        raise TypeError(f"not an evaluation report: {type(report).__name__}")
    fmt_norm = str(fmt).strip().lower()
    if fmt_norm == "json":
        return json.dumps(report.as_json_obj(), indent=2, sort_keys=True) + "\n"
    if fmt_norm == "csv":
        return report.as_csv()
    raise UnsupportedFormat(fmt)
