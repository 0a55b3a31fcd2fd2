"""Post-event analytics over event-store exports: false-positive ratio,
detection coverage, and technique-table summaries."""

from rangescore.evaluation.attck import AttckSummary, TechniqueRow, attck_summary, load_technique_table
from rangescore.evaluation.coverage import CoverageReport, DetectionMatrix, detection_coverage
from rangescore.evaluation.export import UnsupportedFormat, export_report
from rangescore.evaluation.fpr import FprReport, UnlabeledAlerts, fpr
from rangescore.evaluation.labels import (
    AlertLabel,
    AUTO_LABELER,
    DEFAULT_ADJUDICATOR,
    LabelSet,
    foothold_auto_labels,
)

__all__ = [
    "AUTO_LABELER",
    "AlertLabel",
    "AttckSummary",
    "CoverageReport",
    "DEFAULT_ADJUDICATOR",
    "DetectionMatrix",
    "FprReport",
    "LabelSet",
    "TechniqueRow",
    "UnlabeledAlerts",
    "UnsupportedFormat",
    "attck_summary",
    "detection_coverage",
    "export_report",
    "foothold_auto_labels",
    "fpr",
    "load_technique_table",
]
