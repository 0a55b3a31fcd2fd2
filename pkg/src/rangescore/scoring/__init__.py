"""Per-team penalty scoring: weighted alert counts, resets, validation freezing, ranking."""

from rangescore.scoring.state import (
    Cup,
    DuplicateValidation,
    EmptyWriteup,
    EpochMismatch,
    Locked,
    MultiplierSchedule,
    Objective,
    TeamScoreState,
    TieBreakMetrics,
    Validation,
    apply_alert,
    apply_reset,
    effective_penalty,
    freeze_validation,
    new_team_state,
    penalty,
    tiebreak_metrics,
)
from rangescore.scoring.leaderboard import leaderboard_csv, rank
from rangescore.scoring.weights import WeightTable, WeightTableError, default_weight_table

__all__ = [
    "Cup",
    "DuplicateValidation",
    "EmptyWriteup",
    "EpochMismatch",
    "Locked",
    "MultiplierSchedule",
    "Objective",
    "TeamScoreState",
    "TieBreakMetrics",
    "Validation",
    "WeightTable",
    "WeightTableError",
    "apply_alert",
    "apply_reset",
    "default_weight_table",
    "effective_penalty",
    "freeze_validation",
    "leaderboard_csv",
    "new_team_state",
    "penalty",
    "rank",
    "tiebreak_metrics",
]
