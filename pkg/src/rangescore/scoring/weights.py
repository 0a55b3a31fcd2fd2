"""Per-IDS, per-severity penalty weights.

All weight arithmetic is exact decimal: a 0.05-weighted low-severity flood
must sum to exactly the same penalty on every replay, so binary floating
point is banned from the scoring path.
"""

from __future__ import annotations

from decimal import Decimal, InvalidOperation
from typing import Mapping

from rangescore.ingest.records import SeverityClass


class WeightTableError(ValueError):
    """Weight configuration violates the table invariants."""


def as_weight(value: object) -> Decimal:
    """Coerce a config value to a non-negative Decimal without float drift."""
    try:
        weight = Decimal(str(value))
    except InvalidOperation:
        raise WeightTableError(f"unusable weight value {value!r}") from None
    if weight < 0:
        raise WeightTableError(f"negative weight {weight}")
    return weight


class WeightTable:
    """Weights for every (ids, severity class) pair.

    Invariants, checked at construction: every configured ids has all four
    classes, and within each ids the weights are monotone non-increasing
    from Critical down to Low.
    """

    def __init__(self, weights: Mapping[str, Mapping[SeverityClass, object]]):
        table: dict[str, dict[SeverityClass, Decimal]] = {}
        for ids, per_class in weights.items():
            row: dict[SeverityClass, Decimal] = {}
            for severity in SeverityClass.ordered():
                if severity not in per_class:
                    raise WeightTableError(f"{ids}: missing weight for {severity.value}")
                row[severity] = as_weight(per_class[severity])
            ordered = [row[s] for s in SeverityClass.ordered()]
            for higher, lower, names in zip(ordered, ordered[1:], zip(SeverityClass.ordered(), SeverityClass.ordered()[1:])):
                if higher < lower:
                    raise WeightTableError(
                        f"{ids}: weight for {names[0].value} ({higher}) is below {names[1].value} ({lower})"
                    )
            table[ids] = row
        self._table = table

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(sorted(self._table))

    def covers(self, ids: str) -> bool:
        return ids in self._table

    def weight(self, ids: str, severity: SeverityClass) -> Decimal:
        try:
            return self._table[ids][severity]
        except KeyError:
            raise WeightTableError(f"no weight configured for ({ids}, {severity.value})") from None

    def as_dict(self) -> dict[str, dict[str, str]]:
        return {
            ids: {s.value: str(w) for s, w in row.items()}
            for ids, row in sorted(self._table.items())
        }


def default_weight_table() -> WeightTable:
    """Shipped defaults for the seven-configuration deployment.

    Wazuh alerts weigh {50, 3, 1, 0.05} and Suricata {500, 30, 20, 10} for
    {Critical, High, Medium, Low}; both tunings of a tool share its table.
    The commercial sensors carry documented placeholders pending operator
    calibration.
    """
    wazuh = {"Critical": "50", "High": "3", "Medium": "1", "Low": "0.05"}
    suricata = {"Critical": "500", "High": "30", "Medium": "20", "Low": "10"}
    edr = {"Critical": "200", "High": "40", "Medium": "10", "Low": "1"}
    nids = {"Critical": "300", "High": "50", "Medium": "15", "Low": "5"}
    raw = {
        "wazuh-default": wazuh,
        "wazuh-custom": wazuh,
        "suricata-et": suricata,
        "suricata-custom": suricata,
        "edr-default": edr,
        "edr-idp": edr,
        "nids-commercial": nids,
    }
    return WeightTable({
        ids: {SeverityClass.from_name(name): value for name, value in row.items()}
        for ids, row in raw.items()
    })
