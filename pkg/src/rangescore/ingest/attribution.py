"""Team attribution from the range addressing scheme.

Every parallel environment lives in one /16 with the team number encoded in
the third octet (10.0.X.* -> team X). Both IPs of an alert must agree on the
team when both fall inside team subnets; disagreement means the isolation
assumption is broken and has to alarm, never be guessed around. Alerts with
no attributable evidence keep team=None and are routed to the unattributed
queue for operator triage.
"""

from __future__ import annotations

import ipaddress
import re
from dataclasses import dataclass, field

from rangescore.ingest.parsers import IngestError
from rangescore.ingest.records import NormalizedAlert


class AmbiguousAttribution(IngestError):
    """src and dst carry conflicting team evidence; isolation violation."""


@dataclass(frozen=True)
class AddressingScheme:
    """Range prefix plus the third-octet -> team mapping.

    `fallback_patterns` maps ids -> regex applied to the raw record when an
    alert has no usable in-range IP; group 1 must capture the team number
    (e.g. a Wazuh agent named "team7-jump").
    """

    prefix: str = "10.0.0.0/16"
    team_octet: int = 3
    min_team: int = 1
    max_team: int = 12
    fallback_patterns: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        network = ipaddress.ip_network(self.prefix, strict=True)
        object.__setattr__(self, "_network", network)
        if not 1 <= self.team_octet <= 4:
            raise ValueError(f"team_octet must be 1..4, got {self.team_octet}")
        compiled = {ids: re.compile(pat) for ids, pat in self.fallback_patterns.items()}
        object.__setattr__(self, "_compiled", compiled)

    def team_of(self, ip: str | None) -> int | None:
        """Team number an address encodes, or None when it is no evidence."""
        if not ip:
            return None
        try:
            addr = ipaddress.ip_address(ip)
        except ValueError:
            return None
        if addr not in self._network:  # type: ignore[attr-defined]
            return None
        octet = int(str(addr).split(".")[self.team_octet - 1])
        if not self.min_team <= octet <= self.max_team:
            return None  # backend/orchestration subnet, not a team
        return octet

    def contains(self, ip: str | None) -> bool:
        """Whether the address lies inside the range prefix at all."""
        if not ip:
            return False
        try:
            return ipaddress.ip_address(ip) in self._network  # type: ignore[attr-defined]
        except ValueError:
            return False

    def team_from_raw(self, ids: str, raw: bytes | None) -> int | None:
        pattern = self._compiled.get(ids)  # type: ignore[attr-defined]
        if pattern is None or raw is None:
            return None
        match = pattern.search(raw.decode("utf-8", errors="replace"))
        if not match:
            return None
        team = int(match.group(1))
        if not self.min_team <= team <= self.max_team:
            return None
        return team


def attribute_team(alert: NormalizedAlert, scheme: AddressingScheme,
                   raw: bytes | None = None) -> NormalizedAlert:
    """Attach the team an alert belongs to, or leave it unattributed.

    dst is preferred when only one side resolves; when both resolve they
    must agree or AmbiguousAttribution is raised. The per-ids raw fallback
    runs only when neither IP is team evidence.
    """
    src_team = scheme.team_of(alert.src_ip)
    dst_team = scheme.team_of(alert.dst_ip)
    if src_team is not None and dst_team is not None and src_team != dst_team:
        raise AmbiguousAttribution(
            f"src {alert.src_ip} -> team {src_team} but dst {alert.dst_ip} -> team {dst_team}"
        )
    team = dst_team if dst_team is not None else src_team
    if team is None:
        team = scheme.team_from_raw(alert.ids, raw)
    return alert.with_team(team)
