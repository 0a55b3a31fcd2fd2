"""Fixed pool of preconfigured environment templates.

The pool never grows or shrinks after provisioning; a reset swaps the team
onto an Available template and the old one is reclaimed once the external
provisioner acknowledges. The pool itself is dumb state: choosing a template
happens once at command time and is recorded in the event log, replay only
re-applies recorded assignments. Callers serialize mutations (the engine
holds its log lock); there is no locking here.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from typing import Iterable


class TemplateStatus(str, Enum):
    AVAILABLE = "Available"
    ASSIGNED = "Assigned"


class PoolError(Exception):
    """Pool state transition that a well-formed event log never produces."""


class PoolExhausted(PoolError):
    """No Available template; the reset stays valid and the request queues."""


@dataclass(frozen=True, slots=True)
class EnvironmentTemplate:
    """One prebuilt environment. hosts map roles to address patterns in which
    `{team}` is the team octet, rendered at assignment time."""

    template_id: str
    status: TemplateStatus = TemplateStatus.AVAILABLE
    assigned_team: int | None = None
    hosts: tuple[tuple[str, str], ...] = ()

    def hosts_for(self, team: int) -> tuple[tuple[str, str], ...]:
        return tuple((role, pattern.format(team=team)) for role, pattern in self.hosts)


DEFAULT_HOST_ROLES = (
    ("gateway", "10.0.{team}.1"),
    ("dc", "10.0.{team}.10"),
    ("workstation", "10.0.{team}.11"),
    ("fileserver", "10.0.{team}.12"),
    ("historian", "10.0.{team}.20"),
    ("plc", "10.0.{team}.21"),
)


class TemplatePool:
    """Insertion-ordered template registry with deterministic allocation."""

    def __init__(self, templates: Iterable[EnvironmentTemplate]):
        self._templates: dict[str, EnvironmentTemplate] = {}
        for t in templates:
            if t.template_id in self._templates:
                raise PoolError(f"duplicate template id {t.template_id!r}")
            self._templates[t.template_id] = t
        if not self._templates:
            raise PoolError("pool must hold at least one template")

    def __len__(self) -> int:
        return len(self._templates)

    def get(self, template_id: str) -> EnvironmentTemplate:
        try:
            return self._templates[template_id]
        except KeyError:
            raise PoolError(f"unknown template {template_id!r}") from None

    def templates(self) -> list[EnvironmentTemplate]:
        return list(self._templates.values())

    def available(self) -> list[EnvironmentTemplate]:
        return [t for t in self._templates.values()
                if t.status is TemplateStatus.AVAILABLE]

    def peek_available(self) -> str | None:
        """First Available template id without assigning it, or None."""
        for t in self._templates.values():
            if t.status is TemplateStatus.AVAILABLE:
                return t.template_id
        return None

    def allocate(self, team: int) -> EnvironmentTemplate:
        """Assign the first Available template (insertion order) to the team.

        Command-time only; the chosen id must be recorded so replay can use
        assign() with the recorded fact instead of re-choosing.
        """
        for t in self._templates.values():
            if t.status is TemplateStatus.AVAILABLE:
                return self.assign(t.template_id, team)
        raise PoolExhausted(f"no Available template for team {team}")

    def assign(self, template_id: str, team: int) -> EnvironmentTemplate:
        t = self.get(template_id)
        if t.status is not TemplateStatus.AVAILABLE:
            raise PoolError(
                f"template {template_id!r} is {t.status.value}, cannot assign to team {team}"
            )
        assigned = replace(t, status=TemplateStatus.ASSIGNED, assigned_team=team)
        self._templates[template_id] = assigned
        return assigned

    def release(self, template_id: str) -> EnvironmentTemplate:
        t = self.get(template_id)
        if t.status is not TemplateStatus.ASSIGNED:
            raise PoolError(f"template {template_id!r} is not Assigned, cannot release")
        freed = replace(t, status=TemplateStatus.AVAILABLE, assigned_team=None)
        self._templates[template_id] = freed
        return freed

    def check_invariants(self) -> None:
        for t in self._templates.values():
            if t.status is TemplateStatus.AVAILABLE and t.assigned_team is not None:
                raise PoolError(f"Available template {t.template_id!r} holds a team")
            if t.status is TemplateStatus.ASSIGNED and t.assigned_team is None:
                raise PoolError(f"Assigned template {t.template_id!r} lacks a team")


def default_pool(size: int = 10) -> TemplatePool:
    return TemplatePool(
        EnvironmentTemplate(template_id=f"tpl-{i:02d}", hosts=DEFAULT_HOST_ROLES)
        for i in range(1, size + 1)
    )
