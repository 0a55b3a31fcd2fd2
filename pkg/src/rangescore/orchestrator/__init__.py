"""Reset lifecycle against a fixed template pool, plus credential randomization."""

from rangescore.orchestrator.credentials import (
    CredentialEntry,
    CredentialSet,
    EmptyRoster,
    Roster,
    RosterEntry,
    RosterError,
    credential_set_json,
    nt_hash,
    randomize_credentials,
)
from rangescore.orchestrator.pool import (
    EnvironmentTemplate,
    PoolError,
    PoolExhausted,
    TemplatePool,
    TemplateStatus,
    default_pool,
)

__all__ = [
    "CredentialEntry",
    "CredentialSet",
    "EmptyRoster",
    "EnvironmentTemplate",
    "PoolError",
    "PoolExhausted",
    "Roster",
    "RosterEntry",
    "RosterError",
    "TemplatePool",
    "TemplateStatus",
    "credential_set_json",
    "default_pool",
    "nt_hash",
    "randomize_credentials",
]
