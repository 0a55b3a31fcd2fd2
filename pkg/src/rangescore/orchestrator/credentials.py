"""Deterministic credential randomization for freshly provisioned instances.

Every replacement instance gets new account names, passwords, and password
hashes while the attack path stays fixed: roster entries marked constant keep
their names (the objective account must stay findable), everything else is
re-rolled. Generation is a pure function of (seed, template, roster), so the
provisioner and the audit trail can reproduce any set from its seed.
"""

from __future__ import annotations

import hashlib
import json
import random
import string
from dataclasses import dataclass
from typing import Iterable, Sequence

from rangescore.orchestrator.md4 import md4_hexdigest

PASSWORD_ALPHABET = string.ascii_letters + string.digits
PASSWORD_LENGTH = 16
SUFFIX_LENGTH = 6

ROSTER_KINDS = ("account", "hostname", "constant")


class RosterError(ValueError):
    """Roster fails validation (unknown kind, duplicate role, missing value)."""


class EmptyRoster(RosterError):
    """Credential randomization requested with nothing to randomize."""


@dataclass(frozen=True, slots=True)
class RosterEntry:
    """One generatable identity.

    kind "account" and "hostname" get a randomized role-prefixed name;
    kind "constant" keeps `value` as its name verbatim. All kinds get a
    fresh password (machine accounts carry secrets too), so a constant
    account never keeps a guessable credential across resets.
    """

    role: str
    kind: str = "account"
    value: str | None = None

    def __post_init__(self) -> None:
        if self.kind not in ROSTER_KINDS:
            raise RosterError(f"unknown roster kind {self.kind!r}")
        if not self.role:
            raise RosterError("roster entry needs a role")
        if self.kind == "constant" and not self.value:
            raise RosterError(f"constant entry {self.role!r} needs a value")


@dataclass(frozen=True, slots=True)
class Roster:
    entries: tuple[RosterEntry, ...]

    def __post_init__(self) -> None:
        roles = [e.role for e in self.entries]
        dupes = {r for r in roles if roles.count(r) > 1}
        if dupes:
            raise RosterError(f"duplicate roster roles: {sorted(dupes)}")

    @classmethod
    def of(cls, entries: Iterable[RosterEntry]) -> "Roster":
        return cls(entries=tuple(entries))

    def constants(self) -> frozenset[str]:
        return frozenset(e.value for e in self.entries if e.kind == "constant" and e.value)


@dataclass(frozen=True, slots=True)
class CredentialEntry:
    role: str
    kind: str
    account_name: str
    password: str
    nt_hash: str


@dataclass(frozen=True, slots=True)
class CredentialSet:
    template_id: str
    seed: str
    entries: tuple[CredentialEntry, ...]

    def seed_fingerprint(self) -> str:
        """Short digest safe to put in the event log; the seed itself never is."""
        return hashlib.sha256(self.seed.encode()).hexdigest()[:16]


def nt_hash(password: str) -> str:
    """NT password hash: MD4 over the UTF-16LE encoding, lowercase hex."""
    return md4_hexdigest(password.encode("utf-16-le"))


def _name(rng: random.Random, role: str) -> str:
    suffix = "".join(rng.choice(string.ascii_lowercase) for _ in range(SUFFIX_LENGTH))
    return f"{role}-{suffix}"


def _password(rng: random.Random) -> str:
    return "".join(rng.choice(PASSWORD_ALPHABET) for _ in range(PASSWORD_LENGTH))


def randomize_credentials(template_id: str, seed: str, roster: Roster) -> CredentialSet:
    """Generate the credential set for one instance.

    Deterministic: the RNG is seeded from (seed, template_id) and consumed
    in roster order, so the same inputs rebuild the identical set and two
    templates under one seed still differ.
    """
    if not roster.entries:
        raise EmptyRoster("roster has no entries")
    rng = random.Random(f"{seed}:{template_id}")
    entries = []
    for spec in roster.entries:
        if spec.kind == "constant":
            name = spec.value or spec.role
        else:
            name = _name(rng, spec.role)
        password = _password(rng)
        entries.append(CredentialEntry(
            role=spec.role,
            kind=spec.kind,
            account_name=name,
            password=password,
            nt_hash=nt_hash(password),
        ))
    return CredentialSet(template_id=template_id, seed=seed, entries=tuple(entries))


def credential_set_json(creds: CredentialSet) -> str:
    """Provisioner handoff document; schema documented in the README."""
    doc = {
        "template_id": creds.template_id,
        "seed_fingerprint": creds.seed_fingerprint(),
        "entries": [
            {
                "role": e.role,
                "kind": e.kind,
                "account_name": e.account_name,
                "password": e.password,
                "nt_hash": e.nt_hash,
            }
            for e in creds.entries
        ],
    }
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"
