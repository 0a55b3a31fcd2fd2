"""Credential randomization (MD4/NT hashes, determinism) and template pool."""

from __future__ import annotations

import string

import pytest
from hypothesis import given, strategies as st

from rangescore.orchestrator.credentials import (PASSWORD_ALPHABET, PASSWORD_LENGTH,
                                                 CredentialSet, EmptyRoster,
                                                 Roster, RosterEntry, RosterError,
                                                 credential_set_json, nt_hash,
                                                 randomize_credentials)
from rangescore.orchestrator.md4 import md4_hexdigest
from rangescore.orchestrator.pool import (EnvironmentTemplate, PoolExhausted,
                                          TemplatePool, TemplateStatus, default_pool)

# RFC 1320 appendix test vectors
MD4_VECTORS = [
    (b"", "31d6cfe0d16ae931b73c59d7e0c089c0"),
    (b"a", "bde52cb31de33e46245e05fbdbd6fb24"),
    (b"abc", "a448017aaf21d8525fc10ae87aa6729d"),
    (b"message digest", "d9130a8164549fe818874806e1c7014b"),
    (b"abcdefghijklmnopqrstuvwxyz", "d79e1c308aa5bbcdeea8ed63df412da9"),
    (b"ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789",
     "043f8582f241db351ce627e153e7f0e4"),
    (b"1234567890" * 8, "e33b4ddc9c38f2199c3e7b164fcc0536"),
]


@pytest.mark.parametrize("data,digest", MD4_VECTORS)
def test_md4_rfc_vectors(data, digest):
    assert md4_hexdigest(data) == digest


def test_md4_block_boundaries():
    # lengths that straddle the 64-byte block and the 56-byte padding cut
    for n in (55, 56, 57, 63, 64, 65, 119, 120, 127, 128):
        digest = md4_hexdigest(b"x" * n)
        assert len(digest) == 32
        assert digest == md4_hexdigest(b"x" * n)  # stable


def test_nt_hash_is_md4_of_utf16le():
    assert nt_hash("password") == "8846f7eaee8fb117ad06bdd830b7586c"
    assert nt_hash("") == "31d6cfe0d16ae931b73c59d7e0c089c0"
    # non-ASCII round-trips through UTF-16LE
    assert nt_hash("pässword") == md4_hexdigest("pässword".encode("utf-16-le"))


def _roster() -> Roster:
    return Roster.of([
        RosterEntry(role="admin"),
        RosterEntry(role="operator"),
        RosterEntry(role="ws", kind="hostname"),
        RosterEntry(role="objective-user", kind="constant", value="plumber"),
    ])


def test_randomize_credentials_is_deterministic_per_seed_and_template():
    a = randomize_credentials("tpl-03", "seed-1", _roster())
    b = randomize_credentials("tpl-03", "seed-1", _roster())
    assert a == b
    # a different template under the same seed gets different material
    c = randomize_credentials("tpl-04", "seed-1", _roster())
    assert c.entries != a.entries
    # a different seed changes everything
    d = randomize_credentials("tpl-03", "seed-2", _roster())
    assert d.entries != a.entries


def test_credential_material_shape():
    creds = randomize_credentials("tpl-01", "seed", _roster())
    assert isinstance(creds, CredentialSet)
    assert len(creds.entries) == 4
    by_role = {e.role: e for e in creds.entries}

    for entry in creds.entries:
        assert len(entry.password) == PASSWORD_LENGTH
        assert set(entry.password) <= set(PASSWORD_ALPHABET)
        assert entry.nt_hash == nt_hash(entry.password)
        assert len(entry.nt_hash) == 32
        assert set(entry.nt_hash) <= set(string.hexdigits.lower())

    # account and hostname names are role plus a random 6-char suffix
    for role in ("admin", "operator", "ws"):
        name = by_role[role].account_name
        assert name.startswith(role + "-")
        suffix = name[len(role) + 1:]
        assert len(suffix) == 6 and suffix.islower()

    # the objective constant keeps its exact name but still gets a password
    assert by_role["objective-user"].account_name == "plumber"
    assert by_role["objective-user"].password


def test_empty_roster_is_refused():
    with pytest.raises(EmptyRoster):
        randomize_credentials("tpl-01", "seed", Roster.of([]))


def test_roster_validation():
    with pytest.raises(RosterError):
        RosterEntry(role="x", kind="wheelbarrow")
    with pytest.raises(RosterError):
        RosterEntry(role="x", kind="constant")          # constant needs a value
    with pytest.raises(RosterError):
        Roster.of([RosterEntry(role="a"), RosterEntry(role="a")])  # duplicate role


def test_credential_json_never_contains_the_seed():
    creds = randomize_credentials("tpl-02", "super-secret-seed", _roster())
    doc = credential_set_json(creds)
    assert "super-secret-seed" not in doc
    assert creds.seed_fingerprint() in doc
    assert "tpl-02" in doc
    for entry in creds.entries:
        assert entry.password in doc
        assert entry.nt_hash in doc


@given(st.text(alphabet=string.printable, max_size=40))
def test_nt_hash_matches_reference_construction(password):
    assert nt_hash(password) == md4_hexdigest(password.encode("utf-16-le"))


# --- template pool ---

def test_default_pool_has_ten_available_templates():
    pool = default_pool()
    assert len(pool.templates()) == 10
    assert [t.template_id for t in pool.templates()] == [
        f"tpl-{i:02d}" for i in range(1, 11)]
    assert all(t.status is TemplateStatus.AVAILABLE for t in pool.templates())


def test_allocate_assign_release_cycle():
    pool = default_pool(size=2)
    first = pool.allocate(team=3)
    assert first.status is TemplateStatus.ASSIGNED and first.assigned_team == 3
    second = pool.allocate(team=5)
    assert second.template_id != first.template_id

    with pytest.raises(PoolExhausted):
        pool.allocate(team=7)

    pool.release(first.template_id)
    again = pool.allocate(team=7)
    assert again.template_id == first.template_id
    pool.check_invariants()


def test_peek_does_not_mutate():
    pool = default_pool(size=1)
    assert pool.peek_available() is not None
    assert pool.peek_available() is not None
    pool.allocate(team=1)
    assert pool.peek_available() is None


def test_assign_requires_available_template():
    pool = default_pool(size=2)
    pool.assign("tpl-01", team=4)
    with pytest.raises(Exception):
        pool.assign("tpl-01", team=5)    # already assigned
    with pytest.raises(Exception):
        pool.assign("tpl-99", team=5)    # unknown id


def test_hosts_for_expands_team_octet():
    tpl = default_pool().get("tpl-01")
    hosts = dict(tpl.hosts_for(7))
    assert "10.0.7.10" in hosts.values()
    # every produced address sits inside the team's /24
    assert all(v.startswith("10.0.7.") for v in hosts.values())


def test_pool_invariants_hold_under_random_churn():
    import random
    rng = random.Random("pool-churn")
    pool = default_pool()
    held: list[str] = []
    for _ in range(500):
        if held and rng.random() < 0.5:
            pool.release(held.pop(rng.randrange(len(held))))
        else:
            try:
                tpl = pool.allocate(team=rng.randint(1, 12))
                held.append(tpl.template_id)
            except PoolExhausted:
                assert len(held) == 10
        pool.check_invariants()
