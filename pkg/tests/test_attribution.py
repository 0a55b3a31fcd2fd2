"""Team attribution: third-octet mapping, agreement rule, raw fallback."""

from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from rangescore.ingest.attribution import (AddressingScheme, AmbiguousAttribution,
                                           attribute_team)

from conftest import make_alert

SCHEME = AddressingScheme()


@pytest.mark.parametrize("ip,team", [
    ("10.0.1.1", 1), ("10.0.2.11", 2), ("10.0.12.254", 12),
    ("10.0.0.5", None),      # octet 0 below min_team
    ("10.0.13.11", None),    # above max_team
    ("10.0.250.5", None),    # orchestration subnet
    ("10.1.2.3", None),      # outside the /16
    ("192.168.2.11", None),
    ("not-an-ip", None),
    (None, None),
    ("", None),
])
def test_team_of(ip, team):
    assert SCHEME.team_of(ip) == team


def test_contains_is_prefix_membership_only():
    assert SCHEME.contains("10.0.250.5")      # in prefix, not a team subnet
    assert SCHEME.contains("10.0.2.11")
    assert not SCHEME.contains("10.1.0.1")
    assert not SCHEME.contains(None)
    assert not SCHEME.contains("bogus")


def test_dst_preferred_then_src():
    a = attribute_team(make_alert(team=None, src_ip="10.0.3.50", dst_ip="10.0.3.11"), SCHEME)
    assert a.team == 3
    a = attribute_team(make_alert(team=None, src_ip="10.0.4.50", dst_ip="8.8.8.8"), SCHEME)
    assert a.team == 4
    a = attribute_team(make_alert(team=None, src_ip=None, dst_ip="10.0.5.20"), SCHEME)
    assert a.team == 5
    a = attribute_team(make_alert(team=None, src_ip="1.2.3.4", dst_ip="5.6.7.8"), SCHEME)
    assert a.team is None


def test_conflicting_team_evidence_alarms():
    with pytest.raises(AmbiguousAttribution):
        attribute_team(make_alert(team=None, src_ip="10.0.2.50", dst_ip="10.0.7.11"), SCHEME)


def test_backend_subnet_does_not_conflict():
    # src in 10.0.250.* is no team evidence, so dst wins without ambiguity
    a = attribute_team(make_alert(team=None, src_ip="10.0.250.5", dst_ip="10.0.6.11"), SCHEME)
    assert a.team == 6


def test_raw_fallback_used_only_without_ip_evidence():
    scheme = AddressingScheme(fallback_patterns={"edr-default": r"team[-_ ]?(\d{1,2})"})
    alert = make_alert(team=None, ids="edr-default", src_ip=None, dst_ip=None)
    got = attribute_team(alert, scheme, raw=b'{"host": "team7-jump"}')
    assert got.team == 7

    # out-of-range fallback capture is discarded
    got = attribute_team(alert, scheme, raw=b'{"host": "team44-jump"}')
    assert got.team is None

    # with IP evidence present the fallback must not run
    with_ip = make_alert(team=None, ids="edr-default", dst_ip="10.0.9.11")
    got = attribute_team(with_ip, scheme, raw=b'{"host": "team7-jump"}')
    assert got.team == 9


def test_team_octet_position_configurable():
    scheme = AddressingScheme(prefix="10.8.0.0/16", team_octet=4, max_team=9)
    assert scheme.team_of("10.8.1.3") == 3
    assert scheme.team_of("10.8.1.10") is None


def test_bad_scheme_rejected():
    with pytest.raises(ValueError):
        AddressingScheme(prefix="10.0.1.2/16")   # host bits set
    with pytest.raises(ValueError):
        AddressingScheme(team_octet=5)


@given(st.integers(min_value=0, max_value=255), st.integers(min_value=0, max_value=255))
def test_third_octet_rule_over_whole_prefix(octet, last):
    team = SCHEME.team_of(f"10.0.{octet}.{last}")
    if 1 <= octet <= 12:
        assert team == octet
    else:
        assert team is None
