"""Penalty arithmetic, multiplier ladder, epochs, validation freezing."""

from __future__ import annotations

from datetime import timedelta
from decimal import Decimal

import pytest
from hypothesis import given, strategies as st

from rangescore.ingest.records import SeverityClass
from rangescore.scoring.state import (DuplicateValidation, EmptyWriteup,
                                      EpochMismatch, Locked, MultiplierSchedule,
                                      Objective, apply_alert, apply_reset,
                                      effective_penalty, freeze_validation,
                                      new_team_state, penalty)
from rangescore.scoring.weights import WeightTable, default_weight_table

from conftest import make_alert, ts

C, H, M, L = (SeverityClass.CRITICAL, SeverityClass.HIGH,
              SeverityClass.MEDIUM, SeverityClass.LOW)


def feed(state, spec: list[tuple[str, SeverityClass, int]], start_id: int = 1):
    """Apply count vectors of (ids, class, n) alerts; returns new state."""
    aid = start_id
    for ids, cls, n in spec:
        for _ in range(n):
            state = apply_alert(state, make_alert(aid, ids=ids, severity=cls,
                                                  team=state.team))
            aid += 1
    return state


# --- the frozen penalty oracle: 64 + 60 = 124 ---

def test_reference_count_vector_is_exactly_124():
    state = new_team_state(2)
    state = feed(state, [
        ("wazuh-default", C, 1), ("wazuh-default", H, 2),
        ("wazuh-default", M, 3), ("wazuh-default", L, 100),
        ("suricata-et", C, 0), ("suricata-et", H, 1),
        ("suricata-et", M, 1), ("suricata-et", L, 1),
    ])
    weights = default_weight_table()
    total = penalty(state, weights)
    assert total == Decimal("124")
    assert str(total) == "124.00"  # 1*50 + 2*3 + 3*1 + 100*0.05 keeps cents

    wazuh_only = new_team_state(2)
    wazuh_only = feed(wazuh_only, [("wazuh-default", C, 1), ("wazuh-default", H, 2),
                                   ("wazuh-default", M, 3), ("wazuh-default", L, 100)])
    assert penalty(wazuh_only, weights) == Decimal("64")

    suricata_only = new_team_state(2)
    suricata_only = feed(suricata_only, [("suricata-et", H, 1), ("suricata-et", M, 1),
                                         ("suricata-et", L, 1)])
    assert penalty(suricata_only, weights) == Decimal("60")


def test_low_weight_never_floats():
    # 0.05 is not representable in binary; 3 Lows must be exactly 0.15
    state = feed(new_team_state(1), [("wazuh-default", L, 3)])
    assert penalty(state, default_weight_table()) == Decimal("0.15")
    state = feed(new_team_state(1), [("wazuh-default", L, 10)])
    assert penalty(state, default_weight_table()) == Decimal("0.50")


def test_penalty_sums_across_sensors_linearly():
    w = default_weight_table()
    a = feed(new_team_state(1), [("wazuh-default", H, 5)])
    b = feed(new_team_state(1), [("suricata-et", L, 7)])
    both = feed(new_team_state(1), [("wazuh-default", H, 5), ("suricata-et", L, 7)])
    assert penalty(both, w) == penalty(a, w) + penalty(b, w)


@given(st.lists(st.tuples(
    st.sampled_from(["wazuh-default", "suricata-et", "edr-default", "nids-commercial"]),
    st.sampled_from([C, H, M, L]),
    st.integers(min_value=0, max_value=30)), max_size=12))
def test_penalty_matches_decimal_oracle(spec):
    w = default_weight_table()
    state = feed(new_team_state(3), spec)
    expected = sum((Decimal(n) * w.weight(ids, cls) for ids, cls, n in spec),
                   Decimal("0"))
    assert penalty(state, w) == expected


# --- multiplier ladder ---

def test_multiplier_ladder_first_reset_free():
    sched = MultiplierSchedule()
    values = [sched.value(rc) for rc in range(6)]
    assert values == [Decimal(1), Decimal(1), Decimal("1.5"), Decimal("2.25"),
                      Decimal("3.375"), Decimal("5.0625")]


def test_multiplier_schedule_configurable():
    sched = MultiplierSchedule(free_resets=2, factor=Decimal(2))
    assert [sched.value(rc) for rc in range(5)] == [
        Decimal(1), Decimal(1), Decimal(1), Decimal(2), Decimal(4)]


def test_effective_penalty_is_penalty_times_multiplier():
    w = default_weight_table()
    state = feed(new_team_state(4), [("wazuh-default", C, 2)])  # penalty 100
    state, _ = _reset(state, at=5)
    state, _ = _reset(state, at=25)   # second reset: multiplier 1.5
    state = feed(state, [("wazuh-default", C, 2)], start_id=1001)
    assert penalty(state, w) == Decimal("100")
    assert effective_penalty(state, w) == Decimal("150.0")


def _reset(state, at: float, schedule: MultiplierSchedule | None = None):
    return apply_reset(state, now=ts(at), schedule=schedule or MultiplierSchedule(),
                       epoch_start_seq=state.epoch_start_seq + 500), None


# --- reset and epoch semantics ---

def test_reset_zeroes_penalty_and_advances_epoch():
    w = default_weight_table()
    state = feed(new_team_state(2), [("wazuh-default", C, 3)])
    assert penalty(state, w) > 0
    state = apply_reset(state, now=ts(10), schedule=MultiplierSchedule(),
                        epoch_start_seq=50)
    assert penalty(state, w) == Decimal(0)
    assert state.epoch == 1
    assert state.reset_count == 1
    assert state.multiplier == Decimal(1)
    assert state.lockout_until == ts(10) + timedelta(minutes=15)
    assert state.epoch_start_seq == 50
    assert state.epoch_dst_hosts == frozenset()
    assert state.epoch_triples == frozenset()


def test_lockout_blocks_second_reset_for_exactly_15_minutes():
    state = apply_reset(new_team_state(2), now=ts(0), schedule=MultiplierSchedule(),
                        epoch_start_seq=1)
    with pytest.raises(Locked):
        apply_reset(state, now=ts(14.999), schedule=MultiplierSchedule(),
                    epoch_start_seq=2)
    after = apply_reset(state, now=ts(15), schedule=MultiplierSchedule(),
                        epoch_start_seq=2)
    assert after.reset_count == 2
    assert after.multiplier == Decimal("1.5")


def test_stale_alert_from_previous_epoch_rejected():
    state = apply_reset(new_team_state(2), now=ts(0), schedule=MultiplierSchedule(),
                        epoch_start_seq=100)
    with pytest.raises(EpochMismatch):
        apply_alert(state, make_alert(99))
    with pytest.raises(EpochMismatch):
        apply_alert(state, make_alert(100))  # the reset record itself
    ok = apply_alert(state, make_alert(101))
    assert sum(ok.counts.values()) == 1


def test_alert_for_other_team_rejected():
    with pytest.raises(ValueError):
        apply_alert(new_team_state(2), make_alert(1, team=3))


# --- validation freezing ---

def test_freeze_validation_snapshots_current_penalty():
    w = default_weight_table()
    state = feed(new_team_state(2), [("wazuh-default", C, 1), ("wazuh-default", L, 100)])
    state, val = freeze_validation(state, Objective.IT_FLAG, "US-" + "x" * 40, w, now=ts(30))
    assert val.frozen_penalty == Decimal("55.00")
    assert val.team == 2 and val.epoch == 0
    assert val.objective is Objective.IT_FLAG

    # later alerts do not disturb the frozen value
    state = feed(state, [("wazuh-default", C, 5)], start_id=500)
    assert state.validations[0].frozen_penalty == Decimal("55.00")


def test_empty_writeup_refused():
    state = new_team_state(2)
    for writeup in ("", "   ", "\n\t"):
        with pytest.raises(EmptyWriteup):
            freeze_validation(state, Objective.IT_FLAG, writeup,
                              default_weight_table(), now=ts(1))


def test_duplicate_validation_same_objective_same_epoch_refused():
    w = default_weight_table()
    state, _ = freeze_validation(new_team_state(2), Objective.IT_FLAG, "report", w, now=ts(1))
    with pytest.raises(DuplicateValidation):
        freeze_validation(state, Objective.IT_FLAG, "again", w, now=ts(2))
    # other objective in the same epoch is fine
    state, _ = freeze_validation(state, Objective.OT_FLAG, "ot report", w, now=ts(3))
    # same objective in the next epoch is fine again
    state = apply_reset(state, now=ts(5), schedule=MultiplierSchedule(), epoch_start_seq=10)
    state, val = freeze_validation(state, Objective.IT_FLAG, "fresh epoch", w, now=ts(20))
    assert val.epoch == 1
    assert len(state.validations) == 3


def test_tiebreak_metrics_follow_epoch_activity():
    from rangescore.ingest.attribution import AddressingScheme
    scheme = AddressingScheme()
    state = new_team_state(2, start_at=ts(0))
    for i, dst in enumerate(["10.0.2.11", "10.0.2.11", "10.0.2.12", "8.8.8.8"], start=1):
        state = apply_alert(state, make_alert(i, dst_ip=dst, src_ip="10.0.2.50",
                                              rule_id=f"r{i}"),
                            dst_in_range=scheme.contains(dst))
    state, val = freeze_validation(state, Objective.IT_FLAG, "w", default_weight_table(),
                                   now=ts(45))
    assert val.tiebreak.hosts_accessed == 2          # distinct in-range dst only
    assert val.tiebreak.network_footprint == 4       # distinct (src,dst,rule) triples
    assert val.tiebreak.time_to_objective == timedelta(minutes=45)
