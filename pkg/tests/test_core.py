import pytest
from hypothesis import given
from hypothesis import strategies as st

from cpgames.core import (
    ADVER_GAME,
    COLLAB_GAME,
    ActionMsg,
    ConflictError,
    ControlViolationError,
    EnvState,
    GameError,
    GameSpec,
    InvalidMessageError,
    apply_adver,
    apply_all,
    apply_collab,
    apply_simultaneous,
    index_to_state,
    state_index,
)

bools3 = st.tuples(st.booleans(), st.booleans(), st.booleans())
adver_msgs = st.one_of(
    st.builds(ActionMsg, st.just("c0"), st.sampled_from("ac"), st.booleans()),
    st.builds(ActionMsg, st.just("c1"), st.just("b"), st.booleans()),
)


def test_state_index_msb_first():
    assert state_index(EnvState.of(False, True, True)) == 3
    assert state_index(EnvState.of(True, False, False)) == 4
    assert EnvState.of(False, True, True).label() == "{¬a,b,c}"


@given(st.integers(0, 7))
def test_index_roundtrip(i):
    assert state_index(index_to_state(i)) == i


def test_index_out_of_range():
    with pytest.raises(GameError):
        index_to_state(8)


def test_collab_any_agent_writes_any_var():
    s = COLLAB_GAME.initial
    s = apply_collab(s, ActionMsg("c1", "a", True))
    assert s["a"] and not s["b"]


def test_adver_control_violation():
    with pytest.raises(ControlViolationError):
        apply_adver(ADVER_GAME.initial, ActionMsg("c1", "a", True))
    with pytest.raises(ControlViolationError):
        apply_adver(ADVER_GAME.initial, ActionMsg("c0", "b", True))


def test_unknown_variable():
    with pytest.raises(InvalidMessageError):
        apply_adver(ADVER_GAME.initial, ActionMsg("c0", "z", True))


def test_idle_write_keeps_state():
    s = EnvState.of(True, False, True)
    assert apply_adver(s, ActionMsg("c0", "a", True)) == s


def test_simultaneous_conflicts():
    s = ADVER_GAME.initial
    with pytest.raises(ConflictError):
        apply_simultaneous(s, ActionMsg("c0", "a", True), ActionMsg("c0", "c", True), ADVER_GAME)
    with pytest.raises(ConflictError):
        apply_simultaneous(COLLAB_GAME.initial, ActionMsg("c0", "a", True), ActionMsg("c1", "a", False))


@given(bools3, adver_msgs, adver_msgs)
def test_disjoint_writes_commute(values, m0, m1):
    s = EnvState(values)
    if m0.var == m1.var:
        return
    one = apply_adver(apply_adver(s, m0), m1)
    two = apply_adver(apply_adver(s, m1), m0)
    assert one == two
    if m0.agent != m1.agent:
        assert apply_simultaneous(s, m0, m1, ADVER_GAME) == one


@given(bools3, st.sampled_from(["c0", "c1"]), st.sampled_from("abc"), st.booleans())
def test_control_partition_enforced(values, agent, var, value):
    s = EnvState(values)
    msg = ActionMsg(agent, var, value)
    if var in ADVER_GAME.control[agent]:
        assert apply_adver(s, msg)[var] == value
    else:
        with pytest.raises(ControlViolationError):
            apply_adver(s, msg)


@given(st.lists(adver_msgs, max_size=10))
def test_apply_all_length(msgs):
    states = apply_all(ADVER_GAME.initial, msgs, ADVER_GAME)
    assert len(states) == len(msgs) + 1
    assert states[0] == ADVER_GAME.initial


def test_gamespec_json_roundtrip():
    for g in (COLLAB_GAME, ADVER_GAME):
        assert GameSpec.from_json(g.to_json()) == g


def test_gamespec_rejects_overlapping_adversarial_control():
    with pytest.raises(GameError):
        GameSpec(("a", "b"), {"c0": frozenset("ab"), "c1": frozenset("b")}, "adversarial", EnvState.of(False, False))


def test_gamespec_rejects_uncovered_variable():
    with pytest.raises(GameError):
        GameSpec(("a", "b", "c"), {"c0": frozenset("a"), "c1": frozenset("b")}, "adversarial", EnvState.of(0, 0, 0))
