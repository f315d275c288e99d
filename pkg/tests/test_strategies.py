import pytest

from cpgames.core import ADVER_GAME, ActionMsg, GameError, SenseStep
from cpgames.strategies import (
    ALL_MODES,
    SOCIAL_OPTIMISTIC,
    SOCIAL_REALISTIC,
    UNSOCIAL_OPTIMISTIC,
    UNSOCIAL_REALISTIC,
    AgentMode,
    BeliefState,
    adver_policy,
    collab_scripts,
    decide,
    mode_pair,
    nominal_order,
    update_belief,
    uses_belief,
)


@pytest.mark.parametrize("text,mode", [
    ("unsocial-optimistic", UNSOCIAL_OPTIMISTIC),
    ("Social_Realistic", SOCIAL_REALISTIC),
    ("social, optimistic", SOCIAL_OPTIMISTIC),
])
def test_mode_parse(text, mode):
    assert AgentMode.parse(text) == mode


def test_mode_parse_rejects_garbage():
    with pytest.raises(GameError):
        AgentMode.parse("friendly-optimistic")


def test_mixed_collab_modes_rejected():
    with pytest.raises(GameError):
        collab_scripts((UNSOCIAL_OPTIMISTIC, SOCIAL_OPTIMISTIC))


@pytest.mark.parametrize("mode", ALL_MODES)
def test_collab_scripts_only_write_own_agent(mode):
    for script in collab_scripts(mode_pair(mode)):
        assert all(e.agent == script.agent for e in script.entries)


def test_social_optimistic_nominal_order():
    labels = [m.label() for m in nominal_order(collab_scripts(mode_pair(SOCIAL_OPTIMISTIC)))]
    assert labels == ["c0:b<-T", "c1:b<-F", "c0:a<-T", "c1:b<-T"]


@pytest.mark.parametrize("mode", ALL_MODES)
def test_adver_policies_respect_control(mode):
    for agent in ("c0", "c1"):
        pol = adver_policy(agent, mode_pair(mode))
        for act in pol.actions():
            assert ADVER_GAME.controls(agent, act.var)


def test_unsocial_c1_table_shape():
    pol = adver_policy("c1", mode_pair(UNSOCIAL_OPTIMISTIC))
    expected = [True, True, False, False, True, True, True, True]
    assert [pol[i][0].value for i in range(8)] == expected


def test_realistic_adds_wait_probe():
    pol = adver_policy("c0", mode_pair(UNSOCIAL_REALISTIC))
    d = decide("c0", pol, ADVER_GAME.initial)
    assert d.action == ActionMsg("c0", "c", True)
    assert d.gate == SenseStep("c0", "c", True, "wait")


def test_policy_uses_own_mode():
    modes = (SOCIAL_OPTIMISTIC, UNSOCIAL_OPTIMISTIC)
    assert adver_policy("c0", modes).mode == SOCIAL_OPTIMISTIC
    assert adver_policy("c1", modes).mode == UNSOCIAL_OPTIMISTIC


def test_social_idle_rows():
    pol = adver_policy("c0", mode_pair(SOCIAL_OPTIMISTIC))
    assert decide("c0", pol, 0).action is None


def test_belief_tracks_own_writes_only():
    assert uses_belief(UNSOCIAL_OPTIMISTIC) and not uses_belief(SOCIAL_OPTIMISTIC)
    b = BeliefState(ADVER_GAME.initial)
    b = update_belief(b, ActionMsg("c0", "c", True))
    assert b.believed.index == 1
    assert update_belief(b, None) == b
