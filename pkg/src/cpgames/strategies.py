"""Agent behaviours: collaborative scripts, adversarial state-indexed policies, beliefs."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Union

from .core import ADVER_GAME, AGENTS, ActionMsg, EnvState, GameError, GameSpec, SenseStep, apply_adver, state_index
from .interleave import ScriptQueue

Entry = Union[ActionMsg, SenseStep]

DEFAULT_POLL_CAP = 16


@dataclass(frozen=True)
class AgentMode:
    social: bool
    realistic: bool

    @property
    def name(self) -> str:
        return ("social" if self.social else "unsocial") + "-" + ("realistic" if self.realistic else "optimistic")

    @classmethod
    def parse(cls, text: str) -> AgentMode:
        try:
            soc, real = text.strip().lower().replace("_", "-").replace(",", "-").replace(" ", "").split("-")
        except ValueError:
            raise GameError(f"cannot parse agent mode {text!r}") from None
        if soc not in ("social", "unsocial") or real not in ("optimistic", "realistic"):
            raise GameError(f"cannot parse agent mode {text!r}")
        return cls(soc == "social", real == "realistic")

    def __str__(self) -> str:
        return self.name


UNSOCIAL_OPTIMISTIC = AgentMode(False, False)
UNSOCIAL_REALISTIC = AgentMode(False, True)
SOCIAL_OPTIMISTIC = AgentMode(True, False)
SOCIAL_REALISTIC = AgentMode(True, True)
ALL_MODES = (UNSOCIAL_OPTIMISTIC, UNSOCIAL_REALISTIC, SOCIAL_OPTIMISTIC, SOCIAL_REALISTIC)


def mode_pair(mode: AgentMode | str) -> tuple[AgentMode, AgentMode]:
    m = AgentMode.parse(mode) if isinstance(mode, str) else mode
    return (m, m)


def _entry_dict(e: Entry) -> dict:
    if isinstance(e, ActionMsg):
        return {"write": e.var, "value": e.value}
    d = {"sense": e.var, "expected": e.expected, "on_fail": e.on_fail}
    if e.poll_cap is not None:
        d["poll_cap"] = e.poll_cap
    return d


# --- collaborative ----------------------------------------------------------


@dataclass(frozen=True)
class CollabScript:
    """One agent's entries for a single iteration; ``slots`` are the nominal time slots."""

    agent: str
    entries: tuple[Entry, ...]
    slots: tuple[int | None, ...] = ()

    def writes(self) -> list[ActionMsg]:
        return [e for e in self.entries if isinstance(e, ActionMsg)]

    def to_dict(self) -> dict:
        return {
            "agent": self.agent,
            "entries": [dict(_entry_dict(e), slot=s) for e, s in zip(self.entries, self.slots or [None] * len(self.entries))],
        }


def collab_scripts(modes: tuple[AgentMode, AgentMode], poll_cap: int = DEFAULT_POLL_CAP) -> tuple[CollabScript, CollabScript]:
    """Both agents' scripts for one iteration of the collaborative game."""
    m0, m1 = modes
    if m0 != m1:
        raise GameError("collaborative scripts are defined for matching mode pairs only")
    w = lambda agent, var, val: ActionMsg(agent, var, val)  # noqa: E731
    T, F = True, False
    if m0 == UNSOCIAL_OPTIMISTIC:
        c0 = CollabScript("c0", (w("c0", "a", T), w("c0", "b", T)), (0, 1))
        c1 = CollabScript("c1", (w("c1", "b", T), w("c1", "a", T)), (0, 1))
    elif m0 == UNSOCIAL_REALISTIC:
        c0 = CollabScript("c0", (w("c0", "a", T), w("c0", "b", T)), (0, 1))
        c1 = CollabScript(
            "c1", (w("c1", "b", T), SenseStep("c1", "b", T, "abort"), w("c1", "a", T)), (0, 1, 1)
        )
    elif m0 == SOCIAL_OPTIMISTIC:
        c0 = CollabScript("c0", (w("c0", "b", T), w("c0", "a", T)), (0, 2))
        c1 = CollabScript("c1", (w("c1", "b", F), w("c1", "b", T)), (1, 3))
    else:
        # c0 polls for b = F over slots 3..k-1, then acts at k regardless.
        c0 = CollabScript(
            "c0",
            (w("c0", "b", T), SenseStep("c0", "b", F, "wait", poll_cap), w("c0", "a", T), w("c0", "b", T)),
            (0, 3, None, None),
        )
        c1 = CollabScript("c1", (SenseStep("c1", "b", T, "abort"), w("c1", "b", F)), (1, 2))
    return c0, c1


def script_queue(scripts: tuple[CollabScript, CollabScript]) -> ScriptQueue:
    return ScriptQueue({s.agent: s.entries for s in scripts})


def nominal_order(scripts: tuple[CollabScript, CollabScript]) -> list[ActionMsg]:
    """Writes in shared-slot order, as a synchronized optimist expects them to land."""
    tagged = [(slot, i, e) for i, s in enumerate(scripts) for e, slot in zip(s.entries, s.slots)
              if isinstance(e, ActionMsg) and slot is not None]
    return [e for _, _, e in sorted(tagged, key=lambda t: (t[0], t[1]))]


# --- adversarial ------------------------------------------------------------


@dataclass(frozen=True)
class AdverPolicy:
    """Action list per environment state index (0..7); probes follow their write."""

    agent: str
    mode: AgentMode
    entries: tuple[tuple[Entry, ...], ...]

    def __post_init__(self):
        if len(self.entries) != ADVER_GAME.n_states:
            raise GameError("adversarial policies must cover all 8 states")

    def __getitem__(self, state: EnvState | int) -> tuple[Entry, ...]:
        idx = state if isinstance(state, int) else state_index(state)
        return self.entries[idx]

    def actions(self) -> list[ActionMsg]:
        return [e for entry in self.entries for e in entry if isinstance(e, ActionMsg)]

    def to_dict(self) -> dict:
        return {
            "agent": self.agent,
            "mode": self.mode.name,
            "states": {
                str(i): {"label": ADVER_GAME.states()[i].label(), "actions": [_entry_dict(e) for e in entry]}
                for i, entry in enumerate(self.entries)
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False)


# Rows indexed by state {a,b,c} with a most significant; (var, value) or None.
_C0_TABLE = {
    UNSOCIAL_OPTIMISTIC: [("c", 1), ("a", 1), ("c", 1), ("a", 1), ("c", 1), ("c", 0), ("c", 1), ("a", 0)],
    SOCIAL_OPTIMISTIC: [None, ("c", 0), ("c", 1), ("a", 1), ("a", 0), ("c", 0), ("a", 0), ("c", 0)],
    SOCIAL_REALISTIC: [("c", 1), ("a", 1), ("a", 1), ("c", 0), ("a", 0), ("c", 0), ("c", 1), ("a", 0)],
}
_C1_TABLE = {
    # {F,F,*} -> b<-T; {F,T,*} -> b<-F; {T,*,*} -> b<-T
    UNSOCIAL_OPTIMISTIC: [("b", 1), ("b", 1), ("b", 0), ("b", 0), ("b", 1), ("b", 1), ("b", 1), ("b", 1)],
    SOCIAL_OPTIMISTIC: [("b", 1), ("b", 1), ("b", 0), None, ("b", 1), ("b", 1), None, ("b", 0)],
    SOCIAL_REALISTIC: [("b", 1), ("b", 1), ("b", 0), ("b", 0), ("b", 1), ("b", 1), None, None],
}
_C0_TABLE[UNSOCIAL_REALISTIC] = _C0_TABLE[UNSOCIAL_OPTIMISTIC]
_C1_TABLE[UNSOCIAL_REALISTIC] = _C1_TABLE[UNSOCIAL_OPTIMISTIC]


def adver_policy(agent: str, modes: tuple[AgentMode, AgentMode]) -> AdverPolicy:
    """Policy for ``agent`` taken from the row of that agent's own mode."""
    if agent not in AGENTS:
        raise GameError(f"unknown agent {agent!r}")
    mode = modes[AGENTS.index(agent)]
    table = (_C0_TABLE if agent == "c0" else _C1_TABLE)[mode]
    entries = []
    for cell in table:
        if cell is None:
            entries.append(())
            continue
        var, val = cell
        act = ActionMsg(agent, var, bool(val))
        if mode == UNSOCIAL_REALISTIC:
            entries.append((act, SenseStep(agent, var, bool(val), "wait")))
        else:
            entries.append((act,))
    return AdverPolicy(agent, mode, tuple(entries))


@dataclass(frozen=True)
class Decision:
    action: ActionMsg | None = None
    gate: SenseStep | None = None


def decide(agent: str, policy: AdverPolicy, view: EnvState) -> Decision:
    entry = policy[view]
    action = next((e for e in entry if isinstance(e, ActionMsg)), None)
    gate = next((e for e in entry if isinstance(e, SenseStep)), None)
    if action is not None and action.agent != agent:
        raise GameError(f"policy of {action.agent} consulted for {agent}")
    return Decision(action, gate)


def uses_belief(mode: AgentMode) -> bool:
    """Unsocial optimists act on their own belief instead of the sensed state."""
    return not mode.social and not mode.realistic


@dataclass(frozen=True)
class BeliefState:
    believed: EnvState


def update_belief(b: BeliefState, own_action: ActionMsg | None, game: GameSpec = ADVER_GAME) -> BeliefState:
    if own_action is None:
        return b
    return BeliefState(apply_adver(b.believed, own_action, game))
