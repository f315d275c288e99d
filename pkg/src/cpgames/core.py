"""Boolean environment state, agent messages and environment update functions."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

AGENTS = ("c0", "c1")


class GameError(ValueError):
    """Base class for invalid game operations."""


class InvalidMessageError(GameError):
    pass


class ControlViolationError(GameError):
    pass


class ConflictError(GameError):
    pass


@dataclass(frozen=True, slots=True)
class EnvState:
    """Truth assignment over the declared variables, in declaration order."""

    values: tuple[bool, ...]
    names: tuple[str, ...] = ("a", "b", "c")

    def __post_init__(self):
        if len(self.values) != len(self.names):
            raise GameError(f"state has {len(self.values)} values for {len(self.names)} variables")

    @classmethod
    def of(cls, *values: bool, names: Sequence[str] | None = None) -> EnvState:
        names = tuple(names) if names is not None else ("a", "b", "c")[: len(values)]
        return cls(tuple(bool(v) for v in values), names)

    def __getitem__(self, var: str) -> bool:
        try:
            return self.values[self.names.index(var)]
        except ValueError:
            raise InvalidMessageError(f"unknown variable {var!r}") from None

    def set(self, var: str, value: bool) -> EnvState:
        try:
            pos = self.names.index(var)
        except ValueError:
            raise InvalidMessageError(f"unknown variable {var!r}") from None
        if self.values[pos] == value:
            return self
        values = list(self.values)
        values[pos] = bool(value)
        return EnvState(tuple(values), self.names)

    @property
    def index(self) -> int:
        return state_index(self)

    def label(self) -> str:
        """Compact literal form, e.g. ``{¬a,b,c}``."""
        parts = [n if v else "¬" + n for n, v in zip(self.names, self.values)]
        return "{" + ",".join(parts) + "}"

    def __repr__(self) -> str:
        return f"EnvState{self.label()}"


@dataclass(frozen=True, slots=True)
class ActionMsg:
    """A single variable write ``var <- value`` issued by ``agent``."""

    agent: str
    var: str
    value: bool

    def label(self) -> str:
        return f"{self.agent}:{self.var}<-{'T' if self.value else 'F'}"


@dataclass(frozen=True, slots=True)
class SenseStep:
    """Probe ``var == expected`` issued by ``agent``.

    ``on_fail`` is ``"abort"`` (drop the rest of the agent's script) or
    ``"wait"`` (block until the predicate holds). A waiting probe with a
    ``poll_cap`` gives up after that many polls and lets the agent proceed.
    """

    agent: str
    var: str
    expected: bool
    on_fail: str = "wait"
    poll_cap: int | None = None

    def __post_init__(self):
        if self.on_fail not in ("abort", "wait"):
            raise GameError(f"on_fail must be 'abort' or 'wait', got {self.on_fail!r}")

    def holds(self, state: EnvState) -> bool:
        return state[self.var] == self.expected

    def label(self) -> str:
        return f"{self.agent}:{self.var}=={'T' if self.expected else 'F'}?"


@dataclass(frozen=True)
class GameSpec:
    variables: tuple[str, ...]
    control: dict[str, frozenset[str]]
    update_kind: str
    initial: EnvState
    # Transfer-latency parameters. Documentation only: every run assumes
    # queued, sequential arrival with at most one tick of delay.
    latency: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.update_kind not in ("collaborative", "adversarial"):
            raise GameError(f"unknown update kind {self.update_kind!r}")
        covered = set().union(*self.control.values()) if self.control else set()
        if covered != set(self.variables):
            raise GameError("control sets must cover exactly the declared variables")
        if self.update_kind == "adversarial":
            seen: set[str] = set()
            for agent, vars_ in self.control.items():
                if seen & vars_:
                    raise GameError("adversarial control sets must be disjoint")
                seen |= vars_
        if self.initial.names != self.variables:
            raise GameError("initial state does not match the declared variables")

    @property
    def n_states(self) -> int:
        return 2 ** len(self.variables)

    def state(self, *values: bool) -> EnvState:
        return EnvState(tuple(bool(v) for v in values), self.variables)

    def states(self) -> list[EnvState]:
        return [index_to_state(i, self.variables) for i in range(self.n_states)]

    def controls(self, agent: str, var: str) -> bool:
        return var in self.control.get(agent, ())

    def to_dict(self) -> dict:
        return {
            "variables": list(self.variables),
            "control": {a: sorted(v) for a, v in self.control.items()},
            "update": self.update_kind,
            "initial": list(self.initial.values),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> GameSpec:
        variables = tuple(d["variables"])
        return cls(
            variables=variables,
            control={a: frozenset(v) for a, v in d["control"].items()},
            update_kind=d["update"],
            initial=EnvState(tuple(bool(x) for x in d["initial"]), variables),
            latency=dict(d.get("latency", {})),
        )

    @classmethod
    def from_json(cls, text: str) -> GameSpec:
        return cls.from_dict(json.loads(text))


COLLAB_GAME = GameSpec(
    variables=("a", "b"),
    control={"c0": frozenset("ab"), "c1": frozenset("ab")},
    update_kind="collaborative",
    initial=EnvState((False, False), ("a", "b")),
)

ADVER_GAME = GameSpec(
    variables=("a", "b", "c"),
    control={"c0": frozenset("ac"), "c1": frozenset("b")},
    update_kind="adversarial",
    initial=EnvState((False, False, False), ("a", "b", "c")),
)


def state_index(state: EnvState) -> int:
    """Integer index with the first declared variable as the most significant bit."""
    idx = 0
    for v in state.values:
        idx = (idx << 1) | int(v)
    return idx


def index_to_state(index: int, names: Sequence[str] = ("a", "b", "c")) -> EnvState:
    n = len(names)
    if not 0 <= index < 2**n:
        raise GameError(f"index {index} out of range for {n} variables")
    return EnvState(tuple(bool((index >> (n - 1 - i)) & 1) for i in range(n)), tuple(names))


def apply_collab(state: EnvState, msg: ActionMsg) -> EnvState:
    """Collaborative update: either agent may write any variable, one write per tick."""
    if msg.agent not in AGENTS:
        raise InvalidMessageError(f"unknown agent {msg.agent!r}")
    return state.set(msg.var, msg.value)


def apply_adver(state: EnvState, msg: ActionMsg, game: GameSpec = ADVER_GAME) -> EnvState:
    """Adversarial update: as :func:`apply_collab` but only controlled variables may be written."""
    if msg.var not in state.names:
        raise InvalidMessageError(f"unknown variable {msg.var!r}")
    if not game.controls(msg.agent, msg.var):
        raise ControlViolationError(f"{msg.agent} does not control {msg.var!r}")
    return state.set(msg.var, msg.value)


def apply_simultaneous(
    state: EnvState, m0: ActionMsg, m1: ActionMsg, game: GameSpec | None = None
) -> EnvState:
    """Apply two writes from different agents as a single composite tick."""
    if m0.agent == m1.agent:
        raise ConflictError("simultaneous messages must come from distinct agents")
    if m0.var == m1.var:
        raise ConflictError(f"both messages target {m0.var!r}")
    if game is not None and game.update_kind == "adversarial":
        return apply_adver(apply_adver(state, m0, game), m1, game)
    return apply_collab(apply_collab(state, m0), m1)


def apply_message(state: EnvState, msg: ActionMsg, game: GameSpec) -> EnvState:
    if game.update_kind == "adversarial":
        return apply_adver(state, msg, game)
    return apply_collab(state, msg)


def apply_all(state: EnvState, msgs: Iterable[ActionMsg], game: GameSpec) -> list[EnvState]:
    """States after each message in turn, starting with ``state`` itself."""
    out = [state]
    for m in msgs:
        state = apply_message(state, m, game)
        out.append(state)
    return out
