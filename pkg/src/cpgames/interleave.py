"""Message-order non-determinism: permutations, staggered interleavings and pair ordering."""

from __future__ import annotations

import enum
import itertools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence, TypeVar, Union

from .core import ActionMsg, EnvState, GameError, GameSpec, SenseStep, apply_message

T = TypeVar("T")
Entry = Union[ActionMsg, SenseStep]

MAX_PERMUTATION_ITEMS = 8


class SizeLimitError(GameError):
    pass


class PairOrder(enum.Enum):
    C0_FIRST = "c0_first"
    C1_FIRST = "c1_first"
    SIMULTANEOUS = "simultaneous"


@dataclass(frozen=True)
class OrderingProbs:
    """Probabilities that c0's message lands first, c1's lands first, or both land together."""

    p_c0_first: float
    p_c1_first: float
    p_sim: float

    def __post_init__(self):
        ps = (self.p_c0_first, self.p_c1_first, self.p_sim)
        if any(p < 0 for p in ps):
            raise GameError(f"ordering probabilities must be non-negative: {ps}")
        if abs(sum(ps) - 1.0) > 1e-12:
            raise GameError(f"ordering probabilities must sum to 1, got {sum(ps)!r}")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.p_c0_first, self.p_c1_first, self.p_sim)

    @classmethod
    def default(cls) -> OrderingProbs:
        return cls(0.25, 0.25, 0.5)


def fisher_yates(items: Sequence[T], rng: random.Random) -> list[T]:
    """Uniform random permutation of ``items``; the input is left untouched."""
    out = list(items)
    for i in range(len(out) - 1, 0, -1):
        j = rng.randrange(i + 1)
        out[i], out[j] = out[j], out[i]
    return out


def enumerate_permutations(msgs: Sequence[T], limit: int = MAX_PERMUTATION_ITEMS) -> list[tuple[T, ...]]:
    if len(msgs) > limit:
        raise SizeLimitError(f"{len(msgs)} messages would give {math.factorial(len(msgs))} orders (limit {limit} items)")
    return list(itertools.permutations(msgs))


def sample_pair_order(p: OrderingProbs, rng: random.Random) -> PairOrder:
    u = rng.random()
    if u < p.p_c0_first:
        return PairOrder.C0_FIRST
    if u < p.p_c0_first + p.p_c1_first:
        return PairOrder.C1_FIRST
    return PairOrder.SIMULTANEOUS


@dataclass(frozen=True)
class ScriptQueue:
    """Per-agent scripts of writes and probes, in emission order."""

    scripts: dict[str, tuple[Entry, ...]]

    @classmethod
    def of(cls, **scripts: Sequence[Entry]) -> ScriptQueue:
        return cls({a: tuple(s) for a, s in scripts.items()})

    @property
    def agents(self) -> tuple[str, ...]:
        return tuple(self.scripts)

    def writes(self) -> list[ActionMsg]:
        return [e for s in self.scripts.values() for e in s if isinstance(e, ActionMsg)]

    def has_senses(self) -> bool:
        return any(isinstance(e, SenseStep) for s in self.scripts.values() for e in s)


@dataclass
class Interleaving:
    """Outcome of one staggered execution."""

    messages: list[ActionMsg]
    states: list[EnvState]
    events: list[tuple[str, str]] = field(default_factory=list)
    deadlock: bool = False
    aborted: tuple[str, ...] = ()
    cap_hits: tuple[str, ...] = ()
    probability: Fraction = Fraction(1)

    @property
    def length(self) -> int:
        return len(self.messages)


class _Sched:
    """Mutable scheduler state; ``copy`` branches it for enumeration."""

    __slots__ = ("pos", "polls", "aborted", "state", "messages", "states", "events", "cap_hits", "deadlock")

    def __init__(self, n: int, state: EnvState):
        self.pos = [0] * n
        self.polls: list[int | None] = [None] * n  # None = not blocked
        self.aborted = [False] * n
        self.state = state
        self.messages: list[ActionMsg] = []
        self.states = [state]
        self.events: list[tuple[str, str]] = []
        self.cap_hits: list[str] = []
        self.deadlock = False

    def copy(self) -> _Sched:
        new = _Sched.__new__(_Sched)
        new.pos, new.polls, new.aborted = self.pos[:], self.polls[:], self.aborted[:]
        new.state = self.state
        new.messages, new.states, new.events = self.messages[:], self.states[:], self.events[:]
        new.cap_hits, new.deadlock = self.cap_hits[:], self.deadlock
        return new


class _Runner:
    def __init__(self, queues: ScriptQueue, game: GameSpec):
        self.agents = queues.agents
        self.scripts = [queues.scripts[a] for a in self.agents]
        self.lengths = [len(sc) for sc in self.scripts]
        self.game = game
        self.n = len(self.agents)

    def start(self, state: EnvState) -> _Sched:
        return _Sched(self.n, state)

    def _head(self, s: _Sched, k: int) -> Entry | None:
        if s.aborted[k] or s.pos[k] >= self.lengths[k]:
            return None
        return self.scripts[k][s.pos[k]]

    def runnable(self, s: _Sched) -> list[int]:
        return [k for k in range(self.n)
                if s.polls[k] is None and not s.aborted[k] and s.pos[k] < self.lengths[k]]

    def finished(self, s: _Sched) -> bool:
        return s.deadlock or all(s.aborted[k] or s.pos[k] >= self.lengths[k] for k in range(self.n))

    def _pass(self, s: _Sched, k: int, event: str) -> None:
        s.pos[k] += 1
        s.polls[k] = None
        s.events.append((self.agents[k], event))

    def _repoll(self, s: _Sched, skip: int) -> None:
        """Re-check every blocked probe after a scheduler step."""
        for k in range(self.n):
            if s.polls[k] is None or k == skip:
                continue
            sense = self.scripts[k][s.pos[k]]
            if sense.holds(s.state):
                self._pass(s, k, "sense-pass")
                continue
            s.polls[k] += 1
            if sense.poll_cap is not None and s.polls[k] >= sense.poll_cap:
                self._expire(s, k)

    def _expire(self, s: _Sched, k: int) -> None:
        s.cap_hits.append(self.agents[k])
        self._pass(s, k, "sense-cap")

    def settle(self, s: _Sched) -> None:
        """Resolve the no-runnable-agent case: expire capped probes or flag deadlock."""
        while not self.finished(s) and not self.runnable(s):
            capped = [k for k in range(self.n)
                      if s.polls[k] is not None and self.scripts[k][s.pos[k]].poll_cap is not None]
            if not capped:
                s.deadlock = True
                return
            # Nothing else can write, so the predicate cannot change before the cap.
            self._expire(s, capped[0])

    def step(self, s: _Sched, k: int) -> None:
        entry = self.scripts[k][s.pos[k]]
        agent = self.agents[k]
        if isinstance(entry, ActionMsg):
            s.state = apply_message(s.state, entry, self.game)
            s.pos[k] += 1
            s.messages.append(entry)
            s.states.append(s.state)
            s.events.append((agent, entry.label()))
        elif entry.holds(s.state):
            self._pass(s, k, "sense-pass")
        elif entry.on_fail == "abort":
            s.aborted[k] = True
            s.events.append((agent, "sense-abort"))
        else:
            s.polls[k] = 1
            s.events.append((agent, "sense-wait"))
            if entry.poll_cap is not None and entry.poll_cap <= 1:
                self._expire(s, k)
        self._repoll(s, skip=k)

    def result(self, s: _Sched, probability: Fraction = Fraction(1)) -> Interleaving:
        return Interleaving(
            messages=s.messages,
            states=s.states,
            events=s.events,
            deadlock=s.deadlock,
            aborted=tuple(a for a, ab in zip(self.agents, s.aborted) if ab),
            cap_hits=tuple(s.cap_hits),
            probability=probability,
        )


def staggered_interleave(
    queues: ScriptQueue, state: EnvState, game: GameSpec, rng: random.Random
) -> Interleaving:
    """Sample one interleaving: each step picks an unblocked agent uniformly and runs its head entry.

    Probes act as availability barriers: a failed ``wait`` probe blocks its
    agent until the predicate holds; a failed ``abort`` probe drops the rest of
    that agent's script.
    """
    run = _Runner(queues, game)
    s = run.start(state)
    run.settle(s)
    while not run.finished(s):
        ready = run.runnable(s)
        k = ready[rng.randrange(len(ready))] if len(ready) > 1 else ready[0]
        run.step(s, k)
        run.settle(s)
    return run.result(s)


def enumerate_staggered(
    queues: ScriptQueue, state: EnvState, game: GameSpec, limit: int = 100_000
) -> list[Interleaving]:
    """Every choice sequence of :func:`staggered_interleave`, each with its exact probability."""
    run = _Runner(queues, game)
    out: list[Interleaving] = []

    def walk(s: _Sched, prob: Fraction) -> None:
        run.settle(s)
        if run.finished(s):
            if len(out) >= limit:
                raise SizeLimitError(f"more than {limit} interleavings")
            out.append(run.result(s, prob))
            return
        ready = run.runnable(s)
        share = prob / len(ready)
        for k in ready:
            branch = s.copy()
            run.step(branch, k)
            walk(branch, share)

    walk(run.start(state), Fraction(1))
    return out
