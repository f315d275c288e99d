"""Restricted temporal goals: chains of target states joined by Next / Finally.

A branch such as ``{¬a¬b} F {a¬b} X {ab}`` matches a trace segment that
starts at ``{¬a¬b}``, reaches ``{a¬b}`` at some later tick and is at ``{ab}``
on the very next tick. Traces are per environment tick, idle writes included,
so a repeated state breaks a Next link.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from typing import Sequence

from .core import EnvState, GameError


class Connector(enum.Enum):
    NEXT = "X"
    FINALLY = "F"


@dataclass(frozen=True)
class TemplateStep:
    target: EnvState
    connector: Connector | None = None  # link to the following step; None on the last step


@dataclass(frozen=True)
class SequenceTemplate:
    """Disjunction of step chains."""

    branches: tuple[tuple[TemplateStep, ...], ...]
    name: str = ""

    def __post_init__(self):
        if not self.branches:
            raise GameError("a template needs at least one branch")
        for br in self.branches:
            if len(br) < 2:
                raise GameError("every branch needs at least two steps")
            if br[-1].connector is not None:
                raise GameError("the last step of a branch cannot carry a connector")
            if any(st.connector is None for st in br[:-1]):
                raise GameError("inner steps need a connector")

    @classmethod
    def chain(cls, *parts, name: str = "") -> SequenceTemplate:
        """Single-branch template from ``state, "X"|"F", state, ...``."""
        return cls((_branch(parts),), name)

    @classmethod
    def any_of(cls, *branches: Sequence, name: str = "") -> SequenceTemplate:
        return cls(tuple(_branch(b) for b in branches), name)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "variables": list(self.branches[0][0].target.names),
            "branches": [
                [{"state": list(st.target.values), "next": st.connector.value if st.connector else None} for st in br]
                for br in self.branches
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> SequenceTemplate:
        names = tuple(d.get("variables", ("a", "b", "c")))
        branches = []
        for br in d["branches"]:
            branches.append(tuple(
                TemplateStep(EnvState(tuple(bool(v) for v in st["state"]), names),
                             Connector(st["next"]) if st.get("next") else None)
                for st in br
            ))
        return cls(tuple(branches), d.get("name", ""))

    @classmethod
    def from_json(cls, text: str) -> SequenceTemplate:
        return cls.from_dict(json.loads(text))


def _branch(parts) -> tuple[TemplateStep, ...]:
    parts = list(parts)
    steps = []
    for i in range(0, len(parts), 2):
        conn = Connector(parts[i + 1]) if i + 1 < len(parts) else None
        steps.append(TemplateStep(parts[i], conn))
    return tuple(steps)


def fixture_formulas(game: str) -> tuple[SequenceTemplate, SequenceTemplate]:
    """Goals of c0 (phi) and c1 (psi) for the collaborative or adversarial game."""
    if game == "collaborative":
        s = lambda a, b: EnvState((bool(a), bool(b)), ("a", "b"))  # noqa: E731
        phi = SequenceTemplate.chain(s(0, 0), "F", s(1, 0), "X", s(1, 1), name="phi")
        psi = SequenceTemplate.chain(s(0, 0), "X", s(0, 1), "F", s(1, 1), name="psi")
        return phi, psi
    if game == "adversarial":
        s = lambda a, b, c: EnvState((bool(a), bool(b), bool(c)), ("a", "b", "c"))  # noqa: E731
        phi = SequenceTemplate.any_of(
            (s(0, 0, 0), "X", s(0, 0, 1), "X", s(1, 0, 1)),
            (s(0, 1, 0), "X", s(0, 1, 1), "X", s(1, 0, 1)),
            (s(1, 1, 0), "X", s(1, 1, 1), "X", s(0, 1, 1)),
            name="phi",
        )
        psi = SequenceTemplate.any_of(
            (s(0, 1, 0), "X", s(0, 0, 0)),
            (s(0, 1, 1), "X", s(0, 0, 1)),
            name="psi",
        )
        return phi, psi
    raise GameError(f"unknown game {game!r}")


def match_from(trace: Sequence[EnvState], branch: Sequence[TemplateStep], start: int) -> int | None:
    """End index of the match of ``branch`` beginning exactly at ``trace[start]``, if any.

    Finally takes the earliest later occurrence of its target; there is no
    backtracking to later occurrences.
    """
    if trace[start] != branch[0].target:
        return None
    pos = start
    n = len(trace)
    for cur, nxt in zip(branch, branch[1:]):
        if cur.connector is Connector.NEXT:
            if pos + 1 >= n or trace[pos + 1] != nxt.target:
                return None
            pos += 1
        else:
            for j in range(pos + 1, n):
                if trace[j] == nxt.target:
                    pos = j
                    break
            else:
                return None
    return pos


def count_satisfactions(trace: Sequence[EnvState], f: SequenceTemplate) -> tuple[int, list[int]]:
    """Non-overlapping greedy count of matches, scanning left to right.

    At each index the branch that completes earliest wins (declaration order on
    ties); scanning resumes after the winning segment.
    """
    ends: list[int] = []
    i, n = 0, len(trace)
    while i < n:
        best = None
        for br in f.branches:
            e = match_from(trace, br, i)
            if e is not None and (best is None or e < best):
                best = e
        if best is None:
            i += 1
        else:
            ends.append(best)
            i = best + 1
    return len(ends), ends


def satisfies(trace: Sequence[EnvState], f: SequenceTemplate) -> bool:
    return count_satisfactions(trace, f)[0] > 0
