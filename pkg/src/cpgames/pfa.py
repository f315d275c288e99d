"""State-sequence matrices of the adversarial game and most-likely closed paths."""

from __future__ import annotations

import csv
import io
import json
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import ADVER_GAME, ActionMsg, EnvState, GameError, GameSpec, apply_adver, apply_simultaneous, index_to_state
from .interleave import OrderingProbs
from .strategies import AdverPolicy, AgentMode, adver_policy, decide

STOCHASTIC_TOL = 1e-9
FIXTURE_TOL = 2e-3


class DegenerateRowError(GameError):
    pass


class MatrixParseError(GameError):
    pass


class UnreachableStateWarning(UserWarning):
    pass


@dataclass
class TransitionMatrix:
    """Row-stochastic next-state matrix with a zero diagonal.

    Rows that received no weight stay all-zero and are listed in ``degenerate``.
    """

    values: np.ndarray
    names: tuple[str, ...] = ("a", "b", "c")
    degenerate: list[int] = field(default_factory=list)
    label: str = ""

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2 or self.values.shape[0] != self.values.shape[1]:
            raise GameError(f"matrix must be square, got shape {self.values.shape}")

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def check(self, tol: float = STOCHASTIC_TOL) -> list[str]:
        """Invariant violations, empty when the matrix is valid."""
        problems = []
        v = self.values
        if np.any(v < 0) or np.any(v > 1 + tol):
            problems.append("entries outside [0, 1]")
        if np.any(np.diag(v) != 0):
            problems.append("nonzero diagonal")
        sums = v.sum(axis=1)
        for i, s in enumerate(sums):
            if i in self.degenerate:
                continue
            if abs(s - 1) > tol:
                problems.append(f"row {i} sums to {s:.6g}")
        return problems

    def is_valid(self, tol: float = STOCHASTIC_TOL) -> bool:
        return not self.check(tol)

    def to_csv(self, decimals: int = 6) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        for row in self.values:
            w.writerow([f"{x:.{decimals}f}" for x in row])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "variables": list(self.names),
            "states": [index_to_state(i, self.names).label() for i in range(self.n)] if 2 ** len(self.names) == self.n else [],
            "matrix": [[float(x) for x in row] for row in self.values],
            "degenerate_rows": list(self.degenerate),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False)

    @classmethod
    def from_csv(cls, text: str, label: str = "") -> TransitionMatrix:
        rows = []
        for r, line in enumerate(csv.reader(l for l in text.splitlines() if l.strip() and not l.startswith("#"))):
            row = []
            for c, cell in enumerate(line):
                try:
                    row.append(float(cell))
                except ValueError:
                    raise MatrixParseError(f"row {r}, column {c}: cannot parse {cell!r}") from None
            rows.append(row)
        return cls._from_rows(rows, label)

    @classmethod
    def from_json(cls, text: str) -> TransitionMatrix:
        try:
            d = json.loads(text)
        except json.JSONDecodeError as e:
            raise MatrixParseError(f"invalid JSON: {e}") from None
        rows = d["matrix"] if isinstance(d, dict) else d
        for r, row in enumerate(rows):
            for c, x in enumerate(row):
                if not isinstance(x, (int, float)) or isinstance(x, bool):
                    raise MatrixParseError(f"row {r}, column {c}: not a number: {x!r}")
        return cls._from_rows(rows, d.get("label", "") if isinstance(d, dict) else "")

    @classmethod
    def _from_rows(cls, rows: list[list[float]], label: str) -> TransitionMatrix:
        n = len(rows)
        if n == 0:
            raise MatrixParseError("empty matrix")
        for r, row in enumerate(rows):
            if len(row) != n:
                raise MatrixParseError(f"row {r}: expected {n} columns, got {len(row)}")
        bits = n.bit_length() - 1
        names = ("a", "b", "c", "d", "e", "f", "g", "h")[:bits] if 2**bits == n else tuple(f"s{i}" for i in range(n))
        values = np.array(rows, dtype=float)
        degenerate = [i for i in range(n) if not values[i].any()]
        return cls(values, names, degenerate, label)


def _legs(s: EnvState, first: ActionMsg | None, second: ActionMsg | None, game: GameSpec):
    u = apply_adver(s, first, game) if first is not None else s
    v = apply_adver(u, second, game) if second is not None else u
    return u, v


def build_matrix(
    policies: tuple[AdverPolicy, AdverPolicy], probs: OrderingProbs, game: GameSpec = ADVER_GAME
) -> TransitionMatrix:
    """Transition matrix from the two policies and the interpretation-order probabilities.

    For each source state the head actions are interpreted three ways: as one
    composite tick (weight ``p_sim``), c0-then-c1 (``p_c0_first`` on each
    leg) and c1-then-c0 (``p_c1_first`` on each leg). A second leg is
    credited to the row of its intermediate state. Idle legs are dropped and
    every row is normalised by its own total.
    """
    pol0, pol1 = policies
    n = game.n_states
    w = np.zeros((n, n))
    for s in game.states():
        i = s.index
        a0 = decide(pol0.agent, pol0, s).action
        a1 = decide(pol1.agent, pol1, s).action
        if a0 is None and a1 is None:
            continue
        if a0 is not None and a1 is not None:
            t = apply_simultaneous(s, a0, a1, game)
        else:
            t = apply_adver(s, a0 if a0 is not None else a1, game)
        if t != s:
            w[i, t.index] += probs.p_sim
        for first, second, p in ((a0, a1, probs.p_c0_first), (a1, a0, probs.p_c1_first)):
            u, v = _legs(s, first, second, game)
            if u != s:
                w[i, u.index] += p
            if v != u:
                w[u.index, v.index] += p
    sums = w.sum(axis=1)
    degenerate = [i for i in range(n) if sums[i] == 0]
    if degenerate:
        warnings.warn(f"rows with no outgoing weight: {degenerate}", UnreachableStateWarning, stacklevel=2)
    values = np.divide(w, sums[:, None], out=np.zeros_like(w), where=sums[:, None] > 0)
    return TransitionMatrix(values, game.variables, degenerate, label="constructed")


def build_for_modes(modes: tuple[AgentMode, AgentMode], probs: OrderingProbs) -> TransitionMatrix:
    return build_matrix((adver_policy("c0", modes), adver_policy("c1", modes)), probs)


# Numeric matrices for P(c0,c1) = P(c1,c0) = 0.25, P(c0||c1) = 0.5, rows/columns by state index.
_UNSOCIAL_OPTIMISTIC = [
    [0, 0.4, 0.2, 0.4, 0, 0, 0, 0],
    [0, 0, 0, 0.333, 0, 0.167, 0.167, 0.333],
    [0.2, 0.4, 0, 0.4, 0, 0, 0, 0],
    [0, 0.2, 0.2, 0, 0, 0.4, 0, 0.2],
    [0, 0, 0, 0, 0, 0.2, 0.4, 0.4],
    [0, 0, 0, 0, 0.167, 0, 0.333, 0.5],
    [0, 0, 0, 0, 0, 0, 0, 1],
    [0, 0, 0, 0.5, 0.167, 0.167, 0.167, 0],
]
_SOCIAL_OPTIMISTIC = [
    [0, 0.714, 0.286, 0, 0, 0, 0, 0],
    [0.25, 0, 0.5, 0.25, 0, 0, 0, 0],
    [0, 0.667, 0, 0.333, 0, 0, 0, 0],
    [0.143, 0.286, 0, 0, 0, 0, 0, 0.571],
    [0.2, 0, 0.6, 0, 0, 0, 0.2, 0],
    [0, 0, 0, 0.2, 0.2, 0, 0.4, 0.2],
    [0, 0, 0.8, 0, 0.2, 0, 0, 0],
    [0, 0, 0, 0, 0.4, 0.2, 0.4, 0],
]
_SOCIAL_REALISTIC = [
    [0, 0.167, 0.167, 0.5, 0.167, 0, 0, 0],
    [0.167, 0, 0, 0.333, 0, 0.167, 0, 0.333],
    [0.333, 0, 0, 0.167, 0.333, 0, 0.167, 0],
    [0.4, 0.2, 0.2, 0, 0, 0, 0, 0.2],
    [0.2, 0, 0.4, 0, 0, 0, 0.4, 0],
    [0, 0, 0, 0, 0.2, 0, 0.4, 0.4],
    [0, 0, 0.286, 0, 0.143, 0, 0, 0.571],
    [0, 0, 0, 0.8, 0, 0, 0.2, 0],
]

FIXTURES = {
    "unsocial-optimistic": _UNSOCIAL_OPTIMISTIC,
    "unsocial-realistic": _UNSOCIAL_OPTIMISTIC,
    "social-optimistic": _SOCIAL_OPTIMISTIC,
    "social-realistic": _SOCIAL_REALISTIC,
}


def fixture_matrix(config: AgentMode | str) -> TransitionMatrix:
    name = config.name if isinstance(config, AgentMode) else AgentMode.parse(config).name
    return TransitionMatrix(np.array(FIXTURES[name], dtype=float), ("a", "b", "c"), label=f"fixture:{name}")


def matrix_diff(built: TransitionMatrix, reference: TransitionMatrix, tol: float = 5e-4) -> list[dict]:
    """Cells where ``built - reference`` exceeds ``tol`` in magnitude, signed."""
    if built.values.shape != reference.values.shape:
        raise GameError("matrices differ in shape")
    delta = built.values - reference.values
    out = []
    for i, j in zip(*np.nonzero(np.abs(delta) > tol)):
        out.append({
            "row": int(i),
            "col": int(j),
            "built": round(float(built.values[i, j]), 6),
            "reference": round(float(reference.values[i, j]), 6),
            "delta": round(float(delta[i, j]), 6),
        })
    return out


# --- most likely paths -------------------------------------------------------


def canonical_cycle(path: Sequence[int]) -> tuple[int, ...]:
    """Rotation starting at the smallest state; direction is kept."""
    k = path.index(min(path))
    return tuple(path[k:]) + tuple(path[:k])


@dataclass
class PathSet:
    """Closed paths in discovery order, unique up to rotation."""

    paths: list[tuple[int, ...]] = field(default_factory=list)

    def add(self, path: Sequence[int]) -> bool:
        key = canonical_cycle(path)
        if any(canonical_cycle(p) == key for p in self.paths):
            return False
        self.paths.append(tuple(path))
        return True

    def __contains__(self, path) -> bool:
        key = canonical_cycle(list(path))
        return any(canonical_cycle(p) == key for p in self.paths)

    def __iter__(self):
        return iter(self.paths)

    def __len__(self) -> int:
        return len(self.paths)

    def canonical(self) -> set[tuple[int, ...]]:
        return {canonical_cycle(p) for p in self.paths}

    def to_dict(self, names: Sequence[str] = ("a", "b", "c")) -> dict:
        n = 2 ** len(names)
        return {
            "paths": [list(p) for p in self.paths],
            "labels": [[index_to_state(i, names).label() if i < n else str(i) for i in p] for p in self.paths],
        }

    def to_json(self, names: Sequence[str] = ("a", "b", "c")) -> str:
        return json.dumps(self.to_dict(names), indent=2, ensure_ascii=False)


def _successors(row: np.ndarray, ties: str, rtol: float) -> list[int]:
    best = row.max()
    if ties == "lowest":
        return [int(np.argmax(row))]
    return [int(j) for j in np.nonzero(np.isclose(row, best, rtol=rtol, atol=0))[0]]


def most_likely_paths(T: TransitionMatrix | np.ndarray, ties: str = "lowest", rtol: float = 1e-9) -> PathSet:
    """Follow each row's most probable successor until a state repeats; keep the loop.

    ``ties="lowest"`` resolves equal maxima to the lowest column;
    ``ties="expand"`` follows every tied successor.
    """
    if ties not in ("lowest", "expand"):
        raise GameError(f"ties must be 'lowest' or 'expand', got {ties!r}")
    v = T.values if isinstance(T, TransitionMatrix) else np.asarray(T, dtype=float)
    n = v.shape[0]

    def successors(i: int) -> list[int]:
        if not np.any(v[i] > 0):
            raise DegenerateRowError(f"row {i} has no outgoing probability")
        return _successors(v[i], ties, rtol)

    found = PathSet()
    for start in range(n):
        stack = [[start]]
        while stack:
            path = stack.pop()
            nxt = successors(path[-1])
            for j in reversed(nxt):
                if j in path:
                    found.add(path[path.index(j):])
                else:
                    stack.append(path + [j])
    return found
