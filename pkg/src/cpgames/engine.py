"""Game execution: collaborative iteration loops and free-running adversarial play."""

from __future__ import annotations

import csv
import io
import json
import random
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import (
    ADVER_GAME,
    COLLAB_GAME,
    AGENTS,
    ActionMsg,
    EnvState,
    GameError,
    apply_adver,
    apply_all,
    apply_simultaneous,
    state_index,
)
from .formulas import count_satisfactions, fixture_formulas
from .interleave import OrderingProbs, PairOrder, fisher_yates, sample_pair_order, staggered_interleave
from .strategies import (
    DEFAULT_POLL_CAP,
    AgentMode,
    BeliefState,
    adver_policy,
    collab_scripts,
    decide,
    script_queue,
    update_belief,
    uses_belief,
)

# Per-iteration outcome codes.
NEITHER, PHI_ONLY, PSI_ONLY, BOTH = 0, 1, 2, 3
OUTCOME_NAMES = {NEITHER: "neither", PHI_ONLY: "phi_only", PSI_ONLY: "psi_only", BOTH: "both"}


@dataclass
class Trace:
    """Environment states per tick plus the log of applied messages.

    For collaborative runs ``boundaries[i]`` is the position in ``states``
    where iteration ``i`` starts (its reset state).
    """

    states: list[EnvState] = field(default_factory=list)
    boundaries: list[int] = field(default_factory=list)
    log: list[tuple[str, int, str]] = field(default_factory=list)

    def indices(self) -> list[int]:
        return [state_index(s) for s in self.states]

    def segment(self, i: int) -> list[EnvState]:
        end = self.boundaries[i + 1] if i + 1 < len(self.boundaries) else len(self.states)
        return self.states[self.boundaries[i] : end]

    def __len__(self) -> int:
        return len(self.states)


@dataclass
class RunReport:
    """Summary of one run.

    Collaborative runs carry one outcome code per iteration; ``phi_cum`` and
    ``psi_cum`` then count satisfied iterations. Adversarial runs carry the
    tick positions where matches complete; the cumulative curves are per
    environment tick.
    """

    game: str
    modes: tuple[str, str]
    seed: int
    config: dict
    counts: dict[str, int]
    avg_length: float
    outcomes: list[int] = field(default_factory=list)
    phi_ends: list[int] = field(default_factory=list)
    psi_ends: list[int] = field(default_factory=list)
    n_ticks: int = 0
    extra: dict = field(default_factory=dict)

    @property
    def phi_cum(self) -> np.ndarray:
        if self.game == "collaborative":
            return np.cumsum([o in (PHI_ONLY, BOTH) for o in self.outcomes], dtype=np.int64)
        return _cum_from_ends(self.phi_ends, self.n_ticks)

    @property
    def psi_cum(self) -> np.ndarray:
        if self.game == "collaborative":
            return np.cumsum([o in (PSI_ONLY, BOTH) for o in self.outcomes], dtype=np.int64)
        return _cum_from_ends(self.psi_ends, self.n_ticks)

    def rates(self) -> dict[str, float]:
        n = len(self.outcomes)
        return {OUTCOME_NAMES[k]: sum(1 for o in self.outcomes if o == k) / n for k in OUTCOME_NAMES} if n else {}

    def to_dict(self) -> dict:
        d = {
            "game": self.game,
            "modes": list(self.modes),
            "seed": self.seed,
            "config": self.config,
            "counts": self.counts,
            "avg_length": self.avg_length,
            "n_ticks": self.n_ticks,
            "extra": self.extra,
        }
        if self.game == "collaborative":
            d["rates"] = self.rates()
            d["outcomes"] = "".join(str(o) for o in self.outcomes)
        else:
            d["phi_ends"] = self.phi_ends
            d["psi_ends"] = self.psi_ends
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> RunReport:
        return cls(
            game=d["game"],
            modes=tuple(d["modes"]),
            seed=d["seed"],
            config=d.get("config", {}),
            counts=d["counts"],
            avg_length=d["avg_length"],
            outcomes=[int(c) for c in d.get("outcomes", "")],
            phi_ends=list(d.get("phi_ends", [])),
            psi_ends=list(d.get("psi_ends", [])),
            n_ticks=d.get("n_ticks", 0),
            extra=d.get("extra", {}),
        )


def _cum_from_ends(ends: Sequence[int], n: int) -> np.ndarray:
    marks = np.zeros(n, dtype=np.int64)
    np.add.at(marks, np.asarray(ends, dtype=np.int64), 1)
    return np.cumsum(marks)


def classify(trace: Sequence[EnvState], phi, psi) -> int:
    p = count_satisfactions(trace, phi)[0] > 0
    q = count_satisfactions(trace, psi)[0] > 0
    return (PHI_ONLY if p else 0) | (PSI_ONLY if q else 0)


def run_collab(
    modes: tuple[AgentMode, AgentMode], iterations: int, seed: int, poll_cap: int = DEFAULT_POLL_CAP
) -> tuple[Trace, RunReport]:
    if iterations < 1:
        raise GameError("iterations must be >= 1")
    game = COLLAB_GAME
    rng = random.Random(seed)
    scripts = collab_scripts(modes, poll_cap)
    queue = script_queue(scripts)
    writes = queue.writes()
    sensing = queue.has_senses()
    phi, psi = fixture_formulas("collaborative")

    trace = Trace()
    outcomes: list[int] = []
    total_len = 0
    cap_hits = deadlocks = aborts = 0
    for it in range(iterations):
        if sensing:
            run = staggered_interleave(queue, game.initial, game, rng)
            msgs, states = run.messages, run.states
            cap_hits += len(run.cap_hits)
            deadlocks += run.deadlock
            aborts += len(run.aborted)
        else:
            msgs = fisher_yates(writes, rng)
            states = apply_all(game.initial, msgs, game)
        base = len(trace.states) - len(trace.boundaries)  # ticks so far, resets excluded
        trace.boundaries.append(len(trace.states))
        trace.states.extend(states)
        trace.log.extend((m.agent, base + k + 1, m.label()) for k, m in enumerate(msgs))
        total_len += len(msgs)
        outcomes.append(classify(states, phi, psi))

    counts = {OUTCOME_NAMES[k]: outcomes.count(k) for k in OUTCOME_NAMES}
    counts["phi"] = counts["phi_only"] + counts["both"]
    counts["psi"] = counts["psi_only"] + counts["both"]
    report = RunReport(
        game="collaborative",
        modes=(modes[0].name, modes[1].name),
        seed=seed,
        config={"iterations": iterations, "poll_cap": poll_cap},
        counts=counts,
        avg_length=total_len / iterations,
        outcomes=outcomes,
        n_ticks=total_len,
        extra={"cap_hits": cap_hits, "deadlocks": deadlocks, "aborts": aborts},
    )
    return trace, report


def run_adver(
    modes: tuple[AgentMode, AgentMode], probs: OrderingProbs, ticks: int, seed: int
) -> tuple[Trace, RunReport]:
    """Free-running adversarial play for ``ticks`` agent ticks.

    Each agent tick yields at most one write per agent. A pair lands as two
    environment ticks (c0 first or c1 first) or as one composite tick; a lone
    write or no write at all takes one environment tick.
    """
    if ticks < 1:
        raise GameError("ticks must be >= 1")
    game = ADVER_GAME
    rng = random.Random(seed)
    policies = {a: adver_policy(a, modes) for a in AGENTS}
    mode_of = dict(zip(AGENTS, modes))
    beliefs = {a: BeliefState(game.initial) for a in AGENTS if uses_belief(mode_of[a])}
    gates: dict[str, object] = {a: None for a in AGENTS}
    skips = {a: 0 for a in AGENTS}
    divergent = {a: 0 for a in beliefs}
    orders = {o.value: 0 for o in PairOrder}

    state = game.initial
    trace = Trace(states=[state])
    for _ in range(ticks):
        acts: dict[str, ActionMsg | None] = {}
        for a in AGENTS:
            gate = gates[a]
            if gate is not None:
                if not gate.holds(state):
                    skips[a] += 1
                    acts[a] = None
                    continue
                gates[a] = None
            if a in beliefs:
                view = beliefs[a].believed
                divergent[a] += view != state
            else:
                view = state
            d = decide(a, policies[a], view)
            acts[a] = d.action
            if d.action is not None and d.gate is not None:
                gates[a] = d.gate
            if a in beliefs:
                beliefs[a] = update_belief(beliefs[a], d.action, game)

        a0, a1 = acts["c0"], acts["c1"]
        if a0 is not None and a1 is not None:
            order = sample_pair_order(probs, rng)
            orders[order.value] += 1
            if order is PairOrder.SIMULTANEOUS:
                state = apply_simultaneous(state, a0, a1, game)
                trace.states.append(state)
                trace.log.append(("c0+c1", len(trace.states) - 1, f"{a0.label()}|{a1.label()}"))
            else:
                pair = (a0, a1) if order is PairOrder.C0_FIRST else (a1, a0)
                for m in pair:
                    state = apply_adver(state, m, game)
                    trace.states.append(state)
                    trace.log.append((m.agent, len(trace.states) - 1, m.label()))
        else:
            m = a0 if a0 is not None else a1
            if m is not None:
                state = apply_adver(state, m, game)
                trace.log.append((m.agent, len(trace.states), m.label()))
            trace.states.append(state)

    phi, psi = fixture_formulas("adversarial")
    _, phi_ends = count_satisfactions(trace.states, phi)
    _, psi_ends = count_satisfactions(trace.states, psi)
    n = len(trace.states)
    report = RunReport(
        game="adversarial",
        modes=(modes[0].name, modes[1].name),
        seed=seed,
        config={"ticks": ticks, "probs": list(probs.as_tuple())},
        counts={"phi": len(phi_ends), "psi": len(psi_ends), "env_ticks": n - 1, "agent_ticks": ticks},
        avg_length=(n - 1) / ticks,
        phi_ends=phi_ends,
        psi_ends=psi_ends,
        n_ticks=n,
        extra={
            "gate_skips": skips,
            "pair_orders": orders,
            "belief_divergence": {a: divergent[a] / ticks for a in divergent},
        },
    )
    return trace, report


def count_path_occurrences(trace: Trace | Sequence[int], path: Sequence[int]) -> int:
    """Tick positions where the trace runs through ``path`` (any rotation) consecutively."""
    if not path:
        raise GameError("path must be non-empty")
    seq = trace.indices() if isinstance(trace, Trace) else list(trace)
    k = len(path)
    rotations = {tuple(path[i:]) + tuple(path[:i]) for i in range(k)}
    return sum(1 for i in range(len(seq) - k + 1) if tuple(seq[i : i + k]) in rotations)


def in_path_flags(indices: Sequence[int], paths: Sequence[Sequence[int]]) -> list[int]:
    """1 for each tick covered by an occurrence of any of ``paths``."""
    flags = [0] * len(indices)
    for path in paths:
        k = len(path)
        rotations = {tuple(path[i:]) + tuple(path[:i]) for i in range(k)}
        for i in range(len(indices) - k + 1):
            if tuple(indices[i : i + k]) in rotations:
                for j in range(i, i + k):
                    flags[j] = 1
    return flags


def trace_csv(trace: Trace, report: RunReport, extra: dict[str, Sequence] | None = None, header: str | None = None) -> str:
    """Per-tick CSV ``tick,state_index,phi_cum,psi_cum[,extra...]`` with LF line endings."""
    buf = io.StringIO()
    if header:
        buf.write(f"# {header}\n")
    w = csv.writer(buf, lineterminator="\n")
    cols = ["tick", "state_index", "phi_cum", "psi_cum"] + list(extra or {})
    w.writerow(cols)
    idx = trace.indices()
    if report.game == "collaborative":
        phi, psi = fixture_formulas("collaborative")
        phi_marks = np.zeros(len(idx), dtype=np.int64)
        psi_marks = np.zeros(len(idx), dtype=np.int64)
        for i, start in enumerate(trace.boundaries):
            seg = trace.segment(i)
            for f, marks in ((phi, phi_marks), (psi, psi_marks)):
                _, ends = count_satisfactions(seg, f)
                if ends:
                    marks[start + ends[0]] += 1
        phi_cum, psi_cum = np.cumsum(phi_marks), np.cumsum(psi_marks)
    else:
        phi_cum, psi_cum = report.phi_cum, report.psi_cum
    extra_cols = [list(v) for v in (extra or {}).values()]
    for t in range(len(idx)):
        w.writerow([t, idx[t], int(phi_cum[t]), int(psi_cum[t])] + [c[t] for c in extra_cols])
    return buf.getvalue()
