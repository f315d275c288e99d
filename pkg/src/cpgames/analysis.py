"""Exact outcome rates of the collaborative game and simulation-vs-prediction comparison."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .core import COLLAB_GAME, GameError, apply_all
from .engine import BOTH, NEITHER, OUTCOME_NAMES, PHI_ONLY, PSI_ONLY, RunReport, classify
from .formulas import fixture_formulas
from .interleave import enumerate_permutations, enumerate_staggered
from .strategies import DEFAULT_POLL_CAP, AgentMode, collab_scripts, script_queue

# Figures published for the four mode rows, as stated there: whole percents
# and time steps. Keys say which rate each figure refers to; "phi"/"psi"
# are totals (only + both).
REFERENCE_FIGURES: dict[str, dict[str, float]] = {
    "unsocial-optimistic": {"phi": 0.33, "psi": 0.50, "neither": 0.17, "length": 4.0},
    "unsocial-realistic": {"phi": 0.40, "psi": 0.40, "neither": 0.10, "length": 3.8},
    "social-optimistic": {"phi_only": 0.25, "psi_only": 0.33, "both": 0.17, "neither": 0.25, "length": 4.0},
    "social-realistic": {"phi": 0.50, "psi": 1.00, "length": 2.3},
}
REFERENCE_STEPS: dict[str, tuple[float, float]] = {
    "unsocial-optimistic": (12.12, 8.0),
    "unsocial-realistic": (9.5, 9.5),
    "social-optimistic": (16.0, 12.12),
    "social-realistic": (4.6, 2.3),
}
# Rate each published steps-per-success figure was divided by.
REFERENCE_BASIS = {
    "unsocial-optimistic": "total",
    "unsocial-realistic": "total",
    "social-optimistic": "exclusive",
    "social-realistic": "total",
}
# Whole-percent rounding of the published figures.
ROUNDING_SLACK = 0.005


def frac_dict(x: Fraction | None) -> dict | None:
    return None if x is None else {"num": x.numerator, "den": x.denominator}


@dataclass
class RateBreakdown:
    modes: tuple[str, str]
    phi_only: Fraction
    psi_only: Fraction
    both: Fraction
    neither: Fraction
    avg_length: Fraction
    runs: list[dict] = field(default_factory=list)

    def __post_init__(self):
        if self.phi_only + self.psi_only + self.both + self.neither != 1:
            raise GameError("outcome rates must sum to 1")

    @property
    def phi(self) -> Fraction:
        return self.phi_only + self.both

    @property
    def psi(self) -> Fraction:
        return self.psi_only + self.both

    def rate(self, key: str) -> Fraction:
        return {"phi": self.phi, "psi": self.psi, "phi_only": self.phi_only, "psi_only": self.psi_only,
                "both": self.both, "neither": self.neither, "length": self.avg_length}[key]

    def to_dict(self, with_runs: bool = False) -> dict:
        d = {
            "modes": list(self.modes),
            "rates": {k: frac_dict(self.rate(k)) for k in ("phi_only", "psi_only", "both", "neither", "phi", "psi")},
            "avg_length": frac_dict(self.avg_length),
        }
        if with_runs:
            d["runs"] = self.runs
        return d


def exhaustive_collab_rates(
    modes: tuple[AgentMode, AgentMode], poll_cap: int = DEFAULT_POLL_CAP, limit: int = 100_000
) -> RateBreakdown:
    """Exact outcome distribution over every admissible ordering of one iteration.

    Without probes every permutation of the combined writes is equally
    likely; with probes each staggered choice sequence carries its exact
    scheduling probability.
    """
    scripts = collab_scripts(modes, poll_cap)
    queue = script_queue(scripts)
    game = COLLAB_GAME
    phi, psi = fixture_formulas("collaborative")
    if queue.has_senses():
        runs = [(r.probability, r.messages, r.states, r.events) for r in enumerate_staggered(queue, game.initial, game, limit)]
    else:
        perms = enumerate_permutations(queue.writes())
        share = Fraction(1, len(perms))
        runs = [(share, list(p), apply_all(game.initial, p, game), []) for p in perms]

    mass = {k: Fraction(0) for k in OUTCOME_NAMES}
    length = Fraction(0)
    listing = []
    for prob, msgs, states, events in runs:
        outcome = classify(states, phi, psi)
        mass[outcome] += prob
        length += prob * len(msgs)
        listing.append({
            "probability": frac_dict(prob),
            "messages": [m.label() for m in msgs],
            "states": [s.label() for s in states],
            "events": [f"{a}:{e}" for a, e in events],
            "outcome": OUTCOME_NAMES[outcome],
        })
    return RateBreakdown(
        modes=(modes[0].name, modes[1].name),
        phi_only=mass[PHI_ONLY],
        psi_only=mass[PSI_ONLY],
        both=mass[BOTH],
        neither=mass[NEITHER],
        avg_length=length,
        runs=listing,
    )


def steps_per_satisfaction(
    r: RateBreakdown, basis: str = "total", percent_rounding: bool = False
) -> tuple[Fraction | None, Fraction | None]:
    """Expected ticks per success of phi and psi; None where the rate is zero.

    ``basis="total"`` divides by only-plus-both rates, ``"exclusive"`` by the
    only rates. ``percent_rounding`` first rounds each rate and the length to
    the precision they are usually reported at (whole percent, one decimal).
    """
    if basis == "total":
        rates = (r.phi, r.psi)
    elif basis == "exclusive":
        rates = (r.phi_only, r.psi_only)
    else:
        raise GameError(f"unknown basis {basis!r}")
    length = r.avg_length
    if percent_rounding:
        rates = tuple(Fraction(round(x * 100), 100) for x in rates)
        length = Fraction(round(length * 10), 10)
    return tuple(None if x == 0 else length / x for x in rates)


def reference_check(r: RateBreakdown) -> dict:
    """Compare exact rates with the published figures for the same mode row."""
    name = r.modes[0]
    rows = []
    for key, ref in REFERENCE_FIGURES[name].items():
        exact = r.rate(key)
        delta = float(exact) - ref
        slack = ROUNDING_SLACK if key != "length" else 0.05
        rows.append({"figure": key, "reference": ref, "exact": frac_dict(exact), "value": round(float(exact), 6),
                     "delta": round(delta, 6), "agrees": abs(delta) <= slack})
    steps = steps_per_satisfaction(r, REFERENCE_BASIS[name], percent_rounding=True)
    for key, ref, got in zip(("phi_steps", "psi_steps"), REFERENCE_STEPS[name], steps):
        value = None if got is None else round(float(got), 2)
        rows.append({"figure": key, "reference": ref, "exact": frac_dict(got), "value": value,
                     "delta": None if value is None else round(value - ref, 6),
                     "agrees": value is not None and abs(value - ref) < 0.005})
    agrees = all(row["agrees"] for row in rows)
    return {"modes": list(r.modes), "status": "agrees" if agrees else "errata-candidate", "figures": rows}


def errata_report(r: RateBreakdown) -> dict:
    d = reference_check(r)
    d["breakdown"] = r.to_dict(with_runs=True)
    return d


def payoff_table(breakdowns: list[RateBreakdown]) -> list[dict]:
    rows = []
    for r in breakdowns:
        name = r.modes[0]
        total = steps_per_satisfaction(r, "total")
        published = steps_per_satisfaction(r, REFERENCE_BASIS[name], percent_rounding=True)
        rows.append({
            "modes": name,
            "phi_steps": frac_dict(total[0]),
            "psi_steps": frac_dict(total[1]),
            "phi_steps_reported_style": None if published[0] is None else round(float(published[0]), 2),
            "psi_steps_reported_style": None if published[1] is None else round(float(published[1]), 2),
        })
    return rows


@dataclass
class ComparisonReport:
    """Predicted vs simulated cumulative satisfaction counts per iteration.

    ``mse_counts`` is the mean squared gap between the raw cumulative
    counts; ``mse`` is the same gap with both curves divided by the number
    of iterations, which shrinks as the run grows when the prediction is right.
    """

    modes: tuple[str, str]
    iterations: int
    predicted: dict[str, np.ndarray]
    simulated: dict[str, np.ndarray]
    mse: dict[str, float]
    mse_counts: dict[str, float]
    final_rates: dict[str, dict[str, float]]

    def to_dict(self) -> dict:
        return {
            "modes": list(self.modes),
            "iterations": self.iterations,
            "mse": self.mse,
            "mse_counts": self.mse_counts,
            "final_rates": self.final_rates,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def curves_csv(self, header: str | None = None) -> str:
        buf = io.StringIO()
        if header:
            buf.write(f"# {header}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["iteration", "phi_sim", "phi_pred", "psi_sim", "psi_pred"])
        for i in range(self.iterations):
            w.writerow([i + 1, int(self.simulated["phi"][i]), f"{self.predicted['phi'][i]:.6f}",
                        int(self.simulated["psi"][i]), f"{self.predicted['psi'][i]:.6f}"])
        return buf.getvalue()


class ConfigurationMismatchError(GameError):
    pass


def compare(sim: RunReport, predicted: RateBreakdown) -> ComparisonReport:
    if sim.game != "collaborative":
        raise ConfigurationMismatchError("comparison needs a collaborative run")
    if tuple(sim.modes) != tuple(predicted.modes):
        raise ConfigurationMismatchError(f"run modes {sim.modes} vs prediction modes {predicted.modes}")
    n = len(sim.outcomes)
    if n == 0:
        raise GameError("run has no iterations")
    steps = np.arange(1, n + 1, dtype=float)
    simulated = {"phi": sim.phi_cum, "psi": sim.psi_cum}
    pred = {"phi": float(predicted.phi) * steps, "psi": float(predicted.psi) * steps}
    mse_counts = {k: float(np.mean((simulated[k] - pred[k]) ** 2)) for k in pred}
    mse = {k: v / n**2 for k, v in mse_counts.items()}
    final = {k: {"simulated": float(simulated[k][-1]) / n, "predicted": float(getattr(predicted, k))} for k in pred}
    return ComparisonReport(tuple(sim.modes), n, pred, simulated, mse, mse_counts, final)
