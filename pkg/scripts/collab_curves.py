"""Cumulative satisfaction curves, simulated vs exact, for each collaborative mode pair.

Writes one plot-ready CSV per mode plus a summary of MSE against run length.

    python scripts/collab_curves.py --iterations 100000 --seed 42 --out results/curves
"""

import argparse
import json
from dataclasses import replace
from pathlib import Path

from cpgames.analysis import compare, exhaustive_collab_rates
from cpgames.engine import run_collab
from cpgames.strategies import ALL_MODES, mode_pair


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--iterations", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--out", default="results/curves")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    summary = {}
    for m in ALL_MODES:
        exact = exhaustive_collab_rates(mode_pair(m))
        _, rep = run_collab(mode_pair(m), args.iterations, args.seed)
        cmp = compare(rep, exact)
        (out / f"{m.name}.csv").write_text(cmp.curves_csv())
        by_n = {}
        n = 1000
        while n <= args.iterations:
            by_n[n] = compare(replace(rep, outcomes=rep.outcomes[:n]), exact).mse
            n *= 10
        summary[m.name] = {"rates": rep.rates(), "mse_by_length": by_n}
        print(f"{m.name:20s} " + " ".join(f"{k}={v:.4f}" for k, v in rep.rates().items()))
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")


if __name__ == "__main__":
    main()
