"""Exact collaborative rates, steps per success and most likely paths for every mode pair.

    python scripts/reproduce_tables.py [--out results/tables.json]
"""

import argparse
import json
import warnings
from pathlib import Path

from cpgames.analysis import exhaustive_collab_rates, payoff_table, reference_check
from cpgames.interleave import OrderingProbs
from cpgames.pfa import UnreachableStateWarning, build_for_modes, fixture_matrix, matrix_diff, most_likely_paths
from cpgames.strategies import ALL_MODES, mode_pair


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="results/tables.json")
    args = ap.parse_args()

    rates, checks, paths = [], [], []
    for m in ALL_MODES:
        r = exhaustive_collab_rates(mode_pair(m))
        rates.append(r)
        checks.append(reference_check(r))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", UnreachableStateWarning)
            built = build_for_modes(mode_pair(m), OrderingProbs.default())
        ref = fixture_matrix(m)
        paths.append({
            "modes": m.name,
            "fixture": [list(p) for p in most_likely_paths(ref)],
            "fixture_expand_ties": [list(p) for p in most_likely_paths(ref, "expand")],
            "built": [list(p) for p in most_likely_paths(built)],
            "cells_differing": len(matrix_diff(built, ref)),
        })
        print(f"{m.name:20s} phi_only={str(r.phi_only):5s} psi_only={str(r.psi_only):5s} both={str(r.both):5s} "
              f"neither={str(r.neither):5s} len={r.avg_length}  [{checks[-1]['status']}]")

    for row in payoff_table(rates):
        print(f"{row['modes']:20s} steps/success phi={row['phi_steps_reported_style']} psi={row['psi_steps_reported_style']}")
    for p in paths:
        print(f"{p['modes']:20s} fixture paths {p['fixture']}  built paths {p['built']}  ({p['cells_differing']} cells differ)")

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps({"rates": [r.to_dict() for r in rates], "reference": checks,
                               "payoffs": payoff_table(rates), "paths": paths}, indent=2, sort_keys=True) + "\n")


if __name__ == "__main__":
    main()
