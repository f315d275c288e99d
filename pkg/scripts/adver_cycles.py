"""Adversarial runs: phi/psi counts and the most frequent 3-state cycles per mode pair.

    python scripts/adver_cycles.py --ticks 10000 --seed 7
"""

import argparse
import itertools

from cpgames.engine import count_path_occurrences, run_adver
from cpgames.interleave import OrderingProbs
from cpgames.pfa import canonical_cycle
from cpgames.strategies import ALL_MODES, mode_pair


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--ticks", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--probs", default="0.25,0.25,0.5")
    ap.add_argument("--top", type=int, default=5)
    args = ap.parse_args()
    probs = OrderingProbs(*map(float, args.probs.split(",")))

    for m in ALL_MODES:
        trace, rep = run_adver(mode_pair(m), probs, args.ticks, args.seed)
        idx = trace.indices()
        cycles = {canonical_cycle(c) for c in itertools.permutations(range(8), 3)}
        counts = sorted(((count_path_occurrences(idx, c), c) for c in cycles), reverse=True)[: args.top]
        print(f"{m.name:20s} phi={rep.counts['phi']:5d} psi={rep.counts['psi']:5d} "
              f"env_ticks={rep.counts['env_ticks']}  top cycles: " + ", ".join(f"{c}:{n}" for n, c in counts))


if __name__ == "__main__":
    main()
