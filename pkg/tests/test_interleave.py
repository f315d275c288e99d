import math
import random
from collections import Counter
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from cpgames.core import COLLAB_GAME, ActionMsg, GameError, SenseStep
from cpgames.interleave import (
    OrderingProbs,
    PairOrder,
    ScriptQueue,
    SizeLimitError,
    enumerate_permutations,
    enumerate_staggered,
    fisher_yates,
    sample_pair_order,
    staggered_interleave,
)

W = ActionMsg


@given(st.lists(st.integers(), max_size=12), st.integers(0, 2**32))
def test_fisher_yates_is_permutation(items, seed):
    out = fisher_yates(items, random.Random(seed))
    assert sorted(out) == sorted(items)


def test_fisher_yates_leaves_input():
    items = [1, 2, 3]
    fisher_yates(items, random.Random(0))
    assert items == [1, 2, 3]


def test_fisher_yates_covers_all_orders(rng):
    seen = Counter(tuple(fisher_yates("abc", rng)) for _ in range(6000))
    assert len(seen) == 6
    assert min(seen.values()) > 800


def test_enumerate_permutations_count_and_limit():
    assert len(enumerate_permutations(list(range(4)))) == 24
    with pytest.raises(SizeLimitError):
        enumerate_permutations(list(range(9)))


@pytest.mark.parametrize("probs", [(0.5, 0.5, 0.1), (-0.1, 0.6, 0.5), (0.3, 0.3, 0.3)])
def test_ordering_probs_validated(probs):
    with pytest.raises(GameError):
        OrderingProbs(*probs)


def test_pair_order_frequencies(rng):
    p = OrderingProbs.default()
    c = Counter(sample_pair_order(p, rng) for _ in range(20000))
    assert abs(c[PairOrder.SIMULTANEOUS] / 20000 - 0.5) < 0.02
    assert abs(c[PairOrder.C0_FIRST] / 20000 - 0.25) < 0.02


def test_abort_probe_drops_rest():
    q = ScriptQueue.of(c0=[SenseStep("c0", "a", True, "abort"), W("c0", "b", True)])
    run = staggered_interleave(q, COLLAB_GAME.initial, COLLAB_GAME, random.Random(0))
    assert run.messages == [] and run.aborted == ("c0",)


def test_wait_probe_blocks_until_write():
    q = ScriptQueue.of(
        c0=[SenseStep("c0", "a", True, "wait"), W("c0", "b", True)],
        c1=[W("c1", "a", True)],
    )
    runs = enumerate_staggered(q, COLLAB_GAME.initial, COLLAB_GAME)
    assert all(r.messages[0].agent == "c1" for r in runs)
    assert sum(r.probability for r in runs) == 1


def test_wait_without_cap_deadlocks():
    q = ScriptQueue.of(c0=[SenseStep("c0", "a", True, "wait")])
    run = staggered_interleave(q, COLLAB_GAME.initial, COLLAB_GAME, random.Random(0))
    assert run.deadlock


def test_wait_with_cap_expires_and_proceeds():
    q = ScriptQueue.of(c0=[SenseStep("c0", "a", True, "wait", poll_cap=3), W("c0", "b", True)])
    run = staggered_interleave(q, COLLAB_GAME.initial, COLLAB_GAME, random.Random(0))
    assert not run.deadlock and run.cap_hits == ("c0",)
    assert [m.label() for m in run.messages] == ["c0:b<-T"]


def test_enumeration_without_probes_matches_permutation_count():
    q = ScriptQueue.of(c0=[W("c0", "a", True), W("c0", "b", True)], c1=[W("c1", "b", False), W("c1", "a", False)])
    runs = enumerate_staggered(q, COLLAB_GAME.initial, COLLAB_GAME)
    # interleavings of two ordered pairs
    assert len(runs) == math.comb(4, 2)
    assert sum(r.probability for r in runs) == Fraction(1)


def test_enumeration_probability_matches_sampler():
    q = ScriptQueue.of(
        c0=[W("c0", "a", True), SenseStep("c0", "b", True, "abort"), W("c0", "a", False)],
        c1=[W("c1", "b", True), W("c1", "b", False)],
    )
    exact = Counter()
    for r in enumerate_staggered(q, COLLAB_GAME.initial, COLLAB_GAME):
        exact[tuple(m.label() for m in r.messages)] += r.probability
    rng = random.Random(5)
    n = 20000
    seen = Counter(tuple(m.label() for m in staggered_interleave(q, COLLAB_GAME.initial, COLLAB_GAME, rng).messages)
                   for _ in range(n))
    for key, p in exact.items():
        assert abs(seen[key] / n - float(p)) < 0.015
