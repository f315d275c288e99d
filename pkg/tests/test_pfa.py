import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from cpgames.interleave import OrderingProbs
from cpgames.pfa import (
    FIXTURES,
    DegenerateRowError,
    MatrixParseError,
    PathSet,
    TransitionMatrix,
    UnreachableStateWarning,
    build_for_modes,
    canonical_cycle,
    fixture_matrix,
    matrix_diff,
    most_likely_paths,
)
from cpgames.strategies import ALL_MODES, SOCIAL_OPTIMISTIC, UNSOCIAL_OPTIMISTIC, mode_pair


def random_stochastic(rng, n=8):
    """Zero-diagonal row-stochastic matrix with random sparsity."""
    m = rng.random((n, n)) * (rng.random((n, n)) < 0.6)
    np.fill_diagonal(m, 0)
    for i in range(n):
        if not m[i].any():
            m[i, (i + 1 + rng.integers(n - 1)) % n] = 1.0
    return m / m.sum(axis=1, keepdims=True)


def is_argmax_cycle(v, path):
    return all(v[a].argmax() == b for a, b in zip(path, path[1:] + path[:1]))


def test_two_state_swap():
    assert [list(p) for p in most_likely_paths(np.array([[0, 1], [1, 0]]))] == [[0, 1]]


def test_canonical_rotation():
    assert canonical_cycle([5, 7, 3]) == (3, 5, 7)
    ps = PathSet()
    assert ps.add((5, 7, 3)) and not ps.add((3, 5, 7))
    assert (7, 3, 5) in ps and (3, 7, 5) not in ps


def test_degenerate_row_raises():
    with pytest.raises(DegenerateRowError):
        most_likely_paths(np.array([[0, 1.0], [0, 0]]))


def test_ties_expand_follows_all():
    v = np.array([[0, 0.5, 0.5], [1, 0, 0], [1, 0, 0]])
    assert most_likely_paths(v, "lowest").canonical() == {(0, 1)}
    assert most_likely_paths(v, "expand").canonical() == {(0, 1), (0, 2)}


def test_randomized_pigeonhole_cycles():
    rng = np.random.default_rng(2024)
    for _ in range(1000):
        v = random_stochastic(rng)
        paths = most_likely_paths(v)
        assert len(paths) >= 1
        for p in paths:
            p = list(p)
            assert 2 <= len(p) <= 8 and len(set(p)) == len(p)
            assert is_argmax_cycle(v, p)


@settings(max_examples=200)
@given(st.integers(0, 2**32 - 1), arrays(np.float64, 8, elements=st.floats(0.01, 100)))
def test_argmax_invariant_under_row_rescaling(seed, scale):
    v = random_stochastic(np.random.default_rng(seed))
    assert most_likely_paths(v).canonical() == most_likely_paths(v * scale[:, None]).canonical()


@pytest.mark.parametrize("name", sorted(FIXTURES))
def test_fixture_rows(name):
    T = fixture_matrix(name)
    assert np.all(np.diag(T.values) == 0)
    assert np.allclose(T.values.sum(axis=1), 1, atol=0.002)


@pytest.mark.parametrize("mode", ALL_MODES)
def test_builder_is_stochastic(mode):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UnreachableStateWarning)
        T = build_for_modes(mode_pair(mode), OrderingProbs.default())
    assert T.check(1e-9) == []


def test_builder_row0_unsocial_optimistic():
    T = build_for_modes(mode_pair(UNSOCIAL_OPTIMISTIC), OrderingProbs.default())
    np.testing.assert_allclose(T.values[0], [0, 0.4, 0.2, 0.4, 0, 0, 0, 0], atol=1e-9)


def test_matrix_diff_signed():
    T = build_for_modes(mode_pair(SOCIAL_OPTIMISTIC), OrderingProbs.default())
    ref = fixture_matrix(SOCIAL_OPTIMISTIC)
    for cell in matrix_diff(T, ref):
        assert cell["delta"] == pytest.approx(cell["built"] - cell["reference"], abs=1e-6)


def test_csv_json_roundtrip():
    T = fixture_matrix("social-realistic")
    assert np.allclose(TransitionMatrix.from_csv(T.to_csv()).values, T.values)
    assert np.allclose(TransitionMatrix.from_json(T.to_json()).values, T.values)


def test_parse_errors_name_position():
    with pytest.raises(MatrixParseError, match="row 1, column 0"):
        TransitionMatrix.from_csv("0,1\nx,0\n")
    with pytest.raises(MatrixParseError, match="row 0"):
        TransitionMatrix.from_csv("0,1,0\n1,0\n")
