from fractions import Fraction

import numpy as np
import pytest

from cpgames.analysis import (
    ConfigurationMismatchError,
    compare,
    errata_report,
    exhaustive_collab_rates,
    reference_check,
    steps_per_satisfaction,
)
from cpgames.engine import run_collab
from cpgames.strategies import ALL_MODES, SOCIAL_OPTIMISTIC, UNSOCIAL_OPTIMISTIC, UNSOCIAL_REALISTIC, mode_pair

F = Fraction


@pytest.mark.parametrize("mode", ALL_MODES)
def test_oracle_sums_to_one(mode):
    r = exhaustive_collab_rates(mode_pair(mode))
    assert r.phi_only + r.psi_only + r.both + r.neither == 1
    total = sum(F(run["probability"]["num"], run["probability"]["den"]) for run in r.runs)
    assert total == 1


def test_unsocial_optimistic_oracle():
    r = exhaustive_collab_rates(mode_pair(UNSOCIAL_OPTIMISTIC))
    assert (r.phi, r.psi, r.neither, r.avg_length) == (F(8, 24), F(12, 24), F(4, 24), 4)
    assert len(r.runs) == 24


def test_steps_per_satisfaction():
    r = exhaustive_collab_rates(mode_pair(UNSOCIAL_OPTIMISTIC))
    assert steps_per_satisfaction(r) == (F(12), F(8))
    phi_steps, psi_steps = steps_per_satisfaction(r, percent_rounding=True)
    assert round(float(phi_steps), 2) == 12.12 and psi_steps == 8


def test_reference_check_unsocial_optimistic_agrees():
    assert reference_check(exhaustive_collab_rates(mode_pair(UNSOCIAL_OPTIMISTIC)))["status"] == "agrees"


def test_errata_report_attaches_enumeration():
    rep = errata_report(exhaustive_collab_rates(mode_pair(UNSOCIAL_REALISTIC)))
    assert rep["breakdown"]["runs"]
    assert rep["status"] in ("agrees", "errata-candidate")


def test_compare_mismatch():
    _, rep = run_collab(mode_pair(UNSOCIAL_OPTIMISTIC), 10, seed=1)
    with pytest.raises(ConfigurationMismatchError):
        compare(rep, exhaustive_collab_rates(mode_pair(SOCIAL_OPTIMISTIC)))


def test_compare_curves():
    _, rep = run_collab(mode_pair(UNSOCIAL_OPTIMISTIC), 500, seed=1)
    cmp = compare(rep, exhaustive_collab_rates(mode_pair(UNSOCIAL_OPTIMISTIC)))
    assert cmp.predicted["phi"][-1] == pytest.approx(500 / 3)
    assert np.array_equal(cmp.simulated["phi"], rep.phi_cum)
    assert cmp.mse["phi"] == pytest.approx(cmp.mse_counts["phi"] / 500**2)
    lines = cmp.curves_csv().splitlines()
    assert lines[0] == "iteration,phi_sim,phi_pred,psi_sim,psi_pred" and len(lines) == 501
