"""Tests for the randomized inequality suites"""
import math

import numpy as np
import pytest

from coherence.models import bitflip_target
from coherence.states import PureState
from coherence.suites import (
    SUITES,
    CheckOutcome,
    check_violation,
    key_relation_gap,
    run_suite,
    time_ordered_bound,
)
from utils.error_handler import UnknownSuiteError, ValidationError

TRIALS = 20


@pytest.mark.parametrize("name", list(SUITES))
def test_suite_has_no_violations(name):
    outcome = run_suite(name, TRIALS, seed=42)
    assert outcome.suite_name == name
    assert outcome.checks >= 1
    assert outcome.violations == 0, outcome.worst_label
    assert outcome.passed


def test_suites_are_deterministic_per_seed():
    first = run_suite("lemma3", TRIALS, seed=7)
    second = run_suite("lemma3", TRIALS, seed=7)
    assert first.row() == second.row()


def test_key_relation_two_level_example():
    """A small Bures step can still move ⟨X⟩ a lot when X is large"""
    eps, x = 0.01, 100.0
    sigma1 = PureState.basis(2, 0)
    sigma2 = PureState.normalized([math.sqrt(1.0 - eps), math.sqrt(eps)])
    gap, bound = key_relation_gap(sigma1, sigma2, np.diag([0.0, x]))
    assert gap == pytest.approx(eps * x)
    assert gap <= bound


def test_key_relation_gap_outside_its_range():
    assert key_relation_gap(PureState.basis(2, 0), PureState.basis(2, 1), np.eye(2)) is None


def test_time_ordered_bound_for_bit_flip():
    zeta = 9.0 / (2.0 * math.sqrt(2.0))
    value = time_ordered_bound(bitflip_target(), zeta)
    assert 0.0 < value < 1.0
    assert time_ordered_bound(bitflip_target(), 10 * zeta) > value


def test_check_outcome_tracks_the_worst_margin():
    outcome = CheckOutcome("demo", trials=3, seed=1, slack=1e-8)
    outcome.observe(0.5, 1.0, "loose")
    outcome.observe(1.0, 1.0 - 1e-10, "within_slack")
    assert outcome.passed
    assert outcome.worst_label == "within_slack"
    outcome.observe(2.0, 1.0, "broken")
    assert outcome.violations == 1
    assert not outcome.passed
    assert outcome.row() == {"suite": "demo", "trials": 3, "violations": 1,
                             "worst_margin": -1.0, "seed": 1}


def test_run_suite_rejects_bad_requests():
    with pytest.raises(UnknownSuiteError):
        run_suite("lemma99", 5)
    with pytest.raises(ValidationError):
        run_suite("lemma3", 0)


def test_non_conserving_sets_respect_the_violation_bound():
    """Each trial checks the transfer inequality and √𝓕 against theorem3_bound at the searched δ"""
    outcome = check_violation(10, seed=5, max_strength=1.0)
    assert outcome.checks == 20
    assert outcome.violations == 0, outcome.worst_label
