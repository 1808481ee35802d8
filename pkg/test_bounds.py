"""Tests for the closed-form bounds, region classification and χ"""
import math

import numpy as np
import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st

from coherence.bounds import (
    NormConvention,
    Region,
    chi,
    classify_region,
    domain_limit,
    effective_norm,
    erasure_bound,
    evaluate_bounds,
    region_boundaries,
    single_state_bound,
    theorem1_bound,
    theorem2_bound,
    theorem3_bound,
)
from coherence.models import bitflip_target, erasure_target
from coherence.states import PureState
from utils.error_handler import OutOfDomainError, ValidationError

SQRT2 = math.sqrt(2.0)


def test_bit_flip_boundaries_at_a_tenth():
    lower, upper, domain_ok = region_boundaries(1.0, 0.5, 0.1)
    assert lower == pytest.approx(8.0, abs=1e-12)
    assert upper == pytest.approx(10.0 + SQRT2 / 2.0, abs=1e-12)
    assert upper == pytest.approx(10.7071, abs=1e-4)
    assert domain_ok


def test_achievability_domain():
    assert domain_limit(1.0, 0.5) == pytest.approx(8.0 * SQRT2 / 9.0)
    assert domain_limit(1.0, 0.5) == pytest.approx(1.2571, abs=1e-4)
    assert domain_limit(1.0, 0.0) == math.inf
    _, ok = theorem2_bound(1.0, 1.3, 0.5)
    assert not ok
    # past the domain the B boundary stays at its value on the domain edge
    _, upper, domain_ok = region_boundaries(1.0, 0.5, 1.3)
    assert not domain_ok
    assert upper == pytest.approx(1.0 / domain_limit(1.0, 0.5) + SQRT2 / 2.0)


def test_closed_form_examples():
    assert theorem1_bound(1.0, 0.05, 1.0) == pytest.approx(16.0)
    assert theorem1_bound(1.0, 1.0, 0.5) == 0.0
    assert theorem3_bound(1.0, 0.01, 0.1, 0.5) == pytest.approx(6.9)
    assert single_state_bound(1.0, 0.02, 0.5) == pytest.approx(8.0)
    assert erasure_bound(0.01) == pytest.approx(10.142, abs=1e-3)
    assert erasure_bound(0.5) == 0.0


def test_bounds_reject_bad_errors():
    with pytest.raises(ValidationError):
        theorem1_bound(1.0, 0.0, 0.5)
    with pytest.raises(OutOfDomainError):
        theorem1_bound(1.0, 1.5, 0.5)
    with pytest.raises(ValidationError):
        single_state_bound(1.0, -0.1, 0.5)
    with pytest.raises(ValidationError):
        classify_region(1.0, 0.5, 0.1, -1.0)


def test_classify_region():
    assert classify_region(1.0, 0.5, 0.1, 5.0) is Region.A
    assert classify_region(1.0, 0.5, 0.1, 9.0) is Region.NEITHER
    assert classify_region(1.0, 0.5, 0.1, 11.0) is Region.B


@seed(11)
@settings(max_examples=300, deadline=None)
@given(
    asym=st.floats(min_value=0.0, max_value=10.0),
    norm=st.floats(min_value=0.01, max_value=5.0),
    delta=st.floats(min_value=1e-3, max_value=SQRT2),
)
def test_regions_are_separated(asym, norm, delta):
    """The A boundary sits strictly below the B boundary, so no point is in both"""
    lower, upper, _ = region_boundaries(asym, norm, delta)
    assert lower < upper
    assert classify_region(asym, norm, delta, upper) is Region.B
    if lower > 1e-6:
        assert classify_region(asym, norm, delta, lower * (1.0 - 1e-9)) is Region.A


def test_effective_norm_conventions():
    assert effective_norm(bitflip_target().A_S) == pytest.approx(0.5)
    assert effective_norm(bitflip_target().A_S, NormConvention.SHIFTED) == pytest.approx(1.0)
    assert effective_norm(erasure_target().A_S) == pytest.approx(1.0)
    assert effective_norm(erasure_target().A_S, NormConvention.SHIFTED) == pytest.approx(2.0)


def test_chi_for_bit_flip():
    target = bitflip_target()
    basis = [PureState.basis(2, 0), PureState.basis(2, 1)]
    plus = PureState.normalized([1.0, 1.0])
    assert chi(plus, basis, target) == pytest.approx(1.0)
    assert chi(PureState.basis(2, 0), basis, target) == pytest.approx(0.0, abs=1e-12)
    assert chi(plus.density(), basis, target) == pytest.approx(1.0)


def test_chi_rejects_bad_bases():
    target = bitflip_target()
    plus = PureState.normalized([1.0, 1.0])
    with pytest.raises(ValidationError):
        chi(plus, [PureState.basis(2, 0), plus], target)
    with pytest.raises(ValidationError):
        chi(plus, [PureState.basis(2, 0)], target)
    with pytest.raises(ValidationError):
        chi(plus, [], target)


def test_chi_on_a_partial_basis():
    target = erasure_target()
    basis = [PureState.basis(4, 0), PureState.basis(4, 3)]
    bell = PureState.normalized(np.array([1.0, 0.0, 0.0, 1.0]))
    assert chi(bell, basis, target) == pytest.approx(1.0)


def test_evaluate_bounds_report():
    reports = evaluate_bounds(bitflip_target(), 0.1, sqrtF=12.0, asym_violation=0.01)
    assert [r.bound_name for r in reports] == ["theorem1", "theorem2", "theorem3"]
    assert [r.value for r in reports] == pytest.approx([8.0, 10.0 + SQRT2 / 2.0, 6.9])
    assert all(r.inputs["sqrtF"] == 12.0 for r in reports)
    assert not reports[0].clamped

    far = evaluate_bounds(bitflip_target(), 1.3)
    assert far[0].clamped and far[0].value == 0.0
    assert not far[1].domain_ok
    assert far[1].to_dict()["bound"] == "theorem2"
