"""Tests for states, fidelities and channels"""
import numpy as np
import pytest

from coherence.channels import (
    Channel,
    apply_channel,
    channel_from_kraus,
    channel_from_unitary,
    compose_channels,
    constant_channel,
    entanglement_bures,
    entanglement_fidelity,
    entanglement_fidelity_squared,
    identity_channel,
    kraus_operators,
    choi_distance,
)
from coherence.numerics import dagger, partial_trace, trace_norm
from coherence.sampling import haar_unitary, random_density, random_pure_state, random_state, trial_rng
from coherence.states import (
    DensityMatrix,
    HermitianObservable,
    PureState,
    UnitaryGate,
    bures_distance,
    density_of,
    fidelity,
    purify,
    reduced_state,
)
from utils.error_handler import NotPSDError, ValidationError

INSTANCES = 1000


def _amplitude_damping(gamma):
    k0 = np.array([[1.0, 0.0], [0.0, np.sqrt(1.0 - gamma)]])
    k1 = np.array([[0.0, np.sqrt(gamma)], [0.0, 0.0]])
    return channel_from_kraus([k0, k1])


def test_state_validation():
    with pytest.raises(ValidationError):
        PureState(np.array([1.0, 1.0]))
    with pytest.raises(ValidationError):
        DensityMatrix(np.diag([0.5, 0.6]))
    with pytest.raises(NotPSDError):
        DensityMatrix(np.diag([1.5, -0.5]))
    with pytest.raises(ValidationError):
        HermitianObservable(np.array([[0.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(ValidationError):
        UnitaryGate(np.array([[1.0, 1.0], [0.0, 1.0]]))


def test_shifted_observable_has_zero_minimum():
    shifted = HermitianObservable(np.diag([-0.5, 0.5])).shifted()
    assert np.allclose(shifted.mat, np.diag([0.0, 1.0]))


def test_fidelity_forms_agree():
    """The overlap shortcuts match the general √ρσ√ρ formula"""
    for trial in range(50):
        rng = trial_rng(21, trial)
        dim = int(rng.integers(2, 5))
        psi = random_pure_state(dim, rng)
        phi = random_pure_state(dim, rng)
        sigma = random_density(dim, rng)
        general = fidelity(psi.density(), phi.density())
        assert fidelity(psi, phi) == pytest.approx(general, abs=1e-6)
        assert fidelity(psi, sigma) == pytest.approx(fidelity(psi.density(), sigma), abs=1e-6)
        assert fidelity(sigma, psi) == pytest.approx(fidelity(psi, sigma), abs=1e-12)


def test_bures_distance_extremes():
    zero = PureState.basis(2, 0)
    one = PureState.basis(2, 1)
    assert bures_distance(zero, zero) == pytest.approx(0.0)
    assert bures_distance(zero, one) == pytest.approx(np.sqrt(2.0))
    with pytest.raises(ValidationError):
        fidelity(zero, PureState.basis(3, 0))


def test_bures_triangle_inequality():
    for trial in range(500):
        rng = trial_rng(51, trial)
        dim = int(rng.integers(2, 5))
        a, b, c = (random_state(dim, rng) for _ in range(3))
        assert bures_distance(a, c) <= bures_distance(a, b) + bures_distance(b, c) + 1e-9


def _reduce(rho, dims):
    reduced = partial_trace(rho.mat, "S", dims)
    return DensityMatrix((reduced + dagger(reduced)) / 2.0)


def test_bures_distance_contracts_under_partial_trace():
    for trial in range(500):
        rng = trial_rng(52, trial)
        dims = (int(rng.integers(2, 4)), int(rng.integers(2, 4)))
        rho = density_of(random_state(dims[0] * dims[1], rng))
        sigma = density_of(random_state(dims[0] * dims[1], rng))
        assert bures_distance(_reduce(rho, dims), _reduce(sigma, dims)) <= bures_distance(rho, sigma) + 1e-9


def test_trace_distance_is_bounded_by_fidelity():
    """‖ρ − σ‖₁ ≤ 2√(1 − F²)"""
    for trial in range(500):
        rng = trial_rng(53, trial)
        dim = int(rng.integers(2, 5))
        rho = density_of(random_state(dim, rng))
        sigma = density_of(random_state(dim, rng))
        f = fidelity(rho, sigma)
        assert trace_norm(rho.mat - sigma.mat) <= 2.0 * np.sqrt(max(0.0, 1.0 - f ** 2)) + 1e-9


def test_purification_reduces_to_the_state():
    for trial in range(20):
        rng = trial_rng(4, trial)
        rho = random_density(3, rng, rank=int(rng.integers(1, 4)))
        psi = purify(rho)
        assert np.allclose(reduced_state(psi, (3, 3), "S").mat, rho.mat, atol=1e-10)


def test_unitary_channel_and_composition():
    rng = np.random.default_rng(8)
    u = haar_unitary(3, rng)
    v = haar_unitary(3, rng)
    rho = random_density(3, rng).mat
    channel = channel_from_unitary(u)
    assert np.allclose(apply_channel(channel, rho), u @ rho @ dagger(u))

    composed = compose_channels(channel_from_unitary(v), channel)
    assert choi_distance(composed, channel_from_unitary(v @ u)) < 1e-10
    undo = compose_channels(channel_from_unitary(dagger(u)), channel)
    assert choi_distance(undo, identity_channel(3)) < 1e-10


def test_kraus_operators_rebuild_the_channel():
    channel = _amplitude_damping(0.3)
    kraus = kraus_operators(channel)
    assert len(kraus) == 2
    assert choi_distance(channel_from_kraus(kraus), channel) < 1e-10
    completeness = sum(dagger(k) @ k for k in kraus)
    assert np.allclose(completeness, np.eye(2), atol=1e-10)


def test_channel_rejects_non_trace_preserving_choi():
    with pytest.raises(ValidationError):
        Channel(np.eye(4, dtype=np.complex128), 2, 2)
    with pytest.raises(ValidationError):
        compose_channels(identity_channel(2), identity_channel(3))


def test_constant_channel_output():
    sigma = random_density(2, np.random.default_rng(1))
    channel = constant_channel(sigma, 3)
    rho = random_density(3, np.random.default_rng(2)).mat
    assert np.allclose(apply_channel(channel, rho), sigma.mat)


def test_entanglement_fidelity_of_identity_and_pure_inputs():
    rho = random_density(3, np.random.default_rng(9))
    assert entanglement_fidelity(rho, identity_channel(3)) == pytest.approx(1.0)
    assert entanglement_bures(rho, identity_channel(3)) == pytest.approx(0.0, abs=1e-7)

    # For a pure input F_e² = ⟨ψ|Λ(ψ)|ψ⟩
    damping = _amplitude_damping(0.4)
    plus = PureState.normalized([1.0, 1.0])
    out = apply_channel(damping, plus.projector())
    expected = np.real(np.vdot(plus.vec, out @ plus.vec))
    assert entanglement_fidelity(plus, damping) ** 2 == pytest.approx(expected)


def test_entanglement_fidelity_choi_quadratic_form():
    for trial in range(50):
        rng = trial_rng(13, trial)
        dim = int(rng.integers(2, 4))
        u = haar_unitary(dim * 2, rng)
        # Stinespring: isometry into S⊗ancilla, traced over the ancilla
        isometry = u[:, :dim].reshape(dim, 2, dim)
        channel = channel_from_kraus([isometry[:, k, :] for k in range(2)])
        rho = random_density(dim, rng)
        assert entanglement_fidelity_squared(channel, rho.mat) == pytest.approx(
            entanglement_fidelity(rho, channel) ** 2, abs=1e-10)


def test_entanglement_fidelity_is_purification_independent():
    """Any purification (any reference dimension, any unitary on R) gives one F_e"""
    for trial in range(INSTANCES):
        rng = trial_rng(42, trial)
        dim = int(rng.integers(2, 4))
        rho = density_of(random_state(dim, rng))
        u = haar_unitary(2 * dim, rng)
        channel = channel_from_kraus([u[:, :dim].reshape(dim, 2, dim)[:, k, :] for k in range(2)])

        canonical = purify(rho).vec.reshape(dim, dim)
        d_ref = dim + 1
        embedded = np.zeros((dim, d_ref), dtype=np.complex128)
        embedded[:, :dim] = canonical
        rotated = embedded @ haar_unitary(d_ref, rng).T
        other = PureState.normalized(rotated.reshape(-1))

        assert entanglement_fidelity(rho, channel, other) ** 2 == pytest.approx(
            entanglement_fidelity(rho, channel) ** 2, abs=1e-10)


def test_entanglement_fidelity_dimension_mismatch():
    with pytest.raises(ValidationError):
        entanglement_fidelity(PureState.basis(2, 0), identity_channel(3))
