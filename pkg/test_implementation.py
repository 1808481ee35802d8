"""Tests for implementation sets, induced channels, error searches and model files"""
import json

import numpy as np
import pytest
from scipy.linalg import expm

from coherence.channels import channel_from_unitary, choi_distance
from coherence.implementation import (
    ImplementationSet,
    TargetSpec,
    conservation_residual,
    deltabar,
    environment_output,
    error_for_state,
    induced_channel,
    mixing_deltas,
    realizes_within,
    worst_case_error,
)
from coherence.models import (
    BUILTIN_MODELS,
    bitflip_target,
    builtin_model,
    load_model,
    model_document,
    parse_model,
)
from coherence.numerics import dagger, kron
from coherence.sampling import haar_unitary, random_density, random_pure_state, random_target, trial_rng
from coherence.states import DensityMatrix, HermitianObservable, PureState, UnitaryGate
from utils.error_handler import ModelFileError, ValidationError

PAULI_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
PAULI_Z = np.diag([1.0, -1.0]).astype(np.complex128)


def _product_implementation(target, d_E, rng, rho_E=None):
    u_e = haar_unitary(d_E, rng)
    A_E = HermitianObservable(np.diag(np.arange(d_E, dtype=float)).astype(np.complex128))
    rho_E = rho_E or random_density(d_E, rng)
    return ImplementationSet(target.d_S, A_E, rho_E, UnitaryGate(kron(target.U_S.mat, u_e))), u_e


def _rotation_implementation(theta):
    """exp(−iθX) on S with an idle qubit environment"""
    u_s = expm(-1j * theta * PAULI_X)
    A_E = HermitianObservable(np.diag([0.0, 1.0]).astype(np.complex128))
    return ImplementationSet(2, A_E, PureState.basis(2, 0), UnitaryGate(kron(u_s, np.eye(2))))


def test_product_unitary_induces_the_target_channel():
    for trial in range(20):
        rng = trial_rng(30, trial)
        target = random_target(int(rng.integers(2, 4)), rng)
        impl, _ = _product_implementation(target, int(rng.integers(1, 4)), rng)
        assert choi_distance(induced_channel(impl), channel_from_unitary(target.U_S.mat)) < 1e-10


def test_induced_channel_rejects_wrong_dimension():
    rng = np.random.default_rng(0)
    impl, _ = _product_implementation(bitflip_target(), 2, rng)
    with pytest.raises(ValidationError):
        induced_channel(impl, d_S=3)


def test_exact_implementation_has_zero_error():
    rng = np.random.default_rng(31)
    target = bitflip_target()
    impl, _ = _product_implementation(target, 3, rng)
    report = worst_case_error(impl, target, seed=5, starts=2, random_probes=2)
    assert report.worst_delta == pytest.approx(0.0, abs=1e-6)
    assert realizes_within(impl, target, 1e-6, seed=5, starts=2, random_probes=2)
    assert deltabar(impl, target, random_density(2, rng),
                    [PureState.basis(2, 0), PureState.basis(2, 1)]) == pytest.approx(0.0, abs=1e-6)


def test_idle_implementation_of_bit_flip_has_maximal_error():
    target = bitflip_target()
    idle = ImplementationSet(2, HermitianObservable(np.zeros((1, 1))), PureState.basis(1, 0),
                             UnitaryGate(np.eye(2)))
    report = worst_case_error(idle, target, seed=3)
    assert report.worst_delta == pytest.approx(np.sqrt(2.0), abs=1e-9)
    assert report.to_dict()["probes"]["basis_0"] == pytest.approx(np.sqrt(2.0), abs=1e-9)
    assert not realizes_within(idle, target, 1.0, seed=3)


def test_worst_case_error_dominates_every_probe_and_state():
    rng = np.random.default_rng(32)
    target = bitflip_target()
    noisy = expm(-1j * 0.3 * (kron(PAULI_X, PAULI_X) + kron(PAULI_Z, np.eye(2))))
    impl = ImplementationSet(2, HermitianObservable(np.diag([0.0, 1.0])), PureState.basis(2, 0),
                             UnitaryGate(kron(target.U_S.mat, np.eye(2)) @ noisy))
    report = worst_case_error(impl, target, seed=11)
    assert report.worst_delta >= max(value for _, value in report.probe_deltas) - 1e-12
    for _ in range(20):
        psi = random_pure_state(2, rng)
        assert error_for_state(impl, target, psi) <= report.worst_delta + 1e-6


@pytest.mark.parametrize("theta", [0.0, 0.1, 0.7, np.pi / 2, 2.5])
def test_conservation_residual_of_a_rotation(theta):
    target = TargetSpec(HermitianObservable(PAULI_Z), UnitaryGate(np.eye(2)))
    residual = conservation_residual(_rotation_implementation(theta), target.A_S)
    assert residual.op_norm == pytest.approx(2.0 * abs(np.sin(theta)), abs=1e-9)
    assert residual.state_weighted == pytest.approx(2.0 * abs(np.sin(theta)), abs=1e-9)


def test_environment_output_of_a_product_unitary():
    rng = np.random.default_rng(33)
    target = bitflip_target()
    impl, u_e = _product_implementation(target, 3, rng)
    out = environment_output(impl, random_pure_state(2, rng))
    assert np.allclose(out.mat, u_e @ impl.rho_E.mat @ dagger(u_e), atol=1e-10)


def test_mixing_deltas():
    rng = np.random.default_rng(34)
    target = bitflip_target()
    noisy = expm(-1j * 0.2 * kron(PAULI_X, PAULI_X))
    A_E = HermitianObservable(np.diag([0.0, 1.0]))
    rho_E = DensityMatrix(np.diag([0.6, 0.4]))
    impl = ImplementationSet(2, A_E, rho_E, UnitaryGate(kron(target.U_S.mat, np.eye(2)) @ noisy))
    rho_S = random_density(2, rng)
    components = [(0.6, PureState.basis(2, 0)), (0.4, PureState.basis(2, 1))]
    averaged, mixed = mixing_deltas(impl, target, rho_S, components)
    assert 0.0 < mixed
    assert averaged <= 2.0 * mixed + 1e-9
    with pytest.raises(ValidationError):
        mixing_deltas(impl, target, rho_S, [(1.0, PureState.basis(2, 0))])


def test_deltabar_dominates_the_state_error():
    for trial in range(20):
        rng = trial_rng(35, trial)
        target = random_target(2, rng)
        impl = ImplementationSet(2, HermitianObservable(np.diag([0.0, 1.0])), PureState.basis(2, 0),
                                 UnitaryGate(haar_unitary(4, rng)))
        rho_S = random_density(2, rng)
        basis = [PureState.normalized(v) for v in haar_unitary(2, rng).T]
        assert deltabar(impl, target, rho_S, basis) >= error_for_state(impl, target, rho_S) - 1e-12


def test_implementation_set_validation():
    A_E = HermitianObservable(np.diag([0.0, 1.0]))
    with pytest.raises(ValidationError):
        ImplementationSet(2, A_E, PureState.basis(3, 0), UnitaryGate(np.eye(4)))
    with pytest.raises(ValidationError):
        ImplementationSet(2, A_E, PureState.basis(2, 0), UnitaryGate(np.eye(6)))
    with pytest.raises(ValidationError):
        TargetSpec(HermitianObservable(np.eye(2)), UnitaryGate(np.eye(3)))


def test_model_document_parses_back():
    for name in BUILTIN_MODELS:
        target = builtin_model(name)
        parsed = parse_model(json.loads(json.dumps(model_document(target))))
        assert parsed.name == name
        assert np.allclose(parsed.A_S.mat, target.A_S.mat)
        assert np.allclose(parsed.U_S.mat, target.U_S.mat)


def test_load_model_from_file(tmp_path):
    path = tmp_path / "model.json"
    path.write_text(json.dumps(model_document(bitflip_target())))
    assert load_model(path).d_S == 2

    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    with pytest.raises(ModelFileError):
        load_model(broken)


@pytest.mark.parametrize("document", [
    [],
    {"d_S": 2, "A_S": []},
    {"d_S": True, "A_S": [], "U_S": []},
    {"d_S": 1, "A_S": [[1, 0], [0, 0]], "U_S": [[1, 0]]},
    {"d_S": 1, "A_S": [["1", 0]], "U_S": [[1, 0]]},
])
def test_malformed_model_documents(document):
    with pytest.raises(ModelFileError):
        parse_model(document)


def test_model_with_non_unitary_gate_is_rejected():
    document = {"d_S": 1, "A_S": [[1, 0]], "U_S": [[2, 0]]}
    with pytest.raises(ValidationError):
        parse_model(document)
    with pytest.raises(ValidationError):
        builtin_model("toffoli")
