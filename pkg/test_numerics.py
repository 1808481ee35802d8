"""Tests for the dense Hermitian linear algebra layer"""
import numpy as np
import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from coherence.numerics import (
    _jacobi_eigh,
    commutator,
    dagger,
    eigenspaces,
    func_hermitian,
    hermitian_eig,
    is_hermitian,
    is_unitary,
    kron,
    operator_norm,
    partial_trace,
    psd_sqrt,
    spectral_range,
    trace_norm,
)
from utils.error_handler import ConvergenceError, NotPSDError, ValidationError

MAX_DIMENSION = 6
ENTRY_BOUND = 1e3
TOLERANCE = 1e-9

entries = st.floats(min_value=-ENTRY_BOUND, max_value=ENTRY_BOUND, allow_nan=False, allow_infinity=False)


def _hermitian_from(real, imag):
    g = real + 1j * imag
    return (g + dagger(g)) / 2.0


@seed(7)
@settings(max_examples=60, deadline=None)
@given(
    dim=st.integers(min_value=1, max_value=MAX_DIMENSION),
    data=st.data(),
)
def test_jacobi_matches_lapack(dim, data):
    """Both eigensolvers agree on the spectrum and reconstruct the input"""
    real = data.draw(arrays(np.float64, (dim, dim), elements=entries))
    imag = data.draw(arrays(np.float64, (dim, dim), elements=entries))
    h = _hermitian_from(real, imag)
    scale = 1.0 + np.max(np.abs(h))

    jacobi = hermitian_eig(h, method="jacobi")
    lapack = hermitian_eig(h, method="lapack")

    assert np.allclose(jacobi.eigenvalues, lapack.eigenvalues, atol=TOLERANCE * scale)
    assert np.all(np.diff(jacobi.eigenvalues) >= 0)
    assert np.allclose(jacobi.reconstruct(), h, atol=TOLERANCE * scale)
    assert is_unitary(jacobi.eigenvectors, tol=1e-9)


def test_auto_method_switches_to_lapack_for_large_inputs():
    rng = np.random.default_rng(3)
    g = rng.standard_normal((80, 80)) + 1j * rng.standard_normal((80, 80))
    h = (g + dagger(g)) / 2.0
    spectrum = hermitian_eig(h, method="auto")
    assert np.allclose(spectrum.reconstruct(), h, atol=1e-9)


def test_non_hermitian_input_is_rejected():
    with pytest.raises(ValidationError):
        hermitian_eig(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_unknown_method_is_rejected():
    with pytest.raises(ValidationError):
        hermitian_eig(np.eye(2), method="qr")


def test_jacobi_sweep_budget_raises_convergence_error():
    rng = np.random.default_rng(5)
    g = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
    with pytest.raises(ConvergenceError) as excinfo:
        _jacobi_eigh((g + dagger(g)) / 2.0, max_sweeps=0)
    assert excinfo.value.sweeps == 0


def test_eigenspaces_groups_degenerate_levels():
    h = np.diag([1.0, -1.0, 1.0 + 1e-12, 0.0]).astype(np.complex128)
    blocks = eigenspaces(h)
    assert [round(value, 9) for value, _ in blocks] == [-1.0, 0.0, 1.0]
    assert [basis.shape[1] for _, basis in blocks] == [1, 1, 2]


def test_partial_trace_of_product():
    rng = np.random.default_rng(11)
    a = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    b = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    product = kron(a, b)
    assert np.allclose(partial_trace(product, "S", (2, 3)), np.trace(b) * a)
    assert np.allclose(partial_trace(product, "E", (2, 3)), np.trace(a) * b)
    with pytest.raises(ValidationError):
        partial_trace(product, "S", (3, 3))


def test_kron_is_associative():
    for trial in range(100):
        rng = np.random.default_rng([31, trial])
        a, b, c = (rng.integers(-3, 4, size=(d, d)) + 1j * rng.integers(-3, 4, size=(d, d))
                   for d in rng.integers(1, 4, size=3))
        # small Gaussian integers multiply without rounding
        assert np.array_equal(kron(kron(a, b), c), kron(a, kron(b, c)))


def test_psd_sqrt_squares_back_and_clamps():
    rng = np.random.default_rng(2)
    g = rng.standard_normal((4, 2)) + 1j * rng.standard_normal((4, 2))
    p = g @ dagger(g)
    root = psd_sqrt(p)
    assert is_hermitian(root)
    assert np.allclose(root @ root, p, atol=1e-10)

    nearly = np.diag([1.0, -5e-11])
    assert np.allclose(psd_sqrt(nearly), np.diag([1.0, 0.0]))
    with pytest.raises(NotPSDError):
        psd_sqrt(np.diag([1.0, -1e-6]))


def test_norms_and_range():
    h = np.diag([-3.0, 1.0, 2.0]).astype(np.complex128)
    assert operator_norm(h, hermitian=True) == pytest.approx(3.0)
    assert operator_norm(h) == pytest.approx(3.0)
    assert trace_norm(h) == pytest.approx(6.0)
    assert spectral_range(h) == pytest.approx((-3.0, 2.0))
    assert np.allclose(func_hermitian(h, np.abs), np.diag([3.0, 1.0, 2.0]))

    x = np.array([[0, 1], [1, 0]], dtype=np.complex128)
    z = np.diag([1.0, -1.0]).astype(np.complex128)
    assert np.allclose(commutator(x, z), np.array([[0, -2], [2, 0]]))
    with pytest.raises(ValidationError):
        commutator(x, np.eye(3))


def test_reconstruction_over_seeded_instances():
    for trial in range(1000):
        rng = np.random.default_rng([17, trial])
        dim = int(rng.integers(1, 13))
        g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        h = (g + dagger(g)) / 2.0
        spectrum = hermitian_eig(h)
        v = spectrum.eigenvectors
        assert operator_norm(spectrum.reconstruct() - h) <= 1e-9 * (1.0 + operator_norm(h, hermitian=True))
        assert operator_norm(dagger(v) @ v - np.eye(dim)) <= 1e-10
