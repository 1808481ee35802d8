"""
Dense complex linear algebra used throughout the toolkit.

Every operator is a two-dimensional numpy array of complex128 entries.
Tensor convention, fixed once for the whole package: the system S is the
LEFT Kronecker factor and a composite index is ``s * d_E + e``.
"""
import logging
from dataclasses import dataclass
from typing import Callable, List, Literal, Optional, Tuple

import numpy as np
import scipy.linalg

from config import Config
from utils.error_handler import ConvergenceError, NotPSDError, ValidationError
from utils.logger import get_logger, log_with_context

logger = get_logger(__name__)

ComplexMatrix = np.ndarray

HERMITIAN_TOL = 1e-10
PSD_CLAMP = -1e-10
JACOBI_TOL = 1e-13
JACOBI_MAX_SWEEPS = 100
DEGENERACY_TOL = 1e-9


def as_matrix(m, name: str = "matrix") -> ComplexMatrix:
    """
    Coerce input to a finite complex128 matrix.

    Raises:
        ValidationError: if the input is not two-dimensional or has NaN/Inf entries
    """
    arr = np.asarray(m, dtype=np.complex128)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValidationError(f"{name} must be a non-empty 2-D matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} has non-finite entries")
    return arr


def require_square(m: ComplexMatrix, name: str = "matrix") -> ComplexMatrix:
    arr = as_matrix(m, name)
    if arr.shape[0] != arr.shape[1]:
        raise ValidationError(f"{name} must be square, got shape {arr.shape}")
    return arr


def dagger(m: ComplexMatrix) -> ComplexMatrix:
    return np.conj(m).T


def _bounded_defect(defect: ComplexMatrix, reference: ComplexMatrix, tol: float) -> bool:
    """Check ‖defect‖_op ≤ tol·(1 + ‖reference‖_op), using Frobenius norms when they settle it."""
    n = reference.shape[0]
    fro_defect = np.linalg.norm(defect)
    if fro_defect <= tol * (1.0 + np.linalg.norm(reference) / np.sqrt(n)):
        return True
    return np.linalg.norm(defect, 2) <= tol * (1.0 + np.linalg.norm(reference, 2))


def is_hermitian(h: ComplexMatrix, tol: float = HERMITIAN_TOL) -> bool:
    h = np.asarray(h)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        return False
    return _bounded_defect(h - dagger(h), h, tol)


def is_unitary(u: ComplexMatrix, tol: float = HERMITIAN_TOL) -> bool:
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    defect = dagger(u) @ u - np.eye(u.shape[0])
    fro = np.linalg.norm(defect)
    if fro <= tol:
        return True
    return np.linalg.norm(defect, 2) <= tol


@dataclass(frozen=True)
class Spectrum:
    """Eigendecomposition H = V diag(λ) V† with ascending real eigenvalues."""

    eigenvalues: np.ndarray
    eigenvectors: ComplexMatrix

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)

    @property
    def min(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def max(self) -> float:
        return float(self.eigenvalues[-1])

    def vector(self, k: int) -> np.ndarray:
        return self.eigenvectors[:, k]

    def reconstruct(self) -> ComplexMatrix:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ dagger(v)


def _off_diagonal_norm(a: ComplexMatrix) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.linalg.norm(off))


def _jacobi_eigh(h: ComplexMatrix, tol: float = JACOBI_TOL,
                 max_sweeps: int = JACOBI_MAX_SWEEPS) -> Tuple[np.ndarray, ComplexMatrix]:
    """Cyclic complex Jacobi rotations. Returns unsorted (eigenvalues, eigenvectors)."""
    a = np.array(h, dtype=np.complex128, copy=True)
    n = a.shape[0]
    v = np.eye(n, dtype=np.complex128)
    threshold = tol * np.linalg.norm(a)
    tiny = np.finfo(float).tiny

    sweep = 0
    off = _off_diagonal_norm(a)
    while off > threshold:
        if sweep == max_sweeps:
            raise ConvergenceError(off, max_sweeps)
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag <= tiny:
                    continue
                phase = np.conj(apq) / mag
                tau = (a[q, q].real - a[p, p].real) / (2.0 * mag)
                t = (1.0 if tau >= 0.0 else -1.0) / (abs(tau) + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                # Phase-fix column q, then a real rotation annihilates a[p, q]
                rot = np.array([[c, s], [-s * phase, c * phase]], dtype=np.complex128)
                idx = [p, q]
                a[:, idx] = a[:, idx] @ rot
                a[idx, :] = dagger(rot) @ a[idx, :]
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                v[:, idx] = v[:, idx] @ rot
        sweep += 1
        off = _off_diagonal_norm(a)

    log_with_context(logger, logging.DEBUG, "Jacobi converged",
                     dim=n, sweeps=sweep, off_diagonal=off)
    return np.real(np.diag(a)).copy(), v


def hermitian_eig(h: ComplexMatrix, method: Optional[str] = None) -> Spectrum:
    """
    Eigendecomposition of a Hermitian matrix.

    Args:
        h: Hermitian matrix
        method: "jacobi", "lapack" or "auto" (Jacobi up to Config.JACOBI_MAX_DIM,
            LAPACK above); defaults to Config.EIGEN_METHOD

    Returns:
        Spectrum with ascending eigenvalues and orthonormal eigenvector columns

    Raises:
        ValidationError: non-square or non-Hermitian input
        ConvergenceError: Jacobi sweep budget exhausted
    """
    h = require_square(h, "Hermitian input")
    if not is_hermitian(h):
        raise ValidationError("eigendecomposition input is not Hermitian within 1e-10")
    h = (h + dagger(h)) / 2.0

    method = method or Config.EIGEN_METHOD
    if method == "auto":
        method = "jacobi" if h.shape[0] <= Config.JACOBI_MAX_DIM else "lapack"

    if method == "jacobi":
        values, vectors = _jacobi_eigh(h)
    elif method == "lapack":
        values, vectors = scipy.linalg.eigh(h)
    else:
        raise ValidationError(f"Unknown eigensolver method '{method}'")

    order = np.argsort(values, kind="stable")
    return Spectrum(eigenvalues=np.asarray(values[order], dtype=float),
                    eigenvectors=np.ascontiguousarray(vectors[:, order]))


def func_hermitian(h: ComplexMatrix, f: Callable[[np.ndarray], np.ndarray],
                   method: Optional[str] = None) -> ComplexMatrix:
    """Return V f(Λ) V† for Hermitian h; f acts elementwise on the eigenvalue array."""
    spectrum = hermitian_eig(h, method)
    fv = np.asarray(f(spectrum.eigenvalues), dtype=np.complex128)
    v = spectrum.eigenvectors
    return (v * fv) @ dagger(v)


def psd_sqrt(p: ComplexMatrix, context: str = "matrix") -> ComplexMatrix:
    """
    Square root of a positive semidefinite matrix.

    Eigenvalues in [-1e-10, 0) are clamped to zero; anything lower is an error.
    """
    spectrum = hermitian_eig(p)
    if spectrum.min < PSD_CLAMP:
        raise NotPSDError(spectrum.min, context)
    roots = np.sqrt(np.clip(spectrum.eigenvalues, 0.0, None))
    v = spectrum.eigenvectors
    r = (v * roots) @ dagger(v)
    return (r + dagger(r)) / 2.0


def eigenspaces(h: ComplexMatrix, tol: float = DEGENERACY_TOL) -> List[Tuple[float, ComplexMatrix]]:
    """
    Group the spectrum of a Hermitian matrix into eigenspaces.

    Consecutive ascending eigenvalues closer than tol share a block.

    Returns:
        List of (eigenvalue, orthonormal basis columns) in ascending order
    """
    spectrum = hermitian_eig(h)
    values = spectrum.eigenvalues
    blocks = []
    start = 0
    for k in range(1, len(values) + 1):
        if k == len(values) or values[k] - values[k - 1] > tol:
            blocks.append((float(np.mean(values[start:k])), spectrum.eigenvectors[:, start:k]))
            start = k
    return blocks


def spectral_range(h: ComplexMatrix) -> Tuple[float, float]:
    """(λ_min, λ_max) of a Hermitian matrix."""
    spectrum = hermitian_eig(h)
    return spectrum.min, spectrum.max


def kron(a: ComplexMatrix, b: ComplexMatrix) -> ComplexMatrix:
    """A ⊗ B with A as the left (system) factor."""
    return np.kron(as_matrix(a, "left factor"), as_matrix(b, "right factor"))


def partial_trace(m: ComplexMatrix, keep: Literal["S", "E"], dims: Tuple[int, int]) -> ComplexMatrix:
    """
    Trace out one factor of a bipartite operator on S⊗E.

    Args:
        m: Operator of shape (d_S·d_E, d_S·d_E)
        keep: "S" to trace out E, "E" to trace out S
        dims: (d_S, d_E)
    """
    d_s, d_e = dims
    m = as_matrix(m)
    if m.shape != (d_s * d_e, d_s * d_e):
        raise ValidationError(f"partial_trace expects shape {(d_s * d_e,) * 2} for dims {dims}, got {m.shape}")
    t = m.reshape(d_s, d_e, d_s, d_e)
    if keep == "S":
        return np.einsum("ijkj->ik", t)
    elif keep == "E":
        return np.einsum("ijil->jl", t)
    raise ValidationError(f"keep must be 'S' or 'E', got '{keep}'")


def operator_norm(m: ComplexMatrix, hermitian: bool = False) -> float:
    """Largest singular value. For Hermitian input the spectrum is used directly."""
    m = require_square(m)
    if hermitian:
        values = scipy.linalg.eigvalsh((m + dagger(m)) / 2.0)
        return float(np.max(np.abs(values)))
    return float(np.linalg.norm(m, 2))


def trace_norm(m: ComplexMatrix) -> float:
    """Sum of singular values."""
    m = require_square(m)
    return float(np.linalg.norm(m, "nuc"))


def commutator(a: ComplexMatrix, b: ComplexMatrix) -> ComplexMatrix:
    a = require_square(a)
    b = require_square(b)
    if a.shape != b.shape:
        raise ValidationError(f"commutator operands differ in shape: {a.shape} vs {b.shape}")
    return a @ b - b @ a
