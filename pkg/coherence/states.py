"""Validated quantum states and operators, with the fidelity-based distances built on them"""
from dataclasses import dataclass
from typing import Union

import numpy as np

from coherence.numerics import (
    ComplexMatrix,
    HERMITIAN_TOL,
    PSD_CLAMP,
    as_matrix,
    dagger,
    hermitian_eig,
    is_hermitian,
    is_unitary,
    partial_trace,
    psd_sqrt,
    require_square,
)
from utils.error_handler import NotPSDError, ValidationError

NORM_TOL = 1e-12
TRACE_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class HermitianObservable:
    """A conserved quantity such as A_S or A_E."""

    mat: ComplexMatrix

    def __post_init__(self):
        mat = require_square(self.mat, "observable")
        if not is_hermitian(mat):
            raise ValidationError("observable is not Hermitian within 1e-10")
        object.__setattr__(self, "mat", (mat + dagger(mat)) / 2.0)

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    def shifted(self) -> "HermitianObservable":
        """The same observable with its minimal eigenvalue moved to zero."""
        lowest = hermitian_eig(self.mat).min
        return HermitianObservable(self.mat - lowest * np.eye(self.dim))


@dataclass(frozen=True, eq=False)
class UnitaryGate:
    """A unitary such as the target U_S or the joint U_SE."""

    mat: ComplexMatrix

    def __post_init__(self):
        mat = require_square(self.mat, "unitary")
        if not is_unitary(mat):
            raise ValidationError("gate is not unitary within 1e-10")
        object.__setattr__(self, "mat", mat)

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    def dagger(self) -> "UnitaryGate":
        return UnitaryGate(dagger(self.mat))

    @classmethod
    def identity(cls, dim: int) -> "UnitaryGate":
        return cls(np.eye(dim, dtype=np.complex128))


@dataclass(frozen=True, eq=False)
class PureState:
    """A normalized state vector."""

    vec: np.ndarray

    def __post_init__(self):
        vec = np.asarray(self.vec, dtype=np.complex128).reshape(-1)
        if vec.size < 1 or not np.all(np.isfinite(vec)):
            raise ValidationError("state vector must be non-empty and finite")
        if abs(np.linalg.norm(vec) - 1.0) > NORM_TOL:
            raise ValidationError(f"state vector norm {np.linalg.norm(vec):.15f} differs from 1")
        object.__setattr__(self, "vec", vec)

    @property
    def dim(self) -> int:
        return self.vec.size

    @classmethod
    def normalized(cls, vec) -> "PureState":
        vec = np.asarray(vec, dtype=np.complex128).reshape(-1)
        norm = np.linalg.norm(vec)
        if norm == 0.0:
            raise ValidationError("cannot normalize the zero vector")
        return cls(vec / norm)

    @classmethod
    def basis(cls, dim: int, index: int) -> "PureState":
        vec = np.zeros(dim, dtype=np.complex128)
        vec[index] = 1.0
        return cls(vec)

    def projector(self) -> ComplexMatrix:
        return np.outer(self.vec, np.conj(self.vec))

    def density(self) -> "DensityMatrix":
        return DensityMatrix(self.projector())


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """A Hermitian, positive semidefinite, unit-trace operator."""

    mat: ComplexMatrix

    def __post_init__(self):
        mat = require_square(self.mat, "density matrix")
        if not is_hermitian(mat):
            raise ValidationError("density matrix is not Hermitian within 1e-10")
        mat = (mat + dagger(mat)) / 2.0
        trace = np.trace(mat).real
        if abs(trace - 1.0) > TRACE_TOL:
            raise ValidationError(f"density matrix trace {trace:.15f} differs from 1")
        lowest = hermitian_eig(mat).min
        if lowest < PSD_CLAMP:
            raise NotPSDError(lowest, "density matrix")
        object.__setattr__(self, "mat", mat)

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    @classmethod
    def maximally_mixed(cls, dim: int) -> "DensityMatrix":
        return cls(np.eye(dim, dtype=np.complex128) / dim)

    @classmethod
    def from_weights(cls, weights, states) -> "DensityMatrix":
        mat = sum(w * s.projector() for w, s in zip(weights, states))
        return cls(mat)


AnyState = Union[DensityMatrix, PureState]


def density_of(state: AnyState) -> DensityMatrix:
    return state.density() if isinstance(state, PureState) else state


def state_matrix(state: AnyState) -> ComplexMatrix:
    return state.projector() if isinstance(state, PureState) else state.mat


def _check_dims(a: AnyState, b: AnyState):
    if a.dim != b.dim:
        raise ValidationError(f"dimension mismatch: {a.dim} vs {b.dim}")


def fidelity(rho: AnyState, sigma: AnyState) -> float:
    """
    Root fidelity Tr[√(√ρ σ √ρ)].

    Pure arguments use the overlap form, which equals the general formula.
    """
    _check_dims(rho, sigma)
    if isinstance(rho, PureState) and isinstance(sigma, PureState):
        return float(abs(np.vdot(rho.vec, sigma.vec)))
    if isinstance(rho, PureState) or isinstance(sigma, PureState):
        pure, mixed = (rho, sigma) if isinstance(rho, PureState) else (sigma, rho)
        overlap = np.real(np.vdot(pure.vec, mixed.mat @ pure.vec))
        return float(np.sqrt(max(overlap, 0.0)))

    root = psd_sqrt(rho.mat, "first fidelity argument")
    inner = root @ sigma.mat @ root
    inner = (inner + dagger(inner)) / 2.0
    values = hermitian_eig(inner).eigenvalues
    if values[0] < PSD_CLAMP:
        raise NotPSDError(values[0], "fidelity inner product")
    return float(np.sum(np.sqrt(np.clip(values, 0.0, None))))


def bures_distance(rho: AnyState, sigma: AnyState) -> float:
    """L(ρ, σ) = √(2(1 − F(ρ, σ)))."""
    return float(np.sqrt(max(0.0, 2.0 * (1.0 - fidelity(rho, sigma)))))


def purify(rho: AnyState) -> PureState:
    """
    Canonical purification Σ_a √p_a |ψ_a⟩ ⊗ |a⟩ on S⊗R with d_R = d_S.

    Eigenpairs are taken in ascending order, so a pure input lands on the
    last reference basis vector.
    """
    if isinstance(rho, PureState):
        rho = rho.density()
    spectrum = hermitian_eig(rho.mat)
    weights = np.sqrt(np.clip(spectrum.eigenvalues, 0.0, None))
    amplitudes = spectrum.eigenvectors * weights
    return PureState.normalized(amplitudes.reshape(-1))


def reduced_state(state: PureState, dims, keep: str = "S") -> DensityMatrix:
    """Reduced density matrix of a bipartite pure state."""
    d_s, d_r = dims
    if state.dim != d_s * d_r:
        raise ValidationError(f"state of dim {state.dim} does not split as {dims}")
    psi = state.vec.reshape(d_s, d_r)
    if keep == "S":
        mat = psi @ dagger(psi)
    else:
        mat = (dagger(psi) @ psi).T
    return DensityMatrix(mat)


def reduced_operator(mat: ComplexMatrix, dims, keep: str = "S") -> DensityMatrix:
    return DensityMatrix(partial_trace(as_matrix(mat), keep, dims))


def expectation(state: AnyState, op: ComplexMatrix) -> float:
    if isinstance(state, PureState):
        return float(np.real(np.vdot(state.vec, op @ state.vec)))
    return float(np.real(np.trace(state.mat @ op)))


__all__ = [
    "AnyState",
    "DensityMatrix",
    "HERMITIAN_TOL",
    "HermitianObservable",
    "PureState",
    "UnitaryGate",
    "bures_distance",
    "density_of",
    "expectation",
    "fidelity",
    "purify",
    "reduced_operator",
    "reduced_state",
    "state_matrix",
]
