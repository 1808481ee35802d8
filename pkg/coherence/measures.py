"""Resource quantifiers: variance, quantum Fisher information, gate asymmetry and extremal states"""
from dataclasses import dataclass
from typing import Sequence, Tuple, Union

import numpy as np

from coherence.numerics import ComplexMatrix, dagger, hermitian_eig, require_square
from coherence.states import (
    AnyState,
    DensityMatrix,
    HermitianObservable,
    PureState,
    UnitaryGate,
    expectation,
)
from utils.error_handler import ValidationError

QFI_KERNEL_CUTOFF = 1e-12
WEIGHT_TOL = 1e-10

Observable = Union[HermitianObservable, ComplexMatrix]
Gate = Union[UnitaryGate, ComplexMatrix]


def _mat(x) -> ComplexMatrix:
    return require_square(getattr(x, "mat", x))


def _same_dim(state: AnyState, op: ComplexMatrix):
    if state.dim != op.shape[0]:
        raise ValidationError(f"state dim {state.dim} does not match operator dim {op.shape[0]}")


@dataclass(frozen=True, eq=False)
class Decomposition:
    """An ensemble {q_j, |φ_j⟩} of pure states."""

    weights: np.ndarray
    states: Tuple[PureState, ...]

    def __post_init__(self):
        weights = np.asarray(self.weights, dtype=float).reshape(-1)
        states = tuple(self.states)
        if len(weights) != len(states) or not states:
            raise ValidationError("decomposition needs one weight per state")
        if np.any(weights < -WEIGHT_TOL) or abs(weights.sum() - 1.0) > WEIGHT_TOL:
            raise ValidationError("decomposition weights must form a probability vector")
        if len({s.dim for s in states}) != 1:
            raise ValidationError("decomposition states must share one dimension")
        object.__setattr__(self, "weights", np.clip(weights, 0.0, None))
        object.__setattr__(self, "states", states)

    @property
    def dim(self) -> int:
        return self.states[0].dim

    def density(self) -> DensityMatrix:
        return DensityMatrix.from_weights(self.weights, self.states)


def variance(state: AnyState, A: Observable) -> float:
    """Standard deviation √(⟨A²⟩ − ⟨A⟩²) of A in the given state."""
    a = _mat(A)
    _same_dim(state, a)
    if isinstance(state, PureState):
        image = a @ state.vec
        second = float(np.real(np.vdot(image, image)))
        first = float(np.real(np.vdot(state.vec, image)))
    else:
        second = expectation(state, a @ a)
        first = expectation(state, a)
    return float(np.sqrt(max(second - first * first, 0.0)))


def qfi(rho: AnyState, A: Observable) -> float:
    """
    Quantum Fisher information 2Σ_ab (p_a − p_b)²/(p_a + p_b)·|A_ab|².

    Pure states short-circuit to 4V². Pairs with p_a + p_b below 1e-12 are skipped.
    """
    a = _mat(A)
    _same_dim(rho, a)
    if isinstance(rho, PureState):
        return 4.0 * variance(rho, a) ** 2

    spectrum = hermitian_eig(rho.mat)
    p = np.clip(spectrum.eigenvalues, 0.0, None)
    v = spectrum.eigenvectors
    a_eig = dagger(v) @ a @ v
    sums = p[:, None] + p[None, :]
    diffs = (p[:, None] - p[None, :]) ** 2
    mask = sums >= QFI_KERNEL_CUTOFF
    terms = np.zeros_like(sums)
    terms[mask] = diffs[mask] / sums[mask]
    return float(2.0 * np.sum(terms * np.abs(a_eig) ** 2))


def qfi_decomposition_witness(dec: Decomposition, A: Observable) -> float:
    """4Σ_j q_j V²_A(φ_j), an upper bound on the QFI of the mixture."""
    a = _mat(A)
    return float(4.0 * sum(q * variance(s, a) ** 2 for q, s in zip(dec.weights, dec.states)))


def loss_operator(U_S: Gate, A_S: Observable) -> ComplexMatrix:
    """A′ − A with A′ = U†AU; the change of A_S under the ideal gate."""
    u = _mat(U_S)
    a = _mat(A_S)
    if u.shape != a.shape:
        raise ValidationError(f"gate shape {u.shape} does not match observable shape {a.shape}")
    d = dagger(u) @ a @ u - a
    return (d + dagger(d)) / 2.0


def gate_asymmetry(U_S: Gate, A_S: Observable) -> float:
    """𝒜 = (λ_max(A′−A) − λ_min(A′−A))/2."""
    spectrum = hermitian_eig(loss_operator(U_S, A_S))
    return float((spectrum.max - spectrum.min) / 2.0)


def centering_shift(U_S: Gate, A_S: Observable) -> float:
    """h such that ‖A′ − A − h·1‖ = 𝒜."""
    spectrum = hermitian_eig(loss_operator(U_S, A_S))
    return float((spectrum.max + spectrum.min) / 2.0)


def violation_asymmetry(U_SE: Gate, A_tot: Observable) -> float:
    """
    𝒜_{U_SE}: half the spectral spread of X = A − U†AU.

    ‖X‖ equals ‖[A, U]‖, so this is zero exactly when U conserves A.
    """
    u = _mat(U_SE)
    a = _mat(A_tot)
    if u.shape != a.shape:
        raise ValidationError(f"gate shape {u.shape} does not match observable shape {a.shape}")
    x = a - dagger(u) @ a @ u
    spectrum = hermitian_eig((x + dagger(x)) / 2.0)
    return float((spectrum.max - spectrum.min) / 2.0)


def extremal_states(U_S: Gate, A_S: Observable) -> Tuple[PureState, PureState]:
    """Eigenvectors of A′ − A for its largest (ρ_↑) and smallest (ρ_↓) eigenvalue."""
    spectrum = hermitian_eig(loss_operator(U_S, A_S))
    up = PureState.normalized(spectrum.vector(spectrum.dim - 1))
    down = PureState.normalized(spectrum.vector(0))
    return up, down


def mixture(states: Sequence[AnyState], weights: Sequence[float]) -> DensityMatrix:
    mats = [s.projector() if isinstance(s, PureState) else s.mat for s in states]
    return DensityMatrix(sum(w * m for w, m in zip(weights, mats)))
