"""Seeded random states, gates and implementation sets for property checks"""
from typing import Optional, Tuple

import numpy as np
from scipy.linalg import expm
from scipy.stats import unitary_group

from coherence.implementation import ImplementationSet, TargetSpec
from coherence.measures import Decomposition, qfi_decomposition_witness
from coherence.numerics import ComplexMatrix, dagger, eigenspaces, hermitian_eig, kron
from coherence.states import AnyState, DensityMatrix, HermitianObservable, PureState, UnitaryGate, state_matrix
from utils.error_handler import ValidationError


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Independent stream for one trial of a seeded run."""
    return np.random.default_rng([seed, trial])


def ginibre(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    return rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))


def random_hermitian(dim: int, rng: np.random.Generator, scale: float = 1.0) -> ComplexMatrix:
    g = ginibre(dim, dim, rng)
    return scale * (g + dagger(g)) / 2.0


def random_pure_state(dim: int, rng: np.random.Generator) -> PureState:
    return PureState.normalized(ginibre(dim, 1, rng))


def random_density(dim: int, rng: np.random.Generator, rank: Optional[int] = None) -> DensityMatrix:
    """Wishart-distributed density matrix of the given rank (full rank by default)."""
    g = ginibre(dim, rank or dim, rng)
    w = g @ dagger(g)
    return DensityMatrix(w / np.trace(w).real)


def random_state(dim: int, rng: np.random.Generator) -> AnyState:
    """A pure state or a density matrix of random rank, with equal odds."""
    if rng.random() < 0.5:
        return random_pure_state(dim, rng)
    return random_density(dim, rng, rank=int(rng.integers(1, dim + 1)))


def haar_unitary(dim: int, rng: np.random.Generator) -> ComplexMatrix:
    if dim == 1:
        return np.array([[np.exp(2j * np.pi * rng.random())]])
    return unitary_group.rvs(dim, random_state=rng)


def random_orthonormal_basis(dim: int, rng: np.random.Generator):
    u = haar_unitary(dim, rng)
    return [PureState.normalized(u[:, k]) for k in range(dim)]


def integer_observable(dim: int, rng: np.random.Generator, low: int = -2, high: int = 2,
                       rotate: bool = True) -> HermitianObservable:
    """Observable with integer spectrum in [low, high], so sums over S⊗E are degenerate."""
    values = rng.integers(low, high + 1, size=dim).astype(float)
    if not rotate:
        return HermitianObservable(np.diag(values).astype(np.complex128))
    u = haar_unitary(dim, rng)
    return HermitianObservable((u * values) @ dagger(u))


def conserving_unitary(A_tot: ComplexMatrix, rng: np.random.Generator) -> UnitaryGate:
    """Haar-random unitary block on each eigenspace of A_tot; commutes with A_tot exactly."""
    dim = A_tot.shape[0]
    u = np.zeros((dim, dim), dtype=np.complex128)
    for _, basis in eigenspaces(A_tot):
        block = haar_unitary(basis.shape[1], rng)
        u += basis @ block @ dagger(basis)
    return UnitaryGate(u)


def perturbed_unitary(u: ComplexMatrix, rng: np.random.Generator, strength: float) -> UnitaryGate:
    """u·exp(−iεH) with H a random Hermitian of unit operator norm."""
    h = random_hermitian(u.shape[0], rng)
    h /= np.max(np.abs(hermitian_eig(h).eigenvalues))
    return UnitaryGate(getattr(u, "mat", u) @ expm(-1j * strength * h))


def random_target(d_S: int, rng: np.random.Generator) -> TargetSpec:
    return TargetSpec(integer_observable(d_S, rng), UnitaryGate(haar_unitary(d_S, rng)), name="random")


def random_conserving_instance(d_S: int, d_E: int, rng: np.random.Generator,
                               target: Optional[TargetSpec] = None) -> Tuple[TargetSpec, ImplementationSet]:
    """A random target and an exactly conserving implementation set for its A_S."""
    target = target or random_target(d_S, rng)
    A_E = integer_observable(d_E, rng)
    rho_E = random_state(d_E, rng)
    a_tot = kron(target.A_S.mat, np.eye(d_E)) + kron(np.eye(d_S), A_E.mat)
    impl = ImplementationSet(d_S, A_E, rho_E, conserving_unitary(a_tot, rng))
    return target, impl


def random_decomposition(rho: AnyState, rng: np.random.Generator,
                         size: Optional[int] = None) -> Decomposition:
    """
    Random pure-state ensemble of ρ.

    With ρ = Σ_a p_a |ψ_a⟩⟨ψ_a| and a Haar unitary V of order n ≥ rank,
    φ̃_j = Σ_a V_ja √p_a |ψ_a⟩ gives ρ = Σ_j φ̃_j φ̃_j†.
    """
    return _decomposition_from_unitary(_weighted_eigenvectors(rho), haar_unitary(size or rho.dim, rng))


def _weighted_eigenvectors(rho: AnyState) -> np.ndarray:
    spectrum = hermitian_eig(state_matrix(rho))
    return spectrum.eigenvectors * np.sqrt(np.clip(spectrum.eigenvalues, 0.0, None))


def _decomposition_from_unitary(weighted: np.ndarray, v: ComplexMatrix) -> Decomposition:
    dim = weighted.shape[0]
    n = v.shape[0]
    if n < dim:
        raise ValidationError(f"decomposition size {n} is below the state dimension {dim}")
    columns = np.zeros((dim, n), dtype=np.complex128)
    columns[:, :dim] = weighted
    vectors = columns @ v.T
    norms = np.sum(np.abs(vectors) ** 2, axis=0)
    keep = norms > 1e-14
    weights = norms[keep] / norms[keep].sum()
    states = [PureState.normalized(vectors[:, j]) for j in np.flatnonzero(keep)]
    return Decomposition(weights, states)


def qfi_sampling_oracle(rho: AnyState, A, samples: int, rng: np.random.Generator) -> float:
    """
    Smallest decomposition witness 4Σq_jV² found by random search.

    Half the budget draws Haar decompositions; the rest refines the best one
    with shrinking unitary kicks. The result is an upper bound on the QFI.
    """
    mat = getattr(A, "mat", A)
    dim = rho.dim
    weighted = _weighted_eigenvectors(rho)

    def witness(v):
        return qfi_decomposition_witness(_decomposition_from_unitary(weighted, v), mat)

    best_v = haar_unitary(dim, rng)
    best = witness(best_v)
    explore = samples // 2
    for _ in range(explore - 1):
        v = haar_unitary(dim, rng)
        value = witness(v)
        if value < best:
            best, best_v = value, v
    kick = 0.5
    for _ in range(samples - explore):
        v = best_v @ expm(-1j * kick * random_hermitian(dim, rng))
        value = witness(v)
        if value < best:
            best, best_v = value, v
        else:
            kick = max(kick * 0.995, 1e-4)
    return float(best)
