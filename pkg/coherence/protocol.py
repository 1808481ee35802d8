"""
Gaussian-pointer protocol on a finite commensurate lattice.

The environment is a lattice of 2N+1 sites x_k = k·s with A_E = diag(x_k).
The joint gate pays every change h_a − h_b of A_S out of the pointer by a
cyclic shift of (h_a − h_b)/s sites, so A_S + A_E is conserved exactly on
sites far enough from the boundary.
"""
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Tuple

import numpy as np
from scipy.special import erfc

from config import Config
from coherence.bounds import NormConvention, effective_norm
from coherence.implementation import ImplementationSet, TargetSpec
from coherence.measures import centering_shift, gate_asymmetry, variance
from coherence.numerics import ComplexMatrix, dagger, eigenspaces, kron
from coherence.states import AnyState, HermitianObservable, PureState, UnitaryGate, state_matrix
from utils.error_handler import IncommensurateSpectrumError, OutOfDomainError, ValidationError
from utils.logger import get_logger, log_with_context

logger = get_logger(__name__)

GAP_TOL = 1e-9
MAX_DENOMINATOR = 10 ** 6
MIN_LATTICE_SPACING_RATIO = 1e-3
POINTER_WIDTH = 8.0


@dataclass(frozen=True)
class PointerLattice:
    """Sites x_k = k·s for k = −N..N; margin is Δ_max/s in sites."""

    spacing: float
    half_width: int
    margin: int = 0

    @property
    def dim(self) -> int:
        return 2 * self.half_width + 1

    @property
    def indices(self) -> np.ndarray:
        return np.arange(-self.half_width, self.half_width + 1)

    @property
    def sites(self) -> np.ndarray:
        return self.indices * self.spacing

    def position_operator(self) -> HermitianObservable:
        return HermitianObservable(np.diag(self.sites).astype(np.complex128))

    def interior_mask(self) -> np.ndarray:
        return np.abs(self.indices) <= self.half_width - self.margin

    def shift(self, sites: int) -> ComplexMatrix:
        """T^m with T|k⟩ = |k−1⟩ cyclically."""
        return np.roll(np.eye(self.dim, dtype=np.complex128), -sites, axis=0)


@dataclass(frozen=True, eq=False)
class GaussianPointer:
    zeta: float
    lattice: PointerLattice
    state: PureState

    def mean(self) -> float:
        return float(np.sum(np.abs(self.state.vec) ** 2 * self.lattice.sites))

    def variance(self) -> float:
        return variance(self.state, self.lattice.position_operator()) ** 2


@dataclass(frozen=True, eq=False)
class ProtocolRun:
    """A built protocol: ζ, its lattice and pointer, and the implementation set."""

    target: TargetSpec
    zeta: float
    lattice: PointerLattice
    pointer: GaussianPointer
    implementation: ImplementationSet


def _levels(A_S: HermitianObservable) -> List[Tuple[float, ComplexMatrix]]:
    return eigenspaces(A_S.mat, GAP_TOL)


def lattice_spacing(A_S: HermitianObservable,
                    min_spacing_ratio: float = MIN_LATTICE_SPACING_RATIO) -> Tuple[float, float]:
    """
    Largest s with every gap of A_S in s·ℤ, and the spectral width Δ_max.

    Gap ratios to the smallest gap are reconstructed as fractions with
    denominator at most 10⁶. A spacing below min_spacing_ratio times the
    smallest gap is rejected: an irrational ratio such as √2 admits a
    close fraction with a huge denominator.

    Raises:
        IncommensurateSpectrumError: no admissible common spacing
    """
    values = [h for h, _ in _levels(A_S)]
    width = values[-1] - values[0]
    if len(values) == 1:
        return 1.0, 0.0

    steps = np.diff(values)
    reference = float(np.min(steps))
    denominator = 1
    worst = None
    for h in values[1:]:
        gap = h - values[0]
        ratio = gap / reference
        fraction = Fraction(ratio).limit_denominator(MAX_DENOMINATOR)
        if abs(gap - float(fraction) * reference) > GAP_TOL:
            raise IncommensurateSpectrumError(gap, reference, ratio)
        if worst is None or fraction.denominator > worst[2].denominator:
            worst = (gap, ratio, fraction)
        denominator = math.lcm(denominator, fraction.denominator)

    spacing = reference / denominator
    if spacing < min_spacing_ratio * reference:
        gap, ratio, _ = worst
        raise IncommensurateSpectrumError(gap, reference, ratio)
    return spacing, width


def build_lattice(A_S: HermitianObservable, zeta: float,
                  tail_bound: Optional[float] = None) -> PointerLattice:
    """
    Smallest lattice carrying a width-ζ pointer for the gaps of A_S.

    N starts at ⌈(8ζ + Δ_max)/s⌉ and grows until the Gaussian mass outside
    the shift-safe interior is below tail_bound.
    """
    if not zeta > 0:
        raise ValidationError(f"zeta must be positive, got {zeta}")
    tail_bound = Config.TAIL_BOUND if tail_bound is None else tail_bound
    spacing, width = lattice_spacing(A_S)
    margin = int(round(width / spacing))
    half_width = max(int(math.ceil((POINTER_WIDTH * zeta + width) / spacing - GAP_TOL)), margin + 1)
    # |φ(x)|² is a normal density with standard deviation ζ
    while erfc((half_width - margin) * spacing / (math.sqrt(2.0) * zeta)) >= tail_bound:
        half_width += 1

    lattice = PointerLattice(spacing=spacing, half_width=half_width, margin=margin)
    log_with_context(logger, logging.INFO, "Lattice built",
                     spacing=spacing, half_width=half_width, margin=margin, zeta=zeta)
    return lattice


def gaussian_pointer(lattice: PointerLattice, zeta: float) -> GaussianPointer:
    """Amplitudes ∝ exp(−x_k²/4ζ²), normalized on the lattice."""
    if not zeta > 0:
        raise ValidationError(f"zeta must be positive, got {zeta}")
    amplitudes = np.exp(-lattice.sites ** 2 / (4.0 * zeta ** 2))
    return GaussianPointer(zeta, lattice, PureState.normalized(amplitudes))


def shift_unitary(U_S: UnitaryGate, A_S: HermitianObservable, lattice: PointerLattice) -> UnitaryGate:
    """
    U_SE = Σ_ab (P_a U_S P_b) ⊗ T^{m_ab} with m_ab = (h_a − h_b)/s.

    P_a are the eigenprojectors of A_S, so |j⟩|k⟩ in level b moves to level a
    at site k − m_ab and h + k·s is unchanged.
    """
    if U_S.dim != A_S.dim:
        raise ValidationError(f"U_S has dim {U_S.dim} but A_S has dim {A_S.dim}")
    levels = [(h, basis @ dagger(basis)) for h, basis in _levels(A_S)]
    u = U_S.mat
    joint = np.zeros((U_S.dim * lattice.dim,) * 2, dtype=np.complex128)
    for h_a, p_a in levels:
        for h_b, p_b in levels:
            block = p_a @ u @ p_b
            if not np.any(np.abs(block) > 0.0):
                continue
            steps = (h_a - h_b) / lattice.spacing
            sites = int(round(steps))
            if abs(steps - sites) * lattice.spacing > GAP_TOL:
                raise IncommensurateSpectrumError(h_a - h_b, lattice.spacing, steps)
            joint += kron(block, lattice.shift(sites))
    return UnitaryGate(joint)


def interior_projector(lattice: PointerLattice, d_S: int) -> ComplexMatrix:
    """1_S ⊗ (projector onto the interior sites)."""
    mask = lattice.interior_mask().astype(np.complex128)
    return kron(np.eye(d_S), np.diag(mask))


def gaussian_protocol(target: TargetSpec, zeta: float,
                      tail_bound: Optional[float] = None) -> ProtocolRun:
    lattice = build_lattice(target.A_S, zeta, tail_bound)
    pointer = gaussian_pointer(lattice, zeta)
    joint = shift_unitary(target.U_S, target.A_S, lattice)
    impl = ImplementationSet(target.d_S, lattice.position_operator(), pointer.state, joint)
    return ProtocolRun(target, zeta, lattice, pointer, impl)


def zeta_for_fisher(F: float) -> float:
    """2ζ = √𝓕."""
    if not F > 0:
        raise ValidationError(f"F must be positive, got {F}")
    return math.sqrt(F) / 2.0


def zeta_for_delta(target: TargetSpec, delta: float,
                   convention: NormConvention = NormConvention.GIVEN) -> float:
    """ζ with 2ζ = 𝒜/δ + √2‖A_S‖, the smallest width the achievability bound admits."""
    if not delta > 0:
        raise ValidationError(f"delta must be positive, got {delta}")
    asym = gate_asymmetry(target.U_S, target.A_S)
    return (asym / delta + math.sqrt(2.0) * effective_norm(target.A_S, convention)) / 2.0


def protocol_for_target(target: TargetSpec, F: float,
                        tail_bound: Optional[float] = None) -> ImplementationSet:
    """The Gaussian-pointer implementation set with pointer QFI 𝓕 (ζ = √𝓕/2)."""
    return gaussian_protocol(target, zeta_for_fisher(F), tail_bound).implementation


def protocol_threshold(target: TargetSpec) -> float:
    """Smallest ζ covered by the error bound: 9𝒜/(2√2)."""
    return 9.0 * gate_asymmetry(target.U_S, target.A_S) / (2.0 * math.sqrt(2.0))


def protocol_error_bound(target: TargetSpec, zeta: float,
                         convention: NormConvention = NormConvention.GIVEN) -> float:
    """
    (𝒜/2ζ)(1 + ‖A_S‖/(√2ζ)).

    Raises:
        OutOfDomainError: ζ below 9𝒜/(2√2)
    """
    if not zeta > 0:
        raise ValidationError(f"zeta must be positive, got {zeta}")
    asym = gate_asymmetry(target.U_S, target.A_S)
    threshold = protocol_threshold(target)
    if zeta < threshold * (1.0 - 1e-12):
        raise OutOfDomainError(f"zeta={zeta:.6g} is below the protocol threshold {threshold:.6g}")
    norm = effective_norm(target.A_S, convention)
    return float(asym / (2.0 * zeta) * (1.0 + norm / (math.sqrt(2.0) * zeta)))


def fidelity_lower_bound(target: TargetSpec, zeta: float, rho_S: AnyState) -> float:
    """
    |Tr[ρ Σ_ab g(h_a − h_b) U† P_a U P_b]| with g(Δ) = exp(−(Δ − h)²/8ζ²).

    h is the centering shift of A′ − A. For the lattice protocol this bounds
    F_e(ρ_S, Λ_{U_S†}∘Λ_S) from below up to the pointer's tail mass.
    """
    if not zeta > 0:
        raise ValidationError(f"zeta must be positive, got {zeta}")
    if rho_S.dim != target.d_S:
        raise ValidationError(f"state dim {rho_S.dim} does not match d_S={target.d_S}")
    h = centering_shift(target.U_S, target.A_S)
    u = target.U_S.mat
    levels = [(value, basis @ dagger(basis)) for value, basis in _levels(target.A_S)]
    kernel = np.zeros_like(u)
    for h_a, p_a in levels:
        rotated = dagger(u) @ p_a @ u
        for h_b, p_b in levels:
            weight = math.exp(-((h_a - h_b - h) ** 2) / (8.0 * zeta ** 2))
            kernel += weight * rotated @ p_b
    return float(abs(np.trace(state_matrix(rho_S) @ kernel)))
