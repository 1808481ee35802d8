"""Closed-form coherence-cost bounds, region classification and the χ fluctuation"""
import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from coherence.measures import gate_asymmetry, loss_operator
from coherence.numerics import operator_norm, spectral_range
from coherence.states import AnyState, PureState, state_matrix
from utils.error_handler import OutOfDomainError, ValidationError

ORTHONORMAL_TOL = 1e-9
SQRT2 = math.sqrt(2.0)


class NormConvention(Enum):
    """GIVEN uses ‖A_S‖ as supplied; SHIFTED uses ‖A_S − λ_min·1‖."""

    GIVEN = "given"
    SHIFTED = "shifted"


class Region(Enum):
    A = "A"
    B = "B"
    NEITHER = "neither"


@dataclass
class BoundReport:
    bound_name: str
    inputs: Dict[str, float]
    value: float
    domain_ok: bool = True
    clamped: bool = False

    def to_dict(self) -> Dict:
        return {"bound": self.bound_name, "inputs": self.inputs, "value": self.value,
                "domain_ok": self.domain_ok, "clamped": self.clamped}


def effective_norm(A_S, convention: NormConvention = NormConvention.GIVEN) -> float:
    mat = getattr(A_S, "mat", A_S)
    if convention is NormConvention.SHIFTED:
        low, high = spectral_range(mat)
        return float(high - low)
    return operator_norm(mat, hermitian=True)


def _require_positive(delta: float, name: str = "delta"):
    if not delta > 0:
        raise ValidationError(f"{name} must be positive, got {delta}")


def theorem1_bound(asym: float, delta: float, normA: float) -> float:
    """max(0, 𝒜/δ − 4‖A_S‖): lower bound on √𝓕 for any set with error ≤ δ."""
    _require_positive(delta)
    if delta > SQRT2 + 1e-12:
        raise OutOfDomainError(f"delta={delta} exceeds the largest possible error √2")
    return max(0.0, asym / delta - 4.0 * normA)


def domain_limit(asym: float, normA: float) -> float:
    """Largest δ covered by the achievability bound: 4√2𝒜/(9‖A_S‖)."""
    if normA == 0.0:
        return math.inf
    return 4.0 * SQRT2 * asym / (9.0 * normA)


def theorem2_bound(asym: float, delta: float, normA: float) -> Tuple[float, bool]:
    """(𝒜/δ + √2‖A_S‖, δ within the achievability domain)."""
    _require_positive(delta)
    return asym / delta + SQRT2 * normA, delta <= domain_limit(asym, normA)


def region_boundaries(asym: float, normA: float, delta: float) -> Tuple[float, float, bool]:
    """
    (region A boundary, region B boundary, domain_ok) at δ.

    Beyond the achievability domain the B boundary is taken at the domain
    limit, where it is still attainable.
    """
    lower = theorem1_bound(asym, min(delta, SQRT2), normA)
    _, domain_ok = theorem2_bound(asym, delta, normA)
    if asym == 0.0:
        upper = SQRT2 * normA
    else:
        upper, _ = theorem2_bound(asym, min(delta, domain_limit(asym, normA)), normA)
    return lower, upper, domain_ok


def classify_region(asym: float, normA: float, delta: float, sqrtF: float) -> Region:
    _require_positive(delta)
    if sqrtF < 0:
        raise ValidationError(f"sqrtF must be non-negative, got {sqrtF}")
    if sqrtF < asym / delta - 4.0 * normA:
        return Region.A
    _, upper, _ = region_boundaries(asym, normA, delta)
    if sqrtF >= upper:
        return Region.B
    return Region.NEITHER


def theorem3_bound(asym_gate: float, asym_violation: float, delta: float, normA: float) -> float:
    """max(0, (𝒜_{U_S} − 𝒜_{U_SE})/δ − 6·max(‖A_S‖, 2𝒜_{U_SE}))."""
    _require_positive(delta)
    return max(0.0, (asym_gate - asym_violation) / delta - 6.0 * max(normA, 2.0 * asym_violation))


def chi(rho_S: AnyState, basis: Sequence[PureState], target) -> float:
    """
    √(Σ_i r_i (⟨A′−A⟩_{ψ_i} − ⟨A′−A⟩_ρ)²) with r_i = ⟨ψ_i|ρ|ψ_i⟩.

    The basis must be orthonormal and carry all of ρ's weight; a full basis
    of S always does.

    Raises:
        ValidationError: non-orthonormal basis, or ρ not supported on its span
    """
    if not basis:
        raise ValidationError("chi needs at least one basis vector")
    vectors = np.column_stack([psi.vec for psi in basis])
    if vectors.shape[0] != target.d_S or rho_S.dim != target.d_S:
        raise ValidationError("basis, state and target dimensions differ")
    gram = np.conj(vectors).T @ vectors
    if np.max(np.abs(gram - np.eye(len(basis)))) > ORTHONORMAL_TOL:
        raise ValidationError("chi basis is not orthonormal within 1e-9")

    loss = loss_operator(target.U_S, target.A_S)
    rho = state_matrix(rho_S)
    weights = np.real(np.einsum("ai,ab,bi->i", np.conj(vectors), rho, vectors))
    if weights.sum() < 1.0 - ORTHONORMAL_TOL:
        raise ValidationError("state has weight outside the span of the chi basis")
    changes = np.real(np.einsum("ai,ab,bi->i", np.conj(vectors), loss, vectors))
    mean = float(np.real(np.trace(rho @ loss)))
    return float(np.sqrt(max(np.sum(weights * (changes - mean) ** 2), 0.0)))


def single_state_bound(chi_val: float, deltabar: float, normA: float) -> float:
    """max(0, χ/(5δ̄) − 4‖A_S‖)."""
    _require_positive(deltabar, "deltabar")
    return max(0.0, chi_val / (5.0 * deltabar) - 4.0 * normA)


def erasure_bound(delta: float, normA: float = 1.0) -> float:
    """max(0, 1/(5√2δ) − 4‖A_S‖) for erasing α|00⟩ + β|11⟩."""
    _require_positive(delta)
    return max(0.0, 1.0 / (5.0 * SQRT2 * delta) - 4.0 * normA)


def erasure_chi_profile(points: int = 1001) -> Tuple[np.ndarray, np.ndarray]:
    """
    χ(α|00⟩ + β|11⟩, {|00⟩, |11⟩}) with α = cos θ, β = sin θ.

    θ runs over an even grid on [0, π/2] that contains π/4 when points is odd.
    """
    from coherence.models import erasure_target

    if points < 2:
        raise ValidationError(f"profile needs at least two points, got {points}")
    target = erasure_target()
    basis = [PureState.basis(4, 0), PureState.basis(4, 3)]
    thetas = np.linspace(0.0, math.pi / 2.0, points)
    values = np.empty(points)
    for k, theta in enumerate(thetas):
        vec = np.zeros(4, dtype=np.complex128)
        vec[0], vec[3] = math.cos(theta), math.sin(theta)
        values[k] = chi(PureState.normalized(vec), basis, target)
    return thetas, values


def evaluate_bounds(target, delta: float, sqrtF: Optional[float] = None,
                    asym_violation: Optional[float] = None,
                    convention: NormConvention = NormConvention.GIVEN) -> List[BoundReport]:
    """Lower, achievability and (optionally) non-conserving bounds for a target at error δ."""
    _require_positive(delta)
    asym = gate_asymmetry(target.U_S, target.A_S)
    norm = effective_norm(target.A_S, convention)
    inputs = {"asym": asym, "delta": delta, "normA": norm}
    raw1 = asym / delta - 4.0 * norm
    reports = [BoundReport("theorem1", dict(inputs), theorem1_bound(asym, min(delta, SQRT2), norm),
                           clamped=raw1 < 0)]
    value2, domain_ok = theorem2_bound(asym, delta, norm)
    reports.append(BoundReport("theorem2", dict(inputs), value2, domain_ok=domain_ok))
    if asym_violation is not None:
        raw3 = (asym - asym_violation) / delta - 6.0 * max(norm, 2.0 * asym_violation)
        reports.append(BoundReport("theorem3", dict(inputs, asym_violation=asym_violation),
                                   theorem3_bound(asym, asym_violation, delta, norm),
                                   clamped=raw3 < 0))
    if sqrtF is not None:
        for report in reports:
            report.inputs["sqrtF"] = sqrtF
    return reports


__all__ = [
    "BoundReport",
    "NormConvention",
    "Region",
    "chi",
    "classify_region",
    "domain_limit",
    "effective_norm",
    "erasure_bound",
    "erasure_chi_profile",
    "evaluate_bounds",
    "region_boundaries",
    "single_state_bound",
    "theorem1_bound",
    "theorem2_bound",
    "theorem3_bound",
]
