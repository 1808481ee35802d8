"""
Quantum channels stored in Choi form.

J = Σ_ij |i⟩⟨j| ⊗ Λ(|i⟩⟨j|), input factor on the left. Reshaped to
(d_in, d_out, d_in, d_out), block [i, :, j, :] is Λ(|i⟩⟨j|).
"""
from dataclasses import dataclass
from typing import Iterable, List, Optional

import numpy as np

from coherence.numerics import (
    ComplexMatrix,
    PSD_CLAMP,
    as_matrix,
    dagger,
    hermitian_eig,
    is_hermitian,
    operator_norm,
)
from coherence.states import AnyState, PureState, density_of, purify
from utils.error_handler import NotPSDError, ValidationError

TP_TOL = 1e-9
KRAUS_CUTOFF = 1e-14


@dataclass(frozen=True, eq=False)
class Channel:
    """A CPTP map Λ: L(C^d_in) → L(C^d_out) held as its Choi matrix."""

    choi: ComplexMatrix
    d_in: int
    d_out: int

    def __post_init__(self):
        choi = as_matrix(self.choi, "Choi matrix")
        size = self.d_in * self.d_out
        if choi.shape != (size, size):
            raise ValidationError(f"Choi matrix must be {size}x{size} for dims "
                                  f"({self.d_in}, {self.d_out}), got {choi.shape}")
        if not is_hermitian(choi, 1e-9):
            raise ValidationError("Choi matrix is not Hermitian")
        choi = (choi + dagger(choi)) / 2.0
        lowest = hermitian_eig(choi).min
        if lowest < PSD_CLAMP:
            raise NotPSDError(lowest, "Choi matrix")
        blocks = choi.reshape(self.d_in, self.d_out, self.d_in, self.d_out)
        # Tr_out Λ(|i⟩⟨j|) = δ_ij
        traces = np.einsum("iaja->ij", blocks)
        if np.max(np.abs(traces - np.eye(self.d_in))) > TP_TOL:
            raise ValidationError("channel is not trace preserving within 1e-9")
        object.__setattr__(self, "choi", choi)

    @property
    def blocks(self) -> np.ndarray:
        return self.choi.reshape(self.d_in, self.d_out, self.d_in, self.d_out)

    def apply(self, x: ComplexMatrix) -> ComplexMatrix:
        return apply_channel(self, x)


def _kraus_vector(k: ComplexMatrix) -> np.ndarray:
    # |K⟫[i·d_out + a] = K[a, i]
    return np.ascontiguousarray(k.T).reshape(-1)


def channel_from_kraus(kraus: Iterable[ComplexMatrix]) -> Channel:
    """Build a channel from Kraus operators K_k of shape (d_out, d_in)."""
    ops = [as_matrix(k, "Kraus operator") for k in kraus]
    if not ops:
        raise ValidationError("at least one Kraus operator is required")
    d_out, d_in = ops[0].shape
    if any(k.shape != (d_out, d_in) for k in ops):
        raise ValidationError("Kraus operators must share one shape")
    choi = np.zeros((d_in * d_out, d_in * d_out), dtype=np.complex128)
    for k in ops:
        v = _kraus_vector(k)
        choi += np.outer(v, np.conj(v))
    return Channel(choi, d_in, d_out)


def channel_from_unitary(u: ComplexMatrix) -> Channel:
    """Conjugation ρ ↦ UρU†."""
    u = getattr(u, "mat", u)
    return channel_from_kraus([u])


def identity_channel(dim: int) -> Channel:
    return channel_from_kraus([np.eye(dim, dtype=np.complex128)])


def constant_channel(state: AnyState, d_in: int) -> Channel:
    """ρ ↦ Tr[ρ]·σ."""
    sigma = density_of(state).mat
    choi = np.kron(np.eye(d_in, dtype=np.complex128), sigma)
    return Channel(choi, d_in, sigma.shape[0])


def apply_channel(channel: Channel, x: ComplexMatrix) -> ComplexMatrix:
    x = as_matrix(x, "channel input")
    if x.shape != (channel.d_in, channel.d_in):
        raise ValidationError(f"channel expects a {channel.d_in}x{channel.d_in} input, got {x.shape}")
    return np.einsum("ij,iajb->ab", x, channel.blocks)


def compose_channels(after: Channel, before: Channel) -> Channel:
    """The channel after∘before."""
    if before.d_out != after.d_in:
        raise ValidationError(f"cannot compose: output dim {before.d_out} feeds input dim {after.d_in}")
    blocks = np.einsum("iajb,acbd->icjd", before.blocks, after.blocks)
    size = before.d_in * after.d_out
    return Channel(blocks.reshape(size, size), before.d_in, after.d_out)


def kraus_operators(channel: Channel) -> List[ComplexMatrix]:
    """Canonical Kraus operators from the eigendecomposition of the Choi matrix."""
    spectrum = hermitian_eig(channel.choi)
    ops = []
    for k in range(spectrum.dim - 1, -1, -1):
        weight = spectrum.eigenvalues[k]
        if weight <= KRAUS_CUTOFF:
            continue
        v = np.sqrt(weight) * spectrum.vector(k)
        ops.append(np.ascontiguousarray(v.reshape(channel.d_in, channel.d_out).T))
    return ops


def choi_distance(a: Channel, b: Channel) -> float:
    if a.choi.shape != b.choi.shape:
        raise ValidationError("channels act on different dimensions")
    return operator_norm(a.choi - b.choi, hermitian=True)


def apply_to_bipartite(channel: Channel, m: ComplexMatrix, d_ref: int) -> ComplexMatrix:
    """(Λ ⊗ 1_R)(M) for M on S⊗R, S the left factor."""
    t = as_matrix(m).reshape(channel.d_in, d_ref, channel.d_in, d_ref)
    out = np.einsum("irjs,iajb->arbs", t, channel.blocks)
    size = channel.d_out * d_ref
    return out.reshape(size, size)


def entanglement_fidelity_squared(channel: Channel, rho: ComplexMatrix) -> float:
    """
    F_e² = Σ_k |Tr[K_k ρ]|² as the quadratic form vec(ρ)ᵀ J vec(ρ)*.

    Only defined for channels with d_in = d_out.
    """
    w = as_matrix(rho).reshape(-1)
    value = np.real(w @ channel.choi @ np.conj(w))
    return float(min(max(value, 0.0), 1.0))


def entanglement_fidelity(rho_S: AnyState, channel: Channel,
                          purification: Optional[PureState] = None) -> float:
    """
    F_e(ρ_S, Λ) = √⟨ψ|(1_R ⊗ Λ)(ψ)|ψ⟩ for a purification ψ of ρ_S.

    Args:
        rho_S: Input state on S
        channel: Channel acting on S (d_in = d_out = d_S)
        purification: Optional purification on S⊗R; the canonical one is used otherwise

    Raises:
        ValidationError: dimension mismatch
    """
    if channel.d_in != rho_S.dim or channel.d_out != rho_S.dim:
        raise ValidationError(f"channel dims ({channel.d_in}, {channel.d_out}) do not match "
                              f"state dim {rho_S.dim}")
    psi = purification if purification is not None else purify(rho_S)
    if psi.dim % rho_S.dim:
        raise ValidationError(f"purification dim {psi.dim} is not a multiple of {rho_S.dim}")
    d_ref = psi.dim // rho_S.dim
    image = apply_to_bipartite(channel, psi.projector(), d_ref)
    overlap = np.real(np.vdot(psi.vec, image @ psi.vec))
    return float(np.sqrt(min(max(overlap, 0.0), 1.0)))


def entanglement_bures(rho_S: AnyState, channel: Channel,
                       purification: Optional[PureState] = None) -> float:
    """L_e = √(2(1 − F_e))."""
    f = entanglement_fidelity(rho_S, channel, purification)
    return float(np.sqrt(max(0.0, 2.0 * (1.0 - f))))
