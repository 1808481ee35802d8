"""
Implementation sets, their induced channels, and the implementation error.

An implementation set realizes a target gate U_S on S through a joint
unitary U_SE acting on S⊗E with the environment prepared in ρ_E.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from config import Config
from coherence.channels import (
    Channel,
    channel_from_unitary,
    compose_channels,
    entanglement_bures,
    kraus_operators,
)
from coherence.measures import extremal_states, mixture
from coherence.numerics import ComplexMatrix, dagger, hermitian_eig, kron, operator_norm, partial_trace
from coherence.states import (
    AnyState,
    DensityMatrix,
    HermitianObservable,
    PureState,
    UnitaryGate,
    purify,
    state_matrix,
)
from utils.error_handler import ValidationError
from utils.logger import get_logger, log_with_context

logger = get_logger(__name__)

MIXTURE_WEIGHT_CUTOFF = 1e-15
GRADIENT_TOL = 1e-9
MIN_STEP = 1e-12
REALIZE_SLACK = 1e-9


@dataclass(frozen=True, eq=False)
class TargetSpec:
    """The gate U_S to implement and the conserved quantity A_S on S."""

    A_S: HermitianObservable
    U_S: UnitaryGate
    name: str = "custom"

    def __post_init__(self):
        if self.A_S.dim != self.U_S.dim:
            raise ValidationError(f"A_S has dim {self.A_S.dim} but U_S has dim {self.U_S.dim}")

    @property
    def d_S(self) -> int:
        return self.A_S.dim


@dataclass(frozen=True, eq=False)
class ImplementationSet:
    """The tuple (ℋ_E, A_E, ρ_E, U_SE) for a system of dimension d_S."""

    d_S: int
    A_E: HermitianObservable
    rho_E: AnyState
    U_SE: UnitaryGate

    def __post_init__(self):
        if self.d_S < 1:
            raise ValidationError(f"d_S must be positive, got {self.d_S}")
        if self.A_E.dim != self.rho_E.dim:
            raise ValidationError(f"A_E has dim {self.A_E.dim} but rho_E has dim {self.rho_E.dim}")
        if self.U_SE.dim != self.d_S * self.d_E:
            raise ValidationError(f"U_SE has dim {self.U_SE.dim}, expected {self.d_S}*{self.d_E}")

    @property
    def d_E(self) -> int:
        return self.A_E.dim

    def with_environment(self, rho_E: AnyState) -> "ImplementationSet":
        return ImplementationSet(self.d_S, self.A_E, rho_E, self.U_SE)

    def total_observable(self, A_S: HermitianObservable) -> ComplexMatrix:
        """A_S ⊗ 1_E + 1_S ⊗ A_E."""
        if A_S.dim != self.d_S:
            raise ValidationError(f"A_S has dim {A_S.dim}, expected {self.d_S}")
        return kron(A_S.mat, np.eye(self.d_E)) + kron(np.eye(self.d_S), self.A_E.mat)


@dataclass
class ErrorReport:
    """Result of the worst-case error search."""

    worst_delta: float
    argmax_state: PureState
    probe_deltas: List[Tuple[str, float]] = field(default_factory=list)
    starts: int = 0
    iterations: int = 0
    converged: bool = False
    gradient_norm: float = float("nan")

    def to_dict(self) -> Dict:
        return {
            "worst_delta": self.worst_delta,
            "probes": {name: value for name, value in self.probe_deltas},
            "optimizer": {
                "starts": self.starts,
                "iterations": self.iterations,
                "converged": self.converged,
                "gradient_norm": self.gradient_norm,
            },
        }


class ConservationResidual(NamedTuple):
    op_norm: float
    state_weighted: float


def _environment_terms(rho_E: AnyState) -> List[Tuple[float, np.ndarray]]:
    if isinstance(rho_E, PureState):
        return [(1.0, rho_E.vec)]
    spectrum = hermitian_eig(rho_E.mat)
    return [(float(p), spectrum.vector(k)) for k, p in enumerate(spectrum.eigenvalues)
            if p > MIXTURE_WEIGHT_CUTOFF]


def induced_channel(impl: ImplementationSet, d_S: Optional[int] = None) -> Channel:
    """
    Λ_S(ρ) = Tr_E[U_SE (ρ ⊗ ρ_E) U_SE†] in Choi form.

    Raises:
        ValidationError: d_S disagrees with the set
    """
    d_s = impl.d_S if d_S is None else d_S
    if d_s != impl.d_S:
        raise ValidationError(f"implementation set is declared for d_S={impl.d_S}, got {d_s}")
    d_e = impl.d_E
    u = impl.U_SE.mat.reshape(d_s, d_e, d_s, d_e)
    blocks = np.zeros((d_s, d_s, d_s, d_s), dtype=np.complex128)
    for weight, phi in _environment_terms(impl.rho_E):
        # v[s, e, i] = ⟨s e| U |i φ⟩
        v = np.einsum("seif,f->sei", u, phi)
        blocks += weight * np.einsum("sei,tej->isjt", v, np.conj(v))
    size = d_s * d_s
    return Channel(blocks.reshape(size, size), d_s, d_s)


def joint_output(impl: ImplementationSet, rho_S: AnyState) -> ComplexMatrix:
    """U_SE (ρ_S ⊗ ρ_E) U_SE†."""
    if rho_S.dim != impl.d_S:
        raise ValidationError(f"state dim {rho_S.dim} does not match d_S={impl.d_S}")
    u = impl.U_SE.mat
    joint = u @ kron(state_matrix(rho_S), state_matrix(impl.rho_E)) @ dagger(u)
    return (joint + dagger(joint)) / 2.0


def environment_output(impl: ImplementationSet, rho_S: AnyState) -> DensityMatrix:
    """Final state of E, Tr_S[U_SE (ρ_S ⊗ ρ_E) U_SE†]."""
    return DensityMatrix(partial_trace(joint_output(impl, rho_S), "E", (impl.d_S, impl.d_E)))


def error_channel(impl: ImplementationSet, target: TargetSpec) -> Channel:
    """Λ_{U_S†} ∘ Λ_S, the identity channel for a perfect implementation."""
    if target.d_S != impl.d_S:
        raise ValidationError(f"target has d_S={target.d_S}, implementation set has {impl.d_S}")
    return compose_channels(channel_from_unitary(target.U_S.dagger()), induced_channel(impl))


def error_for_state(impl: ImplementationSet, target: TargetSpec, rho_S: AnyState) -> float:
    """δ(ρ_S) = L_e(ρ_S, Λ_{U_S†}∘Λ_S)."""
    return entanglement_bures(rho_S, error_channel(impl, target))


def _delta_from_fidelity_squared(f2: float) -> float:
    f = np.sqrt(min(max(f2, 0.0), 1.0))
    return float(np.sqrt(max(0.0, 2.0 * (1.0 - f))))


class _FidelityObjective:
    """F_e²(Ψ) = Σ_k |Tr[K_k ΨΨ†]|² over unit-norm Ψ ∈ S⊗R, R ≅ S."""

    def __init__(self, channel: Channel):
        self.kraus = np.array(kraus_operators(channel))
        self.kraus_dag = np.conj(np.transpose(self.kraus, (0, 2, 1)))

    def coefficients(self, psi: np.ndarray) -> np.ndarray:
        return np.einsum("ai,kab,bi->k", np.conj(psi), self.kraus, psi)

    def value(self, psi: np.ndarray) -> float:
        return float(np.sum(np.abs(self.coefficients(psi)) ** 2))

    def tangent_gradient(self, psi: np.ndarray) -> np.ndarray:
        c = self.coefficients(psi)
        g = (np.einsum("k,kab->ab", np.conj(c), self.kraus)
             + np.einsum("k,kab->ab", c, self.kraus_dag)) @ psi
        radial = np.real(np.vdot(psi, g))
        return g - radial * psi


def _normalize(psi: np.ndarray) -> np.ndarray:
    return psi / np.linalg.norm(psi)


def _descend(objective: _FidelityObjective, psi: np.ndarray,
             max_iter: int) -> Tuple[np.ndarray, float, int, float, bool]:
    """Projected gradient descent with step halving on the unit sphere."""
    value = objective.value(psi)
    step = 1.0
    grad = objective.tangent_gradient(psi)
    grad_norm = float(np.linalg.norm(grad))
    iterations = 0
    while iterations < max_iter and grad_norm >= GRADIENT_TOL:
        iterations += 1
        accepted = False
        while step >= MIN_STEP:
            candidate = _normalize(psi - step * grad)
            candidate_value = objective.value(candidate)
            if candidate_value < value:
                psi, value = candidate, candidate_value
                accepted = True
                break
            step /= 2.0
        if not accepted:
            break
        step = min(step * 2.0, 4.0)
        grad = objective.tangent_gradient(psi)
        grad_norm = float(np.linalg.norm(grad))
    return psi, value, iterations, grad_norm, grad_norm < GRADIENT_TOL


def _probe_states(target: TargetSpec, rng: np.random.Generator,
                  random_probes: int) -> List[Tuple[str, np.ndarray]]:
    """Named purification matrices Ψ (d_S × d_R) for the probe inputs."""
    d = target.d_S
    probes = []

    def pure(vec: np.ndarray) -> np.ndarray:
        psi = np.zeros((d, d), dtype=np.complex128)
        psi[:, 0] = vec / np.linalg.norm(vec)
        return psi

    for k in range(d):
        probes.append((f"basis_{k}", pure(np.eye(d)[:, k])))
    up, down = extremal_states(target.U_S, target.A_S)
    probes.append(("up", pure(up.vec)))
    probes.append(("down", pure(down.vec)))
    both = purify(mixture([up, down], [0.5, 0.5]))
    probes.append(("up_plus_down", both.vec.reshape(d, d)))
    probes.append(("uniform", pure(np.ones(d, dtype=np.complex128))))
    for k in range(random_probes):
        raw = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        probes.append((f"random_{k}", _normalize(raw)))
    return probes


def worst_case_error(impl: ImplementationSet, target: TargetSpec,
                     seed: Optional[int] = None,
                     starts: Optional[int] = None,
                     max_iter: Optional[int] = None,
                     random_probes: Optional[int] = None) -> ErrorReport:
    """
    δ_𝓘 = max_ρ δ(ρ), searched over purified inputs on S⊗R.

    The probe set is evaluated first; the best probe then seeds one of the
    multistart descents on F_e². The reported value never falls below the
    best probe. A run that hits the iteration cap returns converged=False;
    its value is still a valid lower bound on δ_𝓘.
    """
    seed = Config.SEED if seed is None else seed
    starts = Config.OPTIMIZER_STARTS if starts is None else starts
    max_iter = Config.OPTIMIZER_MAX_ITER if max_iter is None else max_iter
    random_probes = Config.RANDOM_PROBES if random_probes is None else random_probes
    rng = np.random.default_rng(seed)

    objective = _FidelityObjective(error_channel(impl, target))
    d = target.d_S

    probe_deltas = []
    best_psi, best_value = None, np.inf
    for name, psi in _probe_states(target, rng, random_probes):
        value = objective.value(psi)
        probe_deltas.append((name, _delta_from_fidelity_squared(value)))
        if value < best_value:
            best_psi, best_value = psi, value

    total_iterations = 0
    converged = True
    final_grad = 0.0
    initial = [best_psi] + [
        _normalize(rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d)))
        for _ in range(max(starts - 1, 0))
    ]
    for index, psi0 in enumerate(initial):
        psi, value, iterations, grad_norm, ok = _descend(objective, psi0, max_iter)
        total_iterations += iterations
        log_with_context(logger, logging.DEBUG, "Optimizer start finished",
                         start=index, iterations=iterations, fidelity_squared=value,
                         gradient_norm=grad_norm, converged=ok)
        if value < best_value:
            best_psi, best_value = psi, value
            converged, final_grad = ok, grad_norm
        elif index == 0:
            converged, final_grad = ok, grad_norm

    worst = _delta_from_fidelity_squared(best_value)
    log_with_context(logger, logging.INFO, "Worst-case error search complete",
                     worst_delta=worst, starts=len(initial), iterations=total_iterations,
                     converged=converged)
    return ErrorReport(
        worst_delta=worst,
        argmax_state=PureState.normalized(best_psi.reshape(-1)),
        probe_deltas=probe_deltas,
        starts=len(initial),
        iterations=total_iterations,
        converged=converged,
        gradient_norm=final_grad,
    )


def conservation_residual(impl: ImplementationSet, A_S: HermitianObservable) -> ConservationResidual:
    """
    Deviation of U_SE from conserving A_S + A_E.

    op_norm is ‖X‖ for X = A_tot − U†A_tot U; state_weighted is
    √Tr[(1/d_S ⊗ ρ_E) X²].
    """
    a_tot = impl.total_observable(A_S)
    u = impl.U_SE.mat
    x = a_tot - dagger(u) @ a_tot @ u
    x = (x + dagger(x)) / 2.0
    op_norm = operator_norm(x, hermitian=True)

    d_s = impl.d_S
    if isinstance(impl.rho_E, PureState):
        columns = kron(np.eye(d_s), impl.rho_E.vec.reshape(-1, 1))
        weighted = float(np.linalg.norm(x @ columns) ** 2) / d_s
    else:
        weight = kron(np.eye(d_s) / d_s, impl.rho_E.mat)
        weighted = float(np.real(np.trace(weight @ x @ x)))
    return ConservationResidual(op_norm, float(np.sqrt(max(weighted, 0.0))))


def realizes_within(impl: ImplementationSet, target: TargetSpec, delta: float, **search) -> bool:
    """True iff the worst-case error is at most delta (plus 1e-9)."""
    return worst_case_error(impl, target, **search).worst_delta <= delta + REALIZE_SLACK


def mixing_deltas(impl: ImplementationSet, target: TargetSpec, rho_S: AnyState,
                  components: Sequence[Tuple[float, AnyState]]) -> Tuple[float, float]:
    """
    Compare per-component errors with the error of the mixed environment.

    Args:
        components: (q_η, ρ_η) pairs with Σ q_η ρ_η = ρ_E

    Returns:
        (Σ_η q_η δ_η², δ²)
    """
    weights = [q for q, _ in components]
    states = [s for _, s in components]
    rho_E = impl.rho_E.projector() if isinstance(impl.rho_E, PureState) else impl.rho_E.mat
    if np.max(np.abs(mixture(states, weights).mat - rho_E)) > 1e-9:
        raise ValidationError("components do not average to rho_E")
    averaged = sum(q * error_for_state(impl.with_environment(s), target, rho_S) ** 2
                   for q, s in components)
    return float(averaged), error_for_state(impl, target, rho_S) ** 2


def deltabar(impl: ImplementationSet, target: TargetSpec, rho_S: AnyState,
             basis: Sequence[PureState]) -> float:
    """δ̄ = √(δ(ρ_S)² + Σ_i r_i δ(ψ_i)²) with r_i = ⟨ψ_i|ρ_S|ψ_i⟩."""
    channel = error_channel(impl, target)
    rho = rho_S.projector() if isinstance(rho_S, PureState) else rho_S.mat
    total = entanglement_bures(rho_S, channel) ** 2
    for psi in basis:
        r = float(np.real(np.vdot(psi.vec, rho @ psi.vec)))
        total += r * entanglement_bures(psi, channel) ** 2
    return float(np.sqrt(total))


__all__ = [
    "ConservationResidual",
    "ErrorReport",
    "ImplementationSet",
    "TargetSpec",
    "conservation_residual",
    "deltabar",
    "environment_output",
    "error_channel",
    "error_for_state",
    "induced_channel",
    "joint_output",
    "mixing_deltas",
    "realizes_within",
    "worst_case_error",
]
