"""
Randomized verification suites for the coherence-cost inequalities.

Every suite draws its trials from trial_rng(seed, trial), evaluates one or
more inequalities lhs ≤ rhs per trial and folds them into a CheckOutcome.
A check is violated when rhs − lhs < −slack.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional

import numpy as np
from scipy.linalg import expm

from config import Config
from coherence.bounds import (
    NormConvention,
    chi,
    effective_norm,
    single_state_bound,
    theorem1_bound,
    theorem3_bound,
)
from coherence.channels import entanglement_bures
from coherence.implementation import (
    ImplementationSet,
    TargetSpec,
    deltabar,
    environment_output,
    error_channel,
    mixing_deltas,
    worst_case_error,
)
from coherence.measures import (
    extremal_states,
    gate_asymmetry,
    mixture,
    qfi,
    variance,
    violation_asymmetry,
)
from coherence.models import bitflip_target, erasure_target
from coherence.numerics import dagger, kron, operator_norm, partial_trace, spectral_range
from coherence.protocol import fidelity_lower_bound, gaussian_protocol
from coherence.sampling import (
    haar_unitary,
    perturbed_unitary,
    random_conserving_instance,
    random_decomposition,
    random_hermitian,
    random_orthonormal_basis,
    random_pure_state,
    random_state,
    random_target,
    trial_rng,
)
from coherence.states import (
    DensityMatrix,
    HermitianObservable,
    PureState,
    UnitaryGate,
    bures_distance,
    density_of,
    expectation,
    purify,
)
from utils.error_handler import UnknownSuiteError, ValidationError
from utils.logger import get_logger, log_with_context

logger = get_logger(__name__)

SQRT2 = math.sqrt(2.0)
# below this δ̄ the fixed-state bound is only checked through χ ≈ 0
EXACT_DELTA = 1e-12
EXACT_CHI = 1e-6
# Uhlmann partner norms below this carry no usable direction
PARTNER_NORM_FLOOR = 1e-9
GAUSSIAN_TRIAL_PERIOD = 10


@dataclass
class CheckOutcome:
    """Running tally of one suite: how many checks ran, failed, and the tightest margin."""

    suite_name: str
    trials: int
    seed: int
    slack: float = field(default_factory=lambda: Config.SLACK)
    checks: int = 0
    violations: int = 0
    worst_margin: float = math.inf
    worst_label: str = ""

    def observe(self, lhs: float, rhs: float, label: str) -> float:
        """Record lhs ≤ rhs; returns the margin rhs − lhs."""
        margin = float(rhs - lhs)
        self.checks += 1
        if margin < self.worst_margin:
            self.worst_margin = margin
            self.worst_label = label
        if margin < -self.slack:
            self.violations += 1
            log_with_context(logger, logging.WARNING, "Inequality violated",
                             suite=self.suite_name, check=label, lhs=lhs, rhs=rhs, margin=margin)
        return margin

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def row(self) -> Dict:
        return {
            "suite": self.suite_name,
            "trials": self.trials,
            "violations": self.violations,
            "worst_margin": self.worst_margin,
            "seed": self.seed,
        }


def _start(name: str, trials: int, seed: Optional[int], slack: Optional[float]) -> CheckOutcome:
    if trials < 1:
        raise ValidationError(f"trials must be at least 1, got {trials}")
    seed = Config.SEED if seed is None else seed
    outcome = CheckOutcome(name, trials, seed)
    if slack is not None:
        outcome.slack = slack
    log_with_context(logger, logging.DEBUG, "Suite started", suite=name, trials=trials, seed=seed)
    return outcome


def _finish(outcome: CheckOutcome) -> CheckOutcome:
    level = logging.INFO if outcome.passed else logging.WARNING
    log_with_context(logger, level, "Suite finished",
                     suite=outcome.suite_name, trials=outcome.trials, checks=outcome.checks,
                     violations=outcome.violations, worst_margin=outcome.worst_margin,
                     worst_check=outcome.worst_label)
    return outcome


def _dimension(rng: np.random.Generator, dim_max: int, low: int = 2) -> int:
    return int(rng.integers(low, max(dim_max, low) + 1))


def key_relation_gap(sigma1, sigma2, X) -> Optional[tuple]:
    """
    (Δ, ℓ·(V(σ1) + V(σ2))) for the key relation, or None when L(σ1, σ2) ≥ 1.

    Δ = |Tr[X(σ1 − σ2)]| and ℓ = L/(1 − L) with L the Bures distance.
    """
    distance = bures_distance(sigma1, sigma2)
    if distance >= 1.0:
        return None
    ell = distance / (1.0 - distance)
    mat = getattr(X, "mat", X)
    gap = abs(expectation(sigma1, mat) - expectation(sigma2, mat))
    return gap, ell * (variance(sigma1, mat) + variance(sigma2, mat))


def check_lemma_key_relation(trials: int, seed: Optional[int] = None, dim_max: int = 4,
                             slack: Optional[float] = None) -> CheckOutcome:
    """Random σ1, σ2 with L(σ1, σ2) < 1 and Hermitian X: Δ ≤ ℓ(V_X(σ1) + V_X(σ2))."""
    outcome = _start("lemma3", trials, seed, slack)
    for trial in range(trials):
        rng = trial_rng(outcome.seed, trial)
        dim = _dimension(rng, dim_max)
        sigma1 = density_of(random_state(dim, rng))
        tau = density_of(random_state(dim, rng))
        t = rng.uniform(0.0, 0.7)
        sigma2 = DensityMatrix((1.0 - t) * sigma1.mat + t * tau.mat)
        if rng.random() < 0.5:
            u = perturbed_unitary(np.eye(dim), rng, rng.uniform(0.0, 0.3)).mat
            rotated = DensityMatrix(u @ sigma2.mat @ dagger(u))
            if bures_distance(sigma1, rotated) < 1.0:
                sigma2 = rotated
        x = random_hermitian(dim, rng, scale=10.0 ** rng.uniform(-1.0, 2.0))
        evaluated = key_relation_gap(sigma1, sigma2, x)
        if evaluated is None:
            continue
        gap, bound = evaluated
        outcome.observe(gap, bound, "key_relation")
    return _finish(outcome)


def _l1_trial(rng: np.random.Generator, outcome: CheckOutcome):
    d_a = int(rng.integers(2, 4))
    d_b = int(rng.integers(2, 4))
    d_c = 2
    rho0 = density_of(random_state(d_a, rng))
    rho1 = density_of(random_state(d_a, rng))
    rho_b = density_of(random_state(d_b, rng))
    u_a = haar_unitary(d_a, rng)

    dim = d_a * d_b * d_c
    h = random_hermitian(dim, rng)
    h /= operator_norm(h, hermitian=True)
    u_abc = kron(u_a, np.eye(d_b * d_c)) @ expm(-1j * rng.uniform(0.0, 1.0) * h)

    # Λ_A is induced by U_ABC with E = B⊗C in ρ_B ⊗ |0⟩⟨0|
    ancilla = np.diag([1.0, 0.0]).astype(np.complex128)
    env = DensityMatrix(kron(rho_b.mat, ancilla))
    impl = ImplementationSet(d_a, HermitianObservable(np.zeros((d_b * d_c,) * 2)), env, UnitaryGate(u_abc))
    target = TargetSpec(HermitianObservable(np.zeros((d_a, d_a))), UnitaryGate(u_a), name="l1")
    channel = error_channel(impl, target)

    rho01 = mixture([rho0, rho1], [0.5, 0.5])
    delta0 = entanglement_bures(rho0, channel)
    delta1 = entanglement_bures(rho1, channel)
    delta01 = entanglement_bures(rho01, channel)

    def marginals(rho):
        full = u_abc @ kron(rho.mat, env.mat) @ dagger(u_abc)
        sigma_ab = partial_trace((full + dagger(full)) / 2.0, "S", (d_a * d_b, d_c))
        return DensityMatrix(sigma_ab), DensityMatrix(partial_trace(sigma_ab, "E", (d_a, d_b)))

    sigma0_ab, sigma0_b = marginals(rho0)
    sigma1_ab, sigma1_b = marginals(rho1)
    for label, rho, sigma_ab, sigma_b, delta in (("L1-2[0]", rho0, sigma0_ab, sigma0_b, delta0),
                                                 ("L1-2[1]", rho1, sigma1_ab, sigma1_b, delta1)):
        ideal = DensityMatrix(kron(u_a @ rho.mat @ dagger(u_a), sigma_b.mat))
        outcome.observe(bures_distance(sigma_ab, ideal), 2.0 * delta, label)

    # Uhlmann partner of U_A ψ01 inside the global output
    psi0 = purify(rho0).vec.reshape(d_a, d_a)
    psi1 = purify(rho1).vec.reshape(d_a, d_a)
    psi01 = np.hstack([psi0, psi1]) / SQRT2
    phi_b = purify(rho_b).vec.reshape(d_b, d_b)
    u_tensor = u_abc.reshape(d_a, d_b, d_c, d_a, d_b, d_c)[..., 0]
    output = np.einsum("xyzab,ar,bq->xryqz", u_tensor, psi01, phi_b)
    chi_a = u_a @ psi01
    partner = np.einsum("xr,xryqz->yqz", np.conj(chi_a), output)
    norm = float(np.linalg.norm(partner))

    fidelity01 = 1.0 - delta01 ** 2 / 2.0
    outcome.observe(abs(norm - fidelity01), 0.0, "partner_fidelity")

    if norm < PARTNER_NORM_FLOOR:
        detour = 2.0 * SQRT2
    else:
        partner /= norm
        sigma_prime = DensityMatrix(np.einsum("yqz,wqz->yw", partner, np.conj(partner)))
        detour = bures_distance(sigma0_b, sigma_prime) + bures_distance(sigma_prime, sigma1_b)
    outcome.observe(detour, 2.0 * SQRT2 * delta01, "L1-1")
    if delta01 <= 1.0 / (2.0 * SQRT2):
        outcome.observe(detour, 2.0 * delta01, "L1-1-stronger")


def check_lemma_L1(trials: int, seed: Optional[int] = None, dim_max: int = 4,
                   slack: Optional[float] = None) -> CheckOutcome:
    """
    Local-channel lemma on A⊗B with a qubit ancilla C.

    The joint gate is U_A ⊗ 1 after a random rotation of strength in [0, 1],
    so δ ranges from exact to badly scrambled. The intermediate state of B
    is built from the Uhlmann partner of U_A|ψ01⟩ as in the existence proof.
    """
    outcome = _start("l1", trials, seed, slack)
    for trial in range(trials):
        _l1_trial(trial_rng(outcome.seed, trial), outcome)
    return _finish(outcome)


def _up_down(impl: ImplementationSet, target: TargetSpec):
    up, down = extremal_states(target.U_S, target.A_S)
    sigma_up = environment_output(impl, up)
    sigma_down = environment_output(impl, down)
    both = mixture([up, down], [0.5, 0.5])
    return up, down, both, sigma_up, sigma_down


def _fact_trial(rng: np.random.Generator, dim: int, outcome: CheckOutcome):
    a = random_hermitian(dim, rng)
    low, _ = spectral_range(a)
    a = a - low * np.eye(dim)
    u = expm(-1j * rng.uniform(0.0, 1.0) * random_hermitian(dim, rng))
    rotated = dagger(u) @ a @ u
    rho = random_state(dim, rng)
    shift = operator_norm(a - rotated)
    v_a = variance(rho, a)
    v_rot = variance(rho, (rotated + dagger(rotated)) / 2.0)
    outcome.observe(abs(v_a ** 2 - v_rot ** 2), shift * (2.0 * v_a + shift), "fact")


def check_conservation_lemmas(trials: int, seed: Optional[int] = None, dim_max: int = 3,
                              slack: Optional[float] = None) -> CheckOutcome:
    """
    Ingredients of the lower bound on random exactly conserving sets.

    Per trial: the variance budget of the environment outputs, the
    asymmetry-transfer inequality, averaging of the extremal errors, the
    mixing bound for a random decomposition of ρ_E, the lower bound itself
    with the measured δ(ρ_↑+↓), and the variance-perturbation fact.
    """
    outcome = _start("conservation", trials, seed, slack)
    for trial in range(trials):
        rng = trial_rng(outcome.seed, trial)
        d_s = _dimension(rng, min(dim_max, 3))
        d_e = int(rng.integers(2, 4))
        target, impl = random_conserving_instance(d_s, d_e, rng)
        a_e = impl.A_E.mat
        norm_given = effective_norm(target.A_S, NormConvention.GIVEN)
        norm_shifted = effective_norm(target.A_S, NormConvention.SHIFTED)
        asym = gate_asymmetry(target.U_S, target.A_S)

        up, down, both, sigma_up, sigma_down = _up_down(impl, target)
        outcome.observe(variance(sigma_up, a_e) + variance(sigma_down, a_e),
                        2.0 * (variance(impl.rho_E, a_e) + norm_shifted), "help1")

        channel = error_channel(impl, target)
        delta_both = entanglement_bures(both, channel)
        transfer = abs(expectation(sigma_up, a_e) - expectation(sigma_down, a_e))
        outcome.observe(2.0 * asym, transfer + 4.0 * delta_both * norm_given, "help2")
        outcome.observe(entanglement_bures(up, channel) + entanglement_bures(down, channel),
                        2.0 * delta_both, "averaging")

        rho_s = random_state(d_s, rng)
        components = random_decomposition(impl.rho_E, rng)
        averaged, mixed = mixing_deltas(impl, target, rho_s,
                                        list(zip(components.weights, components.states)))
        outcome.observe(averaged, 2.0 * mixed, "mixing")

        if delta_both > 0.0:
            lower = theorem1_bound(asym, min(delta_both, SQRT2), norm_shifted)
            outcome.observe(lower, math.sqrt(qfi(impl.rho_E, a_e)), "lower_bound")

        _fact_trial(rng, _dimension(rng, dim_max), outcome)
    return _finish(outcome)


def _random_fixed_state_trial(rng: np.random.Generator, dim_max: int, outcome: CheckOutcome):
    d_s = _dimension(rng, min(dim_max, 3))
    target, impl = random_conserving_instance(d_s, int(rng.integers(2, 4)), rng)
    rho_s = random_state(d_s, rng)
    basis = random_orthonormal_basis(d_s, rng)
    _fixed_state_check(impl, target, rho_s, basis, outcome, "fixed_state")


def _gaussian_fixed_state_trial(rng: np.random.Generator, trial: int, outcome: CheckOutcome):
    zeta = rng.uniform(4.0, 10.0)
    if (trial // GAUSSIAN_TRIAL_PERIOD) % 2 == 0:
        target = bitflip_target()
        rho_s = random_state(2, rng)
        basis = random_orthonormal_basis(2, rng)
        label = "fixed_state_bitflip"
    else:
        target = erasure_target()
        theta = rng.uniform(0.0, math.pi / 2.0)
        vec = np.zeros(4, dtype=np.complex128)
        vec[0], vec[3] = math.cos(theta), math.sin(theta)
        rho_s = PureState.normalized(vec)
        basis = [PureState.basis(4, 0), PureState.basis(4, 3)]
        label = "fixed_state_erasure"
    impl = gaussian_protocol(target, zeta).implementation
    _fixed_state_check(impl, target, rho_s, basis, outcome, label)


def _fixed_state_check(impl, target, rho_s, basis, outcome: CheckOutcome, label: str):
    fluctuation = chi(rho_s, basis, target)
    error = deltabar(impl, target, rho_s, basis)
    if error <= EXACT_DELTA:
        outcome.observe(fluctuation, EXACT_CHI, f"{label}_exact")
        return
    norm = effective_norm(target.A_S, NormConvention.SHIFTED)
    outcome.observe(single_state_bound(fluctuation, error, norm),
                    math.sqrt(qfi(impl.rho_E, impl.A_E)), label)


def check_single_state_bound(trials: int, seed: Optional[int] = None, dim_max: int = 3,
                             slack: Optional[float] = None) -> CheckOutcome:
    """
    √𝓕(ρ_E) ≥ χ/(5δ̄) − 4‖A_S‖ for a fixed input state and basis.

    Every tenth trial uses a Gaussian-pointer set, alternating between the
    bit-flip gate on a random input and erasure of α|00⟩ + β|11⟩.
    """
    outcome = _start("single_state", trials, seed, slack)
    for trial in range(trials):
        rng = trial_rng(outcome.seed, trial)
        if trial % GAUSSIAN_TRIAL_PERIOD == GAUSSIAN_TRIAL_PERIOD - 1:
            _gaussian_fixed_state_trial(rng, trial, outcome)
        else:
            _random_fixed_state_trial(rng, dim_max, outcome)
    return _finish(outcome)


def time_ordered_bound(target: TargetSpec, zeta: float) -> float:
    """
    1 − λ_diff(X − X′)²(1 + 2a)²/4 for X = A_S/(2√2ζ) with A_S shifted to λ_min = 0.

    Only meaningful when a = ‖X‖ ≤ 1/9.
    """
    asym = gate_asymmetry(target.U_S, target.A_S)
    scale = 2.0 * SQRT2 * zeta
    a = effective_norm(target.A_S, NormConvention.SHIFTED) / scale
    spread = 2.0 * asym / scale
    return 1.0 - spread ** 2 / 4.0 * (1.0 + 2.0 * a) ** 2


def check_lemma_c2(trials: int, seed: Optional[int] = None, dim_max: int = 4,
                   slack: Optional[float] = None) -> CheckOutcome:
    """Time-ordered Gaussian kernel against its closed-form floor, with ‖X‖ ≤ 1/9."""
    outcome = _start("c2", trials, seed, slack)
    for trial in range(trials):
        rng = trial_rng(outcome.seed, trial)
        d_s = _dimension(rng, dim_max)
        target = random_target(d_s, rng)
        norm = effective_norm(target.A_S, NormConvention.SHIFTED)
        zeta = max(9.0 * norm / (2.0 * SQRT2), 1.0) * (1.0 + rng.exponential())
        rho = random_pure_state(d_s, rng)
        outcome.observe(time_ordered_bound(target, zeta),
                        fidelity_lower_bound(target, zeta, rho), "C2")
    return _finish(outcome)


def check_violation(trials: int, seed: Optional[int] = None, dim_max: int = 3,
                    slack: Optional[float] = None, max_strength: float = 0.5) -> CheckOutcome:
    """
    2(𝒜_{U_S} − 𝒜_{U_SE}) ≤ Δ + 4δ(ρ_↑+↓)‖A_S‖ on perturbed, non-conserving sets,
    and √𝓕 ≥ theorem3_bound at the searched worst-case error.

    The perturbation strength is drawn from [0, max_strength].
    """
    outcome = _start("violation", trials, seed, slack)
    for trial in range(trials):
        rng = trial_rng(outcome.seed, trial)
        d_s = _dimension(rng, min(dim_max, 3))
        target, conserving = random_conserving_instance(d_s, int(rng.integers(2, 4)), rng)
        u = perturbed_unitary(conserving.U_SE.mat, rng, rng.uniform(0.0, max_strength))
        impl = ImplementationSet(d_s, conserving.A_E, conserving.rho_E, u)
        asym_violation = violation_asymmetry(u, impl.total_observable(target.A_S))

        _, _, both, sigma_up, sigma_down = _up_down(impl, target)
        delta_both = entanglement_bures(both, error_channel(impl, target))
        transfer = abs(expectation(sigma_up, impl.A_E.mat) - expectation(sigma_down, impl.A_E.mat))
        asym = gate_asymmetry(target.U_S, target.A_S)
        norm = effective_norm(target.A_S, NormConvention.GIVEN)
        outcome.observe(2.0 * (asym - asym_violation), transfer + 4.0 * delta_both * norm, "violation")

        # the search is a lower estimate of δ_𝓘; δ(ρ_↑+↓) never exceeds the true value
        search = worst_case_error(impl, target, seed=int(rng.integers(2 ** 31)),
                                  starts=2, random_probes=4)
        delta = max(search.worst_delta, delta_both)
        if delta > 0.0:
            lower = theorem3_bound(asym, asym_violation, delta,
                                   effective_norm(target.A_S, NormConvention.SHIFTED))
            outcome.observe(lower, math.sqrt(qfi(impl.rho_E, impl.A_E)), "theorem3")
    return _finish(outcome)


SUITES: Dict[str, Callable[..., CheckOutcome]] = {
    "lemma3": check_lemma_key_relation,
    "l1": check_lemma_L1,
    "conservation": check_conservation_lemmas,
    "single_state": check_single_state_bound,
    "c2": check_lemma_c2,
    "violation": check_violation,
}


def run_suite(name: str, trials: int, seed: Optional[int] = None, dim_max: int = 4,
              slack: Optional[float] = None) -> CheckOutcome:
    """
    Run one registered suite.

    Raises:
        UnknownSuiteError: name is not in SUITES
        ValidationError: trials < 1
    """
    try:
        suite = SUITES[name]
    except KeyError:
        raise UnknownSuiteError(name, SUITES)
    return suite(trials, seed=seed, dim_max=dim_max, slack=slack)


__all__ = [
    "CheckOutcome",
    "SUITES",
    "check_conservation_lemmas",
    "check_lemma_L1",
    "check_lemma_c2",
    "check_lemma_key_relation",
    "check_single_state_bound",
    "check_violation",
    "key_relation_gap",
    "run_suite",
    "time_ordered_bound",
]
