"""
Command implementations behind the cc entry point.

Each cmd_* function takes already-parsed arguments, writes its output files
and returns what it wrote, so main.py only deals with argument parsing and
exit statuses.
"""
import logging
import math
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from coherence.bounds import (
    NormConvention,
    SQRT2,
    effective_norm,
    region_boundaries,
    theorem1_bound,
    theorem2_bound,
    theorem3_bound,
)
from coherence.implementation import TargetSpec, conservation_residual, worst_case_error
from coherence.measures import gate_asymmetry, qfi, violation_asymmetry
from coherence.protocol import (
    gaussian_protocol,
    protocol_error_bound,
    protocol_threshold,
    zeta_for_delta,
    zeta_for_fisher,
)
from coherence.reports import render_fig2_svg, write_csv, write_json, write_svg
from coherence.suites import SUITES, CheckOutcome, run_suite
from utils.error_handler import EXIT_OK, EXIT_VIOLATION, OutOfDomainError, UnknownSuiteError, ValidationError
from utils.logger import get_logger, log_with_context

logger = get_logger(__name__)

FIG2_HEADER = ("delta", "sqrtF_regionA_boundary", "sqrtF_regionB_boundary", "domain_ok")
VERIFY_HEADER = ("suite", "trials", "violations", "worst_margin", "seed")
SWEEP_HEADER = ("zeta", "sqrtF", "delta_measured", "product_delta_times_sqrtF",
                "theorem1_lower", "theorem2_upper", "below_threshold")
# measured values are compared against continuum bounds with this allowance
LATTICE_SLACK = 1e-6


def cmd_fig2(target: TargetSpec, delta_min: float, delta_max: float, steps: int,
             out_csv: str, out_svg: Optional[str] = None,
             convention: NormConvention = NormConvention.GIVEN) -> List[Dict]:
    """
    Region boundaries at steps log-spaced δ in [delta_min, delta_max].

    Raises:
        ValidationError: empty or out-of-range δ interval, steps < 1
    """
    if not 0.0 < delta_min < delta_max <= SQRT2 + 1e-12:
        raise ValidationError(f"need 0 < delta_min < delta_max <= sqrt(2), got [{delta_min}, {delta_max}]")
    if steps < 1:
        raise ValidationError(f"steps must be at least 1, got {steps}")

    asym = gate_asymmetry(target.U_S, target.A_S)
    norm = effective_norm(target.A_S, convention)
    log_with_context(logger, logging.INFO, "Computing region boundaries",
                     model=target.name, asym=asym, normA=norm, steps=steps)

    rows = []
    for delta in np.geomspace(delta_min, delta_max, steps):
        lower, upper, domain_ok = region_boundaries(asym, norm, float(delta))
        rows.append({"delta": float(delta), "sqrtF_regionA_boundary": lower,
                     "sqrtF_regionB_boundary": upper, "domain_ok": domain_ok})
    write_csv(out_csv, FIG2_HEADER, rows)

    if out_svg:
        markup = render_fig2_svg([r["delta"] for r in rows],
                                 [r["sqrtF_regionA_boundary"] for r in rows],
                                 [r["sqrtF_regionB_boundary"] for r in rows],
                                 title=f"{target.name}: A = {asym:.4g}, ‖A_S‖ = {norm:.4g}")
        write_svg(out_svg, markup)
    return rows


def resolve_zeta(target: TargetSpec, zeta: Optional[float] = None, target_F: Optional[float] = None,
                 target_delta: Optional[float] = None,
                 convention: NormConvention = NormConvention.GIVEN) -> float:
    """Pointer width from exactly one of ζ, 𝓕 or a target error."""
    given = [v is not None for v in (zeta, target_F, target_delta)]
    if sum(given) != 1:
        raise ValidationError("exactly one of zeta, target_F and target_delta must be given")
    if zeta is not None:
        if not zeta > 0:
            raise ValidationError(f"zeta must be positive, got {zeta}")
        return float(zeta)
    if target_F is not None:
        return zeta_for_fisher(target_F)
    return zeta_for_delta(target, target_delta, convention)


def cmd_protocol(target: TargetSpec, zeta: Optional[float] = None, target_F: Optional[float] = None,
                 target_delta: Optional[float] = None, tail: Optional[float] = None,
                 out_json: Optional[str] = None, seed: Optional[int] = None,
                 convention: NormConvention = NormConvention.GIVEN) -> Dict:
    """
    Build the Gaussian-pointer set for the target and measure it.

    Below the protocol threshold the report is still produced; delta_bound
    is null and bound_applicable is false.
    """
    zeta = resolve_zeta(target, zeta, target_F, target_delta, convention)
    run = gaussian_protocol(target, zeta, tail)
    impl = run.implementation

    asym = gate_asymmetry(target.U_S, target.A_S)
    norm = effective_norm(target.A_S, convention)
    qfi_measured = qfi(impl.rho_E, impl.A_E)
    try:
        delta_bound = protocol_error_bound(target, zeta, convention)
    except OutOfDomainError as e:
        logger.warning(f"Error bound not applicable: {e}")
        delta_bound = None

    error = worst_case_error(impl, target, seed=seed)
    delta = error.worst_delta
    residual = conservation_residual(impl, target.A_S)
    asym_violation = violation_asymmetry(impl.U_SE, impl.total_observable(target.A_S))

    sqrt_f = math.sqrt(qfi_measured)
    if delta > 0.0:
        lower = theorem1_bound(asym, min(delta, SQRT2), norm)
        t3 = theorem3_bound(asym, asym_violation, delta, norm)
    else:
        lower, t3 = 0.0, None

    report = {
        "model": target.name,
        "norm_convention": convention.value,
        "asym": asym,
        "normA": norm,
        "zeta": zeta,
        "threshold_zeta": protocol_threshold(target),
        "lattice": {
            "s": run.lattice.spacing,
            "N": run.lattice.half_width,
            "margin": run.lattice.margin,
            "dim": run.lattice.dim,
        },
        "qfi_measured": qfi_measured,
        "qfi_nominal": 4.0 * zeta ** 2,
        "delta_bound": delta_bound,
        "bound_applicable": delta_bound is not None,
        "delta_measured": delta,
        "within_bound": None if delta_bound is None else delta <= delta_bound + LATTICE_SLACK,
        "theorem1_check": {
            "sqrtF": sqrt_f,
            "lower_bound": lower,
            "holds": sqrt_f >= lower - LATTICE_SLACK,
        },
        "conservation_residuals": {
            "op_norm": residual.op_norm,
            "state_weighted": residual.state_weighted,
        },
        "asym_violation": asym_violation,
        "theorem3_bound": t3,
        "optimizer": error.to_dict()["optimizer"],
        "probes": error.to_dict()["probes"],
    }
    log_with_context(logger, logging.INFO, "Protocol measured",
                     model=target.name, zeta=zeta, delta_measured=delta, delta_bound=delta_bound,
                     qfi=qfi_measured)
    if out_json:
        write_json(out_json, report)
    return report


def cmd_verify(suites: Sequence[str], trials: int, seed: int, dim_max: int,
               out_csv: Optional[str] = None) -> Tuple[List[CheckOutcome], int]:
    """
    Run the named suites in order.

    Returns:
        (outcomes, exit status): EXIT_VIOLATION when any suite has violations
    """
    names = list(suites) or list(SUITES)
    unknown = [name for name in names if name not in SUITES]
    if unknown:
        raise UnknownSuiteError(unknown[0], SUITES)
    if trials < 1:
        raise ValidationError(f"trials must be at least 1, got {trials}")
    outcomes = []
    for name in names:
        logger.info(f"Running suite '{name}' ({trials} trials, seed {seed})")
        outcomes.append(run_suite(name, trials, seed=seed, dim_max=dim_max))
    if out_csv:
        write_csv(out_csv, VERIFY_HEADER, [o.row() for o in outcomes])

    failed = [o.suite_name for o in outcomes if not o.passed]
    if failed:
        logger.error(f"Violations in suites: {', '.join(failed)}")
        return outcomes, EXIT_VIOLATION
    logger.info(f"All {len(outcomes)} suites passed")
    return outcomes, EXIT_OK


def cmd_sweep(target: TargetSpec, zetas: Sequence[float], out_csv: str,
              seed: Optional[int] = None, tail: Optional[float] = None,
              convention: NormConvention = NormConvention.GIVEN) -> List[Dict]:
    """
    Measured error against pointer width; δ·√𝓕 approaches 𝒜 as ζ grows.

    Rows with ζ below the protocol threshold are kept and flagged.
    """
    zetas = [float(z) for z in zetas]
    if not zetas:
        raise ValidationError("sweep needs at least one zeta")
    if any(z <= 0 for z in zetas):
        raise ValidationError("every zeta must be positive")
    if any(b <= a for a, b in zip(zetas, zetas[1:])):
        raise ValidationError("zeta values must be strictly ascending")

    asym = gate_asymmetry(target.U_S, target.A_S)
    norm = effective_norm(target.A_S, convention)
    threshold = protocol_threshold(target)
    rows = []
    for zeta in zetas:
        run = gaussian_protocol(target, zeta, tail)
        impl = run.implementation
        sqrt_f = math.sqrt(qfi(impl.rho_E, impl.A_E))
        delta = worst_case_error(impl, target, seed=seed).worst_delta
        below = zeta < threshold * (1.0 - 1e-12)
        if below:
            logger.warning(f"zeta={zeta:.6g} is below the protocol threshold {threshold:.6g}")
        rows.append({
            "zeta": zeta,
            "sqrtF": sqrt_f,
            "delta_measured": delta,
            "product_delta_times_sqrtF": delta * sqrt_f,
            "theorem1_lower": theorem1_bound(asym, min(delta, SQRT2), norm) if delta > 0 else None,
            "theorem2_upper": theorem2_bound(asym, delta, norm)[0] if delta > 0 else None,
            "below_threshold": below,
        })
        log_with_context(logger, logging.INFO, "Sweep point",
                         zeta=zeta, sqrtF=sqrt_f, delta_measured=delta)
    write_csv(out_csv, SWEEP_HEADER, rows)
    return rows


__all__ = [
    "FIG2_HEADER",
    "SWEEP_HEADER",
    "VERIFY_HEADER",
    "cmd_fig2",
    "cmd_protocol",
    "cmd_sweep",
    "cmd_verify",
    "resolve_zeta",
]
