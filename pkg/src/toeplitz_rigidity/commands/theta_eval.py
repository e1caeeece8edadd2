"""
Evaluate Jacobi theta functions and their transformation-law residuals.
"""

import logging
from typing import Any, Dict, List, Sequence, Tuple

from ..config import RunConfig
from ..sampling import GOLDEN, tau_samples
from ..theta import ModularPoint, ThetaKind, s_law_residuals, shift_law_residual, theta_eval, theta_prime_zero
from . import FAIL, INFO, PASS, CommandResult, dry_run_result

logger = logging.getLogger(__name__)

SUITE_TOLERANCE = 1e-9
SHIFT_STEPS = (-4, -2, 2, 4)
SHIFT_GAMMAS = (1, 2, 3)
SHIFT_POINT = (0.13 + 0.07j, 0.21, 0.3 + 1.1j)


def s_law_samples(count: int = 25) -> List[Tuple[float, complex]]:
    """(y, τ) pairs with y real in [0.05, 0.95], away from the zeros of both sides."""
    taus = tau_samples(count)
    return [(0.05 + 0.9 * ((k * GOLDEN) % 1.0), tau) for k, tau in enumerate(taus, start=1)]


def s_law_suite(samples: Sequence[Tuple[float, complex]], tol: float = 1e-12,
                max_factors: int = 2000) -> Dict[str, Any]:
    rows = []
    for y, tau in samples:
        first, second = s_law_residuals(y, tau, tol, max_factors)
        rows.append({"y": y, "tau": tau, "theta_quotient": first, "theta1_theta2": second})
    worst = max((max(r["theta_quotient"], r["theta1_theta2"]) for r in rows), default=0.0)
    return {"name": "theta-s-law", "samples": len(rows), "max_residual": worst, "rows": rows}


def shift_law_suite(tol: float = 1e-12, max_factors: int = 2000) -> Dict[str, Any]:
    x, t, tau = SHIFT_POINT
    rows = []
    for gamma in SHIFT_GAMMAS:
        for lam in SHIFT_STEPS:
            for mu in SHIFT_STEPS:
                residual = shift_law_residual(x, t, gamma, lam, mu, tau, tol, max_factors)
                rows.append({"gamma": gamma, "lambda": lam, "mu": mu, "residual": residual})
    worst = max(r["residual"] for r in rows)
    return {"name": "theta-shift-law", "samples": len(rows), "max_residual": worst, "rows": rows}


def run_theta_eval(config: RunConfig, kind: str, v: complex, tau: complex, suite: bool = False,
                   dry_run: bool = False) -> CommandResult:
    """
    Evaluate θ_kind(v, τ) and optionally run the law suites.

    Args:
        config: Validated run configuration
        kind: theta, theta1, theta2 or theta3
        v: Elliptic variable
        tau: Point of the upper half plane
        suite: Also run the S-law and shift-law residual suites
        dry_run: Validate inputs only

    Returns:
        CommandResult with the value (and suite residuals)
    """
    theta_kind = ThetaKind.parse(kind)
    pt = ModularPoint(tau, config.q_trunc)
    if dry_run:
        return dry_run_result("theta-eval", config, {"kind": theta_kind.value, "v": v, "tau": pt.tau})

    kw = dict(tol=config.product_tolerance, max_factors=config.max_product_factors, precision=config.precision)
    value = theta_eval(theta_kind, v, pt, **kw)
    report: Dict[str, Any] = {
        "kind": theta_kind.value,
        "v": v,
        "tau": pt.tau,
        "value": value,
        "theta_prime_zero": theta_prime_zero(pt, **kw),
        "precision": config.precision,
    }
    summary = [{"check": f"{theta_kind.value}({v}, {pt.tau})", "value": value}]
    verdict = INFO
    if suite:
        suites = [s_law_suite(s_law_samples(), config.product_tolerance, config.max_product_factors),
                  shift_law_suite(config.product_tolerance, config.max_product_factors)]
        report["suites"] = suites
        verdict = PASS if all(s["max_residual"] < SUITE_TOLERANCE for s in suites) else FAIL
        summary += [{"check": s["name"], "value": s["max_residual"]} for s in suites]
    logger.info(f"{theta_kind.value}({v}, {pt.tau}) = {value}")
    return CommandResult("theta-eval", verdict, report, summary=summary)
