"""
Self-test suite: the property checks a release of toeplitz-rigidity has to pass.

Each check returns a row ``{"check", "value", "tolerance", "verdict"}`` and
the suite verdict is FAIL as soon as one check fails. ``--only`` runs a
subset by name.
"""

import logging
import random
import time
from math import comb
from typing import Any, Callable, Dict, List, Optional, Sequence

from ..config import RunConfig
from ..datasets import load_dataset, resolve_dataset
from ..equivariant import (f_function, f_value, index_series, jacobi_spec, rigidity_scan, s_law_check,
                           signature_rational, signature_scan)
from ..exceptions import DomainError
from ..genera import GENUS_KINDS, ModelManifold, genus_modularity_report, genus_pair
from ..modularity import JacobiFormSpec, jacobi_law_check, modular_form_check
from ..odd_chern import (S3_UNIT, degree_c3, diagonal_loop, exterior_power_loop, s_mixing_residuals, su2_identity_map,
                         tensor_loop, transgression_value, winding_c1)
from ..sampling import t_samples, tau_samples, z_samples
from ..witten_bundles import KElement, k_character, lambda_series, q_bundle_qexp, symmetric_series, theta_bundle_qexp
from . import FAIL, PASS, CommandResult, combine, dry_run_result
from .check import TRANSGRESSION_GROUPS
from .fixedpoint import load_equivariant
from .theta_eval import s_law_samples, s_law_suite, shift_law_suite

logger = logging.getLogger(__name__)

LAMBDA_INSTANCES = 20
LAMBDA_ORDER = 6
SCAN_Q_TRUNC = 7
INDEX_Q_TRUNC = 5
INDEX_DATASETS = ("s3_circle_action", "x7_s2_rotation", "empty_fixed_set")
RIGIDITY_DATASETS = ("s3_circle_action", "x7_s2_rotation")
JACOBI_DATASET = "anomaly_n2"
S_LAW_SAMPLES = 4
GENUS_DATASET = "model_x7"


def _row(check: str, value: Any, tolerance: Optional[float], passed: bool, **detail) -> Dict[str, Any]:
    return {"check": check, "value": value, "tolerance": tolerance, "verdict": PASS if passed else FAIL, **detail}


def check_theta_laws(config: RunConfig) -> List[Dict[str, Any]]:
    tol = 1e-9
    s_suite = s_law_suite(s_law_samples(25), config.product_tolerance, config.max_product_factors)
    shift = shift_law_suite(config.product_tolerance, config.max_product_factors)
    return [_row("theta S-law", s_suite["max_residual"], tol, s_suite["max_residual"] < tol),
            _row("theta shift law", shift["max_residual"], tol, shift["max_residual"] < tol)]


def check_k_coefficients(config: RunConfig) -> List[Dict[str, Any]]:
    ranks = {"T": 5, "V": 3, "E": 4}
    tm, v, e = (KElement.symbol(b, ranks) for b in ("T", "V", "E"))
    theta2 = theta_bundle_qexp(2, tm, v, 3)
    q2 = q_bundle_qexp(2, ranks["E"], 3)
    expected_a = [KElement.trivial(1, ranks), -v, tm + KElement.exterior("V", 2, ranks)]
    expected_b = [KElement.trivial(1, ranks), -e, KElement.exterior("E", 2, ranks)]
    mismatches = [f"A{i}" for i in range(3) if theta2[i] != expected_a[i]]
    mismatches += [f"B{i}" for i in range(3) if q2[i] != expected_b[i]]
    return [_row("K-theory coefficients A0..A2, B0..B2", len(mismatches), 0, not mismatches,
                 mismatches=mismatches)]


def _random_bundle(rng: random.Random, ranks: Dict[str, int]) -> KElement:
    out = KElement.trivial(rng.randint(0, 2), ranks)
    for base in ranks:
        out = out + KElement.symbol(base, ranks) * rng.randint(0, 2)
    return out


def check_lambda_ring(config: RunConfig, instances: int = LAMBDA_INSTANCES,
                      order: int = LAMBDA_ORDER, seed: int = 7) -> List[Dict[str, Any]]:
    rng = random.Random(seed)
    failures = []
    for k in range(instances):
        ranks = {"A": rng.randint(1, 4), "B": rng.randint(1, 4)}
        values = {b: [rng.randint(-3, 3) for _ in range(r)] for b, r in ranks.items()}
        w, w2 = _random_bundle(rng, ranks), _random_bundle(rng, ranks)
        unit = symmetric_series(w, order) * lambda_series(w, order).scale_variable(-1)
        quotient = lambda_series(w - w2, order) * lambda_series(w2, order)
        direct = lambda_series(w, order)
        for i in range(order + 1):
            if k_character(unit[i], values) != (1 if i == 0 else 0):
                failures.append(f"S_t*L_-t instance {k} order {i}")
            if k_character(quotient[i], values) != k_character(direct[i], values):
                failures.append(f"L_t(W-W') instance {k} order {i}")
    return [_row(f"lambda-ring identities ({instances} instances)", len(failures), 0, not failures,
                 failures=failures[:10])]


def check_transgression(config: RunConfig) -> List[Dict[str, Any]]:
    samples = tau_samples(12)
    rows = []
    for j, group in TRANSGRESSION_GROUPS.items():
        law = modular_form_check(lambda tau, j=j: transgression_value(j, 7, tau, config.default_n), 4, group, samples)
        rows.append(_row(f"lambda_{j},7 weight 4 over {group.value}", law.max_residual, config.tolerance,
                         law.passed(config.tolerance)))
    residuals = [s_mixing_residuals(tau, config.default_n) for tau in samples]
    for key in ("theta1_theta2", "theta3"):
        worst = max(r[key] for r in residuals)
        rows.append(_row(f"degree-3 S-law with defect ({key})", worst, config.tolerance, worst < config.tolerance))
    return rows


def check_rigidity(config: RunConfig) -> List[Dict[str, Any]]:
    samples = t_samples(20, max_denominator=config.generator_denominator)
    rows = []
    for name in RIGIDITY_DATASETS:
        data = load_equivariant(name)
        for kind in ("W", "Wp"):
            scan = rigidity_scan(kind, data, samples, SCAN_Q_TRUNC, config.tolerance, threads=config.threads)
            rows.append(_row(f"rigidity F_{kind} through q^3 ({data.name})", scan.max_variation, config.tolerance,
                             scan.verdict == PASS, vacuous=scan.vacuous))

    # the c1 term alone gives (z+1)/(z-1) on the fixed circle; constancy holds from c3 on
    s3 = load_equivariant("s3_circle_action")
    closed = abs(signature_rational(s3, 3.0) - 2)
    rows.append(_row(f"signature c1 term (z+1)/(z-1) at z=3 ({s3.name})", closed, 1e-12, closed < 1e-12))
    signature = signature_scan(s3, z_samples(50), 1e-7, config.threads, odd_start=1)
    rows.append(_row(f"signature constancy from c3 ({s3.name})", signature.max_deviation, 1e-7,
                     signature.verdict == PASS, vacuous=signature.vacuous))
    x7 = load_equivariant("x7_s2_rotation")
    signature = signature_scan(x7, z_samples(50), 1e-7, config.threads)
    rows.append(_row(f"signature constancy ({x7.name})", signature.max_deviation, 1e-7,
                     signature.verdict == PASS and not signature.vacuous, component_scale=signature.component_scale))
    return rows


def check_jacobi(config: RunConfig) -> List[Dict[str, Any]]:
    data = load_equivariant(JACOBI_DATASET)
    spec = jacobi_spec("W", data)
    wrong = JacobiFormSpec.create(spec.index, spec.weight + 1, spec.group)
    count = config.tau_samples
    samples = list(zip(t_samples(count, max_denominator=config.generator_denominator), tau_samples(count)))

    def fn(t, tau):
        return f_value("W", data, t, tau, config.precision, config.product_tolerance,
                       config.max_product_factors, config.pole_tolerance)

    law = jacobi_law_check(fn, spec, samples)
    control = jacobi_law_check(fn, wrong, samples)
    s_law = s_law_check("L", data, samples[:S_LAW_SAMPLES], config.precision)
    modulus = s_law.spec["expected_character_modulus"]
    return [_row(f"Jacobi law F_W weight {spec.weight} index {spec.index} ({data.name})", law.max_residual, 1e-7,
                 law.passed(1e-7)),
            _row(f"negative control weight {wrong.weight}", control.max_residual, 1e-2,
                 control.max_residual > 1e-2),
            _row(f"S-law F_L -> F_W with |chi| = {modulus} ({data.name})", s_law.max_modulus_residual, 1e-7,
                 s_law.passed(1e-7), residual=s_law.max_residual)]


def check_genus(config: RunConfig) -> List[Dict[str, Any]]:
    model = ModelManifold.from_dataset(load_dataset(resolve_dataset(GENUS_DATASET)))
    samples = tau_samples(config.tau_samples)
    rows = []
    for name in ("L", "W", "Wp"):
        value = genus_pair(GENUS_KINDS[name], model, model.rank_e, config.q_trunc)
        report = genus_modularity_report(value, model, samples, config.tolerance, config.precision)
        rows.append(_row(f"genus {name} weight {report.weight} ({model.name})", report.law.max_residual,
                         config.tolerance, report.verdict == PASS))
    return rows


def check_quadrature(config: RunConfig) -> List[Dict[str, Any]]:
    rows = []
    worst = max(winding_c1(diagonal_loop(k, 2, 256)).residual for k in (-2, 1, 3))
    rows.append(_row("winding integrality at 256", worst, 1e-6, worst < 1e-6))

    coarse = degree_c3(su2_identity_map(24), config.threads)
    fine = degree_c3(su2_identity_map(48), config.threads)
    drift = max(abs(coarse.value - S3_UNIT), abs(fine.value - S3_UNIT))
    rows.append(_row("SU(2) identity c3 at 24^3 and 48^3", fine.value, 1e-3, drift < 1e-3))

    first, second = diagonal_loop(2, 2, 64), diagonal_loop(-1, 3, 64)
    tensor = round(winding_c1(tensor_loop(first, second)).value)
    expected = 2 * 3 + (-1) * 2
    wedge = round(winding_c1(exterior_power_loop(diagonal_loop(3, 4, 64), 2)).value)
    expected_wedge = comb(3, 1) * 3
    rows.append(_row("tensor and exterior winding formulas", tensor - expected, 0,
                     tensor == expected and wedge == expected_wedge, wedge=wedge))
    return rows


def check_index(config: RunConfig) -> List[Dict[str, Any]]:
    t = t_samples(1)[0]
    rows = []
    for name in INDEX_DATASETS:
        data = load_equivariant(name)
        worst = 0.0
        for kind in ("L", "W", "Wp"):
            f = f_function(kind, data, t, INDEX_Q_TRUNC, config.pole_tolerance)
            worst = max(worst, f.max_abs_difference(index_series(kind, data, t, INDEX_Q_TRUNC)))
            if not data.components and not f.is_zero():
                worst = max(worst, 1.0)
        rows.append(_row(f"F = index through q^2 ({name})", worst, 1e-9, worst < 1e-9))
    return rows


CHECKS: Dict[str, Callable[[RunConfig], List[Dict[str, Any]]]] = {
    "theta": check_theta_laws,
    "k-theory": check_k_coefficients,
    "lambda-ring": check_lambda_ring,
    "transgression": check_transgression,
    "rigidity": check_rigidity,
    "jacobi": check_jacobi,
    "genus": check_genus,
    "quadrature": check_quadrature,
    "index": check_index,
}


def run_selftest(config: RunConfig, only: Optional[Sequence[str]] = None, dry_run: bool = False) -> CommandResult:
    """
    Run the self-test suite.

    Args:
        config: Validated run configuration
        only: Names of the checks to run (default all)
        dry_run: List the selected checks only

    Returns:
        CommandResult with one summary row per property
    """
    names = list(only) if only else list(CHECKS)
    unknown = [n for n in names if n not in CHECKS]
    if unknown:
        raise DomainError(f"unknown self-test check(s) {', '.join(unknown)}; expected {', '.join(CHECKS)}")
    if dry_run:
        return dry_run_result("selftest", config, {"checks": names})

    rows: List[Dict[str, Any]] = []
    timings = {}
    for name in names:
        start = time.perf_counter()
        logger.info(f"Self-test: {name}")
        group_rows = CHECKS[name](config)
        timings[name] = time.perf_counter() - start
        rows += [{"group": name, **row} for row in group_rows]
        failed = [r["check"] for r in group_rows if r["verdict"] == FAIL]
        if failed:
            logger.error(f"Self-test {name} failed: {', '.join(failed)}")
    verdict = combine([r["verdict"] for r in rows])
    report = {"checks": rows, "seconds": timings}
    summary = [{"check": r["check"], "value": r["value"], "verdict": r["verdict"]} for r in rows]
    return CommandResult("selftest", verdict, report, rows=rows, summary=summary)
