"""
Transformation-law checks on named built-in functions.
"""

import logging
from fractions import Fraction
from typing import Any, Dict, List, Optional

from ..config import RunConfig
from ..datasets import load_dataset, resolve_dataset
from ..equivariant import f_value, jacobi_spec, parse_kind, s_law_check, t_law_check
from ..exceptions import DomainError
from ..genera import ModelManifold, genus_value, parse_genus
from ..modularity import JacobiFormSpec, LawReport, LawResult, ModularGroup, jacobi_law_check, modular_form_check
from ..odd_chern import s_mixing_residuals, transgression_value
from ..sampling import t_samples, tau_samples
from . import FAIL, PASS, UNASSERTED, CommandResult, dry_run_result
from .fixedpoint import load_equivariant

logger = logging.getLogger(__name__)

MODULAR_FUNCTIONS = ("transgression", "genus", "s-mixing")
TRANSGRESSION_GROUPS = {1: ModularGroup.GAMMA0_2, 2: ModularGroup.GAMMA_UPPER_0_2, 3: ModularGroup.GAMMA_THETA}
JACOBI_TOLERANCE = 1e-7


def _law_summary(report: LawReport) -> List[Dict[str, Any]]:
    return [{"check": r.name, "value": r.residual, "verdict": "skipped" if not r.samples_used else ""}
            for r in report.results]


def _transgression_check(config: RunConfig, j: int, degree: int, weight: Optional[int],
                         group: Optional[str], rank_e: int):
    if j not in TRANSGRESSION_GROUPS:
        raise DomainError(f"family index must be 1, 2 or 3, got {j}")
    if degree < 1 or degree % 2 == 0:
        raise DomainError(f"degree must be a positive odd integer, got {degree}")
    weight = weight if weight is not None else (degree + 1) // 2
    group = ModularGroup.parse(group) if group else TRANSGRESSION_GROUPS[j]
    spec = {"function": f"lambda_{j},{degree}", "weight": weight, "group": group.value, "rank_e": rank_e}

    def fn(tau: complex) -> complex:
        return transgression_value(j, degree, tau, rank_e, precision=config.precision)

    return spec, fn, weight, group


def run_check_modular(config: RunConfig, fn: str = "transgression", j: int = 2, degree: int = 7,
                      dataset: Optional[str] = None, which: str = "W", weight: Optional[int] = None,
                      group: Optional[str] = None, rank_e: Optional[int] = None,
                      dry_run: bool = False) -> CommandResult:
    """
    Modular-form law f(𝒢τ) = χ(𝒢)(cτ+d)^k f(τ) under a group's generators.

    ``fn`` selects the function: a transgression coefficient λ_{j,d}, a genus
    of a model dataset, or ``s-mixing`` for the degree-3 laws that relate
    λ_{1,3} with λ_{2,3} (and λ_{3,3} with itself) up to the iτ/(24π) defect.

    Args:
        config: Validated run configuration (tau_samples, tolerance, precision)
        fn: transgression, genus or s-mixing
        j: Family index of the transgression coefficient
        degree: Degree d of the transgression coefficient
        dataset: Model dataset for genus checks
        which: Genus family for genus checks
        weight: Override the weight (default (d+1)/2 or (dim M+1)/2)
        group: Override the group (default the family's group)
        rank_e: Rank N of E; the profile's default_n or the dataset value when omitted
        dry_run: Validate inputs only

    Returns:
        CommandResult with the residual report
    """
    if fn not in MODULAR_FUNCTIONS:
        raise DomainError(f"unknown function '{fn}'; expected one of {', '.join(MODULAR_FUNCTIONS)}")
    samples = tau_samples(config.tau_samples)

    if fn == "s-mixing":
        rank_e = rank_e or config.default_n
        if dry_run:
            return dry_run_result("check-modular", config, {"fn": fn, "rank_e": rank_e, "tau_samples": samples})
        residuals = [s_mixing_residuals(tau, rank_e, config.precision) for tau in samples]
        worst = {key: max(r[key] for r in residuals) for key in residuals[0]}
        verdict = PASS if max(worst.values()) < config.tolerance else FAIL
        summary = [{"check": f"S-law degree 3 ({key})", "value": value, "verdict": verdict}
                   for key, value in worst.items()]
        report = {"fn": fn, "rank_e": rank_e, "tolerance": config.tolerance, "max_residuals": worst,
                  "samples": [{"tau": tau, **r} for tau, r in zip(samples, residuals)]}
        return CommandResult("check-modular", verdict, report, summary=summary)

    violated: List[str] = []
    if fn == "transgression":
        rank_e = rank_e or config.default_n
        spec, fun, weight, group_ = _transgression_check(config, j, degree, weight, group, rank_e)
        zero = degree % 4 != 3
    else:
        if dataset is None:
            raise DomainError("genus checks need a model dataset")
        gk = parse_genus(which)
        model = ModelManifold.from_dataset(load_dataset(resolve_dataset(dataset)))
        rank_e = rank_e or model.rank_e
        weight = weight if weight is not None else (model.dim + 1) // 2
        group_ = ModularGroup.parse(group) if group else gk.group
        spec = {"function": f"genus_{gk.name}", "dataset": model.name, "weight": weight,
                "group": group_.value, "rank_e": rank_e}
        violated = [h for h in gk.hypotheses if not model.hypothesis(h)]
        zero = False

        def fun(tau: complex) -> complex:
            return genus_value(gk, model, tau, rank_e, config.precision, config.product_tolerance,
                               config.max_product_factors)

    if dry_run:
        return dry_run_result("check-modular", config, {"fn": fn, **spec, "tau_samples": samples})

    if zero:
        law = LawReport("modular", [LawResult("identically-zero")], {"weight": weight, "group": group_.value})
    else:
        law = modular_form_check(fun, weight, group_, samples)
    verdict = PASS if law.passed(config.tolerance) else FAIL
    if violated:
        logger.warning(f"Hypotheses {', '.join(violated)} fail; residual reported without assertion")
        verdict = UNASSERTED
    report = {"fn": fn, "spec": spec, "tolerance": config.tolerance, "violated_hypotheses": violated,
              "law": law.to_dict()}
    return CommandResult("check-modular", verdict, report, summary=_law_summary(law))


def run_check_jacobi(config: RunConfig, fn: str, dataset: str, index: Optional[str] = None,
                     weight: Optional[int] = None, group: Optional[str] = None,
                     tolerance: float = JACOBI_TOLERANCE, partner_laws: bool = False,
                     dry_run: bool = False) -> CommandResult:
    """
    Both lines of the Jacobi-form law for an F-function of an equivariant dataset.

    Args:
        config: Validated run configuration (tau_samples, generator_denominator, precision)
        fn: fL, fW, fWp, fdR1, fdR2 or fdR3
        dataset: Equivariant dataset (path or shipped name)
        index: Override the index m (half-integers allowed; default n/2)
        weight: Override the weight (default (dim M+1)/2)
        group: Override the group (default the family's group)
        tolerance: Residual bound for PASS
        partner_laws: Also check the S-law against the partner family and the T-law
        dry_run: Validate inputs only

    Returns:
        CommandResult with one residual per generator and lattice shift
    """
    fk = parse_kind(fn)
    data = load_equivariant(dataset)
    default = jacobi_spec(fk, data)
    spec = JacobiFormSpec.create(Fraction(index) if index is not None else default.index,
                                 weight if weight is not None else default.weight,
                                 group or default.group)
    count = config.tau_samples
    samples = list(zip(t_samples(count, max_denominator=config.generator_denominator), tau_samples(count)))
    if dry_run:
        return dry_run_result("check-jacobi", config, {"fn": fk.name, "dataset": data.name,
                                                        "spec": spec.to_dict(), "samples": len(samples)})

    def fun(t: complex, tau: complex) -> complex:
        return f_value(fk, data, t, tau, config.precision, config.product_tolerance,
                       config.max_product_factors, config.pole_tolerance, config.odd_start)

    law = jacobi_law_check(fun, spec, samples)
    verdict = PASS if law.passed(tolerance) else FAIL
    if spec != default:
        logger.info(f"Checking against a non-default spec {spec.to_dict()} (default {default.to_dict()})")
    summary = _law_summary(law)
    report = {"fn": fk.name, "dataset": data.name, "tolerance": tolerance,
              "default_spec": default.to_dict(), "law": law.to_dict()}
    if partner_laws:
        partner = [s_law_check(fk, data, samples, config.precision, config.odd_start),
                   t_law_check(fk, data, samples, config.precision, config.odd_start)]
        report["partner_laws"] = [law.to_dict() for law in partner]
        summary += [row for law in partner for row in _law_summary(law)]
        if not all(law.passed(tolerance) for law in partner):
            verdict = FAIL
    return CommandResult("check-jacobi", verdict, report, summary=summary)
