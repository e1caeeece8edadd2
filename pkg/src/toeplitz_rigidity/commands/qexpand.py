"""
Expand Witten bundles Θ_j(TM|V) and Q_j(E) as q-series of K-theory classes.
"""

import logging
from fractions import Fraction
from typing import Any, Dict, List

from ..config import RunConfig
from ..exceptions import DomainError
from ..series import RATIONAL, QSeries
from ..witten_bundles import KElement, q_bundle_qexp, rank_series, theta_bundle_qexp, virtual_ratio
from . import FAIL, PASS, CommandResult, dry_run_result

logger = logging.getLogger(__name__)

THETA_BUNDLES = {"theta1": "1", "theta2": "2", "theta3": "3", "flat": "flat"}
Q_BUNDLES = {"Q1": 1, "Q2": 2, "Q3": 3}


def expected_ranks(bundle: str, dim_m: int, dim_v: int, rank_e: int, virtual: bool, q_trunc: int) -> QSeries:
    """Rank generating series predicted from the product formula."""
    spinor = 2 ** (rank_e // 2) if Q_BUNDLES.get(bundle) == 1 else 1
    if virtual:
        return QSeries.one(q_trunc, RATIONAL) * spinor
    if bundle in Q_BUNDLES:
        return virtual_ratio(f"Q{Q_BUNDLES[bundle]}", 0, rank_e, q_trunc) * spinor
    return virtual_ratio(THETA_BUNDLES[bundle], dim_m, dim_v, q_trunc)


def coefficient_rows(series: QSeries) -> List[Dict[str, Any]]:
    rows = []
    for e, element in series.items():
        for mono, coeff in element.terms.items():
            rows.append({"exponent": str(Fraction(e, 2)), "term": KElement.format_monomial(mono),
                         "coefficient": coeff})
    return rows


def run_qexpand(config: RunConfig, bundle: str, dim_m: int, dim_v: int, rank_e: int,
                virtual: bool = False, dry_run: bool = False) -> CommandResult:
    """
    Expand a Witten bundle and check the rank of every coefficient.

    Args:
        config: Validated run configuration
        bundle: theta1, theta2, theta3, flat, Q1, Q2 or Q3
        dim_m: Rank of TM
        dim_v: Rank of V
        rank_e: Rank N of E (Q bundles)
        virtual: Use reduced bundles W − ℂ^{rank W}
        dry_run: Validate inputs only

    Returns:
        CommandResult; rows hold one line per (exponent, monomial)
    """
    if bundle not in THETA_BUNDLES and bundle not in Q_BUNDLES:
        raise DomainError(f"unknown bundle '{bundle}'; expected one of "
                          f"{', '.join(list(THETA_BUNDLES) + list(Q_BUNDLES))}")
    if dim_m < 0 or dim_v < 0:
        raise DomainError("bundle ranks must be non-negative")
    inputs = {"bundle": bundle, "dim_m": dim_m, "dim_v": dim_v, "rank_e": rank_e, "virtual": virtual}
    if dry_run:
        return dry_run_result("qexpand", config, inputs)

    q_trunc = config.q_trunc
    if bundle in Q_BUNDLES:
        series = q_bundle_qexp(Q_BUNDLES[bundle], rank_e, q_trunc, virtual)
    else:
        ranks = {"T": dim_m, "V": dim_v}
        tm = KElement.symbol("T", ranks) if dim_m else KElement.trivial(0, ranks)
        v = KElement.symbol("V", ranks) if dim_v else KElement.trivial(0, ranks)
        series = theta_bundle_qexp(THETA_BUNDLES[bundle], tm, v, q_trunc, virtual)

    ranks_found = rank_series(series)
    ranks_expected = expected_ranks(bundle, dim_m, dim_v, rank_e, virtual, q_trunc)
    mismatches = [str(Fraction(e, 2)) for e in range(q_trunc) if ranks_found[e] != ranks_expected[e]]
    verdict = FAIL if mismatches else PASS
    if mismatches:
        logger.error(f"Rank mismatch for {bundle} at q-orders {', '.join(mismatches)}")

    report = {
        **inputs,
        "q_trunc": q_trunc,
        "coefficients": {str(Fraction(e, 2)): c.to_dict() for e, c in series.items()},
        "ranks": {str(Fraction(e, 2)): r for e, r in ranks_found.items()},
        "rank_mismatches": mismatches,
    }
    summary = [{"check": f"{bundle} q^{Fraction(e, 2)}", "value": repr(c)} for e, c in series.items()]
    return CommandResult("qexpand", verdict, report, rows=coefficient_rows(series), summary=summary)
