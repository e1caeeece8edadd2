"""
Transgression coefficients λ_{j,d}(τ) of the Q_j(E) bundles.
"""

import logging
from fractions import Fraction
from typing import Any, Dict, List, Optional

from ..config import RunConfig
from ..odd_chern import k_transgression_table, transgression_coeffs, transgression_value
from . import FAIL, PASS, CommandResult, dry_run_result

logger = logging.getLogger(__name__)


def run_transgression(config: RunConfig, j: int, rank_e: Optional[int] = None, tau: Optional[complex] = None,
                      dry_run: bool = False) -> CommandResult:
    """
    Build the exact transgression table and cross-check it.

    The table is compared exactly with the K-theoretic expansion of Q_j(E)_v
    and, when ``tau`` is given, numerically with the Lambert-sum values.

    Args:
        config: Validated run configuration (q_trunc, degree_cap, tolerance)
        j: Family index 1, 2 or 3
        rank_e: Rank N of E; the profile's default_n when omitted
        tau: Optional evaluation point
        dry_run: Validate inputs only

    Returns:
        CommandResult with the table, the cross-check and one row per coefficient
    """
    rank_e = rank_e or config.default_n
    inputs = {"j": j, "rank_e": rank_e, "degree_cap": config.degree_cap, "tau": tau}
    table = transgression_coeffs(j, config.degree_cap, config.q_trunc, rank_e)
    if dry_run:
        return dry_run_result("transgression", config, inputs)

    k_table = k_transgression_table(j, config.degree_cap, config.q_trunc, rank_e)
    k_mismatch = [d for d, series in k_table.items() if series != table.entry(d)]
    report: Dict[str, Any] = {"table": table.to_dict(), "k_theory_mismatch": k_mismatch}
    verdict = PASS if not k_mismatch else FAIL
    summary: List[Dict[str, Any]] = [{"check": "exact vs K-theory", "value": len(k_mismatch)}]

    if tau is not None:
        values = {}
        worst = 0.0
        for d in sorted(table.entries):
            direct = transgression_value(j, d, tau, rank_e, precision=config.precision)
            truncated = table.evaluate(d, tau)
            scale = max(abs(direct), 1.0)
            worst = max(worst, abs(direct - truncated) / scale)
            values[str(d)] = {"lambert": direct, "truncated_series": truncated}
        report["values"] = values
        report["max_truncation_difference"] = worst
        summary.append({"check": f"series vs Lambert at tau={tau}", "value": worst})
        if worst >= config.tolerance:
            logger.warning(f"Truncated series differs from the Lambert sum by {worst:.3g}; raise q_trunc")
            verdict = FAIL

    rows = [{"degree": d, "exponent": str(Fraction(e, 2)), "coefficient": c}
            for d, series in sorted(table.entries.items()) for e, c in series.items()]
    return CommandResult("transgression", verdict, report, rows=rows, summary=summary)
