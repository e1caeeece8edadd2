"""
Fixed-point computations on equivariant datasets: F-functions, the index
identity, rigidity scans and the signature function.
"""

import logging
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence

from ..config import RunConfig
from ..datasets import load_dataset, resolve_dataset
from ..equivariant import (EquivariantData, anomaly_check, convention_ratio, f_function,
                           index_series, parse_kind, require_generator, rigidity_scan,
                           signature_scan)
from ..sampling import t_samples, z_samples
from . import FAIL, PASS, CommandResult, combine, dry_run_result

logger = logging.getLogger(__name__)

DEFAULT_KINDS = ("L", "W", "Wp")
SCAN_KINDS = ("W", "Wp")
INDEX_TOLERANCE = 1e-9
SIGNATURE_TOLERANCE = 1e-7


def load_equivariant(dataset: str) -> EquivariantData:
    return EquivariantData.from_dataset(load_dataset(resolve_dataset(dataset)))


def _series_rows(name: str, series) -> List[Dict[str, Any]]:
    return [{"function": name, "exponent": str(Fraction(e, 2)), "re": complex(c).real, "im": complex(c).imag}
            for e, c in series.items()]


def run_fixedpoint(config: RunConfig, dataset: str, kinds: Optional[Sequence[str]] = None,
                   t: Optional[complex] = None, index_check: bool = True, dry_run: bool = False) -> CommandResult:
    """
    Anomaly relations and F-functions of an equivariant dataset at one t.

    Args:
        config: Validated run configuration
        dataset: Equivariant dataset (path or shipped name)
        kinds: F-function families (default L, W, Wp)
        t: Circle parameter, h = e^{2πit}; a golden-ratio sample when omitted
        index_check: Compare each F with the Lefschetz index of its twist
        dry_run: Validate inputs only

    Returns:
        CommandResult; FAIL on inconsistent anomaly data or an index mismatch
    """
    fks = [parse_kind(k) for k in (kinds or DEFAULT_KINDS)]
    data = load_equivariant(dataset)
    t = t if t is not None else t_samples(1)[0]
    if dry_run:
        return dry_run_result("fixedpoint", config, {"dataset": data.name, "components": len(data.components),
                                                      "kinds": [fk.name for fk in fks], "t": t})

    require_generator(t, config.generator_denominator)
    anomaly = anomaly_check(data)
    verdicts = [PASS if anomaly.ok else FAIL]
    summary = [{"check": "anomaly", "value": str(anomaly.n), "verdict": verdicts[0]}]
    functions: Dict[str, Any] = {}
    rows: List[Dict[str, Any]] = []
    for fk in fks:
        series = f_function(fk, data, t, config.q_trunc, config.pole_tolerance, config.odd_start)
        entry: Dict[str, Any] = {"series": series.to_dict()}
        rows += _series_rows(f"F_{fk.name}", series)
        if index_check:
            index = index_series(fk, data, t, config.q_trunc, odd_start=config.odd_start)
            difference = series.max_abs_difference(index)
            entry["index_difference"] = difference
            entry["convention_ratio"] = convention_ratio(fk, data, config.q_trunc).to_dict()
            verdict = PASS if difference < INDEX_TOLERANCE else FAIL
            verdicts.append(verdict)
            summary.append({"check": f"F_{fk.name} = index", "value": difference, "verdict": verdict})
        functions[fk.name] = entry

    report = {"dataset": data.name, "t": t, "q_trunc": config.q_trunc, "anomaly": anomaly.to_dict(),
              "functions": functions}
    return CommandResult("fixedpoint", combine(verdicts), report, rows=rows, summary=summary)


def run_rigidity_scan(config: RunConfig, dataset: str, kinds: Optional[Sequence[str]] = None,
                      tau: Optional[complex] = None, dry_run: bool = False) -> CommandResult:
    """
    Variation of the F-function q-coefficients across admissible t samples.

    Args:
        config: Validated run configuration (t_samples, q_trunc, tolerance, threads)
        dataset: Equivariant dataset (path or shipped name)
        kinds: F-function families (default W, Wp)
        tau: Also compare summed values at this τ
        dry_run: Validate inputs only

    Returns:
        CommandResult; rows hold the q-order × t-sample table
    """
    fks = [parse_kind(k) for k in (kinds or SCAN_KINDS)]
    data = load_equivariant(dataset)
    samples = t_samples(config.t_samples, max_denominator=config.generator_denominator)
    if dry_run:
        return dry_run_result("rigidity-scan", config, {"dataset": data.name, "kinds": [fk.name for fk in fks],
                                                         "t_samples": samples})

    scans = []
    rows: List[Dict[str, Any]] = []
    for fk in fks:
        scan = rigidity_scan(fk, data, samples, config.q_trunc, config.tolerance, tau, config.threads,
                             config.odd_start)
        scans.append(scan)
        rows += [{"kind": fk.name, **row} for row in scan.to_rows()]
    summary = [{"check": f"F_{s.kind} ({s.tag})", "value": s.max_variation, "verdict": s.verdict} for s in scans]
    report = {"dataset": data.name, "q_trunc": config.q_trunc, "scans": [s.to_dict() for s in scans]}
    return CommandResult("rigidity-scan", combine([s.verdict for s in scans]), report, rows=rows, summary=summary)


def run_signature(config: RunConfig, dataset: str, count: int = 50, dry_run: bool = False) -> CommandResult:
    """
    Constancy of the signature function f(z) off the unit circle.

    Args:
        config: Validated run configuration (threads)
        dataset: Equivariant dataset (path or shipped name)
        count: Number of z samples
        dry_run: Validate inputs only

    Returns:
        CommandResult; rows hold z and f(z)
    """
    data = load_equivariant(dataset)
    samples = z_samples(count)
    if dry_run:
        return dry_run_result("signature", config, {"dataset": data.name, "z_samples": len(samples)})

    scan = signature_scan(data, samples, SIGNATURE_TOLERANCE, config.threads, config.odd_start)
    summary = [{"check": "max |f(z) - f(2)|", "value": scan.max_deviation, "verdict": scan.verdict},
               {"check": "limit z -> inf", "value": scan.limit_difference},
               {"check": "max |component|", "value": scan.component_scale}]
    report = {"dataset": data.name, **scan.to_dict()}
    report.pop("verdict")
    return CommandResult("signature", scan.verdict, report, rows=scan.to_rows(), summary=summary)
