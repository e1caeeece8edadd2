"""
Genera of a model manifold with their modularity reports.
"""

import logging
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence

from ..config import RunConfig
from ..datasets import load_dataset, resolve_dataset
from ..genera import ModelManifold, genus_modularity_report, genus_pair, index_identity_residual, parse_genus
from ..sampling import tau_samples
from . import FAIL, PASS, CommandResult, combine, dry_run_result

logger = logging.getLogger(__name__)

DEFAULT_GENERA = ("L", "W", "Wp")
INDEX_TOLERANCE = 1e-9


def run_genus(config: RunConfig, dataset: str, which: Optional[Sequence[str]] = None,
              rank_e: Optional[int] = None, modular: bool = True, index_check: bool = False,
              dry_run: bool = False) -> CommandResult:
    """
    Compute genera of a model manifold.

    Args:
        config: Validated run configuration
        dataset: Model dataset (path or shipped name)
        which: Genus families (default L, W, Wp)
        rank_e: Rank N of E; the dataset value when omitted
        modular: Run the weight-(dim+1)/2 modularity check
        index_check: Compare with minus the index on the trivial action
        dry_run: Validate inputs only

    Returns:
        CommandResult with one entry per genus
    """
    kinds = [parse_genus(w) for w in (which or DEFAULT_GENERA)]
    model = ModelManifold.from_dataset(load_dataset(resolve_dataset(dataset)))
    if rank_e:
        model.rank_e = rank_e
    if dry_run:
        return dry_run_result("genus", config, {"dataset": model.name, "dim": model.dim,
                                                 "which": [k.name for k in kinds]})

    samples = tau_samples(config.tau_samples)
    entries: Dict[str, Any] = {}
    verdicts: List[str] = []
    summary = []
    rows = []
    for gk in kinds:
        value = genus_pair(gk, model, model.rank_e, config.q_trunc)
        entry: Dict[str, Any] = {"series": value.series.to_dict()}
        for e, c in value.series.items():
            rows.append({"genus": gk.name, "exponent": str(Fraction(e, 2)), "re": c.real, "im": c.imag})
        if modular:
            report = genus_modularity_report(value, model, samples, config.tolerance, config.precision)
            entry["modularity"] = report.to_dict()
            verdicts.append(report.verdict)
            summary.append({"check": f"{gk.name} weight {report.weight}", "value": report.law.max_residual,
                            "verdict": report.verdict})
        if index_check:
            residual = index_identity_residual(gk, model, config.q_trunc)
            entry["index_identity_residual"] = residual
            verdicts.append(PASS if residual < INDEX_TOLERANCE else FAIL)
            summary.append({"check": f"{gk.name} = -index", "value": residual,
                            "verdict": verdicts[-1]})
        entries[gk.name] = entry
    verdict = combine(verdicts) if verdicts else PASS
    report = {"dataset": model.name, "dim": model.dim, "rank_e": model.rank_e, "q_trunc": config.q_trunc,
              "flags": model.flags.model_dump(), "genera": entries}
    return CommandResult("genus", verdict, report, rows=rows, summary=summary)
