"""
Quadrature oracles on sampled loops: the winding number on S¹ and the c₃
pairing on S³.
"""

import logging
from typing import Optional

from ..config import RunConfig
from ..datasets import load_loop_csv
from ..exceptions import DomainError
from ..odd_chern import LoopMap, degree_c3, diagonal_loop, su2_identity_map, winding_c1
from . import FAIL, PASS, CommandResult, dry_run_result

logger = logging.getLogger(__name__)

WINDING_TOLERANCE = 1e-6
DEGREE_TOLERANCE = 1e-3


def _loop(domain: str, path: Optional[str], builtin: Optional[LoopMap]) -> LoopMap:
    if path is not None:
        loop = load_loop_csv(path, domain)
    elif builtin is not None:
        loop = builtin
    else:
        raise DomainError("give a loop file or choose a built-in map")
    if loop.domain != domain:
        raise DomainError(f"expected samples on {domain}, got {loop.domain}")
    return loop


def run_winding(config: RunConfig, path: Optional[str] = None, winding: Optional[int] = None,
                size: int = 2, resolution: int = 256, dry_run: bool = False) -> CommandResult:
    """
    Winding number (1/2πi)∮ tr[g⁻¹dg] of a loop in U(N).

    Args:
        config: Validated run configuration
        path: CSV file of S¹ samples
        winding: Use the built-in loop diag(e^{ikφ}, 1, …) with this k instead of a file
        size: Matrix size of the built-in loop
        resolution: Grid size of the built-in loop
        dry_run: Validate inputs only

    Returns:
        CommandResult, PASS when the value is an integer to 1e-6
    """
    builtin = diagonal_loop(winding, size, resolution) if winding is not None and path is None else None
    loop = _loop("S1", path, builtin)
    if dry_run:
        return dry_run_result("winding", config, {"path": path, "resolution": loop.resolution,
                                                   "matrix_size": loop.matrix_size})
    result = winding_c1(loop)
    verdict = PASS if result.residual < WINDING_TOLERANCE else FAIL
    logger.info(f"Winding number {result.value:.12g} (nearest {result.nearest:g})")
    return CommandResult("winding", verdict, {"result": result.to_dict(), "tolerance": WINDING_TOLERANCE},
                         summary=[{"check": "winding", "value": result.value}])


def run_degree3(config: RunConfig, path: Optional[str] = None, resolution: int = 24, block: int = 0,
                refine: bool = False, dry_run: bool = False) -> CommandResult:
    """
    Pairing ⟨c₃(ℂ^N, g, d), [S³]⟩ by quadrature.

    Without a file the identity map of SU(2) (stabilized by ``block`` trivial
    directions) is used; ``refine`` repeats it at twice the resolution and
    compares the two values.

    Args:
        config: Validated run configuration (threads)
        path: CSV file of S³ samples in Hopf coordinates
        resolution: Grid size per angle of the built-in map
        block: Extra identity block of the built-in map
        refine: Also evaluate the built-in map at doubled resolution
        dry_run: Validate inputs only

    Returns:
        CommandResult, PASS when the value lies within 1e-3 of a multiple of the unit value
    """
    builtin = su2_identity_map(resolution, block) if path is None else None
    loop = _loop("S3", path, builtin)
    if dry_run:
        return dry_run_result("degree3", config, {"path": path, "resolution": loop.resolution,
                                                   "matrix_size": loop.matrix_size})
    result = degree_c3(loop, config.threads)
    report = {"result": result.to_dict(), "tolerance": DEGREE_TOLERANCE}
    verdict = PASS if result.residual < DEGREE_TOLERANCE else FAIL
    summary = [{"check": f"c3 at {loop.resolution}^3", "value": result.value}]
    if refine and path is None:
        fine = degree_c3(su2_identity_map(2 * resolution, block), config.threads)
        report["refined"] = fine.to_dict()
        report["refinement_difference"] = abs(fine.value - result.value)
        summary.append({"check": f"c3 at {fine.resolution}^3", "value": fine.value})
        if fine.residual >= DEGREE_TOLERANCE or report["refinement_difference"] >= DEGREE_TOLERANCE:
            verdict = FAIL
    return CommandResult("degree3", verdict, report, summary=summary)
