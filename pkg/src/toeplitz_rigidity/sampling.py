"""
Deterministic sample grids and the ordered parallel map used by every sweep.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from typing import Callable, List, Optional, Sequence, TypeVar

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")

GOLDEN = (math.sqrt(5) - 1) / 2
T_RANGE = (0.05, 0.45)


def nearest_rational(t: float, max_denominator: int) -> Fraction:
    return Fraction(t).limit_denominator(max_denominator)


def rational_distance(t: complex, max_denominator: int = 12) -> float:
    """Distance from Re t to the nearest rational with denominator ≤ ``max_denominator``."""
    x = complex(t).real
    best = math.inf
    for q in range(1, max_denominator + 1):
        p = round(x * q)
        best = min(best, abs(x - p / q))
    return best


def is_admissible(t: complex, max_denominator: int = 12, margin: float = 1e-9) -> bool:
    """True when t is farther than ``margin`` from every rational p/q with q ≤ ``max_denominator``."""
    return rational_distance(t, max_denominator) > margin


def t_samples(count: int, low: float = T_RANGE[0], high: float = T_RANGE[1],
              max_denominator: int = 12, margin: float = 1e-4) -> List[float]:
    """Golden-ratio sequence in [low, high] filtered away from low-denominator rationals."""
    if count < 1:
        raise ValueError("sample count must be at least 1")
    out: List[float] = []
    k = 1
    while len(out) < count:
        x = low + (high - low) * ((k * GOLDEN) % 1.0)
        k += 1
        if is_admissible(x, max_denominator, margin):
            out.append(x)
        if k > 100 * count + 1000:
            raise RuntimeError("could not find enough admissible t samples")
    return out


def tau_samples(count: int) -> List[complex]:
    """τ on the arc |τ| ∈ [0.9, 2], |Re τ| ≤ 0.5, Im τ ≥ 0.4.

    Points are spread over radii and angles by a Kronecker sequence and then
    kept only if inside the region, so the first n samples never change.
    """
    if count < 1:
        raise ValueError("sample count must be at least 1")
    out: List[complex] = []
    k = 1
    alpha, beta = GOLDEN, math.sqrt(2) - 1
    while len(out) < count:
        r = 0.9 + 1.1 * ((k * alpha) % 1.0)
        re = -0.5 + (k * beta) % 1.0
        k += 1
        if abs(re) >= r:
            continue
        tau = complex(re, math.sqrt(r * r - re * re))
        if tau.imag >= 0.4:
            out.append(tau)
    return out


def z_samples(count: int = 50, epsilon: float = 1e-3) -> List[complex]:
    """z values for the signature check, including |z| ∈ {0.5, 1±ε, 10, 10⁶}."""
    fixed_moduli = [0.5, 1 - epsilon, 1 + epsilon, 10.0, 1e6]
    out = [m * complex(math.cos(1 + i), math.sin(1 + i)) for i, m in enumerate(fixed_moduli)]
    k = 1
    while len(out) < count:
        modulus = 10 ** (-1 + 3 * ((k * GOLDEN) % 1.0))
        angle = 2 * math.pi * ((k * (math.sqrt(2) - 1)) % 1.0)
        k += 1
        if abs(modulus - 1) < epsilon:
            continue
        out.append(modulus * complex(math.cos(angle), math.sin(angle)))
    return out[:count]


def parallel_map(fn: Callable[[T], R], items: Sequence[T], threads: Optional[int] = 1) -> List[R]:
    """Map ``fn`` over ``items`` and return results in input order.

    Args:
        fn: Function to apply
        items: Inputs
        threads: Worker count; 1 or None runs inline

    Returns:
        List of results, same order as ``items``
    """
    items = list(items)
    if not threads or threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    logger.debug(f"Running {len(items)} tasks on {threads} threads")
    with ThreadPoolExecutor(max_workers=threads) as executor:
        return list(executor.map(fn, items))
