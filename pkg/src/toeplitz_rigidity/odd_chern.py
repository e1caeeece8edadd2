"""
Odd Chern character and Chern–Simons transgression machinery.

* odd classes c_{2n+1} and the odd character Σ n!/(2n+1)! c_{2n+1}
* the universal transgression coefficients λ_{j,d}(τ) of the Q_j(E) bundles,
  exactly as rational q-series and numerically from Lambert sums
* the Λ_t polynomials 𝒫_k(t) and the derivation rule for tensor products,
  which give a second, K-theoretic route to the same coefficients
* quadrature oracles for the winding number on S¹ and the c₃ pairing on S³

Throughout, g takes values in SO(N) on E. For such g every c_{4m+1}(E, g)
vanishes, so only degrees d ≡ 3 (mod 4) carry information.
"""

import cmath
import functools
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import mpmath
import numpy as np
import sympy
from scipy.special import roots_legendre

from .exceptions import DatasetError, DomainError, PrecisionError
from .sampling import parallel_map
from .series import RATIONAL, GeneratorTable, GradedElement, QSeries
from .theta import ThetaKind, family_kind, lambert_weights
from .witten_bundles import EXTERIOR, SPINOR, SPINOR_DIFFERENCE, SYMMETRIC, KElement, _factor_rank, q_bundle_qexp

logger = logging.getLogger(__name__)

UNITARITY_TOLERANCE = 1e-10
MIN_S1_RESOLUTION = 16
MIN_S3_RESOLUTION = 24
# Pairing of the identity map of SU(2) in the orientation fixed by degree_c3.
S3_UNIT = 6.0


def odd_degrees(degree_cap: int) -> List[int]:
    return list(range(1, degree_cap + 1, 2))


def odd_class_name(degree: int) -> str:
    return f"c{degree}"


# ---------------------------------------------------------------------------
# Odd classes
# ---------------------------------------------------------------------------

@dataclass
class OddClassVector:
    """Values (numbers or graded generators) of the odd classes c_d keyed by degree d."""

    values: Dict[int, Any] = field(default_factory=dict)

    @classmethod
    def generators(cls, table: GeneratorTable, degree_cap: int) -> "OddClassVector":
        """Formal generators c_d for every odd d ≤ degree_cap declared in the table."""
        values = {}
        for d in odd_degrees(degree_cap):
            name = odd_class_name(d)
            if name in table:
                values[d] = GradedElement.generator(table, name, degree_cap)
        return cls(values)

    def degrees(self) -> List[int]:
        return sorted(self.values)

    def get(self, degree: int, default: Any = 0) -> Any:
        return self.values.get(degree, default)


def _zero_like(c: OddClassVector) -> Any:
    for v in c.values.values():
        if isinstance(v, GradedElement):
            return GradedElement.zero(v.table, v.degree_cap)
    return 0


def odd_ch_form(c: OddClassVector, start: int = 0) -> Any:
    """Σ_{n≥start} n!/(2n+1)! c_{2n+1}.

    ``start=0`` keeps the c₁ term; ``start=1`` drops it. For SO(N)-valued g
    both agree because c₁ vanishes.

    Raises:
        DomainError: if an even-degree entry is present
    """
    total = _zero_like(c)
    for d in c.degrees():
        if d % 2 == 0 or d <= 0:
            raise DomainError(f"odd character got an entry of even or non-positive degree {d}")
        n = (d - 1) // 2
        if n < start:
            continue
        total = total + c.values[d] * Fraction(math.factorial(n), math.factorial(2 * n + 1))
    return total


def tensor_odd_ch(factors: Sequence[Tuple[int, Any]]) -> Any:
    """ch(V₁⊗…⊗V_n) = Σ_i (dim V₁···dim V_n / dim V_i)·ch(V_i).

    Raises:
        DomainError: for an empty list or a non-positive rank
    """
    if not factors:
        raise DomainError("tensor formula needs at least one factor")
    ranks = [r for r, _ in factors]
    if any(r <= 0 for r in ranks):
        raise DomainError(f"ranks must be positive, got {ranks}")
    total = None
    for i, (_, ch) in enumerate(factors):
        weight = math.prod(r for k, r in enumerate(ranks) if k != i)
        term = ch * weight
        total = term if total is None else total + term
    return total


# ---------------------------------------------------------------------------
# Transgression coefficients
# ---------------------------------------------------------------------------

def u_moment(m: int) -> Fraction:
    """∫₀¹ (u² − u)^m du = (−1)^m m!² / (2m+1)!."""
    if m < 0:
        raise DomainError("moment order must be non-negative")
    return Fraction((-1) ** m * math.factorial(m) ** 2, math.factorial(2 * m + 1))


@functools.lru_cache(maxsize=32)
def _log_cos_coefficient(r: int) -> Fraction:
    """[s^{2r}] log cos(s/2) = (−1)^r (2^{2r} − 1) B_{2r} / (2r (2r)!)."""
    b = sympy.bernoulli(2 * r)
    bern = Fraction(int(b.p), int(b.q))
    return Fraction((-1) ** r * (2 ** (2 * r) - 1), 2 * r * math.factorial(2 * r)) * bern


def log_theta_coefficient(j: int, r: int, q_trunc: int) -> QSeries:
    """L_r = [s^{2r}] log θ_j(s/2π, τ) as an exact q-series (up to the constant log θ_j(0)).

    The product part contributes −2(−1)^r/(2r)! Σ_k ε^k k^{2r−1} W_k; for θ₁ the
    cosine prefactor adds the Bernoulli term.
    """
    if r < 1:
        raise DomainError("coefficient index must be positive")
    kind = family_kind(j)
    eps = -kind.factor_sign
    total = QSeries.zero(q_trunc, RATIONAL)
    scale = Fraction(-2 * (-1) ** r, math.factorial(2 * r))
    for k, w in enumerate(lambert_weights(kind.half_integral, q_trunc), start=1):
        total = total + w * (scale * eps ** k * k ** (2 * r - 1))
    if kind is ThetaKind.THETA1:
        total = total + _log_cos_coefficient(r)
    return total


def _entry_scale(j: int, rank_e: int) -> int:
    return 2 ** (rank_e // 2) if j == 1 else 1


@dataclass
class TransgressionTable:
    """λ_{j,d}: the q-series multiplying c_d in ch(Q_j(E)_v, g, d, τ)."""

    j: int
    degree_cap: int
    q_trunc: int
    rank_e: int
    entries: Dict[int, QSeries]

    def entry(self, degree: int) -> QSeries:
        if degree % 2 == 0:
            raise DomainError(f"transgression entries exist for odd degrees only, got {degree}")
        if degree not in self.entries:
            raise DomainError(f"degree {degree} exceeds the table cap {self.degree_cap}")
        return self.entries[degree]

    def apply(self, odd: OddClassVector) -> Any:
        """Σ_d λ_{j,d} c_d; returns a graded element with q-series scalars for formal classes."""
        total = _zero_like(odd)
        for d in odd.degrees():
            if d > self.degree_cap:
                continue
            lam = self.entry(d)
            if lam.is_zero():
                continue
            total = total + odd.values[d] * lam
        return total

    def t_shift(self) -> "TransgressionTable":
        """τ ↦ τ+1: λ₁ is invariant and λ₂, λ₃ are exchanged."""
        partner = {1: 1, 2: 3, 3: 2}[self.j]
        entries = {d: s.half_twist() for d, s in self.entries.items()}
        return TransgressionTable(partner, self.degree_cap, self.q_trunc, self.rank_e, entries)

    def evaluate(self, degree: int, tau: complex) -> complex:
        return self.entry(degree).evaluate(tau)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "j": self.j,
            "degree_cap": self.degree_cap,
            "q_trunc": self.q_trunc,
            "rank_e": self.rank_e,
            "entries": {str(d): s.to_dict() for d, s in sorted(self.entries.items())},
        }


def transgression_coeffs(j: int, degree_cap: int, q_trunc: int, rank_e: int = 8) -> TransgressionTable:
    """Exact transgression table of Q_j(E) through ``degree_cap``.

    With R_u = (u²−u)a², a = g^{-1}dg, only tr[a·R_u^{2r−1}] = (u²−u)^{2r−1} tr[a^{4r−1}]
    survives (traces of even powers vanish), so

        λ_{j,4r−1} = −(−1)^r · r · L_r · ∫₀¹(u²−u)^{2r−1}du

    with L_r = [s^{2r}] log θ_j; degrees 4r+1 get 0. For j = 1 the spinor
    factor contributes 2^{N/2}.
    """
    family_kind(j)
    if degree_cap < 1:
        raise DomainError("degree cap must be positive")
    entries: Dict[int, QSeries] = {}
    scale = _entry_scale(j, rank_e)
    for d in odd_degrees(degree_cap):
        if d % 4 != 3:
            entries[d] = QSeries.zero(q_trunc, RATIONAL)
            continue
        r = (d + 1) // 4
        coeff = Fraction(-(-1) ** r * r) * u_moment(2 * r - 1) * scale
        entries[d] = log_theta_coefficient(j, r, q_trunc) * coeff
    logger.debug(f"Built transgression table j={j} up to degree {degree_cap}")
    return TransgressionTable(j, degree_cap, q_trunc, rank_e, entries)


def transgression_value(j: int, degree: int, tau: complex, rank_e: int = 8, tol: float = 1e-15,
                        max_terms: int = 200000, precision: int = 0) -> complex:
    """λ_{j,d}(τ) at a point from Lambert sums.

    W_k = q^k/(1−q^k) for θ₁ and q^{k/2}/(1−q^k) for θ₂, θ₃; the sum over k
    stops once a run of terms falls below ``tol`` relative to the running sum.

    Raises:
        PrecisionError: if ``max_terms`` is reached first
    """
    kind = family_kind(j)
    if degree % 2 == 0:
        raise DomainError("degree must be odd")
    if complex(tau).imag <= 0:
        raise DomainError(f"tau must lie in the upper half plane, got {tau}")
    if degree % 4 != 3:
        return 0j
    r = (degree + 1) // 4
    eps = -kind.factor_sign
    half = kind.half_integral

    def lambert(one, q, nome):
        total = 0
        quiet = 0
        for k in range(1, max_terms + 1):
            qk = q ** k
            w = (nome ** k if half else qk) / (one - qk)
            term = (eps ** k) * k ** (2 * r - 1) * w
            total += term
            if abs(term) <= tol * max(abs(total), 1e-300):
                quiet += 1
                if quiet >= 3:
                    return total
            else:
                quiet = 0
        raise PrecisionError(f"Lambert sum for λ_{j},{degree} did not converge in {max_terms} terms")

    lead = Fraction(-(-1) ** r * r) * u_moment(2 * r - 1) * _entry_scale(j, rank_e)
    scale = Fraction(-2 * (-1) ** r, math.factorial(2 * r))
    if precision > 0:
        tol = min(tol, 10.0 ** (-precision))
        with mpmath.mp.workdps(precision):
            t = mpmath.mpc(tau)
            nome = mpmath.exp(1j * mpmath.pi * t)
            total = lambert(mpmath.mpf(1), nome * nome, nome)
            value = mpmath.mpf(scale.numerator) / scale.denominator * total
            if kind is ThetaKind.THETA1:
                c = _log_cos_coefficient(r)
                value += mpmath.mpf(c.numerator) / c.denominator
            return complex(value * lead.numerator / lead.denominator)
    nome = cmath.exp(1j * math.pi * complex(tau))
    total = lambert(1.0, nome * nome, nome)
    value = float(scale) * total
    if kind is ThetaKind.THETA1:
        value += float(_log_cos_coefficient(r))
    return complex(float(lead) * value)


def s_mixing_residuals(tau: complex, rank_e: int = 8, precision: int = 0) -> Dict[str, float]:
    """Relative residuals of the degree-3 laws under τ ↦ −1/τ.

    λ_{1,3}(−1/τ) = 2^{N/2}(τ²λ_{2,3}(τ) − iτ/(24π)) and
    λ_{3,3}(−1/τ) = τ²λ_{3,3}(τ) − iτ/(24π); the defect comes from the
    e^{πiτv²} factor of the theta S-law.
    """
    tau = complex(tau)
    inv = -1 / tau
    defect = 1j * tau / (24 * math.pi)
    spinor = 2 ** (rank_e // 2)

    def relative(lhs: complex, rhs: complex) -> float:
        return abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-300)

    mixing = relative(transgression_value(1, 3, inv, rank_e, precision=precision),
                      spinor * (tau * tau * transgression_value(2, 3, tau, rank_e, precision=precision) - defect))
    self_law = relative(transgression_value(3, 3, inv, rank_e, precision=precision),
                        tau * tau * transgression_value(3, 3, tau, rank_e, precision=precision) - defect)
    return {"theta1_theta2": mixing, "theta3": self_law}


# ---------------------------------------------------------------------------
# Λ_t transgression polynomials and odd multiples
# ---------------------------------------------------------------------------

_T = sympy.Symbol("t")


def _fraction(value) -> Fraction:
    value = sympy.Rational(value)
    return Fraction(int(value.p), int(value.q))


@dataclass(frozen=True)
class TransgressionPolynomial:
    """𝒫_k(t) with c_{2k−1}(Λ_t V) = 𝒫_k(t)·c_{2k−1}(V)."""

    k: int
    dim_v: int
    coefficients: Tuple[Fraction, ...]

    @property
    def degree(self) -> int:
        return 2 * self.k - 1

    def coefficient(self, m: int) -> Fraction:
        if not 0 <= m <= self.dim_v:
            raise DomainError(f"Λ^{m} is out of range for a rank-{self.dim_v} bundle")
        return self.coefficients[m] if m < len(self.coefficients) else Fraction(0)

    def __call__(self, t: Any) -> Any:
        return sum(c * t ** i for i, c in enumerate(self.coefficients))


@functools.lru_cache(maxsize=256)
def _lambda_polynomial(k: int, dim_v: int) -> TransgressionPolynomial:
    if k > dim_v:
        return TransgressionPolynomial(k, dim_v, tuple(Fraction(0) for _ in range(dim_v + 1)))
    expr = _T / (1 + _T)
    for _ in range(k - 1):
        expr = _T * sympy.diff(expr, _T)
    poly = sympy.Poly(sympy.cancel(expr * (1 + _T) ** dim_v), _T)
    coeffs = [Fraction(0)] * (dim_v + 1)
    for (power,), value in poly.terms():
        coeffs[power] = _fraction(value)
    return TransgressionPolynomial(k, dim_v, tuple(coeffs))


def lambda_transgression_poly(k: int, m: int, dim_v: int,
                              degree: Optional[int] = None) -> Tuple[TransgressionPolynomial, Fraction]:
    """𝒫_k(t) = (t d/dt)^{k−1}[t/(1+t)]·(1+t)^{dim V} and its t^m coefficient.

    c_{2k−1}(Λ^m V) is that coefficient times c_{2k−1}(V). For k > dim V the
    polynomial is zero.

    Raises:
        DomainError: if m is outside [0, dim V] or ``degree`` is not 2k−1
    """
    if k < 1:
        raise DomainError("k must be positive")
    if degree is not None and degree != 2 * k - 1:
        raise DomainError(f"degree {degree} does not match 2k−1 = {2 * k - 1}")
    poly = _lambda_polynomial(k, dim_v)
    return poly, poly.coefficient(m)


@functools.lru_cache(maxsize=256)
def _symmetric_multiple(k: int, m: int, rank: int) -> Fraction:
    # S_t = 1/Λ_{−t}, so the multiple is [t^m] of −𝒫_k(−t)/(1−t)^{2·rank}
    if k > rank:
        return Fraction(0)
    poly = _lambda_polynomial(k, rank)
    numerator = sum(sympy.Rational(c.numerator, c.denominator) * (-_T) ** i
                    for i, c in enumerate(poly.coefficients))
    expr = -numerator / (1 - _T) ** (2 * rank)
    value = sympy.series(expr, _T, 0, m + 1).removeO().coeff(_T, m)
    return _fraction(value)


@functools.lru_cache(maxsize=64)
def _spinor_multiple(k: int, rank: int) -> Fraction:
    """2^{N/2}·k!·[a^k] log √(2 cosh(a/2))."""
    a = sympy.Symbol("a")
    expr = sympy.log(2 * sympy.cosh(a / 2)) / 2
    value = sympy.series(expr, a, 0, k + 1).removeO().coeff(a, k)
    return _fraction(value) * math.factorial(k) * 2 ** (rank // 2)


def _factor_multiple(factor, k: int, ranks: Mapping[str, int], bundle: str) -> Fraction:
    base, op, power = factor
    if base != bundle:
        return Fraction(0)
    rank = ranks[base]
    if op == EXTERIOR:
        return lambda_transgression_poly(k, power, rank)[1] if k <= rank else Fraction(0)
    if op == SYMMETRIC:
        return _symmetric_multiple(k, power, rank)
    if op == SPINOR:
        return _spinor_multiple(k, rank)
    raise DomainError(f"odd character of Δ₊−Δ₋({base}) is not supported")


def odd_multiple(element: KElement, k: int, bundle: str = "E") -> Fraction:
    """The constant m with c_{2k−1}(W, g^W) = m·c_{2k−1}(E, g).

    Tensor monomials follow the derivation rule D(XY) = rk(X)D(Y) + rk(Y)D(X);
    bundles other than ``bundle`` carry the trivial action and contribute 0.
    """
    total = Fraction(0)
    for mono, coeff in element.terms.items():
        for i, factor in enumerate(mono):
            d = _factor_multiple(factor, k, element.ranks, bundle)
            if d == 0:
                continue
            others = math.prod(_factor_rank(f, element.ranks) for n, f in enumerate(mono) if n != i)
            total += coeff * d * others
    return total


def k_odd_ch(element: KElement, odd: OddClassVector, degree_cap: int, bundle: str = "E",
             start: int = 0) -> Any:
    """Odd Chern character of a K-element: Σ_k D_k(W)(k−1)!/(2k−1)! c_{2k−1}."""
    total = _zero_like(odd)
    for d in odd_degrees(degree_cap):
        k = (d + 1) // 2
        if k - 1 < start or d not in odd.values:
            continue
        m = odd_multiple(element, k, bundle)
        if m:
            total = total + odd.values[d] * (m * Fraction(math.factorial(k - 1), math.factorial(2 * k - 1)))
    return total


def k_transgression_table(j: int, degree_cap: int, q_trunc: int, rank_e: int = 8) -> Dict[int, QSeries]:
    """λ_{j,d} recomputed from the K-theoretic expansion of Q_j(E)_v, d ≡ 3 (mod 4)."""
    bundle = q_bundle_qexp(j, rank_e, q_trunc, virtual=True)
    out: Dict[int, QSeries] = {}
    for d in odd_degrees(degree_cap):
        if d % 4 != 3:
            continue
        k = (d + 1) // 2
        weight = Fraction(math.factorial(k - 1), math.factorial(2 * k - 1))
        coeffs = {e: odd_multiple(c, k) * weight for e, c in bundle.items()}
        out[d] = QSeries(coeffs, q_trunc, RATIONAL)
    return out


# ---------------------------------------------------------------------------
# Loop maps and quadrature
# ---------------------------------------------------------------------------

@dataclass
class LoopMap:
    """Sampled map into U(N) on S¹ (uniform φ grid) or S³ (Hopf coordinates).

    S¹ samples have shape (n, N, N) at φ_k = 2πk/n. S³ samples have shape
    (n_η, n_ξ, n_ξ, N, N): η at Gauss–Legendre nodes of [0, π/2], ξ₁ and ξ₂
    on uniform periodic grids.
    """

    domain: str
    samples: np.ndarray
    angles: Optional[np.ndarray] = None

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=complex)
        if self.domain not in ("S1", "S3"):
            raise DomainError(f"unknown loop domain '{self.domain}'")
        expected = 3 if self.domain == "S1" else 5
        if self.samples.ndim != expected or self.samples.shape[-1] != self.samples.shape[-2]:
            raise DatasetError(f"{self.domain} samples must have {expected} axes ending in a square matrix",
                               invariant="shape")
        if self.angles is not None:
            self._check_closed()
        self._check_unitary()

    @property
    def resolution(self) -> int:
        return self.samples.shape[0]

    @property
    def matrix_size(self) -> int:
        return self.samples.shape[-1]

    def _check_closed(self):
        n = self.samples.shape[0]
        expected = 2 * np.pi * np.arange(n) / n
        if len(self.angles) != n or not np.allclose(np.asarray(self.angles, dtype=float), expected, atol=1e-9):
            raise DomainError("loop grid is not a closed uniform grid φ_k = 2πk/n")

    def _check_unitary(self):
        mats = self.samples.reshape(-1, self.matrix_size, self.matrix_size)
        product = np.conj(np.swapaxes(mats, -1, -2)) @ mats
        defect = np.max(np.abs(product - np.eye(self.matrix_size)), initial=0.0)
        if defect > UNITARITY_TOLERANCE:
            raise DatasetError(f"samples are not unitary (defect {defect:.3g})", invariant="unitary")


@dataclass
class QuadratureResult:
    value: float
    nearest: float
    residual: float
    resolution: int
    detail: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {"value": self.value, "nearest": self.nearest, "residual": self.residual,
                "resolution": self.resolution, **self.detail}


def _spectral_derivative(samples: np.ndarray, axis: int) -> np.ndarray:
    """Derivative along a periodic axis of period 2π via FFT."""
    n = samples.shape[axis]
    freqs = np.fft.fftfreq(n, d=1.0 / n)
    if n % 2 == 0:
        freqs[n // 2] = 0.0
    shape = [1] * samples.ndim
    shape[axis] = n
    spectrum = np.fft.fft(samples, axis=axis)
    return np.fft.ifft(spectrum * (1j * freqs.reshape(shape)), axis=axis)


def winding_c1(loop: LoopMap) -> QuadratureResult:
    """(1/2πi)∮ tr[g^{-1}dg] by the trapezoidal rule with a spectral derivative.

    Raises:
        DomainError: for a non-S¹ loop or resolution below 16
    """
    if loop.domain != "S1":
        raise DomainError("winding_c1 needs a loop on S¹")
    n = loop.resolution
    if n < MIN_S1_RESOLUTION:
        raise DomainError(f"S¹ resolution must be at least {MIN_S1_RESOLUTION}, got {n}")
    g = loop.samples
    dg = _spectral_derivative(g, axis=0)
    ginv = np.conj(np.swapaxes(g, -1, -2))
    traces = np.trace(ginv @ dg, axis1=-2, axis2=-1)
    value = complex(np.sum(traces) * (2 * np.pi / n) / (2j * np.pi))
    dets = np.linalg.det(g)
    increments = np.angle(np.roll(dets, -1) / dets)
    det_winding = float(np.sum(increments) / (2 * np.pi))
    nearest = float(round(value.real))
    return QuadratureResult(value.real, nearest, abs(value - nearest), n,
                            {"det_winding": det_winding, "imaginary": value.imag})


def _legendre_grid(n: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Nodes and weights on [0, π/2] and the barycentric differentiation matrix."""
    x, w = roots_legendre(n)
    nodes = (x + 1) * np.pi / 4
    weights = w * np.pi / 4
    diff = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(diff, 1.0)
    bary = 1.0 / np.prod(diff, axis=1)
    d = (bary[None, :] / bary[:, None]) / diff
    np.fill_diagonal(d, 0.0)
    np.fill_diagonal(d, -np.sum(d, axis=1))
    return nodes, weights, d


def s3_grid(resolution: int) -> Tuple[np.ndarray, np.ndarray]:
    """η nodes (Gauss–Legendre on [0, π/2]) and the periodic ξ grid."""
    nodes, _, _ = _legendre_grid(resolution)
    xi = 2 * np.pi * np.arange(resolution) / resolution
    return nodes, xi


def degree_c3(loop: LoopMap, threads: int = 1) -> QuadratureResult:
    """Pairing of c₃(ℂ^N, g, d) with [S³] by quadrature in Hopf coordinates.

    The value is (1/4π²)∫ 3 tr(A_η[A_ξ₁, A_ξ₂]) dη dξ₁ dξ₂ with A = g^{-1}∂g;
    this orientation gives the identity of SU(2) the positive unit value 6.

    Raises:
        DomainError: for a non-S³ loop or resolution below 24
    """
    if loop.domain != "S3":
        raise DomainError("degree_c3 needs a map on S³")
    n_eta, n_xi = loop.samples.shape[0], loop.samples.shape[1]
    if min(n_eta, n_xi) < MIN_S3_RESOLUTION:
        raise DomainError(f"S³ resolution must be at least {MIN_S3_RESOLUTION} per angle")
    _, weights, dmat = _legendre_grid(n_eta)
    g = loop.samples
    ginv = np.conj(np.swapaxes(g, -1, -2))
    d_eta = np.einsum("ij,j...->i...", dmat, g)
    d_xi1 = _spectral_derivative(g, axis=1)
    d_xi2 = _spectral_derivative(g, axis=2)

    def slice_density(i: int) -> np.ndarray:
        a_eta = ginv[i] @ d_eta[i]
        a1 = ginv[i] @ d_xi1[i]
        a2 = ginv[i] @ d_xi2[i]
        comm = a1 @ a2 - a2 @ a1
        return 3 * np.trace(a_eta @ comm, axis1=-2, axis2=-1)

    slices = parallel_map(slice_density, list(range(n_eta)), threads)
    density = np.stack(slices)
    cell = (2 * np.pi / n_xi) ** 2
    per_eta = np.sum(density, axis=(1, 2)) * cell
    value = complex(np.sum(per_eta * weights) / (4 * np.pi ** 2))
    nearest = S3_UNIT * round(value.real / S3_UNIT)
    return QuadratureResult(value.real, nearest, abs(value - nearest), n_eta,
                            {"unit": S3_UNIT, "degree": value.real / S3_UNIT, "imaginary": value.imag})


# ---------------------------------------------------------------------------
# Model loops
# ---------------------------------------------------------------------------

def s1_loop(fn: Callable[[float], np.ndarray], resolution: int) -> LoopMap:
    angles = 2 * np.pi * np.arange(resolution) / resolution
    return LoopMap("S1", np.stack([np.asarray(fn(phi), dtype=complex) for phi in angles]), angles)


def diagonal_loop(winding: int, size: int, resolution: int) -> LoopMap:
    """φ ↦ diag(e^{ikφ}, 1, …, 1)."""
    def fn(phi):
        m = np.eye(size, dtype=complex)
        m[0, 0] = cmath.exp(1j * winding * phi)
        return m
    return s1_loop(fn, resolution)


def tensor_loop(first: LoopMap, second: LoopMap) -> LoopMap:
    """Pointwise Kronecker product g₁ ⊗ g₂ of two loops on the same grid."""
    if first.domain != second.domain or first.samples.shape[:-2] != second.samples.shape[:-2]:
        raise DomainError("tensor product needs loops on the same grid")
    lead = first.samples.shape[:-2]
    a = first.samples.reshape(-1, first.matrix_size, first.matrix_size)
    b = second.samples.reshape(-1, second.matrix_size, second.matrix_size)
    prod = np.stack([np.kron(x, y) for x, y in zip(a, b)])
    size = first.matrix_size * second.matrix_size
    return LoopMap(first.domain, prod.reshape(*lead, size, size), first.angles)


def exterior_power_loop(loop: LoopMap, m: int) -> LoopMap:
    """Λ^m of a diagonal loop (compound matrix of the diagonal entries)."""
    diag = np.diagonal(loop.samples, axis1=-2, axis2=-1)
    if not np.allclose(loop.samples, np.apply_along_axis(np.diag, -1, diag)):
        raise DomainError("exterior powers are implemented for diagonal loops only")
    subsets = list(combinations(range(loop.matrix_size), m))
    entries = np.stack([np.prod(diag[..., list(s)], axis=-1) for s in subsets], axis=-1)
    return LoopMap(loop.domain, np.apply_along_axis(np.diag, -1, entries), loop.angles)


def su2_identity_map(resolution: int, block: int = 0) -> LoopMap:
    """The identity S³ ≅ SU(2) in Hopf coordinates, optionally stabilized by I_block."""
    eta, xi = s3_grid(resolution)
    e, x1, x2 = np.meshgrid(eta, xi, xi, indexing="ij")
    a = np.exp(1j * x1) * np.cos(e)
    b = np.exp(1j * x2) * np.sin(e)
    size = 2 + block
    g = np.zeros(e.shape + (size, size), dtype=complex)
    g[..., 0, 0] = a
    g[..., 0, 1] = b
    g[..., 1, 0] = -np.conj(b)
    g[..., 1, 1] = np.conj(a)
    for k in range(block):
        g[..., 2 + k, 2 + k] = 1.0
    return LoopMap("S3", g)


def constant_s3_map(resolution: int, size: int = 2) -> LoopMap:
    shape = (resolution, resolution, resolution, size, size)
    return LoopMap("S3", np.broadcast_to(np.eye(size, dtype=complex), shape).copy())
