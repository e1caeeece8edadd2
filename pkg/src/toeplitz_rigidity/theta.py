"""
Jacobi theta functions θ, θ₁, θ₂, θ₃.

Conventions, with q = e^{2πiτ} and z = e^{2πiv}::

    θ(v,τ)  = 2 c(q) q^{1/8} sin(πv) ∏ (1 − q^n z)(1 − q^n/z)
    θ₁(v,τ) = 2 c(q) q^{1/8} cos(πv) ∏ (1 + q^n z)(1 + q^n/z)
    θ₂(v,τ) =   c(q)          ∏ (1 − q^{n−½} z)(1 − q^{n−½}/z)
    θ₃(v,τ) =   c(q)          ∏ (1 + q^{n−½} z)(1 + q^{n−½}/z)

where c(q) = ∏(1 − q^n). In mpmath terms these are ``jtheta(k, πv, e^{πiτ})``
for k = 1, 2, 4, 3 respectively.

Expansions in the elliptic variable are always produced from the logarithm of
the product part, expanded exactly in the small variable and exponentiated.
Two backends produce them: :class:`SeriesBackend` keeps q formal (coefficients
are :class:`~toeplitz_rigidity.series.QSeries`), :class:`PointBackend`
evaluates at a fixed τ with an adaptive product cutoff.
"""

import cmath
import functools
import logging
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterator, List, Optional, Tuple, Union

import mpmath

from .exceptions import DomainError, PoleError, PrecisionError, SingularityError
from .series import COMPLEX, RATIONAL, PowerSeries, QSeries, euler_function, trig_series

logger = logging.getLogger(__name__)

Scalar = Union[complex, QSeries]

DEFAULT_PRODUCT_TOLERANCE = 1e-12
DEFAULT_MAX_FACTORS = 2000
DEFAULT_POLE_TOLERANCE = 1e-9


class ThetaKind(str, Enum):
    """The four theta functions of the library."""
    THETA = "theta"
    THETA1 = "theta1"
    THETA2 = "theta2"
    THETA3 = "theta3"

    @property
    def factor_sign(self) -> int:
        """s in the product factors (1 + s q^a z^{±1})."""
        return -1 if self in (ThetaKind.THETA, ThetaKind.THETA2) else 1

    @property
    def half_integral(self) -> bool:
        """True when the product runs over q^{n−½}."""
        return self in (ThetaKind.THETA2, ThetaKind.THETA3)

    @property
    def jtheta_index(self) -> int:
        return {"theta": 1, "theta1": 2, "theta2": 4, "theta3": 3}[self.value]

    @property
    def q_offset(self) -> Fraction:
        """Power of q carried in front of the product."""
        return Fraction(1, 8) if not self.half_integral else Fraction(0)

    @classmethod
    def parse(cls, value: Union[str, "ThetaKind"]) -> "ThetaKind":
        if isinstance(value, ThetaKind):
            return value
        try:
            return cls(value)
        except ValueError:
            raise DomainError(f"unknown theta kind '{value}'; expected one of "
                              f"{', '.join(k.value for k in cls)}") from None


# Index j of the θ_j families used by bundles and transgressions.
FAMILY_KINDS = {1: ThetaKind.THETA1, 2: ThetaKind.THETA2, 3: ThetaKind.THETA3}


def family_kind(j: int) -> ThetaKind:
    try:
        return FAMILY_KINDS[j]
    except KeyError:
        raise DomainError(f"theta family index must be 1, 2 or 3, got {j}") from None


@dataclass(frozen=True)
class ModularPoint:
    """A point τ of the upper half plane plus the q-truncation used for series work."""

    tau: complex
    q_trunc: int = 13

    def __post_init__(self):
        tau = complex(self.tau)
        if not tau.imag > 0:
            raise DomainError(f"tau must lie in the upper half plane, got {tau}")
        object.__setattr__(self, "tau", tau)

    @property
    def nome(self) -> complex:
        """q^{1/2} = e^{πiτ}."""
        return cmath.exp(1j * math.pi * self.tau)

    @property
    def q(self) -> complex:
        return cmath.exp(2j * math.pi * self.tau)

    def q_power(self, exponent: Fraction) -> complex:
        return cmath.exp(2j * math.pi * self.tau * float(exponent))


# ---------------------------------------------------------------------------
# Direct numeric evaluation
# ---------------------------------------------------------------------------

def product_cutoff(abs_q: float, magnitude: float, tol: float, max_factors: int) -> int:
    """Number of product factors N so that 2M|q|^{N+½}/(1−|q|) < tol.

    Raises:
        PrecisionError: if N would exceed ``max_factors``
    """
    if abs_q == 0.0:
        return 1
    if abs_q >= 1.0:
        raise DomainError("|q| must be below 1")
    bound = math.log(tol * (1.0 - abs_q) / (2.0 * magnitude)) / math.log(abs_q) - 0.5
    n = max(1, int(math.ceil(bound)))
    if n > max_factors:
        raise PrecisionError(f"product tolerance {tol:g} needs {n} factors, cap is {max_factors} "
                             f"(|q|={abs_q:.6g})")
    return n


def _factor_terms(kind: ThetaKind, v: complex, tau: complex, tol: float,
                  max_factors: int) -> Iterator[complex]:
    """Yield w such that the product part is ∏(1 + w), c(q) included."""
    q = cmath.exp(2j * math.pi * tau)
    nome = cmath.exp(1j * math.pi * tau)
    z = cmath.exp(2j * math.pi * v)
    magnitude = max(abs(z), 1.0 / abs(z), 1.0)
    n_max = product_cutoff(abs(q), magnitude, tol, max_factors)
    s = kind.factor_sign
    for n in range(1, n_max + 1):
        a = q ** n if not kind.half_integral else q ** (n - 1) * nome
        yield -(q ** n)
        yield s * a * z
        yield s * a / z


def _prefactor(kind: ThetaKind, v: complex, tau: complex) -> complex:
    if kind is ThetaKind.THETA:
        return 2 * cmath.exp(1j * math.pi * tau / 4) * cmath.sin(math.pi * v)
    if kind is ThetaKind.THETA1:
        return 2 * cmath.exp(1j * math.pi * tau / 4) * cmath.cos(math.pi * v)
    return 1 + 0j


def theta_eval(kind: Union[str, ThetaKind], v: complex, pt: ModularPoint,
               tol: float = DEFAULT_PRODUCT_TOLERANCE, max_factors: int = DEFAULT_MAX_FACTORS,
               precision: int = 0) -> complex:
    """Value of a theta function.

    The truncated product keeps N factors with 2M|q|^{N+½}/(1−|q|) < tol,
    M = max(|z|, 1/|z|); that sum bounds the neglected log factors.

    Args:
        kind: theta, theta1, theta2 or theta3
        v: Elliptic variable
        pt: Modular point
        tol: Tail tolerance of the product
        max_factors: Cap on the number of product factors
        precision: Decimal digits for mpmath evaluation (0 = double precision product)

    Raises:
        PrecisionError: if the tolerance is unachievable within the cap
    """
    kind = ThetaKind.parse(kind)
    if precision > 0:
        with mpmath.mp.workdps(precision):
            nome = mpmath.exp(1j * mpmath.pi * mpmath.mpc(pt.tau))
            value = mpmath.jtheta(kind.jtheta_index, mpmath.pi * mpmath.mpc(v), nome)
            return complex(value)
    value = _prefactor(kind, v, pt.tau)
    if value == 0:
        return 0j
    for w in _factor_terms(kind, v, pt.tau, tol, max_factors):
        value *= 1 + w
    return value


def theta_log(kind: Union[str, ThetaKind], v: complex, pt: ModularPoint,
              tol: float = DEFAULT_PRODUCT_TOLERANCE, max_factors: int = DEFAULT_MAX_FACTORS) -> complex:
    """A logarithm of θ_j(v,τ) (branch unspecified), usable where the value overflows.

    Raises:
        SingularityError: at a zero of the function
    """
    kind = ThetaKind.parse(kind)
    pref = _prefactor(kind, v, pt.tau)
    if pref == 0:
        raise SingularityError(f"{kind.value} vanishes at v={v}", point=v)
    total = cmath.log(pref)
    for w in _factor_terms(kind, v, pt.tau, tol, max_factors):
        if 1 + w == 0:
            raise SingularityError(f"{kind.value} vanishes at v={v}", point=v)
        total += cmath.log(1 + w)
    return total


def theta_prime_zero(pt: ModularPoint, tol: float = DEFAULT_PRODUCT_TOLERANCE,
                     max_factors: int = DEFAULT_MAX_FACTORS, precision: int = 0) -> complex:
    """θ'(0,τ) = 2π q^{1/8} c(q)³ = π θ₁(0) θ₂(0) θ₃(0)."""
    if precision > 0:
        with mpmath.mp.workdps(precision):
            nome = mpmath.exp(1j * mpmath.pi * mpmath.mpc(pt.tau))
            return complex(mpmath.jtheta(1, 0, nome, 1) * mpmath.pi)
    q = pt.q
    n_max = product_cutoff(abs(q), 1.0, tol, max_factors)
    c = 1 + 0j
    for n in range(1, n_max + 1):
        c *= 1 - q ** n
    return 2 * math.pi * cmath.exp(1j * math.pi * pt.tau / 4) * c ** 3


# ---------------------------------------------------------------------------
# Expansions in the elliptic variable
# ---------------------------------------------------------------------------

@functools.lru_cache(maxsize=64)
def lambert_weights(half_integral: bool, trunc: int) -> Tuple[QSeries, ...]:
    """W_k = Σ_n q^{k·a_n} for k = 1..K, a_n = n or n − ½, as exact series.

    Entry k−1 holds W_k. Keys are doubled exponents.
    """
    weights = []
    k = 1
    while True:
        step = 2 * k
        start = k if half_integral else 2 * k
        if start >= trunc:
            break
        weights.append(QSeries({e: 1 for e in range(start, trunc, step)}, trunc, RATIONAL))
        k += 1
    return tuple(weights)


def _prefactor_series(kind: ThetaKind, center: complex, order: int) -> Optional[PowerSeries]:
    """sin(π(c+h))/π for θ, cos(π(c+h)) for θ₁, None for θ₂ and θ₃."""
    if kind is ThetaKind.THETA:
        return trig_series("sin", center, order) * (1 / math.pi)
    if kind is ThetaKind.THETA1:
        return trig_series("cos", center, order)
    return None


def sinc_inverse(order: int) -> PowerSeries:
    """πh/sin(πh) to the given order."""
    sin_series = trig_series("sin", 0, order + 1).divide_by_variable() * (1 / math.pi)
    return sin_series.inverse()


class ThetaBackend:
    """Common quotient algebra on top of a log-product expansion.

    Subclasses provide ``log_product(kind, center, order)``: the Taylor series
    in h of log ∏(1 + s q^a e^{±2πi(c+h)}) (without c(q) and the prefactor).
    """

    pole_tolerance: float = DEFAULT_POLE_TOLERANCE

    def log_product(self, kind: ThetaKind, center: complex, order: int) -> PowerSeries:
        raise NotImplementedError

    def constant(self, value: complex) -> Scalar:
        raise NotImplementedError

    def _shifted_log(self, kind: ThetaKind, center: complex, order: int) -> PowerSeries:
        base = self.log_product(kind, 0, 0)[0]
        return self.log_product(kind, center, order) - base

    def quotient(self, kind: Union[str, ThetaKind], center: complex, order: int,
                 form: str = "ratio") -> PowerSeries:
        """Taylor series in h of a normalized theta quotient.

        Forms:
            ratio      θ_j(c+h)/θ_j(0), or θ(c+h)/θ'(0) for θ
            inverse    the reciprocal of ``ratio``
            normalized hθ'(0)/θ(h) (θ only, c = 0)

        Raises:
            PoleError: for ``inverse`` at a zero of the function
        """
        kind = ThetaKind.parse(kind)
        if form == "normalized":
            if kind is not ThetaKind.THETA or center != 0:
                raise DomainError("normalized quotient is defined for theta at the origin only")
            return sinc_inverse(order) * (-self._shifted_log(kind, 0, order)).exp()

        log_part = self._shifted_log(kind, center, order)
        pref = _prefactor_series(kind, center, order)
        if form == "ratio":
            body = log_part.exp()
            return body if pref is None else pref * body
        if form == "inverse":
            body = (-log_part).exp()
            if pref is None:
                return body
            if abs(pref[0]) < self.pole_tolerance:
                shift = 0.5 if kind is ThetaKind.THETA1 else 0.0
                lattice = round(complex(center).real - shift) + shift
                raise PoleError(f"{kind.value} has a zero at v={center} (lattice point {lattice})",
                                point=center)
            return pref.inverse() * body
        raise DomainError(f"unknown quotient form '{form}'")

    def log_derivative(self, kind: Union[str, ThetaKind], order: int) -> PowerSeries:
        """θ_j'/θ_j around v = 0; for θ the regular part θ'/θ − 1/v."""
        kind = ThetaKind.parse(kind)
        log_part = self.log_product(kind, 0, order + 1)
        if kind is ThetaKind.THETA:
            trig = trig_series("sin", 0, order + 2).divide_by_variable().log()
        elif kind is ThetaKind.THETA1:
            trig = trig_series("cos", 0, order + 1).log()
        else:
            trig = None
        derivative = log_part.derivative()
        if trig is not None:
            derivative = derivative + trig.derivative().truncate(order)
        return derivative.truncate(order)


class SeriesBackend(ThetaBackend):
    """Expansions with formal q-series coefficients truncated at ``trunc`` (doubled)."""

    def __init__(self, trunc: int, pole_tolerance: float = DEFAULT_POLE_TOLERANCE):
        self.trunc = trunc
        self.pole_tolerance = pole_tolerance

    def constant(self, value: complex) -> QSeries:
        return QSeries.constant(value, self.trunc, COMPLEX)

    def log_product(self, kind: ThetaKind, center: complex, order: int) -> PowerSeries:
        """Λ_p = −Σ_k ε^k (W_k/k) (2πik)^p/p! [e^{2πikc} + (−1)^p e^{−2πikc}], ε = −s."""
        eps = -kind.factor_sign
        weights = lambert_weights(kind.half_integral, self.trunc)
        coeffs: List[QSeries] = []
        p_fact = 1
        for p in range(order + 1):
            if p:
                p_fact *= p
            total = QSeries.zero(self.trunc, COMPLEX)
            for k, w in enumerate(weights, start=1):
                phase = cmath.exp(2j * math.pi * k * center)
                bracket = phase + (-1) ** p / phase
                scale = -(eps ** k) / k * (2j * math.pi * k) ** p / p_fact * bracket
                if scale != 0:
                    total = total + w * scale
            coeffs.append(total)
        return PowerSeries(coeffs)

    def taylor(self, kind: Union[str, ThetaKind], center: complex, order: int,
               inverse: bool = False) -> "ThetaTaylor":
        """Raw Taylor coefficients of θ_j(c+h) (or 1/θ_j(c+h)) with the q-offset split off."""
        kind = ThetaKind.parse(kind)
        c_q = euler_function(self.trunc).to_complex()
        log_part = self.log_product(kind, center, order)
        pref = _prefactor_series(kind, center, order)
        scale = 2 if kind in (ThetaKind.THETA, ThetaKind.THETA1) else 1
        if kind is ThetaKind.THETA:
            pref = pref * math.pi
        if not inverse:
            body = log_part.exp()
            if pref is not None:
                body = pref * body
            coeffs = [c * c_q * scale for c in body.coeffs]
            return ThetaTaylor(kind, center, coeffs, kind.q_offset)
        if pref is not None and abs(pref[0]) < self.pole_tolerance:
            raise SingularityError(f"cannot invert {kind.value} around its zero at v={center}",
                                   point=center)
        body = (-log_part).exp()
        if pref is not None:
            body = pref.inverse() * body
        inv_c = c_q.inv() * (1 / scale)
        coeffs = [c * inv_c for c in body.coeffs]
        return ThetaTaylor(kind, center, coeffs, -kind.q_offset)


class PointBackend(ThetaBackend):
    """Expansions evaluated at a fixed τ from explicit per-factor log series."""

    def __init__(self, tau: complex, tol: float = DEFAULT_PRODUCT_TOLERANCE,
                 max_factors: int = DEFAULT_MAX_FACTORS, pole_tolerance: float = DEFAULT_POLE_TOLERANCE):
        self.point = ModularPoint(tau)
        self.tau = self.point.tau
        self.tol = tol
        self.max_factors = max_factors
        self.pole_tolerance = pole_tolerance
        self._cache = {}

    def constant(self, value: complex) -> complex:
        return complex(value)

    def log_product(self, kind: ThetaKind, center: complex, order: int) -> PowerSeries:
        key = (kind, complex(center), order)
        cached = self._cache.get(key)
        if cached is not None:
            return cached
        q = self.point.q
        nome = self.point.nome
        s = kind.factor_sign
        z = cmath.exp(2j * math.pi * center)
        magnitude = max(abs(z), 1.0 / abs(z), 1.0)
        n_max = product_cutoff(abs(q), magnitude, self.tol, self.max_factors)
        total = [0j] * (order + 1)
        for n in range(1, n_max + 1):
            a = q ** n if not kind.half_integral else q ** (n - 1) * nome
            for direction, amplitude in ((1, s * a * z), (-1, s * a / z)):
                series = _factor_log(amplitude, direction, order, center)
                for k in range(order + 1):
                    total[k] += series[k]
        result = PowerSeries(total)
        self._cache[key] = result
        return result


def _factor_log(amplitude: complex, direction: int, order: int, center: complex) -> PowerSeries:
    """Taylor series of log(1 + A e^{±2πih})."""
    if abs(1 + amplitude) < 1e-13:
        raise PoleError(f"theta product factor vanishes at v={center}", point=center)
    coeffs = [1 + amplitude]
    w = direction * 2j * math.pi
    term = amplitude
    for k in range(1, order + 1):
        term = term * w / k
        coeffs.append(term)
    return PowerSeries(coeffs).log()


@dataclass
class ThetaTaylor:
    """Taylor coefficients of θ_j(c+h)^{±1} as q-series times q^{q_offset}."""

    kind: ThetaKind
    center: complex
    coefficients: List[QSeries]
    q_offset: Fraction

    def evaluate(self, h: complex, tau: complex) -> complex:
        """Numeric value of the truncated Taylor polynomial at h and τ."""
        prefactor = cmath.exp(2j * math.pi * tau * float(self.q_offset))
        return prefactor * sum(c.evaluate(tau) * h ** k for k, c in enumerate(self.coefficients))

    def to_dict(self):
        return {
            "kind": self.kind.value,
            "center": self.center,
            "q_offset": str(self.q_offset),
            "coefficients": [c.to_dict() for c in self.coefficients],
        }


def theta_taylor(kind: Union[str, ThetaKind], center: complex, order: int, pt: ModularPoint,
                 inverse: bool = False) -> ThetaTaylor:
    """Taylor expansion of θ_j around ``center`` with q-series coefficients.

    Raises:
        DomainError: for a negative order
        SingularityError: if ``inverse`` is requested around a zero
    """
    if order < 0:
        raise DomainError("Taylor order must be non-negative")
    return SeriesBackend(pt.q_trunc).taylor(kind, center, order, inverse=inverse)


def theta_prime_series(trunc: int) -> QSeries:
    """θ'(0,τ)/q^{1/8} = 2π c(q)³ as a q-series."""
    c = euler_function(trunc)
    return (c * c * c).to_complex() * (2 * math.pi)


def theta_logderiv(kind: Union[str, ThetaKind], order: int, pt: ModularPoint) -> PowerSeries:
    """Power series of θ_j'/θ_j around v = 0 (regular part for θ).

    Coefficients are q-series truncated at ``pt.q_trunc``.
    """
    if order < 0:
        raise DomainError("order must be non-negative")
    return SeriesBackend(pt.q_trunc).log_derivative(kind, order)


# ---------------------------------------------------------------------------
# Transformation-law residuals
# ---------------------------------------------------------------------------

def _relative(lhs: complex, rhs: complex, floor: float = 1e-300) -> float:
    return abs(lhs - rhs) / max(abs(lhs), abs(rhs), floor)


def s_law_residuals(y: complex, tau: complex, tol: float = DEFAULT_PRODUCT_TOLERANCE,
                    max_factors: int = DEFAULT_MAX_FACTORS) -> Tuple[float, float]:
    """Residuals of the two quotient laws under τ ↦ −1/τ.

    First:  yθ'(0,−1/τ)/θ(y,−1/τ) = e^{−πiτy²} τy θ'(0,τ)/θ(τy,τ)
    Second: θ₁(y,−1/τ)/θ₁(0,−1/τ) = e^{πiτy²} θ₂(τy,τ)/θ₂(0,τ)
    """
    pt = ModularPoint(tau)
    pt_s = ModularPoint(-1 / pt.tau)
    kw = dict(tol=tol, max_factors=max_factors)
    lhs = y * theta_prime_zero(pt_s, **kw) / theta_eval(ThetaKind.THETA, y, pt_s, **kw)
    rhs = (cmath.exp(-1j * math.pi * pt.tau * y * y) * pt.tau * y * theta_prime_zero(pt, **kw)
           / theta_eval(ThetaKind.THETA, pt.tau * y, pt, **kw))
    first = _relative(lhs, rhs)
    lhs = theta_eval(ThetaKind.THETA1, y, pt_s, **kw) / theta_eval(ThetaKind.THETA1, 0, pt_s, **kw)
    rhs = (cmath.exp(1j * math.pi * pt.tau * y * y) * theta_eval(ThetaKind.THETA2, pt.tau * y, pt, **kw)
           / theta_eval(ThetaKind.THETA2, 0, pt, **kw))
    return first, _relative(lhs, rhs)


def shift_law_residual(x: complex, t: complex, gamma: int, lam: int, mu: int, tau: complex,
                       tol: float = DEFAULT_PRODUCT_TOLERANCE,
                       max_factors: int = DEFAULT_MAX_FACTORS) -> float:
    """Residual of θ(x+γ(t+λτ+μ)) = e^{−πi(γ²(λ²τ+2λt)+2γλx)} θ(x+γt), λ, μ even.

    Computed in log space so that large shifts do not overflow.
    """
    if lam % 2 or mu % 2:
        raise DomainError("lattice shifts must be even")
    pt = ModularPoint(tau)
    shifted = theta_log(ThetaKind.THETA, x + gamma * (t + lam * pt.tau + mu), pt, tol, max_factors)
    base = theta_log(ThetaKind.THETA, x + gamma * t, pt, tol, max_factors)
    factor = -1j * math.pi * (gamma * gamma * (lam * lam * pt.tau + 2 * lam * t) + 2 * gamma * lam * x)
    return abs(cmath.exp(shifted - base - factor) - 1)
