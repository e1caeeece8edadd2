"""
Truncated formal series and graded-commutative coefficient algebras.

Three containers live here:

* :class:`QSeries` - a truncated series in q^{1/2}. Exponents are stored
  doubled (the key ``e`` stands for q^{e/2}) so every key is an integer.
* :class:`PowerSeries` - a truncated univariate Taylor series in a small
  elliptic variable h, with generic scalar coefficients (numbers or QSeries).
* :class:`GradedElement` - an element of a truncated graded-commutative
  algebra over declared even/odd generators (Chern roots, odd classes).

Coefficient rings are pluggable through :class:`Ring`. Operations on two
QSeries over different rings raise ``TypeError``; scalars are coerced.
"""

from __future__ import annotations

import cmath
import functools
import itertools
import logging
import operator
import re
from dataclasses import dataclass
from fractions import Fraction
from numbers import Complex, Rational
from typing import Any, Callable, Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

from .exceptions import DomainError, SingularSeriesError

logger = logging.getLogger(__name__)

Monomial = Tuple[int, ...]


# ---------------------------------------------------------------------------
# Coefficient rings
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Ring:
    """Arithmetic interface for series coefficients.

    ``coerce`` maps an incoming scalar into the ring (raising ``TypeError`` if
    that is impossible), ``tolerance`` is used by ``is_zero`` for inexact rings.
    """

    name: str
    zero: Any
    one: Any
    exact: bool = True
    coerce_fn: Optional[Callable[[Any], Any]] = None
    tolerance: float = 0.0

    def coerce(self, value: Any) -> Any:
        if self.coerce_fn is None:
            return value
        return self.coerce_fn(value)

    def is_zero(self, value: Any) -> bool:
        if hasattr(value, "is_zero"):
            return value.is_zero()
        if self.exact or self.tolerance == 0.0:
            return value == 0
        return abs(value) <= self.tolerance

    def inverse(self, value: Any) -> Any:
        return scalar_inv(value)


def _to_fraction(value: Any) -> Fraction:
    if isinstance(value, bool):
        return Fraction(int(value))
    if isinstance(value, Rational):
        return Fraction(value)
    raise TypeError(f"cannot coerce {type(value).__name__} into the rational ring")


def _to_complex(value: Any) -> complex:
    if isinstance(value, (QSeries, GradedElement)):
        raise TypeError(f"cannot coerce {type(value).__name__} into the complex ring")
    return complex(value)


RATIONAL = Ring("rational", Fraction(0), Fraction(1), exact=True, coerce_fn=_to_fraction)
COMPLEX = Ring("complex", 0j, 1 + 0j, exact=False, coerce_fn=_to_complex)


def object_ring(name: str, zero: Any, one: Any) -> Ring:
    """Ring of structured coefficients (K-elements, graded elements)."""
    return Ring(name, zero, one, exact=True, coerce_fn=None)


# ---------------------------------------------------------------------------
# Scalar helpers shared by the series types
# ---------------------------------------------------------------------------

def is_zero_scalar(value: Any) -> bool:
    if hasattr(value, "is_zero"):
        return value.is_zero()
    return value == 0


def scalar_inv(value: Any) -> Any:
    """Multiplicative inverse of a scalar, QSeries or structured element."""
    if isinstance(value, QSeries):
        return value.inv()
    if hasattr(value, "inverse"):
        return value.inverse()
    if value == 0:
        raise SingularSeriesError("constant term is zero and cannot be inverted")
    if isinstance(value, Rational):
        return Fraction(1) / Fraction(value)
    return 1 / value


def scalar_exp(value: Any) -> Any:
    if isinstance(value, QSeries):
        return value.exp()
    return cmath.exp(value)


def scalar_log(value: Any) -> Any:
    if isinstance(value, QSeries):
        return value.log()
    if value == 0:
        raise SingularSeriesError("logarithm of zero constant term")
    return cmath.log(value)


def _total(terms: Iterable[Any]) -> Any:
    terms = list(terms)
    if not terms:
        return 0
    return functools.reduce(operator.add, terms)


# ---------------------------------------------------------------------------
# QSeries
# ---------------------------------------------------------------------------

class QSeries:
    """Truncated series in q^{1/2} over a pluggable coefficient ring.

    Keys of ``coeffs`` are doubled exponents; every stored key ``e`` satisfies
    ``low <= e < trunc``. Instances are treated as immutable.
    """

    __slots__ = ("ring", "coeffs", "trunc", "low")

    def __init__(self, coeffs: Mapping[int, Any], trunc: int, ring: Ring = COMPLEX, low: int = 0):
        if low < 0:
            raise DomainError("QSeries lower bound must be a non-negative exponent")
        if trunc < low:
            raise DomainError(f"truncation {trunc}/2 below lower bound {low}/2")
        cleaned: Dict[int, Any] = {}
        for e, c in coeffs.items():
            e = int(e)
            if e >= trunc:
                continue
            if e < low:
                raise DomainError(f"exponent {e}/2 below declared lower bound {low}/2")
            c = ring.coerce(c)
            if not is_zero_scalar(c):
                cleaned[e] = c
        self.ring = ring
        self.coeffs = dict(sorted(cleaned.items()))
        self.trunc = int(trunc)
        self.low = int(low)

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls, trunc: int, ring: Ring = COMPLEX) -> "QSeries":
        return cls({}, trunc, ring)

    @classmethod
    def one(cls, trunc: int, ring: Ring = COMPLEX) -> "QSeries":
        return cls({0: ring.one}, trunc, ring)

    @classmethod
    def constant(cls, value: Any, trunc: int, ring: Ring = COMPLEX) -> "QSeries":
        return cls({0: value}, trunc, ring)

    @classmethod
    def monomial(cls, exponent2: int, value: Any, trunc: int, ring: Ring = COMPLEX) -> "QSeries":
        return cls({exponent2: value}, trunc, ring)

    @classmethod
    def from_list(cls, values: Sequence[Any], trunc: Optional[int] = None, ring: Ring = COMPLEX,
                  step: int = 1) -> "QSeries":
        """Build from consecutive coefficients; ``step=2`` means integer powers of q."""
        if trunc is None:
            trunc = step * len(values)
        return cls({step * i: v for i, v in enumerate(values)}, trunc, ring)

    # -- access ---------------------------------------------------------------

    def __getitem__(self, exponent2: int) -> Any:
        return self.coeffs.get(exponent2, self.ring.zero)

    def coefficient(self, exponent: Fraction) -> Any:
        """Coefficient of q^{exponent} (exponent a half-integer)."""
        doubled = Fraction(exponent) * 2
        if doubled.denominator != 1:
            raise DomainError(f"exponent {exponent} is not a half-integer")
        return self[int(doubled)]

    def items(self) -> Iterator[Tuple[int, Any]]:
        return iter(self.coeffs.items())

    def is_zero(self) -> bool:
        return not self.coeffs

    def constant_term(self) -> Any:
        return self[0]

    def exponents(self) -> List[int]:
        return list(self.coeffs)

    # -- arithmetic -----------------------------------------------------------

    def _compatible(self, other: "QSeries") -> None:
        if self.ring.name != other.ring.name:
            raise TypeError(f"mixed coefficient rings: {self.ring.name} and {other.ring.name}")

    def _promote(self, scalar: Any) -> "QSeries":
        # Rational series absorb non-rational scalars by moving to the complex ring.
        if self.ring is RATIONAL and not isinstance(scalar, Rational):
            if isinstance(scalar, Complex):
                return self.to_complex()
        return self

    def _as_series(self, other: Any) -> "QSeries":
        if isinstance(other, QSeries):
            self._compatible(other)
            return other
        return QSeries({0: other}, self.trunc, self.ring)

    def __add__(self, other: Any) -> "QSeries":
        if not isinstance(other, QSeries):
            base = self._promote(other)
            if base is not self:
                return base + other
        other = self._as_series(other)
        trunc = min(self.trunc, other.trunc)
        out = dict(self.coeffs)
        for e, c in other.coeffs.items():
            out[e] = out[e] + c if e in out else c
        return QSeries(out, trunc, self.ring, min(self.low, other.low))

    def __radd__(self, other: Any) -> "QSeries":
        return self.__add__(other)

    def __neg__(self) -> "QSeries":
        return QSeries({e: -c for e, c in self.coeffs.items()}, self.trunc, self.ring, self.low)

    def __sub__(self, other: Any) -> "QSeries":
        return self + (-other)

    def __rsub__(self, other: Any) -> "QSeries":
        return (-self) + other

    def __mul__(self, other: Any) -> "QSeries":
        if isinstance(other, QSeries):
            return qs_mul(self, other)
        base = self._promote(other)
        other = base.ring.coerce(other)
        return QSeries({e: c * other for e, c in base.coeffs.items()}, base.trunc, base.ring, base.low)

    def __rmul__(self, other: Any) -> "QSeries":
        if isinstance(other, QSeries):
            return qs_mul(other, self)
        base = self._promote(other)
        other = base.ring.coerce(other)
        return QSeries({e: other * c for e, c in base.coeffs.items()}, base.trunc, base.ring, base.low)

    def __truediv__(self, other: Any) -> "QSeries":
        if isinstance(other, QSeries):
            return qs_mul(self, qs_inv(other))
        if isinstance(other, Rational) and self.ring is RATIONAL:
            return self * (Fraction(1) / Fraction(other))
        return self * (1 / other)

    def __pow__(self, n: int) -> "QSeries":
        if not isinstance(n, int):
            raise TypeError("QSeries powers must be integers")
        if n < 0:
            return qs_inv(self) ** (-n)
        result = QSeries.one(self.trunc, self.ring)
        base = self
        while n:
            if n & 1:
                result = qs_mul(result, base)
            base = qs_mul(base, base)
            n >>= 1
        return result

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, QSeries):
            if isinstance(other, (int, Fraction, complex, float)):
                return self == QSeries.constant(other, self.trunc, self.ring if self.ring.coerce_fn else COMPLEX)
            return NotImplemented
        return self.ring.name == other.ring.name and self.trunc == other.trunc and self.coeffs == other.coeffs

    __hash__ = None  # mutable-looking container semantics; compare by value only

    def allclose(self, other: "QSeries", tol: float = 1e-9) -> bool:
        """Coefficientwise comparison up to ``tol`` over the common truncation."""
        trunc = min(self.trunc, other.trunc)
        keys = {e for e in itertools.chain(self.coeffs, other.coeffs) if e < trunc}
        return all(abs(complex(self[e]) - complex(other[e])) <= tol for e in keys)

    def max_abs_difference(self, other: "QSeries") -> float:
        trunc = min(self.trunc, other.trunc)
        keys = [e for e in set(self.coeffs) | set(other.coeffs) if e < trunc]
        return max((abs(complex(self[e]) - complex(other[e])) for e in keys), default=0.0)

    # -- transcendental operations (formal) -----------------------------------

    def inv(self) -> "QSeries":
        return qs_inv(self)

    def exp(self) -> "QSeries":
        """Formal exponential; a complex constant term is split off as a number."""
        c0 = self.constant_term()
        if not is_zero_scalar(c0):
            if self.ring is COMPLEX:
                return cmath.exp(c0) * (self - c0).exp()
            raise DomainError("exp of a QSeries needs a zero constant term in exact rings")
        result: Dict[int, Any] = {0: self.ring.one}
        terms = list(self.coeffs.items())
        for e in range(1, self.trunc):
            acc = None
            for k, a in terms:
                if k > e:
                    break
                prev = result.get(e - k)
                if prev is None:
                    continue
                term = a * prev * k
                acc = term if acc is None else acc + term
            if acc is not None:
                result[e] = acc / e
        return QSeries(result, self.trunc, self.ring)

    def log(self) -> "QSeries":
        """Formal logarithm of a series with invertible constant term."""
        c0 = self.constant_term()
        if is_zero_scalar(c0):
            raise SingularSeriesError("logarithm of a series with zero constant term")
        if c0 != self.ring.one:
            if self.ring is COMPLEX:
                return cmath.log(c0) + (self * (1 / c0)).log()
            raise DomainError("log of an exact QSeries needs constant term 1")
        # e*L_e = e*A_e - sum_{k<e} k*L_k*A_{e-k}
        result: Dict[int, Any] = {}
        for e in range(1, self.trunc):
            acc = self[e] * e
            for k, lk in result.items():
                a = self.coeffs.get(e - k)
                if a is not None:
                    acc = acc - lk * a * k
            if not is_zero_scalar(acc):
                result[e] = acc / e
        return QSeries(result, self.trunc, self.ring)

    # -- structural operations ------------------------------------------------

    def truncate(self, trunc: int) -> "QSeries":
        return QSeries(self.coeffs, min(trunc, self.trunc), self.ring, self.low)

    def shift(self, exponent2: int) -> "QSeries":
        """Multiply by q^{exponent2/2}; the truncation moves with the series."""
        return QSeries({e + exponent2: c for e, c in self.coeffs.items()}, self.trunc + exponent2,
                       self.ring, self.low + exponent2)

    def half_twist(self) -> "QSeries":
        """Substitute q^{1/2} -> -q^{1/2}, i.e. the effect of tau -> tau + 1 on half-integer powers."""
        return QSeries({e: (c if e % 2 == 0 else -c) for e, c in self.coeffs.items()},
                       self.trunc, self.ring, self.low)

    def substitute_power(self, k: int) -> "QSeries":
        """Substitute q^{1/2} -> q^{k/2}; truncation scales accordingly."""
        return QSeries({e * k: c for e, c in self.coeffs.items()}, self.trunc * k, self.ring, self.low * k)

    def map(self, fn: Callable[[Any], Any], ring: Optional[Ring] = None) -> "QSeries":
        return QSeries({e: fn(c) for e, c in self.coeffs.items()}, self.trunc, ring or self.ring, self.low)

    def to_complex(self) -> "QSeries":
        if self.ring is COMPLEX:
            return self
        return self.map(complex, COMPLEX)

    def evaluate(self, tau: complex) -> complex:
        """Numeric value of the truncated sum at q^{1/2} = exp(pi i tau)."""
        nome = cmath.exp(1j * cmath.pi * tau)
        return sum((complex(c) * nome ** e for e, c in self.coeffs.items()), 0j)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "trunc": str(Fraction(self.trunc, 2)),
            "ring": self.ring.name,
            "coefficients": [{"exponent": str(Fraction(e, 2)), "value": c} for e, c in self.coeffs.items()],
        }

    def __repr__(self) -> str:
        body = " + ".join(f"({c})*q^({Fraction(e, 2)})" for e, c in self.coeffs.items()) or "0"
        return f"QSeries[{self.ring.name}]({body} + O(q^{Fraction(self.trunc, 2)}))"


def qs_mul(a: QSeries, b: QSeries) -> QSeries:
    """Cauchy product truncated at the smaller truncation."""
    a._compatible(b)
    trunc = min(a.trunc, b.trunc)
    out: Dict[int, Any] = {}
    b_items = list(b.coeffs.items())
    for ea, ca in a.coeffs.items():
        if ea + b.low >= trunc:
            break
        for eb, cb in b_items:
            e = ea + eb
            if e >= trunc:
                break
            term = ca * cb
            out[e] = out[e] + term if e in out else term
    return QSeries(out, trunc, a.ring, a.low + b.low)


def qs_inv(a: QSeries) -> QSeries:
    """Two-sided inverse up to truncation.

    Raises:
        SingularSeriesError: if the q^0 coefficient is zero or non-invertible
    """
    a0 = a.constant_term()
    if is_zero_scalar(a0):
        raise SingularSeriesError("series with zero constant term has no inverse")
    inv0 = scalar_inv(a0)
    result: Dict[int, Any] = {0: inv0}
    terms = [(e, c) for e, c in a.coeffs.items() if e > 0]
    for e in range(1, a.trunc):
        acc = None
        for k, ak in terms:
            if k > e:
                break
            prev = result.get(e - k)
            if prev is None:
                continue
            term = ak * prev
            acc = term if acc is None else acc + term
        if acc is not None:
            result[e] = -(inv0 * acc)
    return QSeries(result, a.trunc, a.ring)


@functools.lru_cache(maxsize=32)
def euler_function(trunc: int) -> QSeries:
    """c(q) = prod_{n>=1} (1 - q^n) as an exact rational series."""
    result = QSeries.one(trunc, RATIONAL)
    n = 1
    while 2 * n < trunc:
        result = qs_mul(result, QSeries({0: 1, 2 * n: -1}, trunc, RATIONAL))
        n += 1
    return result


# ---------------------------------------------------------------------------
# PowerSeries in a small variable
# ---------------------------------------------------------------------------

class PowerSeries:
    """Truncated Taylor series sum_{k<=order} a_k h^k with generic scalars."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Sequence[Any]):
        if not coeffs:
            raise DomainError("a power series needs at least a constant term")
        self.coeffs = tuple(coeffs)

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def __getitem__(self, k: int) -> Any:
        return self.coeffs[k] if k <= self.order else 0

    @classmethod
    def constant(cls, value: Any, order: int) -> "PowerSeries":
        return cls([value] + [0] * order)

    def truncate(self, order: int) -> "PowerSeries":
        return PowerSeries(self.coeffs[: order + 1])

    def __add__(self, other: Any) -> "PowerSeries":
        if not isinstance(other, PowerSeries):
            return PowerSeries([self.coeffs[0] + other] + list(self.coeffs[1:]))
        order = min(self.order, other.order)
        return PowerSeries([self.coeffs[k] + other.coeffs[k] for k in range(order + 1)])

    __radd__ = __add__

    def __neg__(self) -> "PowerSeries":
        return PowerSeries([-c for c in self.coeffs])

    def __sub__(self, other: Any) -> "PowerSeries":
        return self + (-other)

    def __rsub__(self, other: Any) -> "PowerSeries":
        return (-self) + other

    def __mul__(self, other: Any) -> "PowerSeries":
        if isinstance(other, PowerSeries):
            order = min(self.order, other.order)
            return PowerSeries([
                _total(self.coeffs[i] * other.coeffs[n - i] for i in range(n + 1))
                for n in range(order + 1)
            ])
        return PowerSeries([c * other for c in self.coeffs])

    def __rmul__(self, other: Any) -> "PowerSeries":
        return PowerSeries([other * c for c in self.coeffs])

    def inverse(self) -> "PowerSeries":
        b0 = scalar_inv(self.coeffs[0])
        out = [b0]
        for n in range(1, self.order + 1):
            acc = _total(self.coeffs[k] * out[n - k] for k in range(1, n + 1))
            out.append(-(b0 * acc))
        return PowerSeries(out)

    def exp(self) -> "PowerSeries":
        # F' = G'F  =>  n F_n = sum_k k G_k F_{n-k}
        out = [scalar_exp(self.coeffs[0])]
        for n in range(1, self.order + 1):
            acc = _total(self.coeffs[k] * out[n - k] * k for k in range(1, n + 1))
            out.append(acc * Fraction(1, n) if isinstance(acc, QSeries) else acc / n)
        return PowerSeries(out)

    def log(self) -> "PowerSeries":
        a0 = self.coeffs[0]
        lead = scalar_log(a0)
        inv0 = scalar_inv(a0)
        normalized = [c * inv0 for c in self.coeffs]
        out = [lead]
        # n L_n = n A_n - sum_{k=1}^{n-1} k L_k A_{n-k}, with A_0 = 1
        for n in range(1, self.order + 1):
            acc = normalized[n] * n
            for k in range(1, n):
                acc = acc - out[k] * normalized[n - k] * k
            out.append(acc * Fraction(1, n) if isinstance(acc, QSeries) else acc / n)
        return PowerSeries(out)

    def derivative(self) -> "PowerSeries":
        if self.order == 0:
            return PowerSeries([0])
        return PowerSeries([self.coeffs[k] * k for k in range(1, self.order + 1)])

    def divide_by_variable(self) -> "PowerSeries":
        """(f(h) - f(0))/h when f(0) vanishes."""
        if not is_zero_scalar(self.coeffs[0]):
            raise DomainError("series does not vanish at the origin")
        if self.order == 0:
            return PowerSeries([0])
        return PowerSeries(self.coeffs[1:])

    def scale_variable(self, factor: Any) -> "PowerSeries":
        """f(h) -> f(factor*h)."""
        return PowerSeries([c * factor ** k for k, c in enumerate(self.coeffs)])

    def substitute(self, x: "GradedElement") -> "GradedElement":
        """Evaluate at a nilpotent graded element."""
        return ga_compose(self, x)

    def __repr__(self) -> str:
        return f"PowerSeries({list(self.coeffs)!r})"


def trig_series(kind: str, center: complex, order: int, scale: float = cmath.pi) -> PowerSeries:
    """Taylor series of sin(scale*(c+h)) or cos(scale*(c+h)) in h."""
    if kind not in ("sin", "cos"):
        raise DomainError(f"unknown trigonometric kind '{kind}'")
    phase = scale * center
    out = []
    fact = 1
    for k in range(order + 1):
        if k:
            fact *= k
        shift = k * cmath.pi / 2
        value = cmath.sin(phase + shift) if kind == "sin" else cmath.cos(phase + shift)
        out.append(value * scale ** k / fact)
    return PowerSeries(out)


# ---------------------------------------------------------------------------
# Graded-commutative algebra
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Generator:
    name: str
    degree: int
    odd: bool


class GeneratorTable:
    """Ordered generator declarations; the order defines canonical monomials."""

    __slots__ = ("generators", "_index")

    def __init__(self, generators: Iterable[Generator]):
        self.generators = tuple(generators)
        self._index = {g.name: i for i, g in enumerate(self.generators)}
        if len(self._index) != len(self.generators):
            raise DomainError("duplicate generator names")
        for g in self.generators:
            if g.degree <= 0:
                raise DomainError(f"generator {g.name} must have positive degree")

    @classmethod
    def build(cls, even: Iterable[str] = (), odd: Optional[Mapping[str, int]] = None,
              even_degree: int = 2) -> "GeneratorTable":
        """Even generators (Chern roots) first, then odd classes by degree."""
        gens = [Generator(name, even_degree, False) for name in even]
        for name, degree in sorted((odd or {}).items(), key=lambda item: (item[1], item[0])):
            gens.append(Generator(name, degree, degree % 2 == 1))
        return cls(gens)

    def __len__(self) -> int:
        return len(self.generators)

    def __getitem__(self, i: int) -> Generator:
        return self.generators[i]

    def __contains__(self, name: str) -> bool:
        return name in self._index

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise DomainError(f"unknown generator '{name}'") from None

    def names(self) -> List[str]:
        return [g.name for g in self.generators]

    def degree(self, monomial: Monomial) -> int:
        return sum(self.generators[i].degree for i in monomial)

    def normalize(self, sequence: Sequence[int]) -> Tuple[int, Monomial]:
        """Canonical sorted monomial and the sign of the reordering (0 if it vanishes)."""
        odd = [i for i in sequence if self.generators[i].odd]
        if len(set(odd)) != len(odd):
            return 0, ()
        inversions = sum(1 for a, b in itertools.combinations(odd, 2) if a > b)
        return (-1 if inversions % 2 else 1), tuple(sorted(sequence))

    def parse_monomial(self, text: str) -> Tuple[int, Monomial]:
        """Parse ``"y1^2*c3"`` (or ``"1"``) into sign and canonical monomial."""
        text = text.replace(" ", "")
        if text in ("", "1"):
            return 1, ()
        sequence: List[int] = []
        for factor in text.split("*"):
            match = re.fullmatch(r"([A-Za-z_][A-Za-z0-9_]*)(?:\^(\d+))?", factor)
            if not match:
                raise DomainError(f"cannot parse monomial factor '{factor}'")
            sequence.extend([self.index(match.group(1))] * int(match.group(2) or 1))
        return self.normalize(sequence)

    def format_monomial(self, monomial: Monomial) -> str:
        if not monomial:
            return "1"
        parts = []
        for i, group in itertools.groupby(monomial):
            power = len(list(group))
            name = self.generators[i].name
            parts.append(name if power == 1 else f"{name}^{power}")
        return "*".join(parts)

    def monomials_of_degree(self, degree: int) -> List[Monomial]:
        """All canonical non-vanishing monomials of the given total degree."""
        found: List[Monomial] = []

        def extend(start: int, remaining: int, current: List[int]) -> None:
            if remaining == 0:
                found.append(tuple(current))
                return
            for i in range(start, len(self.generators)):
                g = self.generators[i]
                if g.degree > remaining:
                    continue
                if g.odd and current and current[-1] == i:
                    continue
                current.append(i)
                extend(i if not g.odd else i + 1, remaining - g.degree, current)
                current.pop()

        extend(0, degree, [])
        return found

    def __eq__(self, other: object) -> bool:
        return isinstance(other, GeneratorTable) and self.generators == other.generators

    def __hash__(self) -> int:
        return hash(self.generators)

    def __repr__(self) -> str:
        return "GeneratorTable(" + ", ".join(f"{g.name}:{g.degree}{'o' if g.odd else 'e'}" for g in self.generators) + ")"


class GradedElement:
    """Element of a truncated graded-commutative algebra.

    ``terms`` maps canonical monomials to scalars (int, Fraction, complex or
    QSeries). Monomials above ``degree_cap`` are dropped on construction.
    """

    __slots__ = ("table", "terms", "degree_cap")

    def __init__(self, table: GeneratorTable, terms: Mapping[Sequence[int], Any], degree_cap: int):
        self.table = table
        self.degree_cap = int(degree_cap)
        out: Dict[Monomial, Any] = {}
        for key, value in terms.items():
            sign, mono = table.normalize(tuple(key))
            if sign == 0 or table.degree(mono) > self.degree_cap:
                continue
            value = value if sign > 0 else -value
            out[mono] = out[mono] + value if mono in out else value
        self.terms = {m: c for m, c in sorted(out.items(), key=lambda kv: (table.degree(kv[0]), kv[0]))
                      if not is_zero_scalar(c)}

    # -- constructors -------------------------------------------------------

    @classmethod
    def scalar(cls, table: GeneratorTable, degree_cap: int, value: Any = 1) -> "GradedElement":
        return cls(table, {(): value}, degree_cap)

    @classmethod
    def one(cls, table: GeneratorTable, degree_cap: int) -> "GradedElement":
        return cls.scalar(table, degree_cap, 1)

    @classmethod
    def zero(cls, table: GeneratorTable, degree_cap: int) -> "GradedElement":
        return cls(table, {}, degree_cap)

    @classmethod
    def generator(cls, table: GeneratorTable, name: str, degree_cap: int, coefficient: Any = 1) -> "GradedElement":
        return cls(table, {(table.index(name),): coefficient}, degree_cap)

    @classmethod
    def from_string(cls, table: GeneratorTable, text: str, degree_cap: int, coefficient: Any = 1) -> "GradedElement":
        sign, mono = table.parse_monomial(text)
        if sign == 0:
            return cls.zero(table, degree_cap)
        return cls(table, {mono: coefficient if sign > 0 else -coefficient}, degree_cap)

    @classmethod
    def root(cls, table: GeneratorTable, expression: str, degree_cap: int) -> "GradedElement":
        """A Chern-root expression: ``"0"``, ``"y1"`` or ``"-y1"``."""
        expression = expression.strip()
        if expression == "0":
            return cls.zero(table, degree_cap)
        if expression.startswith("-"):
            return -cls.generator(table, expression[1:], degree_cap)
        return cls.generator(table, expression, degree_cap)

    # -- access ---------------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def constant_term(self) -> Any:
        return self.terms.get((), 0)

    def degree_part(self, degree: int) -> "GradedElement":
        return GradedElement(self.table, {m: c for m, c in self.terms.items()
                                          if self.table.degree(m) == degree}, self.degree_cap)

    def min_degree(self) -> int:
        """Lowest degree among non-constant terms (degree_cap + 1 if none)."""
        degrees = [self.table.degree(m) for m in self.terms if m]
        return min(degrees) if degrees else self.degree_cap + 1

    def coefficient(self, monomial: str) -> Any:
        sign, mono = self.table.parse_monomial(monomial)
        value = self.terms.get(mono, 0)
        return value if sign >= 0 else -value

    def map_scalars(self, fn: Callable[[Any], Any]) -> "GradedElement":
        return GradedElement(self.table, {m: fn(c) for m, c in self.terms.items()}, self.degree_cap)

    # -- arithmetic -----------------------------------------------------------

    def _compatible(self, other: "GradedElement") -> None:
        if self.table != other.table or self.degree_cap != other.degree_cap:
            raise TypeError("graded elements over different generator tables or degree caps")

    def __add__(self, other: Any) -> "GradedElement":
        if not isinstance(other, GradedElement):
            other = GradedElement.scalar(self.table, self.degree_cap, other)
        self._compatible(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out[m] + c if m in out else c
        return GradedElement(self.table, out, self.degree_cap)

    __radd__ = __add__

    def __neg__(self) -> "GradedElement":
        return GradedElement(self.table, {m: -c for m, c in self.terms.items()}, self.degree_cap)

    def __sub__(self, other: Any) -> "GradedElement":
        return self + (-other)

    def __rsub__(self, other: Any) -> "GradedElement":
        return (-self) + other

    def __mul__(self, other: Any) -> "GradedElement":
        if isinstance(other, GradedElement):
            return ga_mul(self, other)
        return GradedElement(self.table, {m: c * other for m, c in self.terms.items()}, self.degree_cap)

    def __rmul__(self, other: Any) -> "GradedElement":
        return GradedElement(self.table, {m: other * c for m, c in self.terms.items()}, self.degree_cap)

    def __truediv__(self, other: Any) -> "GradedElement":
        if isinstance(other, int):
            other = Fraction(1, other)
            return self * other
        return self * (1 / other)

    def __pow__(self, n: int) -> "GradedElement":
        result = GradedElement.one(self.table, self.degree_cap)
        for _ in range(n):
            result = ga_mul(result, self)
        return result

    def inverse(self) -> "GradedElement":
        """Inverse of an element with invertible constant part (finite geometric sum)."""
        c0 = self.constant_term()
        if is_zero_scalar(c0):
            raise SingularSeriesError("graded element with zero constant part is not invertible")
        inv0 = scalar_inv(c0)
        nilpotent = self * inv0 - 1
        result = GradedElement.one(self.table, self.degree_cap)
        power = result
        while True:
            power = ga_mul(power, -nilpotent)
            if power.is_zero():
                return result * inv0
            result = result + power

    def __eq__(self, other: object) -> bool:
        if isinstance(other, GradedElement):
            return self.table == other.table and (self - other).is_zero()
        if isinstance(other, (int, Fraction)):
            return (self - other).is_zero()
        return NotImplemented

    __hash__ = None

    def allclose(self, other: "GradedElement", tol: float = 1e-9) -> bool:
        diff = self - other
        for c in diff.terms.values():
            if isinstance(c, QSeries):
                if any(abs(complex(v)) > tol for v in c.coeffs.values()):
                    return False
            elif abs(complex(c)) > tol:
                return False
        return True

    def to_dict(self) -> Dict[str, Any]:
        return {self.table.format_monomial(m): c for m, c in self.terms.items()}

    def __repr__(self) -> str:
        body = " + ".join(f"({c})*{self.table.format_monomial(m)}" for m, c in self.terms.items()) or "0"
        return f"GradedElement({body})"


def ga_mul(a: GradedElement, b: GradedElement) -> GradedElement:
    """Graded-commutative product; terms above the degree cap are dropped.

    Raises:
        TypeError: if the generator tables or degree caps differ
    """
    a._compatible(b)
    table = a.table
    out: Dict[Monomial, Any] = {}
    b_terms = [(m, c, table.degree(m)) for m, c in b.terms.items()]
    for ma, ca in a.terms.items():
        da = table.degree(ma)
        for mb, cb, db in b_terms:
            if da + db > a.degree_cap:
                continue
            sign, mono = table.normalize(ma + mb)
            if sign == 0:
                continue
            term = ca * cb
            if sign < 0:
                term = -term
            out[mono] = out[mono] + term if mono in out else term
    return GradedElement(table, out, a.degree_cap)


def ga_exp(a: GradedElement) -> GradedElement:
    """Exponential of a nilpotent element, exact and finite.

    Raises:
        DomainError: if ``a`` has a nonzero degree-0 part
    """
    if not is_zero_scalar(a.constant_term()):
        raise DomainError("ga_exp needs a zero constant part; scale the constant separately")
    result = GradedElement.one(a.table, a.degree_cap)
    power = GradedElement.one(a.table, a.degree_cap)
    k = 0
    while True:
        k += 1
        power = ga_mul(power, a) * Fraction(1, k)
        if power.is_zero():
            return result
        result = result + power


def ga_compose(series: PowerSeries, x: GradedElement) -> GradedElement:
    """Substitute a nilpotent element into a power series: sum_k a_k x^k.

    Raises:
        DomainError: if x has a constant part or the series order is too low
    """
    if not is_zero_scalar(x.constant_term()):
        raise DomainError("substitution needs a nilpotent element")
    needed = x.degree_cap // x.min_degree() if not x.is_zero() else 0
    if series.order < needed:
        raise DomainError(f"series order {series.order} too low for nilpotency index {needed}")
    result = GradedElement.scalar(x.table, x.degree_cap, series[0])
    power = GradedElement.one(x.table, x.degree_cap)
    for k in range(1, needed + 1):
        power = ga_mul(power, x)
        if power.is_zero():
            break
        if not is_zero_scalar(series[k]):
            result = result + power * series[k]
    return result


class TopDegreeFunctional:
    """Linear functional pairing top-degree monomials with numbers.

    Monomials absent from the table pair to zero; any stored monomial of
    degree different from ``dim`` is rejected.
    """

    def __init__(self, table: GeneratorTable, dim: int, values: Mapping[str, Any]):
        self.table = table
        self.dim = dim
        self.values: Dict[Monomial, Any] = {}
        for text, value in values.items():
            sign, mono = table.parse_monomial(text)
            if sign == 0:
                if value != 0:
                    raise DomainError(f"monomial '{text}' vanishes identically but was given value {value}")
                continue
            if table.degree(mono) != dim:
                raise DomainError(f"monomial '{text}' has degree {table.degree(mono)}, expected {dim}")
            self.values[mono] = self.values.get(mono, 0) + (value if sign > 0 else -value)

    def __call__(self, element: GradedElement) -> Any:
        total = None
        for mono, value in self.values.items():
            coeff = element.terms.get(mono)
            if coeff is None:
                continue
            term = coeff * value
            total = term if total is None else total + term
        return 0 if total is None else total

    def scaled(self, factor: Any) -> "TopDegreeFunctional":
        clone = TopDegreeFunctional(self.table, self.dim, {})
        clone.values = {m: v * factor for m, v in self.values.items()}
        return clone

    def __add__(self, other: "TopDegreeFunctional") -> "TopDegreeFunctional":
        clone = TopDegreeFunctional(self.table, self.dim, {})
        clone.values = dict(self.values)
        for m, v in other.values.items():
            clone.values[m] = clone.values.get(m, 0) + v
        return clone
