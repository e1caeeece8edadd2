"""
Formal K-theory q-series: Λ_t, S_t, the Witten bundles Θ_j(TM|V), Θ(TM|V)
and the bundles Q_j(E), symbolically as :class:`KElement` coefficients and as
characteristic forms through Chern roots.
"""

import cmath
import functools
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, combinations_with_replacement
from math import comb
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

from .exceptions import DomainError
from .series import (COMPLEX, RATIONAL, GeneratorTable, GradedElement, PowerSeries, QSeries, ga_exp,
                     ga_mul, is_zero_scalar, object_ring)
from .theta import ModularPoint, SeriesBackend, family_kind

logger = logging.getLogger(__name__)

EXTERIOR = "L"
SYMMETRIC = "S"
SPINOR = "D"
SPINOR_DIFFERENCE = "DS"

_OPS = (EXTERIOR, SYMMETRIC, SPINOR, SPINOR_DIFFERENCE)

Factor = Tuple[str, str, int]
Monomial = Tuple[Factor, ...]

BUNDLE_KINDS = ("1", "2", "3", "flat")


def _factor_rank(factor: Factor, ranks: Mapping[str, int]) -> int:
    base, op, power = factor
    r = ranks[base]
    if op == EXTERIOR:
        return comb(r, power)
    if op == SYMMETRIC:
        return comb(r + power - 1, power)
    if op == SPINOR:
        return 2 ** (r // 2)
    return 0


def _format_factor(factor: Factor) -> str:
    base, op, power = factor
    if op == SPINOR:
        return f"Delta({base})"
    if op == SPINOR_DIFFERENCE:
        return f"DeltaPM({base})"
    if op == EXTERIOR and power == 1:
        return base
    return f"{'L' if op == EXTERIOR else 'S'}{power}({base})"


class KElement:
    """Integer combination of tensor monomials in bundle symbols.

    Monomials are sorted tuples of factors ``(base, op, power)``; the empty
    monomial is the trivial line. Normal form: S¹W = Λ¹W = W, Λ⁰ = S⁰ = ℂ,
    Λ^i W = 0 for i > rank W.
    """

    __slots__ = ("ranks", "terms")

    def __init__(self, terms: Mapping[Sequence[Factor], int], ranks: Mapping[str, int]):
        self.ranks = dict(ranks)
        out: Dict[Monomial, int] = {}
        for mono, coeff in terms.items():
            normal = self._normalize(mono)
            if normal is None or coeff == 0:
                continue
            out[normal] = out.get(normal, 0) + int(coeff)
        self.terms = {m: c for m, c in sorted(out.items()) if c != 0}

    def _normalize(self, mono: Sequence[Factor]) -> Optional[Monomial]:
        factors = []
        for base, op, power in mono:
            if base not in self.ranks:
                raise DomainError(f"bundle symbol '{base}' has no declared rank")
            if op not in _OPS:
                raise DomainError(f"unknown bundle operation '{op}'")
            if op in (EXTERIOR, SYMMETRIC):
                if power == 0:
                    continue
                if power == 1:
                    op = EXTERIOR
                if op == EXTERIOR and power > self.ranks[base]:
                    return None
            factors.append((base, op, power))
        return tuple(sorted(factors))

    # -- constructors ---------------------------------------------------------

    @classmethod
    def trivial(cls, k: int, ranks: Mapping[str, int]) -> "KElement":
        return cls({(): k}, ranks)

    @classmethod
    def symbol(cls, base: str, ranks: Mapping[str, int]) -> "KElement":
        return cls({((base, EXTERIOR, 1),): 1}, ranks)

    @classmethod
    def exterior(cls, base: str, power: int, ranks: Mapping[str, int]) -> "KElement":
        return cls({((base, EXTERIOR, power),): 1}, ranks)

    @classmethod
    def symmetric(cls, base: str, power: int, ranks: Mapping[str, int]) -> "KElement":
        return cls({((base, SYMMETRIC, power),): 1}, ranks)

    @classmethod
    def spinor(cls, base: str, ranks: Mapping[str, int], difference: bool = False) -> "KElement":
        return cls({((base, SPINOR_DIFFERENCE if difference else SPINOR, 1),): 1}, ranks)

    @classmethod
    def reduced(cls, base: str, ranks: Mapping[str, int]) -> "KElement":
        """W̃ = W − ℂ^{rank W}."""
        return cls({((base, EXTERIOR, 1),): 1, (): -ranks[base]}, ranks)

    # -- queries --------------------------------------------------------------

    def rank(self) -> int:
        total = 0
        for mono, coeff in self.terms.items():
            r = 1
            for f in mono:
                r *= _factor_rank(f, self.ranks)
            total += coeff * r
        return total

    def is_zero(self) -> bool:
        return not self.terms

    def trivial_part(self) -> int:
        return self.terms.get((), 0)

    def base_multiplicities(self) -> Tuple[int, Dict[str, int]]:
        """Split W = k·ℂ + Σ n_b·b; raises if W has composite terms."""
        bases: Dict[str, int] = {}
        for mono, coeff in self.terms.items():
            if not mono:
                continue
            if len(mono) != 1 or mono[0][1] != EXTERIOR or mono[0][2] != 1:
                raise DomainError(f"Λ_t/S_t need base symbols only, got {self}")
            bases[mono[0][0]] = coeff
        return self.trivial_part(), bases

    # -- arithmetic -----------------------------------------------------------

    def _coerce(self, other: Any) -> "KElement":
        if isinstance(other, KElement):
            return other
        if isinstance(other, int):
            return KElement.trivial(other, self.ranks)
        if isinstance(other, Fraction) and other.denominator == 1:
            return KElement.trivial(int(other), self.ranks)
        raise TypeError(f"cannot combine KElement with {type(other).__name__}")

    def _merged_ranks(self, other: "KElement") -> Dict[str, int]:
        ranks = dict(self.ranks)
        for base, r in other.ranks.items():
            if ranks.setdefault(base, r) != r:
                raise TypeError(f"bundle '{base}' declared with ranks {ranks[base]} and {r}")
        return ranks

    def __add__(self, other: Any) -> "KElement":
        other = self._coerce(other)
        ranks = self._merged_ranks(other)
        terms = dict(self.terms)
        for m, c in other.terms.items():
            terms[m] = terms.get(m, 0) + c
        return KElement(terms, ranks)

    __radd__ = __add__

    def __neg__(self) -> "KElement":
        return KElement({m: -c for m, c in self.terms.items()}, self.ranks)

    def __sub__(self, other: Any) -> "KElement":
        return self + (-self._coerce(other))

    def __rsub__(self, other: Any) -> "KElement":
        return self._coerce(other) - self

    def __mul__(self, other: Any) -> "KElement":
        if isinstance(other, int):
            return KElement({m: c * other for m, c in self.terms.items()}, self.ranks)
        other = self._coerce(other)
        ranks = self._merged_ranks(other)
        terms: Dict[Monomial, int] = {}
        for ma, ca in self.terms.items():
            for mb, cb in other.terms.items():
                key = tuple(sorted(ma + mb))
                terms[key] = terms.get(key, 0) + ca * cb
        return KElement(terms, ranks)

    def __rmul__(self, other: Any) -> "KElement":
        return self.__mul__(other)

    def inverse(self) -> "KElement":
        if self.terms == {(): 1} or self.terms == {(): -1}:
            return self
        raise DomainError(f"{self} is not a unit of the representation ring")

    def __eq__(self, other: object) -> bool:
        if isinstance(other, int):
            other = KElement.trivial(other, self.ranks)
        if not isinstance(other, KElement):
            return NotImplemented
        return self.terms == other.terms

    __hash__ = None

    def to_dict(self) -> Dict[str, int]:
        return {self.format_monomial(m): c for m, c in self.terms.items()}

    @staticmethod
    def format_monomial(mono: Monomial) -> str:
        return "*".join(_format_factor(f) for f in mono) or "C"

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for mono, coeff in self.terms.items():
            name = self.format_monomial(mono)
            if not mono:
                text = str(abs(coeff))
            elif abs(coeff) == 1:
                text = name
            else:
                text = f"{abs(coeff)}{name}"
            parts.append(("-" if coeff < 0 else "+", text))
        head = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        return head + "".join(f" {s} {t}" for s, t in parts[1:])


K_RING = object_ring("k-theory", 0, 1)
GRADED_RING = object_ring("graded", 0, 1)


# ---------------------------------------------------------------------------
# Λ_t and S_t
# ---------------------------------------------------------------------------

def _binomial_series(k: int, sign: int, t_trunc: int) -> List[int]:
    """Coefficients of (1 + sign·t)^k through t^{t_trunc}, k of either sign."""
    if k >= 0:
        return [comb(k, i) * sign ** i if i <= k else 0 for i in range(t_trunc + 1)]
    m = -k
    return [comb(m + i - 1, i) * (-sign) ** i for i in range(t_trunc + 1)]


def _base_series(base: str, op: str, ranks: Mapping[str, int], t_trunc: int, sign: int = 1) -> PowerSeries:
    coeffs: List[Any] = [KElement.trivial(1, ranks)]
    for i in range(1, t_trunc + 1):
        term = KElement({((base, op, i),): sign ** i}, ranks)
        coeffs.append(term)
    return PowerSeries(coeffs)


def _power(series: PowerSeries, n: int, one: Any) -> PowerSeries:
    result = PowerSeries.constant(one, series.order)
    for _ in range(n):
        result = result * series
    return result


def lambda_series(bundle: Union[KElement, "BundleRootData"], t_trunc: int) -> PowerSeries:
    """Λ_t(W) = Σ t^i Λ^i(W) through t^{t_trunc}.

    On a KElement made of base symbols a negative multiplicity uses
    Λ_t(−W) = S_{−t}(W); on root data Λ_t = ∏(1 + t·e^{root}).

    Raises:
        DomainError: for a negative truncation or a composite KElement
    """
    if t_trunc < 0:
        raise DomainError("t truncation must be non-negative")
    if isinstance(bundle, BundleRootData):
        return bundle.lambda_series(t_trunc)
    trivial, bases = bundle.base_multiplicities()
    one = KElement.trivial(1, bundle.ranks)
    result = PowerSeries([one * c for c in _binomial_series(trivial, 1, t_trunc)])
    for base, n in bases.items():
        if n > 0:
            factor = _base_series(base, EXTERIOR, bundle.ranks, t_trunc)
        else:
            factor = _base_series(base, SYMMETRIC, bundle.ranks, t_trunc, sign=-1)
        result = result * _power(factor, abs(n), one)
    return result


def symmetric_series(bundle: Union[KElement, "BundleRootData"], t_trunc: int) -> PowerSeries:
    """S_t(W) = Σ t^i S^i(W); S_t(−W) = Λ_{−t}(W)."""
    if t_trunc < 0:
        raise DomainError("t truncation must be non-negative")
    if isinstance(bundle, BundleRootData):
        return bundle.symmetric_series(t_trunc)
    trivial, bases = bundle.base_multiplicities()
    one = KElement.trivial(1, bundle.ranks)
    result = PowerSeries([one * c for c in _binomial_series(-trivial, -1, t_trunc)])
    for base, n in bases.items():
        if n > 0:
            factor = _base_series(base, SYMMETRIC, bundle.ranks, t_trunc)
        else:
            factor = _base_series(base, EXTERIOR, bundle.ranks, t_trunc, sign=-1)
        result = result * _power(factor, abs(n), one)
    return result


def _series_in_q(series: PowerSeries, exponent2: int, sign: int, q_trunc: int, ring) -> QSeries:
    """Substitute t = sign·q^{exponent2/2} into a t-series."""
    coeffs = {}
    for i, c in enumerate(series.coeffs):
        e = i * exponent2
        if e >= q_trunc:
            break
        coeffs[e] = c if sign ** i > 0 else -c
    return QSeries(coeffs, q_trunc, ring)


# ---------------------------------------------------------------------------
# Witten bundles
# ---------------------------------------------------------------------------

def _v_sign_and_half(kind: str) -> Tuple[int, bool]:
    """Sign s and half-integrality of the Λ_{s q^a}(V) factors for each bundle kind."""
    return {"1": (1, False), "2": (-1, True), "3": (1, True), "flat": (-1, False)}[kind]


def _normalize_kind(kind: Union[int, str]) -> str:
    kind = str(kind)
    if kind not in BUNDLE_KINDS:
        raise DomainError(f"bundle kind must be one of {', '.join(BUNDLE_KINDS)}, got {kind}")
    return kind


def _lambda_product(w: KElement, sign: int, half: bool, q_trunc: int) -> QSeries:
    """⊗_{n≥1} Λ_{s q^{a_n}}(W) with a_n = n or n − ½."""
    result = QSeries({0: KElement.trivial(1, w.ranks)}, q_trunc, K_RING)
    n = 1
    while True:
        exponent2 = 2 * n - 1 if half else 2 * n
        if exponent2 >= q_trunc:
            break
        t_trunc = (q_trunc - 1) // exponent2
        factor = _series_in_q(lambda_series(w, t_trunc), exponent2, sign, q_trunc, K_RING)
        result = result * factor
        n += 1
    return result


def _symmetric_product(w: KElement, q_trunc: int) -> QSeries:
    """⊗_{n≥1} S_{q^n}(W)."""
    result = QSeries({0: KElement.trivial(1, w.ranks)}, q_trunc, K_RING)
    n = 1
    while 2 * n < q_trunc:
        t_trunc = (q_trunc - 1) // (2 * n)
        result = result * _series_in_q(symmetric_series(w, t_trunc), 2 * n, 1, q_trunc, K_RING)
        n += 1
    return result


def theta_bundle_qexp(kind: Union[int, str], tm: KElement, v: KElement, q_trunc: int,
                      virtual: bool = False) -> QSeries:
    """q-expansion of Θ_j(TM|V) (j = 1, 2, 3) or of Θ(TM|V) (``"flat"``).

    Θ_j(TM|V) = ⊗ S_{q^n}(T_ℂM) ⊗ ⊗ Λ_{s q^{a_n}}(V_ℂ) with (s, a_n) = (+, n),
    (−, n−½), (+, n−½), and (−, n) for the flat bundle. With ``virtual`` both
    bundles are replaced by their reduced versions W − ℂ^{rank W}.

    Returns:
        QSeries (doubled exponents) with KElement coefficients
    """
    kind = _normalize_kind(kind)
    if q_trunc < 1:
        raise DomainError("q truncation must be at least 1")
    if virtual:
        tm = tm - tm.rank()
        v = v - v.rank()
    sign, half = _v_sign_and_half(kind)
    series = _symmetric_product(tm, q_trunc)
    if not v.is_zero():
        series = series * _lambda_product(v, sign, half, q_trunc)
    logger.debug(f"Expanded Θ_{kind} to doubled order {q_trunc}")
    return series


def q_bundle_qexp(j: int, n: int, q_trunc: int, virtual: bool = False) -> QSeries:
    """q-expansion of Q_j(E) for a rank-N bundle E.

    Q₁(E) = Δ(E)⊗⊗Λ_{q^n}(E), Q₂(E) = ⊗Λ_{−q^{n−½}}(E), Q₃(E) = ⊗Λ_{q^{n−½}}(E).

    Raises:
        DomainError: if N is odd or below 2
    """
    if n < 2 or n % 2:
        raise DomainError(f"rank N of E must be even and at least 2, got {n}")
    if j not in (1, 2, 3):
        raise DomainError(f"Q_j is defined for j = 1, 2, 3, got {j}")
    ranks = {"E": n}
    e = KElement.symbol("E", ranks)
    if virtual:
        e = e - n
    sign, half = _v_sign_and_half(str(j))
    series = _lambda_product(e, sign, half, q_trunc)
    if j == 1:
        series = series * KElement.spinor("E", ranks)
    return series


def k_character(element: KElement, values: Mapping[str, Sequence[int]]) -> int:
    """Character of a KElement with e^{roots} of each base replaced by integers.

    Λ^i evaluates to the elementary and S^i to the complete homogeneous
    symmetric polynomial, so identities in the representation ring become
    exact integer identities.
    """
    def factor_value(factor: Factor) -> int:
        base, op, power = factor
        xs = values[base]
        if len(xs) != element.ranks[base]:
            raise DomainError(f"{len(xs)} values given for the rank-{element.ranks[base]} bundle '{base}'")
        if op == EXTERIOR:
            return sum(math.prod(c) for c in combinations(xs, power))
        if op == SYMMETRIC:
            return sum(math.prod(c) for c in combinations_with_replacement(xs, power))
        raise DomainError("spinor factors have no integer character")

    return sum(coeff * math.prod(factor_value(f) for f in mono) for mono, coeff in element.terms.items())


def rank_series(series: QSeries) -> QSeries:
    """Coefficientwise ranks of a KElement series."""
    return series.map(lambda c: Fraction(c.rank()), RATIONAL)


@functools.lru_cache(maxsize=128)
def virtual_ratio(kind: str, tm_rank: int, v_rank: int, q_trunc: int) -> QSeries:
    """Rank generating series of the non-virtual bundle.

    Since Θ(T|V) = Θ(T̃|Ṽ)⊗Θ(ℂ^{dim T}|ℂ^{dim V}) this is also the exact ratio
    between the non-virtual and virtual conventions. For kind ``Q1``..``Q3``
    ``tm_rank`` is ignored and ``v_rank`` is N (the spinor rank is not included).
    """
    if kind.startswith("Q"):
        sign, half = _v_sign_and_half(kind[1:])
        tm_rank = 0
    else:
        sign, half = _v_sign_and_half(_normalize_kind(kind))
    result = QSeries.one(q_trunc, RATIONAL)
    n = 1
    while True:
        lam = 2 * n - 1 if half else 2 * n
        sym = 2 * n
        if lam >= q_trunc and sym >= q_trunc:
            break
        if lam < q_trunc and v_rank:
            result = result * QSeries({0: 1, lam: sign}, q_trunc, RATIONAL) ** v_rank
        if sym < q_trunc and tm_rank:
            result = result * QSeries({0: 1, sym: -1}, q_trunc, RATIONAL) ** (-tm_rank)
        n += 1
    return result


# ---------------------------------------------------------------------------
# Chern-root data and characters
# ---------------------------------------------------------------------------

TWO_PI_I = 2j * math.pi


def root_exponential(root: GradedElement, scale: Any) -> GradedElement:
    """e^{scale·root}; a constant part of the root is exponentiated as a number."""
    c0 = root.constant_term()
    if is_zero_scalar(c0):
        return ga_exp(root * scale)
    if isinstance(scale, (int, Fraction)):
        raise DomainError("exact characters need roots without constant part")
    return ga_exp((root - c0) * scale) * cmath.exp(scale * c0)


@dataclass(frozen=True)
class BundleRootData:
    """Chern roots of a bundle.

    ``paired`` data list one root r per pair ±r of a complexified real bundle;
    ``zero_roots`` counts trivial directions. Characters use e^{scale·root},
    scale 2πi by default or 1 for exact rational work.
    """

    name: str
    roots: Tuple[GradedElement, ...]
    paired: bool = True
    zero_roots: int = 0
    scale: Any = TWO_PI_I

    @property
    def rank(self) -> int:
        return (2 if self.paired else 1) * len(self.roots) + self.zero_roots

    def _template(self) -> GradedElement:
        if not self.roots:
            raise DomainError(f"bundle {self.name} has no roots to fix the generator table")
        return self.roots[0]

    def one(self) -> GradedElement:
        r = self._template()
        return GradedElement.one(r.table, r.degree_cap)

    def signed_roots(self) -> List[GradedElement]:
        out = []
        for r in self.roots:
            out.append(r)
            if self.paired:
                out.append(-r)
        return out

    def exponentials(self, factor: Any = 1) -> List[GradedElement]:
        return [root_exponential(r, self.scale * factor) for r in self.signed_roots()]

    def lambda_series(self, t_trunc: int) -> PowerSeries:
        one = self.one() if self.roots else 1
        padding = [0] * max(0, t_trunc - 1)
        result = PowerSeries.constant(one, t_trunc)
        for e in self.exponentials():
            result = result * PowerSeries([one, e] + padding)
        for _ in range(self.zero_roots):
            result = result * PowerSeries([1, 1] + padding)
        return result

    def symmetric_series(self, t_trunc: int) -> PowerSeries:
        """∏ 1/(1 − t e^{r}) expanded as geometric series, independent of Λ_t."""
        one = self.one() if self.roots else 1
        result = PowerSeries([one] + [0] * t_trunc)
        for r in self.signed_roots():
            powers = [root_exponential(r, self.scale * k) for k in range(t_trunc + 1)]
            result = result * PowerSeries(powers)
        for _ in range(self.zero_roots):
            result = result * PowerSeries([1] * (t_trunc + 1))
        return result

    def spinor_character(self, difference: bool = False) -> Any:
        """ch Δ = ∏(e^{s r/2} + e^{−s r/2})·2^{[zeros/2]}; Δ₊−Δ₋ uses e^{−s r/2} − e^{s r/2}."""
        if difference and self.zero_roots:
            return 0 if not self.roots else GradedElement.zero(self.roots[0].table, self.roots[0].degree_cap)
        result = self.one() if self.roots else 1
        half = self.scale / 2 if not isinstance(self.scale, int) else Fraction(self.scale, 2)
        for r in self.roots:
            plus = root_exponential(r, half)
            minus = root_exponential(-r, half)
            result = result * ((minus - plus) if difference else (plus + minus))
        return result * 2 ** (self.zero_roots // 2)


class CharacterMap:
    """Evaluates KElements to characters from root data per bundle symbol."""

    def __init__(self, roots: Mapping[str, BundleRootData], one: GradedElement):
        self.roots = dict(roots)
        self.one = one
        self._lambda: Dict[str, PowerSeries] = {}
        self._symmetric: Dict[str, PowerSeries] = {}

    def _factor(self, factor: Factor) -> Any:
        base, op, power = factor
        data = self.roots.get(base)
        if data is None:
            raise DomainError(f"no Chern roots supplied for bundle '{base}'")
        if op == SPINOR:
            return data.spinor_character()
        if op == SPINOR_DIFFERENCE:
            return data.spinor_character(difference=True)
        cache = self._lambda if op == EXTERIOR else self._symmetric
        series = cache.get(base)
        if series is None or series.order < power:
            builder = data.lambda_series if op == EXTERIOR else data.symmetric_series
            series = builder(max(power, 4))
            cache[base] = series
        return series[power]

    def __call__(self, element: KElement) -> GradedElement:
        total = self.one * 0
        for mono, coeff in element.terms.items():
            term = self.one * coeff
            for f in mono:
                term = term * self._factor(f)
            total = total + term
        return total

    def series(self, qseries: QSeries, ring=COMPLEX) -> GradedElement:
        """Character of a KElement q-series as a graded element with q-series scalars."""
        table, cap = self.one.table, self.one.degree_cap
        collected: Dict[Tuple[int, ...], Dict[int, Any]] = {}
        for e, coeff in qseries.items():
            for mono, value in self(coeff).terms.items():
                collected.setdefault(mono, {})[e] = value
        terms = {mono: QSeries(values, qseries.trunc, ring) for mono, values in collected.items()}
        return GradedElement(table, terms, cap)


def q_char_form(j: int, vb: BundleRootData, pt: ModularPoint, degree_cap: int) -> GradedElement:
    """Chern character of Q_j(W)_v from roots as a product of theta quotients.

    ch = ∏_pairs θ_j(y)/θ_j(0), times 2^{[rank/2]} for j = 1 (spinor factor).
    Each quotient is expanded with the formal q-series backend and truncated at
    ``degree_cap``. A bundle without roots gives a scalar over an empty table.
    """
    kind = family_kind(j)
    backend = SeriesBackend(pt.q_trunc)
    spinor = 2 ** (vb.rank // 2) if j == 1 else 1
    if not vb.roots:
        return GradedElement.scalar(GeneratorTable([]), degree_cap, QSeries.constant(spinor, pt.q_trunc, COMPLEX))
    table = vb.roots[0].table
    quotient = backend.quotient(kind, 0, degree_cap // 2, "ratio")
    result = GradedElement.scalar(table, degree_cap, QSeries.one(pt.q_trunc, COMPLEX))
    for r in vb.roots:
        result = ga_mul(result, quotient.substitute(GradedElement(r.table, r.terms, degree_cap)))
    return result * spinor
