"""
S¹-equivariant fixed-point engine.

Fixed-point data of a circle action (exponents and Chern roots per fixed
component, a pairing table standing in for the fundamental class) feed four
computations:

* the F-functions F_L, F_W, F'_W and F_dR,j as theta-quotient products,
* the Lefschetz index of a Toeplitz operator twisted by K-theory q-series,
* the signature rational function f(z),
* the anomaly relations and the rigidity / transformation-law scans built on them.

Root conventions: a root generator y enters theta arguments as y and Â-type
factors as πy; characters are e^{2πi·root}.
"""

import cmath
import functools
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

from .datasets import DatasetFile, Flags, odd_class_degree, parse_number, root_generator
from .exceptions import DatasetError, DomainError, InconsistentAnomalyError, PoleError
from .modularity import JacobiFormSpec, LawReport, ModularGroup, fold_law, safe_call
from .odd_chern import OddClassVector, k_odd_ch, odd_ch_form, transgression_coeffs, transgression_value
from .sampling import is_admissible, parallel_map
from .series import (COMPLEX, GeneratorTable, GradedElement, QSeries, TopDegreeFunctional,
                     trig_series)
from .theta import (DEFAULT_MAX_FACTORS, DEFAULT_POLE_TOLERANCE, DEFAULT_PRODUCT_TOLERANCE,
                    ModularPoint, PointBackend, SeriesBackend, ThetaBackend, ThetaKind, sinc_inverse)
from .witten_bundles import (BundleRootData, CharacterMap, KElement, q_bundle_qexp, root_exponential,
                             theta_bundle_qexp, virtual_ratio)

logger = logging.getLogger(__name__)

Scalar = Union[complex, QSeries]


# ---------------------------------------------------------------------------
# F-function families
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FKind:
    """One F-function family: the theta used on V, the Q_j(E) index and the Witten bundle."""

    name: str
    v_theta: ThetaKind
    j: int
    bundle: str

    @property
    def de_rham(self) -> bool:
        return self.name.startswith("dR")

    @property
    def group(self) -> ModularGroup:
        return {1: ModularGroup.GAMMA0_2, 2: ModularGroup.GAMMA_UPPER_0_2, 3: ModularGroup.GAMMA_THETA}[self.j]


F_KINDS: Dict[str, FKind] = {
    "L": FKind("L", ThetaKind.THETA1, 1, "1"),
    "W": FKind("W", ThetaKind.THETA2, 2, "2"),
    "Wp": FKind("Wp", ThetaKind.THETA3, 3, "3"),
    "dR1": FKind("dR1", ThetaKind.THETA, 1, "flat"),
    "dR2": FKind("dR2", ThetaKind.THETA, 2, "flat"),
    "dR3": FKind("dR3", ThetaKind.THETA, 3, "flat"),
}

_KIND_ALIASES = {"W'": "Wp", "Wprime": "Wp", "fL": "L", "fW": "W", "fWp": "Wp", "fW'": "Wp"}

# τ ↦ −1/τ exchanges these families; τ ↦ τ+1 maps the first onto the second.
S_PARTNERS = {"L": "W", "W": "L", "Wp": "Wp", "dR1": "dR2", "dR2": "dR1", "dR3": "dR3"}
T_PARTNERS = {"L": "L", "W": "Wp", "Wp": "W", "dR1": "dR1", "dR2": "dR3", "dR3": "dR2"}


def parse_kind(kind: Union[str, FKind]) -> FKind:
    if isinstance(kind, FKind):
        return kind
    key = _KIND_ALIASES.get(str(kind), str(kind))
    if key.startswith("fdR"):
        key = key[1:]
    try:
        return F_KINDS[key]
    except KeyError:
        raise DomainError(f"unknown F-function kind '{kind}'; expected one of {', '.join(F_KINDS)}") from None


# ---------------------------------------------------------------------------
# Fixed-point data
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NormalSummand:
    """N_γ: the normal directions on which h acts by h^γ."""

    gamma: int
    roots: Tuple[str, ...]

    def __post_init__(self):
        if self.gamma == 0:
            raise DatasetError("normal summand with γ = 0", invariant="γ ∈ ℤ∖{0}")

    @property
    def rank(self) -> int:
        return len(self.roots)


@dataclass(frozen=True)
class VSummand:
    """V_ν: the part of V on which h acts by h^ν."""

    nu: int
    roots: Tuple[str, ...]

    @property
    def rank(self) -> int:
        return len(self.roots)


@dataclass
class FixedComponent:
    dim: int
    tangent_roots: Tuple[str, ...] = ()
    normal: Tuple[NormalSummand, ...] = ()
    v_summands: Tuple[VSummand, ...] = ()
    v0_roots: Tuple[str, ...] = ()
    v0_zero_roots: int = 0
    odd_classes: Tuple[str, ...] = ()
    integrate: Dict[str, Any] = field(default_factory=dict)
    extra_generators: Tuple[str, ...] = ()
    label: str = ""

    def __post_init__(self):
        if self.dim < 1 or self.dim % 2 == 0:
            raise DatasetError(f"fixed component of dimension {self.dim}", invariant="odd dimension")
        if len(self.tangent_roots) != (self.dim - 1) // 2:
            raise DatasetError(f"{self.dim}-dimensional component with {len(self.tangent_roots)} tangent pairs",
                               invariant="(dim−1)/2 tangent root pairs")

    @property
    def normal_rank(self) -> int:
        return sum(s.rank for s in self.normal)

    @property
    def v_dim(self) -> int:
        return 2 * sum(s.rank for s in self.v_summands) + 2 * len(self.v0_roots) + self.v0_zero_roots

    @functools.cached_property
    def table(self) -> GeneratorTable:
        names: List[str] = []
        expressions = list(self.tangent_roots) + [r for s in self.normal for r in s.roots]
        expressions += [r for s in self.v_summands for r in s.roots] + list(self.v0_roots)
        for expr in expressions + list(self.extra_generators):
            name = root_generator(expr)
            if name and name not in names:
                names.append(name)
        odd = {name: odd_class_degree(name) for name in self.odd_classes}
        return GeneratorTable.build(even=names, odd=odd)

    @functools.cached_property
    def functional(self) -> TopDegreeFunctional:
        return TopDegreeFunctional(self.table, self.dim, self.integrate)

    def root(self, expression: str) -> GradedElement:
        return GradedElement.root(self.table, expression, self.dim)

    def one(self, value: Any = 1) -> GradedElement:
        return GradedElement.scalar(self.table, self.dim, value)

    def odd_generators(self) -> OddClassVector:
        return OddClassVector.generators(self.table, self.dim)


@dataclass
class EquivariantData:
    """Fixed-point data of a circle action on an odd-dimensional manifold M."""

    ambient_dim: int
    components: List[FixedComponent] = field(default_factory=list)
    rank_e: int = 8
    anomaly_n: Optional[int] = None
    flags: Flags = field(default_factory=Flags)
    name: str = ""

    def __post_init__(self):
        if self.rank_e < 2 or self.rank_e % 2:
            raise DomainError(f"rank N of E must be even and at least 2, got {self.rank_e}")
        dims = set()
        for i, comp in enumerate(self.components):
            if comp.dim + 2 * comp.normal_rank != self.ambient_dim:
                raise DatasetError(f"component {i}: dim + 2·Σ rank(N_γ) = {comp.dim + 2 * comp.normal_rank}, "
                                   f"ambient dim is {self.ambient_dim}",
                                   invariant="dim + 2·Σ rank(N_γ) = dim M")
            dims.add(comp.v_dim)
        if len(dims) > 1:
            raise DatasetError(f"components disagree on dim V: {sorted(dims)}", invariant="dim V constant")

    @property
    def v_dim(self) -> int:
        return self.components[0].v_dim if self.components else 0

    @property
    def ranks(self) -> Dict[str, int]:
        return {"T": self.ambient_dim, "V": self.v_dim, "E": self.rank_e}

    @classmethod
    def from_dataset(cls, dataset: DatasetFile) -> "EquivariantData":
        if dataset.kind != "equivariant" or dataset.equivariant is None:
            raise DatasetError(f"dataset '{dataset.name}' is a {dataset.kind} dataset", invariant="kind")
        payload = dataset.equivariant
        components = []
        for i, c in enumerate(payload.components):
            components.append(FixedComponent(
                dim=c.dim,
                tangent_roots=tuple(c.tangent_roots),
                normal=tuple(NormalSummand(s.gamma, tuple(s.roots)) for s in c.normal),
                v_summands=tuple(VSummand(s.nu, tuple(s.roots)) for s in c.v_summands),
                v0_roots=tuple(c.v0_roots),
                v0_zero_roots=c.v0_zero_roots,
                odd_classes=tuple(c.odd_classes),
                integrate={k: parse_number(v) for k, v in c.integrate.items()},
                extra_generators=tuple(c.extra_generators),
                label=c.label or f"F{i}",
            ))
        return cls(payload.ambient_dim, components, payload.rank_e, payload.anomaly_n, dataset.flags,
                   dataset.name)


@dataclass(frozen=True)
class EvaluationPoint:
    t: complex
    tau: ModularPoint

    @classmethod
    def create(cls, t: complex, tau: complex, q_trunc: int = 13) -> "EvaluationPoint":
        return cls(t, ModularPoint(tau, q_trunc))


def check_generator(t: complex, max_denominator: int = 12, margin: float = 1e-9) -> bool:
    """True when t is far enough from low-denominator rationals to stand in for a generator."""
    return is_admissible(t, max_denominator, margin)


def require_generator(t: complex, max_denominator: int = 12, margin: float = 1e-9) -> None:
    """Reject t unless :func:`check_generator` accepts it.

    Raises:
        DomainError: if h = e^{2πit} cannot stand in for a topological generator
    """
    if not check_generator(t, max_denominator, margin):
        raise DomainError(f"t={t} lies within {margin:g} of a rational with denominator ≤ {max_denominator}; "
                          f"h = e^(2πit) is not a topological generator")


def _odd_part(comp: FixedComponent, odd_start: int) -> OddClassVector:
    """The component's odd generators c_{2n+1} with n ≥ odd_start."""
    if odd_start not in (0, 1):
        raise DomainError(f"odd character start index must be 0 or 1, got {odd_start}")
    odd = comp.odd_generators()
    return OddClassVector({d: v for d, v in odd.values.items() if d >= 2 * odd_start + 1})


# ---------------------------------------------------------------------------
# Anomaly relations
# ---------------------------------------------------------------------------

HOLDS = "holds"
HOLDS_MOD_TABLE = "holds-mod-table"
VIOLATED = "violated"


@dataclass
class RelationCheck:
    relation: str
    component: str
    status: str
    detail: str = ""

    def to_dict(self) -> Dict[str, str]:
        return {"relation": self.relation, "component": self.component, "status": self.status,
                "detail": self.detail}


@dataclass
class AnomalyReport:
    n: Optional[int]
    per_component: List[int] = field(default_factory=list)
    relations: List[RelationCheck] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)

    @property
    def consistent(self) -> bool:
        return len(set(self.per_component)) <= 1

    @property
    def violated(self) -> List[RelationCheck]:
        return [r for r in self.relations if r.status == VIOLATED]

    @property
    def ok(self) -> bool:
        return self.consistent and not self.violated

    def require(self) -> Optional[int]:
        """The common n, or InconsistentAnomalyError naming the first problem."""
        if not self.consistent:
            raise InconsistentAnomalyError(f"fixed components give different anomaly integers {self.per_component}")
        if self.violated:
            first = self.violated[0]
            raise InconsistentAnomalyError(f"relation '{first.relation}' fails on component {first.component}")
        return self.n

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n": self.n if self.consistent else "inconsistent",
            "per_component": self.per_component,
            "consistent": self.consistent,
            "relations": [r.to_dict() for r in self.relations],
            "notes": self.notes,
        }


def _classify_relation(comp: FixedComponent, element: GradedElement, degree: int) -> Tuple[str, str]:
    if element.is_zero():
        return HOLDS, ""
    complement = comp.dim - degree
    if complement < 0:
        return HOLDS, "relation lies above the top degree"
    functional = comp.functional
    for mono in comp.table.monomials_of_degree(complement):
        paired = element * GradedElement(comp.table, {mono: 1}, comp.dim)
        if abs(complex(functional(paired))) > 1e-12:
            return VIOLATED, f"pairs nontrivially with {comp.table.format_monomial(mono)}"
    return HOLDS_MOD_TABLE, "not symbolically zero; annihilated by the pairing table"


def anomaly_check(data: EquivariantData) -> AnomalyReport:
    """Check the three anomaly relations per component and return the common n.

    Per component: Σν²·rank V_ν − Σγ²·rank N_γ = n, Σν u_ν − Σγ x_γ = 0 and
    Σu² + Σu₀² − Σx² − Σy² = 0. Root relations that are not symbolic zeros are
    accepted (with a warning) when the pairing table annihilates them.
    """
    report = AnomalyReport(None)
    for i, comp in enumerate(data.components):
        label = comp.label or f"F{i}"
        n = sum(s.nu ** 2 * s.rank for s in comp.v_summands) - sum(s.gamma ** 2 * s.rank for s in comp.normal)
        report.per_component.append(n)

        linear = comp.one(0)
        for s in comp.v_summands:
            for r in s.roots:
                linear = linear + comp.root(r) * s.nu
        for s in comp.normal:
            for r in s.roots:
                linear = linear - comp.root(r) * s.gamma
        quadratic = comp.one(0)
        for r in [r for s in comp.v_summands for r in s.roots] + list(comp.v0_roots):
            quadratic = quadratic + comp.root(r) ** 2
        for r in [r for s in comp.normal for r in s.roots] + list(comp.tangent_roots):
            quadratic = quadratic - comp.root(r) ** 2

        for name, element, degree in (("linear", linear, 2), ("quadratic", quadratic, 4)):
            status, detail = _classify_relation(comp, element, degree)
            if status == HOLDS_MOD_TABLE:
                logger.warning(f"Component {label}: {name} anomaly relation accepted modulo the pairing table")
            report.relations.append(RelationCheck(name, label, status, detail))

    if report.per_component:
        report.n = report.per_component[0] if report.consistent else None
        if not report.consistent:
            report.notes.append(f"components disagree on n: {report.per_component}")
        elif data.anomaly_n is not None and data.anomaly_n != report.n:
            report.relations.append(RelationCheck("declared n", "*", VIOLATED,
                                                  f"declared {data.anomaly_n}, computed {report.n}"))
    else:
        report.n = data.anomaly_n
        report.notes.append("empty fixed set: no relation to check, declared n used")
    logger.debug(f"Anomaly check for '{data.name}': n={report.n}, consistent={report.consistent}")
    return report


# ---------------------------------------------------------------------------
# F-functions
# ---------------------------------------------------------------------------

def f_prefactor(kind: Union[str, FKind], normal_rank: int, v_dim: int) -> complex:
    """−2^{[dim V/2]}(−i/2π)^{dim N} for L, −(−i/2π)^{dim N} for W and W',
    −(−i)^{dim N + dim V/2}/(2π)^{dim N − dim V/2} for dR."""
    fk = parse_kind(kind)
    if fk.de_rham:
        return -((-1j) ** (normal_rank + v_dim // 2)) / (2 * math.pi) ** (normal_rank - v_dim // 2)
    base = (-1j / (2 * math.pi)) ** normal_rank
    if fk.name == "L":
        return -(2 ** (v_dim // 2)) * base
    return -base


def _normal_pole(gamma: int, t: complex) -> PoleError:
    return PoleError(f"normal exponent γ={gamma} hits a theta zero at t={t}", point=t)


def _f_component(fk: FKind, comp: FixedComponent, v_dim: int, t: complex, backend: ThetaBackend,
                 odd: GradedElement) -> Scalar:
    if odd.is_zero():
        return backend.constant(0)
    if fk.de_rham and comp.v0_zero_roots:
        # θ(0) on a trivial pair of V
        return backend.constant(0)
    order = comp.dim // 2 + 1
    form = comp.one(backend.constant(1))
    tangent = backend.quotient(ThetaKind.THETA, 0, order, "normalized")
    for y in comp.tangent_roots:
        form = form * tangent.substitute(comp.root(y))
    for s in comp.normal:
        try:
            inverse = backend.quotient(ThetaKind.THETA, s.gamma * t, order, "inverse")
        except PoleError:
            raise _normal_pole(s.gamma, t) from None
        for r in s.roots:
            form = form * inverse.substitute(comp.root(r))
    for s in comp.v_summands:
        ratio = backend.quotient(fk.v_theta, s.nu * t, order, "ratio")
        for r in s.roots:
            form = form * ratio.substitute(comp.root(r))
    if comp.v0_roots:
        ratio = backend.quotient(fk.v_theta, 0, order, "ratio")
        for r in comp.v0_roots:
            form = form * ratio.substitute(comp.root(r))
    value = comp.functional(form * odd)
    return value * f_prefactor(fk, comp.normal_rank, v_dim)


def _f_terms(fk: FKind, data: EquivariantData, t: complex, backend: ThetaBackend,
             odd_factor: Callable[[FixedComponent], GradedElement]) -> List[Scalar]:
    if fk.de_rham and data.v_dim % 2:
        raise DomainError(f"F_{fk.name} needs an even-dimensional V, dim V = {data.v_dim}")
    return [_f_component(fk, comp, data.v_dim, t, backend, odd_factor(comp)) for comp in data.components]


def _f_sum(fk: FKind, data: EquivariantData, t: complex, backend: ThetaBackend,
           odd_factor: Callable[[FixedComponent], GradedElement]) -> Scalar:
    total = backend.constant(0)
    for term in _f_terms(fk, data, t, backend, odd_factor):
        total = total + term
    return total


def _as_graded(value: Any, comp: FixedComponent) -> GradedElement:
    return value if isinstance(value, GradedElement) else comp.one(0)


def _series_odd_factor(fk: FKind, data: EquivariantData, q_trunc: int,
                       odd_start: int) -> Callable[[FixedComponent], GradedElement]:
    tables: Dict[int, Any] = {}

    def odd_factor(comp: FixedComponent) -> GradedElement:
        table = tables.get(comp.dim)
        if table is None:
            table = tables[comp.dim] = transgression_coeffs(fk.j, comp.dim, q_trunc, data.rank_e)
        applied = _as_graded(table.apply(_odd_part(comp, odd_start)), comp)
        return applied.map_scalars(lambda s: s.to_complex() if isinstance(s, QSeries) else complex(s))

    return odd_factor


def f_components(kind: Union[str, FKind], data: EquivariantData, t: Union[complex, EvaluationPoint],
                 q_trunc: int, pole_tolerance: float = DEFAULT_POLE_TOLERANCE,
                 odd_start: int = 0) -> List[QSeries]:
    """Contribution of each fixed component to F_kind(t, τ), in component order."""
    fk = parse_kind(kind)
    if isinstance(t, EvaluationPoint):
        t = t.t
    backend = SeriesBackend(q_trunc, pole_tolerance)
    terms = _f_terms(fk, data, t, backend, _series_odd_factor(fk, data, q_trunc, odd_start))
    return [term if isinstance(term, QSeries) else QSeries.constant(term, q_trunc, COMPLEX) for term in terms]


def f_function(kind: Union[str, FKind], data: EquivariantData, t: Union[complex, EvaluationPoint],
               q_trunc: int, pole_tolerance: float = DEFAULT_POLE_TOLERANCE, odd_start: int = 0) -> QSeries:
    """q-expansion of F_kind(t, τ) through doubled exponent ``q_trunc``.

    ``odd_start`` is the first n kept in the odd character Σ n!/(2n+1)! c_{2n+1}.

    Raises:
        DomainError: for an unknown kind, a dR kind with odd dim V or a start index other than 0 or 1
        PoleError: if some γt is a lattice point
    """
    total = QSeries.zero(q_trunc, COMPLEX)
    for term in f_components(kind, data, t, q_trunc, pole_tolerance, odd_start):
        total = total + term
    return total


def f_value(kind: Union[str, FKind], data: EquivariantData, t: complex, tau: complex,
            precision: int = 0, tol: float = DEFAULT_PRODUCT_TOLERANCE,
            max_factors: int = DEFAULT_MAX_FACTORS, pole_tolerance: float = DEFAULT_POLE_TOLERANCE,
            odd_start: int = 0) -> complex:
    """F_kind(t, τ) at a point: theta products at τ and transgression coefficients from Lambert sums."""
    fk = parse_kind(kind)
    cache: Dict[int, complex] = {}

    def odd_factor(comp: FixedComponent) -> GradedElement:
        odd = _odd_part(comp, odd_start)
        total = comp.one(0)
        for d in odd.degrees():
            if d not in cache:
                cache[d] = transgression_value(fk.j, d, tau, data.rank_e, precision=precision)
            if cache[d]:
                total = total + odd.values[d] * cache[d]
        return total

    backend = PointBackend(tau, tol, max_factors, pole_tolerance)
    return complex(_f_sum(fk, data, t, backend, odd_factor))


# ---------------------------------------------------------------------------
# Lefschetz index through K-theory twists
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Twist:
    """Twisting data of a Toeplitz operator.

    ``bundle`` is a KElement (or a q-series of them) in the symbols T and V,
    carrying the induced circle action; ``coupling`` is a KElement (or q-series)
    in E paired through its odd Chern character with g. ``None`` means the
    trivial line for the bundle and E itself for the coupling. With
    ``so_only`` only degrees d ≡ 3 (mod 4) of the odd character are kept;
    ``odd_start`` drops the terms c_{2n+1} with n below it.
    """

    bundle: Optional[Union[KElement, QSeries]] = None
    coupling: Optional[Union[KElement, QSeries]] = None
    so_only: bool = False
    odd_start: int = 0


def _tangent_root_data(comp: FixedComponent, t: complex) -> BundleRootData:
    roots = [comp.root(r) + s.gamma * t for s in comp.normal for r in s.roots]
    roots += [comp.root(y) for y in comp.tangent_roots]
    return BundleRootData("T", tuple(roots), paired=True, zero_roots=1)


def _v_root_data(comp: FixedComponent, t: complex) -> BundleRootData:
    roots = [comp.root(r) + s.nu * t for s in comp.v_summands for r in s.roots]
    roots += [comp.root(r) for r in comp.v0_roots]
    return BundleRootData("V", tuple(roots), paired=True, zero_roots=comp.v0_zero_roots)


def _constant_series(element: GradedElement, q_trunc: int) -> GradedElement:
    return element.map_scalars(lambda c: QSeries.constant(c, q_trunc, COMPLEX))


def _coupling_form(twist: Twist, comp: FixedComponent, ranks: Dict[str, int], q_trunc: int) -> GradedElement:
    coupling = twist.coupling if twist.coupling is not None else KElement.symbol("E", ranks)
    odd = _odd_part(comp, twist.odd_start)
    if twist.so_only:
        odd = OddClassVector({d: v for d, v in odd.values.items() if d % 4 == 3})
    if isinstance(coupling, KElement):
        return _constant_series(_as_graded(k_odd_ch(coupling, odd, comp.dim, "E"), comp), q_trunc)
    collected: Dict[Tuple[int, ...], Dict[int, Any]] = {}
    for e, element in coupling.items():
        form = _as_graded(k_odd_ch(element, odd, comp.dim, "E"), comp)
        for mono, value in form.terms.items():
            collected.setdefault(mono, {})[e] = value
    terms = {mono: QSeries(values, q_trunc, COMPLEX) for mono, values in collected.items()}
    return GradedElement(comp.table, terms, comp.dim)


def _index_component(comp: FixedComponent, data: EquivariantData, twist: Twist, t: complex, q_trunc: int,
                     pole_tolerance: float) -> Scalar:
    odd = _coupling_form(twist, comp, data.ranks, q_trunc)
    if odd.is_zero():
        return 0
    order = comp.dim // 2 + 1
    local = comp.one()
    a_hat = sinc_inverse(order)
    for y in comp.tangent_roots:
        local = local * a_hat.substitute(comp.root(y))
    for s in comp.normal:
        sine = trig_series("sin", s.gamma * t, order)
        if abs(sine[0]) < pole_tolerance:
            raise _normal_pole(s.gamma, t)
        factor = sine.inverse() * (1 / 2j)
        for r in s.roots:
            local = local * factor.substitute(comp.root(r))

    chars = CharacterMap({"T": _tangent_root_data(comp, t), "V": _v_root_data(comp, t)}, comp.one())
    if twist.bundle is None:
        even = comp.one(QSeries.one(q_trunc, COMPLEX))
    elif isinstance(twist.bundle, QSeries):
        even = chars.series(twist.bundle, COMPLEX)
        if twist.bundle.trunc != q_trunc:
            even = even.map_scalars(lambda s: QSeries(s.coeffs, q_trunc, COMPLEX))
    else:
        even = _constant_series(chars(twist.bundle), q_trunc)
    return comp.functional(even * local * odd)


def lefschetz_series(data: EquivariantData, twist: Twist, t: complex, q_trunc: int,
                     pole_tolerance: float = DEFAULT_POLE_TOLERANCE, max_denominator: int = 12) -> QSeries:
    """Equivariant index of the twisted Toeplitz operator at h = e^{2πit}, order by order in q.

    −Σ_F ⟨Π πy/sin πy · Π 1/(2i sin π(x+γt)) · ch_h(bundle) · ch(coupling, g), [F]⟩.

    Raises:
        DomainError: if t is within 1e-9 of a rational with denominator ≤ ``max_denominator``
        PoleError: if γt is (within ``pole_tolerance`` of) an integer for some γ
    """
    require_generator(t, max_denominator)
    total = QSeries.zero(q_trunc, COMPLEX)
    for comp in data.components:
        total = total + _index_component(comp, data, twist, t, q_trunc, pole_tolerance)
    return -total


def lefschetz_index(data: EquivariantData, twist: Twist, pt: EvaluationPoint,
                    pole_tolerance: float = DEFAULT_POLE_TOLERANCE) -> complex:
    """The index as a number: the q-series of :func:`lefschetz_series` summed at τ."""
    series = lefschetz_series(data, twist, pt.t, pt.tau.q_trunc, pole_tolerance)
    return series.evaluate(pt.tau.tau)


def witten_twist(kind: Union[str, FKind], data: EquivariantData, q_trunc: int, virtual: bool = True,
                 coupling: str = "Q", odd_start: int = 0) -> Twist:
    """The twist whose index is F_kind: Θ_j(TM|V) (Δ(V) for L, Δ₊(V)−Δ₋(V) for dR).

    ``coupling="Q"`` pairs with Q_j(E) restricted to d ≡ 3 (mod 4); ``"E"``
    pairs with (E_ℂ, g) itself and keeps every odd degree.
    """
    fk = parse_kind(kind)
    ranks = data.ranks
    tm = KElement.symbol("T", ranks)
    v = KElement.symbol("V", ranks) if data.v_dim else KElement.trivial(0, ranks)
    bundle = theta_bundle_qexp(fk.bundle, tm, v, q_trunc, virtual)
    if data.v_dim and fk.name == "L":
        bundle = bundle * KElement.spinor("V", ranks)
    elif data.v_dim and fk.de_rham:
        bundle = bundle * KElement.spinor("V", ranks, difference=True)
    if coupling == "E":
        return Twist(bundle, KElement.symbol("E", ranks), so_only=False, odd_start=odd_start)
    if coupling != "Q":
        raise DomainError(f"coupling must be 'Q' or 'E', got '{coupling}'")
    return Twist(bundle, q_bundle_qexp(fk.j, data.rank_e, q_trunc, virtual), so_only=True, odd_start=odd_start)


def index_series(kind: Union[str, FKind], data: EquivariantData, t: complex, q_trunc: int,
                 virtual: bool = True, coupling: str = "Q", odd_start: int = 0) -> QSeries:
    """Index of 𝒯⊗Θ_j(TM|V)⊗(Q_j(E), g) as a q-series; equals F_kind in the virtual convention."""
    if parse_kind(kind).de_rham and data.v_dim % 2:
        raise DomainError(f"dR twists need an even-dimensional V, dim V = {data.v_dim}")
    twist = witten_twist(kind, data, q_trunc, virtual, coupling, odd_start)
    return lefschetz_series(data, twist, t, q_trunc)


def convention_ratio(kind: Union[str, FKind], data: EquivariantData, q_trunc: int) -> QSeries:
    """Non-virtual index series = virtual index series × this rational q-series."""
    fk = parse_kind(kind)
    ratio = virtual_ratio(fk.bundle, data.ambient_dim, data.v_dim, q_trunc)
    return ratio * virtual_ratio(f"Q{fk.j}", 0, data.rank_e, q_trunc)


# ---------------------------------------------------------------------------
# Signature operator
# ---------------------------------------------------------------------------

def signature_rational(data: EquivariantData, z: complex, pole_tolerance: float = 1e-12,
                       odd_start: int = 0) -> complex:
    """f(z) = Σ_F ⟨Π πy/tan πy · Π (z^γ e^{πix} + e^{−πix})/(z^γ e^{πix} − e^{−πix}) · ch(E, g), [F]⟩.

    ch(E, g) = Σ_{n ≥ odd_start} n!/(2n+1)! c_{2n+1}.

    Raises:
        PoleError: if z^γ = 1 for some normal exponent γ
    """
    return sum(signature_components(data, z, pole_tolerance, odd_start), 0j)


def signature_components(data: EquivariantData, z: complex, pole_tolerance: float = 1e-12,
                         odd_start: int = 0) -> List[complex]:
    """Contribution of each fixed component to f(z), in component order."""
    z = complex(z)
    if z == 0:
        raise PoleError("f(z) is not evaluated at z = 0", point=z)
    values = []
    for comp in data.components:
        odd = odd_ch_form(_odd_part(comp, odd_start))
        if not isinstance(odd, GradedElement) or odd.is_zero():
            values.append(0j)
            continue
        order = comp.dim // 2 + 1
        form = comp.one()
        cotangent = sinc_inverse(order) * trig_series("cos", 0, order)
        for y in comp.tangent_roots:
            form = form * cotangent.substitute(comp.root(y))
        for s in comp.normal:
            zg = z ** s.gamma
            if abs(zg - 1) < pole_tolerance:
                raise PoleError(f"z^{s.gamma} = 1 at z={z}", point=z)
            for r in s.roots:
                root = comp.root(r)
                up = root_exponential(root, 1j * math.pi)
                down = root_exponential(-root, 1j * math.pi)
                form = form * ((up * zg + down) * (up * zg - down).inverse())
        values.append(complex(comp.functional(form * odd)))
    return values


@dataclass
class SignatureReport:
    samples: List[complex]
    values: List[complex]
    reference: complex
    max_deviation: float
    limit_difference: float
    reflection_residual: Optional[float]
    tolerance: float
    skipped: List[str] = field(default_factory=list)
    component_scale: float = 0.0
    odd_start: int = 0

    @property
    def verdict(self) -> str:
        return "PASS" if self.max_deviation < self.tolerance else "FAIL"

    @property
    def vacuous(self) -> bool:
        """Every fixed component contributes zero, so constancy says nothing."""
        return self.component_scale == 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "verdict": self.verdict,
            "reference": self.reference,
            "max_deviation": self.max_deviation,
            "limit_difference": self.limit_difference,
            "reflection_residual": self.reflection_residual,
            "tolerance": self.tolerance,
            "component_scale": self.component_scale,
            "vacuous": self.vacuous,
            "odd_start": self.odd_start,
            "skipped": self.skipped,
        }

    def to_rows(self) -> List[Dict[str, Any]]:
        return [{"z_re": z.real, "z_im": z.imag, "f_re": v.real, "f_im": v.imag}
                for z, v in zip(self.samples, self.values)]


def signature_scan(data: EquivariantData, samples: Sequence[complex], tolerance: float = 1e-7,
                   threads: int = 1, odd_start: int = 0) -> SignatureReport:
    """Constancy of f(z) over samples against f(2), plus the z → ∞ limit and the 1/z̄ reflection.

    ``component_scale`` is the largest single-component contribution seen, so a
    constant total that comes from cancelling components is told apart from
    one where every component vanishes.
    """
    def evaluate(z):
        try:
            return signature_components(data, z, odd_start=odd_start)
        except PoleError as e:
            logger.warning(f"Skipping z={z}: {e}")
            return None

    def f(z):
        return signature_rational(data, z, odd_start=odd_start)

    parts = parallel_map(evaluate, list(samples), threads)
    reference = f(2.0)
    kept = [(z, sum(p, 0j)) for z, p in zip(samples, parts) if p is not None]
    skipped = [f"z={z}" for z, p in zip(samples, parts) if p is None]
    scale = max((abs(c) for p in parts if p is not None for c in p), default=0.0)
    deviation = max((abs(v - reference) for _, v in kept), default=0.0)
    limit = abs(f(1e6) - f(1e7))
    parities = {c.normal_rank % 2 for c in data.components}
    reflection = None
    if len(parities) <= 1:
        sign = -1 if parities == {1} else 1
        reflection = max((abs(f(1 / z.conjugate()) - sign * v.conjugate()) for z, v in kept[:10]), default=0.0)
    report = SignatureReport([z for z, _ in kept], [v for _, v in kept], reference, deviation, limit,
                             reflection, tolerance, skipped, scale, odd_start)
    if report.vacuous:
        logger.warning(f"Signature scan on '{data.name}': every fixed component contributes zero")
    logger.info(f"Signature scan: max deviation {deviation:.3g} over {len(kept)} samples")
    return report


# ---------------------------------------------------------------------------
# Rigidity scans and transformation laws
# ---------------------------------------------------------------------------

def expectation_tag(data: EquivariantData, anomaly: AnomalyReport) -> str:
    if not data.components:
        return "identically-zero"
    if not anomaly.ok or anomaly.n is None:
        return "no-claim"
    if anomaly.n == 0:
        return "rigidity-expected"
    if anomaly.n < 0:
        return "vanishing-expected"
    return "no-claim"


@dataclass
class ScanReport:
    kind: str
    dataset: str
    t_samples: List[float]
    coefficients: List[Dict[int, complex]]
    variation: Dict[int, float]
    tolerance: float
    anomaly: AnomalyReport
    tag: str
    skipped: List[str] = field(default_factory=list)
    value_variation: Optional[float] = None
    component_scale: float = 0.0
    odd_start: int = 0

    @property
    def vacuous(self) -> bool:
        """F vanishes on every fixed component at every sample."""
        return self.component_scale == 0

    @property
    def max_variation(self) -> float:
        return max(self.variation.values(), default=0.0)

    @property
    def verdict(self) -> str:
        if not self.t_samples:
            return "FAIL"
        return "PASS" if self.max_variation < self.tolerance else "FAIL"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "dataset": self.dataset,
            "verdict": self.verdict,
            "tag": self.tag,
            "anomaly": self.anomaly.to_dict(),
            "tolerance": self.tolerance,
            "max_variation": self.max_variation,
            "value_variation": self.value_variation,
            "component_scale": self.component_scale,
            "vacuous": self.vacuous,
            "odd_start": self.odd_start,
            "variation": {str(Fraction(e, 2)): v for e, v in sorted(self.variation.items())},
            "t_samples": self.t_samples,
            "skipped": self.skipped,
        }

    def to_rows(self) -> List[Dict[str, Any]]:
        """One row per q-order, one re/im column pair per t sample."""
        rows = []
        for e in sorted(self.variation):
            row: Dict[str, Any] = {"q_order": str(Fraction(e, 2)), "variation": self.variation[e]}
            for i, coeffs in enumerate(self.coefficients):
                value = complex(coeffs.get(e, 0))
                row[f"t{i}_re"] = value.real
                row[f"t{i}_im"] = value.imag
            rows.append(row)
        return rows


def rigidity_scan(kind: Union[str, FKind], data: EquivariantData, t_samples: Sequence[float], q_trunc: int,
                  tolerance: float = 1e-8, tau: Optional[complex] = None, threads: int = 1,
                  odd_start: int = 0) -> ScanReport:
    """Per q-order variation of F_kind across t samples.

    Pole-adjacent samples are skipped and listed. The verdict only states
    whether the coefficients are constant in t; the anomaly tag records what
    the hypotheses predict. ``component_scale`` is the largest coefficient of a
    single component's contribution, zero when the scan is vacuous.
    """
    fk = parse_kind(kind)
    anomaly = anomaly_check(data)

    def evaluate(t):
        try:
            return f_components(fk, data, t, q_trunc, odd_start=odd_start)
        except PoleError as e:
            logger.warning(f"Skipping t={t}: {e}")
            return None

    parts = parallel_map(evaluate, list(t_samples), threads)
    scale = max((abs(complex(c)) for p in parts if p is not None for term in p for _, c in term.items()),
                default=0.0)
    series = [None if p is None else sum(p, QSeries.zero(q_trunc, COMPLEX)) for p in parts]
    kept = [(t, s) for t, s in zip(t_samples, series) if s is not None]
    skipped = [f"t={t}" for t, s in zip(t_samples, series) if s is None]
    coefficients = [{e: s[e] for e in range(q_trunc)} for _, s in kept]
    variation: Dict[int, float] = {}
    for e in range(q_trunc):
        if coefficients:
            base = coefficients[0][e]
            variation[e] = max(abs(c[e] - base) for c in coefficients)
    value_variation = None
    if tau is not None and kept:
        values = [s.evaluate(tau) for _, s in kept]
        value_variation = max(abs(v - values[0]) for v in values)
    report = ScanReport(fk.name, data.name, [t for t, _ in kept], coefficients, variation, tolerance,
                        anomaly, expectation_tag(data, anomaly), skipped, value_variation, scale, odd_start)
    if report.vacuous:
        logger.warning(f"Rigidity scan F_{fk.name} on '{data.name}': every fixed component contributes zero")
    logger.info(f"Rigidity scan F_{fk.name} on '{data.name}': max variation {report.max_variation:.3g} "
                f"({report.verdict}, {report.tag})")
    return report


def _resolved_n(data: EquivariantData) -> int:
    n = anomaly_check(data).n
    if n is None:
        n = data.anomaly_n if data.anomaly_n is not None else 0
    return n


def f_weight(kind: Union[str, FKind], data: EquivariantData) -> int:
    fk = parse_kind(kind)
    if fk.de_rham:
        return (data.ambient_dim - data.v_dim + 1) // 2
    return (data.ambient_dim + 1) // 2


def jacobi_spec(kind: Union[str, FKind], data: EquivariantData) -> JacobiFormSpec:
    """Index n/2, weight (dim M+1)/2 (dR: (dim M − dim V + 1)/2) over the family's group."""
    fk = parse_kind(kind)
    return JacobiFormSpec.create(Fraction(_resolved_n(data), 2), f_weight(fk, data), fk.group)


def expected_s_modulus(kind: Union[str, FKind], data: EquivariantData) -> Optional[int]:
    """|χ| in the S-law of F_L: 2^{[(N + dim V)/2]}; None where no value is asserted."""
    if parse_kind(kind).name != "L":
        return None
    return 2 ** ((data.rank_e + data.v_dim) // 2)


def s_law_check(kind: Union[str, FKind], data: EquivariantData, samples: Sequence[Tuple[complex, complex]],
                precision: int = 0, odd_start: int = 0) -> LawReport:
    """F_kind(t/τ, −1/τ) = χ·τ^k·e^{πint²/τ}·F_partner(t, τ) with χ estimated.

    For L ↔ W the estimate must also have modulus 2^{[(N + dim V)/2]}; the
    relative miss is the result's ``modulus_residual`` and counts in the verdict.
    """
    fk = parse_kind(kind)
    partner = parse_kind(S_PARTNERS[fk.name])
    k = f_weight(fk, data)
    n = _resolved_n(data)
    pairs = []
    for t, tau in samples:
        lhs = safe_call(lambda a, b: f_value(fk, data, a, b, precision, odd_start=odd_start), t / tau, -1 / tau)
        base = safe_call(lambda a, b: f_value(partner, data, a, b, precision, odd_start=odd_start), t, tau)
        rhs = None if base is None else tau ** k * cmath.exp(1j * math.pi * n * t * t / tau) * base
        pairs.append((lhs, rhs, f"t={t}, tau={tau}"))
    result = fold_law(f"S: {fk.name} <- {partner.name}", pairs)
    expected = expected_s_modulus(fk, data)
    if expected is not None:
        result.expect_modulus(expected)
    details = {"weight": k, "n": n, "partner": partner.name, "expected_character_modulus": expected}
    return LawReport("s-law", [result], details)


def t_law_check(kind: Union[str, FKind], data: EquivariantData, samples: Sequence[Tuple[complex, complex]],
                precision: int = 0, odd_start: int = 0) -> LawReport:
    """F_kind(t, τ+1) = F_partner(t, τ) exactly (no character)."""
    fk = parse_kind(kind)
    partner = parse_kind(T_PARTNERS[fk.name])
    pairs = []
    for t, tau in samples:
        lhs = safe_call(lambda a, b: f_value(fk, data, a, b, precision, odd_start=odd_start), t, tau + 1)
        rhs = safe_call(lambda a, b: f_value(partner, data, a, b, precision, odd_start=odd_start), t, tau)
        pairs.append((lhs, rhs, f"t={t}, tau={tau}"))
    result = fold_law(f"T: {fk.name} -> {partner.name}", pairs, estimate=False)
    return LawReport("t-law", [result], {"partner": partner.name})


# ---------------------------------------------------------------------------
# Trivial actions
# ---------------------------------------------------------------------------

def trivial_action_data(dim: int, tangent_roots: Sequence[str], odd_classes: Sequence[str],
                        integrate: Dict[str, Any], rank_e: int = 8, v: str = "tangent",
                        extra_generators: Sequence[str] = (), name: str = "") -> EquivariantData:
    """M with the trivial circle action: one fixed component, no normal directions.

    ``v="tangent"`` takes V = TM (genera φ_L, φ_W, φ'_W), ``v="zero"`` takes V = 0 (ψ_j).
    """
    if v not in ("tangent", "zero"):
        raise DomainError(f"v must be 'tangent' or 'zero', got '{v}'")
    comp = FixedComponent(
        dim=dim,
        tangent_roots=tuple(tangent_roots),
        v0_roots=tuple(tangent_roots) if v == "tangent" else (),
        v0_zero_roots=1 if v == "tangent" else 0,
        odd_classes=tuple(odd_classes),
        integrate=dict(integrate),
        extra_generators=tuple(extra_generators),
        label="M",
    )
    return EquivariantData(dim, [comp], rank_e, 0, name=name or "trivial-action")
