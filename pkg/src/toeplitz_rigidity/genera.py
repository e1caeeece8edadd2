"""
Landweber–Stong and Witten type genera of a pair (M, [g]).

A model manifold is data: tangent Chern roots, formal odd classes c_d and a
table of characteristic numbers standing in for the fundamental class. The
genus forms are products of theta quotients in the roots and the
transgression series applied to the odd classes; the genus is the pairing of
the top-degree part with the table.

Families:
    L, W, Wp      Â·ch(Θ_j(TM))·ch(Q_j(E), g) with j = 1, 2, 3 (L carries 2^{(dim−1)/2})
    psi1..psi3    Â·ch(Q_j(E), g)
"""

import logging
import functools
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

from .datasets import DatasetFile, Flags, odd_class_degree, parse_number, root_generator
from .equivariant import index_series, trivial_action_data
from .exceptions import DatasetError, DomainError
from .modularity import LawReport, LawResult, ModularGroup, modular_form_check
from .odd_chern import OddClassVector, transgression_coeffs, transgression_value
from .sampling import t_samples
from .series import COMPLEX, GeneratorTable, GradedElement, QSeries, TopDegreeFunctional
from .theta import (DEFAULT_MAX_FACTORS, DEFAULT_PRODUCT_TOLERANCE, ModularPoint, PointBackend,
                    SeriesBackend, ThetaBackend, ThetaKind, family_kind)
from .witten_bundles import BundleRootData, q_char_form

logger = logging.getLogger(__name__)

UNASSERTED = "UNASSERTED"


@dataclass(frozen=True)
class GenusKind:
    name: str
    j: int
    witten: bool

    @property
    def f_kind(self) -> str:
        """The F-function family whose negative this genus is on a trivial action."""
        if self.witten:
            return {1: "L", 2: "W", 3: "Wp"}[self.j]
        return f"dR{self.j}"

    @property
    def group(self) -> ModularGroup:
        return {1: ModularGroup.GAMMA0_2, 2: ModularGroup.GAMMA_UPPER_0_2, 3: ModularGroup.GAMMA_THETA}[self.j]

    @property
    def hypotheses(self) -> Tuple[str, ...]:
        return ("c3_zero",) if self.witten else ("c3_zero", "p1_condition")


GENUS_KINDS: Dict[str, GenusKind] = {
    "L": GenusKind("L", 1, True),
    "W": GenusKind("W", 2, True),
    "Wp": GenusKind("Wp", 3, True),
    "psi1": GenusKind("psi1", 1, False),
    "psi2": GenusKind("psi2", 2, False),
    "psi3": GenusKind("psi3", 3, False),
}

_GENUS_ALIASES = {
    "W'": "Wp", "Wprime": "Wp", "phiL": "L", "phi_L": "L", "phiW": "W", "phi_W": "W",
    "phiWp": "Wp", "phi_Wp": "Wp", "psi_1": "psi1", "psi_2": "psi2", "psi_3": "psi3",
    "(W,1)": "psi1", "(W,2)": "psi2", "(W,3)": "psi3",
}


def parse_genus(which: Union[str, GenusKind]) -> GenusKind:
    if isinstance(which, GenusKind):
        return which
    key = _GENUS_ALIASES.get(str(which), str(which))
    try:
        return GENUS_KINDS[key]
    except KeyError:
        raise DomainError(f"unknown genus '{which}'; expected one of {', '.join(GENUS_KINDS)}") from None


@dataclass
class ModelManifold:
    """Characteristic data of an odd-dimensional closed manifold M with a map g."""

    dim: int
    tangent_roots: Tuple[str, ...]
    odd_classes: Tuple[str, ...] = ()
    integrate: Dict[str, Any] = field(default_factory=dict)
    extra_generators: Tuple[str, ...] = ()
    rank_e: int = 8
    flags: Flags = field(default_factory=Flags)
    name: str = ""

    def __post_init__(self):
        if self.dim < 1 or self.dim % 2 == 0:
            raise DatasetError(f"model manifold of dimension {self.dim}", invariant="odd dimension")
        if len(self.tangent_roots) != (self.dim - 1) // 2:
            raise DatasetError(f"{self.dim}-dimensional model with {len(self.tangent_roots)} tangent pairs",
                               invariant="(dim−1)/2 tangent root pairs")
        if self.rank_e < 2 or self.rank_e % 2:
            raise DomainError(f"rank N of E must be even and at least 2, got {self.rank_e}")
        # validates the table eagerly
        self.functional

    @functools.cached_property
    def table(self) -> GeneratorTable:
        names: List[str] = []
        for expr in list(self.tangent_roots) + list(self.extra_generators):
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

    def tangent_bundle(self) -> BundleRootData:
        """TM ⊗ ℂ: one pair ±y per tangent root plus the trivial line of odd dimension."""
        return BundleRootData("TM", tuple(self.root(y) for y in self.tangent_roots), paired=True, zero_roots=1)

    def hypothesis(self, name: str) -> bool:
        return bool(getattr(self.flags, name))

    @classmethod
    def from_dataset(cls, dataset: DatasetFile) -> "ModelManifold":
        if dataset.kind != "model" or dataset.model is None:
            raise DatasetError(f"dataset '{dataset.name}' is a {dataset.kind} dataset", invariant="kind")
        payload = dataset.model
        return cls(
            dim=payload.dim,
            tangent_roots=tuple(payload.tangent_roots),
            odd_classes=tuple(payload.odd_classes),
            integrate={k: parse_number(v) for k, v in payload.integrate.items()},
            extra_generators=tuple(payload.extra_generators),
            rank_e=payload.rank_e,
            flags=dataset.flags,
            name=dataset.name,
        )


@dataclass
class GenusValue:
    which: str
    series: QSeries
    model: str = ""
    dim: int = 0
    rank_e: int = 8

    @property
    def q_trunc(self) -> int:
        return self.series.trunc

    def to_dict(self) -> Dict[str, Any]:
        return {"which": self.which, "model": self.model, "dim": self.dim, "rank_e": self.rank_e,
                "series": self.series.to_dict()}


# ---------------------------------------------------------------------------
# Forms
# ---------------------------------------------------------------------------

def _build_form(gk: GenusKind, m: ModelManifold, backend: ThetaBackend,
                character: Callable[[], Any], odd: GradedElement) -> GradedElement:
    form = m.one(backend.constant(1))
    if odd.is_zero():
        return form * 0
    order = m.dim // 2 + 1
    a_hat = backend.quotient(ThetaKind.THETA, 0, order, "normalized")
    for y in m.tangent_roots:
        form = form * a_hat.substitute(m.root(y))
    if gk.witten:
        form = form * character()
    return form * odd


def _graded(value: Any, m: ModelManifold) -> GradedElement:
    return value if isinstance(value, GradedElement) else m.one(0)


def ls_witten_form(which: Union[str, GenusKind], m: ModelManifold, n_rank: Optional[int] = None,
                   q_trunc: int = 13) -> GradedElement:
    """The genus form with q-series coefficients, through degree dim M.

    Args:
        which: Genus family (L, W, Wp, psi1, psi2, psi3)
        m: Model manifold
        n_rank: Rank N of E; the model's value when omitted
        q_trunc: Doubled q-exponent cutoff

    Returns:
        GradedElement in the model's generators with complex QSeries scalars
    """
    gk = parse_genus(which)
    n_rank = n_rank or m.rank_e
    table = transgression_coeffs(gk.j, m.dim, q_trunc, n_rank)
    odd = _graded(table.apply(m.odd_generators()), m)
    odd = odd.map_scalars(lambda s: s.to_complex() if isinstance(s, QSeries) else complex(s))
    backend = SeriesBackend(q_trunc)

    def character():
        return q_char_form(gk.j, m.tangent_bundle(), ModularPoint(1j, q_trunc), m.dim)

    return _build_form(gk, m, backend, character, odd)


def genus_pair(which: Union[str, GenusKind], m: ModelManifold, n_rank: Optional[int] = None,
               q_trunc: int = 13) -> GenusValue:
    """⟨form, [M]⟩ as a q-series.

    Raises:
        DomainError: if dim M ≢ 3 (mod 4)
    """
    gk = parse_genus(which)
    if m.dim % 4 != 3:
        raise DomainError(f"genera are defined on (4k−1)-dimensional manifolds, got dim {m.dim}")
    value = m.functional(ls_witten_form(gk, m, n_rank, q_trunc))
    if not isinstance(value, QSeries):
        value = QSeries.constant(value, q_trunc, COMPLEX)
    logger.debug(f"Genus {gk.name} of '{m.name}' through doubled order {q_trunc}")
    return GenusValue(gk.name, value, m.name, m.dim, n_rank or m.rank_e)


def genus_value(which: Union[str, GenusKind], m: ModelManifold, tau: complex, n_rank: Optional[int] = None,
                precision: int = 0, tol: float = DEFAULT_PRODUCT_TOLERANCE,
                max_factors: int = DEFAULT_MAX_FACTORS) -> complex:
    """The genus at a point τ from theta products and Lambert sums, no q-truncation."""
    gk = parse_genus(which)
    if m.dim % 4 != 3:
        raise DomainError(f"genera are defined on (4k−1)-dimensional manifolds, got dim {m.dim}")
    n_rank = n_rank or m.rank_e
    odd_vector = m.odd_generators()
    odd = m.one(0)
    for d in odd_vector.degrees():
        lam = transgression_value(gk.j, d, tau, n_rank, precision=precision)
        if lam:
            odd = odd + odd_vector.values[d] * lam
    backend = PointBackend(tau, tol, max_factors)

    def character():
        order = m.dim // 2 + 1
        ratio = backend.quotient(family_kind(gk.j), 0, order, "ratio")
        result = m.one()
        for y in m.tangent_roots:
            result = result * ratio.substitute(m.root(y))
        return result * (2 ** ((m.dim - 1) // 2) if gk.j == 1 else 1)

    return complex(m.functional(_build_form(gk, m, backend, character, odd)))


# ---------------------------------------------------------------------------
# Modularity
# ---------------------------------------------------------------------------

@dataclass
class GenusModularityReport:
    which: str
    model: str
    weight: int
    group: ModularGroup
    hypotheses: Dict[str, bool]
    law: LawReport
    tolerance: float

    @property
    def violated(self) -> List[str]:
        return [name for name, held in self.hypotheses.items() if not held]

    @property
    def verdict(self) -> str:
        if self.violated:
            return UNASSERTED
        return "PASS" if self.law.passed(self.tolerance) else "FAIL"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "which": self.which,
            "model": self.model,
            "weight": self.weight,
            "group": self.group.value,
            "hypotheses": self.hypotheses,
            "violated_hypotheses": self.violated,
            "verdict": self.verdict,
            "tolerance": self.tolerance,
            "law": self.law.to_dict(),
        }


def genus_modularity_report(value: GenusValue, m: ModelManifold, samples: Sequence[complex],
                            tolerance: float = 1e-8, precision: int = 0) -> GenusModularityReport:
    """Weight-(dim+1)/2 residuals of the genus under its group's generators.

    The residuals are always computed; when a hypothesis recorded on the model
    fails the verdict is UNASSERTED instead of PASS/FAIL.
    """
    gk = parse_genus(value.which)
    weight = (m.dim + 1) // 2
    hypotheses = {name: m.hypothesis(name) for name in gk.hypotheses}
    if value.series.is_zero():
        law = LawReport("modular", [LawResult("identically-zero")], {"weight": weight, "group": gk.group.value})
    else:
        law = modular_form_check(lambda tau: genus_value(gk, m, tau, value.rank_e, precision),
                                 weight, gk.group, samples)
    report = GenusModularityReport(gk.name, m.name, weight, gk.group, hypotheses, law, tolerance)
    if report.violated:
        logger.warning(f"Genus {gk.name} of '{m.name}': hypotheses {', '.join(report.violated)} fail, "
                       f"residual {law.max_residual:.3g} reported without assertion")
    return report


# ---------------------------------------------------------------------------
# Index identity
# ---------------------------------------------------------------------------

def model_trivial_action(which: Union[str, GenusKind], m: ModelManifold):
    """The trivial circle action on M with V = TM (L, W, Wp) or V = 0 (psi)."""
    gk = parse_genus(which)
    return trivial_action_data(m.dim, m.tangent_roots, m.odd_classes, m.integrate, m.rank_e,
                               v="tangent" if gk.witten else "zero",
                               extra_generators=m.extra_generators, name=m.name)


def index_identity_residual(which: Union[str, GenusKind], m: ModelManifold, q_trunc: int = 13) -> float:
    """max |genus + index| coefficientwise, the index taken on the trivial action."""
    gk = parse_genus(which)
    genus = genus_pair(gk, m, q_trunc=q_trunc).series
    # the action is trivial, any generator works
    index = index_series(gk.f_kind, model_trivial_action(gk, m), t_samples(1)[0], q_trunc)
    return genus.max_abs_difference(-index)
