"""
Modular group machinery and numerical transformation-law checks.

Characters are never assumed: every check estimates χ(𝒢) per generator from
the samples and reports the residual of the law with that estimate together
with the spread of the estimate across samples.
"""

import cmath
import logging
import math
import random
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

from .exceptions import DomainError, PrecisionError, SingularityError
from .series import QSeries

logger = logging.getLogger(__name__)

ABSOLUTE_FLOOR = 1e-280


class ModularGroup(str, Enum):
    GAMMA0_2 = "gamma-0-2"
    GAMMA_UPPER_0_2 = "gamma-upper-0-2"
    GAMMA_THETA = "gamma-theta"
    SL2Z = "sl2z"

    @classmethod
    def parse(cls, value: Union[str, "ModularGroup"]) -> "ModularGroup":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("_", "-")
        aliases = {
            "gamma0(2)": cls.GAMMA0_2, "gamma-lower-0-2": cls.GAMMA0_2, "g0": cls.GAMMA0_2,
            "gamma^0(2)": cls.GAMMA_UPPER_0_2, "g0-upper": cls.GAMMA_UPPER_0_2,
            "theta": cls.GAMMA_THETA, "gamma-theta": cls.GAMMA_THETA,
            "sl2": cls.SL2Z, "sl2(z)": cls.SL2Z,
        }
        if key in aliases:
            return aliases[key]
        try:
            return cls(key)
        except ValueError:
            raise DomainError(f"unknown modular group '{value}'") from None


@dataclass(frozen=True)
class ModularMatrix:
    """Integer matrix [[a, b], [c, d]] of determinant 1."""

    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        if self.a * self.d - self.b * self.c != 1:
            raise DomainError(f"determinant of {self.as_rows()} is not 1")

    def __matmul__(self, other: "ModularMatrix") -> "ModularMatrix":
        return ModularMatrix(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def inverse(self) -> "ModularMatrix":
        return ModularMatrix(self.d, -self.b, -self.c, self.a)

    def automorphy(self, tau: complex) -> complex:
        return self.c * tau + self.d

    def act(self, tau: complex) -> complex:
        return (self.a * tau + self.b) / (self.c * tau + self.d)

    def act_jacobi(self, t: complex, tau: complex) -> Tuple[complex, complex]:
        """(t, τ) ↦ (t/(cτ+d), (aτ+b)/(cτ+d))."""
        j = self.automorphy(tau)
        return t / j, self.act(tau)

    def as_rows(self) -> List[List[int]]:
        return [[self.a, self.b], [self.c, self.d]]

    def to_dict(self) -> Dict[str, Any]:
        return {"matrix": self.as_rows()}


S = ModularMatrix(0, -1, 1, 0)
T = ModularMatrix(1, 1, 0, 1)
IDENTITY = ModularMatrix(1, 0, 0, 1)


def word(text: str) -> ModularMatrix:
    """Multiply out a word such as ``"ST^2ST"`` or ``"T^-1S"``."""
    result = IDENTITY
    i = 0
    text = text.replace(" ", "")
    while i < len(text):
        letter = text[i]
        if letter not in "ST":
            raise DomainError(f"unknown letter '{letter}' in word '{text}'")
        i += 1
        power = 1
        if i < len(text) and text[i] == "^":
            j = i + 1
            if j < len(text) and text[j] == "-":
                j += 1
            while j < len(text) and text[j].isdigit():
                j += 1
            power = int(text[i + 1:j])
            i = j
        base = S if letter == "S" else T
        if power < 0:
            base, power = base.inverse(), -power
        for _ in range(power):
            result = result @ base
    return result


GENERATOR_WORDS = {
    ModularGroup.GAMMA0_2: ("T", "ST^2ST"),
    ModularGroup.GAMMA_UPPER_0_2: ("STS", "T^2STS"),
    ModularGroup.GAMMA_THETA: ("S", "T^2"),
    ModularGroup.SL2Z: ("S", "T"),
}


def group_generators(group: Union[str, ModularGroup]) -> List[Tuple[str, ModularMatrix]]:
    """The generator words of a group multiplied out as integer matrices."""
    group = ModularGroup.parse(group)
    return [(w, word(w)) for w in GENERATOR_WORDS[group]]


def membership(m: ModularMatrix, group: Union[str, ModularGroup]) -> bool:
    group = ModularGroup.parse(group)
    if group is ModularGroup.GAMMA0_2:
        return m.c % 2 == 0
    if group is ModularGroup.GAMMA_UPPER_0_2:
        return m.b % 2 == 0
    if group is ModularGroup.GAMMA_THETA:
        residues = (m.a % 2, m.b % 2, m.c % 2, m.d % 2)
        return residues in ((1, 0, 0, 1), (0, 1, 1, 0))
    return True


def random_word(group: Union[str, ModularGroup], length: int, rng: random.Random) -> ModularMatrix:
    """Random product of generators and their inverses."""
    gens = [m for _, m in group_generators(group)]
    result = IDENTITY
    for _ in range(length):
        g = rng.choice(gens)
        result = result @ (g if rng.random() < 0.5 else g.inverse())
    return result


@dataclass(frozen=True)
class JacobiFormSpec:
    """Index m (half-integers allowed), weight l, group and the (2ℤ)² lattice step."""

    index: Fraction
    weight: int
    group: ModularGroup
    lattice_step: int = 2

    @classmethod
    def create(cls, index: Union[int, float, str, Fraction], weight: int,
               group: Union[str, ModularGroup], lattice_step: int = 2) -> "JacobiFormSpec":
        m = Fraction(index).limit_denominator(2)
        if m * 2 != Fraction(index) * 2:
            raise DomainError(f"index must be a half-integer, got {index}")
        return cls(m, int(weight), ModularGroup.parse(group), lattice_step)

    def lattice_shifts(self) -> List[Tuple[int, int]]:
        s = self.lattice_step
        return [(s, 0), (0, s), (s, s), (-s, 2 * s)]

    def to_dict(self) -> Dict[str, Any]:
        return {"index": str(self.index), "weight": self.weight, "group": self.group.value,
                "lattice_step": self.lattice_step}


@dataclass
class LawResult:
    """Residual of one transformation (a generator or a lattice shift)."""

    name: str
    residual: float = 0.0
    character: Optional[complex] = None
    character_spread: float = 0.0
    samples_used: int = 0
    skipped: List[str] = field(default_factory=list)
    indeterminate: bool = False
    expected_modulus: Optional[float] = None
    modulus_residual: float = 0.0

    def expect_modulus(self, modulus: float) -> "LawResult":
        """Compare |χ| with a known value; a missing estimate counts as a full miss."""
        self.expected_modulus = modulus
        if self.character is None:
            self.modulus_residual = 1.0
        else:
            self.modulus_residual = abs(abs(self.character) - modulus) / modulus
        return self

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "residual": self.residual,
            "character": self.character,
            "character_spread": self.character_spread,
            "expected_modulus": self.expected_modulus,
            "modulus_residual": self.modulus_residual,
            "samples_used": self.samples_used,
            "skipped": self.skipped,
            "indeterminate": self.indeterminate,
        }


@dataclass
class LawReport:
    kind: str
    results: List[LawResult]
    spec: Dict[str, Any] = field(default_factory=dict)

    @property
    def max_residual(self) -> float:
        return max((r.residual for r in self.results), default=0.0)

    @property
    def max_character_spread(self) -> float:
        return max((r.character_spread for r in self.results), default=0.0)

    @property
    def max_modulus_residual(self) -> float:
        return max((r.modulus_residual for r in self.results), default=0.0)

    def passed(self, tolerance: float) -> bool:
        if any(r.indeterminate for r in self.results):
            return False
        return max(self.max_residual, self.max_character_spread, self.max_modulus_residual) < tolerance

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "spec": self.spec,
            "max_residual": self.max_residual,
            "max_character_spread": self.max_character_spread,
            "max_modulus_residual": self.max_modulus_residual,
            "results": [r.to_dict() for r in self.results],
        }


def safe_call(fn: Callable[..., complex], *args) -> Optional[complex]:
    try:
        value = complex(fn(*args))
    except (SingularityError, PrecisionError, ZeroDivisionError) as e:
        logger.warning(f"Skipping sample {args}: {e}")
        return None
    if not (math.isfinite(value.real) and math.isfinite(value.imag)):
        return None
    return value


def _relative(lhs: complex, rhs: complex) -> float:
    scale = max(abs(lhs), abs(rhs))
    if scale < ABSOLUTE_FLOOR:
        return 0.0
    return abs(lhs - rhs) / scale


def fold_law(name: str, pairs: Sequence[Tuple[Optional[complex], Optional[complex], str]],
             estimate: bool = True, zero_is_indeterminate: bool = False) -> LawResult:
    """Fold (lhs, rhs) pairs into a residual, dividing out an estimated character.

    χ is the ratio at the first sample with a nonzero right-hand side; the
    spread is the largest deviation of the other ratios from it.
    """
    result = LawResult(name)
    usable = []
    for lhs, rhs, label in pairs:
        if lhs is None or rhs is None:
            result.skipped.append(label)
            continue
        usable.append((lhs, rhs))
    result.samples_used = len(usable)
    ratios = [l / r for l, r in usable if abs(r) > ABSOLUTE_FLOOR]
    if not estimate:
        chi = 1 + 0j
    elif ratios:
        chi = ratios[0]
        result.character_spread = max(abs(x - chi) for x in ratios)
    else:
        # f vanishes at every sample
        result.indeterminate = zero_is_indeterminate or any(abs(l) > ABSOLUTE_FLOOR for l, _ in usable)
        result.residual = 1.0 if any(abs(l) > ABSOLUTE_FLOOR for l, _ in usable) else 0.0
        return result
    result.character = chi
    result.residual = max((_relative(l, chi * r) for l, r in usable), default=0.0)
    return result


def _as_callable(f: Union[Callable[[complex], complex], QSeries]) -> Callable[[complex], complex]:
    if isinstance(f, QSeries):
        return f.evaluate
    return f


def modular_form_check(f: Union[Callable[[complex], complex], QSeries], weight: int,
                       group: Union[str, ModularGroup], samples: Sequence[complex],
                       matrices: Optional[Sequence[Tuple[str, ModularMatrix]]] = None) -> LawReport:
    """Check f(𝒢τ) = χ(𝒢)(cτ+d)^k f(τ) for each generator 𝒢 over τ samples.

    Args:
        f: Function of τ, or a QSeries evaluated at τ
        weight: Weight k
        group: Group whose generators are used
        samples: τ sample points
        matrices: Explicit (name, matrix) pairs to use instead of the generators

    Returns:
        LawReport with one result per generator; a generator whose f vanishes at
        every sample is marked indeterminate
    """
    fn = _as_callable(f)
    group = ModularGroup.parse(group)
    matrices = list(matrices) if matrices is not None else group_generators(group)
    results = []
    for name, m in matrices:
        pairs = []
        for tau in samples:
            lhs = safe_call(fn, m.act(tau))
            base = safe_call(fn, tau)
            rhs = None if base is None else m.automorphy(tau) ** weight * base
            pairs.append((lhs, rhs, f"tau={tau}"))
        results.append(fold_law(name, pairs, zero_is_indeterminate=True))
    report = LawReport("modular", results, {"weight": weight, "group": group.value})
    logger.info(f"Modular check weight {weight} over {group.value}: max residual {report.max_residual:.3g}")
    return report


def jacobi_law_check(fn: Callable[[complex, complex], complex], spec: JacobiFormSpec,
                     samples: Sequence[Tuple[complex, complex]],
                     matrices: Optional[Sequence[Tuple[str, ModularMatrix]]] = None,
                     estimate_character: bool = True) -> LawReport:
    """Check both lines of the Jacobi-form law over (t, τ) samples.

    Modular line: F(t/(cτ+d), 𝒢τ) = χ(𝒢)(cτ+d)^l e^{2πi m c t²/(cτ+d)} F(t, τ).
    Lattice line: F(t+λτ+μ, τ) = e^{−2πi m(λ²τ+2λt)} F(t, τ) for λ, μ ∈ step·ℤ.
    Samples where F hits a pole are skipped and listed in the report.
    """
    m_index = float(spec.index)
    matrices = list(matrices) if matrices is not None else group_generators(spec.group)
    results = []
    for name, g in matrices:
        pairs = []
        for t, tau in samples:
            j = g.automorphy(tau)
            t2, tau2 = g.act_jacobi(t, tau)
            lhs = safe_call(fn, t2, tau2)
            base = safe_call(fn, t, tau)
            rhs = None
            if base is not None:
                rhs = j ** spec.weight * cmath.exp(2j * math.pi * m_index * g.c * t * t / j) * base
            pairs.append((lhs, rhs, f"t={t}, tau={tau}"))
        results.append(fold_law(name, pairs, estimate_character))
    for lam, mu in spec.lattice_shifts():
        pairs = []
        for t, tau in samples:
            lhs = safe_call(fn, t + lam * tau + mu, tau)
            base = safe_call(fn, t, tau)
            rhs = None
            if base is not None:
                rhs = cmath.exp(-2j * math.pi * m_index * (lam * lam * tau + 2 * lam * t)) * base
            pairs.append((lhs, rhs, f"t={t}, tau={tau}"))
        results.append(fold_law(f"shift({lam},{mu})", pairs, estimate=False))
    report = LawReport("jacobi", results, spec.to_dict())
    logger.info(f"Jacobi check index {spec.index} weight {spec.weight}: max residual {report.max_residual:.3g}")
    return report
