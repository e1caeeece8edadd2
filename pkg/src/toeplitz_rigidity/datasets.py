"""
Dataset files: pydantic models for the JSON schema and CSV loop samples.

A dataset is either fixed-point data of a circle action (``kind:
"equivariant"``) or a model manifold for genus computations (``kind:
"model"``). Structural invariants are checked on load; the first violation
is reported as a :class:`~toeplitz_rigidity.exceptions.DatasetError` naming
the invariant.
"""

import json
import logging
import re
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .exceptions import DatasetError, DomainError
from .odd_chern import LoopMap

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
DATA_PACKAGE = "toeplitz_rigidity.data"
DATASET_ALIASES = {"s3": "s3_circle_action", "x7": "x7_s2_rotation"}
ODD_CLASS_PATTERN = re.compile(r"^c(\d+)$")
GENERATOR_PATTERN = re.compile(r"^[A-Za-z][A-Za-z0-9_]*$")

Number = Union[int, float, str]


def parse_number(value: Number) -> Union[Fraction, float]:
    """Integers and "p/q" strings become exact fractions, floats stay floats."""
    if isinstance(value, bool):
        raise DatasetError("booleans are not numbers", invariant="number")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return value
    try:
        return Fraction(str(value).strip())
    except ValueError:
        raise DatasetError(f"cannot parse number '{value}'", invariant="number") from None


def odd_class_degree(name: str) -> int:
    match = ODD_CLASS_PATTERN.match(name)
    if not match or int(match.group(1)) % 2 == 0:
        raise ValueError(f"odd class names look like c1, c3, c5, ..., got '{name}'")
    return int(match.group(1))


def _check_root(expression: str) -> str:
    body = expression.strip().lstrip("-")
    if body != "0" and not GENERATOR_PATTERN.match(body):
        raise ValueError(f"root must be '0', a generator name or its negative, got '{expression}'")
    return expression.strip()


def root_generator(expression: str) -> Optional[str]:
    body = expression.strip().lstrip("-")
    return None if body == "0" else body


class Flags(BaseModel):
    """Hypotheses recorded on the data, never computed."""

    model_config = ConfigDict(extra="forbid")

    g_trivial_on_pi1: bool = True
    c3_zero: bool = False
    p1_condition: bool = False


class NormalSummand(BaseModel):
    model_config = ConfigDict(extra="forbid")

    gamma: int
    roots: List[str] = Field(min_length=1)

    @field_validator("gamma")
    @classmethod
    def _nonzero(cls, v: int) -> int:
        if v == 0:
            raise ValueError("normal exponents satisfy γ ∈ ℤ∖{0}")
        return v

    @field_validator("roots")
    @classmethod
    def _roots(cls, v: List[str]) -> List[str]:
        return [_check_root(r) for r in v]

    @property
    def rank(self) -> int:
        return len(self.roots)


class VSummand(BaseModel):
    model_config = ConfigDict(extra="forbid")

    nu: int
    roots: List[str] = Field(min_length=1)

    @field_validator("nu")
    @classmethod
    def _nonzero(cls, v: int) -> int:
        if v == 0:
            raise ValueError("weight-zero directions of V belong to v0_roots")
        return v

    @field_validator("roots")
    @classmethod
    def _roots(cls, v: List[str]) -> List[str]:
        return [_check_root(r) for r in v]

    @property
    def rank(self) -> int:
        return len(self.roots)


class ComponentSpec(BaseModel):
    """One connected component of the fixed-point set."""

    model_config = ConfigDict(extra="forbid")

    label: str = ""
    dim: int
    tangent_roots: List[str] = Field(default_factory=list)
    normal: List[NormalSummand] = Field(default_factory=list)
    v_summands: List[VSummand] = Field(default_factory=list)
    v0_roots: List[str] = Field(default_factory=list)
    v0_zero_roots: int = 0
    odd_classes: List[str] = Field(default_factory=list)
    extra_generators: List[str] = Field(default_factory=list)
    integrate: Dict[str, Number] = Field(default_factory=dict)

    @field_validator("dim")
    @classmethod
    def _odd_dim(cls, v: int) -> int:
        if v < 1 or v % 2 == 0:
            raise ValueError("fixed components have odd dimension")
        return v

    @field_validator("tangent_roots", "v0_roots")
    @classmethod
    def _roots(cls, v: List[str]) -> List[str]:
        return [_check_root(r) for r in v]

    @field_validator("odd_classes")
    @classmethod
    def _odd_names(cls, v: List[str]) -> List[str]:
        for name in v:
            odd_class_degree(name)
        return v

    @field_validator("v0_zero_roots")
    @classmethod
    def _non_negative(cls, v: int) -> int:
        if v < 0:
            raise ValueError("v0_zero_roots must be non-negative")
        return v

    @model_validator(mode="after")
    def _tangent_pairs(self) -> "ComponentSpec":
        if len(self.tangent_roots) != (self.dim - 1) // 2:
            raise ValueError(f"a {self.dim}-dimensional component needs {(self.dim - 1) // 2} tangent root pairs")
        return self

    @property
    def normal_rank(self) -> int:
        return sum(s.rank for s in self.normal)

    @property
    def v_dim(self) -> int:
        return 2 * sum(s.rank for s in self.v_summands) + 2 * len(self.v0_roots) + self.v0_zero_roots


class EquivariantPayload(BaseModel):
    model_config = ConfigDict(extra="forbid")

    ambient_dim: int
    rank_e: int = 8
    anomaly_n: Optional[int] = None
    components: List[ComponentSpec] = Field(default_factory=list)

    @field_validator("ambient_dim")
    @classmethod
    def _odd_ambient(cls, v: int) -> int:
        if v < 1 or v % 2 == 0:
            raise ValueError("the ambient manifold has odd dimension")
        return v

    @field_validator("rank_e")
    @classmethod
    def _even_rank(cls, v: int) -> int:
        if v < 2 or v % 2:
            raise ValueError("rank N of E must be even and at least 2")
        return v

    @model_validator(mode="after")
    def _ranks(self) -> "EquivariantPayload":
        v_dims = set()
        for i, comp in enumerate(self.components):
            if comp.dim + 2 * comp.normal_rank != self.ambient_dim:
                raise ValueError(f"component {i}: dim + 2·Σ rank(N_γ) = {comp.dim + 2 * comp.normal_rank}, "
                                 f"ambient dim is {self.ambient_dim}")
            v_dims.add(comp.v_dim)
        if len(v_dims) > 1:
            raise ValueError(f"components disagree on dim V: {sorted(v_dims)}")
        return self


class ModelPayload(BaseModel):
    model_config = ConfigDict(extra="forbid")

    dim: int
    tangent_roots: List[str]
    odd_classes: List[str] = Field(default_factory=list)
    extra_generators: List[str] = Field(default_factory=list)
    integrate: Dict[str, Number] = Field(default_factory=dict)
    rank_e: int = 8

    @field_validator("dim")
    @classmethod
    def _odd_dim(cls, v: int) -> int:
        if v < 1 or v % 2 == 0:
            raise ValueError("model manifolds have odd dimension")
        return v

    @field_validator("odd_classes")
    @classmethod
    def _odd_names(cls, v: List[str]) -> List[str]:
        for name in v:
            odd_class_degree(name)
        return v

    @model_validator(mode="after")
    def _pairs(self) -> "ModelPayload":
        if len(self.tangent_roots) != (self.dim - 1) // 2:
            raise ValueError(f"a {self.dim}-dimensional model needs {(self.dim - 1) // 2} tangent root pairs")
        return self


class DatasetFile(BaseModel):
    model_config = ConfigDict(extra="forbid")

    schema_version: Literal[1] = SCHEMA_VERSION
    kind: Literal["equivariant", "model"]
    name: str = ""
    description: str = ""
    flags: Flags = Field(default_factory=Flags)
    equivariant: Optional[EquivariantPayload] = None
    model: Optional[ModelPayload] = None

    @model_validator(mode="after")
    def _payload(self) -> "DatasetFile":
        if self.kind == "equivariant" and self.equivariant is None:
            raise ValueError("equivariant datasets need an 'equivariant' payload")
        if self.kind == "model" and self.model is None:
            raise ValueError("model datasets need a 'model' payload")
        return self


def _first_violation(error: ValidationError) -> DatasetError:
    first = error.errors()[0]
    location = ".".join(str(part) for part in first.get("loc", ()))
    message = first.get("msg", "invalid dataset")
    if message.startswith("Value error, "):
        message = message[len("Value error, "):]
    return DatasetError(f"{location}: {message}" if location else message, invariant=message)


def parse_dataset(data: Dict[str, Any]) -> DatasetFile:
    try:
        return DatasetFile.model_validate(data)
    except ValidationError as e:
        raise _first_violation(e) from None


def builtin_datasets() -> List[str]:
    return sorted(p.name[:-5] for p in resources.files(DATA_PACKAGE).iterdir()
                  if p.name.endswith(".json") and not p.name.endswith(".schema.json"))


def resolve_dataset(name: str) -> Path:
    """A filesystem path, or the name of a shipped dataset (with or without .json)."""
    path = Path(name)
    if path.exists():
        return path
    stem = path.name[:-5] if path.name.endswith(".json") else path.name
    stem = DATASET_ALIASES.get(stem, stem)
    candidate = resources.files(DATA_PACKAGE) / f"{stem}.json"
    if candidate.is_file():
        return Path(str(candidate))
    raise FileNotFoundError(f"dataset '{name}' not found (shipped: {', '.join(builtin_datasets())})")


def load_dataset(path: Union[str, Path]) -> DatasetFile:
    """Read and validate a dataset file.

    Raises:
        FileNotFoundError: if neither a file nor a shipped dataset matches
        DatasetError: on a parse error or the first violated invariant
    """
    resolved = resolve_dataset(str(path))
    try:
        with open(resolved, "r") as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise DatasetError(f"{resolved}: {e}", invariant="parse") from None
    dataset = parse_dataset(data)
    if not dataset.name:
        dataset = dataset.model_copy(update={"name": resolved.stem})
    logger.debug(f"Loaded {dataset.kind} dataset '{dataset.name}' from {resolved}")
    return dataset


# ---------------------------------------------------------------------------
# Sampled loops
# ---------------------------------------------------------------------------

def load_loop_csv(path: Union[str, Path], domain: str) -> LoopMap:
    """Read loop samples: index columns (1 for S¹, 3 for S³), then re/im pairs row-major.

    Raises:
        DomainError: if the index grid is not closed (every node exactly once)
        DatasetError: for malformed rows or non-unitary samples
    """
    index_columns = {"S1": 1, "S3": 3}.get(domain)
    if index_columns is None:
        raise DomainError(f"unknown loop domain '{domain}'")
    try:
        table = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
    except ValueError as e:
        raise DatasetError(f"{path}: {e}", invariant="parse") from None
    entries = table.shape[1] - index_columns
    size = int(round(np.sqrt(entries / 2)))
    if entries <= 0 or 2 * size * size != entries:
        raise DatasetError(f"{path}: {entries} value columns do not form a square complex matrix",
                           invariant="shape")
    indices = table[:, :index_columns].astype(int)
    values = table[:, index_columns::2] + 1j * table[:, index_columns + 1::2]
    matrices = values.reshape(-1, size, size)
    if domain == "S1":
        n = len(indices)
        if sorted(indices[:, 0].tolist()) != list(range(n)):
            raise DomainError(f"{path}: S¹ grid indices must be 0..{n - 1}, each once (closed grid)")
        order = np.argsort(indices[:, 0])
        angles = 2 * np.pi * np.arange(n) / n
        return LoopMap("S1", matrices[order], angles)
    n_eta = int(indices[:, 0].max()) + 1
    n_xi = int(indices[:, 1].max()) + 1
    expected = {(i, j, k) for i in range(n_eta) for j in range(n_xi) for k in range(n_xi)}
    seen = [tuple(row) for row in indices.tolist()]
    if len(seen) != len(expected) or set(seen) != expected:
        raise DomainError(f"{path}: S³ grid must list every (η, ξ₁, ξ₂) node exactly once")
    grid = np.zeros((n_eta, n_xi, n_xi, size, size), dtype=complex)
    for (i, j, k), m in zip(seen, matrices):
        grid[i, j, k] = m
    return LoopMap("S3", grid)


def save_loop_csv(loop: LoopMap, path: Union[str, Path]) -> None:
    """Write loop samples in the format read by :func:`load_loop_csv`."""
    size = loop.matrix_size
    lead = loop.samples.shape[:-2]
    flat = loop.samples.reshape(-1, size * size)
    indices = np.array(list(np.ndindex(*lead)), dtype=int)
    interleaved = np.empty((flat.shape[0], 2 * size * size))
    interleaved[:, 0::2] = flat.real
    interleaved[:, 1::2] = flat.imag
    header_index = "k" if loop.domain == "S1" else "i_eta,i_xi1,i_xi2"
    header = header_index + "," + ",".join(f"re{r}{c},im{r}{c}" for r in range(size) for c in range(size))
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        f.write(f"# domain={loop.domain}\n# {header}\n")
        for idx, row in zip(indices, interleaved):
            f.write(",".join(str(int(i)) for i in idx) + "," + ",".join("%.17g" % v for v in row) + "\n")
