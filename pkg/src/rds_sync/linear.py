"""The induced linear cocycle: 0/1 matrices of maps and their exact action on vectors.

The matrix of a map ``f`` has a single 1 in each column ``j``, in row ``f(j)``.
Matrices are never materialized in the analysis paths; the action on a vector
is a fiber sum ``u[i] = sum(v[j] for j with f(j) == i)``.  All arithmetic is
exact (``fractions.Fraction``).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .core import MapTable, NoiseModel, OmegaStream

__all__ = [
    "ZeroOneMatrix",
    "RationalVector",
    "ExponentKind",
    "ExponentResult",
    "matrix_of",
    "apply_map_to_vector",
    "classify_exponent",
    "image_size",
    "basis_difference",
]


@dataclass(frozen=True)
class ZeroOneMatrix:
    """Sparse 0/1 matrix with exactly one 1 per column; ``rows[i]`` holds the columns set in row ``i``."""

    k: int
    rows: tuple[frozenset[int], ...]

    def __post_init__(self):
        if len(self.rows) != self.k:
            raise ValueError("row count must equal dimension")
        cols = sorted(j for r in self.rows for j in r)
        if cols != list(range(self.k)):
            raise ValueError("every column needs exactly one 1")

    def dense(self) -> np.ndarray:
        out = np.zeros((self.k, self.k), dtype=np.int64)
        for i, cols in enumerate(self.rows):
            for j in cols:
                out[i, j] = 1
        return out

    def nonzero_rows(self) -> int:
        return sum(1 for r in self.rows if r)


def matrix_of(f: MapTable) -> ZeroOneMatrix:
    rows: list[set[int]] = [set() for _ in range(f.k)]
    for j, i in enumerate(f.image.tolist()):
        rows[i].add(j)
    return ZeroOneMatrix(f.k, tuple(frozenset(r) for r in rows))


class RationalVector(tuple):
    """Immutable vector of exact rationals."""

    def __new__(cls, entries: Iterable = ()):
        return super().__new__(cls, (Fraction(x) for x in entries))

    @classmethod
    def zeros(cls, k: int) -> "RationalVector":
        return cls([0] * k)

    def coordinate_sum(self) -> Fraction:
        return sum(self, Fraction(0))

    def l1(self) -> Fraction:
        return sum((abs(x) for x in self), Fraction(0))

    def is_zero(self) -> bool:
        return not any(self)

    def in_sum_zero_hyperplane(self) -> bool:
        return self.coordinate_sum() == 0

    def __repr__(self) -> str:
        return f"RationalVector([{', '.join(str(x) for x in self)}])"


def basis_difference(k: int, i: int, j: int) -> RationalVector:
    """``e_i - e_j`` in dimension ``k`` (0-based indices)."""
    v = [0] * k
    v[i] += 1
    v[j] -= 1
    return RationalVector(v)


def apply_map_to_vector(f: MapTable, v: Sequence) -> RationalVector:
    if len(v) != f.k:
        raise ValueError(f"vector has length {len(v)}, map acts on {f.k} states")
    out = [Fraction(0)] * f.k
    for j, i in enumerate(f.image.tolist()):
        if v[j]:
            out[i] += v[j]
    return RationalVector(out)


def image_size(f: MapTable) -> int:
    """Number of distinct images, equal to the rank of ``matrix_of(f)``."""
    return int(np.unique(f.image).size)


class ExponentKind(str, Enum):
    ZERO = "Zero"
    MINUS_INFINITY = "MinusInfinity"


@dataclass(frozen=True)
class ExponentResult:
    """Verdict on the exponent of ``v`` along ``omega``.

    For ``MINUS_INFINITY``, ``witness`` is the first ``n`` with ``M(n)v = 0``.
    For ``ZERO`` the verdict holds up to ``horizon`` and ``bounds`` are the
    smallest and largest l1 norms observed; ``norm_values`` lists the distinct
    norms seen.
    """

    kind: ExponentKind
    horizon: int
    witness: int | None = None
    bounds: tuple[Fraction, Fraction] | None = None
    norm_values: tuple[Fraction, ...] = ()

    def to_json(self) -> dict:
        return {"kind": self.kind.value, "witness": self.witness, "horizon": self.horizon}


def classify_exponent(model: NoiseModel, omega: OmegaStream, v: Sequence,
                      n_max: int) -> ExponentResult:
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    v = RationalVector(v)
    if len(v) != model.k:
        raise ValueError("vector dimension does not match the model")
    if v.is_zero():
        return ExponentResult(ExponentKind.MINUS_INFINITY, n_max, witness=0)
    norms = [v.l1()]
    current = v
    for n, w in enumerate(omega.symbols(0, n_max), start=1):
        current = apply_map_to_vector(model.alphabet[w], current)
        if current.is_zero():
            return ExponentResult(ExponentKind.MINUS_INFINITY, n_max, witness=n)
        norms.append(current.l1())
    return ExponentResult(ExponentKind.ZERO, n_max, bounds=(min(norms), max(norms)),
                          norm_values=tuple(sorted(set(norms))))
