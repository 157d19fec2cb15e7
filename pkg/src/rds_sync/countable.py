"""Countable state spaces: maps on s_1, s_2, ... acting exactly on l1 vectors.

States are indexed from 1.  A ``TailedVector`` is a finite head followed by an
optional geometric tail ``first, first*r, first*r**2, ...`` starting right
after the head, so l1 norms and coordinate sums are exact rationals.  The
bundled maps send this class into itself; maps that cannot are refused with
``UnrepresentableError`` instead of being truncated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .core import parse_rational

__all__ = [
    "UnrepresentableError",
    "Geometric",
    "TailedVector",
    "LazyMap",
    "shift_down",
    "collapse",
    "table_map",
    "rule_map",
    "apply_lazy",
    "Verdict",
    "ExponentEstimate",
    "exponent_estimate",
    "decaying_sum_zero_vector",
    "unit_difference",
    "TheoremBReport",
    "check_theorem_b",
    "lazy_map_from_json",
    "tailed_vector_from_json",
]


class UnrepresentableError(ValueError):
    pass


@dataclass(frozen=True)
class Geometric:
    first: Fraction
    ratio: Fraction

    def __post_init__(self):
        object.__setattr__(self, "first", Fraction(self.first))
        object.__setattr__(self, "ratio", Fraction(self.ratio))
        if abs(self.ratio) >= 1:
            raise ValueError("geometric tail needs |ratio| < 1")

    def sum(self) -> Fraction:
        return self.first / (1 - self.ratio)

    def l1(self) -> Fraction:
        return abs(self.first) / (1 - abs(self.ratio))


@dataclass(frozen=True)
class TailedVector:
    head: tuple[Fraction, ...]
    tail: Geometric | None = None

    def __post_init__(self):
        object.__setattr__(self, "head", tuple(Fraction(x) for x in self.head))
        if self.tail is not None and self.tail.first == 0:
            object.__setattr__(self, "tail", None)

    @classmethod
    def finite(cls, entries: Iterable) -> "TailedVector":
        return cls(tuple(entries))

    @property
    def tail_start(self) -> int:
        """1-based index of the first tail entry."""
        return len(self.head) + 1

    def entry(self, i: int) -> Fraction:
        if i < 1:
            raise IndexError("states are indexed from 1")
        if i <= len(self.head):
            return self.head[i - 1]
        if self.tail is None:
            return Fraction(0)
        return self.tail.first * self.tail.ratio ** (i - self.tail_start)

    def materialize(self, length: int) -> "TailedVector":
        """Same vector with the head extended to at least ``length`` entries."""
        if length <= len(self.head):
            return self
        extra = length - len(self.head)
        if self.tail is None:
            return TailedVector(self.head + (Fraction(0),) * extra)
        t = self.tail
        new = tuple(t.first * t.ratio**m for m in range(extra))
        return TailedVector(self.head + new, Geometric(t.first * t.ratio**extra, t.ratio))

    def total(self) -> Fraction:
        s = sum(self.head, Fraction(0))
        return s + self.tail.sum() if self.tail else s

    def l1(self) -> Fraction:
        s = sum((abs(x) for x in self.head), Fraction(0))
        return s + self.tail.l1() if self.tail else s

    def is_zero(self) -> bool:
        return self.tail is None and not any(self.head)

    def in_sum_zero_space(self) -> bool:
        return self.total() == 0

    def finite_support(self) -> bool:
        return self.tail is None

    def trimmed(self) -> "TailedVector":
        head = list(self.head)
        if self.tail is None:
            while head and head[-1] == 0:
                head.pop()
        return TailedVector(tuple(head), self.tail)


class MapKind(str, Enum):
    SHIFT = "shift_down"
    COLLAPSE = "collapse"
    TABLE = "table"
    RULE = "rule"


@dataclass(frozen=True)
class LazyMap:
    """A total map on the positive integers.

    ``shift_down(step)`` sends ``i -> i - step`` for ``i > step`` and fixes
    ``1..step``; ``collapse`` sends everything to 1; ``table`` gives explicit
    images for ``1..len(table)`` and a declared tail behavior beyond
    (``identity``, ``shift`` for ``i -> i - 1``, or ``collapse``); ``rule``
    wraps an arbitrary function and only acts on finitely supported vectors.
    """

    kind: MapKind
    step: int = 1
    table: tuple[int, ...] = ()
    tail: str = "identity"
    rule: Callable[[int], int] | None = None

    def __call__(self, i: int) -> int:
        if i < 1:
            raise IndexError("states are indexed from 1")
        if self.kind is MapKind.SHIFT:
            return i - self.step if i > self.step else i
        if self.kind is MapKind.COLLAPSE:
            return 1
        if self.kind is MapKind.TABLE:
            if i <= len(self.table):
                return self.table[i - 1]
            if self.tail == "identity":
                return i
            if self.tail == "shift":
                return i - 1
            return 1
        return self.rule(i)


def shift_down(step: int = 1) -> LazyMap:
    if step < 1:
        raise ValueError("step must be positive")
    return LazyMap(MapKind.SHIFT, step=step)


def collapse() -> LazyMap:
    return LazyMap(MapKind.COLLAPSE)


def table_map(table: Sequence[int], tail: str = "identity") -> LazyMap:
    table = tuple(int(x) for x in table)
    if tail not in ("identity", "shift", "collapse"):
        raise UnrepresentableError(f"unsupported tail behavior {tail!r}")
    if any(x < 1 for x in table):
        raise ValueError("table images must be positive indices")
    if tail == "shift" and not table:
        raise ValueError("a shifting tail needs at least one explicit entry")
    return LazyMap(MapKind.TABLE, table=table, tail=tail)


def rule_map(rule: Callable[[int], int]) -> LazyMap:
    return LazyMap(MapKind.RULE, rule=rule)


def _fiber_sums(f: LazyMap, head: Sequence[Fraction], size: int) -> list[Fraction]:
    out = [Fraction(0)] * size
    for i, x in enumerate(head, start=1):
        if x:
            j = f(i)
            if j > size:
                out.extend([Fraction(0)] * (j - size))
                size = j
            out[j - 1] += x
    return out


def apply_lazy(f: LazyMap, v: TailedVector) -> TailedVector:
    """Exact image ``u_i = sum(v_j for f(j) == i)``."""
    if f.kind is MapKind.COLLAPSE:
        return TailedVector((v.total(),))
    if f.kind is MapKind.SHIFT:
        b = f.step
        w = v.materialize(2 * b)
        h = w.head
        new = [h[j] + h[j + b] if j < b else h[j + b] for j in range(len(h) - b)]
        return TailedVector(tuple(new), w.tail)
    if f.kind is MapKind.TABLE:
        reach = max([len(f.table), *f.table, len(v.head)])
        w = v.materialize(reach)
        out = _fiber_sums(f, w.head, len(w.head))
        tail = w.tail
        if tail is not None:
            if f.tail == "shift":
                out[len(w.head) - 1] += tail.first
                tail = Geometric(tail.first * tail.ratio, tail.ratio)
            elif f.tail == "collapse":
                out[0] += tail.sum()
                tail = None
        return TailedVector(tuple(out), tail)
    if v.tail is not None:
        raise UnrepresentableError("a rule map without declared tail behavior cannot act on an infinite tail")
    return TailedVector(tuple(_fiber_sums(f, v.head, len(v.head)))).trimmed()


class Verdict(str, Enum):
    MINUS_INFINITY = "MinusInfinity"
    LIMIT = "Limit"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class ExponentEstimate:
    """Exact norms ``norms[n-1] = ||M(n)v||_1`` with ``(1/n) log`` samples.

    For ``LIMIT``, ``interval`` brackets the one-step growth rates
    ``log(||M(n)v|| / ||M(n-1)v||)`` over the last quarter of the horizon;
    whenever these converge, the averaged exponent has the same limit.
    """

    norms: tuple[Fraction, ...]
    samples: tuple[tuple[int, float], ...]
    verdict: Verdict
    n0: int | None = None
    interval: tuple[float, float] | None = None

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "n0": self.n0,
            "interval": list(self.interval) if self.interval else None,
            "horizon": len(self.norms),
        }


def _log(q: Fraction) -> float:
    return math.log(q.numerator) - math.log(q.denominator)


def _map_at(maps, n: int) -> LazyMap:
    if isinstance(maps, LazyMap):
        return maps
    if callable(maps):
        return maps(n)
    return maps[n]


def exponent_estimate(maps, v: TailedVector, n_max: int,
                      spread_tol: float = 0.05) -> ExponentEstimate:
    """Estimate the exponent of ``v`` along a map sequence.

    ``maps`` is one ``LazyMap`` applied every step, a sequence indexed by step,
    or a callable ``n -> LazyMap`` (step ``n`` counted from 0).
    """
    if n_max < 2:
        raise ValueError("n_max must be at least 2")
    if v.is_zero():
        return ExponentEstimate((), (), Verdict.MINUS_INFINITY, n0=0)
    norms = []
    samples = []
    current = v
    for n in range(1, n_max + 1):
        current = apply_lazy(_map_at(maps, n - 1), current)
        if current.is_zero():
            return ExponentEstimate(tuple(norms), tuple(samples), Verdict.MINUS_INFINITY, n0=n)
        norm = current.l1()
        norms.append(norm)
        samples.append((n, _log(norm) / n))
    start = max(1, n_max - n_max // 4)
    rates = [_log(norms[n] / norms[n - 1]) for n in range(start, n_max)]
    lo, hi = min(rates), max(rates)
    if hi - lo > spread_tol:
        return ExponentEstimate(tuple(norms), tuple(samples), Verdict.INCONCLUSIVE)
    pad = 1e-12 * max(1.0, abs(lo), abs(hi))
    return ExponentEstimate(tuple(norms), tuple(samples), Verdict.LIMIT, interval=(lo - pad, hi + pad))


def decaying_sum_zero_vector(lam: Fraction) -> TailedVector:
    """``(lam/(1-lam), -lam, -lam**2, ...)``: sums to zero, decays like ``lam**n`` under shift-down."""
    lam = Fraction(lam)
    if not 0 < lam < 1:
        raise ValueError("lam must lie in (0, 1)")
    return TailedVector((lam / (1 - lam),), Geometric(-lam, lam))


def unit_difference(i: int, j: int) -> TailedVector:
    """``e_i - e_j`` with 1-based indices."""
    head = [Fraction(0)] * max(i, j)
    head[i - 1] += 1
    head[j - 1] -= 1
    return TailedVector(tuple(head))


@dataclass(frozen=True)
class VectorCheck:
    vector: TailedVector
    annihilated_at: int | None
    single_block_predicts: bool
    blockwise_predicts: bool | None


@dataclass(frozen=True)
class TheoremBReport:
    """Which vectors were annihilated within the horizon, against two predictions.

    ``single_block_holds``: annihilated exactly when the coordinate sum is 0
    (the synchronizing case).  ``blockwise_holds``: annihilated exactly when
    every declared block sums to 0 (``None`` without declared blocks).
    """

    checks: tuple[VectorCheck, ...]
    n_max: int
    single_block_holds: bool
    blockwise_holds: bool | None


def _annihilation_time(maps, v: TailedVector, n_max: int) -> int | None:
    if v.is_zero():
        return 0
    current = v
    for n in range(1, n_max + 1):
        current = apply_lazy(_map_at(maps, n - 1), current)
        if current.is_zero():
            return n
    return None


def check_theorem_b(maps, vectors: Iterable[TailedVector], n_max: int,
                    block_of: Callable[[int], int] | None = None) -> TheoremBReport:
    """Test finitely supported vectors against the sum-zero characterizations.

    ``block_of`` assigns each state its declared synchronized subset; it must
    take finitely many values.
    """
    checks = []
    for v in vectors:
        if not v.finite_support():
            raise ValueError("test vectors must have finite support")
        t = _annihilation_time(maps, v, n_max)
        single = v.total() == 0
        blockwise = None
        if block_of is not None:
            sums: dict[int, Fraction] = {}
            for i, x in enumerate(v.head, start=1):
                sums[block_of(i)] = sums.get(block_of(i), Fraction(0)) + x
            blockwise = all(s == 0 for s in sums.values())
        checks.append(VectorCheck(v, t, single, blockwise))
    single_ok = all((c.annihilated_at is not None) == c.single_block_predicts for c in checks)
    block_ok = None
    if block_of is not None:
        block_ok = all((c.annihilated_at is not None) == c.blockwise_predicts for c in checks)
    return TheoremBReport(tuple(checks), n_max, single_ok, block_ok)


def lazy_map_from_json(spec) -> LazyMap:
    if spec == "shift_down":
        return shift_down()
    if spec == "collapse":
        return collapse()
    if isinstance(spec, dict):
        if "shift_down" in spec:
            return shift_down(int((spec["shift_down"] or {}).get("step", 1)))
        if "table" in spec:
            return table_map(spec["table"], spec.get("tail", "identity"))
    raise UnrepresentableError(f"unknown map description {spec!r}")


def tailed_vector_from_json(spec: dict) -> TailedVector:
    head = [parse_rational(x) for x in spec.get("head", [])]
    tail = spec.get("tail")
    if not tail or tail == "zero":
        return TailedVector(tuple(head))
    ratio = parse_rational(tail["ratio"])
    first = parse_rational(tail.get("first", ratio))
    start = int(tail.get("first_index", len(head) + 1))
    if start < len(head) + 1:
        raise ValueError("tail must start after the head")
    head += [Fraction(0)] * (start - len(head) - 1)
    return TailedVector(tuple(head), Geometric(first, ratio))
