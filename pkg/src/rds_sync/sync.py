"""Preimage partitions, the synchronized partition and the multiplicity m1.

The fibers of ``A(n, omega)`` partition the states; as ``n`` grows the fibers
only merge, so the chain of partitions coarsens and eventually freezes at the
synchronized partition, whose block count is m1.
"""

from __future__ import annotations

import os
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .core import CocyclePrefix, MapTable, NoiseModel, OmegaStream, iter_cocycle
from .markov import sync_bounds

__all__ = [
    "RefinementViolation",
    "Partition",
    "Certification",
    "PartitionEstimate",
    "PairVerdict",
    "preimage_partition",
    "refine_chain",
    "synchronizes_pair",
    "is_synchronizing_sample",
    "monte_carlo_m1",
    "M1Report",
    "DEFAULT_N_MAX",
    "DEFAULT_STABILITY_WINDOW",
]

DEFAULT_N_MAX = 1000
DEFAULT_STABILITY_WINDOW = 50


class RefinementViolation(AssertionError):
    """The fiber partition failed to coarsen from one step to the next."""


class Partition:
    """Partition of ``0..k-1`` in canonical form (blocks ordered by least element)."""

    __slots__ = ("block_of", "blocks")

    def __init__(self, block_of: Sequence[int]):
        labels = np.asarray(block_of, dtype=np.int64)
        _, first, inverse = np.unique(labels, return_index=True, return_inverse=True)
        rank = np.empty(first.size, dtype=np.int64)
        rank[np.argsort(first, kind="stable")] = np.arange(first.size)
        canon = rank[inverse.reshape(-1)]
        canon.setflags(write=False)
        self.block_of = canon
        order = np.argsort(canon, kind="stable")
        bounds = np.flatnonzero(np.diff(canon[order])) + 1
        self.blocks = tuple(tuple(int(x) for x in part) for part in np.split(order, bounds)) if canon.size else ()

    @classmethod
    def from_blocks(cls, blocks: Sequence[Sequence[int]], k: int) -> "Partition":
        label = [-1] * k
        for b, block in enumerate(blocks):
            for s in block:
                if label[s] != -1:
                    raise ValueError("blocks overlap")
                label[s] = b
        if -1 in label:
            raise ValueError("blocks do not cover the state set")
        return cls(label)

    @property
    def k(self) -> int:
        return int(self.block_of.size)

    def __len__(self) -> int:
        return len(self.blocks)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Partition):
            return NotImplemented
        return np.array_equal(self.block_of, other.block_of)

    def __hash__(self) -> int:
        return hash(self.block_of.tobytes())

    def __repr__(self) -> str:
        return f"Partition({[list(b) for b in self.blocks]})"

    def coarsens(self, finer: "Partition") -> bool:
        """True if every block of ``finer`` lies inside one block of ``self``."""
        pairs = np.unique(finer.block_of * self.k + self.block_of)
        return pairs.size == len(finer)

    def same_block(self, a: int, b: int) -> bool:
        return self.block_of[a] == self.block_of[b]

    def labelled(self, labels: Sequence[str]) -> list[list[str]]:
        return [[labels[s] for s in block] for block in self.blocks]


def preimage_partition(prefix: CocyclePrefix | MapTable) -> Partition:
    table = prefix.composed if isinstance(prefix, CocyclePrefix) else prefix
    return Partition(table.image)


class Certification(str, Enum):
    CERTIFIED_EXACT = "CertifiedExact"
    HEURISTIC_STABLE = "HeuristicStable"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class PartitionEstimate:
    partition: Partition
    n_used: int
    stable_for: int
    certification: Certification

    @property
    def m1(self) -> int:
        return len(self.partition)

    @property
    def m2(self) -> int:
        return self.partition.k - self.m1


def refine_chain(model: NoiseModel, omega: OmegaStream, n_max: int = DEFAULT_N_MAX,
                 stability_window: int = DEFAULT_STABILITY_WINDOW,
                 lower_bound: int | None = None) -> PartitionEstimate:
    """Follow the fiber partitions of ``A(n, omega)`` up to ``n_max`` steps.

    Stops as soon as the block count reaches ``lower_bound`` (then no further
    merge is possible and the result is certified).  Otherwise runs to the
    horizon and reports ``HeuristicStable`` if the partition was unchanged for
    the last ``stability_window`` steps, else ``Inconclusive``.
    ``lower_bound=None`` computes it from the model's Markov chains.
    """
    if not n_max >= stability_window >= 1:
        raise ValueError("need n_max >= stability_window >= 1")
    if lower_bound is None:
        lower_bound = sync_bounds(model).lower
    k = model.k
    prev = None
    count = k
    last_change = 0
    prefix = None
    for prefix in iter_cocycle(model, omega, n_max):
        image = prefix.composed.image
        uniq = np.unique(image)
        if prev is not None:
            # fibers of A(n) must be unions of fibers of A(n-1)
            if np.unique(prev * k + image).size != count:
                raise RefinementViolation(f"partition refined at step {prefix.steps}")
        if uniq.size != count:
            count = int(uniq.size)
            last_change = prefix.steps
        prev = image
        if count <= lower_bound:
            break
    n = prefix.steps
    stable = n - last_change
    if count == lower_bound:
        cert = Certification.CERTIFIED_EXACT
    elif count < lower_bound:
        raise RefinementViolation(f"block count {count} fell below the lower bound {lower_bound}")
    elif stable >= stability_window:
        cert = Certification.HEURISTIC_STABLE
    else:
        cert = Certification.INCONCLUSIVE
    return PartitionEstimate(Partition(prefix.composed.image), n, stable, cert)


class PairVerdict:
    """Outcome of ``synchronizes_pair``: ``Yes(n0)`` or ``NotWithinHorizon``."""

    __slots__ = ("n0",)

    def __init__(self, n0: int | None):
        self.n0 = n0

    @property
    def yes(self) -> bool:
        return self.n0 is not None

    def __eq__(self, other):
        return isinstance(other, PairVerdict) and self.n0 == other.n0

    def __repr__(self):
        return f"Yes({self.n0})" if self.yes else "NotWithinHorizon"


def synchronizes_pair(model: NoiseModel, omega: OmegaStream, s: int, s2: int,
                      n_max: int) -> PairVerdict:
    if s == s2:
        raise ValueError("a state is trivially synchronized with itself")
    tables = [f.image for f in model.alphabet]
    a, b = s, s2
    for n, w in enumerate(omega.symbols(0, n_max), start=1):
        a, b = tables[w][a], tables[w][b]
        if a == b:
            return PairVerdict(n)
    return PairVerdict(None)


def is_synchronizing_sample(estimate: PartitionEstimate) -> bool:
    return estimate.m1 == 1


@dataclass(frozen=True)
class M1Report:
    histogram: dict[int, int]
    certifications: tuple[str, ...]
    m1_values: tuple[int, ...]
    modal_m1: int
    trials: int
    n_max: int
    stability_window: int
    lower: int
    upper: int
    partition_example: Partition

    @property
    def certified_fraction(self) -> float:
        return self.certifications.count(Certification.CERTIFIED_EXACT.value) / self.trials


def _trial(args):
    model, seed, index, n_max, window, lower = args
    omega = OmegaStream.generated(model, seed, key=(index,))
    est = refine_chain(model, omega, n_max, window, lower_bound=lower)
    return index, est.m1, est.certification.value, est.partition.block_of.tolist()


def _worker_count(requested: int | None) -> int:
    if requested is not None:
        return max(1, requested)
    env = os.environ.get("RDS_SYNC_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def monte_carlo_m1(model: NoiseModel, trials: int, n_max: int = DEFAULT_N_MAX,
                   stability_window: int = DEFAULT_STABILITY_WINDOW, seed: int = 0,
                   workers: int | None = None) -> M1Report:
    """Distribution of m1 over independent noise draws.

    Trial ``i`` uses the stream keyed by ``(seed, i)``, so the report does not
    depend on the worker count.  ``workers`` defaults to ``$RDS_SYNC_THREADS``
    or 1.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    bounds = sync_bounds(model)
    jobs = [(model, seed, i, n_max, stability_window, bounds.lower) for i in range(trials)]
    nworkers = min(_worker_count(workers), trials)
    if nworkers > 1:
        with ProcessPoolExecutor(max_workers=nworkers) as pool:
            results = list(pool.map(_trial, jobs, chunksize=max(1, trials // (4 * nworkers))))
    else:
        results = [_trial(j) for j in jobs]
    results.sort()
    m1s = tuple(r[1] for r in results)
    hist = dict(sorted(Counter(m1s).items()))
    modal = max(hist, key=lambda m: (hist[m], -m))
    example = next(Partition(r[3]) for r in results if r[1] == modal)
    return M1Report(histogram=hist, certifications=tuple(r[2] for r in results), m1_values=m1s,
                    modal_m1=modal, trials=trials, n_max=n_max, stability_window=stability_window,
                    lower=bounds.lower, upper=bounds.upper, partition_example=example)
