"""One-point and two-point Markov chains of an i.i.d. model, and bounds on m1.

For an i.i.d. model the one-point chain has ``p[i][j] = Q{f : f(i) = j}`` and
the two-point chain moves a pair ``(i, j)`` to ``(f(i), f(j))`` with the same
random map.  Bounds on the number of synchronized subsets:

* upper: the number of recurrent states of the one-point chain;
* lower: a pair lying in an off-diagonal recurrent class of the two-point
  chain never synchronizes, so such pairs are edges of a conflict graph whose
  chromatic number bounds m1 from below; a maximum clique certifies it.  States
  in distinct recurrent classes of the one-point chain never meet either, so
  the number of those classes is also a lower bound.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Callable, Hashable, Iterable, Mapping, Sequence

from .core import NoiseModel

__all__ = [
    "MarkovChain",
    "TwoPointChain",
    "ClassDecomposition",
    "SyncBounds",
    "induced_chain",
    "two_point_chain",
    "class_decomposition",
    "strongly_connected_components",
    "max_clique",
    "sync_bounds",
    "is_synchronizing",
    "pair_status",
]

CLIQUE_EXACT_LIMIT = 64


@dataclass(frozen=True)
class MarkovChain:
    """Sparse chain on states ``0..k-1``; ``transitions[i]`` maps target -> probability."""

    k: int
    transitions: tuple[Mapping[int, Fraction], ...]

    def __post_init__(self):
        for i, row in enumerate(self.transitions):
            if sum(row.values(), Fraction(0)) != 1:
                raise ValueError(f"row {i} does not sum to 1")

    @property
    def nodes(self) -> range:
        return range(self.k)

    def successors(self, i: int) -> Iterable[int]:
        return (j for j, p in self.transitions[i].items() if p > 0)

    def p(self, i: int, j: int) -> Fraction:
        return self.transitions[i].get(j, Fraction(0))


@dataclass(frozen=True)
class TwoPointChain:
    """Chain on pairs of state indices, built over the pairs reachable from a seed set."""

    k: int
    transitions: Mapping[tuple[int, int], Mapping[tuple[int, int], Fraction]]

    @property
    def nodes(self) -> list[tuple[int, int]]:
        return sorted(self.transitions)

    def successors(self, pair):
        return (q for q, p in self.transitions[pair].items() if p > 0)

    def w(self, src: tuple[int, int], dst: tuple[int, int]) -> Fraction:
        return self.transitions[src].get(dst, Fraction(0))


@dataclass(frozen=True)
class ClassDecomposition:
    classes: tuple[frozenset, ...]
    recurrent_flags: tuple[bool, ...]

    @property
    def recurrent_classes(self) -> list[frozenset]:
        return [c for c, r in zip(self.classes, self.recurrent_flags) if r]

    @property
    def recurrent_states(self) -> frozenset:
        return frozenset().union(*self.recurrent_classes) if self.classes else frozenset()


@dataclass(frozen=True)
class SyncBounds:
    lower: int
    upper: int
    conflict_edges: tuple[tuple[int, int], ...]
    clique: tuple[int, ...]
    recurrent_states: tuple[int, ...]
    recurrent_classes: tuple[tuple[int, ...], ...]
    clique_exact: bool = True

    def __post_init__(self):
        if not 1 <= self.lower <= self.upper:
            raise AssertionError(f"inconsistent bounds {self.lower}..{self.upper}")


def induced_chain(model: NoiseModel) -> MarkovChain:
    rows: list[dict[int, Fraction]] = [defaultdict(Fraction) for _ in range(model.k)]
    for f, q in zip(model.alphabet, model.probs):
        if q == 0:
            continue
        for i, j in enumerate(f.image.tolist()):
            rows[i][j] += q
    return MarkovChain(model.k, tuple(dict(r) for r in rows))


def two_point_chain(model: NoiseModel,
                    seeds: Iterable[tuple[int, int]] | None = None) -> TwoPointChain:
    """Two-point chain over all pairs, or over the pairs reachable from ``seeds``."""
    maps = [(f.image.tolist(), q) for f, q in zip(model.alphabet, model.probs) if q > 0]
    k = model.k
    if seeds is None:
        frontier = [(i, j) for i in range(k) for j in range(k)]
    else:
        frontier = list(dict.fromkeys(seeds))
    trans: dict[tuple[int, int], dict[tuple[int, int], Fraction]] = {}
    seen = set(frontier)
    while frontier:
        pair = frontier.pop()
        i, j = pair
        row: dict[tuple[int, int], Fraction] = defaultdict(Fraction)
        for table, q in maps:
            row[(table[i], table[j])] += q
        trans[pair] = dict(row)
        for nxt in row:
            if nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)
    return TwoPointChain(k, trans)


def strongly_connected_components(nodes: Iterable[Hashable],
                                  successors: Callable[[Hashable], Iterable[Hashable]]) -> list[set]:
    """Tarjan's algorithm, iterative.  Components come out in reverse topological order."""
    index: dict = {}
    low: dict = {}
    on_stack: set = set()
    stack: list = []
    out: list[set] = []
    counter = 0
    for root in nodes:
        if root in index:
            continue
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        work = [(root, iter(successors(root)))]
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(successors(w))))
                    advanced = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
            if low[v] == index[v]:
                comp = set()
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.add(w)
                    if w == v:
                        break
                out.append(comp)
    return out


def class_decomposition(chain) -> ClassDecomposition:
    """Communicating classes of ``chain`` with closedness flags, in O(V + E)."""
    comps = strongly_connected_components(chain.nodes, chain.successors)
    comps.sort(key=min)
    classes, flags = [], []
    for comp in comps:
        closed = all(w in comp for v in comp for w in chain.successors(v))
        classes.append(frozenset(comp))
        flags.append(closed)
    return ClassDecomposition(tuple(classes), tuple(flags))


def _greedy_clique(adj: Mapping[int, set[int]]) -> list[int]:
    best: list[int] = []
    for start in sorted(adj, key=lambda v: (-len(adj[v]), v)):
        clique = [start]
        cand = set(adj[start])
        while cand:
            v = max(cand, key=lambda u: (len(adj[u] & cand), -u))
            clique.append(v)
            cand &= adj[v]
        if len(clique) > len(best):
            best = clique
    return sorted(best)


def max_clique(vertices: Sequence[int], edges: Iterable[tuple[int, int]],
               exact_limit: int = CLIQUE_EXACT_LIMIT) -> tuple[list[int], bool]:
    """Maximum clique by branch and bound; greedy when the graph is larger than ``exact_limit``.

    Returns the clique and whether it is provably maximum.
    """
    adj: dict[int, set[int]] = {v: set() for v in vertices}
    for a, b in edges:
        adj[a].add(b)
        adj[b].add(a)
    if not adj:
        return [], True
    active = [v for v in adj if adj[v]]
    if not active:
        return [min(adj)], True
    if len(active) > exact_limit:
        return _greedy_clique(adj), False

    best: list[int] = _greedy_clique(adj)

    def expand(clique: list[int], cand: set[int]):
        nonlocal best
        if not cand:
            if len(clique) > len(best):
                best = sorted(clique)
            return
        # greedy colouring bound
        order = sorted(cand, key=lambda v: -len(adj[v] & cand))
        colours: list[set[int]] = []
        colour_of = {}
        for v in order:
            for c, cls in enumerate(colours):
                if not (adj[v] & cls):
                    cls.add(v)
                    colour_of[v] = c + 1
                    break
            else:
                colours.append({v})
                colour_of[v] = len(colours)
        for v in sorted(cand, key=lambda u: colour_of[u], reverse=True):
            if len(clique) + colour_of[v] <= len(best):
                return
            expand(clique + [v], cand & adj[v])
            cand = cand - {v}

    expand([], set(active))
    return best, True


def _recurrent_pair_classes(model: NoiseModel, recurrent: Iterable[int]) -> list[frozenset]:
    rec = sorted(recurrent)
    chain = two_point_chain(model, seeds=[(a, b) for a in rec for b in rec])
    return class_decomposition(chain).recurrent_classes


def sync_bounds(model: NoiseModel) -> SyncBounds:
    one = class_decomposition(induced_chain(model))
    recurrent = sorted(one.recurrent_states)
    edges = set()
    for cls in _recurrent_pair_classes(model, recurrent):
        for a, b in cls:
            if a != b:
                edges.add((min(a, b), max(a, b)))
    clique, exact = max_clique(list(range(model.k)), edges)
    rec_classes = tuple(tuple(sorted(c)) for c in one.recurrent_classes)
    lower = max(len(clique), len(rec_classes), 1)
    if len(clique) < len(rec_classes):
        clique = [c[0] for c in rec_classes]
    return SyncBounds(lower=lower, upper=len(recurrent), conflict_edges=tuple(sorted(edges)),
                      clique=tuple(sorted(clique)), recurrent_states=tuple(recurrent),
                      recurrent_classes=rec_classes, clique_exact=exact)


def is_synchronizing(model: NoiseModel) -> bool:
    """True iff the diagonal is the only recurrent class of the two-point chain."""
    recurrent = class_decomposition(induced_chain(model)).recurrent_states
    return all(a == b for cls in _recurrent_pair_classes(model, recurrent) for a, b in cls)


def pair_status(bounds: SyncBounds, blocks: Iterable[Iterable[int]], k: int) -> dict[tuple[int, int], str]:
    """Label each unordered pair ``Conflict``, ``Merged`` or ``Undecided``.

    ``blocks`` is an observed synchronized partition; pairs sharing a block
    were seen to merge, conflict edges never merge, anything else is open.
    """
    block_of = {}
    for b, block in enumerate(blocks):
        for s in block:
            block_of[s] = b
    conflicts = set(bounds.conflict_edges)
    out = {}
    for a, b in combinations(range(k), 2):
        if (a, b) in conflicts:
            out[(a, b)] = "Conflict"
        elif block_of.get(a) is not None and block_of.get(a) == block_of.get(b):
            out[(a, b)] = "Merged"
        else:
            out[(a, b)] = "Undecided"
    return out
