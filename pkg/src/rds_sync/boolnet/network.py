"""Synchronous-update compilation of Boolean networks, map powers and attractors.

State encoding: node ``i`` (declaration order, from 0) is bit ``i`` of the
state, so the state label is the decimal value ``sum(x_i << i)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import MapTable, StateSpace
from .parser import BooleanNetwork, BoolExpr, Const, Not, Var

__all__ = ["MAX_NODES", "SizeCapExceeded", "evaluate", "compile_network", "iterate_map",
           "Attractors", "attractor_analysis"]

MAX_NODES = 24


class SizeCapExceeded(ValueError):
    pass


def evaluate(expr: BoolExpr, bits: dict[str, np.ndarray], size: int) -> np.ndarray:
    """Evaluate ``expr`` on boolean arrays, one entry per state."""
    if isinstance(expr, Const):
        return np.full(size, expr.value, dtype=bool)
    if isinstance(expr, Var):
        return bits[expr.name]
    if isinstance(expr, Not):
        return ~evaluate(expr.operand, bits, size)
    left = evaluate(expr.left, bits, size)
    right = evaluate(expr.right, bits, size)
    if expr.op == "AND":
        return left & right
    if expr.op == "OR":
        return left | right
    return left ^ right


def compile_network(net: BooleanNetwork) -> MapTable:
    if net.n > MAX_NODES:
        raise SizeCapExceeded(f"{net.n} nodes exceeds the cap of {MAX_NODES}")
    size = 1 << net.n
    states = np.arange(size, dtype=np.int64)
    bits = {name: ((states >> i) & 1).astype(bool) for i, name in enumerate(net.nodes)}
    image = np.zeros(size, dtype=np.int64)
    for i, rule in enumerate(net.rules):
        image |= evaluate(rule, bits, size).astype(np.int64) << i
    return MapTable(StateSpace.range(size), image)


def iterate_map(f: MapTable, t: int) -> MapTable:
    """``f`` composed with itself ``t`` times, by repeated squaring."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    result = np.arange(f.k)
    base = f.image
    while t:
        if t & 1:
            result = base[result]
        base = base[base]
        t >>= 1
    return MapTable(f.space, result)


@dataclass(frozen=True)
class Attractors:
    """Cycles of a deterministic map and the basin of each (same order)."""

    cycles: tuple[tuple[int, ...], ...]
    basins: tuple[frozenset[int], ...]
    cycle_of: tuple[int, ...]

    def basin_of_cycle_containing(self, state: int) -> frozenset[int]:
        for cyc, basin in zip(self.cycles, self.basins):
            if state in cyc:
                return basin
        raise KeyError(f"state {state} is not on a cycle")


def attractor_analysis(f: MapTable) -> Attractors:
    """Every state of a finite map falls into exactly one cycle.

    Cycles are listed by least element and written starting from it.
    """
    image = f.image.tolist()
    k = len(image)
    cycle_id = [-1] * k
    status = [0] * k  # 0 unseen, 1 on current path, 2 done
    raw_cycles: list[list[int]] = []
    for start in range(k):
        if status[start]:
            continue
        path = []
        x = start
        while status[x] == 0:
            status[x] = 1
            path.append(x)
            x = image[x]
        if status[x] == 1:
            cyc = path[path.index(x):]
            cid = len(raw_cycles)
            raw_cycles.append(cyc)
            for s in cyc:
                cycle_id[s] = cid
        cid = cycle_id[x]
        for s in path:
            status[s] = 2
            cycle_id[s] = cid
    order = sorted(range(len(raw_cycles)), key=lambda c: min(raw_cycles[c]))
    renumber = {old: new for new, old in enumerate(order)}
    cycles = []
    for c in order:
        cyc = raw_cycles[c]
        j = cyc.index(min(cyc))
        cycles.append(tuple(cyc[j:] + cyc[:j]))
    cycle_of = tuple(renumber[c] for c in cycle_id)
    basins = [set() for _ in cycles]
    for s, c in enumerate(cycle_of):
        basins[c].add(s)
    return Attractors(tuple(cycles), tuple(frozenset(b) for b in basins), cycle_of)
