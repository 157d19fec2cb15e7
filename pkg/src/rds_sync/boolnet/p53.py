"""Bundled p53 fixtures: the stress map A, the rest map B, and the two-map noise model.

Under noise, each step applies ``C = A^tr`` (a stress pulse followed by ``tr``
repair steps) with probability ``p`` and ``B`` otherwise.

The tables are checked at load time against every published fact about them:
the two cycles of A, their basin sizes, the four phase blocks of the short
cycle's basin, the collapse of the long cycle to state 6 under B within 14
steps, and coherent transport of the phase blocks by both maps.  A fixture
failing any check is refused.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from pathlib import Path

from ..core import MapTable, ModelError, NoiseModel, StateSpace
from .network import attractor_analysis, iterate_map

__all__ = [
    "FixtureError",
    "LONG_CYCLE",
    "SHORT_CYCLE",
    "PHASE_BLOCKS",
    "REST_STATE",
    "COLLAPSE_STEPS",
    "DEFAULT_P",
    "DEFAULT_TR",
    "P53Fixture",
    "load_fixture",
    "validate_fixture",
    "p53_model",
    "fixture_path",
]

LONG_CYCLE = (1, 5, 7, 6, 22, 30, 26, 24, 25, 9)
SHORT_CYCLE = (0, 20, 31, 11)
# blocks of the short cycle's basin, one per cycle phase
PHASE_BLOCKS = (
    frozenset({31, 29, 21, 23}),
    frozenset({0, 2, 8, 10}),
    frozenset({11, 15}),
    frozenset({20, 16}),
)
REST_STATE = 6
COLLAPSE_STEPS = 14
LONG_BASIN_SIZE = 20
SHORT_BASIN_SIZE = 12
DEFAULT_P = Fraction(1, 20)
DEFAULT_TR = 5


class FixtureError(ModelError):
    pass


@dataclass(frozen=True)
class P53Fixture:
    stress: MapTable  # A
    rest: MapTable  # B

    @property
    def space(self) -> StateSpace:
        return self.stress.space

    @property
    def long_basin(self) -> frozenset[int]:
        return frozenset(range(self.space.k)) - frozenset().union(*PHASE_BLOCKS)


def fixture_path(name: str = "p53.json") -> Path:
    return Path(str(resources.files("rds_sync").joinpath("data", name)))


def _next_block(f: MapTable) -> dict[int, int]:
    """Where ``f`` sends each phase block, or raise if a block is split."""
    out = {}
    for i, block in enumerate(PHASE_BLOCKS):
        targets = {f(s) for s in block}
        owners = {j for j, b in enumerate(PHASE_BLOCKS) if targets & b}
        if len(owners) != 1 or not targets <= PHASE_BLOCKS[owners.copy().pop()]:
            raise FixtureError(f"block {sorted(block)} is not carried into a single block")
        out[i] = owners.pop()
    return out


def validate_fixture(fx: P53Fixture) -> None:
    A, B = fx.stress, fx.rest
    if A.k != 32:
        raise FixtureError("p53 fixture must have 32 states")
    att = attractor_analysis(A)
    if set(att.cycles) != {SHORT_CYCLE, LONG_CYCLE}:
        raise FixtureError(f"map A has cycles {att.cycles}, expected the two published cycles")
    long_basin = att.basin_of_cycle_containing(LONG_CYCLE[0])
    short_basin = att.basin_of_cycle_containing(SHORT_CYCLE[0])
    if len(long_basin) != LONG_BASIN_SIZE or len(short_basin) != SHORT_BASIN_SIZE:
        raise FixtureError(f"basin sizes {len(long_basin)}/{len(short_basin)}, expected 20/12")
    if short_basin != frozenset().union(*PHASE_BLOCKS):
        raise FixtureError("short-cycle basin differs from the union of the phase blocks")

    if B(REST_STATE) != REST_STATE:
        raise FixtureError("map B must fix state 6")
    for a, b in zip(SHORT_CYCLE, SHORT_CYCLE[1:] + SHORT_CYCLE[:1]):
        if A(a) != b or B(a) != b:
            raise FixtureError("short cycle must be kept by both maps")
    batt = attractor_analysis(B)
    if set(batt.cycles) != {SHORT_CYCLE, (REST_STATE,)}:
        raise FixtureError(f"map B has cycles {batt.cycles}, expected state 6 and the short cycle")
    collapse = iterate_map(B, COLLAPSE_STEPS)
    if {collapse(s) for s in long_basin} != {REST_STATE}:
        raise FixtureError("B^14 does not send the long-cycle basin to state 6")

    expected = {1: 3, 3: 0, 0: 2, 2: 1}  # follows 0 -> 20 -> 31 -> 11
    for f, name in ((A, "A"), (B, "B")):
        if _next_block(f) != expected:
            raise FixtureError(f"map {name} does not rotate the phase blocks along the short cycle")
        settled = iterate_map(f, 2 * f.k)
        for block in PHASE_BLOCKS:
            if len({settled(s) for s in block}) != 1:
                raise FixtureError(f"block {sorted(block)} does not merge under map {name}")


def load_fixture(path: str | Path | None = None) -> P53Fixture:
    path = fixture_path() if path is None else Path(path)
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    try:
        k = int(data["states"])
        space = StateSpace.range(k)
        fx = P53Fixture(MapTable(space, data["A"]), MapTable(space, data["B"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise FixtureError(f"malformed p53 fixture: {exc}") from exc
    validate_fixture(fx)
    return fx


def p53_model(p: Fraction = DEFAULT_P, tr: int = DEFAULT_TR,
              fixture: P53Fixture | None = None) -> NoiseModel:
    """Noise model ``{C: p, B: 1 - p}`` with ``C = A^tr``."""
    p = Fraction(p)
    if not 0 <= p <= 1:
        raise ModelError("p must lie in [0, 1]")
    if tr < 1:
        raise ModelError("tr must be at least 1")
    fx = fixture or load_fixture()
    return NoiseModel((iterate_map(fx.stress, tr), fx.rest), (p, 1 - p), ("C", "B"))
