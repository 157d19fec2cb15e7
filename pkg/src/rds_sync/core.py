"""State spaces, deterministic maps, i.i.d. noise models and noise realizations.

A random dynamical system on a finite state set is driven by a sequence of
symbols ``omega = (w_0, w_1, ...)``; each symbol selects a self-map from a
finite alphabet and the n-step map is ``A(n) = f[w_{n-1}] o ... o f[w_0]``.

Random numbers come from numpy's Philox counter-based generator.  Symbols are
drawn in fixed-size blocks, block ``b`` of a stream keyed by ``(seed, key)``
being generated from ``SeedSequence(seed, spawn_key=key + (b,))``.  Reading any
position is therefore a pure function of ``(seed, key, position)`` and
reproducible across platforms.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache, reduce
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

__all__ = [
    "ModelError",
    "StateSpace",
    "MapTable",
    "NoiseModel",
    "OmegaStream",
    "CocyclePrefix",
    "compose",
    "cocycle_apply",
    "iter_cocycle",
    "shift",
    "sample_omega",
    "parse_rational",
    "format_rational",
    "load_model",
    "model_from_dict",
    "model_to_dict",
]

BLOCK = 1024


class ModelError(ValueError):
    """Raised when a state space, map or noise model violates its invariants."""


def parse_rational(text: str | int | Fraction) -> Fraction:
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int):
        return Fraction(text)
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ModelError(f"not a rational number: {text!r}") from exc


def format_rational(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class StateSpace:
    labels: tuple[str, ...]

    def __post_init__(self):
        labels = tuple(str(s) for s in self.labels)
        object.__setattr__(self, "labels", labels)
        if not labels:
            raise ModelError("state space must contain at least one state")
        if len(set(labels)) != len(labels):
            raise ModelError("state labels must be distinct")
        object.__setattr__(self, "_index", {s: i for i, s in enumerate(labels)})

    @classmethod
    def range(cls, k: int) -> "StateSpace":
        return cls(tuple(str(i) for i in range(k)))

    @property
    def k(self) -> int:
        return len(self.labels)

    def index(self, label) -> int:
        try:
            return self._index[str(label)]
        except KeyError:
            raise ModelError(f"unknown state label {label!r}") from None

    def __len__(self) -> int:
        return len(self.labels)


class MapTable:
    """A total self-map of a finite state space, stored as an index table.

    ``image[j]`` is the index of the image of state ``j``.  The table is a
    read-only numpy array.
    """

    __slots__ = ("space", "image")

    def __init__(self, space: StateSpace, image):
        arr = np.array(image, dtype=np.int64).reshape(-1)
        if arr.shape[0] != space.k:
            raise ModelError(f"map table has {arr.shape[0]} entries, state space has {space.k}")
        if arr.size and (arr.min() < 0 or arr.max() >= space.k):
            raise ModelError("map table image out of range")
        arr.setflags(write=False)
        self.space = space
        self.image = arr

    @classmethod
    def identity(cls, space: StateSpace) -> "MapTable":
        return cls(space, np.arange(space.k))

    @classmethod
    def constant(cls, space: StateSpace, target: int) -> "MapTable":
        return cls(space, np.full(space.k, target))

    @classmethod
    def from_labels(cls, space: StateSpace, images: Sequence) -> "MapTable":
        return cls(space, [space.index(s) for s in images])

    @property
    def k(self) -> int:
        return self.space.k

    def __call__(self, j: int) -> int:
        return int(self.image[j])

    def __eq__(self, other) -> bool:
        if not isinstance(other, MapTable):
            return NotImplemented
        return self.space == other.space and np.array_equal(self.image, other.image)

    def __hash__(self) -> int:
        return hash((self.space, self.image.tobytes()))

    def __repr__(self) -> str:
        return f"MapTable({self.image.tolist()})"

    def is_identity(self) -> bool:
        return bool(np.array_equal(self.image, np.arange(self.k)))

    def labels(self) -> list[str]:
        return [self.space.labels[i] for i in self.image]


def compose(f: MapTable, g: MapTable) -> MapTable:
    """Return ``f o g`` (apply ``g`` first)."""
    if f.space != g.space:
        raise ModelError("cannot compose maps over different state spaces")
    return MapTable(f.space, f.image[g.image])


@dataclass(frozen=True)
class NoiseModel:
    """Finite alphabet of maps with an exact probability vector."""

    alphabet: tuple[MapTable, ...]
    probs: tuple[Fraction, ...]
    names: tuple[str, ...] = ()

    def __post_init__(self):
        alphabet = tuple(self.alphabet)
        probs = tuple(parse_rational(p) for p in self.probs)
        if not alphabet:
            raise ModelError("noise model needs at least one map")
        if len(probs) != len(alphabet):
            raise ModelError("one probability per map is required")
        space = alphabet[0].space
        if any(f.space != space for f in alphabet):
            raise ModelError("all maps must share one state space")
        if any(p < 0 for p in probs):
            raise ModelError("probabilities must be nonnegative")
        if sum(probs) != 1:
            raise ModelError(f"probabilities sum to {sum(probs)}, not 1")
        names = tuple(self.names) or tuple(f"f{i}" for i in range(len(alphabet)))
        if len(names) != len(alphabet) or len(set(names)) != len(names):
            raise ModelError("map names must be distinct, one per map")
        object.__setattr__(self, "alphabet", alphabet)
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "names", names)

    @classmethod
    def uniform(cls, alphabet: Sequence[MapTable], names: Sequence[str] = ()) -> "NoiseModel":
        n = len(alphabet)
        return cls(tuple(alphabet), tuple(Fraction(1, n) for _ in range(n)), tuple(names))

    @property
    def space(self) -> StateSpace:
        return self.alphabet[0].space

    @property
    def k(self) -> int:
        return self.space.k

    def support(self) -> list[int]:
        """Indices of maps carrying positive probability."""
        return [i for i, p in enumerate(self.probs) if p > 0]

    def thresholds(self) -> tuple[int, tuple[int, ...]]:
        """Common denominator and cumulative integer thresholds of the probabilities."""
        denom = reduce(math.lcm, (p.denominator for p in self.probs), 1)
        cum, acc = [], 0
        for p in self.probs:
            acc += p.numerator * (denom // p.denominator)
            cum.append(acc)
        return denom, tuple(cum)


@lru_cache(maxsize=4096)
def _block(seed: int, key: tuple[int, ...], block: int, denom: int,
           cum: tuple[int, ...]) -> np.ndarray:
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=key + (block,))))
    if denom < 2**62:
        draws = rng.integers(0, denom, size=BLOCK, dtype=np.int64)
        out = np.searchsorted(np.asarray(cum, dtype=np.int64), draws, side="right")
    else:
        # huge denominators: fall back to float thresholds
        u = rng.random(BLOCK)
        out = np.searchsorted(np.asarray([c / denom for c in cum]), u, side="right")
    out = np.minimum(out, len(cum) - 1).astype(np.int64)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class OmegaStream:
    """A noise realization: an explicit finite symbol prefix or a seeded i.i.d. stream.

    ``offset`` is the number of left shifts applied.  Explicit streams raise
    ``IndexError`` when read past their end.
    """

    explicit: tuple[int, ...] | None = None
    model: NoiseModel | None = field(default=None, compare=False)
    seed: int | None = None
    key: tuple[int, ...] = ()
    offset: int = 0

    def __post_init__(self):
        if (self.explicit is None) == (self.seed is None):
            raise ModelError("stream needs exactly one of an explicit prefix or a seed")
        if self.seed is not None and self.model is None:
            raise ModelError("generated streams need a noise model")
        if self.offset < 0:
            raise ModelError("offset must be nonnegative")
        if self.explicit is not None:
            object.__setattr__(self, "explicit", tuple(int(s) for s in self.explicit))

    @classmethod
    def from_symbols(cls, symbols: Sequence[int]) -> "OmegaStream":
        return cls(explicit=tuple(symbols))

    @classmethod
    def generated(cls, model: NoiseModel, seed: int, key: Sequence[int] = ()) -> "OmegaStream":
        return cls(model=model, seed=int(seed), key=tuple(int(x) for x in key))

    @property
    def length(self) -> int | None:
        if self.explicit is None:
            return None
        return max(len(self.explicit) - self.offset, 0)

    def symbol(self, n: int) -> int:
        if n < 0:
            raise IndexError("negative stream position")
        pos = n + self.offset
        if self.explicit is not None:
            return self.explicit[pos]
        denom, cum = self.model.thresholds()
        return int(_block(self.seed, self.key, pos // BLOCK, denom, cum)[pos % BLOCK])

    def symbols(self, start: int, stop: int) -> np.ndarray:
        """Symbols at positions ``start..stop-1`` as an int array."""
        if start < 0 or stop < start:
            raise IndexError("bad stream slice")
        a, b = start + self.offset, stop + self.offset
        if self.explicit is not None:
            if b > len(self.explicit):
                raise IndexError("read past the end of an explicit stream")
            return np.asarray(self.explicit[a:b], dtype=np.int64)
        denom, cum = self.model.thresholds()
        parts = []
        for blk in range(a // BLOCK, (b - 1) // BLOCK + 1 if b > a else a // BLOCK):
            arr = _block(self.seed, self.key, blk, denom, cum)
            lo = max(a - blk * BLOCK, 0)
            hi = min(b - blk * BLOCK, BLOCK)
            parts.append(arr[lo:hi])
        return np.concatenate(parts) if parts else np.zeros(0, dtype=np.int64)

    def prefix(self, length: int) -> tuple[int, ...]:
        return tuple(int(s) for s in self.symbols(0, length))


def shift(omega: OmegaStream, m: int) -> OmegaStream:
    """Left shift by ``m`` positions."""
    if m < 0:
        raise ValueError("shift amount must be nonnegative")
    return OmegaStream(explicit=omega.explicit, model=omega.model, seed=omega.seed,
                       key=omega.key, offset=omega.offset + m)


def sample_omega(model: NoiseModel, seed: int, length: int) -> OmegaStream:
    """Explicit prefix of ``length`` i.i.d. draws from the model, deterministic per seed."""
    if length < 0:
        raise ValueError("length must be nonnegative")
    return OmegaStream.from_symbols(OmegaStream.generated(model, seed).prefix(length))


@dataclass(frozen=True)
class CocyclePrefix:
    steps: int
    composed: MapTable


def iter_cocycle(model: NoiseModel, omega: OmegaStream, n_max: int | None = None,
                 chunk: int = 256) -> Iterator[CocyclePrefix]:
    """Yield ``A(0), A(1), ...`` extending the composed table by one pass per step."""
    space = model.space
    current = np.arange(space.k)
    tables = [f.image for f in model.alphabet]
    yield CocyclePrefix(0, MapTable(space, current))
    n = 0
    while n_max is None or n < n_max:
        stop = chunk if n_max is None else min(chunk, n_max - n)
        for w in omega.symbols(n, n + stop):
            current = tables[w][current]
            n += 1
            yield CocyclePrefix(n, MapTable(space, current))


def cocycle_apply(model: NoiseModel, omega: OmegaStream, n: int) -> CocyclePrefix:
    if n < 0:
        raise ValueError("n must be nonnegative")
    last = None
    for last in iter_cocycle(model, omega, n):
        pass
    return last


def model_from_dict(data: dict) -> NoiseModel:
    """Build a model from ``{"states": [...], "maps": {name: [labels]}, "probs": {name: "p/q"}}``."""
    try:
        space = StateSpace(tuple(data["states"]))
        maps = data["maps"]
        probs = data["probs"]
    except (KeyError, TypeError) as exc:
        raise ModelError(f"malformed model: missing {exc}") from exc
    if set(maps) != set(probs):
        raise ModelError("maps and probs must name the same maps")
    names = tuple(maps)
    alphabet = tuple(MapTable.from_labels(space, maps[name]) for name in names)
    return NoiseModel(alphabet, tuple(parse_rational(probs[name]) for name in names), names)


def model_to_dict(model: NoiseModel) -> dict:
    return {
        "states": list(model.space.labels),
        "maps": {name: f.labels() for name, f in zip(model.names, model.alphabet)},
        "probs": {name: format_rational(p) for name, p in zip(model.names, model.probs)},
    }


def load_model(path: str | Path) -> NoiseModel:
    with open(path, encoding="utf-8") as fh:
        return model_from_dict(json.load(fh))
