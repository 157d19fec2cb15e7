"""JSON report fragments.  Rationals are written as ``"p/q"`` strings."""

from __future__ import annotations

import hashlib
import json
from fractions import Fraction
from pathlib import Path

from . import __version__
from .core import NoiseModel, format_rational
from .linear import ExponentResult
from .markov import SyncBounds, class_decomposition, induced_chain, is_synchronizing, two_point_chain
from .sync import M1Report, PartitionEstimate

TOOL = "rds-sync"


def file_digest(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _jsonable(obj):
    if isinstance(obj, Fraction):
        return format_rational(obj)
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def envelope(command: str, config: dict, fixtures: dict[str, str], result: dict) -> dict:
    return {
        "tool": TOOL,
        "version": __version__,
        "command": command,
        "config": _jsonable(config),
        "fixtures": dict(sorted(fixtures.items())),
        "result": _jsonable(result),
    }


def dumps(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def summarize(report: dict) -> str:
    """One line per scalar field of the result, read back from the report."""
    lines = [f"{report['tool']} {report['version']} {report['command']}"]

    def walk(prefix, obj):
        if isinstance(obj, dict):
            for key in sorted(obj):
                walk(f"{prefix}{key}.", obj[key])
        elif isinstance(obj, (str, int, float, bool)) or obj is None:
            lines.append(f"  {prefix[:-1]}: {obj}")

    walk("", report["result"])
    return "\n".join(lines) + "\n"


def labels_of(model: NoiseModel, states) -> list[str]:
    return [model.space.labels[s] for s in states]


def bounds_json(model: NoiseModel, bounds: SyncBounds, synchronizes: bool | None = None) -> dict:
    if synchronizes is None:
        synchronizes = is_synchronizing(model)
    lab = model.space.labels
    return {
        "recurrent_classes": [labels_of(model, c) for c in bounds.recurrent_classes],
        "recurrent_state_count": len(bounds.recurrent_states),
        "conflict_edges": [[lab[a], lab[b]] for a, b in bounds.conflict_edges],
        "clique_certificate": labels_of(model, bounds.clique),
        "clique_exact": bounds.clique_exact,
        "lower": bounds.lower,
        "upper": bounds.upper,
        "synchronizes": synchronizes,
    }


def induced_chain_json(model: NoiseModel) -> dict:
    chain = induced_chain(model)
    lab = model.space.labels
    return {lab[i]: {lab[j]: chain.transitions[i][j] for j in sorted(chain.transitions[i])}
            for i in range(chain.k)}


def two_point_json(model: NoiseModel) -> dict:
    chain = two_point_chain(model)
    dec = class_decomposition(chain)
    lab = model.space.labels
    off = [sorted(c) for c in dec.recurrent_classes if any(a != b for a, b in c)]
    return {
        "pair_count": len(chain.transitions),
        "recurrent_class_count": len(dec.recurrent_classes),
        "off_diagonal_recurrent_classes": [[[lab[a], lab[b]] for a, b in c] for c in off],
        "synchronizes": not off,
    }


def partition_json(model: NoiseModel, est: PartitionEstimate) -> dict:
    return {
        "partition": est.partition.labelled(model.space.labels),
        "m1": est.m1,
        "m2": est.m2,
        "n_used": est.n_used,
        "stable_for": est.stable_for,
        "certification": est.certification.value,
        "synchronizing": est.m1 == 1,
    }


def m1_json(model: NoiseModel, rep: M1Report) -> dict:
    return {
        "m1_histogram": {str(k): v for k, v in rep.histogram.items()},
        "modal_m1": rep.modal_m1,
        "certified_fraction": rep.certified_fraction,
        "trials": rep.trials,
        "n_max": rep.n_max,
        "stability_window": rep.stability_window,
        "lower": rep.lower,
        "upper": rep.upper,
        "partition_example": rep.partition_example.labelled(model.space.labels),
    }


def exponent_json(res: ExponentResult) -> dict:
    out = res.to_json()
    if res.bounds is not None:
        out["norm_bounds"] = [format_rational(res.bounds[0]), format_rational(res.bounds[1])]
    return out
