"""Command-line interface.

Exit codes: 0 success, 2 parse error, 3 validation error, 10 a result that is
inconclusive at the requested horizon (the partial report is still written),
70 internal invariant breach.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

from . import countable as cnt
from .boolnet import BoolNetSyntaxError, attractor_analysis, compile_network, parse_network
from .boolnet import p53 as p53mod
from .boolnet.network import SizeCapExceeded, iterate_map
from .core import ModelError, OmegaStream, load_model, parse_rational
from .linear import basis_difference, classify_exponent
from .markov import sync_bounds
from .report import (bounds_json, dumps, envelope, exponent_json, file_digest, induced_chain_json,
                     m1_json, partition_json, summarize, two_point_json)
from .sync import (DEFAULT_N_MAX, DEFAULT_STABILITY_WINDOW, Certification, RefinementViolation,
                   monte_carlo_m1, refine_chain)

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_VALIDATION = 3
EXIT_INCONCLUSIVE = 10
EXIT_INTERNAL = 70


class Inconclusive(Exception):
    def __init__(self, report: dict):
        super().__init__("inconclusive at the requested horizon")
        self.report = report


def _rational(text: str) -> Fraction:
    try:
        return parse_rational(text)
    except ModelError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def _common(p: argparse.ArgumentParser, *, model=False, seed=False, trials=False, horizon=False):
    if model:
        p.add_argument("--model", required=True, help="model JSON file")
    if seed:
        p.add_argument("--seed", type=int, required=True, help="RNG seed (required)")
    if trials:
        p.add_argument("--trials", type=_positive, default=200)
    if horizon:
        p.add_argument("--n-max", type=_positive, default=DEFAULT_N_MAX)
        p.add_argument("--stability-window", type=_positive, default=DEFAULT_STABILITY_WINDOW)
    p.add_argument("--out", help="write the JSON report here")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rds-sync", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    _common(sub.add_parser("partition", help="synchronized partition along one noise draw"),
            model=True, seed=True, horizon=True)
    _common(sub.add_parser("m1-dist", help="Monte-Carlo distribution of m1"),
            model=True, seed=True, trials=True, horizon=True)
    p = sub.add_parser("lyapunov", help="exponent verdicts along one noise draw")
    _common(p, model=True, seed=True)
    p.add_argument("--n-max", type=_positive, default=DEFAULT_N_MAX)
    p.add_argument("--vector", help="comma-separated rationals; default: every e_i - e_j")
    _common(sub.add_parser("markov", help="induced chain, recurrent classes and bounds on m1"), model=True)
    _common(sub.add_parser("two-point", help="two-point chain and the synchronization test"), model=True)

    bn = sub.add_parser("boolnet", help="Boolean-network tools")
    bsub = bn.add_subparsers(dest="action", required=True)
    for action in ("compile", "attractors"):
        q = bsub.add_parser(action)
        q.add_argument("file", help="network description")
        q.add_argument("--out")

    p = sub.add_parser("p53", help="end-to-end p53 reproduction")
    _common(p, seed=True, trials=True, horizon=True)
    p.add_argument("--p", type=_rational, default=p53mod.DEFAULT_P, help="stress probability p/q")
    p.add_argument("--tr", type=_positive, default=p53mod.DEFAULT_TR, help="repair steps T_r")
    p.add_argument("--model", help="p53 fixture JSON (default: bundled)")

    p = sub.add_parser("four-state", help="end-to-end four-state example")
    _common(p, seed=True, trials=True, horizon=True)
    p.add_argument("--model", help="model JSON (default: bundled)")

    p = sub.add_parser("countable", help="countable-state fixtures")
    p.add_argument("--model", help="fixture JSON (default: bundled suite)")
    p.add_argument("--n-max", type=_positive, default=60)
    p.add_argument("--out")
    return parser


def _config(args, keys) -> dict:
    out = {"command": args.command}
    for key in keys:
        val = getattr(args, key.replace("-", "_"), None)
        if val is not None:
            out[key] = val
    return out


def _load(path: str):
    return load_model(path), {Path(path).name: file_digest(path)}


def cmd_partition(args):
    model, fixtures = _load(args.model)
    est = refine_chain(model, OmegaStream.generated(model, args.seed), args.n_max, args.stability_window)
    result = partition_json(model, est)
    report = envelope("partition", _config(args, ["model", "seed", "n-max", "stability-window"]),
                      fixtures, result)
    if est.certification is Certification.INCONCLUSIVE:
        raise Inconclusive(report)
    return report


def _m1_report(command, args, model, fixtures, extra_config=(), extra=None):
    rep = monte_carlo_m1(model, args.trials, args.n_max, args.stability_window, args.seed)
    result = m1_json(model, rep)
    if extra:
        result = {**extra, **result}
    report = envelope(command, _config(args, ["model", "seed", "trials", "n-max", "stability-window",
                                              *extra_config]), fixtures, result)
    if Certification.INCONCLUSIVE.value in rep.certifications:
        raise Inconclusive(report)
    return report


def cmd_m1_dist(args):
    model, fixtures = _load(args.model)
    return _m1_report("m1-dist", args, model, fixtures)


def cmd_lyapunov(args):
    model, fixtures = _load(args.model)
    omega = OmegaStream.generated(model, args.seed)
    k = model.k
    lab = model.space.labels
    if args.vector:
        vec = [parse_rational(x) for x in args.vector.split(",")]
        if len(vec) != k:
            raise ModelError(f"vector has {len(vec)} entries, model has {k} states")
        result = {"vector": vec, **exponent_json(classify_exponent(model, omega, vec, args.n_max))}
    else:
        rows = []
        for i in range(k):
            for j in range(i + 1, k):
                res = classify_exponent(model, omega, basis_difference(k, i, j), args.n_max)
                rows.append({"pair": [lab[i], lab[j]], **exponent_json(res)})
        result = {"basis_differences": rows,
                  "minus_infinity_count": sum(r["kind"] == "MinusInfinity" for r in rows)}
    return envelope("lyapunov", _config(args, ["model", "seed", "n-max", "vector"]), fixtures, result)


def cmd_markov(args):
    model, fixtures = _load(args.model)
    result = {"transitions": induced_chain_json(model), **bounds_json(model, sync_bounds(model))}
    return envelope("markov", _config(args, ["model"]), fixtures, result)


def cmd_two_point(args):
    model, fixtures = _load(args.model)
    return envelope("two-point", _config(args, ["model"]), fixtures, two_point_json(model))


def cmd_boolnet(args):
    text = Path(args.file).read_text(encoding="utf-8")
    net = parse_network(text)
    table = compile_network(net)
    fixtures = {Path(args.file).name: file_digest(args.file)}
    if args.action == "compile":
        result = {"nodes": list(net.nodes), "states": table.k, "table": table.image.tolist()}
    else:
        att = attractor_analysis(table)
        result = {
            "nodes": list(net.nodes),
            "states": table.k,
            "attractors": [{"cycle": list(c), "length": len(c), "basin_size": len(b),
                            "basin": sorted(b)} for c, b in zip(att.cycles, att.basins)],
        }
    return envelope(f"boolnet {args.action}", {"command": "boolnet", "action": args.action,
                                               "file": args.file}, fixtures, result)


def _p53_structure(fx: p53mod.P53Fixture) -> dict:
    att = attractor_analysis(fx.stress)
    rest = attractor_analysis(fx.rest)
    collapse = iterate_map(fx.rest, p53mod.COLLAPSE_STEPS)
    return {
        "stress_cycles": [list(c) for c in att.cycles],
        "stress_basin_sizes": [len(b) for b in att.basins],
        "rest_cycles": [list(c) for c in rest.cycles],
        "rest_collapse_steps": p53mod.COLLAPSE_STEPS,
        "rest_collapse_image": sorted({collapse(s) for s in fx.long_basin}),
        "phase_blocks": [sorted(b) for b in p53mod.PHASE_BLOCKS],
        "long_basin": sorted(fx.long_basin),
    }


def cmd_p53(args):
    path = Path(args.model) if args.model else p53mod.fixture_path()
    fx = p53mod.load_fixture(path)
    model = p53mod.p53_model(args.p, args.tr, fx)
    bounds = sync_bounds(model)
    extra = {"structure": _p53_structure(fx), "bounds": bounds_json(model, bounds)}
    report = _m1_report("p53", args, model, {path.name: file_digest(path)}, ("p", "tr"), extra)
    res = report["result"]
    res["m1_equals_5"] = res["modal_m1"] == 5 and res["certified_fraction"] == 1.0
    return report


def cmd_four_state(args):
    path = Path(args.model) if args.model else p53mod.fixture_path("four_state.json")
    model = load_model(path)
    bounds = sync_bounds(model)
    extra = {"two_point": two_point_json(model), **bounds_json(model, bounds)}
    return _m1_report("four-state", args, model, {path.name: file_digest(path)}, (), extra)


def _countable_suite(n_max: int) -> tuple[dict, bool]:
    decay = []
    for lam in (Fraction(1, 2), Fraction(1, 3), Fraction(3, 4)):
        v = cnt.decaying_sum_zero_vector(lam)
        est = cnt.exponent_estimate(cnt.shift_down(), v, n_max)
        closed = all(norm == 2 * lam ** (n + 1) / (1 - lam) for n, norm in enumerate(est.norms, start=1))
        target = math.log(lam)
        lo, hi = est.interval if est.interval else (math.nan, math.nan)
        decay.append({"lambda": lam, "closed_form_exact": closed, **est.to_json(),
                       "contains_log_lambda": bool(lo <= target <= hi),
                       "relative_width": (hi - lo) / abs(target)})
    pairs = lambda m: [(i, j) for i in range(1, m + 1) for j in range(1, m + 1) if i < j]
    coll = cnt.check_theorem_b(cnt.collapse(), [cnt.unit_difference(i, j) for i, j in pairs(20)], n_max)
    shift = cnt.check_theorem_b(cnt.shift_down(), [cnt.unit_difference(i, j) for i, j in pairs(30)], n_max)
    two = cnt.check_theorem_b(cnt.shift_down(2), [cnt.unit_difference(i, j) for i, j in pairs(20)],
                              n_max, block_of=lambda i: i % 2)
    result = {
        "geometric_decay": decay,
        "collapse": {"all_annihilated_at_1": all(c.annihilated_at == 1 for c in coll.checks),
                     "single_block_holds": coll.single_block_holds},
        "shift_down": {"annihilation_matches_max_minus_1": all(
            c.annihilated_at == len(c.vector.head) - 1 for c in shift.checks),
            "single_block_holds": shift.single_block_holds},
        "two_block": {"blockwise_holds": two.blockwise_holds,
                      "single_block_holds": two.single_block_holds},
    }
    conclusive = all(r["verdict"] == "Limit" for r in decay)
    return result, conclusive


def cmd_countable(args):
    if args.model:
        with open(args.model, encoding="utf-8") as fh:
            data = json.load(fh)
        f = cnt.lazy_map_from_json(data["map"])
        v = cnt.tailed_vector_from_json(data["vector"])
        est = cnt.exponent_estimate(f, v, args.n_max)
        result = {**est.to_json(), "norms": list(est.norms), "in_sum_zero_space": v.in_sum_zero_space()}
        fixtures = {Path(args.model).name: file_digest(args.model)}
        conclusive = est.verdict is not cnt.Verdict.INCONCLUSIVE
    else:
        result, conclusive = _countable_suite(args.n_max)
        fixtures = {}
    report = envelope("countable", _config(args, ["model", "n-max"]), fixtures, result)
    if not conclusive:
        raise Inconclusive(report)
    return report


COMMANDS = {
    "partition": cmd_partition,
    "m1-dist": cmd_m1_dist,
    "lyapunov": cmd_lyapunov,
    "markov": cmd_markov,
    "two-point": cmd_two_point,
    "boolnet": cmd_boolnet,
    "p53": cmd_p53,
    "four-state": cmd_four_state,
    "countable": cmd_countable,
}


def _emit(report: dict, out: str | None) -> None:
    text = dumps(report)
    if out:
        Path(out).write_text(text, encoding="utf-8")
        sys.stdout.write(summarize(report))
    else:
        sys.stdout.write(text)


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    out = getattr(args, "out", None)
    try:
        report = COMMANDS[args.command](args)
    except Inconclusive as exc:
        _emit(exc.report, out)
        return EXIT_INCONCLUSIVE
    except (json.JSONDecodeError, BoolNetSyntaxError, UnicodeDecodeError) as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (RefinementViolation, AssertionError) as exc:
        print(f"internal invariant breach: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except (ModelError, SizeCapExceeded, ValueError, KeyError, OSError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    _emit(report, out)
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
