"""Command-line entry point: one subcommand per simulation layer.

Every report echoes the resolved configuration and seed. JSON output is the
machine-readable contract; identical flags and seed produce identical bytes
(``bench-permanent`` excepted, since it reports wall time).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from . import boson, boxes, kcbs, protocols, security, toybit
from .errors import UnsupportedError

EXIT_OK, EXIT_INTERNAL, EXIT_USAGE = 0, 1, 2
U64_MAX = 2**64 - 1

EVE_KINDS = {"honest": "honest", "intercept": "intercept", "passive": "passive", "active": "active"}


def _seed(text: str) -> int:
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an unsigned 64-bit integer, got {text!r}") from None
    if not 0 <= value <= U64_MAX:
        raise argparse.ArgumentTypeError(f"seed {value} outside [0, 2^64)")
    return value


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _json_arg(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise argparse.ArgumentTypeError(f"invalid JSON: {exc}") from None


def _stream(seed: int, index: int = 0) -> np.random.Generator:
    """Independent generator number ``index`` derived from the run seed."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def _strategy(args) -> protocols.EveStrategy:
    if args.eve == "intercept":
        return protocols.EveStrategy.intercept_resend(args.f)
    if args.f is not None and args.f != 0.0:
        raise ValueError("--f only applies to --eve intercept")
    return protocols.EveStrategy(args.eve)


# --- subcommand handlers: each returns (result dict, csv rows or None) ---


def cmd_lkd_bb84(args):
    fs = args.sweep if args.sweep else [args.f]
    runs, rows = [], []
    for i, f in enumerate(fs):
        if args.sweep:
            strategy = protocols.EveStrategy.intercept_resend(f)
        else:
            strategy = _strategy(args)
        tr = protocols.run_bb84_lkd(args.n, strategy, args.check_fraction, args.threshold, rng=_stream(args.seed, i))
        report = tr.to_dict(seed=args.seed, emit_rounds=args.emit_rounds)
        report["summary"]["eve_information"] = protocols.eve_information(tr, strategy)
        runs.append(report)
        rows.append({"f": strategy.f, "eve": strategy.kind, **report["summary"]})
    result = runs[0] if not args.sweep else {"sweep": runs}
    return result, rows


def cmd_lkd_kcbs(args):
    strategy = _strategy(args)
    theory = kcbs.CycleTheory(args.cycle)
    tr = protocols.run_kcbs_lkd(
        args.n, strategy, args.check_fraction, args.threshold, rng=_stream(args.seed), theory=theory
    )
    report = tr.to_dict(seed=args.seed, emit_rounds=args.emit_rounds)
    report["summary"]["eve_information"] = protocols.eve_information(tr, strategy)
    report["summary"]["discard_rate"] = 1.0 - tr.sift_rate
    return report, [{"eve": strategy.kind, **report["summary"]}]


def cmd_threshold(args):
    rep = security.solve_threshold(args.tol)
    result = rep.to_dict()
    result["gap_at_f_star"] = security.key_rate_gap(rep.f_star)
    result["bob_information_at_f_star"] = security.bob_information(rep.f_star)
    result["eve_information_at_f_star"] = security.eve_information_rate(rep.f_star)
    # the source text also prints 0.48/4; report it next to the consistent reading
    result["e_max_readings"] = {"f_star_over_4": rep.e_max, "literal_0.48_over_4": 0.48 / 4}
    return result, [{"f_star": rep.f_star, "e_max": rep.e_max, "tolerance": args.tol}]


def cmd_kcbs_value(args):
    theory = kcbs.CycleTheory(args.cycle)
    result = {
        "n": theory.n,
        "labels": list(theory.labels),
        "rho_value": kcbs.kcbs_value(kcbs.rho_table(theory)),
        "noncontextual_bound": kcbs.best_noncontextual_value(theory.n),
    }
    if args.assignment:
        bits = [int(c) for c in args.assignment]
        result["assignment"] = args.assignment
        result["assignment_value"] = kcbs.kcbs_value(kcbs.assignment_table(theory, bits))
    if args.samples:
        rng = _stream(args.seed)
        total = 0.0
        per_edge = []
        for i, j in theory.edges:
            a, b = kcbs.rho_sample_pairs(theory, np.full(args.samples, i), np.full(args.samples, j), rng)
            corr = float(np.mean(np.where(a == b, 1.0, -1.0)))
            per_edge.append(corr)
            total += corr
        result["samples_per_edge"] = args.samples
        result["monte_carlo_edge_correlators"] = per_edge
        result["monte_carlo_value"] = total
    result["violates_bound"] = result["rho_value"] < result["noncontextual_bound"]
    return result, [{k: v for k, v in result.items() if not isinstance(v, list)}]


def cmd_assignment_search(args):
    n = args.cycle
    anti = kcbs.max_anticorrelated_edges(n)
    result = {
        "n": n,
        "exists_perfect_assignment": anti == n,
        "max_anticorrelated_edges": anti,
        "best_noncontextual_value": float(n - 2 * anti),
    }
    if n <= 12:
        result["optimal_assignments"] = ["".join(map(str, row)) for row in kcbs.optimal_assignments(n).tolist()]
    return result, [{k: v for k, v in result.items() if not isinstance(v, list)}]


def _behavior(args) -> boxes.Behavior:
    if args.behavior is not None:
        return boxes.Behavior.from_rows(args.behavior)
    if args.box == "deterministic":
        if args.mu is None or len(args.mu) != 4:
            raise ValueError("--box deterministic needs --mu with four bits, e.g. 0110")
        return boxes.make_behavior("deterministic", [int(c) for c in args.mu])
    return boxes.make_behavior(args.box)


def cmd_chsh(args):
    b = _behavior(args)
    result = {"behavior": b.to_rows(), "chsh": boxes.chsh_value(b), "chsh_variants": boxes.chsh_variants(b)}
    return result, [{"chsh": result["chsh"]}]


def cmd_local_check(args):
    b = _behavior(args)
    dec = boxes.is_local(b, args.tol)
    result = {
        "behavior": b.to_rows(),
        "chsh": boxes.chsh_value(b),
        "local": dec is not None,
        "facet_test": boxes.satisfies_local_facets(b, args.tol),
        "di_secure_precondition": dec is None,
    }
    if dec is not None:
        result["decomposition"] = [
            {"mu": "".join(map(str, mu)), "weight": w} for mu, w in dec.support(args.tol).items()
        ]
        result["reconstruction_error"] = float(np.max(np.abs(dec.reconstruct() - b.table)))
    return result, [{"local": result["local"], "chsh": result["chsh"]}]


def _epistemic(text: str) -> toybit.EpistemicState:
    try:
        return toybit.EpistemicState(frozenset(int(c) for c in text if c not in "{}, "))
    except ValueError as exc:
        raise ValueError(f"bad epistemic state {text!r}: {exc}") from None


def cmd_toy_teleport(args):
    state = _epistemic(args.state)
    rng = _stream(args.seed)
    recovered = {}
    messages = {}
    for _ in range(args.trials):
        out, bits = toybit.toy_teleport(state, rng)
        recovered[str(out)] = recovered.get(str(out), 0) + 1
        key = f"{bits[0]}{bits[1]}"
        messages[key] = messages.get(key, 0) + 1
    exhaustive = all(
        toybit.teleport_ontic(i, k)[1] == i for i in state.support for k in toybit.ONTIC
    )
    behaviors = {
        f"{a}/{b}": boxes.is_local(toybit.induced_behavior(a, b)) is not None
        for a in toybit.MEASUREMENTS
        for b in toybit.MEASUREMENTS
    }
    result = {
        "input": str(state),
        "trials": args.trials,
        "recovered_counts": dict(sorted(recovered.items())),
        "message_counts": dict(sorted(messages.items())),
        "all_recovered": set(recovered) == {str(state)},
        "exhaustive_ontic_check": exhaustive,
        "induced_behaviors_local": behaviors,
        "entangled_state_is_product": toybit.ENTANGLED.is_product(),
    }
    return result, [{"input": result["input"], "all_recovered": result["all_recovered"], "trials": args.trials}]


def _unitary(args) -> np.ndarray:
    if args.matrix is not None:
        return boson.parse_matrix(args.matrix)
    if args.unitary == "beamsplitter":
        return boson.beamsplitter()
    if args.unitary == "identity":
        return np.eye(args.modes, dtype=complex)
    return boson.random_unitary(args.modes, _stream(args.seed, 1))


def _dist_json(dist):
    return [{"output": list(out), "probability": p} for out, p in dist]


def cmd_boson_dist(args):
    u = _unitary(args)
    inp = tuple(args.input)
    result = {"unitary": boson.matrix_to_json(u), "input": list(inp), "bosonic": _dist_json(boson.exact_distribution(u, inp))}
    if args.distinguishable:
        result["distinguishable"] = _dist_json(boson.distinguishable_distribution(u, inp))
    rows = [{"output": " ".join(map(str, d["output"])), "bosonic": d["probability"]} for d in result["bosonic"]]
    if args.distinguishable:
        for row, d in zip(rows, result["distinguishable"]):
            row["distinguishable"] = d["probability"]
    return result, rows


def cmd_boson_sample(args):
    u = _unitary(args)
    inp = tuple(args.input)
    dist, samples = boson.exact_distribution_and_sample(u, inp, args.k, _stream(args.seed))
    counts = {}
    for s in samples:
        counts[s] = counts.get(s, 0) + 1
    result = {
        "unitary": boson.matrix_to_json(u),
        "input": list(inp),
        "k": args.k,
        "distribution": _dist_json(dist),
        "counts": [{"output": list(out), "count": counts.get(out, 0)} for out, _ in dist],
    }
    if args.emit_samples:
        result["samples"] = [list(s) for s in samples]
    rows = [
        {"output": " ".join(map(str, out)), "probability": p, "frequency": counts.get(out, 0) / max(args.k, 1)}
        for out, p in dist
    ]
    return result, rows


def cmd_permanent(args):
    m = boson.parse_matrix(args.matrix)
    result = {"matrix": boson.matrix_to_json(m)}
    if args.method in ("ryser", "both"):
        p = boson.permanent_ryser(m)
        result["ryser"] = [p.real, p.imag]
    if args.method in ("naive", "both"):
        p = boson.permanent_naive(m)
        result["naive"] = [p.real, p.imag]
    result["permanent"] = result.get("ryser", result.get("naive"))
    return result, [{"re": result["permanent"][0], "im": result["permanent"][1]}]


def cmd_bench_permanent(args):
    rows = boson.bench_permanent(args.sizes, _stream(args.seed), repeats=args.repeats)
    ratios = [b / a for (_, a), (_, b) in zip(rows, rows[1:]) if a > 0]
    result = {"timings": [{"n": n, "seconds": t} for n, t in rows], "growth_ratios": ratios}
    return result, [{"n": n, "wall_time": t} for n, t in rows]


# --- parser ---


def _common(p: argparse.ArgumentParser):
    p.add_argument("--seed", type=_seed, default=0, help="unsigned 64-bit seed (default 0)")
    p.add_argument("--format", choices=("json", "csv", "text"), default="json")


def _box_args(p):
    p.add_argument("--box", choices=("uniform", "pr", "tsirelson", "deterministic"), default="pr")
    p.add_argument("--mu", help="deterministic strategy bits a0 a1 b0 b1, e.g. 0110")
    p.add_argument("--behavior", type=_json_arg, help="inline 4x4 JSON table keyed by (x,y) then (a,b)")


def _boson_args(p):
    p.add_argument("--matrix", type=_json_arg, help="JSON matrix of [re, im] pairs")
    p.add_argument("--unitary", choices=("beamsplitter", "random", "identity"), default="beamsplitter")
    p.add_argument("--modes", type=int, default=2, help="mode count for random/identity unitaries")
    p.add_argument("--input", type=_int_list, default=[1, 1], help="input occupation, e.g. 1,1")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nonclassical", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("lkd-bb84", help="gbit local key distribution")
    p.add_argument("--n", type=int, default=100_000)
    p.add_argument("--eve", choices=tuple(EVE_KINDS), default="honest")
    p.add_argument("--f", type=float, default=None, help="intercept fraction (default 1.0 for --eve intercept)")
    p.add_argument("--check-fraction", type=float, default=protocols.DEFAULT_CHECK_FRACTION)
    p.add_argument("--threshold", type=float, default=protocols.DEFAULT_QBER_THRESHOLD)
    p.add_argument("--sweep", type=_float_list, help="comma-separated intercept fractions; one run each")
    p.add_argument("--emit-rounds", action="store_true")
    p.set_defaults(handler=cmd_lkd_bb84)

    p = sub.add_parser("lkd-kcbs", help="contextual local key distribution")
    p.add_argument("--n", type=int, default=100_000)
    p.add_argument("--eve", choices=("honest", "passive", "active"), default="honest")
    p.add_argument("--f", type=float, default=None, help=argparse.SUPPRESS)
    p.add_argument("--cycle", type=int, default=5)
    p.add_argument("--check-fraction", type=float, default=protocols.DEFAULT_CHECK_FRACTION)
    p.add_argument("--threshold", type=float, default=protocols.DEFAULT_KCBS_THRESHOLD)
    p.add_argument("--emit-rounds", action="store_true")
    p.set_defaults(handler=cmd_lkd_kcbs)

    p = sub.add_parser("threshold", help="tolerable intercept fraction and error rate")
    p.add_argument("--tol", type=float, default=1e-6)
    p.set_defaults(handler=cmd_threshold)

    p = sub.add_parser("kcbs-value", help="cycle inequality value of rho and of an assignment")
    p.add_argument("--cycle", type=int, default=5)
    p.add_argument("--assignment", help="bit string giving each observable a value, e.g. 01010")
    p.add_argument("--samples", type=int, default=0, help="Monte-Carlo samples per edge (0 = analytic only)")
    p.set_defaults(handler=cmd_kcbs_value)

    p = sub.add_parser("assignment-search", help="brute-force noncontextual assignments on a cycle")
    p.add_argument("--cycle", type=int, default=5)
    p.set_defaults(handler=cmd_assignment_search)

    p = sub.add_parser("chsh", help="CHSH value of a behavior")
    _box_args(p)
    p.set_defaults(handler=cmd_chsh)

    p = sub.add_parser("local-check", help="local polytope membership of a behavior")
    _box_args(p)
    p.add_argument("--tol", type=float, default=boxes.DEFAULT_TOL)
    p.set_defaults(handler=cmd_local_check)

    p = sub.add_parser("toy-teleport", help="teleport a toy-bit epistemic state")
    p.add_argument("--state", default="12", help="support of the input state, e.g. 13 or 1234")
    p.add_argument("--trials", type=int, default=1000)
    p.set_defaults(handler=cmd_toy_teleport)

    p = sub.add_parser("boson-dist", help="exact output distribution of a linear interferometer")
    _boson_args(p)
    p.add_argument("--distinguishable", action="store_true", help="also emit the distinguishable-photon contrast")
    p.set_defaults(handler=cmd_boson_dist)

    p = sub.add_parser("boson-sample", help="sample outputs from the exact bosonic distribution")
    _boson_args(p)
    p.add_argument("--k", type=int, default=1000)
    p.add_argument("--emit-samples", action="store_true")
    p.set_defaults(handler=cmd_boson_sample)

    p = sub.add_parser("permanent", help="matrix permanent")
    p.add_argument("--matrix", type=_json_arg, required=True, help="JSON matrix of [re, im] pairs")
    p.add_argument("--method", choices=("ryser", "naive", "both"), default="ryser")
    p.set_defaults(handler=cmd_permanent)

    p = sub.add_parser("bench-permanent", help="time the Ryser kernel (output not reproducible)")
    p.add_argument("--sizes", type=_int_list, default=list(range(16, 23)))
    p.add_argument("--repeats", type=int, default=1)
    p.set_defaults(handler=cmd_bench_permanent)

    for action in sub.choices.values():
        _common(action)
    return parser


def _resolve(args) -> dict:
    config = {k: v for k, v in vars(args).items() if k not in ("handler",)}
    if config.get("eve") == "intercept" and config.get("f") is None:
        args.f = config["f"] = 1.0
    return config


def _render(fmt: str, report: dict, rows) -> str:
    if fmt == "json":
        return json.dumps(report, indent=2)
    if fmt == "csv":
        buf = io.StringIO()
        fields = []
        for row in rows:
            fields.extend(k for k in row if k not in fields)
        fields.append("seed")
        writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({**row, "seed": report["seed"]})
        return buf.getvalue().rstrip("\n")
    lines = [f"{report['command']} (seed {report['seed']})"]
    for row in rows:
        lines.append("  " + ", ".join(f"{k}={v}" for k, v in row.items()))
    return "\n".join(lines)


def dispatch(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    config = _resolve(args)
    try:
        result, rows = args.handler(args)
    except (ValueError, UnsupportedError) as exc:
        print(f"{parser.prog} {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001 - report, then signal internal failure
        print(f"{parser.prog} {args.command}: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    report = {"command": args.command, "seed": args.seed, "config": config, "result": result}
    print(_render(args.format, report, rows), file=out)
    return EXIT_OK


def main():
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
