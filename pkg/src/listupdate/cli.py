"""Batch command line front end.

Exit codes: 0 success, 2 bad input (parse errors, guards, model mismatch),
3 a verification that ran and failed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import random
import sys
from pathlib import Path

from . import counterexamples as cx
from .delay_potential import DriftError, verify_delay
from .engine import run
from .generators import random_classical_instance, random_delay_instance, random_tw_instance
from .instance import DELAYS, TIME_WINDOWS, InstanceError, dumps, fmt, load, to_fraction
from .offline import GuardError, HorizonError, brute_force_opt
from .policies import POLICY_NAMES, PolicyError
from .potential import (
    LEDGER_HEADER,
    PreconditionError,
    lemma_q_oracle,
    lemma_q_integer,
    subset_value,
    truncated_witness,
    verify_tw,
)
from .trace import TraceError, cost, filter_non_triggers, load_trace, normalize_serve_at_deadline

OK, BAD_INPUT, FAILED = 0, 2, 3
COST_HEADER = ["policy", "access", "swap", "delay", "penalty", "total"]
MODELS = {"tw": TIME_WINDOWS, "delay": DELAYS}


class UsageError(Exception):
    pass


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _emit(text: str, path):
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def _load_instance(path):
    if not Path(path).exists():
        raise UsageError(f"{path}: no such file")
    return load(path)


# ------------------------------------------------------------ subcommands


def cmd_simulate(args) -> int:
    inst = _load_instance(args.instance)
    opt = load_trace(args.opt_trace, inst.n) if args.opt_trace else None
    res = run(inst, args.policy, opt)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "alg_trace.jsonl").write_text(res.alg_trace.to_jsonl())
    (out / "events.jsonl").write_text(res.events_jsonl())
    row = [res.policy] + cost(res.alg_trace, inst).row()
    (out / "cost.csv").write_text(_csv_text(COST_HEADER, [row]))
    print(",".join(row))
    return OK


def _report_ledger(ledger, args) -> int:
    if args.ledger:
        Path(args.ledger).write_text(ledger.to_csv())
    ratio = "inf" if ledger.opt_total == 0 else fmt(ledger.alg_total / ledger.opt_total) if ledger.alg_total else "0/1"
    print(
        f"rows={len(ledger.rows)} alg={fmt(ledger.alg_total)} opt={fmt(ledger.opt_total)} "
        f"ratio={ratio} bound={ledger.ratio_bound}"
    )
    if ledger.ok:
        return OK
    bad = ledger.first_violation()
    if bad is not None:
        print("first violating row:")
        sys.stdout.write(_csv_text(LEDGER_HEADER, [bad.as_list()]))
    if not ledger.phi_nonnegative:
        print("potential went negative")
    for p in ledger.problems:
        print(f"problem: {p}")
    return FAILED


def _first_difference(given, expected) -> str:
    a, b = list(given.actions), list(expected.actions)
    for i in range(max(len(a), len(b))):
        x = a[i].to_json() if i < len(a) else "<none>"
        y = b[i].to_json() if i < len(b) else "<none>"
        if x != y:
            return f"action {i}: given {x}, expected {y}"
    return "traces agree"


def _check_online(given, own):
    if given is not None and given != own:
        raise PreconditionError("online trace differs from the algorithm's own run; " + _first_difference(given, own))


def cmd_verify(args) -> int:
    inst = _load_instance(args.instance)
    model = MODELS[args.model]
    if inst.model != model:
        raise UsageError(f"--model {args.model} given for a {inst.model} instance")
    if args.brute_opt:
        if args.alg or args.opt:
            raise UsageError("--brute-opt computes both traces; do not pass trace files")
    elif not (args.alg and args.opt):
        raise UsageError("pass ALG_TRACE and OPT_TRACE, or use --brute-opt")
    given_alg = load_trace(args.alg, inst.n) if args.alg else None
    given_opt = load_trace(args.opt, inst.n) if args.opt else None

    try:
        if model == TIME_WINDOWS:
            alg = run(inst, "tw").alg_trace
            _check_online(given_alg, alg)
            core = filter_non_triggers(inst, alg)
            if args.brute_opt:
                opt, _ = brute_force_opt(core, unsafe=args.unsafe)
            else:
                opt = given_opt
                cost(opt, inst)  # raises on a window violation
            opt = normalize_serve_at_deadline(opt, core)
            ledger = verify_tw(core, alg, opt)
        else:
            if args.brute_opt:
                opt, _ = brute_force_opt(inst, unsafe=args.unsafe)
            else:
                opt = given_opt
            res = run(inst, "delay", opt)
            alg = res.alg_trace
            _check_online(given_alg, alg)
            ledger = verify_delay(inst, alg, res.events, opt)
    except (PreconditionError, DriftError, TraceError) as exc:
        print(f"verification failed: {exc}")
        return FAILED
    return _report_ledger(ledger, args)


def cmd_brute_opt(args) -> int:
    inst = _load_instance(args.instance)
    trace, c = brute_force_opt(inst, unsafe=args.unsafe)
    if args.trace_out:
        Path(args.trace_out).write_text(trace.to_jsonl())
    print(f"opt_cost={fmt(c)}")
    return OK


def cmd_counterexample(args) -> int:
    algs = cx.ALGS if args.alg == "all" else [args.alg]
    rows = []
    for a in algs:
        for n in args.n:
            r = cx.measure(a, n, args.eps)
            rows.append(
                [r.algorithm, r.n, fmt(r.eps), fmt(r.alg_cost), fmt(r.adversary_cost), fmt(r.ratio), f"{float(r.ratio):.6f}", r.expected_order]
            )
    _emit(_csv_text(cx.REPORT_HEADER, rows), args.csv)
    return OK


def cmd_lemma_q(args) -> int:
    a = args.a
    value, witness = lemma_q_oracle(a, args.grid)
    trunc = subset_value(a, truncated_witness(a, 10))
    row = [fmt(a), args.grid, fmt(value), fmt(24 * a), fmt(trunc), " ".join(fmt(x) for x in witness)]
    header = ["a", "grid", "max_value", "bound", "truncated_witness_value", "witness"]
    if args.a.denominator == 1:
        iv, _ = lemma_q_integer(int(a))
        header.append("integer_max")
        row.append(fmt(iv))
    _emit(_csv_text(header, [row]), args.csv)
    return OK if value <= 24 * a else FAILED


def cmd_gen(args) -> int:
    rng = random.Random(args.seed)
    if args.model == "tw":
        inst = random_tw_instance(rng, args.n, args.m)
    elif args.model == "classical":
        inst = random_classical_instance(rng, args.n, args.m)
    else:
        inst = random_delay_instance(rng, args.n, args.m)
    _emit(dumps(inst) + "\n", args.out)
    return OK


# ------------------------------------------------------------ parser


def _rational(s: str):
    try:
        return to_fraction(s)
    except InstanceError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _positive_int(s: str) -> int:
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="listupdate", description="List update with time windows and delays.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run an online policy and write its trace, event log and cost")
    s.add_argument("--policy", required=True, choices=POLICY_NAMES)
    s.add_argument("--instance", required=True)
    s.add_argument("--opt-trace", help="adversary trace to run alongside (labels delay ticks)")
    s.add_argument("--out", default=".", help="output directory")
    s.set_defaults(func=cmd_simulate)

    v = sub.add_parser("verify-potential", help="check the per-event potential inequalities")
    v.add_argument("--model", required=True, choices=sorted(MODELS))
    v.add_argument("instance")
    v.add_argument("alg", nargs="?", help="online trace (JSONL)")
    v.add_argument("opt", nargs="?", help="adversary trace (JSONL)")
    v.add_argument("--brute-opt", action="store_true", help="use the brute-force optimum as adversary")
    v.add_argument("--unsafe", action="store_true", help="lift the brute-force size guard")
    v.add_argument("--ledger", help="write the ledger CSV here")
    v.set_defaults(func=cmd_verify)

    b = sub.add_parser("brute-opt", help="exact offline optimum of a tiny instance")
    b.add_argument("instance")
    b.add_argument("--unsafe", action="store_true")
    b.add_argument("--trace-out")
    b.set_defaults(func=cmd_brute_opt)

    c = sub.add_parser("counterexample", help="ratio table for the lower-bound constructions")
    c.add_argument("--alg", required=True, choices=list(cx.ALGS) + ["all"])
    c.add_argument("--n", type=_positive_int, nargs="+", default=[100])
    c.add_argument("--eps", type=_rational, default=to_fraction("1/2"))
    c.add_argument("--csv")
    c.set_defaults(func=cmd_counterexample)

    q = sub.add_parser("lemma-q", help="maximise the doubling-subset objective on a grid")
    q.add_argument("--a", type=_rational, default=to_fraction(1))
    q.add_argument("--grid", type=_positive_int, default=64)
    q.add_argument("--csv")
    q.set_defaults(func=cmd_lemma_q)

    g = sub.add_parser("gen", help="random instance as JSON")
    g.add_argument("--model", required=True, choices=["tw", "delay", "classical"])
    g.add_argument("--n", type=_positive_int, required=True)
    g.add_argument("--m", type=_positive_int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out")
    g.set_defaults(func=cmd_gen)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (
        UsageError,
        InstanceError,
        TraceError,
        GuardError,
        HorizonError,
        PolicyError,
        cx.ConstructionError,
        OSError,
        ValueError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
