"""End-to-end acceptance checks. Each test prints one PASS/FAIL line."""

import random
from fractions import Fraction as F
from functools import lru_cache

from listupdate import counterexamples as cx
from listupdate.delay_potential import verify_delay_run
from listupdate.engine import check_counter_invariants, check_window_structure, run
from listupdate.generators import (
    random_classical_instance,
    random_delay_instance,
    random_delay_trace,
    random_tw_instance,
    random_valid_tw_trace,
)
from listupdate.offline import brute_force_opt
from listupdate.potential import lemma_q_oracle, subset_value, truncated_witness, verify_tw
from listupdate.trace import cost, filter_non_triggers, normalize_serve_at_deadline, validate_time_windows


def report(capsys, n, ok, detail):
    with capsys.disabled():
        print(f"\ncriterion {n}: {'PASS' if ok else 'FAIL'} {detail}")
    assert ok, detail


@lru_cache(maxsize=None)
def tw_corpus():
    rng = random.Random(2024)
    out = []
    for _ in range(500):
        inst = random_tw_instance(rng, rng.randint(2, 5), rng.randint(1, 6))
        out.append((inst, brute_force_opt(inst)[1]))
    return out


@lru_cache(maxsize=None)
def delay_corpus():
    rng = random.Random(77)
    out = []
    for _ in range(300):
        inst = random_delay_instance(rng, rng.randint(1, 4), rng.randint(1, 5), max_breakpoints=8)
        out.append((inst, *brute_force_opt(inst)))
    return out


@lru_cache(maxsize=None)
def measured(which, n):
    return cx.measure(which, n)


def test_criterion_1_tw_end_to_end(capsys):
    worst, bad = F(0), []
    for inst, opt in tw_corpus():
        alg = cost(run(inst, "tw").alg_trace, inst).total
        if alg > 24 * opt:
            bad.append((inst, alg, opt))
        if opt:
            worst = max(worst, alg / opt)
    report(capsys, 1, not bad, f"instances=500 worst_ratio={worst} violations={len(bad)}")


def test_criterion_2_tw_per_event(capsys):
    rows = 0
    failures = []
    for inst, _ in tw_corpus():
        alg = run(inst, "tw").alg_trace
        core = filter_non_triggers(inst, alg)
        opt = normalize_serve_at_deadline(brute_force_opt(core)[0], core)
        ledger = verify_tw(core, alg, opt)
        rows += len(ledger.rows)
        if not ledger.ok:
            failures.append(ledger.first_violation() or ledger.problems)
    report(capsys, 2, not failures, f"rows={rows} violations={len(failures)}")


def test_criterion_3_delay_end_to_end(capsys):
    worst, bad, rows = F(0), [], 0
    for inst, trace, opt in delay_corpus():
        res = run(inst, "delay", trace, record=True)
        six_d = 6 * sum(res.d_total.values(), F(0))
        ledger = verify_delay_run(inst, trace, res)
        rows += len(ledger.rows)
        if six_d > 336 * opt or not ledger.ok:
            bad.append(inst)
        if opt:
            worst = max(worst, six_d / opt)
    report(capsys, 3, not bad, f"instances=300 rows={rows} worst_6d_over_opt={worst} violations={len(bad)}")


def test_criterion_4_lemma_q(capsys):
    parts, ok = [], True
    for a in (1, 2, 3):
        v, w = lemma_q_oracle(a, 64)
        tw = subset_value(a, truncated_witness(a))
        good = F(47, 2) * a <= v <= 24 * a and subset_value(a, w) == v and tw == 24 * a - 7 * F(4 * a, 2**9)
        ok &= good
        parts.append(f"a={a} max={v} witness={tw}")
    report(capsys, 4, ok, "; ".join(parts))


def test_criterion_5_counterexamples(capsys):
    a1 = measured("a1", 100)
    problems = []
    if (a1.alg_cost, a1.adversary_cost, a1.ratio) != (5000, 100, 50):
        problems.append(f"a1 n=100 gives {a1.alg_cost}/{a1.adversary_cost}")
    growth = {}
    for which in cx.ALGS:
        lo, hi, big = (F(9, 5), F(11, 5), 200) if which in ("a1", "a2", "a3") else (F(8, 5), F(12, 5), 400)
        small, large = measured(which, 100), measured(which, big)
        for r in (small, large):
            if r.adversary_cost != cx.closed_form_adversary_cost(which, r.n):
                problems.append(f"{which} n={r.n} adversary cost off closed form")
        g = large.ratio / small.ratio
        growth[which] = f"{float(g):.3f}"
        if not lo <= g <= hi:
            problems.append(f"{which} growth {float(g):.3f} outside [{float(lo)}, {float(hi)}]")
    detail = "growth " + " ".join(f"{k}={v}" for k, v in growth.items())
    report(capsys, 5, not problems, detail + ("" if not problems else " | " + "; ".join(problems)))


def test_criterion_6_window_structure(capsys):
    rng = random.Random(6)
    bad = 0
    for _ in range(1000):
        inst = random_tw_instance(rng, rng.randint(2, 16), rng.randint(1, 12))
        alg = run(inst, "tw").alg_trace
        if check_window_structure(filter_non_triggers(inst, alg), alg):
            bad += 1
    report(capsys, 6, bad == 0, f"instances=1000 violations={bad}")


def test_criterion_7_counter_invariants(capsys):
    rng = random.Random(70)
    bad = runs = snaps = 0
    for inst, trace, _ in delay_corpus()[:150]:
        for adv in (trace, random_delay_trace(rng, inst), None):
            res = run(inst, "delay", adv, record=True)
            runs += 1
            snaps += len(res.snapshots)
            bad += bool(check_counter_invariants(res))
    for _ in range(100):
        inst = random_delay_instance(rng, rng.randint(5, 8), rng.randint(1, 10))
        res = run(inst, "delay", record=True)
        runs += 1
        snaps += len(res.snapshots)
        bad += bool(check_counter_invariants(res))
    report(capsys, 7, bad == 0, f"runs={runs} snapshots={snaps} violations={bad}")


def test_criterion_8_mtf(capsys):
    rng = random.Random(8)
    worst, bad = F(0), 0
    for _ in range(200):
        inst = random_classical_instance(rng, rng.randint(2, 4), rng.randint(1, 6))
        opt = brute_force_opt(inst)[1]
        mtf = cost(run(inst, "mtf").alg_trace, inst).total
        bad += mtf > 4 * opt
        worst = max(worst, mtf / opt)
    report(capsys, 8, bad == 0, f"instances=200 worst_ratio={worst} violations={bad}")


def test_criterion_9_oracle_cross_checks(capsys):
    rng = random.Random(9)
    problems = []
    for i in range(1000):
        if i % 2:
            inst = random_tw_instance(rng, rng.randint(2, 5), rng.randint(1, 6))
            trace = random_valid_tw_trace(rng, inst)
            assert validate_time_windows(trace, inst) is None
            c = cost(trace, inst).total
            norm = normalize_serve_at_deadline(trace, inst)
            if validate_time_windows(norm, inst) is not None or cost(norm, inst).total > c:
                problems.append(f"normalization trial {i}")
            alg = run(inst, "tw").alg_trace
            if run(filter_non_triggers(inst, alg), "tw").alg_trace != alg:
                problems.append(f"filter trial {i}")
        else:
            inst = random_delay_instance(rng, rng.randint(1, 4), rng.randint(1, 5))
            trace = random_delay_trace(rng, inst)
            c = cost(trace, inst).total
        if brute_force_opt(inst)[1] > c:
            problems.append(f"opt above random trace in trial {i}")
    report(capsys, 9, not problems, f"trials=1000 problems={len(problems)}")
