import itertools
import random
from fractions import Fraction as F

import pytest

from listupdate import counterexamples as cx
from listupdate.engine import run
from listupdate.generators import random_classical_instance, random_delay_instance, random_tw_instance
from listupdate.instance import DELAYS, TIME_WINDOWS, DelayFunction, delay_request, make_instance, prize_collecting, window_request
from listupdate.lists import ListState, inversions
from listupdate.offline import GuardError, brute_force_opt, brute_force_opt_delay, brute_force_opt_tw, scripted_adversary
from listupdate.trace import ACCESS, cost, validate_time_windows


def tw(n, *reqs):
    return make_instance(n, TIME_WINDOWS, [window_request(*r) for r in reqs])


@pytest.mark.parametrize("p", [1, 2, 3])
def test_single_request(p):
    inst = tw(3, (p, 0, 1))
    trace, c = brute_force_opt_tw(inst)
    assert c == p
    assert [(a.kind, a.arg, a.time) for a in trace.actions] == [(ACCESS, p, 1)]


def test_batching():
    trace, c = brute_force_opt_tw(tw(2, (1, 0, 2), (2, 1, 3)))
    assert c == 2
    assert len(trace) == 1


def test_three_request_batch_pays_farthest():
    # requests on positions 4, 3 and 1 with nested windows: one access of depth 4 at the first deadline
    inst = tw(4, (4, 0, 1), (3, 0, 3), (1, 0, 2))
    trace, c = brute_force_opt_tw(inst)
    assert c == 4
    assert [(a.time, a.arg) for a in trace.actions] == [(1, 4)]


def test_three_triggers_served_apart_by_algorithm_1():
    # triggers at positions 2, 5, 10 of 12 with deadlines in that order: 3+1, 9+4, 12+9
    inst = tw(12, (2, 0, 1), (10, 0, 3), (5, 0, 2))
    alg = run(inst, "tw").alg_trace
    assert cost(alg, inst).total == 38


def test_prize_collecting_skip_or_serve():
    skip = make_instance(2, DELAYS, [prize_collecting(1, 0, 0, F(1, 2))])
    assert brute_force_opt_delay(skip)[1] == F(1, 2)
    serve = make_instance(2, DELAYS, [prize_collecting(1, 0, 0, 3)])
    trace, c = brute_force_opt_delay(serve)
    assert c == 1 and trace.actions[0].arg == 1


def test_a1_construction_small():
    inst = cx.generate("a1", 3)
    trace, c = brute_force_opt(inst)
    # serving all three costs 3; skipping costs 1/2 + 3/2 + 5/2 = 9/2
    assert c == 3
    assert cost(trace, inst).total == 3


def test_delay_linear_tradeoff():
    # rate 1 on c2 from 0: accessing right away costs 2
    inst = make_instance(2, DELAYS, [delay_request(2, 0, DelayFunction.linear(0, 1))])
    assert brute_force_opt(inst)[1] == 2


def test_guards():
    with pytest.raises(GuardError):
        brute_force_opt(tw(6, (1, 0, 1)))
    with pytest.raises(GuardError):
        brute_force_opt(tw(2, *[(1, i, i) for i in range(7)]))
    _, c = brute_force_opt(tw(6, (6, 0, 1)), unsafe=True)
    assert c == 6


def test_scripted_adversary_reexport():
    assert scripted_adversary("a1", 5) == cx.scripted_adversary("a1", 5)


def _classical_dp(inst):
    # offline list update with paid exchanges: reorder freely between requests at
    # the Kendall tau distance, then pay the position of the requested element
    n = inst.n
    perms = [ListState(p) for p in itertools.permutations(range(1, n + 1))]
    start = ListState.identity(n)
    best = {p: inversions(start, p) for p in perms}
    for r in sorted(inst.requests, key=lambda r: r.deadline):
        best = {
            q: min(best[p] + inversions(p, q) for p in perms) + q.position(r.element)
            for q in perms
        }
    return min(best.values())


def test_matches_classical_dp():
    rng = random.Random(2)
    for _ in range(60):
        inst = random_classical_instance(rng, rng.randint(2, 4), rng.randint(1, 5))
        assert brute_force_opt(inst)[1] == _classical_dp(inst)


def test_opt_trace_is_valid_and_priced():
    rng = random.Random(9)
    for _ in range(100):
        inst = random_tw_instance(rng, rng.randint(2, 4), rng.randint(1, 5))
        trace, c = brute_force_opt(inst)
        assert validate_time_windows(trace, inst) is None
        assert cost(trace, inst).total == c
    for _ in range(60):
        inst = random_delay_instance(rng, rng.randint(1, 3), rng.randint(1, 4))
        trace, c = brute_force_opt(inst)
        assert cost(trace, inst).total == c
