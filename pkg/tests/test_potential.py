import random
from dataclasses import replace
from fractions import Fraction as F

import pytest

from listupdate.delay_potential import DriftError, verify_delay, verify_delay_run
from listupdate.engine import PREFIX, run
from listupdate.generators import random_delay_instance, random_delay_trace
from listupdate.instance import DELAYS, TIME_WINDOWS, DelayFunction, delay_request, make_instance, window_request
from listupdate.offline import brute_force_opt
from listupdate.potential import (
    LEDGER_HEADER,
    PreconditionError,
    lemma_q_integer,
    lemma_q_oracle,
    psi,
    psi_properties_check,
    subset_value,
    truncated_witness,
    verify_tw,
)
from listupdate.trace import ActionTrace, access, swap


def tw(n, *reqs):
    return make_instance(n, TIME_WINDOWS, [window_request(*r) for r in reqs])


@pytest.mark.parametrize("x,y,v", [(3, 5, 21), (6, 2, 10), (20, 2, 0), (8, 1, 0), (F(3, 2), 1, F(13, 2))])
def test_psi(x, y, v):
    assert psi(x, y) == v


def test_psi_properties():
    assert psi_properties_check([(2, 2, 3, 3), (4, 6, 2, 2), (5, 5, 1, 2)])
    assert psi(6, 2) <= psi(4, 2) and psi(5, 1) <= psi(5, 2)
    grid = [F(i, 2) for i in range(2, 40)]
    rng = random.Random(0)
    samples = []
    for _ in range(2000):
        x, x2 = sorted(rng.sample(grid, 2))
        y, y2 = sorted(rng.sample(grid, 2))
        samples.append((x, x2, y, y2))
    assert psi_properties_check(samples)


def test_psi_properties_rejects_domain():
    with pytest.raises(ValueError):
        psi_properties_check([(3, 2, 1, 1)])


# ------------------------------------------------------------ time windows


def test_verify_tw_hand_replay():
    inst = tw(2, (2, 0, 1))
    alg = run(inst, "tw").alg_trace
    ledger = verify_tw(inst, alg, ActionTrace(2, [access(1, 2)]))
    rows = [(r.event_type, r.alg_cost, r.opt_cost, r.delta_phi) for r in ledger.rows]
    assert rows == [("opt_serve", 0, 2, 14), ("alg_serve", 3, 0, -10)]
    assert ledger.rows[1].alg_cost + ledger.rows[1].delta_phi == -7
    assert ledger.ok and ledger.phi == [14, 4]


def test_verify_tw_swap_row():
    inst = tw(3, (3, 0, 2))
    alg = run(inst, "tw").alg_trace
    adv = ActionTrace(3, [swap(2, 1), access(2, 3)])
    ledger = verify_tw(inst, alg, adv)
    sw = ledger.rows[0]
    assert sw.event_type == "opt_swap" and sw.delta_phi == 4 and sw.ok
    assert ledger.ok


def test_verify_tw_identical_traces_telescope():
    inst = tw(2, (1, 0, 0))
    alg = run(inst, "tw").alg_trace
    ledger = verify_tw(inst, alg, ActionTrace(2, [access(0, 1)]))
    assert sum(r.delta_phi for r in ledger.rows) == 0
    assert ledger.ok


def test_verify_tw_preconditions():
    inst = tw(3, (3, 0, 1), (2, 0, 2))
    alg = run(inst, "tw").alg_trace
    with pytest.raises(PreconditionError, match="filter"):
        verify_tw(inst, alg, ActionTrace(3, [access(1, 3)]))
    one = tw(3, (3, 0, 1))
    alg1 = run(one, "tw").alg_trace
    with pytest.raises(PreconditionError, match="normalized"):
        verify_tw(one, alg1, ActionTrace(3, [access(0, 3)]))
    with pytest.raises(PreconditionError, match="invalid"):
        verify_tw(one, alg1, ActionTrace(3, [access(1, 2)]))
    with pytest.raises(PreconditionError, match="Algorithm 1"):
        verify_tw(one, ActionTrace(3, []).with_actor("ALG"), ActionTrace(3, [access(1, 3)]))


def test_ledger_csv():
    inst = tw(2, (2, 0, 1))
    ledger = verify_tw(inst, run(inst, "tw").alg_trace, ActionTrace(2, [access(1, 2)]))
    lines = ledger.to_csv().splitlines()
    assert lines[0].split(",") == LEDGER_HEADER
    assert lines[1] == "1/1,opt_serve,0/1,2/1,14/1,24,34/1"


# ------------------------------------------------------------ Lemma Q


def test_truncated_witness_value():
    for a in (1, 2, 3, F(1, 2)):
        w = truncated_witness(a, 10)
        assert w[-1] == 4 * a and w[0] == 4 * F(a) / 2**9
        assert subset_value(a, w) == 24 * a - 7 * (4 * F(a) / 2**9)
    assert subset_value(1, truncated_witness(1)) == 24 - F(7, 128)


@pytest.mark.parametrize("a", [1, 2, 3])
def test_lemma_q_grid(a):
    v, w = lemma_q_oracle(a, 64)
    assert 23.5 * a <= v <= 24 * a
    assert subset_value(a, w) == v


def test_lemma_q_scales_linearly():
    v1, _ = lemma_q_oracle(1, 64)
    v2, _ = lemma_q_oracle(2, 64)
    assert v2 == 2 * v1 <= 48


def test_lemma_q_oracle_against_enumeration():
    # exhaustive search over all doubling chains on a coarse grid
    a, g = F(1), 8
    pts = [F(j, g) for j in range(1, 8 * g)]

    def best(i_min_val):
        out = F(0)
        for x in pts:
            if x >= i_min_val:
                out = max(out, subset_value(a, [x]) + best(2 * x))
        return out

    assert lemma_q_oracle(a, g)[0] == best(F(0))


def test_lemma_q_subset_value_rejects_non_doubling():
    with pytest.raises(ValueError):
        subset_value(1, [1, F(3, 2)])


def test_lemma_q_integer():
    v, xs = lemma_q_integer(1)
    assert (v, xs) == (17, [1, 2, 4])
    for y in range(1, 9):
        v, xs = lemma_q_integer(y)
        assert v <= 24 * y
        assert all(2 * u <= w for u, w in zip(xs, xs[1:]))


# ------------------------------------------------------------ delays


def _rows(ledger, typ):
    return [r for r in ledger.rows if r.event_type == f"type{typ}"]


def test_delay_rows_types():
    inst = make_instance(
        4,
        DELAYS,
        [delay_request(2, 0, DelayFunction.linear(0, 1)), delay_request(3, 0, DelayFunction.linear(0, 1))],
    )
    adv = ActionTrace(4, [swap(1, 2), access(1, 3)])
    ledger = verify_delay_run(inst, adv)
    assert ledger.ok
    for r in _rows(ledger, 1):
        assert r.alg_cost == 6 * r.opt_cost and r.delta_phi <= 36 * r.opt_cost
    assert [r.delta_phi for r in _rows(ledger, 4)] == [0]
    assert all(r.delta_phi <= 84 for r in _rows(ledger, 7))
    assert _rows(ledger, 2) and _rows(ledger, 6)
    assert ledger.phi[-1] >= 0


def test_delay_random_ledgers():
    rng = random.Random(31)
    for _ in range(60):
        inst = random_delay_instance(rng, rng.randint(1, 4), rng.randint(1, 5))
        for adv in (brute_force_opt(inst)[0], random_delay_trace(rng, inst)):
            ledger = verify_delay_run(inst, adv)
            assert ledger.ok, ledger.first_violation() or ledger.problems


def test_delay_verifier_detects_tampering():
    inst = make_instance(4, DELAYS, [delay_request(2, 0, DelayFunction.linear(0, 1)), delay_request(3, 0, DelayFunction.linear(0, 1))])
    adv = ActionTrace(4, [access(2, 4)])
    res = run(inst, "delay", adv)
    assert verify_delay(inst, res.alg_trace, res.events, adv).ok
    events = list(res.events)
    i = next(i for i, e in enumerate(events) if e.kind == PREFIX)
    events[i] = replace(events[i], ell=2)
    with pytest.raises(DriftError):
        verify_delay(inst, res.alg_trace, events, adv)
    with pytest.raises(PreconditionError):
        verify_delay(inst, res.alg_trace, res.events, ActionTrace(4, [access(5, 4)]))
