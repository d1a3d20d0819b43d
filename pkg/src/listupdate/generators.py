"""Uniform random instances and traces at desk scale."""

from __future__ import annotations

import random
from fractions import Fraction

from .instance import DELAYS, TIME_WINDOWS, Breakpoint, DelayFunction, Instance, make_instance, window_request, delay_request
from .lists import ListState
from .trace import ACCESS, OPT, SWAP, Action, ActionTrace

HALF = Fraction(1, 2)


def _time(rng: random.Random, hi: int = 8, den: int = 2) -> Fraction:
    return Fraction(rng.randint(0, hi * den), den)


def random_tw_instance(rng: random.Random, n: int, m: int, horizon: int = 6) -> Instance:
    reqs = []
    for _ in range(m):
        a = _time(rng, horizon)
        q = a + _time(rng, 3)
        reqs.append(window_request(rng.randint(1, n), a, q))
    return make_instance(n, TIME_WINDOWS, reqs)


def random_classical_instance(rng: random.Random, n: int, m: int) -> Instance:
    """Zero-width windows at distinct times: plain list update."""
    reqs = [window_request(rng.randint(1, n), t, t) for t in range(m)]
    return make_instance(n, TIME_WINDOWS, reqs)


def random_delay_function(rng: random.Random, a: Fraction, max_breakpoints: int = 3) -> DelayFunction:
    kind = rng.choice(["step", "linear", "ramp", "mixed"])
    t0 = a + rng.choice([Fraction(0), HALF, Fraction(1)])
    if kind == "step":
        return DelayFunction.step(t0, Fraction(rng.randint(1, 10), 2))
    if kind == "linear":
        return DelayFunction.linear(t0, Fraction(rng.randint(1, 4), 2))
    k = rng.randint(2, max(2, max_breakpoints))
    bps = []
    t, v = t0, Fraction(0)
    for i in range(k):
        jump = Fraction(rng.randint(0, 4), 2) if kind == "mixed" else Fraction(0)
        bps.append(Breakpoint(t, v, jump))
        dt = Fraction(rng.randint(1, 4), 2)
        v = v + jump + Fraction(rng.randint(0, 4), 2)
        t = t + dt
    slope = Fraction(rng.randint(0, 2), 2) if rng.random() < 0.3 else Fraction(0)
    return DelayFunction(tuple(bps), slope)


def random_delay_instance(rng: random.Random, n: int, m: int, max_breakpoints: int = 8) -> Instance:
    """Random delay instance whose breakpoints number at most max_breakpoints."""
    reqs = []
    budget = max_breakpoints
    for i in range(m):
        a = _time(rng, 5)
        left = m - i - 1
        cap = max(1, min(3, budget - left))
        f = random_delay_function(rng, a, cap)
        if len(f.breakpoints) > cap:
            f = DelayFunction.step(f.breakpoints[0].t, 1)
        budget -= len(f.breakpoints)
        reqs.append(delay_request(rng.randint(1, n), a, f))
    return make_instance(n, DELAYS, reqs)


def random_valid_tw_trace(rng: random.Random, inst: Instance) -> ActionTrace:
    """A random schedule that serves every request within its window.

    Random swaps and accesses are sprinkled over event times; at every
    deadline any request still pending is served by an access deep enough
    to reach it.
    """
    times = sorted({r.arrival for r in inst.requests} | {r.deadline for r in inst.requests})
    state = ListState.identity(inst.n)
    pending: set[int] = set()
    done: set[int] = set()
    acts: list[Action] = []

    def do_access(t, depth):
        acts.append(Action(t, OPT, ACCESS, depth))
        pre = state.prefix_elements(depth)
        for k in list(pending):
            if inst.request(k).element in pre:
                pending.discard(k)
                done.add(k)

    for t in times:
        for r in inst.requests:
            if r.arrival == t:
                pending.add(r.k)
        for _ in range(rng.randint(0, 3)):
            if inst.n > 1 and rng.random() < 0.6:
                p = rng.randint(1, inst.n - 1)
                acts.append(Action(t, OPT, SWAP, p))
                state = state.swap_adjacent(p)
            else:
                do_access(t, rng.randint(1, inst.n))
        due = [k for k in pending if inst.request(k).deadline == t]
        if due:
            depth = max(state.position(inst.request(k).element) for k in due)
            do_access(t, rng.randint(depth, inst.n))
    return ActionTrace(inst.n, acts, OPT)


def random_delay_trace(rng: random.Random, inst: Instance) -> ActionTrace:
    """A random schedule for a delay instance; unbounded requests get served."""
    times = sorted({r.arrival for r in inst.requests} | {b.t for r in inst.requests for b in r.delay.breakpoints})
    times.append((times[-1] if times else Fraction(0)) + 1)
    state = ListState.identity(inst.n)
    acts: list[Action] = []
    for t in times[:-1]:
        for _ in range(rng.randint(0, 2)):
            if inst.n > 1 and rng.random() < 0.5:
                p = rng.randint(1, inst.n - 1)
                acts.append(Action(t, OPT, SWAP, p))
                state = state.swap_adjacent(p)
            else:
                acts.append(Action(t, OPT, ACCESS, rng.randint(1, inst.n)))
    if any(r.delay.limit() is None for r in inst.requests):
        acts.append(Action(times[-1], OPT, ACCESS, inst.n))
    return ActionTrace(inst.n, acts, OPT)
