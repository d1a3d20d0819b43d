"""Exact offline optima for tiny instances, and scripted adversaries.

The brute force is a shortest-path search over states
``(time index, permutation, served bitmask)``. Inside one decision time an
edge either swaps an adjacent pair (cost 1) or accesses a prefix (cost =
depth), so any number of actions can happen at a single instant. An
"advance" edge moves on to the next decision time.

Time windows: decision times are the distinct deadlines, and advancing past
a deadline is only allowed once every request due there is served.
Delays: decision times are arrivals and breakpoints; serving at time t
costs the left limit of the delay there, and requests never served pay
their limit at the end.
"""

from __future__ import annotations

import heapq
import itertools
import math
from fractions import Fraction
from typing import Optional

from .instance import DELAYS, TIME_WINDOWS, Instance
from .trace import ACCESS, OPT, SWAP, Action, ActionTrace

TW_GUARD = (5, 6)
DELAY_GUARD = (4, 5, 8)


class GuardError(ValueError):
    pass


class HorizonError(ValueError):
    pass


def _check_guard(inst: Instance, unsafe: bool):
    if unsafe:
        return
    if inst.model == TIME_WINDOWS:
        n_max, m_max = TW_GUARD
        if inst.n > n_max or inst.m > m_max:
            raise GuardError(f"brute force limited to n <= {n_max}, m <= {m_max} (got n={inst.n}, m={inst.m})")
    else:
        n_max, m_max, b_max = DELAY_GUARD
        if inst.n > n_max or inst.m > m_max or inst.breakpoint_count() > b_max:
            raise GuardError(
                f"brute force limited to n <= {n_max}, m <= {m_max}, {b_max} breakpoints "
                f"(got n={inst.n}, m={inst.m}, {inst.breakpoint_count()} breakpoints)"
            )


def _search(inst: Instance, times: list[Fraction], step_cost, advance_ok, final_cost):
    """Dijkstra over (time index, order, served mask).

    step_cost(i, k) is the extra cost of serving request k at times[i];
    advance_ok(i, mask) says whether time i may be left with that mask;
    final_cost(mask) is paid after the last time (None means forbidden).
    """
    n, reqs = inst.n, inst.requests
    arrived_by = [0] * len(times)
    for i, t in enumerate(times):
        arrived_by[i] = sum(1 << (r.k - 1) for r in reqs if r.arrival <= t)
    start = (0, tuple(range(1, n + 1)), 0)
    dist = {start: Fraction(0)}
    parent: dict = {}
    counter = itertools.count()
    heap = [(Fraction(0), next(counter), start)]
    goal = None
    while heap:
        d, _, node = heapq.heappop(heap)
        if d > dist.get(node, math.inf):
            continue
        i, order, mask = node
        if i == len(times):
            goal = node
            break
        t = times[i]

        def relax(nb, c, act):
            nd = d + c
            if nd < dist.get(nb, math.inf):
                dist[nb] = nd
                parent[nb] = (node, act)
                heapq.heappush(heap, (nd, next(counter), nb))

        pending = arrived_by[i] & ~mask
        if pending:
            pos = {e: p for p, e in enumerate(order, 1)}
            depths = sorted({pos[r.element] for r in reqs if pending >> (r.k - 1) & 1})
            for depth in depths:
                newly = [r.k for r in reqs if pending >> (r.k - 1) & 1 and pos[r.element] <= depth]
                add = sum(1 << (k - 1) for k in newly)
                c = Fraction(depth) + sum((step_cost(i, k) for k in newly), Fraction(0))
                relax((i, order, mask | add), c, Action(t, OPT, ACCESS, depth))
        for p in range(1, n):
            o = list(order)
            o[p - 1], o[p] = o[p], o[p - 1]
            relax((i, tuple(o), mask), Fraction(1), Action(t, OPT, SWAP, p))
        if advance_ok(i, mask):
            if i + 1 == len(times):
                fc = final_cost(mask)
                if fc is not None:
                    relax((i + 1, order, mask), fc, None)
            else:
                relax((i + 1, order, mask), Fraction(0), None)
    if goal is None:
        return None
    acts = []
    node = goal
    while node in parent:
        node, act = parent[node]
        if act is not None:
            acts.append(act)
    acts.reverse()
    return ActionTrace(n, acts, OPT), dist[goal]


def brute_force_opt_tw(inst: Instance, unsafe: bool = False) -> tuple[ActionTrace, Fraction]:
    if inst.model != TIME_WINDOWS:
        raise ValueError("brute_force_opt_tw needs a time-window instance")
    _check_guard(inst, unsafe)
    if not inst.requests:
        return ActionTrace(inst.n, (), OPT), Fraction(0)
    times = sorted({r.deadline for r in inst.requests})
    due = [sum(1 << (r.k - 1) for r in inst.requests if r.deadline == t) for t in times]

    res = _search(
        inst,
        times,
        step_cost=lambda i, k: Fraction(0),
        advance_ok=lambda i, mask: mask & due[i] == due[i],
        final_cost=lambda mask: Fraction(0),
    )
    if res is None:
        raise HorizonError("no feasible schedule")
    return res


def brute_force_opt_delay(inst: Instance, unsafe: bool = False) -> tuple[ActionTrace, Fraction]:
    if inst.model != DELAYS:
        raise ValueError("brute_force_opt_delay needs a delay instance")
    _check_guard(inst, unsafe)
    if not inst.requests:
        return ActionTrace(inst.n, (), OPT), Fraction(0)
    times = sorted({r.arrival for r in inst.requests} | {b.t for r in inst.requests for b in r.delay.breakpoints})
    limits = {r.k: r.delay.limit() for r in inst.requests}

    def step_cost(i, k):
        return inst.request(k).delay.left_limit(times[i])

    def final_cost(mask) -> Optional[Fraction]:
        total = Fraction(0)
        for r in inst.requests:
            if not mask >> (r.k - 1) & 1:
                if limits[r.k] is None:
                    return None
                total += limits[r.k]
        return total

    res = _search(inst, times, step_cost, lambda i, mask: True, final_cost)
    if res is None:
        raise HorizonError("instance requires service beyond horizon")
    return res


def brute_force_opt(inst: Instance, unsafe: bool = False) -> tuple[ActionTrace, Fraction]:
    if inst.model == TIME_WINDOWS:
        return brute_force_opt_tw(inst, unsafe)
    return brute_force_opt_delay(inst, unsafe)


def scripted_adversary(which: str, n: int, eps=Fraction(1, 2)) -> ActionTrace:
    """The hand-built schedule for a lower-bound construction (see counterexamples)."""
    from .counterexamples import scripted_adversary as script

    return script(which, n, eps)
