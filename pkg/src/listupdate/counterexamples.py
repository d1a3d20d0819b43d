"""Lower-bound instances for the failed counter-based variants A1..A9.

Each construction is a prize-collecting sequence; ``scripted_adversary``
returns a cheap offline schedule for it, and ``measure`` compares the
simulated online cost with that schedule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .engine import run
from .instance import DELAYS, Instance, make_instance, prize_collecting, to_fraction
from .trace import ACCESS, OPT, SWAP, Action, ActionTrace, cost

ALGS = tuple(f"a{i}" for i in range(1, 10))
ORDER = {a: ("n" if a in ("a1", "a2", "a3") else "sqrt_n") for a in ALGS}


class ConstructionError(ValueError):
    pass


def _isqrt(n: int) -> int:
    s = math.isqrt(n)
    if s * s != n:
        raise ConstructionError(f"n must be a perfect square, got {n}")
    return s


def _check(which: str, n: int, eps: Fraction) -> int:
    if which not in ALGS:
        raise ConstructionError(f"unknown construction {which!r}")
    if not 0 < eps < 1:
        raise ConstructionError("eps must lie in (0, 1)")
    if which in ("a1",) and n < 1:
        raise ConstructionError("n must be positive")
    if which in ("a2", "a3") and n < 2:
        raise ConstructionError("n must be at least 2")
    if which in ALGS[3:]:
        s = _isqrt(n)
        if which in ("a4", "a5", "a6", "a7") and s <= 4:
            raise ConstructionError("construction needs sqrt(n) > 4, i.e. n >= 25")
        if s < 2:
            raise ConstructionError("construction needs n >= 4")
        return s
    return 0


def generate(which: str, n: int, eps=Fraction(1, 2)) -> Instance:
    which = which.lower()
    eps = to_fraction(eps)
    s = _check(which, n, eps)
    pc = prize_collecting
    reqs = []
    if which == "a1":
        reqs = [pc(l, 0, 0, l - eps) for l in range(1, n + 1)]
    elif which in ("a2", "a3"):
        reqs = [pc(1, 0, 2 * n, 1 - eps)]
        for l in range(1, n):
            reqs.append(pc(l + 1, 2 * l, 2 * l, 1 + eps))
            reqs.append(pc(1, 2 * l + 1, 2 * n, 1 if which == "a2" else l + 1 - eps))
    elif which in ("a4", "a6"):
        reqs = [pc(j, 0, 0, s - 4) for j in range(n - s + 1, n + 1)]
        for l in range(n - s, 0, -1):
            reqs.append(pc(l, n - l, n - l, 4 * s))
    elif which in ("a5", "a7"):
        for l in range(n - s, 0, -1):
            t = n - l
            reqs.append(pc(l, t, t, 4 * s))
            reqs.extend(pc(j, t, t, s - 4) for j in range(n - s + 1, n + 1))
    else:  # a8, a9
        for l in range(s, n + 1):
            small = Fraction(1, s) if which == "a8" else Fraction(l, s)
            reqs.append(pc(l, l, l, Fraction(l, s)))
            reqs.extend(pc(j, l, l, small) for j in range(1, s))
    return make_instance(n, DELAYS, reqs)


def scripted_adversary(which: str, n: int, eps=Fraction(1, 2)) -> ActionTrace:
    """The offline schedule that the lower-bound argument compares against."""
    which = which.lower()
    eps = to_fraction(eps)
    s = _check(which, n, eps)
    acts: list[Action] = []
    if which == "a1":
        acts = [Action(Fraction(0), OPT, ACCESS, n)]
    elif which in ("a2", "a3"):
        # every request for c1 is still pending at 2n and c1 sits in front
        acts = [Action(Fraction(2 * n), OPT, ACCESS, 1)]
    elif which in ("a4", "a6"):
        acts = []
    elif which in ("a5", "a7"):
        # bring the last s elements to the front, keeping their order
        for j in range(s):
            for p in range(n - s + j, j, -1):
                acts.append(Action(Fraction(0), OPT, SWAP, p))
        for l in range(n - s, 0, -1):
            acts.append(Action(Fraction(n - l), OPT, ACCESS, s))
    else:
        for l in range(s, n + 1):
            acts.append(Action(Fraction(l), OPT, ACCESS, s - 1))
    return ActionTrace(n, acts, OPT)


def closed_form_adversary_cost(which: str, n: int, eps=Fraction(1, 2)) -> Fraction:
    which = which.lower()
    eps = to_fraction(eps)
    s = _check(which, n, eps)
    if which == "a1":
        return Fraction(n)
    if which in ("a2", "a3"):
        return 1 + (n - 1) * (1 + eps)
    if which in ("a4", "a6"):
        return Fraction(s * (s - 4) + (n - s) * 4 * s)
    if which in ("a5", "a7"):
        # s(n - s) swaps, n - s accesses of depth s, n - s penalties 4s
        return Fraction(s * (n - s) + (n - s) * s + (n - s) * 4 * s)
    return Fraction((n - s + 1) * (s - 1)) + sum((Fraction(l, s) for l in range(s, n + 1)), Fraction(0))


@dataclass(frozen=True)
class CounterexampleReport:
    algorithm: str
    n: int
    eps: Fraction
    alg_cost: Fraction
    adversary_cost: Fraction
    ratio: Fraction
    expected_order: str


def measure(which: str, n: int, eps=Fraction(1, 2), policy: str = None) -> CounterexampleReport:
    """Simulate ``policy`` (default: the variant itself) on the construction."""
    which = which.lower()
    eps = to_fraction(eps)
    inst = generate(which, n, eps)
    res = run(inst, policy or which)
    alg = cost(res.alg_trace, inst).total
    adv = cost(scripted_adversary(which, n, eps), inst).total
    if adv <= 0:
        raise ConstructionError("adversary cost must be positive")
    return CounterexampleReport(policy or which, n, eps, alg, adv, alg / adv, ORDER[which])


REPORT_HEADER = ["algorithm", "n", "eps", "alg_cost", "adversary_cost", "ratio", "ratio_float", "expected_order"]
