"""Potential-function bookkeeping for the time-window analysis.

``verify_tw`` replays Algorithm 1 and an adversary on a joint timeline
(adversary first at equal times) and records, for every event, the online
cost, the adversary cost and the change of

    Phi = 4 * inversions + sum_{k in lambda} psi(x_k, y_k) + 4 * sum_{k in lambda} mu_k

where lambda holds the requests the adversary has served and Algorithm 1
has not. Also here: psi, its monotonicity checks and the Lemma Q oracle.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional

from .engine import run
from .instance import TIME_WINDOWS, Instance, fmt, to_fraction
from .lists import ListState, inversions
from .trace import (
    ACCESS,
    ALG,
    OPT,
    SWAP,
    ActionTrace,
    is_normalized,
    merge_timelines,
    trigger_requests,
    validate_time_windows,
)

ZERO = Fraction(0)
LEDGER_HEADER = ["time", "event_type", "alg_cost", "opt_cost", "delta_phi", "bound_const", "slack"]


class PreconditionError(ValueError):
    pass


def psi(x, y) -> Fraction:
    x, y = to_fraction(x), to_fraction(y)
    if x <= y:
        return 7 * x
    if x <= 8 * y:
        return 8 * y - x
    return ZERO


def psi_properties_check(samples: Iterable[tuple]) -> bool:
    """Check 0 <= psi(x,y) <= 7x and both monotonicity properties.

    Each sample is (x, x2, y, y2) with x <= x2 and y <= y2. Raises
    AssertionError naming the offending tuple.
    """
    for s in samples:
        x, x2, y, y2 = (to_fraction(v) for v in s)
        if not (x <= x2 and y <= y2 and min(x, y) >= 1):
            raise ValueError(f"sample out of domain: {s}")
        if not 0 <= psi(x, y) <= 7 * x:
            raise AssertionError(f"0 <= psi(x,y) <= 7x fails at {s}")
        if y <= x and psi(x2, y) > psi(x, y):
            raise AssertionError(f"psi not decreasing in x at {s}")
        if psi(x, y) > psi(x, y2):
            raise AssertionError(f"psi not increasing in y at {s}")
    return True


# ------------------------------------------------------------ Lemma Q


def q_value(a, x) -> Fraction:
    """The objective summand: 7x up to a, then 8a - x, then 0."""
    a, x = to_fraction(a), to_fraction(x)
    if x <= a:
        return 7 * x
    if x <= 8 * a:
        return 8 * a - x
    return ZERO


def lemma_q_oracle(a, grid_denominator: int) -> tuple[Fraction, list[Fraction]]:
    """Best doubling subset of the grid {j a / g : 0 < j < 8g} and its value.

    A subset is feasible when consecutive members x < y satisfy 2x <= y.
    On the grid that means index(y) >= 2 * index(x), so a running prefix
    maximum gives an O(g) dynamic program.
    """
    a = to_fraction(a)
    g = int(grid_denominator)
    if a <= 0:
        raise ValueError("a must be positive")
    if g < 8:
        raise ValueError("grid denominator must be at least 8")
    top = 8 * g - 1
    best = [ZERO] * (top + 1)  # best[j]: optimum whose largest member is j
    prev = [0] * (top + 1)
    pmax = [ZERO] * (top + 1)  # max(0, best[1..j])
    parg = [0] * (top + 1)
    for j in range(1, top + 1):
        h = j // 2
        base, arg = (pmax[h], parg[h]) if h >= 1 else (ZERO, 0)
        best[j] = q_value(a, Fraction(j) * a / g) + base
        prev[j] = arg
        if best[j] > pmax[j - 1]:
            pmax[j], parg[j] = best[j], j
        else:
            pmax[j], parg[j] = pmax[j - 1], parg[j - 1]
    value, j = pmax[top], parg[top]
    witness = []
    while j:
        witness.append(Fraction(j) * a / g)
        j = prev[j]
    return value, sorted(witness)


def truncated_witness(a, terms: int = 10) -> list[Fraction]:
    a = to_fraction(a)
    return sorted(4 * a / 2**i for i in range(terms))


def subset_value(a, xs: Iterable) -> Fraction:
    xs = sorted(to_fraction(x) for x in xs)
    for u, v in zip(xs, xs[1:]):
        if 2 * u > v:
            raise ValueError(f"{u} and {v} violate the doubling constraint")
    return sum((q_value(a, x) for x in xs), ZERO)


def lemma_q_integer(y: int) -> tuple[Fraction, list[int]]:
    """Same maximisation over integer positions 1..8y-1 with psi(x, y)."""
    y = int(y)
    top = 8 * y - 1
    best = [ZERO] * (top + 1)
    prev = [0] * (top + 1)
    pmax = [ZERO] * (top + 1)
    parg = [0] * (top + 1)
    for j in range(1, top + 1):
        h = j // 2
        base, arg = (pmax[h], parg[h]) if h >= 1 else (ZERO, 0)
        best[j] = psi(j, y) + base
        prev[j] = arg
        if best[j] > pmax[j - 1]:
            pmax[j], parg[j] = best[j], j
        else:
            pmax[j], parg[j] = pmax[j - 1], parg[j - 1]
    value, j = pmax[top], parg[top]
    xs = []
    while j:
        xs.append(j)
        j = prev[j]
    return value, sorted(xs)


# ------------------------------------------------------------ ledger


@dataclass(frozen=True)
class LedgerRow:
    time: Fraction
    event_type: str
    alg_cost: Fraction
    opt_cost: Fraction
    delta_phi: Fraction
    bound_const: int

    @property
    def slack(self) -> Fraction:
        return self.bound_const * self.opt_cost - (self.alg_cost + self.delta_phi)

    @property
    def ok(self) -> bool:
        return self.slack >= 0

    def as_list(self) -> list[str]:
        return [
            fmt(self.time),
            self.event_type,
            fmt(self.alg_cost),
            fmt(self.opt_cost),
            fmt(self.delta_phi),
            str(self.bound_const),
            fmt(self.slack),
        ]


@dataclass
class Ledger:
    rows: list = field(default_factory=list)
    phi: list = field(default_factory=list)  # potential after each row, starting at 0
    ratio_bound: int = 0
    problems: list = field(default_factory=list)  # non-row failures

    def add(self, row: LedgerRow, phi_after: Fraction):
        self.rows.append(row)
        self.phi.append(phi_after)

    @property
    def alg_total(self) -> Fraction:
        return sum((r.alg_cost for r in self.rows), ZERO)

    @property
    def opt_total(self) -> Fraction:
        return sum((r.opt_cost for r in self.rows), ZERO)

    def violations(self) -> list:
        return [r for r in self.rows if not r.ok]

    def first_violation(self) -> Optional[LedgerRow]:
        bad = self.violations()
        return bad[0] if bad else None

    @property
    def phi_nonnegative(self) -> bool:
        return all(p >= 0 for p in self.phi)

    @property
    def ok(self) -> bool:
        return (
            not self.violations()
            and self.phi_nonnegative
            and not self.problems
            and self.alg_total <= self.ratio_bound * self.opt_total
        )

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(LEDGER_HEADER)
        for r in self.rows:
            w.writerow(r.as_list())
        return buf.getvalue()


# ------------------------------------------------------------ time windows


def verify_tw(inst: Instance, alg_trace: ActionTrace, adversary: ActionTrace) -> Ledger:
    if inst.model != TIME_WINDOWS:
        raise PreconditionError("verify_tw needs a time-window instance")
    if run(inst, "tw").alg_trace != alg_trace:
        raise PreconditionError("online trace is not Algorithm 1's trace on this instance")
    triggers = trigger_requests(inst, alg_trace)
    if sorted(triggers) != [r.k for r in inst.requests]:
        raise PreconditionError("instance holds non-triggering requests; filter it first")
    bad = validate_time_windows(adversary, inst)
    if bad is not None:
        raise PreconditionError(f"adversary trace invalid: {bad}")
    if not is_normalized(adversary, inst):
        raise PreconditionError("adversary trace is not normalized to serve at deadlines")

    req = inst.request
    alg_l = ListState.identity(inst.n)
    opt_l = ListState.identity(inst.n)
    lam: dict[int, list] = {}  # k -> [x_k, y_k, mu_k]
    opt_done: set[int] = set()
    alg_done: set[int] = set()
    ledger = Ledger(ratio_bound=24)

    def phi() -> Fraction:
        v = Fraction(4 * inversions(alg_l, opt_l))
        for x, y, mu in lam.values():
            v += psi(x, y) + 4 * mu
        return v

    timeline = merge_timelines(
        [a for a in adversary.actions],
        [a for a in alg_trace.actions],
    )
    i = 0
    while i < len(timeline):
        a = timeline[i]
        before = phi()
        t = a.time
        if a.actor == OPT and a.kind == SWAP:
            moved = opt_l.element_at(a.arg)
            opt_l = opt_l.swap_adjacent(a.arg)
            for k, rec in lam.items():
                if req(k).element == moved:
                    rec[2] += 1
            ledger.add(LedgerRow(t, "opt_swap", ZERO, Fraction(1), phi() - before, 8), phi())
            i += 1
        elif a.actor == OPT:
            pre = opt_l.prefix_elements(a.arg)
            newly = [r.k for r in inst.requests if r.k not in opt_done and r.arrival <= t and r.element in pre]
            xs = []
            for k in newly:
                opt_done.add(k)
                if k in alg_done:
                    ledger.problems.append(f"t={t}: request {k} served by Algorithm 1 before the adversary")
                    continue
                x = alg_l.position(req(k).element)
                lam[k] = [x, opt_l.position(req(k).element), 0]
                xs.append(x)
            xs.sort()
            if any(2 * u > v for u, v in zip(xs, xs[1:])):
                ledger.problems.append(f"t={t}: adversary-served positions {xs} break the doubling property")
            ledger.add(LedgerRow(t, "opt_serve", ZERO, Fraction(a.arg), phi() - before, 24), phi())
            i += 1
        else:
            # one Algorithm 1 event: an access followed by its move-to-front swaps
            j = i + 1
            while j < len(timeline) and timeline[j].actor == ALG and timeline[j].kind == SWAP and timeline[j].time == t:
                j += 1
            pre = alg_l.prefix_elements(a.arg)
            newly = [r.k for r in inst.requests if r.k not in alg_done and r.arrival <= t and r.element in pre]
            for k in newly:
                alg_done.add(k)
                if k not in lam:
                    ledger.problems.append(f"t={t}: request {k} served by Algorithm 1 before the adversary")
                lam.pop(k, None)
            for s in timeline[i + 1 : j]:
                alg_l = alg_l.swap_adjacent(s.arg)
            cost = Fraction(sum(s.cost for s in timeline[i:j]))
            ledger.add(LedgerRow(t, "alg_serve", cost, ZERO, phi() - before, 0), phi())
            i = j
    return ledger
