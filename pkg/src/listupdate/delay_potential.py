"""Potential-function bookkeeping for the delay analysis.

The verifier keeps its own copy of Algorithm 2's counters, rebuilt from the
engine's event log, and evaluates after every event

    Phi = sum_e |I_e| (28 - 8 EC_e / x_e)
        + 36 sum_{lambda1} d_k(t)
        + sum_{lambda2} (42 d_k - 6 d_k(t)) [x_k <= 4 y_k]
        + 48 sum_e mu_e
        + 8 sum_{lambda2} (d_k - d_k(t)) / x_{e_k} * mu_k

lambda is the set of requests that have arrived and are still active or
frozen for the online algorithm; lambda1 are those the adversary still
owes, lambda2 those it has already served. d_k is the total delay charged
to request k over the whole run, so the log is read twice.

The online side is recharged: 6 eps per eps of counted delay and nothing
for accesses or swaps. Event types and their constants:

    1 delay, pending for both      42
    2 delay, pending online only    0
    3 delay, pending for adversary  1
    4 prefix event                  0
    5 element event                 0
    6 adversary access            336
    7 adversary swap               84
"""

from __future__ import annotations

from fractions import Fraction
from typing import Optional

from .engine import (
    ALG_ONLY,
    ARRIVAL,
    BOTH,
    DELAY_TICK,
    ELEMENT,
    OPT_ACTION,
    OPT_ONLY,
    PREFIX,
    RunResult,
    run,
)
from .instance import DELAYS, Instance
from .lists import ListState, count_inversions_of
from .potential import Ledger, LedgerRow, PreconditionError
from .trace import ACCESS, SWAP, ActionTrace, cost

ZERO = Fraction(0)
BOUNDS = {1: 42, 2: 0, 3: 1, 4: 0, 5: 0, 6: 336, 7: 84}
TICK_TYPE = {BOTH: 1, ALG_ONLY: 2, OPT_ONLY: 3}

ACTIVE = "active"
FROZEN_RC = "frozen_with_rc"
FROZEN = "frozen_without_rc"
DELETED = "deleted"


class DriftError(RuntimeError):
    """The event log disagrees with the verifier's own bookkeeping."""


class _State:
    def __init__(self, inst: Instance, d_total: dict):
        self.inst = inst
        self.req = inst.request
        self.alg = ListState.identity(inst.n)
        self.opt = ListState.identity(inst.n)
        self.ec = {e: ZERO for e in range(1, inst.n + 1)}
        self.mu_e = {e: 0 for e in range(1, inst.n + 1)}
        self.rc: dict[int, Fraction] = {}
        self.life: dict[int, str] = {}
        self.d_now: dict[int, Fraction] = {}
        self.d_total = d_total
        self.opt_served: set[int] = set()
        self.lam2: dict[int, list] = {}  # k -> [x_k, y_k, mu_k]

    def in_lambda(self, k) -> bool:
        return k in self.life and self.life[k] != DELETED

    def phi(self) -> Fraction:
        v = ZERO
        for e in range(1, self.inst.n + 1):
            inv = count_inversions_of(self.alg, self.opt, e)
            if inv:
                v += inv * (28 - 8 * self.ec[e] / self.alg.position(e))
            v += 48 * self.mu_e[e]
        for k in self.life:
            if not self.in_lambda(k):
                continue
            if k not in self.opt_served:
                v += 36 * self.d_now[k]
            else:
                x, y, mu = self.lam2[k]
                if x <= 4 * y:
                    v += 42 * self.d_total[k] - 6 * self.d_now[k]
                if mu:
                    xe = self.alg.position(self.req(k).element)
                    v += 8 * (self.d_total[k] - self.d_now[k]) / xe * mu
        return v

    def serve_alg(self, depth: int) -> list[int]:
        pre = self.alg.prefix_elements(depth)
        out = []
        for k, lf in self.life.items():
            if lf == ACTIVE and self.req(k).element in pre:
                self.life[k] = FROZEN_RC
                out.append(k)
        return sorted(out)


def verify_delay(inst: Instance, alg_trace: ActionTrace, events: list, adversary: ActionTrace) -> Ledger:
    """Check every per-event inequality on a joint Algorithm 2 / adversary log."""
    if inst.model != DELAYS:
        raise PreconditionError("verify_delay needs a delay instance")
    opt_cost = cost(adversary, inst).total
    if opt_cost == float("inf"):
        raise PreconditionError("adversary leaves an unbounded request unserved")
    log_opt = [e.action for e in events if e.kind == OPT_ACTION]
    if [(a.time, a.kind, a.arg) for a in log_opt] != [(a.time, a.kind, a.arg) for a in adversary.actions]:
        raise PreconditionError("event log was not produced against this adversary trace")
    log_alg = [a for e in events for a in e.actions]
    if log_alg != list(alg_trace.actions):
        raise PreconditionError("event log does not match the online trace")

    d_total: dict[int, Fraction] = {r.k: ZERO for r in inst.requests}
    for e in events:
        if e.kind == DELAY_TICK and e.cls in (BOTH, ALG_ONLY):
            d_total[e.k] += e.eps

    st = _State(inst, d_total)
    req = inst.request
    ledger = Ledger(ratio_bound=336)
    phi = ZERO

    def row(t, typ, alg, opt):
        nonlocal phi
        after = st.phi()
        ledger.add(LedgerRow(t, f"type{typ}", alg, opt, after - phi, BOUNDS[typ]), after)
        phi = after

    for ev in events:
        t = ev.time
        if ev.kind == ARRIVAL:
            st.life[ev.k] = ACTIVE
            st.rc[ev.k] = ZERO
            st.d_now[ev.k] = ZERO
            if st.phi() != phi:
                raise DriftError(f"t={t}: arrival of request {ev.k} changed the potential")
        elif ev.kind == DELAY_TICK:
            k = ev.k
            in_alg = st.life.get(k) == ACTIVE
            in_opt = k in st.life and k not in st.opt_served
            cls = BOTH if in_alg and in_opt else ALG_ONLY if in_alg else OPT_ONLY if in_opt else None
            if cls != ev.cls:
                raise DriftError(f"t={t}: delay tick on request {k} logged as {ev.cls}, expected {cls}")
            if in_alg:
                st.d_now[k] += ev.eps
                st.rc[k] += ev.eps
                st.ec[req(k).element] += ev.eps
            row(t, TICK_TYPE[cls], 6 * ev.eps if in_alg else ZERO, ev.eps if in_opt else ZERO)
        elif ev.kind == OPT_ACTION:
            a = ev.action
            if a.kind == SWAP:
                moved = st.opt.element_at(a.arg)
                st.opt = st.opt.swap_adjacent(a.arg)
                st.mu_e[moved] += 1
                for k, rec in st.lam2.items():
                    if st.in_lambda(k) and req(k).element == moved:
                        rec[2] += 1
                row(t, 7, ZERO, Fraction(1))
            else:
                pre = st.opt.prefix_elements(a.arg)
                for k in sorted(st.life):
                    if k in st.opt_served or req(k).element not in pre:
                        continue
                    st.opt_served.add(k)
                    if st.in_lambda(k):
                        e = req(k).element
                        st.lam2[k] = [st.alg.position(e), st.opt.position(e), 0]
                row(t, 6, ZERO, Fraction(a.arg))
        elif ev.kind == PREFIX:
            ell = ev.ell
            pre = st.alg.prefix_elements(ell)
            total = sum((x for k, x in st.rc.items() if req(k).element in pre), ZERO)
            if total != ell:
                raise DriftError(f"t={t}: prefix event on {ell} with counter sum {total}")
            acc = ev.actions[0]
            if acc.kind != ACCESS or acc.arg != min(2 * ell, inst.n) or len(ev.actions) != 1:
                raise DriftError(f"t={t}: prefix event on {ell} took actions {ev.actions}")
            served = st.serve_alg(acc.arg)
            if served != sorted(ev.served):
                raise DriftError(f"t={t}: prefix event served {ev.served}, expected {served}")
            for k in [k for k in st.rc if req(k).element in pre]:
                del st.rc[k]
                st.life[k] = FROZEN
            row(t, 4, ZERO, ZERO)
        elif ev.kind == ELEMENT:
            e = ev.element
            x = st.alg.position(e)
            if st.ec[e] != x:
                raise DriftError(f"t={t}: element event on c{e} with counter {st.ec[e]} at position {x}")
            inv_before = count_inversions_of(st.alg, st.opt, e)
            rho_before = _rho_total(st)
            acc = ev.actions[0]
            if acc.kind != ACCESS or acc.arg != min(2 * x, inst.n):
                raise DriftError(f"t={t}: element event on c{e} accessed {acc}")
            served = st.serve_alg(acc.arg)
            if served != sorted(ev.served):
                raise DriftError(f"t={t}: element event served {ev.served}, expected {served}")
            for k in [k for k in st.rc if req(k).element == e]:
                del st.rc[k]
            for k in st.life:
                if req(k).element == e:
                    st.life[k] = DELETED
            st.ec[e] = ZERO
            st.mu_e[e] = 0
            swaps = [a for a in ev.actions[1:]]
            if [a.arg for a in swaps] != st.alg.mtf_swaps(e):
                raise DriftError(f"t={t}: element event on c{e} did not move it to the front")
            st.alg, _ = st.alg.move_to_front(e)
            if count_inversions_of(st.alg, st.opt, e) != 0:
                ledger.problems.append(f"t={t}: I_e not empty after element event on c{e}")
            if _rho_total(st) - rho_before > 36 * x - 48 * inv_before:
                ledger.problems.append(f"t={t}: rho change on element event on c{e} exceeds 36x - 48|I|")
            row(t, 5, ZERO, ZERO)
        else:
            raise DriftError(f"t={t}: event {ev.kind!r} cannot be classified")

    if ledger.opt_total != opt_cost:
        ledger.problems.append(f"adversary cost from the log {ledger.opt_total} != trace cost {opt_cost}")
    if ledger.alg_total != 6 * sum(d_total.values(), ZERO):
        ledger.problems.append("recharged online cost differs from 6 * total delay")
    return ledger


def _rho_total(st: _State) -> Fraction:
    v = ZERO
    for e in range(1, st.inst.n + 1):
        inv = count_inversions_of(st.alg, st.opt, e)
        if inv:
            v += inv * (28 - 8 * st.ec[e] / st.alg.position(e))
    return v


def verify_delay_run(inst: Instance, adversary: ActionTrace, result: Optional[RunResult] = None) -> Ledger:
    """Run Algorithm 2 next to the adversary and verify the joint log."""
    if result is None:
        result = run(inst, "delay", adversary)
    return verify_delay(inst, result.alg_trace, result.events, adversary)
