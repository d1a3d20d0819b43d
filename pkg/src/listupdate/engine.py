"""Event-driven simulation over exact rational time.

At each instant t the engine processes, in order: arrivals, the adversary's
(OPT's) actions, the online policy's events that are due, and then the
delay jumps located at t. A jump is fed to the counters as an instantaneous
ramp parametrised by a phase in [0, 1], so a counter that a jump carries
past its threshold fires exactly when it reaches the threshold. Serving a
request at t costs the left limit of its delay function, for either actor.
Between instants every delay function is linear and crossings are solved
in closed form.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .instance import DELAYS, TIME_WINDOWS, Instance, fmt
from .lists import ListState
from .policies import (
    ACTIVE,
    FROZEN_RC,
    CounterPolicy,
    DelayAlgorithm,
    Fired,
    make_policy,
)
from .trace import ACCESS, ALG, OPT, SWAP, Action, ActionTrace, TraceError

ZERO = Fraction(0)
ONE = Fraction(1)

ARRIVAL = "arrival"
DEADLINE = "deadline"
PREFIX = "prefix"
ELEMENT = "element"
OPT_ACTION = "opt_action"
DELAY_TICK = "delay_tick"

BOTH = "both"  # still pending for ALG and OPT
ALG_ONLY = "alg"
OPT_ONLY = "opt"


@dataclass
class EngineEvent:
    time: Fraction
    kind: str
    phase: Fraction = ZERO
    k: Optional[int] = None
    ell: Optional[int] = None
    element: Optional[int] = None
    eps: Optional[Fraction] = None
    cls: Optional[str] = None
    action: Optional[Action] = None
    actions: tuple = ()
    served: tuple = ()

    def to_dict(self) -> dict:
        d = {"t": fmt(self.time), "kind": self.kind}
        if self.phase:
            d["phase"] = fmt(self.phase)
        for key in ("k", "ell", "element", "cls"):
            v = getattr(self, key)
            if v is not None:
                d[key] = v
        if self.eps is not None:
            d["eps"] = fmt(self.eps)
        if self.action is not None:
            d["action"] = {"kind": self.action.kind, "arg": self.action.arg}
        if self.actions:
            d["actions"] = [{"kind": a.kind, "arg": a.arg} for a in self.actions]
        if self.served:
            d["served"] = list(self.served)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


@dataclass
class Snapshot:
    """Counter state of Algorithm 2 after an event."""

    time: Fraction
    phase: Fraction
    order: tuple
    rc: dict
    ec: dict
    life: dict
    d: dict
    raw: Fraction
    cause: str = ""  # "tick" or the kind of the event just fired


@dataclass
class RunResult:
    inst: Instance
    policy: str
    alg_trace: ActionTrace
    events: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)
    d_total: dict = field(default_factory=dict)
    arrival_pos: dict = field(default_factory=dict)
    alg_served: dict = field(default_factory=dict)

    def events_jsonl(self) -> str:
        return "".join(e.to_json() + "\n" for e in self.events)


class _Opt:
    """Replays the adversary's trace to know which requests it still owes."""

    def __init__(self, inst: Instance, trace: Optional[ActionTrace]):
        if trace is not None and trace.n != inst.n:
            raise TraceError("adversary trace has a different n")
        self.inst = inst
        self.actions = [] if trace is None else [Action(a.time, OPT, a.kind, a.arg) for a in trace.actions]
        self.pos = 0
        self.state = ListState.identity(inst.n)
        self.active: set[int] = set()

    def next_time(self) -> Optional[Fraction]:
        return self.actions[self.pos].time if self.pos < len(self.actions) else None

    def run_until(self, t: Fraction) -> list[EngineEvent]:
        out = []
        while self.pos < len(self.actions) and self.actions[self.pos].time <= t:
            a = self.actions[self.pos]
            if a.time < t:
                raise TraceError("adversary action skipped by the engine")
            self.pos += 1
            served = ()
            if a.kind == SWAP:
                self.state = self.state.swap_adjacent(a.arg)
            else:
                pre = self.state.prefix_elements(a.arg)
                served = tuple(sorted(k for k in self.active if self.inst.request(k).element in pre))
                self.active.difference_update(served)
            out.append(EngineEvent(t, OPT_ACTION, action=a, served=served))
        return out


def _fired_event(t: Fraction, phase: Fraction, f: Fired) -> EngineEvent:
    kind = {"deadline": DEADLINE, "prefix": PREFIX, "element": ELEMENT}[f.kind]
    return EngineEvent(
        t, kind, phase=phase, k=f.k, ell=f.ell, element=f.element, actions=tuple(f.actions), served=tuple(f.served)
    )


def run(inst: Instance, policy, opt_trace: Optional[ActionTrace] = None, record: bool = False) -> RunResult:
    """Simulate a policy (object or name) on inst, optionally next to an adversary."""
    if isinstance(policy, str):
        policy = make_policy(policy, inst)
    if policy.model != inst.model:
        raise ValueError(f"policy {policy.name} does not fit a {inst.model} instance")
    if inst.model == TIME_WINDOWS:
        return _run_windows(inst, policy, opt_trace)
    return _run_delays(inst, policy, opt_trace, record)


def _run_windows(inst, policy, opt_trace) -> RunResult:
    opt = _Opt(inst, opt_trace)
    times = {r.arrival for r in inst.requests} | {r.deadline for r in inst.requests}
    times |= {a.time for a in opt.actions}
    events: list[EngineEvent] = []
    actions: list[Action] = []
    for t in sorted(times):
        for r in inst.requests:
            if r.arrival == t:
                policy.arrive(r)
                opt.active.add(r.k)
                events.append(EngineEvent(t, ARRIVAL, k=r.k, element=r.element))
        events.extend(opt.run_until(t))
        for f in policy.on_instant(t):
            events.append(_fired_event(t, ZERO, f))
            actions.extend(f.actions)
    trace = ActionTrace(inst.n, actions, ALG)
    return RunResult(inst, policy.name, trace, events, alg_served=dict(policy.served_at))


def _run_delays(inst: Instance, policy: CounterPolicy, opt_trace, record) -> RunResult:
    opt = _Opt(inst, opt_trace)
    reqs = inst.requests
    by_arrival = sorted(reqs, key=lambda r: (r.arrival, r.k))
    bp_times = sorted({b.t for r in reqs for b in r.delay.breakpoints})
    events: list[EngineEvent] = []
    actions: list[Action] = []
    snaps: list[Snapshot] = []
    arrived: set[int] = set()
    paid: dict[int, Fraction] = {}
    ai = 0  # next arrival index

    def raw_cost() -> Fraction:
        c = Fraction(sum(a.cost for a in actions))
        c += sum(paid.values(), ZERO)
        c += sum((policy.d[k] for k in policy.active), ZERO)
        return c

    def snap(t, phase, cause):
        if not record:
            return
        rc = dict(getattr(policy, "rc", {}))
        life = dict(getattr(policy, "life", {}))
        snaps.append(Snapshot(t, phase, policy.state.order, rc, dict(policy.ec), life, dict(policy.d), raw_cost(), cause))

    def fire(t, phase) -> int:
        fired = policy.fire_due(t)
        for f in fired:
            for k in f.served:
                paid[k] = inst.request(k).delay.left_limit(t)
            events.append(_fired_event(t, phase, f))
            actions.extend(f.actions)
            snap(t, phase, events[-1].kind)
        return len(fired)

    def tick(t, phase, inc_all: dict[int, Fraction]):
        alg_inc = {}
        for k in sorted(inc_all):
            x = inc_all[k]
            if x <= 0:
                continue
            in_alg = k in policy.active
            in_opt = k in opt.active
            if not (in_alg or in_opt):
                continue
            cls = BOTH if in_alg and in_opt else (ALG_ONLY if in_alg else OPT_ONLY)
            events.append(EngineEvent(t, DELAY_TICK, phase=phase, k=k, eps=x, cls=cls))
            if in_alg:
                alg_inc[k] = x
        if alg_inc:
            policy.accrue(alg_inc)
            snap(t, phase, "tick")

    candidates = [r.arrival for r in reqs] + bp_times + [a.time for a in opt.actions]
    t = min(candidates) if candidates else None
    while t is not None:
        while ai < len(by_arrival) and by_arrival[ai].arrival == t:
            r = by_arrival[ai]
            ai += 1
            arrived.add(r.k)
            policy.arrive(r)
            opt.active.add(r.k)
            events.append(EngineEvent(t, ARRIVAL, k=r.k, element=r.element))
        events.extend(opt.run_until(t))
        fire(t, ZERO)

        jumps = {k: inst.request(k).delay.jump_at(t) for k in sorted(arrived)}
        jumps = {k: j for k, j in jumps.items() if j > 0}
        phase = ZERO
        while jumps and phase < 1:
            rates = {k: j for k, j in jumps.items() if k in policy.active}
            tau = policy.next_crossing(rates)
            step = tau if tau is not None and phase + tau <= 1 else 1 - phase
            if step > 0:
                tick(t, phase + step, {k: j * step for k, j in jumps.items()})
            phase += step
            if not fire(t, phase) and step == 0:
                raise RuntimeError("engine stalled inside a jump")

        # linear piece up to the next instant
        nxt = [x for x in (
            by_arrival[ai].arrival if ai < len(by_arrival) else None,
            next((b for b in bp_times if b > t), None),
            opt.next_time(),
        ) if x is not None]
        horizon = min(nxt) if nxt else None
        slopes = {k: inst.request(k).delay.slope_after(t) for k in sorted(arrived)}
        slopes = {k: s for k, s in slopes.items() if s > 0 and (k in policy.active or k in opt.active)}
        tau = policy.next_crossing({k: s for k, s in slopes.items() if k in policy.active})
        if tau is not None and (horizon is None or t + tau < horizon):
            horizon = t + tau
        if horizon is None:
            break
        if slopes:
            tick(horizon, ZERO, {k: s * (horizon - t) for k, s in slopes.items()})
        t = horizon

    trace = ActionTrace(inst.n, actions, ALG)
    return RunResult(
        inst,
        policy.name,
        trace,
        events,
        snaps,
        d_total=dict(policy.d),
        arrival_pos=dict(policy.arrival_pos),
        alg_served=dict(policy.served_at),
    )


# ------------------------------------------------------------ invariants


def check_counter_invariants(result: RunResult) -> list[str]:
    """Re-check Algorithm 2's counter invariants on every recorded snapshot.

    Returns a list of human-readable violations (empty when all hold).
    """
    inst = result.inst
    req = inst.request
    bad: list[str] = []
    dtot = result.d_total
    for s in result.snapshots:
        where = f"t={s.time} phase={s.phase}"
        state = ListState(s.order)
        rc_e: dict[int, Fraction] = {}
        for k, x in s.rc.items():
            rc_e[req(k).element] = rc_e.get(req(k).element, ZERO) + x
        live = ZERO
        dsum = ZERO
        for ell, e in enumerate(s.order, 1):
            live += rc_e.get(e, ZERO)
            if live > ell:
                bad.append(f"{where}: request counters of prefix {ell} sum to {live}")
            if s.ec[e] > ell:
                bad.append(f"{where}: EC of c{e} is {s.ec[e]} > position {ell}")
            if s.ec[e] < rc_e.get(e, ZERO):
                bad.append(f"{where}: EC of c{e} below its request counters")
            dsum += sum((dtot[k] for k, lf in s.life.items() if lf in (ACTIVE, FROZEN_RC) and req(k).element == e), ZERO)
            if dsum > 2 * ell:
                bad.append(f"{where}: total delay of prefix {ell} is {dsum} > {2 * ell}")
        for k, lf in s.life.items():
            x = state.position(req(k).element)
            if lf == ACTIVE and x != result.arrival_pos[k]:
                bad.append(f"{where}: active request {k} moved from {result.arrival_pos[k]} to {x}")
            if lf != ACTIVE and lf != "deleted" and x < result.arrival_pos[k]:
                bad.append(f"{where}: frozen request {k} moved forward")
        if s.raw > 6 * sum(s.d.values(), ZERO):
            bad.append(f"{where}: raw cost {s.raw} exceeds 6 * total delay")
    return bad


def check_window_structure(inst: Instance, alg_trace: ActionTrace) -> list[str]:
    """Structural facts about Algorithm 1 on a trigger-only instance.

    At every instant (after arrivals, and after each access with its
    move-to-front) the requests still pending for the online list must sit
    on distinct positions with each at least twice the previous one, hence
    number at most floor(log2 n) + 1; and a pending request's element keeps
    the position it had when the request arrived.
    """
    req = inst.request
    state = ListState.identity(inst.n)
    pending: dict[int, int] = {}  # k -> position at arrival
    bad: list[str] = []
    cap = inst.n.bit_length()  # floor(log2 n) + 1
    arrivals = sorted(inst.requests, key=lambda r: (r.arrival, r.k))
    acts = list(alg_trace.actions)
    times = sorted({r.arrival for r in inst.requests} | {a.time for a in acts})
    ai = qi = 0

    def check(where):
        pos = sorted(state.position(req(k).element) for k in pending)
        if len(pos) > cap:
            bad.append(f"{where}: {len(pos)} pending requests > {cap}")
        for u, v in zip(pos, pos[1:]):
            if 2 * u > v:
                bad.append(f"{where}: pending positions {pos} not doubling")
                break
        for k, x in pending.items():
            if state.position(req(k).element) != x:
                bad.append(f"{where}: pending request {k} moved from {x}")

    for t in times:
        while ai < len(arrivals) and arrivals[ai].arrival == t:
            r = arrivals[ai]
            pending[r.k] = state.position(r.element)
            ai += 1
        check(f"t={t}")
        while qi < len(acts) and acts[qi].time == t:
            a = acts[qi]
            if a.kind == ACCESS:
                pre = state.prefix_elements(a.arg)
                for k in [k for k in pending if req(k).element in pre]:
                    del pending[k]
            else:
                state = state.swap_adjacent(a.arg)
            qi += 1
            if qi == len(acts) or acts[qi].kind == ACCESS or acts[qi].time != t:
                check(f"t={t}")
    return bad


def opt_cost_from_log(result: RunResult) -> Fraction:
    """Adversary cost reconstructed from the joint log."""
    c = ZERO
    for e in result.events:
        if e.kind == OPT_ACTION:
            c += e.action.cost
        elif e.kind == DELAY_TICK and e.cls in (BOTH, OPT_ONLY):
            c += e.eps
    return c


def alg_actions_from_log(result: RunResult) -> list[Action]:
    out = []
    for e in result.events:
        out.extend(e.actions)
    return out


__all__ = [
    "ALG",
    "OPT",
    "DelayAlgorithm",
    "EngineEvent",
    "RunResult",
    "Snapshot",
    "check_counter_invariants",
    "check_window_structure",
    "run",
]
