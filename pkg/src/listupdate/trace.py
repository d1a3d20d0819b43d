"""Action traces, cost accounting and the two schedule transformations."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Union

from .instance import TIME_WINDOWS, Instance, InstanceError, fmt, make_instance, to_fraction
from .lists import ListState

SWAP = "swap"
ACCESS = "access"
ALG = "ALG"
OPT = "OPT"

Number = Union[Fraction, float]


class TraceError(ValueError):
    pass


class TraceViolation(TraceError):
    """A time-window request served late or never."""

    def __init__(self, k: int, serve_time: Optional[Fraction]):
        self.k = k
        self.serve_time = serve_time
        when = "never served" if serve_time is None else f"served at {serve_time}"
        super().__init__(f"request {k} {when}")


@dataclass(frozen=True)
class Action:
    time: Fraction
    actor: str
    kind: str
    arg: int

    def to_json(self) -> str:
        return json.dumps(
            {"t": fmt(self.time), "actor": self.actor, "kind": self.kind, "arg": self.arg},
            sort_keys=True,
        )

    @property
    def cost(self) -> int:
        return self.arg if self.kind == ACCESS else 1


def swap(t, pos: int, actor: str = OPT) -> Action:
    return Action(to_fraction(t), actor, SWAP, pos)


def access(t, depth: int, actor: str = OPT) -> Action:
    return Action(to_fraction(t), actor, ACCESS, depth)


class ActionTrace:
    """A single actor's actions, replayed from the identity list."""

    def __init__(self, n: int, actions: Iterable[Action] = (), actor: Optional[str] = None):
        self.n = n
        self.actions = tuple(actions)
        actors = {a.actor for a in self.actions}
        if len(actors) > 1:
            raise TraceError(f"mixed actors in one trace: {sorted(actors)}")
        self.actor = actor or (actors.pop() if actors else OPT)
        self._check()

    def _check(self):
        prev = None
        for i, a in enumerate(self.actions):
            if a.actor != self.actor:
                raise TraceError(f"action {i}: actor {a.actor} in a {self.actor} trace")
            if prev is not None and a.time < prev:
                raise TraceError(f"action {i}: time {a.time} goes backwards")
            prev = a.time
            if a.kind == SWAP:
                if not 1 <= a.arg < self.n:
                    raise TraceError(f"action {i}: swap position {a.arg} out of range 1..{self.n - 1}")
            elif a.kind == ACCESS:
                if not 1 <= a.arg <= self.n:
                    raise TraceError(f"action {i}: access depth {a.arg} out of range 1..{self.n}")
            else:
                raise TraceError(f"action {i}: unknown kind {a.kind!r}")

    def __len__(self):
        return len(self.actions)

    def __iter__(self):
        return iter(self.actions)

    def __eq__(self, other):
        return isinstance(other, ActionTrace) and self.n == other.n and self.actions == other.actions

    def __repr__(self):
        return f"ActionTrace(n={self.n}, actor={self.actor}, {len(self.actions)} actions)"

    def states(self) -> list[ListState]:
        """List state before each action, plus the final state."""
        s = ListState.identity(self.n)
        out = [s]
        for a in self.actions:
            if a.kind == SWAP:
                s = s.swap_adjacent(a.arg)
            out.append(s)
        return out

    def final_state(self) -> ListState:
        return self.states()[-1]

    def access_cost(self) -> int:
        return sum(a.arg for a in self.actions if a.kind == ACCESS)

    def swap_cost(self) -> int:
        return sum(1 for a in self.actions if a.kind == SWAP)

    def with_actor(self, actor: str) -> "ActionTrace":
        return ActionTrace(self.n, [Action(a.time, actor, a.kind, a.arg) for a in self.actions], actor)

    def to_jsonl(self) -> str:
        return "".join(a.to_json() + "\n" for a in self.actions)


def trace_from_jsonl(text: str, n: int) -> ActionTrace:
    actions = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            d = json.loads(line)
            actions.append(Action(to_fraction(d["t"]), d["actor"], d["kind"], int(d["arg"])))
        except (KeyError, ValueError, TypeError, InstanceError) as exc:
            raise TraceError(f"line {lineno}: {exc}") from None
    return ActionTrace(n, actions)


def load_trace(path, n: int) -> ActionTrace:
    with open(path) as fh:
        return trace_from_jsonl(fh.read(), n)


# ------------------------------------------------------------ serving


def serve_points(trace: ActionTrace, inst: Instance) -> dict[int, Optional[int]]:
    """Index of the action serving each request, or None."""
    if trace.n != inst.n:
        raise TraceError("trace and instance have different n")
    out: dict[int, Optional[int]] = {r.k: None for r in inst.requests}
    pending = sorted(inst.requests, key=lambda r: (r.arrival, r.k))
    state = ListState.identity(inst.n)
    for i, a in enumerate(trace.actions):
        if a.kind == SWAP:
            state = state.swap_adjacent(a.arg)
            continue
        keep = []
        for r in pending:
            if r.arrival <= a.time and state.position(r.element) <= a.arg:
                out[r.k] = i
            else:
                keep.append(r)
        pending = keep
    return out


def serve_times(trace: ActionTrace, inst: Instance) -> dict[int, Optional[Fraction]]:
    """Time at which each request is served, or None for never."""
    pts = serve_points(trace, inst)
    return {k: None if i is None else trace.actions[i].time for k, i in pts.items()}


def validate_time_windows(trace: ActionTrace, inst: Instance) -> Optional[TraceViolation]:
    if inst.model != TIME_WINDOWS:
        raise TraceError("validate_time_windows needs a time-window instance")
    st = serve_times(trace, inst)
    for r in inst.requests:
        t = st[r.k]
        if t is None or not r.arrival <= t <= r.deadline:
            return TraceViolation(r.k, t)
    return None


@dataclass(frozen=True)
class CostBreakdown:
    access: Fraction
    swap: Fraction
    delay: Fraction
    penalty: Number
    total: Number

    def row(self) -> list[str]:
        def r(x):
            return "inf" if x == math.inf else fmt(x)

        return [r(self.access), r(self.swap), r(self.delay), r(self.penalty), r(self.total)]


def cost(trace: ActionTrace, inst: Instance) -> CostBreakdown:
    acc = Fraction(trace.access_cost())
    sw = Fraction(trace.swap_cost())
    if inst.model == TIME_WINDOWS:
        bad = validate_time_windows(trace, inst)
        if bad is not None:
            raise bad
        return CostBreakdown(acc, sw, Fraction(0), Fraction(0), acc + sw)
    st = serve_times(trace, inst)
    delay = Fraction(0)
    penalty: Number = Fraction(0)
    for r in inst.requests:
        t = st[r.k]
        if t is not None:
            delay += r.delay.left_limit(t)
        else:
            lim = r.delay.limit()
            penalty = math.inf if lim is None else penalty + lim
    return CostBreakdown(acc, sw, delay, penalty, acc + sw + delay + penalty)


# ------------------------------------------------------------ normalization


def _deadline_served(trace: ActionTrace, inst: Instance, idx: int, d: Fraction) -> bool:
    pts = serve_points(trace, inst)
    return any(i == idx and inst.request(k).deadline == d for k, i in pts.items())


def normalize_serve_at_deadline(trace: ActionTrace, inst: Instance) -> ActionTrace:
    """Postpone every action to a deadline without raising the cost.

    Each action first moves to the earliest deadline at or after its time.
    Then, deadline by deadline, everything after the last access that serves
    a request due at that deadline is pushed on to the next deadline.
    Finally accesses that serve nothing are dropped, trailing swaps are
    dropped, and back-to-back accesses at one time are merged.
    """
    if inst.model != TIME_WINDOWS:
        raise TraceError("normalization is defined for time-window instances")
    bad = validate_time_windows(trace, inst)
    if bad is not None:
        raise bad
    deadlines = sorted({r.deadline for r in inst.requests})
    if not deadlines:
        return ActionTrace(trace.n, (), trace.actor)

    def snap(t):
        for d in deadlines:
            if d >= t:
                return d
        return None

    actions = []
    for a in trace.actions:
        d = snap(a.time)
        if d is None:
            # after the last deadline nothing can be served
            continue
        actions.append(Action(d, a.actor, a.kind, a.arg))

    for j, d in enumerate(deadlines):
        cur = ActionTrace(trace.n, actions, trace.actor)
        idxs = [i for i, a in enumerate(actions) if a.time == d]
        if not idxs:
            continue
        last = None
        for i in idxs:
            if actions[i].kind == ACCESS and _deadline_served(cur, inst, i, d):
                last = i
        tail = [i for i in idxs if last is None or i > last]
        if not tail:
            continue
        if j + 1 < len(deadlines):
            nxt = deadlines[j + 1]
            actions = [Action(nxt, a.actor, a.kind, a.arg) if i in tail else a for i, a in enumerate(actions)]
        else:
            actions = [a for i, a in enumerate(actions) if i not in tail]

    cur = ActionTrace(trace.n, actions, trace.actor)
    used = set(i for i in serve_points(cur, inst).values() if i is not None)
    actions = [a for i, a in enumerate(actions) if a.kind == SWAP or i in used]
    while actions and actions[-1].kind == SWAP:
        actions.pop()
    merged: list[Action] = []
    for a in actions:
        prev = merged[-1] if merged else None
        if a.kind == ACCESS and prev is not None and prev.kind == ACCESS and prev.time == a.time:
            merged[-1] = Action(a.time, a.actor, ACCESS, max(prev.arg, a.arg))
        else:
            merged.append(a)
    return ActionTrace(trace.n, merged, trace.actor)


def is_normalized(trace: ActionTrace, inst: Instance) -> bool:
    return normalize_serve_at_deadline(trace, inst) == trace


# ------------------------------------------------------------ triggers


def trigger_requests(inst: Instance, alg_trace: ActionTrace) -> list[int]:
    """Ids of the requests that triggered each access of Algorithm 1.

    The trigger element is the one moved to the front right after the
    access; the trigger request is the lowest-id request for it that is
    pending and due at that instant.
    """
    if inst.model != TIME_WINDOWS:
        raise TraceError("triggers are defined for time-window instances")
    acts = alg_trace.actions
    states = alg_trace.states()
    pts = serve_points(alg_trace, inst)
    out = []
    for i, a in enumerate(acts):
        if a.kind != ACCESS:
            continue
        j = i + 1
        while j < len(acts) and acts[j].kind == SWAP and acts[j].time == a.time:
            j += 1
        pos = j - i  # number of MTF swaps + 1
        elem = states[i].element_at(pos)
        due = [r.k for r in inst.requests if r.element == elem and r.deadline == a.time and pts[r.k] == i]
        if not due:
            raise TraceError(f"access at {a.time} has no due request for c{elem}; not an Algorithm 1 trace")
        out.append(min(due))
    return out


def filter_non_triggers(inst: Instance, alg_trace: ActionTrace) -> Instance:
    keep = set(trigger_requests(inst, alg_trace))
    return make_instance(inst.n, inst.model, [r for r in inst.requests if r.k in keep])


def merge_timelines(opt: Sequence[Action], alg: Sequence[Action]) -> list[Action]:
    """Joint timeline; at equal times every OPT action comes first."""
    tagged = [(a.time, 0, i, a) for i, a in enumerate(opt)]
    tagged += [(a.time, 1, i, a) for i, a in enumerate(alg)]
    tagged.sort(key=lambda x: x[:3])
    return [x[3] for x in tagged]
