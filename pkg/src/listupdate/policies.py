"""Online policies.

Two families live here. Window policies (Algorithm 1 and move-to-front)
react to deadlines. Counter policies (Algorithm 2 and the failed variants
A1..A9) accumulate delay into counters and act when a counter sum reaches
a position threshold; the engine feeds them exact delay increments and asks
for the next crossing.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .instance import DELAYS, TIME_WINDOWS, Instance, Request
from .lists import ListState
from .trace import ACCESS, ALG, SWAP, Action

ACTIVE = "active"
FROZEN_RC = "frozen_with_rc"
FROZEN = "frozen_without_rc"
DELETED = "deleted"

POLICY_NAMES = ("tw", "delay", "mtf") + tuple(f"a{i}" for i in range(1, 10))
ZERO = Fraction(0)


class PolicyError(RuntimeError):
    pass


@dataclass
class Fired:
    """One policy event together with the actions it produced."""

    kind: str  # deadline | prefix | element
    actions: list[Action]
    served: list[int]
    k: Optional[int] = None
    ell: Optional[int] = None
    element: Optional[int] = None
    info: dict = field(default_factory=dict)


class _ListOwner:
    def __init__(self, inst: Instance):
        self.inst = inst
        self.n = inst.n
        self.state = ListState.identity(inst.n)
        self.active: set[int] = set()
        self.served_at: dict[int, Fraction] = {}

    def arrive(self, r: Request) -> None:
        self.active.add(r.k)

    def _access(self, t: Fraction, depth: int) -> tuple[Action, list[int]]:
        depth = min(depth, self.n)
        pre = self.state.prefix_elements(depth)
        served = sorted(k for k in self.active if self.inst.request(k).element in pre)
        for k in served:
            self.active.discard(k)
            self.served_at[k] = t
        return Action(t, ALG, ACCESS, depth), served

    def _mtf(self, t: Fraction, e: int) -> list[Action]:
        acts = [Action(t, ALG, SWAP, p) for p in self.state.mtf_swaps(e)]
        self.state, _ = self.state.move_to_front(e)
        return acts


# ------------------------------------------------------------ windows


class WindowAlgorithm(_ListOwner):
    """Algorithm 1: at a deadline, access 2i-1 deep and move the trigger up."""

    name = "tw"
    model = TIME_WINDOWS

    def on_instant(self, t: Fraction) -> list[Fired]:
        due = [k for k in self.active if self.inst.request(k).deadline == t]
        if not due:
            return []
        pos = self.state.position
        far = max(pos(self.inst.request(k).element) for k in due)
        trig = min(k for k in due if pos(self.inst.request(k).element) == far)
        e = self.inst.request(trig).element
        acc, served = self._access(t, 2 * far - 1)
        acts = [acc] + self._mtf(t, e)
        if any(k in self.active for k in due):
            raise PolicyError("due request left unserved")
        return [Fired("deadline", acts, served, k=trig, element=e, ell=far)]


class MoveToFront(_ListOwner):
    """Classical move-to-front on zero-width windows."""

    name = "mtf"
    model = TIME_WINDOWS

    def __init__(self, inst: Instance):
        super().__init__(inst)
        for r in inst.requests:
            if r.arrival != r.deadline:
                raise PolicyError(f"mtf needs zero-width windows; request {r.k} has [{r.arrival}, {r.deadline}]")

    def on_instant(self, t: Fraction) -> list[Fired]:
        out = []
        for k in sorted(k for k in self.active if self.inst.request(k).deadline == t):
            if k not in self.active:
                continue
            e = self.inst.request(k).element
            acc, served = self._access(t, self.state.position(e))
            out.append(Fired("deadline", [acc] + self._mtf(t, e), served, k=k, element=e))
        return out


# ------------------------------------------------------------ counters


def _min_opt(a: Optional[Fraction], b: Optional[Fraction]) -> Optional[Fraction]:
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


class CounterPolicy(_ListOwner):
    model = DELAYS

    def __init__(self, inst: Instance):
        super().__init__(inst)
        self.ec: dict[int, Fraction] = {e: ZERO for e in range(1, inst.n + 1)}
        self.d: dict[int, Fraction] = {}  # delay accrued while active
        self.arrival_pos: dict[int, int] = {}

    def arrive(self, r: Request) -> None:
        super().arrive(r)
        self.d[r.k] = ZERO
        self.arrival_pos[r.k] = self.state.position(r.element)

    def accrue(self, inc: dict[int, Fraction]) -> None:
        for k, x in inc.items():
            if k not in self.active:
                raise PolicyError(f"accrual on inactive request {k}")
            self.d[k] += x
            self.ec[self.inst.request(k).element] += x

    def _elem_rates(self, rates: dict[int, Fraction]) -> dict[int, Fraction]:
        out: dict[int, Fraction] = {}
        for k, x in rates.items():
            e = self.inst.request(k).element
            out[e] = out.get(e, ZERO) + x
        return out

    def _prefix_crossing(self, values: dict[int, Fraction], rates: dict[int, Fraction]) -> Optional[Fraction]:
        """Least tau >= 0 at which some prefix sum of values reaches its length."""
        best = None
        s = r = ZERO
        for ell, e in enumerate(self.state.order, 1):
            s += values.get(e, ZERO)
            r += rates.get(e, ZERO)
            if s >= ell:
                return ZERO
            if r > 0:
                best = _min_opt(best, (ell - s) / r)
        return best

    def _element_crossing(self, rates: dict[int, Fraction]) -> Optional[Fraction]:
        best = None
        for e, r in self._elem_rates(rates).items():
            if r > 0:
                best = _min_opt(best, max(ZERO, (self.state.position(e) - self.ec[e]) / r))
        return best

    def _due_prefix(self, values: dict[int, Fraction]) -> Optional[int]:
        s = ZERO
        for ell, e in enumerate(self.state.order, 1):
            s += values.get(e, ZERO)
            if s >= ell:
                return ell
        return None

    def _due_element(self) -> Optional[int]:
        for e in self.state.order:
            if self.ec[e] >= self.state.position(e):
                return e
        return None

    def next_crossing(self, rates: dict[int, Fraction]) -> Optional[Fraction]:
        raise NotImplementedError

    def fire_one(self, t: Fraction) -> Optional[Fired]:
        raise NotImplementedError

    def fire_due(self, t: Fraction) -> list[Fired]:
        out = []
        while True:
            ev = self.fire_one(t)
            if ev is None:
                return out
            out.append(ev)
            if len(out) > 10 * (self.n + len(self.inst.requests)) + 10:
                raise PolicyError("event cascade does not settle")


class DelayAlgorithm(CounterPolicy):
    """Algorithm 2 with request counters and element counters."""

    name = "delay"

    def __init__(self, inst: Instance):
        super().__init__(inst)
        self.rc: dict[int, Fraction] = {}
        self.life: dict[int, str] = {}

    def arrive(self, r: Request) -> None:
        super().arrive(r)
        self.rc[r.k] = ZERO
        self.life[r.k] = ACTIVE

    def accrue(self, inc: dict[int, Fraction]) -> None:
        super().accrue(inc)
        for k, x in inc.items():
            self.rc[k] += x

    def rc_by_element(self) -> dict[int, Fraction]:
        out: dict[int, Fraction] = {}
        for k, x in self.rc.items():
            e = self.inst.request(k).element
            out[e] = out.get(e, ZERO) + x
        return out

    def next_crossing(self, rates):
        rates = {k: x for k, x in rates.items() if x > 0}
        if not rates:
            return None
        return _min_opt(self._element_crossing(rates), self._prefix_crossing(self.rc_by_element(), self._elem_rates(rates)))

    def fire_one(self, t):
        e = self._due_element()
        if e is not None:
            return self._element_event(t, e)
        ell = self._due_prefix(self.rc_by_element())
        if ell is not None:
            return self._prefix_event(t, ell)
        return None

    def _element_event(self, t, e) -> Fired:
        ell = self.state.position(e)
        if self.ec[e] != ell:
            raise PolicyError(f"element event on c{e}: counter {self.ec[e]} != position {ell}")
        acc, served = self._access(t, 2 * ell)
        for k in served:
            self.life[k] = FROZEN_RC
        for k in [k for k in self.rc if self.inst.request(k).element == e]:
            del self.rc[k]
        for k, s in self.life.items():
            if s != DELETED and self.inst.request(k).element == e:
                self.life[k] = DELETED
        self.ec[e] = ZERO
        acts = [acc] + self._mtf(t, e)
        return Fired("element", acts, served, element=e, ell=ell)

    def _prefix_event(self, t, ell) -> Fired:
        pre = self.state.prefix_elements(ell)
        total = sum((x for k, x in self.rc.items() if self.inst.request(k).element in pre), ZERO)
        if total != ell:
            raise PolicyError(f"prefix event on {ell}: counter sum {total}")
        acc, served = self._access(t, 2 * ell)
        for k in served:
            self.life[k] = FROZEN_RC
        for k in [k for k in self.rc if self.inst.request(k).element in pre]:
            del self.rc[k]
            if self.life[k] == FROZEN_RC:
                self.life[k] = FROZEN
            elif self.life[k] == ACTIVE:
                raise PolicyError(f"request {k} left active in a served prefix")
        return Fired("prefix", [acc], served, ell=ell)


class ElementCounterPolicy(CounterPolicy):
    """A1: act when an element counter reaches its position."""

    name = "a1"

    def next_crossing(self, rates):
        rates = {k: x for k, x in rates.items() if x > 0}
        return self._element_crossing(rates) if rates else None

    def fire_one(self, t):
        e = self._due_element()
        if e is None:
            return None
        ell = self.state.position(e)
        acc, served = self._access(t, 2 * ell)
        self.ec[e] = ZERO
        return Fired("element", [acc] + self._mtf(t, e), served, element=e, ell=ell)


class PrefixElementPolicy(CounterPolicy):
    """A2..A9: act when the element counters of a prefix reach its length."""

    def __init__(self, inst: Instance, which: int):
        super().__init__(inst)
        if not 2 <= which <= 9:
            raise PolicyError(f"no prefix variant a{which}")
        self.which = which
        self.name = f"a{which}"
        self.zero_prefix = which in (3, 5, 7, 9)

    def next_crossing(self, rates):
        rates = {k: x for k, x in rates.items() if x > 0}
        if not rates:
            return None
        return self._prefix_crossing(self.ec, self._elem_rates(rates))

    def choose(self, ell: int) -> int:
        pre = self.state.order[:ell]
        ec = self.ec
        w = self.which
        if w in (2, 3):
            return pre[-1]
        if w in (4, 5):
            top = max(ec[e] for e in pre)
            return [e for e in pre if ec[e] == top][-1]
        if w in (6, 7):
            top = max(ec[e] for e in pre)
            return [e for e in pre if ec[e] >= top / 2][-1]
        # 8, 9: maximize F + 2 EC where F is the counter mass in front
        best, arg, f = None, None, ZERO
        for e in pre:
            score = f + 2 * ec[e]
            if best is None or score >= best:
                best, arg = score, e
            f += ec[e]
        return arg

    def fire_one(self, t):
        ell = self._due_prefix(self.ec)
        if ell is None:
            return None
        e = self.choose(ell)
        pre = self.state.order[:ell]
        acc, served = self._access(t, 2 * ell)
        if self.zero_prefix:
            for x in pre:
                self.ec[x] = ZERO
        else:
            self.ec[e] = ZERO
        return Fired("prefix", [acc] + self._mtf(t, e), served, ell=ell, element=e)


def make_policy(name: str, inst: Instance):
    name = name.lower()
    if name not in POLICY_NAMES:
        raise PolicyError(f"unknown policy {name!r}; choose from {', '.join(POLICY_NAMES)}")
    cls = {"tw": WindowAlgorithm, "mtf": MoveToFront, "delay": DelayAlgorithm, "a1": ElementCounterPolicy}.get(name)
    expected = TIME_WINDOWS if name in ("tw", "mtf") else DELAYS
    if inst.model != expected:
        raise PolicyError(f"policy {name} needs a {expected} instance, got {inst.model}")
    if cls is not None:
        return cls(inst)
    return PrefixElementPolicy(inst, int(name[1:]))
