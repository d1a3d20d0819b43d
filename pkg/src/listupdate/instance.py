"""Problem instances: time windows or piecewise-linear delay functions.

Every number is a ``Fraction``. A delay function is described by its
breakpoints ``(t_i, v_i, jump_i)``: ``v_i`` is the accumulated delay just
before ``t_i`` (the left limit), the function jumps by ``jump_i`` at ``t_i``
and then grows linearly up to ``(t_{i+1}, v_{i+1})``. After the last
breakpoint it grows at ``final_slope``. Before the first breakpoint it is 0.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Optional

TIME_WINDOWS = "time_windows"
DELAYS = "delays"
MODELS = (TIME_WINDOWS, DELAYS)


class InstanceError(ValueError):
    pass


def to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise InstanceError(f"not a rational: {x!r}")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError):
            raise InstanceError(f"not a rational: {x!r}") from None
    if isinstance(x, float):
        raise InstanceError(f"floats are not accepted, use 'p/q' strings: {x!r}")
    raise InstanceError(f"not a rational: {x!r}")


def fmt(x: Fraction) -> str:
    """Canonical 'p/q' rendering used in every file this package writes."""
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class Breakpoint:
    t: Fraction
    v: Fraction
    jump: Fraction


@dataclass(frozen=True)
class DelayFunction:
    breakpoints: tuple[Breakpoint, ...]
    final_slope: Fraction = Fraction(0)

    def __post_init__(self):
        bps = self.breakpoints
        if not bps:
            if self.final_slope != 0:
                raise InstanceError("a delay function without breakpoints must be zero")
            return
        if bps[0].v != 0:
            raise InstanceError("delay must be 0 before the first breakpoint")
        if self.final_slope < 0:
            raise InstanceError("final_slope must be nonnegative")
        for b in bps:
            if b.jump < 0:
                raise InstanceError(f"negative jump at t={b.t}")
        for b0, b1 in zip(bps, bps[1:]):
            if b1.t <= b0.t:
                raise InstanceError("breakpoint times must be strictly increasing")
            if b1.v < b0.v + b0.jump:
                raise InstanceError(f"delay decreases between t={b0.t} and t={b1.t}")

    @classmethod
    def zero(cls) -> "DelayFunction":
        return cls(())

    @classmethod
    def step(cls, t, p) -> "DelayFunction":
        return cls((Breakpoint(to_fraction(t), Fraction(0), to_fraction(p)),))

    @classmethod
    def linear(cls, t0, rate) -> "DelayFunction":
        return cls((Breakpoint(to_fraction(t0), Fraction(0), Fraction(0)),), to_fraction(rate))

    @property
    def times(self) -> tuple[Fraction, ...]:
        return tuple(b.t for b in self.breakpoints)

    def _piece(self, t: Fraction) -> int:
        """Index of the last breakpoint with time <= t, or -1."""
        idx = -1
        for i, b in enumerate(self.breakpoints):
            if b.t <= t:
                idx = i
            else:
                break
        return idx

    def slope_after(self, t) -> Fraction:
        """Growth rate on the open interval right after t."""
        t = to_fraction(t)
        i = self._piece(t)
        bps = self.breakpoints
        if i < 0:
            return Fraction(0)
        if i == len(bps) - 1:
            return self.final_slope
        b0, b1 = bps[i], bps[i + 1]
        return (b1.v - b0.v - b0.jump) / (b1.t - b0.t)

    def value_at(self, t) -> Fraction:
        """Accumulated delay at t (right-continuous)."""
        t = to_fraction(t)
        i = self._piece(t)
        if i < 0:
            return Fraction(0)
        b = self.breakpoints[i]
        return b.v + b.jump + self.slope_after(b.t) * (t - b.t)

    def jump_at(self, t) -> Fraction:
        t = to_fraction(t)
        for b in self.breakpoints:
            if b.t == t:
                return b.jump
        return Fraction(0)

    def left_limit(self, t) -> Fraction:
        """Accumulated delay just before t; serving at t pays this amount."""
        return self.value_at(t) - self.jump_at(t)

    def limit(self) -> Optional[Fraction]:
        """sup_t of the function, or None when it grows without bound."""
        if not self.breakpoints:
            return Fraction(0)
        if self.final_slope > 0:
            return None
        b = self.breakpoints[-1]
        return b.v + b.jump

    def crossing_time(self, t0, threshold) -> Optional[Fraction]:
        """Earliest t >= t0 with value_at(t) - value_at(t0) >= threshold.

        Returns None when the function never gains that much. A jump that
        carries the value past the threshold crosses at the jump instant.
        """
        t0 = to_fraction(t0)
        target = self.value_at(t0) + to_fraction(threshold)
        if self.value_at(t0) >= target:
            return t0
        # walk the pieces after t0
        knots = [t0] + [b.t for b in self.breakpoints if b.t > t0]
        for i, s in enumerate(knots):
            if self.value_at(s) >= target:
                return s
            rate = self.slope_after(s)
            end = knots[i + 1] if i + 1 < len(knots) else None
            if rate > 0:
                hit = s + (target - self.value_at(s)) / rate
                if end is None or hit < end:
                    return hit
        return None


@dataclass(frozen=True)
class Request:
    k: int
    element: int
    arrival: Fraction
    deadline: Optional[Fraction] = None
    delay: Optional[DelayFunction] = None

    @property
    def is_window(self) -> bool:
        return self.delay is None


@dataclass(frozen=True)
class Instance:
    n: int
    model: str
    requests: tuple[Request, ...] = field(default_factory=tuple)

    def __post_init__(self):
        validate_instance(self)

    @property
    def m(self) -> int:
        return len(self.requests)

    def request(self, k: int) -> Request:
        return self.requests[k - 1]

    def breakpoint_count(self) -> int:
        return sum(len(r.delay.breakpoints) for r in self.requests if r.delay is not None)


def validate_instance(inst: Instance) -> None:
    if not isinstance(inst.n, int) or inst.n < 1:
        raise InstanceError("n: must be a positive integer")
    if inst.model not in MODELS:
        raise InstanceError(f"model: must be one of {MODELS}, got {inst.model!r}")
    for idx, r in enumerate(inst.requests):
        where = f"requests[{idx}]"
        if r.k != idx + 1:
            raise InstanceError(f"{where}.id: expected {idx + 1}, got {r.k}")
        if not 1 <= r.element <= inst.n:
            raise InstanceError(f"{where}.element: {r.element} not in 1..{inst.n}")
        if r.arrival < 0:
            raise InstanceError(f"{where}.arrival: must be nonnegative")
        if inst.model == TIME_WINDOWS:
            if r.deadline is None or r.delay is not None:
                raise InstanceError(f"{where}: time-window requests need a deadline and no delay")
            if r.deadline < r.arrival:
                raise InstanceError(f"{where}.deadline: earlier than arrival")
        else:
            if r.delay is None or r.deadline is not None:
                raise InstanceError(f"{where}: delay requests need a delay function and no deadline")
            if r.delay.breakpoints and r.delay.breakpoints[0].t < r.arrival:
                raise InstanceError(f"{where}.delay: accrues before arrival")


def make_instance(n: int, model: str, requests: Iterable[Request]) -> Instance:
    """Build an instance, renumbering request ids 1..m in the given order."""
    reqs = tuple(replace(r, k=i + 1) for i, r in enumerate(requests))
    return Instance(n, model, reqs)


def window_request(e: int, a, q, k: int = 0) -> Request:
    return Request(k, e, to_fraction(a), deadline=to_fraction(q))


def delay_request(e: int, a, f: DelayFunction, k: int = 0) -> Request:
    return Request(k, e, to_fraction(a), delay=f)


def prize_collecting(e: int, a, q, p, k: int = 0) -> Request:
    """Request that is free if served by q and costs p otherwise."""
    a, q, p = to_fraction(a), to_fraction(q), to_fraction(p)
    if p < 0:
        raise InstanceError("penalty must be nonnegative")
    if q < a:
        raise InstanceError("deadline before arrival")
    f = DelayFunction.zero() if p == 0 else DelayFunction.step(q, p)
    return Request(k, e, a, delay=f)


# ---------------------------------------------------------------- JSON


def request_to_dict(r: Request) -> dict:
    d = {
        "id": r.k,
        "element": r.element,
        "arrival": fmt(r.arrival),
        "deadline": None if r.deadline is None else fmt(r.deadline),
        "delay": None,
    }
    if r.delay is not None:
        d["delay"] = {
            "breakpoints": [[fmt(b.t), fmt(b.v), fmt(b.jump)] for b in r.delay.breakpoints],
            "final_slope": fmt(r.delay.final_slope),
        }
    return d


def instance_to_dict(inst: Instance) -> dict:
    return {"n": inst.n, "model": inst.model, "requests": [request_to_dict(r) for r in inst.requests]}


def dumps(inst: Instance) -> str:
    return json.dumps(instance_to_dict(inst), indent=1, sort_keys=True)


def _field(d: dict, key: str, where: str):
    if key not in d:
        raise InstanceError(f"{where}.{key}: missing")
    return d[key]


def _rat(x, where: str) -> Fraction:
    try:
        return to_fraction(x)
    except InstanceError as exc:
        raise InstanceError(f"{where}: {exc}") from None


def instance_from_dict(d: dict) -> Instance:
    if not isinstance(d, dict):
        raise InstanceError("top level: expected an object")
    n = _field(d, "n", "instance")
    model = _field(d, "model", "instance")
    raw = _field(d, "requests", "instance")
    if not isinstance(raw, list):
        raise InstanceError("instance.requests: expected a list")
    reqs = []
    for idx, rd in enumerate(raw):
        where = f"requests[{idx}]"
        if not isinstance(rd, dict):
            raise InstanceError(f"{where}: expected an object")
        k = _field(rd, "id", where)
        e = _field(rd, "element", where)
        if not isinstance(k, int) or not isinstance(e, int):
            raise InstanceError(f"{where}: id and element must be integers")
        a = _rat(_field(rd, "arrival", where), f"{where}.arrival")
        q = rd.get("deadline")
        q = None if q is None else _rat(q, f"{where}.deadline")
        f = None
        dd = rd.get("delay")
        if dd is not None:
            bps = []
            for j, bp in enumerate(_field(dd, "breakpoints", f"{where}.delay")):
                bw = f"{where}.delay.breakpoints[{j}]"
                if not isinstance(bp, (list, tuple)) or len(bp) != 3:
                    raise InstanceError(f"{bw}: expected [t, v, jump]")
                bps.append(Breakpoint(*(_rat(x, bw) for x in bp)))
            slope = _rat(dd.get("final_slope", "0"), f"{where}.delay.final_slope")
            try:
                f = DelayFunction(tuple(bps), slope)
            except InstanceError as exc:
                raise InstanceError(f"{where}.delay: {exc}") from None
        reqs.append(Request(k, e, a, q, f))
    return Instance(n, model, tuple(reqs))


def loads(text: str) -> Instance:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"line {exc.lineno}: {exc.msg}") from None
    return instance_from_dict(d)


def load(path) -> Instance:
    with open(path) as fh:
        return loads(fh.read())


def save(inst: Instance, path) -> None:
    with open(path, "w") as fh:
        fh.write(dumps(inst) + "\n")


def window_as_prize_collecting(inst: Instance, penalty=None) -> Instance:
    """Encode a time-window instance as prize-collecting delays."""
    if inst.model != TIME_WINDOWS:
        raise InstanceError("expected a time-window instance")
    p = to_fraction(penalty) if penalty is not None else Fraction(10 * inst.n * max(inst.m, 1))
    reqs = [prize_collecting(r.element, r.arrival, r.deadline, p) for r in inst.requests]
    return make_instance(inst.n, DELAYS, reqs)


def as_tuples(inst: Instance) -> list[tuple]:
    """(element, arrival, deadline, penalty) tuples for prize-collecting instances."""
    out = []
    for r in inst.requests:
        f = r.delay
        if f is None:
            out.append((r.element, r.arrival, r.deadline, None))
        elif not f.breakpoints:
            out.append((r.element, r.arrival, r.arrival, Fraction(0)))
        else:
            b = f.breakpoints[0]
            out.append((r.element, r.arrival, b.t, b.jump))
    return out

