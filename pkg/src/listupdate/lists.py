"""Ordered lists over the element universe {1, ..., n}.

Positions are 1-indexed; position 1 is the front of the list.
"""

from __future__ import annotations

from itertools import combinations
from typing import Iterable, Sequence


def element_name(e: int) -> str:
    return f"c{e}"


class ListState:
    """An immutable permutation of the elements 1..n."""

    __slots__ = ("order", "_pos")

    def __init__(self, order: Sequence[int]):
        order = tuple(order)
        n = len(order)
        if sorted(order) != list(range(1, n + 1)):
            raise ValueError(f"not a permutation of 1..{n}: {order}")
        self.order = order
        self._pos = {e: i + 1 for i, e in enumerate(order)}

    @classmethod
    def identity(cls, n: int) -> "ListState":
        if n < 1:
            raise ValueError("list must hold at least one element")
        return cls(range(1, n + 1))

    @property
    def n(self) -> int:
        return len(self.order)

    def __len__(self) -> int:
        return len(self.order)

    def __eq__(self, other) -> bool:
        return isinstance(other, ListState) and self.order == other.order

    def __hash__(self) -> int:
        return hash(self.order)

    def __repr__(self) -> str:
        return "[" + ", ".join(element_name(e) for e in self.order) + "]"

    def position(self, e: int) -> int:
        try:
            return self._pos[e]
        except KeyError:
            raise ValueError(f"element {e} not in universe 1..{self.n}") from None

    def element_at(self, p: int) -> int:
        if not 1 <= p <= self.n:
            raise ValueError(f"position {p} out of range 1..{self.n}")
        return self.order[p - 1]

    def swap_adjacent(self, p: int) -> "ListState":
        """Swap the elements at positions p and p + 1."""
        if not 1 <= p < self.n:
            raise ValueError(f"swap position {p} out of range 1..{self.n - 1}")
        order = list(self.order)
        order[p - 1], order[p] = order[p], order[p - 1]
        return ListState(order)

    def move_to_front(self, e: int) -> tuple["ListState", int]:
        """Move e to the front; returns the new list and the number of swaps."""
        p = self.position(e)
        order = (e,) + self.order[: p - 1] + self.order[p:]
        return ListState(order), p - 1

    def mtf_swaps(self, e: int) -> list[int]:
        """Adjacent swap positions that move e to the front, in order."""
        return list(range(self.position(e) - 1, 0, -1))

    def prefix_elements(self, depth: int) -> frozenset[int]:
        if not 0 <= depth <= self.n:
            raise ValueError(f"depth {depth} out of range 0..{self.n}")
        return frozenset(self.order[:depth])


def inversions(a: ListState, b: ListState) -> int:
    """Number of element pairs ordered differently in a and b (Kendall tau)."""
    if a.n != b.n:
        raise ValueError("lists over different universes")
    seq = [b.position(e) for e in a.order]
    return sum(1 for i, j in combinations(range(len(seq)), 2) if seq[i] > seq[j])


def inversion_partition(alg: ListState, opt: ListState, e: int) -> tuple[frozenset[int], frozenset[int]]:
    """Split the elements before e in alg into inversions and non-inversions.

    I_e holds the elements before e in alg that come after e in opt; NI_e the
    rest. Their sizes add up to alg.position(e) - 1.
    """
    x = alg.position(e)
    y = opt.position(e)
    before = alg.order[: x - 1]
    inv = frozenset(d for d in before if opt.position(d) > y)
    return inv, frozenset(before) - inv


def count_inversions_of(alg: ListState, opt: ListState, e: int) -> int:
    x = alg.position(e)
    y = opt.position(e)
    return sum(1 for d in alg.order[: x - 1] if opt.position(d) > y)


def apply_swaps(state: ListState, positions: Iterable[int]) -> ListState:
    for p in positions:
        state = state.swap_adjacent(p)
    return state
