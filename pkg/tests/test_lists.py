import itertools
from collections import deque

import pytest

from listupdate.lists import (
    ListState,
    apply_swaps,
    count_inversions_of,
    element_name,
    inversion_partition,
    inversions,
)

L123 = ListState((1, 2, 3))


def test_element_name():
    assert element_name(7) == "c7"
    assert repr(ListState((3, 1, 2))) == "[c3, c1, c2]"


@pytest.mark.parametrize("order,e,pos", [((1, 2, 3), 1, 1), ((1, 2, 3), 3, 3), ((2, 1, 3), 1, 2)])
def test_position(order, e, pos):
    assert ListState(order).position(e) == pos


@pytest.mark.parametrize(
    "order,p,after",
    [((1, 2, 3), 1, (2, 1, 3)), ((2, 1, 3), 1, (1, 2, 3)), ((1, 2, 3), 2, (1, 3, 2))],
)
def test_swap_adjacent(order, p, after):
    assert ListState(order).swap_adjacent(p).order == after


def test_swap_out_of_range():
    with pytest.raises(ValueError):
        L123.swap_adjacent(3)
    with pytest.raises(ValueError):
        L123.swap_adjacent(0)


@pytest.mark.parametrize(
    "order,e,after,swaps",
    [((1, 2, 3), 1, (1, 2, 3), 0), ((1, 2, 3), 3, (3, 1, 2), 2), ((2, 1, 3), 3, (3, 2, 1), 2)],
)
def test_move_to_front(order, e, after, swaps):
    s, k = ListState(order).move_to_front(e)
    assert (s.order, k) == (after, swaps)
    assert apply_swaps(ListState(order), ListState(order).mtf_swaps(e)) == s


def test_prefix_elements():
    assert L123.prefix_elements(2) == {1, 2}
    assert L123.prefix_elements(0) == frozenset()
    assert ListState((3, 1, 2)).prefix_elements(1) == {3}
    with pytest.raises(ValueError):
        L123.prefix_elements(4)


@pytest.mark.parametrize("order,expected", [((1, 2, 3), 0), ((2, 1, 3), 1), ((3, 2, 1), 3)])
def test_inversions(order, expected):
    assert inversions(ListState(order), L123) == expected


@pytest.mark.parametrize(
    "a,e,inv,ni",
    [((1, 2, 3), 3, set(), {1, 2}), ((2, 1, 3), 1, {2}, set()), ((3, 1, 2), 2, {3}, {1})],
)
def test_inversion_partition(a, e, inv, ni):
    i, n = inversion_partition(ListState(a), L123, e)
    assert (i, n) == (inv, ni)
    assert count_inversions_of(ListState(a), L123, e) == len(inv)


def _swap_distance(a, b):
    # breadth-first search over permutations: an independent Kendall tau oracle
    seen = {a: 0}
    q = deque([a])
    while q:
        s = q.popleft()
        if s == b:
            return seen[s]
        for p in range(len(s) - 1):
            t = list(s)
            t[p], t[p + 1] = t[p + 1], t[p]
            t = tuple(t)
            if t not in seen:
                seen[t] = seen[s] + 1
                q.append(t)


def test_inversions_match_swap_distance():
    perms = list(itertools.permutations(range(1, 5)))
    for a in perms[::3]:
        for b in perms[::5]:
            assert inversions(ListState(a), ListState(b)) == _swap_distance(a, b)


def test_partition_sizes_add_up():
    for a in itertools.permutations(range(1, 5)):
        for e in range(1, 5):
            i, n = inversion_partition(ListState(a), ListState((4, 2, 3, 1)), e)
            assert len(i) + len(n) == ListState(a).position(e) - 1
            assert not i & n


def test_rejects_non_permutation():
    with pytest.raises(ValueError):
        ListState((1, 1, 2))
