from itertools import product
from math import comb, factorial

import pytest

from crlohner.combinatorics import (
    MultipointerTable, add, compare, lam, lam_inverse, mi_factorial, multipointers, order,
    partitions, submultipointer,
)


def brute_set_partitions(p):
    """All set partitions of {1..p} as sets of frozensets (restricted growth strings)."""
    out = []
    for rgs in product(range(p), repeat=p):
        if rgs[0] != 0 or any(rgs[i] > max(rgs[:i]) + 1 for i in range(1, p)):
            continue
        blocks = {}
        for i, b in enumerate(rgs, start=1):
            blocks.setdefault(b, []).append(i)
        out.append(frozenset(frozenset(v) for v in blocks.values()))
    return out


def stirling2(p, k):
    return sum((-1) ** j * comb(k, j) * (k - j) ** p for j in range(k + 1)) // factorial(k)


@pytest.mark.parametrize("p", range(1, 8))
def test_partitions_match_brute_force(p):
    brute = brute_set_partitions(p)
    for k in range(1, p + 1):
        ours = partitions(p, k)
        assert len(ours) == stirling2(p, k)
        as_sets = {frozenset(frozenset(b) for b in delta) for delta in ours}
        assert as_sets == {s for s in brute if len(s) == k}


@pytest.mark.parametrize("p,k", [(4, 2), (5, 3), (6, 2)])
def test_partition_blocks_are_ordered(p, k):
    for delta in partitions(p, k):
        assert all(list(b) == sorted(b) for b in delta)
        # blocks increase in the lexicographic order (prefixes first)
        assert list(delta) == sorted(delta)


def test_partition_order_is_the_recursion_order():
    # singleton {p} appended to N^{p-1}(k-1) first, then p inserted into each block of N^{p-1}(k)
    assert partitions(3, 2) == (((1, 2), (3,)), ((1, 3), (2,)), ((1,), (2, 3)))
    p4 = partitions(4, 2)
    assert p4[0] == ((1, 2, 3), (4,)) and p4[-1] == ((1,), (2, 3, 4))


def test_small_partition_lists():
    assert partitions(3, 1) == (((1, 2, 3),),)
    assert partitions(3, 3) == (((1,), (2,), (3,)),)


@pytest.mark.parametrize("n", range(1, 7))
@pytest.mark.parametrize("p", range(1, 7))
def test_lambda_is_a_bijection(n, p):
    mps = multipointers(n, p)
    alphas = [lam(a, n) for a in mps]
    assert len(set(alphas)) == len(mps) == comb(n + p - 1, p)
    assert all(order(al) == p and len(al) == n for al in alphas)
    assert all(lam_inverse(al) == a for al, a in zip(alphas, mps))


def test_lambda_examples():
    assert lam((1, 1, 3), 3) == (2, 0, 1)
    assert lam_inverse((0, 2, 1)) == (2, 2, 3)
    assert mi_factorial((2, 0, 3)) == 12


def test_multipointer_helpers():
    assert add((1, 3), (2,)) == (1, 2, 3)
    assert submultipointer((1, 2, 2, 3), (2, 4)) == (2, 3)
    assert compare((1, 2), (1, 3)) == -1 and compare((2,), (2,)) == 0


def test_table_layout():
    t = MultipointerTable(3, 3)
    assert len(t) == 3 + 6 + 10
    assert t.count(2) == 6 and t.offset(3) == 9
    assert t[t.index[(1, 2, 3)]] == (1, 2, 3)
    assert [t.order_of(i) for i in t.of_order(2)] == [2] * 6
