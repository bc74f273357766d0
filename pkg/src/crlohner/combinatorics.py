"""Multiindices, multipointers and the index sets N^p(k).

Multipointers are nondecreasing tuples of 1-based coordinate labels, e.g.
``(1, 1, 3)`` labels the derivative d^3/dx1 dx1 dx3.  A multiindex is the
tuple of exponents, ``(2, 0, 1)`` for the same derivative.  Python's tuple
ordering already is the lexicographic order in which prefixes come first,
so sorted() on multipointers gives the linear order used everywhere here.
"""

from functools import lru_cache
from itertools import combinations_with_replacement
from math import factorial

MAX_ORDER = 8


def _check_mp(a, n=None):
    a = tuple(int(x) for x in a)
    if len(a) == 0:
        raise ValueError("multipointer must have length >= 1")
    if any(a[i] > a[i + 1] for i in range(len(a) - 1)):
        raise ValueError(f"multipointer {a} is not nondecreasing")
    if a[0] < 1 or (n is not None and a[-1] > n):
        raise ValueError(f"multipointer {a} has entries outside [1, {n}]")
    return a


def lam(a, n):
    """Multiindex of multipointer ``a`` in dimension ``n``."""
    a = _check_mp(a, n)
    alpha = [0] * n
    for i in a:
        alpha[i - 1] += 1
    return tuple(alpha)


def lam_inverse(alpha):
    """Multipointer with ``alpha[i]`` copies of ``i + 1``."""
    alpha = tuple(int(x) for x in alpha)
    if any(x < 0 for x in alpha):
        raise ValueError("negative exponent")
    if sum(alpha) == 0:
        raise ValueError("zero multiindex has no multipointer")
    return tuple(i + 1 for i, c in enumerate(alpha) for _ in range(c))


def compare(a, b):
    """-1, 0 or 1 according to the lexicographic order (prefixes first)."""
    a, b = tuple(a), tuple(b)
    return (a > b) - (a < b)


def add(a, b):
    """Sum of multipointers: the sorted merge of both multisets."""
    return tuple(sorted(_check_mp(a) + _check_mp(b)))


def submultipointer(a, delta):
    """``a_delta`` with ``(a_delta)_i = a_{delta_i}`` (1-based positions)."""
    a = _check_mp(a)
    delta = _check_mp(delta, len(a))
    return tuple(a[d - 1] for d in delta)


def order(alpha):
    return sum(alpha)


def mi_factorial(alpha):
    out = 1
    for x in alpha:
        out *= factorial(x)
    return out


def multipointers(n, p):
    """All multipointers of length ``p`` over ``[1, n]`` in increasing order."""
    return tuple(combinations_with_replacement(range(1, n + 1), p))


@lru_cache(maxsize=None)
def partitions(p, k):
    """The set N^p(k) in deterministic recursion order.

    Each element is a tuple of ``k`` blocks, each block a sorted tuple; the
    blocks are increasing and together cover ``1..p`` exactly once.
    """
    if not (1 <= k <= p):
        raise ValueError(f"need 1 <= k <= p, got p={p}, k={k}")
    if k == 1:
        return (tuple([tuple(range(1, p + 1))]),)
    if k == p:
        return (tuple((i,) for i in range(1, p + 1)),)
    out = []
    # A: append the singleton (p)
    for d in partitions(p - 1, k - 1):
        out.append(d + ((p,),))
    # B: extend one block by p
    for d in partitions(p - 1, k):
        for s in range(k):
            out.append(d[:s] + (d[s] + (p,),) + d[s + 1:])
    return tuple(out)


class MultipointerTable:
    """Global index of all multipointers of orders ``1..r`` in dimension ``n``.

    Multipointers are stored order by order, each order in increasing
    lexicographic order, so ``range(offset(p), offset(p + 1))`` are the
    entries of order ``p``.
    """

    def __init__(self, n, r):
        if r > MAX_ORDER:
            raise ValueError(f"order {r} exceeds MAX_ORDER={MAX_ORDER}")
        self.n = n
        self.r = r
        self.items = []
        self._offsets = [0]
        for p in range(1, r + 1):
            self.items.extend(multipointers(n, p))
            self._offsets.append(len(self.items))
        self.index = {a: i for i, a in enumerate(self.items)}

    def __len__(self):
        return len(self.items)

    def __getitem__(self, i):
        return self.items[i]

    def offset(self, p):
        """First global index of order ``p`` (1-based order)."""
        return self._offsets[p - 1]

    def count(self, p):
        return self._offsets[p] - self._offsets[p - 1]

    def of_order(self, p):
        return range(self._offsets[p - 1], self._offsets[p])

    def order_of(self, i):
        return len(self.items[i])
