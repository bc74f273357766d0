"""Interval arithmetic on numpy arrays of float64 endpoints.

An :class:`Interval` holds two arrays ``lo`` and ``hi`` of equal shape, so a
scalar interval, an interval vector and an interval matrix are the same type
with different shapes.  Every operation returns a set containing all point
results; endpoints are rounded outward (see :mod:`crlohner.rounding`).

Python and numpy floats passed as operands are taken at their exact binary
value.  Decimal constants such as ``0.1`` must go through :func:`from_decimal`.
"""

from decimal import ROUND_CEILING, ROUND_FLOOR, Decimal, localcontext
from fractions import Fraction

import numpy as np

from . import kernels
from . import rounding as R


class IntervalError(ArithmeticError):
    """Raised on domain violations and operations on the empty set."""


def _arr(x):
    return np.asarray(x, dtype=float)


class Interval:
    """Box of real intervals with endpoint arrays ``lo`` and ``hi``."""

    __slots__ = ("lo", "hi", "_empty")
    __array_priority__ = 1000

    def __init__(self, lo, hi=None):
        lo = _arr(lo)
        hi = lo if hi is None else _arr(hi)
        if lo.shape != hi.shape:
            lo, hi = np.broadcast_arrays(lo, hi)
        if np.any(np.isnan(lo)) or np.any(np.isnan(hi)):
            raise IntervalError("nan endpoint")
        if np.any(lo > hi):
            raise IntervalError("lo > hi; use EMPTY for the empty set")
        self.lo = np.array(lo, dtype=float)
        self.hi = np.array(hi, dtype=float)
        self.lo.flags.writeable = False
        self.hi.flags.writeable = False
        self._empty = False

    @classmethod
    def _raw(cls, lo, hi):
        obj = object.__new__(cls)
        obj.lo = lo
        obj.hi = hi
        obj._empty = False
        return obj

    # -- construction ---------------------------------------------------------

    @classmethod
    def zeros(cls, shape):
        z = np.zeros(shape)
        return cls._raw(z, z.copy())

    @classmethod
    def eye(cls, n):
        e = np.eye(n)
        return cls._raw(e, e.copy())

    @classmethod
    def entire(cls, shape=()):
        return cls._raw(np.full(shape, -np.inf), np.full(shape, np.inf))

    @classmethod
    def from_mid_rad(cls, mid, rad):
        mid, rad = _arr(mid), _arr(rad)
        return cls._raw(R.vadd_down(mid, -rad), R.vadd_up(mid, rad))

    # -- container protocol ------------------------------------------------------

    @property
    def shape(self):
        return self.lo.shape

    @property
    def ndim(self):
        return self.lo.ndim

    @property
    def size(self):
        return self.lo.size

    def __len__(self):
        return len(self.lo)

    def __getitem__(self, idx):
        self._check()
        return Interval._raw(self.lo[idx], self.hi[idx])

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    @property
    def T(self):
        return Interval._raw(self.lo.T, self.hi.T)

    def reshape(self, *shape):
        return Interval._raw(self.lo.reshape(*shape), self.hi.reshape(*shape))

    def transpose(self, *axes):
        return Interval._raw(self.lo.transpose(*axes), self.hi.transpose(*axes))

    def with_item(self, idx, value):
        """Copy of ``self`` with ``self[idx]`` replaced by ``value``."""
        value = as_interval(value)
        lo, hi = self.lo.copy(), self.hi.copy()
        lo[idx] = value.lo
        hi[idx] = value.hi
        return Interval._raw(lo, hi)

    def is_empty(self):
        return self._empty

    def _check(self):
        if self._empty:
            raise IntervalError("operation on the empty interval")

    # -- metrics --------------------------------------------------------------------

    def mid(self):
        """Representable point inside every component."""
        self._check()
        m = 0.5 * self.lo + 0.5 * self.hi
        m = np.where(np.isfinite(m), m, np.where(np.isfinite(self.lo), self.lo, self.hi))
        m = np.where(np.isinf(self.lo) & np.isinf(self.hi), 0.0, m)
        return np.clip(m, self.lo, self.hi)

    def diam(self):
        """Upper bound of hi - lo."""
        self._check()
        return R.vadd_up(self.hi, -self.lo)

    def rad(self):
        """Upper bound of the radius about :meth:`mid`."""
        m = self.mid()
        return np.maximum(R.vadd_up(self.hi, -m), R.vadd_up(m, -self.lo))

    def mag(self):
        self._check()
        return np.maximum(np.abs(self.lo), np.abs(self.hi))

    def mig(self):
        self._check()
        inside = (self.lo <= 0) & (self.hi >= 0)
        return np.where(inside, 0.0, np.minimum(np.abs(self.lo), np.abs(self.hi)))

    def is_bounded(self):
        return bool(np.all(np.isfinite(self.lo)) and np.all(np.isfinite(self.hi)))

    def is_point(self):
        return bool(np.all(self.lo == self.hi))

    def width_max(self):
        return float(np.max(self.diam())) if self.size else 0.0

    # -- set operations -----------------------------------------------------------

    def contains(self, x):
        """True if every component contains the corresponding component of x."""
        self._check()
        if isinstance(x, Interval):
            if x._empty:
                return True
            return bool(np.all(self.lo <= x.lo) and np.all(x.hi <= self.hi))
        if isinstance(x, Fraction):
            return bool(np.all([Fraction(lo) <= x <= Fraction(hi)
                                for lo, hi in zip(self.lo.ravel(), self.hi.ravel())]))
        x = _arr(x)
        return bool(np.all(self.lo <= x) and np.all(x <= self.hi))

    def subset(self, other):
        return as_interval(other).contains(self)

    def interior_subset(self, other):
        """True if self lies in the interior of other, componentwise strictly."""
        self._check()
        other = as_interval(other)
        return bool(np.all(other.lo < self.lo) and np.all(self.hi < other.hi))

    def overlaps(self, other):
        other = as_interval(other)
        if self._empty or other._empty:
            return False
        return bool(np.all(np.maximum(self.lo, other.lo) <= np.minimum(self.hi, other.hi)))

    def intersect(self, other):
        """Intersection; returns :data:`EMPTY` if any component is disjoint."""
        other = as_interval(other)
        if self._empty or other._empty:
            return EMPTY
        lo = np.maximum(self.lo, other.lo)
        hi = np.minimum(self.hi, other.hi)
        if np.any(lo > hi):
            return EMPTY
        return Interval._raw(lo, hi)

    def hull(self, other):
        other = as_interval(other)
        if self._empty:
            return other
        if other._empty:
            return self
        return Interval._raw(np.minimum(self.lo, other.lo), np.maximum(self.hi, other.hi))

    def inflate(self, factor, absolute=0.0):
        """Scale the radius about the midpoint and add an absolute margin."""
        m = self.mid()
        r = self.rad() * factor + absolute
        return Interval.from_mid_rad(m, r)

    # -- arithmetic -------------------------------------------------------------------

    def __pos__(self):
        return self

    def __neg__(self):
        self._check()
        return Interval._raw(-self.hi, -self.lo)

    def __add__(self, other):
        other = as_interval(other)
        self._check()
        other._check()
        return Interval._raw(R.vadd_down(self.lo, other.lo), R.vadd_up(self.hi, other.hi))

    __radd__ = __add__

    def __sub__(self, other):
        other = as_interval(other)
        self._check()
        other._check()
        return Interval._raw(R.vadd_down(self.lo, -other.hi), R.vadd_up(self.hi, -other.lo))

    def __rsub__(self, other):
        return as_interval(other) - self

    def __mul__(self, other):
        other = as_interval(other)
        self._check()
        other._check()
        lo, hi = R.vmul(self.lo, self.hi, other.lo, other.hi)
        return Interval._raw(lo, hi)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = as_interval(other)
        self._check()
        other._check()
        if np.any((other.lo <= 0) & (other.hi >= 0)):
            raise IntervalError("division by an interval containing zero")
        lo, hi = R.vdiv(self.lo, self.hi, other.lo, other.hi)
        return Interval._raw(lo, hi)

    def __rtruediv__(self, other):
        return as_interval(other) / self

    def __pow__(self, k):
        return power(self, k)

    def __matmul__(self, other):
        return matmul(self, other)

    def __rmatmul__(self, other):
        return matmul(as_interval(other), self)

    def __abs__(self):
        self._check()
        return Interval._raw(self.mig(), self.mag())

    def sum(self, axis=None):
        self._check()
        if axis is None:
            lo, hi = kernels.sum_axis(self.lo.ravel(), self.hi.ravel(), 0)
        else:
            lo, hi = kernels.sum_axis(self.lo, self.hi, axis)
        return Interval._raw(np.asarray(lo), np.asarray(hi))

    def __eq__(self, other):
        if not isinstance(other, Interval):
            return NotImplemented
        if self._empty or other._empty:
            return self._empty and other._empty
        return bool(np.array_equal(self.lo, other.lo) and np.array_equal(self.hi, other.hi))

    __hash__ = None

    # -- printing -------------------------------------------------------------------------

    def __repr__(self):
        if self._empty:
            return "EMPTY"
        if self.ndim == 0:
            return f"Interval({float(self.lo)!r}, {float(self.hi)!r})"
        return f"Interval(lo={self.lo.tolist()!r}, hi={self.hi.tolist()!r})"

    def to_decimal(self, digits=17):
        """Outward-rounded decimal strings, nested like the array."""
        self._check()
        if self.ndim == 0:
            return format_decimal(float(self.lo), float(self.hi), digits)
        return [self[i].to_decimal(digits) for i in range(len(self))]

    def to_hex(self):
        """Exact serialization with hexadecimal float literals."""
        self._check()
        if self.ndim == 0:
            return [float(self.lo).hex(), float(self.hi).hex()]
        return [self[i].to_hex() for i in range(len(self))]

    @classmethod
    def from_hex(cls, data):
        def walk(d, pick):
            if isinstance(d[0], str):
                return float.fromhex(d[pick])
            return [walk(x, pick) for x in d]

        return cls(walk(data, 0), walk(data, 1))


class _Empty(Interval):
    __slots__ = ()

    def __init__(self):
        self.lo = np.array(np.nan)
        self.hi = np.array(np.nan)
        self._empty = True


EMPTY = _Empty()


def as_interval(x):
    if isinstance(x, Interval):
        return x
    if isinstance(x, ComplexInterval):
        raise TypeError("complex interval used where a real one is expected")
    if isinstance(x, Fraction):
        return from_fraction(x)
    a = _arr(x)
    return Interval._raw(a, a.copy())


def _fmt_dir(x, digits, rounding):
    if not np.isfinite(x):
        return "inf" if x > 0 else "-inf"
    with localcontext() as ctx:
        ctx.prec = digits
        ctx.rounding = rounding
        d = +Decimal(float(x))
    return format(d, "g") if d != 0 else "0"


def format_decimal(lo, hi, digits=17):
    """Decimal text ``[lo, hi]`` rounded outward to ``digits`` significant digits."""
    return f"[{_fmt_dir(lo, digits, ROUND_FLOOR)}, {_fmt_dir(hi, digits, ROUND_CEILING)}]"


def _fraction_bounds(q):
    f = float(q)
    lo = f if Fraction(f) <= q else float(np.nextafter(f, -np.inf))
    hi = f if Fraction(f) >= q else float(np.nextafter(f, np.inf))
    return lo, hi


def from_fraction(q):
    lo, hi = _fraction_bounds(Fraction(q))
    return Interval(lo, hi)


def from_decimal(text):
    """Tightest interval containing a decimal literal such as ``'0.1'``."""
    if isinstance(text, (list, tuple)):
        parts = [from_decimal(t) for t in text]
        return Interval([p.lo for p in parts], [p.hi for p in parts])
    return from_fraction(Fraction(str(text).strip()))


def parse_interval(text):
    """Parse ``'[a, b]'`` or a single decimal into an enclosing interval."""
    s = text.strip()
    if s.startswith("["):
        a, b = s.strip("[]").split(",")
        return hull(from_decimal(a), from_decimal(b))
    return from_decimal(s)


def hull(*items):
    out = EMPTY
    for it in items:
        out = out.hull(as_interval(it))
    return out


def stack(items, axis=0):
    items = [as_interval(x) for x in items]
    return Interval._raw(np.stack([x.lo for x in items], axis),
                         np.stack([x.hi for x in items], axis))


def concatenate(items, axis=0):
    items = [as_interval(x) for x in items]
    return Interval._raw(np.concatenate([x.lo for x in items], axis),
                         np.concatenate([x.hi for x in items], axis))


def matmul(a, b):
    """Interval matrix-matrix or matrix-vector product."""
    a, b = as_interval(a), as_interval(b)
    a._check()
    b._check()
    vec = b.ndim == 1
    if vec:
        b = b.reshape(-1, 1)
    if a.shape[-1] != b.shape[-2]:
        raise ValueError(f"dimension mismatch {a.shape} @ {b.shape}")
    lo, hi = kernels.matmul(a.lo, a.hi, b.lo, b.hi)
    out = Interval._raw(lo, hi)
    return out.reshape(-1) if vec else out


# -- elementary functions --------------------------------------------------------


def _map2(fn, x):
    x = as_interval(x)
    x._check()
    lo = np.empty(x.shape)
    hi = np.empty(x.shape)
    for i in np.ndindex(x.shape):
        lo[i], hi[i] = fn(float(x.lo[i]), float(x.hi[i]))
    return Interval._raw(lo, hi)


def sin(x):
    return _map2(R.sin_bounds, x)


def cos(x):
    return _map2(R.cos_bounds, x)


def exp(x):
    return _map2(lambda a, b: (R.exp_down(a), R.exp_up(b)), x)


def sqrt(x):
    x = as_interval(x)
    if np.any(x.lo < 0):
        raise IntervalError("sqrt of an interval reaching below zero")
    return _map2(lambda a, b: (R.sqrt_down(a), R.sqrt_up(b)), x)


def power(x, k):
    """Integer power with monotone (odd) or mig/mag (even) endpoint bounds."""
    x = as_interval(x)
    k = int(k)
    if k < 0:
        return 1.0 / power(x, -k)
    if k == 0:
        return as_interval(np.ones(x.shape))
    if k % 2:
        return _map2(lambda a, b: (_pow_down(a, k), _pow_up(b, k)), x)

    def even(a, b):
        lo = 0.0 if a <= 0.0 <= b else min(abs(a), abs(b))
        return _pow_down(lo, k), _pow_up(max(abs(a), abs(b)), k)

    return _map2(even, x)


def _pow_up(a, k):
    if a < 0:
        return -_pow_down(-a, k)
    out = 1.0
    for _ in range(k):
        out = R.mul_up(out, a)
    return out


def _pow_down(a, k):
    if a < 0:
        return -_pow_up(-a, k)
    out = 1.0
    for _ in range(k):
        out = R.mul_down(out, a)
    return out


def pi():
    return Interval(R.PI_LO, R.PI_HI)


# -- complex rectangles ----------------------------------------------------------


class ComplexInterval:
    """Rectangle ``re + i im`` in the complex plane."""

    __slots__ = ("re", "im")
    __array_priority__ = 1000

    def __init__(self, re, im=0.0):
        self.re = as_interval(re)
        self.im = as_interval(im)

    @classmethod
    def coerce(cls, x):
        if isinstance(x, ComplexInterval):
            return x
        if isinstance(x, (complex, np.complexfloating)):
            return cls(x.real, x.imag)
        return cls(as_interval(x), 0.0)

    def __add__(self, o):
        o = ComplexInterval.coerce(o)
        return ComplexInterval(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, o):
        o = ComplexInterval.coerce(o)
        return ComplexInterval(self.re - o.re, self.im - o.im)

    def __rsub__(self, o):
        return ComplexInterval.coerce(o) - self

    def __neg__(self):
        return ComplexInterval(-self.re, -self.im)

    def __mul__(self, o):
        o = ComplexInterval.coerce(o)
        return ComplexInterval(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def abs2(self):
        return power(self.re, 2) + power(self.im, 2)

    def __truediv__(self, o):
        o = ComplexInterval.coerce(o)
        d = o.abs2()
        num = self * o.conj()
        return ComplexInterval(num.re / d, num.im / d)

    def __rtruediv__(self, o):
        return ComplexInterval.coerce(o) / self

    def __pow__(self, k):
        k = int(k)
        if k < 0:
            return 1.0 / (self ** (-k))
        out = ComplexInterval(1.0, 0.0)
        for _ in range(k):
            out = out * self
        return out

    def conj(self):
        return ComplexInterval(self.re, -self.im)

    def contains(self, z):
        z = complex(z)
        return self.re.contains(z.real) and self.im.contains(z.imag)

    def overlaps(self, o):
        o = ComplexInterval.coerce(o)
        return self.re.overlaps(o.re) and self.im.overlaps(o.im)

    def mid(self):
        return complex(float(self.re.mid()), float(self.im.mid()))

    def width_max(self):
        return max(self.re.width_max(), self.im.width_max())

    def __repr__(self):
        return f"ComplexInterval({self.re!r}, {self.im!r})"

    def to_decimal(self, digits=17):
        return f"{self.re.to_decimal(digits)} + i{self.im.to_decimal(digits)}"


def mul_i(z):
    """Exact multiplication by the imaginary unit."""
    return ComplexInterval(-z.im, z.re)


# -- linear algebra ----------------------------------------------------------------


def solve(A, b):
    """Enclose the solution set of A x = b for all A in [A], b in [b].

    Interval Gaussian elimination with partial pivoting on magnitudes of
    midpoints.  Raises :class:`IntervalError` when a pivot contains zero.
    """
    A, b = as_interval(A), as_interval(b)
    n = A.shape[0]
    alo, ahi = A.lo.copy(), A.hi.copy()
    vec = b.ndim == 1
    blo = b.lo.reshape(n, -1).copy()
    bhi = b.hi.reshape(n, -1).copy()
    M = Interval._raw(np.concatenate([alo, blo], 1), np.concatenate([ahi, bhi], 1))
    rows = [M[i] for i in range(n)]
    for c in range(n):
        piv = max(range(c, n), key=lambda r: abs(float(rows[r][c].mid())))
        rows[c], rows[piv] = rows[piv], rows[c]
        p = rows[c][c]
        if p.lo <= 0 <= p.hi:
            raise IntervalError("singular interval matrix in elimination")
        for r in range(c + 1, n):
            fac = rows[r][c] / p
            rows[r] = rows[r] - fac * rows[c]
    m = blo.shape[1]
    x = [None] * n
    for c in range(n - 1, -1, -1):
        acc = rows[c][n:]
        for j in range(c + 1, n):
            acc = acc - rows[c][j] * x[j]
        x[c] = acc / rows[c][c]
    X = stack(x, 0)
    return X.reshape(n) if vec else X.reshape(n, m)


def inverse(A):
    """Enclosure of the inverse of every matrix in [A]."""
    A = as_interval(A)
    return solve(A, Interval.eye(A.shape[0]))
