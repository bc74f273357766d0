"""Directed rounding on top of round-to-nearest float64.

Every primitive returns a bound that is exact whenever the floating-point
result is exact, and one ulp outward otherwise.  Exactness is detected with
error-free transformations (TwoSum, Dekker's TwoProduct), so no global FPU
rounding mode is ever touched.

The scalar functions are plain Python on purpose: the numba backend compiles
them unchanged, the numpy backend uses the ``v*`` vectorized twins below.
"""

import math

import numpy as np

try:  # numba is optional at import time; the numpy backend needs none of it
    from numba.extending import register_jitable as _jitable
except ImportError:  # pragma: no cover
    def _jitable(fn):
        return fn

_SPLIT = 134217729.0  # 2**27 + 1
_DEKKER_MIN = 2.0**-969
_DEKKER_MAX = 2.0**995
# widening applied to libm results (glibc documents <= 1 ulp for sin/cos/exp)
LIBM_ULPS = 2

INF = math.inf


@_jitable
def next_down(x):
    return np.nextafter(x, -INF)


@_jitable
def next_up(x):
    return np.nextafter(x, INF)


@_jitable
def two_sum(a, b):
    s = a + b
    bb = s - a
    e = (a - (s - bb)) + (b - bb)
    return s, e


@_jitable
def _split(a):
    c = _SPLIT * a
    hi = c - (c - a)
    return hi, a - hi


@_jitable
def two_prod(a, b):
    """Return (p, e) with a*b == p + e, or e = nan when Dekker is unsafe."""
    p = a * b
    if not (_DEKKER_MIN <= abs(p) and abs(a) < _DEKKER_MAX and abs(b) < _DEKKER_MAX):
        return p, math.nan
    ah, al = _split(a)
    bh, bl = _split(b)
    e = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, e


@_jitable
def add_down(a, b):
    s, e = two_sum(a, b)
    if e >= 0.0:
        return s
    return next_down(s)


@_jitable
def add_up(a, b):
    s, e = two_sum(a, b)
    if e <= 0.0:
        return s
    return next_up(s)


@_jitable
def mul_down(a, b):
    if a == 0.0 or b == 0.0:
        return 0.0
    p, e = two_prod(a, b)
    if e >= 0.0:
        return p
    return next_down(p)


@_jitable
def mul_up(a, b):
    if a == 0.0 or b == 0.0:
        return 0.0
    p, e = two_prod(a, b)
    if e <= 0.0:
        return p
    return next_up(p)


@_jitable
def _div_residual(a, b, q):
    # sign of (a/b - q) * b; nan when undecidable
    if q == 0.0 or not math.isfinite(q):
        return math.nan
    p, e = two_prod(q, b)
    if e != e:
        return math.nan
    return (a - p) - e


@_jitable
def div_down(a, b):
    if a == 0.0:
        return 0.0
    q = a / b
    r = _div_residual(a, b, q)
    if r == 0.0 or (r == r and (r > 0.0) == (b > 0.0)):
        return q
    return next_down(q)


@_jitable
def div_up(a, b):
    if a == 0.0:
        return 0.0
    q = a / b
    r = _div_residual(a, b, q)
    if r == 0.0 or (r == r and (r < 0.0) == (b > 0.0)):
        return q
    return next_up(q)


@_jitable
def sqrt_down(a):
    if a <= 0.0:
        return 0.0
    s = math.sqrt(a)
    p, e = two_prod(s, s)
    if e == e and (a - p) - e >= 0.0:
        return s
    return next_down(s)


@_jitable
def sqrt_up(a):
    if a <= 0.0:
        return 0.0
    s = math.sqrt(a)
    p, e = two_prod(s, s)
    if e == e and (a - p) - e <= 0.0:
        return s
    return next_up(s)


@_jitable
def widen_down(x, ulps):
    for _ in range(ulps):
        x = next_down(x)
    return x


@_jitable
def widen_up(x, ulps):
    for _ in range(ulps):
        x = next_up(x)
    return x


@_jitable
def exp_down(x):
    if x == 0.0:
        return 1.0
    y = widen_down(math.exp(x), LIBM_ULPS)
    return max(y, 0.0)


@_jitable
def exp_up(x):
    if x == 0.0:
        return 1.0
    return widen_up(math.exp(x), LIBM_ULPS)


# rigorous bracket of pi; math.pi is the double just below pi
PI_LO = 3.141592653589793
PI_HI = 3.1415926535897936


@_jitable
def _has_point(lo, hi, offset):
    """True if [lo, hi] may contain offset*pi/2 + 2*k*pi for some integer k."""
    # candidate k values from both pi bounds; conservative
    for pi_b in (PI_LO, PI_HI):
        k0 = math.floor((lo - offset * pi_b / 2.0) / (2.0 * pi_b)) - 1.0
        for dk in range(4):
            k = k0 + dk
            for pib in (PI_LO, PI_HI):
                c = offset * pib / 2.0 + 2.0 * k * pib
                # c carries rounding error ~ |c| * 2**-52; test with margin
                m = abs(c) * 4.5e-16 + 1e-300
                if c + m >= lo and c - m <= hi:
                    return True
    return False


@_jitable
def sin_bounds(lo, hi):
    if lo == hi == 0.0:
        return 0.0, 0.0
    if not (math.isfinite(lo) and math.isfinite(hi)) or hi - lo >= 6.3:
        return -1.0, 1.0
    a, b = math.sin(lo), math.sin(hi)
    rlo = widen_down(min(a, b), LIBM_ULPS)
    rhi = widen_up(max(a, b), LIBM_ULPS)
    if _has_point(lo, hi, 1.0):
        rhi = 1.0
    if _has_point(lo, hi, 3.0):
        rlo = -1.0
    return max(rlo, -1.0), min(rhi, 1.0)


@_jitable
def cos_bounds(lo, hi):
    if lo == hi == 0.0:
        return 1.0, 1.0
    if not (math.isfinite(lo) and math.isfinite(hi)) or hi - lo >= 6.3:
        return -1.0, 1.0
    a, b = math.cos(lo), math.cos(hi)
    rlo = widen_down(min(a, b), LIBM_ULPS)
    rhi = widen_up(max(a, b), LIBM_ULPS)
    if _has_point(lo, hi, 0.0):
        rhi = 1.0
    if _has_point(lo, hi, 2.0):
        rlo = -1.0
    return max(rlo, -1.0), min(rhi, 1.0)


@_jitable
def imul(alo, ahi, blo, bhi):
    """Interval product of two scalar intervals."""
    if alo >= 0.0 and blo >= 0.0:
        return mul_down(alo, blo), mul_up(ahi, bhi)
    lo = min(mul_down(alo, blo), mul_down(alo, bhi), mul_down(ahi, blo), mul_down(ahi, bhi))
    hi = max(mul_up(alo, blo), mul_up(alo, bhi), mul_up(ahi, blo), mul_up(ahi, bhi))
    return lo, hi


@_jitable
def idiv(alo, ahi, blo, bhi):
    """Interval quotient; caller guarantees 0 not in [blo, bhi]."""
    lo = min(div_down(alo, blo), div_down(alo, bhi), div_down(ahi, blo), div_down(ahi, bhi))
    hi = max(div_up(alo, blo), div_up(alo, bhi), div_up(ahi, blo), div_up(ahi, bhi))
    return lo, hi


# ---------------------------------------------------------------------------
# vectorized twins (numpy arrays, broadcasting)


def vtwo_sum(a, b):
    with np.errstate(over="ignore", invalid="ignore"):
        s = a + b
        bb = s - a
        e = (a - (s - bb)) + (b - bb)
    return s, e


def vadd_down(a, b):
    s, e = vtwo_sum(a, b)
    with np.errstate(invalid="ignore"):
        return np.where(e >= 0.0, s, np.nextafter(s, -INF))


def vadd_up(a, b):
    s, e = vtwo_sum(a, b)
    with np.errstate(invalid="ignore"):
        return np.where(e <= 0.0, s, np.nextafter(s, INF))


def vtwo_prod(a, b):
    with np.errstate(over="ignore", invalid="ignore", under="ignore"):
        p = a * b
        c = _SPLIT * a
        ah = c - (c - a)
        al = a - ah
        c = _SPLIT * b
        bh = c - (c - b)
        bl = b - bh
        e = ((ah * bh - p) + ah * bl + al * bh) + al * bl
        safe = (np.abs(p) >= _DEKKER_MIN) & (np.abs(a) < _DEKKER_MAX) & (np.abs(b) < _DEKKER_MAX)
    return p, np.where(safe, e, np.nan)


def vmul_down(a, b):
    p, e = vtwo_prod(a, b)
    zero = (a == 0.0) | (b == 0.0)
    with np.errstate(invalid="ignore"):
        r = np.where(e >= 0.0, p, np.nextafter(p, -INF))
    return np.where(zero, 0.0, r)


def vmul_up(a, b):
    p, e = vtwo_prod(a, b)
    zero = (a == 0.0) | (b == 0.0)
    with np.errstate(invalid="ignore"):
        r = np.where(e <= 0.0, p, np.nextafter(p, INF))
    return np.where(zero, 0.0, r)


def vmul(alo, ahi, blo, bhi):
    """Elementwise interval product of array intervals."""
    c1, c2 = vmul_down(alo, blo), vmul_down(alo, bhi)
    c3, c4 = vmul_down(ahi, blo), vmul_down(ahi, bhi)
    lo = np.minimum(np.minimum(c1, c2), np.minimum(c3, c4))
    c1, c2 = vmul_up(alo, blo), vmul_up(alo, bhi)
    c3, c4 = vmul_up(ahi, blo), vmul_up(ahi, bhi)
    hi = np.maximum(np.maximum(c1, c2), np.maximum(c3, c4))
    return lo, hi


def _vdiv_dir(a, b, down):
    with np.errstate(divide="ignore", invalid="ignore", over="ignore", under="ignore"):
        q = a / b
        p, e = vtwo_prod(q, b)
        r = (a - p) - e
        pos = r > 0.0
        if down:
            ok = (r == 0.0) | ((pos == (b > 0.0)) & (r == r) & (r != 0.0))
            out = np.where(ok, q, np.nextafter(q, -INF))
        else:
            ok = (r == 0.0) | (((r < 0.0) == (b > 0.0)) & (r == r) & (r != 0.0))
            out = np.where(ok, q, np.nextafter(q, INF))
    return np.where(a == 0.0, 0.0, out)


def vdiv(alo, ahi, blo, bhi):
    d = [_vdiv_dir(x, y, True) for x in (alo, ahi) for y in (blo, bhi)]
    u = [_vdiv_dir(x, y, False) for x in (alo, ahi) for y in (blo, bhi)]
    lo = np.minimum(np.minimum(d[0], d[1]), np.minimum(d[2], d[3]))
    hi = np.maximum(np.maximum(u[0], u[1]), np.maximum(u[2], u[3]))
    return lo, hi


def vsum(lo, hi, axis):
    """Rigorous sum along ``axis`` using a forward error bound.

    |fl(sum) - sum| <= (m-1) u sum|x|; we add (m+1) 2**-52 sum|x| rounded up,
    which also dominates the error of computing the bound itself.
    """
    m = lo.shape[axis]
    if m == 0:
        shape = lo.shape[:axis] + lo.shape[axis + 1:]
        return np.zeros(shape), np.zeros(shape)
    if m == 1:
        return np.take(lo, 0, axis=axis), np.take(hi, 0, axis=axis)
    gamma = (m + 1) * 2.0**-52
    slo = np.sum(lo, axis=axis)
    shi = np.sum(hi, axis=axis)
    elo = np.sum(np.abs(lo), axis=axis) * gamma
    ehi = np.sum(np.abs(hi), axis=axis) * gamma
    exact_lo = elo == 0.0
    exact_hi = ehi == 0.0
    slo = np.where(exact_lo, slo, np.nextafter(slo - np.nextafter(elo, INF), -INF))
    shi = np.where(exact_hi, shi, np.nextafter(shi + np.nextafter(ehi, INF), INF))
    return slo, shi
