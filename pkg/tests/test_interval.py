import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from crlohner.interval import (
    EMPTY, ComplexInterval, Interval, IntervalError, as_interval, cos, exp, format_decimal,
    from_decimal, from_fraction, hull, inverse, parse_interval, pi, power, sin, solve, sqrt,
)

mpmath.mp.prec = 200
num = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False)


def ivals():
    return st.tuples(num, num).map(lambda p: Interval(min(p), max(p)))


def _contains_frac(x, q):
    lo, hi = float(x.lo), float(x.hi)
    return (lo == -math.inf or Fraction(lo) <= q) and (hi == math.inf or q <= Fraction(hi))


@given(ivals(), ivals(), st.floats(0, 1), st.floats(0, 1))
def test_arithmetic_contains_pointwise_results(a, b, s, t):
    x = Fraction(float(a.lo)) + Fraction(s) * (Fraction(float(a.hi)) - Fraction(float(a.lo)))
    y = Fraction(float(b.lo)) + Fraction(t) * (Fraction(float(b.hi)) - Fraction(float(b.lo)))
    assert _contains_frac(a + b, x + y)
    assert _contains_frac(a - b, x - y)
    assert _contains_frac(a * b, x * y)
    if not b.contains(0.0):
        assert _contains_frac(a / b, x / y)


def test_division_by_zero_containing_interval_raises():
    with pytest.raises(IntervalError):
        Interval(1.0) / Interval(-1.0, 1.0)


@pytest.mark.parametrize("lo,hi", [(-3.0, -2.5), (0.1, 0.2), (-1.0, 1.0), (1.5, 4.75), (10.0, 10.0)])
def test_elementary_functions_contain_high_precision_values(lo, hi):
    x = Interval(lo, hi)
    for t in np.linspace(lo, hi, 17):
        m = mpmath.mpf(float(t))
        for f, g in ((sin, mpmath.sin), (cos, mpmath.cos), (exp, mpmath.exp)):
            y = f(x)
            v = g(m)
            assert mpmath.mpf(float(y.lo)) <= v <= mpmath.mpf(float(y.hi))


def test_sqrt_and_power():
    assert sqrt(Interval(4.0, 9.0)) == Interval(2.0, 3.0)
    assert power(Interval(-2.0, 1.0), 2) == Interval(0.0, 4.0)
    assert power(Interval(-2.0, 1.0), 3) == Interval(-8.0, 1.0)
    assert (Interval(-2.0, 1.0) ** 2).lo == 0.0


def test_pi_encloses_pi():
    p = pi()
    assert mpmath.mpf(float(p.lo)) < mpmath.pi < mpmath.mpf(float(p.hi))


def test_decimal_io_is_outward():
    x = from_decimal("0.1")
    assert _contains_frac(x, Fraction(1, 10))
    assert x.lo < x.hi
    assert from_decimal("0.5") == Interval(0.5)
    s = format_decimal(float(x.lo), float(x.hi), 5)
    lo, hi = (Fraction(v) for v in s.strip("[]").split(","))
    assert lo <= Fraction(float(x.lo)) and Fraction(float(x.hi)) <= hi
    y = parse_interval("[0.1, 0.3]")
    assert _contains_frac(y, Fraction(1, 10)) and _contains_frac(y, Fraction(3, 10))


def test_fraction_enclosure_is_tight():
    x = from_fraction(Fraction(1, 3))
    assert math.nextafter(float(x.lo), math.inf) == float(x.hi)


def test_hex_round_trip():
    x = Interval([0.1, -2.5], [0.30000000000000004, 7.0])
    assert Interval.from_hex(x.to_hex()) == x


def test_set_operations():
    a, b = Interval(0.0, 2.0), Interval(1.0, 3.0)
    assert a.intersect(b) == Interval(1.0, 2.0)
    assert a.intersect(Interval(5.0, 6.0)) is EMPTY
    assert hull(a, b) == Interval(0.0, 3.0)
    assert Interval(0.5, 1.0).interior_subset(a)
    assert not Interval(0.0, 1.0).interior_subset(a)
    assert a.overlaps(b) and a.contains(Fraction(3, 2))


def test_vector_measures():
    x = Interval([-1.0, 2.0], [3.0, 2.5])
    assert np.array_equal(x.mid(), [1.0, 2.25])
    assert np.array_equal(x.mag(), [3.0, 2.5])
    assert np.array_equal(x.mig(), [0.0, 2.0])
    assert x.width_max() == 4.0


def test_matmul_contains_point_products():
    rng = np.random.default_rng(1)
    A = rng.standard_normal((3, 3))
    B = rng.standard_normal((3, 2))
    C = Interval(A) @ Interval(B)
    exact = [[sum(Fraction(A[i, k]) * Fraction(B[k, j]) for k in range(3)) for j in range(2)] for i in range(3)]
    for i in range(3):
        for j in range(2):
            assert _contains_frac(C[i, j], exact[i][j])


def test_solve_encloses_solution():
    A = np.array([[4.0, 1.0], [2.0, 3.0]])
    b = np.array([1.0, 2.0])
    x = solve(Interval(A), Interval(b))
    xs = [Fraction(1, 10), Fraction(3, 5)]
    assert all(_contains_frac(x[i], xs[i]) for i in range(2))
    Ainv = inverse(Interval(A))
    assert Ainv[0, 0].contains(0.3)


def test_singular_solve_raises():
    with pytest.raises(IntervalError):
        solve(Interval([[1.0, 1.0], [1.0, 1.0]]), Interval([1.0, 1.0]))


@given(num, num, num, num)
def test_complex_arithmetic_contains(a, b, c, d):
    z, w = complex(a, b), complex(c, d)
    Z, W = ComplexInterval(a, b), ComplexInterval(c, d)
    for got, want in ((Z + W, z + w), (Z - W, z - w), (Z * W, z * w)):
        assert got.re.inflate(1.0, 1e-9).contains(want.real)
        assert got.im.inflate(1.0, 1e-9).contains(want.imag)
    if abs(w) > 1e-3:
        q = Z / W
        assert q.re.inflate(1.0, 1e-6).contains((z / w).real)
    assert Z.conj().contains(z.conjugate())


def test_as_interval_passthrough():
    x = Interval(1.0, 2.0)
    assert as_interval(x) is x
    assert as_interval(3.0) == Interval(3.0)
