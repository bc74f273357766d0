from fractions import Fraction

import numpy as np
import pytest

from crlohner import kernels


def _pair(rng, shape, width=1e-6):
    lo = rng.standard_normal(shape)
    return lo, lo + width * rng.random(shape)


def _inside(lo, hi, exact):
    return Fraction(float(lo)) <= exact <= Fraction(float(hi))


def test_both_backends_listed():
    assert "numpy" in kernels.available_backends()


def test_unknown_backend_rejected():
    with pytest.raises(ValueError):
        kernels.set_backend("fortran")


def test_matmul_contains_endpoint_products(backend):
    rng = np.random.default_rng(3)
    a = _pair(rng, (2, 3, 4))
    b = _pair(rng, (2, 4, 2))
    lo, hi = kernels.matmul(*a, *b)
    for t in range(2):
        for i in range(3):
            for j in range(2):
                ex = sum(Fraction(a[0][t, i, k]) * Fraction(b[0][t, k, j]) for k in range(4))
                assert _inside(lo[t, i, j], hi[t, i, j], ex)
                ex = sum(Fraction(a[1][t, i, k]) * Fraction(b[1][t, k, j]) for k in range(4))
                assert _inside(lo[t, i, j], hi[t, i, j], ex)


def test_cauchy_product(backend):
    rng = np.random.default_rng(4)
    a = _pair(rng, (3, 6), 0.0)
    b = _pair(rng, (3, 6), 0.0)
    lo, hi = kernels.cauchy(*a, *b)
    for m in range(3):
        for k in range(6):
            ex = sum(Fraction(a[0][m, j]) * Fraction(b[0][m, k - j]) for j in range(k + 1))
            assert _inside(lo[m, k], hi[m, k], ex)


def test_sum_axis(backend):
    x = np.array([[1e16, 1.0, -1e16, 3.0], [0.1, 0.2, 0.3, 0.4]])
    lo, hi = kernels.sum_axis(x, x, 1)
    assert _inside(lo[0], hi[0], Fraction(4))
    assert _inside(lo[1], hi[1], sum(Fraction(v) for v in x[1]))


def test_linrec_matches_rational_recurrence(backend):
    rng = np.random.default_rng(5)
    o, M, n = 5, 2, 2
    A = rng.standard_normal((o, n, n))
    B = rng.standard_normal((o, M, n))
    v0 = rng.standard_normal((M, n))
    lo, hi = kernels.linrec(A, A, B, B, v0, v0, o)
    # V_{k+1} = (sum_{j<=k} A_j V_{k-j} + B_k) / (k+1)
    V = [[[Fraction(v0[m, i]) for i in range(n)] for m in range(M)]]
    for k in range(o):
        nxt = []
        for m in range(M):
            row = []
            for i in range(n):
                s = Fraction(B[k, m, i])
                for j in range(k + 1):
                    s += sum(Fraction(A[j, i, t]) * V[k - j][m][t] for t in range(n))
                row.append(s / (k + 1))
            nxt.append(row)
        V.append(nxt)
    for k in range(o + 1):
        for m in range(M):
            for i in range(n):
                assert _inside(lo[k, m, i], hi[k, m, i], V[k][m][i])


def test_backends_agree_on_pipeline_kernels():
    if "numba" not in kernels.available_backends():
        pytest.skip("numba not installed")
    rng = np.random.default_rng(6)
    a = _pair(rng, (8, 3, 3))
    b = _pair(rng, (8, 3, 3))
    out = {}
    for name in ("numpy", "numba"):
        prev = kernels.set_backend(name)
        out[name] = kernels.matmul(*a, *b)
        kernels.set_backend(prev)
    # both rigorous: their enclosures must overlap
    assert np.all(out["numpy"][0] <= out["numba"][1])
    assert np.all(out["numba"][0] <= out["numpy"][1])
