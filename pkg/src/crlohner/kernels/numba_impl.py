"""numba kernels; sums are accumulated with per-addition directed rounding."""

import numpy as np
from numba import njit

from .. import rounding as R
from .numpy_impl import ADD, CONST, COS, DIV, EXP, MUL, NEG, OPS, SIN, SQR, SUB, VAR  # noqa: F401

NAME = "numba"

add_down = R.add_down
add_up = R.add_up
imul = R.imul
idiv = R.idiv


@njit(cache=True)
def _sum_last(lo, hi):
    # lo, hi: (T, m) -> (T,)
    T, m = lo.shape
    slo = np.zeros(T)
    shi = np.zeros(T)
    for t in range(T):
        a = 0.0
        b = 0.0
        for i in range(m):
            a = add_down(a, lo[t, i])
            b = add_up(b, hi[t, i])
        slo[t] = a
        shi[t] = b
    return slo, shi


def sum_axis(lo, hi, axis):
    lo = np.moveaxis(np.asarray(lo, float), axis, -1)
    hi = np.moveaxis(np.asarray(hi, float), axis, -1)
    shape = lo.shape[:-1]
    m = lo.shape[-1]
    slo, shi = _sum_last(np.ascontiguousarray(lo.reshape(-1, m)),
                         np.ascontiguousarray(hi.reshape(-1, m)))
    return slo.reshape(shape), shi.reshape(shape)


@njit(cache=True)
def _matmul3(alo, ahi, blo, bhi):
    T, n, m = alo.shape
    p = blo.shape[2]
    clo = np.zeros((T, n, p))
    chi = np.zeros((T, n, p))
    for t in range(T):
        for i in range(n):
            for j in range(p):
                a = 0.0
                b = 0.0
                for s in range(m):
                    l, h = imul(alo[t, i, s], ahi[t, i, s], blo[t, s, j], bhi[t, s, j])
                    a = add_down(a, l)
                    b = add_up(b, h)
                clo[t, i, j] = a
                chi[t, i, j] = b
    return clo, chi


def matmul(alo, ahi, blo, bhi):
    batch = np.broadcast_shapes(alo.shape[:-2], blo.shape[:-2])
    alo = np.broadcast_to(alo, batch + alo.shape[-2:])
    ahi = np.broadcast_to(ahi, batch + ahi.shape[-2:])
    blo = np.broadcast_to(blo, batch + blo.shape[-2:])
    bhi = np.broadcast_to(bhi, batch + bhi.shape[-2:])
    n, m = alo.shape[-2:]
    p = blo.shape[-1]

    def r3(x, a, b):
        return np.ascontiguousarray(x.reshape((-1, a, b)), dtype=float)

    clo, chi = _matmul3(r3(alo, n, m), r3(ahi, n, m), r3(blo, m, p), r3(bhi, m, p))
    return clo.reshape(batch + (n, p)), chi.reshape(batch + (n, p))


@njit(cache=True)
def _cauchy2(alo, ahi, blo, bhi):
    T, L = alo.shape
    clo = np.zeros((T, L))
    chi = np.zeros((T, L))
    for t in range(T):
        for k in range(L):
            a = 0.0
            b = 0.0
            for j in range(k + 1):
                l, h = imul(alo[t, j], ahi[t, j], blo[t, k - j], bhi[t, k - j])
                a = add_down(a, l)
                b = add_up(b, h)
            clo[t, k] = a
            chi[t, k] = b
    return clo, chi


def cauchy(alo, ahi, blo, bhi):
    alo, ahi, blo, bhi = np.broadcast_arrays(alo, ahi, blo, bhi)
    shape = alo.shape
    L = shape[-1]

    def r2(x):
        return np.ascontiguousarray(x.reshape(-1, L), dtype=float)

    clo, chi = _cauchy2(r2(alo), r2(ahi), r2(blo), r2(bhi))
    return clo.reshape(shape), chi.reshape(shape)


@njit(cache=True)
def _dot(lo, hi, a, ja, b, jb, k, start, rev_off):
    # sum_{j=start}^{k} x_a[j] * x_b[rev_off - j]
    s = 0.0
    t = 0.0
    for j in range(start, k + 1):
        l, h = imul(lo[a, j], hi[a, j], lo[b, rev_off - j], hi[b, rev_off - j])
        s = add_down(s, l)
        t = add_up(t, h)
    return s, t


@njit(cache=True)
def _tape_jet(op, a1, a2, clo, chi, partner, var, out, xlo, xhi, order, ode):
    N = op.shape[0]
    L = order + 1
    lo = np.zeros((N, L))
    hi = np.zeros((N, L))
    Xlo = xlo.copy()
    Xhi = xhi.copy()
    for k in range(L):
        for m in range(N):
            o = op[m]
            a = a1[m]
            b = a2[m]
            if o == VAR:
                lo[m, k] = Xlo[var[m], k]
                hi[m, k] = Xhi[var[m], k]
            elif o == CONST:
                if k == 0:
                    lo[m, 0] = clo[m]
                    hi[m, 0] = chi[m]
            elif o == ADD:
                lo[m, k] = add_down(lo[a, k], lo[b, k])
                hi[m, k] = add_up(hi[a, k], hi[b, k])
            elif o == SUB:
                lo[m, k] = add_down(lo[a, k], -hi[b, k])
                hi[m, k] = add_up(hi[a, k], -lo[b, k])
            elif o == NEG:
                lo[m, k] = -hi[a, k]
                hi[m, k] = -lo[a, k]
            elif o == MUL or o == SQR:
                if o == SQR:
                    b = a
                if k == 0 and o == SQR:
                    l0 = lo[a, 0]
                    h0 = hi[a, 0]
                    m2 = max(R.mul_up(l0, l0), R.mul_up(h0, h0))
                    if l0 >= 0.0:
                        lo[m, 0] = R.mul_down(l0, l0)
                    elif h0 <= 0.0:
                        lo[m, 0] = R.mul_down(h0, h0)
                    else:
                        lo[m, 0] = 0.0
                    hi[m, 0] = m2
                else:
                    s, t = _dot(lo, hi, a, 0, b, 0, k, 0, k)
                    lo[m, k] = s
                    hi[m, k] = t
            elif o == DIV:
                if k == 0:
                    nlo = lo[a, 0]
                    nhi = hi[a, 0]
                else:
                    s = 0.0
                    t = 0.0
                    for j in range(1, k + 1):
                        l, h = imul(lo[b, j], hi[b, j], lo[m, k - j], hi[m, k - j])
                        s = add_down(s, l)
                        t = add_up(t, h)
                    nlo = add_down(lo[a, k], -t)
                    nhi = add_up(hi[a, k], -s)
                blo = lo[b, 0]
                bhi = hi[b, 0]
                if blo <= 0.0 <= bhi:
                    lo[m, k] = -np.inf
                    hi[m, k] = np.inf
                else:
                    l, h = idiv(nlo, nhi, blo, bhi)
                    lo[m, k] = l
                    hi[m, k] = h
            else:  # SIN, COS, EXP
                if k == 0:
                    if o == SIN:
                        l, h = R.sin_bounds(lo[a, 0], hi[a, 0])
                    elif o == COS:
                        l, h = R.cos_bounds(lo[a, 0], hi[a, 0])
                    else:
                        l = R.exp_down(lo[a, 0])
                        h = R.exp_up(hi[a, 0])
                    lo[m, 0] = l
                    hi[m, 0] = h
                else:
                    src = m if o == EXP else partner[m]
                    s = 0.0
                    t = 0.0
                    for j in range(1, k + 1):
                        wl, wh = imul(float(j), float(j), lo[a, j], hi[a, j])
                        l, h = imul(wl, wh, lo[src, k - j], hi[src, k - j])
                        s = add_down(s, l)
                        t = add_up(t, h)
                    if o == COS:
                        s, t = -t, -s
                    l, h = idiv(s, t, float(k), float(k))
                    lo[m, k] = l
                    hi[m, k] = h
        if ode and k < order:
            for i in range(out.shape[0]):
                l, h = idiv(lo[out[i], k], hi[out[i], k], float(k + 1), float(k + 1))
                Xlo[i, k + 1] = l
                Xhi[i, k + 1] = h
    return lo, hi


def tape_jet(tape_arrays, xlo, xhi, order, ode):
    op, a1, a2, clo, chi, partner, var, out = tape_arrays
    return _tape_jet(op, a1, a2, clo, chi, partner, var, out,
                     np.ascontiguousarray(xlo, dtype=float),
                     np.ascontiguousarray(xhi, dtype=float), int(order), bool(ode))


@njit(cache=True)
def _linrec(alo, ahi, blo, bhi, vlo, vhi, order):
    M, n = vlo.shape
    Vlo = np.zeros((order + 1, M, n))
    Vhi = np.zeros((order + 1, M, n))
    Vlo[0] = vlo
    Vhi[0] = vhi
    for k in range(order):
        d = float(k + 1)
        for m in range(M):
            for i in range(n):
                s = blo[k, m, i]
                t = bhi[k, m, i]
                for j in range(k + 1):
                    for q in range(n):
                        l, h = imul(alo[j, i, q], ahi[j, i, q], Vlo[k - j, m, q], Vhi[k - j, m, q])
                        s = add_down(s, l)
                        t = add_up(t, h)
                l, h = idiv(s, t, d, d)
                Vlo[k + 1, m, i] = l
                Vhi[k + 1, m, i] = h
    return Vlo, Vhi


def linrec(alo, ahi, blo, bhi, vlo, vhi, order):
    c = np.ascontiguousarray
    return _linrec(c(alo, dtype=float), c(ahi, dtype=float), c(blo, dtype=float),
                   c(bhi, dtype=float), c(vlo, dtype=float), c(vhi, dtype=float), int(order))
