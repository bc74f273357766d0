"""Pure numpy kernels."""

import numpy as np

from .. import rounding as R

NAME = "numpy"

VAR, CONST, ADD, SUB, NEG, MUL, DIV, SIN, COS, EXP, SQR = range(11)
OPS = {"var": VAR, "const": CONST, "add": ADD, "sub": SUB, "neg": NEG,
       "mul": MUL, "div": DIV, "sin": SIN, "cos": COS, "exp": EXP, "sqr": SQR}


def sum_axis(lo, hi, axis):
    return R.vsum(np.asarray(lo, float), np.asarray(hi, float), axis)


def matmul(alo, ahi, blo, bhi):
    a_lo, a_hi = alo[..., :, :, None], ahi[..., :, :, None]
    b_lo, b_hi = blo[..., None, :, :], bhi[..., None, :, :]
    plo, phi = R.vmul(a_lo, a_hi, b_lo, b_hi)
    return R.vsum(plo, phi, axis=-2)


def _toeplitz(x):
    # x (..., L) -> T (..., L, L) with T[..., k, j] = x[..., k-j] for j <= k
    L = x.shape[-1]
    k = np.arange(L)[:, None]
    j = np.arange(L)[None, :]
    idx = np.clip(k - j, 0, L - 1)
    t = x[..., idx]
    return np.where(j <= k, t, 0.0)


def cauchy(alo, ahi, blo, bhi):
    alo, ahi, blo, bhi = np.broadcast_arrays(alo, ahi, blo, bhi)
    tlo, thi = _toeplitz(blo), _toeplitz(bhi)
    plo, phi = R.vmul(alo[..., None, :], ahi[..., None, :], tlo, thi)
    return R.vsum(plo, phi, axis=-1)


def _scal(k):
    return np.float64(k), np.float64(k)


def _dot(alo, ahi, blo, bhi):
    plo, phi = R.vmul(alo, ahi, blo, bhi)
    slo, shi = R.vsum(plo, phi, axis=0)
    return float(slo), float(shi)


def tape_jet(tape_arrays, xlo, xhi, order, ode):
    op, a1, a2, clo, chi, partner, var, out = tape_arrays
    N = op.shape[0]
    L = order + 1
    lo = np.zeros((N, L))
    hi = np.zeros((N, L))
    Xlo = np.array(xlo, dtype=float, copy=True)
    Xhi = np.array(xhi, dtype=float, copy=True)
    jj = np.arange(L, dtype=float)
    for k in range(L):
        for m in range(N):
            o = op[m]
            a = a1[m]
            b = a2[m]
            if o == VAR:
                lo[m, k], hi[m, k] = Xlo[var[m], k], Xhi[var[m], k]
            elif o == CONST:
                if k == 0:
                    lo[m, 0], hi[m, 0] = clo[m], chi[m]
            elif o == ADD:
                lo[m, k] = R.add_down(lo[a, k], lo[b, k])
                hi[m, k] = R.add_up(hi[a, k], hi[b, k])
            elif o == SUB:
                lo[m, k] = R.add_down(lo[a, k], -hi[b, k])
                hi[m, k] = R.add_up(hi[a, k], -lo[b, k])
            elif o == NEG:
                lo[m, k], hi[m, k] = -hi[a, k], -lo[a, k]
            elif o == MUL or o == SQR:
                if o == SQR:
                    b = a
                if k == 0 and o == SQR:
                    l0, h0 = lo[a, 0], hi[a, 0]
                    m2 = max(R.mul_up(l0, l0), R.mul_up(h0, h0))
                    if l0 >= 0.0:
                        lo[m, 0], hi[m, 0] = R.mul_down(l0, l0), m2
                    elif h0 <= 0.0:
                        lo[m, 0], hi[m, 0] = R.mul_down(h0, h0), m2
                    else:
                        lo[m, 0], hi[m, 0] = 0.0, m2
                else:
                    lo[m, k], hi[m, k] = _dot(lo[a, :k + 1], hi[a, :k + 1],
                                              lo[b, k::-1], hi[b, k::-1])
            elif o == DIV:
                if k == 0:
                    nlo, nhi = lo[a, 0], hi[a, 0]
                else:
                    slo, shi = _dot(lo[b, 1:k + 1], hi[b, 1:k + 1],
                                    lo[m, k - 1::-1], hi[m, k - 1::-1])
                    nlo = R.add_down(lo[a, k], -shi)
                    nhi = R.add_up(hi[a, k], -slo)
                blo, bhi = lo[b, 0], hi[b, 0]
                if blo <= 0.0 <= bhi:
                    lo[m, k], hi[m, k] = -np.inf, np.inf
                else:
                    lo[m, k], hi[m, k] = R.idiv(nlo, nhi, blo, bhi)
            elif o == SIN or o == COS or o == EXP:
                if k == 0:
                    if o == SIN:
                        lo[m, 0], hi[m, 0] = R.sin_bounds(lo[a, 0], hi[a, 0])
                    elif o == COS:
                        lo[m, 0], hi[m, 0] = R.cos_bounds(lo[a, 0], hi[a, 0])
                    else:
                        lo[m, 0], hi[m, 0] = R.exp_down(lo[a, 0]), R.exp_up(hi[a, 0])
                else:
                    src = m if o == EXP else partner[m]
                    wlo, whi = R.vmul(jj[1:k + 1], jj[1:k + 1], lo[a, 1:k + 1], hi[a, 1:k + 1])
                    slo, shi = _dot(wlo, whi, lo[src, k - 1::-1], hi[src, k - 1::-1])
                    if o == COS:
                        slo, shi = -shi, -slo
                    lo[m, k], hi[m, k] = R.idiv(slo, shi, float(k), float(k))
        if ode and k < order:
            for i in range(out.shape[0]):
                Xlo[i, k + 1], Xhi[i, k + 1] = R.idiv(lo[out[i], k], hi[out[i], k],
                                                      float(k + 1), float(k + 1))
    return lo, hi


def linrec(alo, ahi, blo, bhi, vlo, vhi, order):
    M, n = vlo.shape
    Vlo = np.zeros((order + 1, M, n))
    Vhi = np.zeros((order + 1, M, n))
    Vlo[0], Vhi[0] = vlo, vhi
    for k in range(order):
        # terms[m, i, j, s] = A[j, i, s] * V[k-j, m, s]
        Aj_lo = alo[:k + 1][None, :, :, :].transpose(0, 2, 1, 3)
        Aj_hi = ahi[:k + 1][None, :, :, :].transpose(0, 2, 1, 3)
        Vr_lo = Vlo[k::-1].transpose(1, 0, 2)[:, None, :, :]
        Vr_hi = Vhi[k::-1].transpose(1, 0, 2)[:, None, :, :]
        plo, phi = R.vmul(Aj_lo, Aj_hi, Vr_lo, Vr_hi)
        plo = plo.reshape(M, n, -1)
        phi = phi.reshape(M, n, -1)
        plo = np.concatenate([blo[k][:, :, None], plo], axis=-1)
        phi = np.concatenate([bhi[k][:, :, None], phi], axis=-1)
        slo, shi = R.vsum(plo, phi, axis=-1)
        d = float(k + 1)
        Vlo[k + 1], Vhi[k + 1] = R.vdiv(slo, shi, d, d)
    return Vlo, Vhi
