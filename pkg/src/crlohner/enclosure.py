"""A priori enclosures of the flow and its derivatives over one time step.

``c0_enclosure`` validates a box E0 with x + [0, h] f(E0) inside int(E0).
``derivative_enclosures`` then bounds every D_a phi on [0, h] order by order
with the logarithmic-norm estimate

    ||V_a(t)|| <= ||V_a(0)|| e^{lt} + delta_a (e^{lt} - 1) / l,

where l bounds the log norm of Df over E0 and delta_a bounds the part of
the variational right-hand side that only involves lower orders.  Each bound
is finally intersected with the mean-value enclosure V_a(0) + [0, h] F_a.
"""

import math

import numpy as np

from . import rounding as R
from .interval import Interval, IntervalError, as_interval
from .interval import exp as iexp
from .variational import derivative_jets, fdb_sum, fdb_table

NORMS = ("1", "2", "inf")
L0_THRESHOLD = 1e-12
REFINE_PASSES = 2


class EnclosureFailure(RuntimeError):
    """The a priori bound could not be validated; the caller should shrink h."""


def _hmax(h):
    return float(as_interval(h).hi)


def c0_enclosure(vf, x, h, inflation=1.5, attempts=20):
    """Validated enclosure of phi([0, h], x).

    Parameters
    ----------
    vf : VectorField
    x : Interval (n,)
    h : float or Interval
        Step; the upper endpoint is used.
    inflation : float
        Radius growth factor per failed attempt.
    attempts : int

    Returns
    -------
    Interval (n,)

    Raises
    ------
    EnclosureFailure
    """
    x = as_interval(x)
    H = Interval(0.0, _hmax(h))
    try:
        Y = x + H * vf(x)
    except IntervalError as e:
        raise EnclosureFailure(str(e)) from None
    for _ in range(attempts):
        if not Y.is_bounded():
            break
        m = Y.mid()
        W = Y.inflate(inflation, 1e-14 * (1.0 + np.abs(m)) + 1e-300)
        try:
            Y = x + H * vf(W)
        except IntervalError:
            break
        if Y.is_bounded() and Y.interior_subset(W):
            return Y
    raise EnclosureFailure("C0 enclosure not validated")


def log_norm(A, which="inf"):
    """Upper bound of the logarithmic norm mu(M) over all M in A."""
    A = as_interval(A)
    which = str(which)
    if which == "1":
        A = A.T
        which = "inf"
    if which == "2":
        A = (A + A.T) * 0.5
        which = "inf"
    if which != "inf":
        raise ValueError(f"unknown norm {which!r}")
    n = A.shape[0]
    mag = A.mag()
    best = -math.inf
    for i in range(n):
        row = [float(A.hi[i, i])] + [float(mag[i, j]) for j in range(n) if j != i]
        s = Interval(np.array(row)).sum()
        best = max(best, float(s.hi))
    return best


def vector_norm(v, which="inf"):
    """Upper bound of ||x|| over the box v (last axis is the vector axis)."""
    v = as_interval(v)
    which = str(which)
    mag = v.mag()
    if which == "inf":
        return mag.max(axis=-1)
    if which == "1":
        s = Interval(mag).sum(axis=-1)
        return np.asarray(s.hi)
    if which == "2":
        sq = Interval(mag) * Interval(mag)
        s = sq.sum(axis=-1)
        return np.vectorize(R.sqrt_up, otypes=[float])(s.hi)
    raise ValueError(f"unknown norm {which!r}")


def growth_bounds(l, h):
    """Upper bounds of max(1, e^{lh}) and of (e^{lh} - 1)/l over [0, h]."""
    H = Interval(_hmax(h))
    el = iexp(Interval(l) * H)
    g1 = max(1.0, float(el.hi))
    if abs(l) < L0_THRESHOLD:
        # int_0^h e^{ls} ds <= h max(1, e^{lh})
        g2 = float((H * Interval(g1)).hi)
    else:
        g2 = float(((el - 1.0) / Interval(l)).hi)
    return g1, g2


def derivative_enclosures(vf, E0, V0, h, r, norm="inf"):
    """Enclosures of D_a phi([0, h], x) for every multipointer |a| <= r.

    Parameters
    ----------
    vf : VectorField
    E0 : Interval (n,)
        Validated C0 enclosure over the step.
    V0 : Interval (M, n)
        Initial values of the variations (identity / zero for a Taylor step
        from the identity jet).
    h : float or Interval
    r : int
    norm : {"1", "2", "inf"}

    Returns
    -------
    E : Interval (M, n)
    info : dict
        ``l`` (log norm bound) and ``delta`` (per multipointer).
    """
    n = vf.n
    fdb = fdb_table(n, r)
    t = fdb.table
    _, G, nz = derivative_jets(vf, r, E0, 0, ode=False)
    if not (G.is_bounded()):
        raise EnclosureFailure("derivatives of f unbounded on E0")
    groups = fdb.pruned(nz)
    first = [t.index[(s + 1,)] for s in range(n)]
    A = G[first][:, :, 0].T
    l = log_norm(A, norm)
    g1, g2 = growth_bounds(l, h)
    H = Interval(0.0, _hmax(h))
    V0 = as_interval(V0)
    v0norm = vector_norm(V0, norm)
    Elo = np.zeros((len(t), n))
    Ehi = np.zeros((len(t), n))
    deltas = np.zeros(len(t))
    for p in range(1, r + 1):
        sl = t.of_order(p)
        cnt = t.count(p)
        if p >= 2:
            W = Interval._raw(Elo.reshape(len(t), n, 1), Ehi.reshape(len(t), n, 1))
            Bt = fdb_sum(groups, p, cnt, G, W, 2, 1)[:, :, 0]
            delta = vector_norm(Bt, norm)
        else:
            delta = np.zeros(cnt)
        deltas[sl.start:sl.stop] = delta
        a0 = v0norm[sl.start:sl.stop]
        bound = R.vadd_up(R.vmul_up(a0, np.full(cnt, g1)), R.vmul_up(delta, np.full(cnt, g2)))
        if not np.all(np.isfinite(bound)):
            raise EnclosureFailure(f"unbounded derivative enclosure at order {p}")
        Elo[sl.start:sl.stop] = -bound[:, None]
        Ehi[sl.start:sl.stop] = bound[:, None]
        # mean-value refinement: V_a(0) + [0, h] F_a(E0, E_b, E_a), applied
        # twice since the first pass already tightens the k = 1 term
        for _ in range(REFINE_PASSES):
            W = Interval._raw(Elo.reshape(len(t), n, 1), Ehi.reshape(len(t), n, 1))
            F = fdb_sum(groups, p, cnt, G, W, 1, 1)[:, :, 0]
            cur = Interval._raw(Elo[sl.start:sl.stop], Ehi[sl.start:sl.stop])
            ref = refine(cur, V0[sl.start:sl.stop], F, H)
            Elo[sl.start:sl.stop] = ref.lo
            Ehi[sl.start:sl.stop] = ref.hi
    return Interval._raw(Elo, Ehi), {"l": l, "delta": deltas}


def refine(E, V0, F, H):
    """Intersect E with V0 + [0, h] F; empty means an internal error."""
    cand = as_interval(V0) + as_interval(H) * as_interval(F)
    out = as_interval(E).intersect(cand)
    if out.is_empty():
        raise IntervalError("empty intersection in derivative refinement")
    return out

