"""Right-hand sides of the equations for variations and their Taylor jets.

For a multipointer ``a`` of order ``p`` the variation V_a = D_a phi obeys

    V_a' = sum_{k=1..p} sum_{delta in N^p(k)} sum_{i_1..i_k}
           D^{e_i1+..+e_ik} f(phi) * prod_j V_{a_delta_j, i_j}

The k = 1 term is ``A V_a`` with ``A = Df(phi)``; the rest is ``B_a`` and
only involves lower orders.  :class:`FdbTable` lists these terms once per
(n, r), merging terms whose factor multisets coincide into one term with an
integer multiplicity.  The same table evaluates the composition formula for
derivatives of ``g(h(x))`` because it has the same shape.
"""

from collections import Counter
from itertools import product

import numpy as np

from . import kernels
from .combinatorics import MultipointerTable, partitions, submultipointer
from .interval import Interval, as_interval

_TABLES = {}


class FdbTable:
    """Faa di Bruno terms for all multipointers of order 1..r in dimension n.

    For target order ``p`` and factor count ``k`` the attribute
    ``groups[p][k]`` is a dict of integer arrays

    ``target`` (T,)
        local index of the target multipointer within order p,
    ``beta`` (T,)
        global index of D^beta in the table,
    ``fb`` (T, k), ``fi`` (T, k)
        global index of the factor multipointer and its component,
    ``mult`` (T,)
        multiplicity of the merged term.
    """

    def __init__(self, n, r):
        self.n = n
        self.r = r
        self.table = MultipointerTable(n, r)
        t = self.table
        self.groups = {}
        for p in range(1, r + 1):
            self.groups[p] = {}
            for k in range(1, p + 1):
                terms = Counter()
                for loc, gi in enumerate(t.of_order(p)):
                    a = t[gi]
                    for delta in partitions(p, k):
                        blocks = [t.index[submultipointer(a, d)] for d in delta]
                        for idx in product(range(n), repeat=k):
                            facs = tuple(sorted(zip(blocks, idx)))
                            terms[(loc, facs)] += 1
                # fixed deterministic order: by target, then factors
                keys = sorted(terms)
                T = len(keys)
                g = {
                    "target": np.array([kk[0] for kk in keys], np.int64).reshape(T),
                    "fb": np.array([[f[0] for f in kk[1]] for kk in keys], np.int64).reshape(T, k),
                    "fi": np.array([[f[1] for f in kk[1]] for kk in keys], np.int64).reshape(T, k),
                    "mult": np.array([terms[kk] for kk in keys], float).reshape(T),
                }
                g["beta"] = np.array(
                    [t.index[tuple(sorted(i + 1 for i in row))] for row in g["fi"]], np.int64
                ).reshape(T)
                self.groups[p][k] = g
        self._pruned = {}

    def pruned(self, beta_nonzero):
        """Term groups without structurally vanishing D^beta (mask over beta)."""
        key = beta_nonzero.tobytes()
        if key not in self._pruned:
            out = {}
            for p, byk in self.groups.items():
                out[p] = {}
                for k, g in byk.items():
                    keep = beta_nonzero[g["beta"]]
                    out[p][k] = {name: arr[keep] for name, arr in g.items()}
            self._pruned[key] = out
        return self._pruned[key]


def fdb_table(n, r):
    key = (n, r)
    if key not in _TABLES:
        _TABLES[key] = FdbTable(n, r)
    return _TABLES[key]


def _ivals(x):
    x = as_interval(x)
    return x.lo, x.hi


def fdb_sum(groups, p, count, G, W, kmin, L):
    """Sum of Faa di Bruno terms of order ``p`` with at least ``kmin`` factors.

    Parameters
    ----------
    groups : dict
        ``FdbTable.groups`` or a pruned version.
    count : int
        Number of multipointers of order p.
    G : Interval, shape (M, n, L)
        Jets of D^beta (of f along phi, or of the outer map).
    W : Interval, shape (M, n, L)
        Jets of the inner derivatives V_b (only orders < p read when kmin >= 2).

    Returns
    -------
    Interval, shape (count, n, L)
    """
    n = G.shape[1]
    Glo, Ghi = G.lo[..., :L], G.hi[..., :L]
    Wlo, Whi = W.lo[..., :L], W.hi[..., :L]
    parts_lo, parts_hi, targets = [], [], []
    for k in range(kmin, p + 1):
        g = groups[p][k]
        if len(g["target"]) == 0:
            continue
        fb, fi = g["fb"], g["fi"]
        plo, phi = Wlo[fb[:, 0], fi[:, 0]], Whi[fb[:, 0], fi[:, 0]]
        for j in range(1, k):
            plo, phi = kernels.cauchy(plo, phi, Wlo[fb[:, j], fi[:, j]], Whi[fb[:, j], fi[:, j]])
        m = g["mult"][:, None]
        if np.any(m != 1.0):
            plo, phi = _scale(plo, phi, m)
        clo, chi = kernels.cauchy(Glo[g["beta"]], Ghi[g["beta"]], plo[:, None, :], phi[:, None, :])
        parts_lo.append(clo)
        parts_hi.append(chi)
        targets.append(g["target"])
    if not targets:
        return Interval.zeros((count, n, L))
    clo = np.concatenate(parts_lo)
    chi = np.concatenate(parts_hi)
    tg = np.concatenate(targets)
    # gather by target into a zero-padded (count, width, n, L) block
    order = np.argsort(tg, kind="stable")
    tg_sorted = tg[order]
    counts = np.bincount(tg_sorted, minlength=count)
    width = max(int(counts.max()), 1)
    starts = np.concatenate([[0], np.cumsum(counts)[:-1]])
    slot = np.arange(len(tg_sorted)) - starts[tg_sorted]
    blo = np.zeros((count, width, n, L))
    bhi = np.zeros((count, width, n, L))
    blo[tg_sorted, slot] = clo[order]
    bhi[tg_sorted, slot] = chi[order]
    slo, shi = kernels.sum_axis(blo, bhi, 1)
    return Interval._raw(slo, shi)


def _scale(lo, hi, m):
    from .rounding import vmul
    return vmul(lo, hi, np.broadcast_to(m, lo.shape), np.broadcast_to(m, hi.shape))


# -- derivatives of f along a base jet ------------------------------------------


def derivative_jets(vf, r, x, order, ode=True):
    """Jets of phi and of every D^beta f along it.

    Parameters
    ----------
    vf : VectorField
    r : int
        Highest derivative order of f needed.
    x : Interval, shape (n,)
        Initial condition (``ode=True``) or a full jet (n, order + 1).
    order : int

    Returns
    -------
    phi : Interval (n, order + 1)
    G : Interval (M, n, order + 1)
        ``G[m]`` is the jet of D^{table[m]} f(phi(t)); exactly zero where
        structurally zero.
    nonzero : ndarray of bool, shape (M,)
        False where every component of D^beta f is structurally zero.
    """
    tape, table, dpos, nz = vf.derivative_tape(r)
    n = vf.n
    fb = tape.outputs[:n] if ode else None
    jets = tape.run(x, order, feedback=fb)
    var_pos = [tape.index[vf.graph.var(i)] for i in range(n)]
    phi = jets[var_pos]
    L = order + 1
    glo = np.where(nz[..., None], jets.lo[dpos], 0.0) if len(table) else np.zeros((0, n, L))
    ghi = np.where(nz[..., None], jets.hi[dpos], 0.0) if len(table) else np.zeros((0, n, L))
    return phi, Interval._raw(glo, ghi), nz.any(axis=1)


def identity_init(n, r):
    """Initial variations: identity for first order, zero above."""
    table = MultipointerTable(n, r)
    lo = np.zeros((len(table), n))
    for j in range(n):
        lo[j, j] = 1.0
    return Interval._raw(lo, lo.copy())


def variational_jets(G, nonzero, V0, orders, n, r):
    """Taylor jets of all D_a phi given the D^beta f jets along phi.

    Parameters
    ----------
    G : Interval (M, n, L)
        Jets of D^beta f along the base solution, L > max(orders).
    nonzero : bool array (M,)
    V0 : Interval (M, n)
        Initial values of the variations.
    orders : sequence of int, length r
        Taylor order used for variations of order p = 1..r (non-increasing).

    Returns
    -------
    list of Interval
        Element p-1 has shape (count_p, n, orders[p-1] + 1).
    """
    fdb = fdb_table(n, r)
    t = fdb.table
    groups = fdb.pruned(nonzero)
    first = [t.index[(s + 1,)] for s in range(n)]
    out = []
    # W holds the jets of all orders computed so far, padded to max length
    Lmax = max(orders) + 1
    Wlo = np.zeros((len(t), n, Lmax))
    Whi = np.zeros((len(t), n, Lmax))
    for p in range(1, r + 1):
        o = orders[p - 1]
        sl = t.of_order(p)
        # A[k, i, s] = coefficient k of d f_i / d x_s
        Alo = G.lo[first, :, :o].transpose(2, 1, 0)
        Ahi = G.hi[first, :, :o].transpose(2, 1, 0)
        cnt = t.count(p)
        if p == 1 or o == 0:
            Blo = np.zeros((o, cnt, n))
            Bhi = np.zeros((o, cnt, n))
        else:
            W = Interval._raw(Wlo, Whi)
            B = fdb_sum(groups, p, cnt, G, W, 2, o)
            Blo, Bhi = B.lo.transpose(2, 0, 1), B.hi.transpose(2, 0, 1)
        v0 = V0[sl.start:sl.stop]
        Vlo, Vhi = kernels.linrec(Alo, Ahi, Blo, Bhi, v0.lo, v0.hi, o)
        # Vlo: (o+1, cnt, n) -> (cnt, n, o+1)
        Vlo = Vlo.transpose(1, 2, 0)
        Vhi = Vhi.transpose(1, 2, 0)
        Wlo[sl.start:sl.stop, :, :o + 1] = Vlo
        Whi[sl.start:sl.stop, :, :o + 1] = Vhi
        out.append(Interval._raw(Vlo, Vhi))
    return out


# -- pointwise right-hand sides ---------------------------------------------------


def _point_G(vf, r, x):
    _, G, nz = derivative_jets(vf, r, as_interval(x), 0, ode=False)
    return G, nz


def rhs(vf, x, V, a):
    """Enclosure of the right-hand side of the equation for D_a phi.

    Parameters
    ----------
    vf : VectorField
    x : Interval (n,)
        Enclosure of phi.
    V : Interval (M, n)
        Enclosures of D_b phi for every multipointer b up to order |a|.
    a : tuple
        Multipointer.
    """
    return _rhs_parts(vf, x, V, a, kmin=1)


def split_AB(vf, x, V, a):
    """Return (A, B_a) with rhs = B_a + A V_a and A = Df(x)."""
    n = vf.n
    p = len(a)
    G, nz = _point_G(vf, p, x)
    t = fdb_table(n, p).table
    first = [t.index[(s + 1,)] for s in range(n)]
    A = G[first][:, :, 0].T
    B = _rhs_parts(vf, x, V, a, kmin=2)
    return A, B


def _rhs_parts(vf, x, V, a, kmin):
    a = tuple(a)
    n = vf.n
    p = len(a)
    fdb = fdb_table(n, p)
    t = fdb.table
    G, nz = _point_G(vf, p, x)
    V = as_interval(V)
    M = len(t)
    if V.shape[0] < M:
        raise ValueError(f"state has {V.shape[0]} derivative blocks, need {M}")
    W = V[:M].reshape(M, n, 1)
    res = fdb_sum(fdb.pruned(nz), p, t.count(p), G, W, kmin, 1)
    return res[t.index[a] - t.offset(p)][:, 0]


def b_tilde(vf, E0, E, r):
    """B-tilde for every multipointer of order 2..r over enclosure boxes.

    Parameters
    ----------
    E0 : Interval (n,)
        Enclosure of phi.
    E : Interval (M, n)
        Enclosures of D_b phi (only orders < p are read for order p).

    Returns
    -------
    Interval (M, n); first-order rows are zero.
    """
    n = vf.n
    fdb = fdb_table(n, r)
    t = fdb.table
    G, nz = _point_G(vf, r, E0)
    W = as_interval(E).reshape(len(t), n, 1)
    groups = fdb.pruned(nz)
    rows = [Interval.zeros((t.count(1), n))]
    for p in range(2, r + 1):
        rows.append(fdb_sum(groups, p, t.count(p), G, W, 2, 1)[:, :, 0])
    from .interval import concatenate
    return concatenate(rows, 0)


def compose_derivatives(outer, inner, n, r):
    """Derivatives of g(h(x)) from those of g at h(x) and of h at x.

    Parameters
    ----------
    outer : Interval (M, n)
        D_b g evaluated over an enclosure of h(x), rows per multipointer.
    inner : Interval (M, n)
        D_b h at x.

    Returns
    -------
    Interval (M, n)
    """
    fdb = fdb_table(n, r)
    t = fdb.table
    M = len(t)
    G = as_interval(outer).reshape(M, n, 1)
    W = as_interval(inner).reshape(M, n, 1)
    rows = [fdb_sum(fdb.groups, p, t.count(p), G, W, 1, 1)[:, :, 0] for p in range(1, r + 1)]
    lo = np.concatenate([x.lo for x in rows])
    hi = np.concatenate([x.hi for x in rows])
    return Interval._raw(lo, hi)
