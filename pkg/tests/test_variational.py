import math

import numpy as np
import pytest
import sympy as sp

from crlohner.combinatorics import MultipointerTable
from crlohner.interval import Interval
from crlohner.variational import (
    b_tilde, compose_derivatives, derivative_jets, fdb_table, identity_init, rhs, split_AB,
    variational_jets,
)
from crlohner.vectorfield import VectorField


def _stirling(p, k):
    return sum((-1) ** j * math.comb(k, j) * (k - j) ** p for j in range(k + 1)) // math.factorial(k)


@pytest.mark.parametrize("n,r", [(1, 4), (2, 3), (3, 3)])
def test_fdb_multiplicities_count_all_terms(n, r):
    fdb = fdb_table(n, r)
    t = fdb.table
    for p in range(1, r + 1):
        for k in range(1, p + 1):
            g = fdb.groups[p][k]
            per_target = np.bincount(g["target"], weights=g["mult"], minlength=t.count(p))
            assert np.all(per_target == _stirling(p, k) * n ** k)


def test_rhs_of_quadratic_field():
    vf = VectorField.parse(["x*x"], names=["x"])
    x = Interval([0.5])
    V = Interval(np.array([[2.0], [3.0], [5.0]]))  # V1, V11, V111
    # V1' = 2 x V1, V11' = 2 x V11 + 2 V1^2, V111' = 2 x V111 + 6 V1 V11
    assert rhs(vf, x, V, (1,)).contains(2.0)
    assert rhs(vf, x, V, (1, 1)).contains(3.0 + 8.0)
    assert rhs(vf, x, V, (1, 1, 1)).contains(5.0 + 36.0)
    A, B = split_AB(vf, x, V, (1, 1, 1))
    assert A[0, 0].contains(1.0) and B.contains(36.0)


def test_variational_jets_of_quadratic_field():
    # x' = x^2, x(0) = 1: D_1 phi = (1-t)^-2, D_11 = 2t (1-t)^-3, D_111 = 6t^2 (1-t)^-4
    vf = VectorField.parse(["x*x"], names=["x"])
    phi, G, nz = derivative_jets(vf, 3, Interval([1.0]), 10)
    V = variational_jets(G, nz, identity_init(1, 3), [10, 9, 8], 1, 3)
    t = sp.symbols("t")
    exact = [(1 - t) ** -2, 2 * t * (1 - t) ** -3, 6 * t ** 2 * (1 - t) ** -4]
    for p in range(3):
        s = sp.series(exact[p], t, 0, V[p].shape[2]).removeO()
        for k in range(V[p].shape[2]):
            c = float(s.coeff(t, k))
            assert V[p][0, 0, k].contains(c)


def test_composition_against_symbolic():
    x, y = sp.symbols("x y")
    h = [sp.sin(x) + y * y, x * y + sp.exp(y)]
    u, v = sp.symbols("u v")
    g = [u * u * v + sp.cos(v), u - v ** 3]
    pt = {x: 0.3, y: -0.6}
    hp = {u: float(h[0].subs(pt)), v: float(h[1].subs(pt))}
    tab = MultipointerTable(2, 3)

    def table_of(fs, vars_, at):
        lo = np.zeros((len(tab), 2))
        for m, a in enumerate(tab.items):
            for i in range(2):
                d = fs[i]
                for j in a:
                    d = sp.diff(d, vars_[j - 1])
                lo[m, i] = float(d.subs(at))
        return Interval(lo).inflate(1.0, 1e-15)

    inner = table_of(h, (x, y), pt)
    outer = table_of(g, (u, v), hp)
    comp = [gi.subs({u: h[0], v: h[1]}) for gi in g]
    want = table_of(comp, (x, y), pt)
    got = compose_derivatives(outer, inner, 2, 3)
    assert np.all(got.lo <= want.hi) and np.all(want.lo <= got.hi)
    assert np.all(np.abs(got.mid() - want.mid()) < 1e-12 * (1 + np.abs(want.mid())))


def test_b_tilde_quadratic():
    vf = VectorField.parse(["x*x"], names=["x"])
    E0 = Interval([1.0], [2.0])
    E = Interval(np.array([[1.0], [0.0]]), np.array([[2.0], [0.0]]))
    B = b_tilde(vf, E0, E, 2)
    # second order: 2 V1^2 over V1 in [1, 2]
    assert B[1, 0].contains(2.0) and B[1, 0].contains(8.0)
    assert B[0, 0] == Interval(0.0)
