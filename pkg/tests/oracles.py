"""Independent floating-point oracles used by the tests.

The normal-form oracle solves the conjugation F o H = H o N order by order
as plain linear systems, with the linear operators assembled by applying
truncated polynomial composition to basis vectors.  It shares no formulas
with the library.
"""

import numpy as np

MONOS = {k: [(i, k - i) for i in range(k, -1, -1)] for k in range(4)}


def pmul(a, b, deg=3):
    out = {}
    for (i1, j1), c1 in a.items():
        for (i2, j2), c2 in b.items():
            if i1 + j1 + i2 + j2 <= deg:
                key = (i1 + i2, j1 + j2)
                out[key] = out.get(key, 0) + c1 * c2
    return out


def compose(F, H, deg=3):
    """F o H for maps given as two dicts of monomial coefficients, truncated."""
    powers0 = {0: {(0, 0): 1.0}}
    powers1 = {0: {(0, 0): 1.0}}
    for k in range(1, deg + 1):
        powers0[k] = pmul(powers0[k - 1], H[0], deg)
        powers1[k] = pmul(powers1[k - 1], H[1], deg)
    out = []
    for comp in F:
        acc = {}
        for (i, j), c in comp.items():
            for key, v in pmul(powers0[i], powers1[j], deg).items():
                acc[key] = acc.get(key, 0) + c * v
        out.append(acc)
    return out


def complexify(coef, normalization="first"):
    """Complex coordinates x = v xi + conj(v) eta with det[Re v, Im v] < 0."""
    M = np.array([[coef[(1, 0)][0], coef[(0, 1)][0]], [coef[(1, 0)][1], coef[(0, 1)][1]]], float)
    w, V = np.linalg.eig(M)
    for lam, v in zip(w, V.T):
        v = v / v[0]
        d = v.real[0] * v.imag[1] - v.real[1] * v.imag[0]
        if d < 0:
            break
    if normalization == "symplectic":
        v = v / (2 * np.sqrt(abs(d)))
    L = np.array([[v[0], np.conj(v[0])], [v[1], np.conj(v[1])]])
    Linv = np.linalg.inv(L)
    X = [{(1, 0): v[0], (0, 1): np.conj(v[0])}, {(1, 0): v[1], (0, 1): np.conj(v[1])}]
    G = compose([{k: c[0] for k, c in coef.items()}, {k: c[1] for k, c in coef.items()}], X)
    F = [{}, {}]
    for r in range(2):
        for key in set(G[0]) | set(G[1]):
            F[r][key] = Linv[r, 0] * G[0].get(key, 0) + Linv[r, 1] * G[1].get(key, 0)
    return lam, F


def normal_form_oracle(F, lam):
    """Return (gamma1, H) solving F o H = H o N to order 3; H has zero resonant terms."""
    lamb = np.conj(lam)
    N = [{(1, 0): lam}, {(0, 1): lamb}]
    H = [{(1, 0): 1.0}, {(0, 1): 1.0}]

    def residual(Hc, Nc):
        a = compose(F, Hc)
        b = compose(Hc, Nc)
        return a, b

    for k in (2, 3):
        resonant = [(0, (2, 1)), (1, (1, 2))] if k == 3 else []
        unknowns = [(r, m) for r in range(2) for m in MONOS[k] if (r, m) not in resonant]
        rows = [(r, m) for r in range(2) for m in MONOS[k]]

        def eq(xH, xN):
            Hc = [dict(H[0]), dict(H[1])]
            Nc = [dict(N[0]), dict(N[1])]
            for (r, m), val in zip(unknowns, xH):
                Hc[r][m] = val
            for (r, m), val in zip(resonant, xN):
                Nc[r][m] = val
            a, b = residual(Hc, Nc)
            return np.array([a[r].get(m, 0) - b[r].get(m, 0) for r, m in rows])

        nu, nn = len(unknowns), len(resonant)
        base = eq(np.zeros(nu, complex), np.zeros(nn, complex))
        cols = []
        for i in range(nu + nn):
            e = np.zeros(nu + nn, complex)
            e[i] = 1.0
            cols.append(eq(e[:nu], e[nu:]) - base)
        A = np.array(cols).T
        sol = np.linalg.solve(A, -base)
        for (r, m), val in zip(unknowns, sol[:nu]):
            H[r][m] = val
        for (r, m), val in zip(resonant, sol[nu:]):
            N[r][m] = val
    alpha2 = N[0][(2, 1)]
    return (-1j * alpha2 / lam), H


def random_elliptic_jet(rng, scale=0.5):
    """3-jet of an area-preserving map L o Sx o Sy with an elliptic linear part.

    Sx(x, y) = (x + a(y), y) and Sy(x, y) = (x, y + b(x)) are shears with
    random quadratic plus cubic a, b; L has det 1 and trace in (-2, 2).
    """
    th = rng.uniform(0.3, 2.8)
    s = rng.uniform(0.5, 2.0) * rng.choice([-1, 1])
    L = [{(1, 0): np.cos(th), (0, 1): s * np.sin(th)}, {(1, 0): -np.sin(th) / s, (0, 1): np.cos(th)}]
    a = {(0, 2): rng.standard_normal() * scale, (0, 3): rng.standard_normal() * scale}
    b = {(2, 0): rng.standard_normal() * scale, (3, 0): rng.standard_normal() * scale}
    Sx = [{(1, 0): 1.0, **a}, {(0, 1): 1.0}]
    Sy = [{(1, 0): 1.0}, {(0, 1): 1.0, **b}]
    G = compose(L, compose(Sx, Sy))
    coef = {}
    for k in (1, 2, 3):
        for m in MONOS[k]:
            coef[m] = np.array([G[0].get(m, 0.0), G[1].get(m, 0.0)], float)
    return coef
