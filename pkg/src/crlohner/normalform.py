"""Third-order normal forms of planar maps at elliptic fixed points.

Pipeline: real Taylor jet of g at a fixed point -> eigenvalue lambda and
eigen-coordinates (xi, eta) with x = v xi + conj(v) eta -> complex
coefficients p_{l,m}, q_{l,m} -> quadratic and cubic substitution
coefficients -> alpha_2 and gamma_1 = -i alpha_2 / lambda.

Conventions (see the README for the discussion):

* lambda is the eigenvalue whose eigenvector v makes x = v xi + conj(v) eta
  orientation preserving on R^2, i.e. det[Re v, Im v] < 0;
* ``normalization="first"`` scales v so that its first component is 1;
  ``"symplectic"`` scales it so that det[Re v, Im v] = -1/4, i.e. the
  coordinates (r, s) with xi = r + i s are area-normalized.  gamma_1 scales
  by 4 |det[Re v, Im v]| between the two.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import rounding as R
from .interval import ComplexInterval, Interval, IntervalError, as_interval, mul_i
from .interval import sqrt as isqrt


class NormalFormError(RuntimeError):
    """Certification step failed (not elliptic, resonant, inconsistent)."""


def _ci(x):
    return ComplexInterval.coerce(x)


# -- input jet ----------------------------------------------------------------------


@dataclass
class PlanarJet3:
    """Taylor coefficients of a planar map g with g(0) = 0 up to order 3.

    ``coef[(i, j)]`` is an Interval of shape (2,) holding the coefficient of
    x^i y^j in (g_1, g_2), i.e. D^{(i,j)} g / (i! j!).
    """

    coef: dict

    @classmethod
    def from_derivatives(cls, table, dP, coords=(0, 1)):
        """Build from Poincare-map derivatives over the full phase space.

        Parameters
        ----------
        table : MultipointerTable
        dP : Interval (M, n)
            Derivative blocks D_a P, row m for multipointer ``table[m]``.
        coords : pair of int
            Phase-space coordinates (0-based) forming the planar map.
        """
        c0, c1 = coords
        coef = {}
        for k in range(1, 4):
            for i in range(k, -1, -1):
                j = k - i
                a = tuple(sorted([c0 + 1] * i + [c1 + 1] * j))
                row = dP[table.index[a]]
                val = Interval._raw(np.array([row.lo[c0], row.lo[c1]]),
                                    np.array([row.hi[c0], row.hi[c1]]))
                coef[(i, j)] = val / float(math.factorial(i) * math.factorial(j))
        return cls(coef)

    @classmethod
    def from_callable_coeffs(cls, c):
        """From a dict (i, j) -> pair of floats/Intervals."""
        return cls({k: as_interval(v) if isinstance(v, Interval) else
                    Interval([float(v[0]), float(v[1])]) for k, v in c.items()})

    def linear(self):
        """Jacobian enclosure [[g1_x, g1_y], [g2_x, g2_y]]."""
        cx, cy = self.coef[(1, 0)], self.coef[(0, 1)]
        lo = np.array([[cx.lo[0], cy.lo[0]], [cx.lo[1], cy.lo[1]]])
        hi = np.array([[cx.hi[0], cy.hi[0]], [cx.hi[1], cy.hi[1]]])
        return Interval._raw(lo, hi)


@dataclass
class ComplexJet3:
    lam: ComplexInterval
    p: dict
    q: dict
    v: tuple
    det_v: Interval


@dataclass
class NormalFormResult:
    lam: ComplexInterval
    gamma0: Interval
    gamma1: Interval
    alpha0: ComplexInterval
    alpha2: ComplexInterval
    phi: dict
    psi: dict
    p: dict
    q: dict
    resonance_distance: list
    nonresonant: bool
    twist: bool
    det_v: Interval
    normalization: str
    notes: list = field(default_factory=list)

    @property
    def certified(self):
        return self.nonresonant and self.twist


# -- eigenvalue ----------------------------------------------------------------------


def elliptic_check(M):
    """Eigenvalue lambda = (tr + i sqrt(4 det - tr^2)) / 2 of a 2x2 interval matrix.

    Returns the eigenvalue with positive imaginary part.

    Raises
    ------
    NormalFormError
        If tr^2 - 4 det is not certified negative.
    """
    M = as_interval(M)
    tr = M[0, 0] + M[1, 1]
    det = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
    disc = 4.0 * det - tr * tr
    if not float(disc.lo) > 0:
        raise NormalFormError("cannot certify complex eigenvalues (discriminant reaches 0)")
    return ComplexInterval(tr * 0.5, isqrt(disc) * 0.5)


def nonresonance(lam, kmax=4):
    """Lower bounds of |lambda^k - 1| for k = 1..kmax (0 when not excluded)."""
    out = []
    zk = ComplexInterval(1.0, 0.0)
    for _ in range(kmax):
        zk = zk * lam
        d = zk - 1.0
        mr, mi = float(d.re.mig()), float(d.im.mig())
        out.append(float(R.sqrt_down(R.add_down(R.mul_down(mr, mr), R.mul_down(mi, mi)))))
    return out


def argument(z):
    """Enclosure of arg z in (-pi, pi], or in (0, 2pi) across the negative axis."""
    re, im = z.re, z.im
    if float(re.lo) <= 0 <= float(re.hi) and float(im.lo) <= 0 <= float(im.hi):
        raise NormalFormError("argument of a rectangle containing 0")
    corners = [math.atan2(y, x) for x in (float(re.lo), float(re.hi))
               for y in (float(im.lo), float(im.hi))]
    if float(re.hi) < 0 and float(im.lo) <= 0 <= float(im.hi):
        corners = [c + 2 * math.pi if c < 0 else c for c in corners]
    lo = R.widen_down(min(corners), 4)
    hi = R.widen_up(max(corners), 4)
    return Interval(lo, hi)


# -- complex coordinates ------------------------------------------------------------


def _pmul(a, b, deg=3):
    out = {}
    for (i1, j1), c1 in a.items():
        for (i2, j2), c2 in b.items():
            if i1 + j1 + i2 + j2 > deg:
                continue
            key = (i1 + i2, j1 + j2)
            out[key] = out[key] + c1 * c2 if key in out else c1 * c2
    return out


def _padd(a, b):
    out = dict(a)
    for k, c in b.items():
        out[k] = out[k] + c if k in out else c
    return out


def _pscale(a, s):
    return {k: c * s for k, c in a.items()}


def eigenvector(M, lam, normalization="first"):
    """Eigenvector for lambda normalized per ``normalization``; returns (v, det)."""
    m11, m12 = M[0, 0], M[0, 1]
    if float(m12.lo) <= 0 <= float(m12.hi):
        raise NormalFormError("eigenvector normalization: m12 encloses 0")
    v2 = (lam - m11) / m12
    v1 = ComplexInterval(1.0, 0.0)
    det = v1.re * v2.im - v1.im * v2.re
    if normalization == "symplectic":
        # det scales with |c|^2 under v -> c v; choose c real with det = -1/4
        s = 1.0 / (2.0 * isqrt(abs(det)))
        v1, v2 = v1 * s, v2 * s
        det = v1.re * v2.im - v1.im * v2.re
    elif normalization != "first":
        raise ValueError(f"unknown normalization {normalization!r}")
    return (v1, v2), det


def complexify(jet, normalization="first"):
    """Coefficients p, q of g in eigen-coordinates (xi, eta).

    The eigenvalue is chosen with det[Re v, Im v] < 0 (orientation-preserving
    change of variables); the reality condition conj(p_ij) = q_ji is checked
    and both sides are intersected.
    """
    M = jet.linear()
    lam = elliptic_check(M)
    m12 = M[0, 1]
    # Im v2 = Im(lambda)/m12 must be negative
    if float(m12.lo) > 0:
        lam = lam.conj()
    elif not float(m12.hi) < 0:
        raise NormalFormError("cannot orient eigen-coordinates: m12 encloses 0")
    (v1, v2), det = eigenvector(M, lam, normalization)
    if not float(det.hi) < 0:
        raise NormalFormError("orientation of eigen-coordinates not certified")
    # x = v1 xi + conj(v1) eta, y = v2 xi + conj(v2) eta
    X = {(1, 0): v1, (0, 1): v1.conj()}
    Y = {(1, 0): v2, (0, 1): v2.conj()}
    powx = {0: {(0, 0): ComplexInterval(1.0, 0.0)}}
    powy = {0: {(0, 0): ComplexInterval(1.0, 0.0)}}
    for k in range(1, 4):
        powx[k] = _pmul(powx[k - 1], X)
        powy[k] = _pmul(powy[k - 1], Y)
    g1, g2 = {}, {}
    for (i, j), c in jet.coef.items():
        mono = _pmul(powx[i], powy[j])
        g1 = _padd(g1, _pscale(mono, ComplexInterval(c[0], 0.0)))
        g2 = _padd(g2, _pscale(mono, ComplexInterval(c[1], 0.0)))
    # inverse of L = [[v1, conj v1], [v2, conj v2]]
    dL = v1 * v2.conj() - v1.conj() * v2
    w11, w12 = v2.conj() / dL, -(v1.conj() / dL)
    w21, w22 = -(v2 / dL), v1 / dL
    keys = set(g1) | set(g2)
    zero = ComplexInterval(0.0, 0.0)
    p = {k: w11 * g1.get(k, zero) + w12 * g2.get(k, zero) for k in keys}
    q = {k: w21 * g1.get(k, zero) + w22 * g2.get(k, zero) for k in keys}
    # reality condition: conj(p_{i,j}) = q_{j,i}
    for (i, j) in list(p):
        if i + j < 2:
            continue
        a, b = p[(i, j)].conj(), q.get((j, i), zero)
        re = a.re.intersect(b.re)
        im = a.im.intersect(b.im)
        if re.is_empty() or im.is_empty():
            raise NormalFormError(f"reality condition violated at ({i},{j})")
        q[(j, i)] = ComplexInterval(re, im)
        p[(i, j)] = ComplexInterval(re, -im)
    return ComplexJet3(lam=lam, p=p, q=q, v=(v1, v2), det_v=det)


def substitution_coefficients(cj):
    """phi_{i,j} (and psi_{j,i} = conj phi_{i,j}) of the normalizing substitution.

    phi_{l,m} solves phi_{l,m} (lambda^l conj(lambda)^m - lambda) = c_{l,m}
    with conj(lambda) = 1/lambda; c is p at order 2 and the cubic coefficient
    after the quadratic substitution at order 3.  phi_{2,1} is the resonant
    term, fixed as -phi_{2,0} psi_{0,2} + phi_{0,2} psi_{2,0}.
    """
    lam = cj.lam
    p = cj.p
    one = ComplexInterval(1.0, 0.0)
    phi = {}
    phi[(0, 2)] = -(lam ** 2 * p[(0, 2)]) / (lam ** 3 - one)
    phi[(1, 1)] = -(p[(1, 1)] / (lam - one))
    phi[(2, 0)] = p[(2, 0)] / (lam ** 2 - lam)
    psi = {(j, i): c.conj() for (i, j), c in phi.items()}
    c = cubic_coefficients(p, phi, psi)
    phi[(0, 3)] = -(lam ** 3 * c[(0, 3)]) / (lam ** 4 - one)
    phi[(1, 2)] = -(lam * c[(1, 2)]) / (lam ** 2 - one)
    phi[(3, 0)] = c[(3, 0)] / (lam ** 3 - lam)
    phi[(2, 1)] = -(phi[(2, 0)] * psi[(0, 2)]) + phi[(0, 2)] * psi[(2, 0)]
    psi = {(j, i): v.conj() for (i, j), v in phi.items()}
    return phi, psi


def cubic_coefficients(p, phi, psi):
    """Cubic coefficients of the first component after the quadratic step."""
    two = 2.0
    return {
        (3, 0): p[(3, 0)] + two * p[(2, 0)] * phi[(2, 0)] + p[(1, 1)] * psi[(2, 0)],
        (2, 1): (p[(2, 1)] + two * p[(2, 0)] * phi[(1, 1)] + p[(1, 1)] * psi[(1, 1)]
                 + p[(1, 1)] * phi[(2, 0)] + two * p[(0, 2)] * psi[(2, 0)]),
        (1, 2): (p[(1, 2)] + two * p[(2, 0)] * phi[(0, 2)] + p[(1, 1)] * phi[(1, 1)]
                 + p[(1, 1)] * psi[(0, 2)] + two * p[(0, 2)] * psi[(1, 1)]),
        (0, 3): p[(0, 3)] + p[(1, 1)] * phi[(0, 2)] + two * p[(0, 2)] * psi[(0, 2)],
    }


def normal_form(jet, normalization="first", kmax=4):
    """Certified gamma_0, gamma_1 for the planar jet.

    Parameters
    ----------
    jet : PlanarJet3 or ComplexJet3
    normalization : {"first", "symplectic"}
    kmax : int
        Resonance orders excluded (lambda^k != 1 for k <= kmax).
    """
    cj = jet if isinstance(jet, ComplexJet3) else complexify(jet, normalization)
    lam = cj.lam
    dist = nonresonance(lam, kmax)
    nonres = all(d > 0 for d in dist)
    if not nonres:
        raise NormalFormError(f"resonance not excluded: |lambda^k - 1| lower bounds {dist}")
    phi, psi = substitution_coefficients(cj)
    c = cubic_coefficients(cj.p, phi, psi)
    alpha2 = c[(2, 1)]
    g = mul_i(alpha2) / lam
    g = ComplexInterval(-g.re, -g.im)  # -i alpha2 / lambda
    notes = []
    if not (float(g.im.lo) <= 0 <= float(g.im.hi)):
        raise NormalFormError("imaginary part of gamma_1 excludes 0 (inconsistent input)")
    gamma1 = g.re
    twist = not (float(gamma1.lo) <= 0 <= float(gamma1.hi))
    if not twist:
        notes.append("gamma_1 encloses 0: twist condition not certified")
    return NormalFormResult(
        lam=lam, gamma0=argument(lam), gamma1=gamma1, alpha0=lam, alpha2=alpha2,
        phi=phi, psi=psi, p=cj.p, q=cj.q, resonance_distance=dist, nonresonant=nonres,
        twist=twist, det_v=cj.det_v, normalization=normalization, notes=notes,
    )


def twist_map_jet(gamma0, gamma1):
    """Real jet in (r, s), z = r + i s, of z -> z exp(i(gamma0 + gamma1 |z|^2)) to order 3.

    Coefficients are exact up to the enclosure of cos/sin(gamma0).
    """
    from .interval import cos, sin

    c = cos(as_interval(gamma0))
    s = sin(as_interval(gamma0))
    g1 = as_interval(gamma1)
    # z e^{i g0} (1 + i g1 |z|^2):
    # r1 = c r - s s_ + g1 (-s r - c s_)(r^2 + s_^2)
    # s1 = s r + c s_ + g1 ( c r - s s_)(r^2 + s_^2)
    def vec(a, b):
        return Interval._raw(np.array([float(a.lo), float(b.lo)]), np.array([float(a.hi), float(b.hi)]))

    zero = Interval(0.0)
    coef = {
        (1, 0): vec(c, s), (0, 1): vec(-s, c),
        (2, 0): vec(zero, zero), (1, 1): vec(zero, zero), (0, 2): vec(zero, zero),
        (3, 0): vec(-g1 * s, g1 * c), (2, 1): vec(-g1 * c, -g1 * s),
        (1, 2): vec(-g1 * s, g1 * c), (0, 3): vec(-g1 * c, -g1 * s),
    }
    return PlanarJet3(coef)
