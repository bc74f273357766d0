"""Poincare maps for affine sections and their derivatives up to order r.

The crossing is located rigorously in three moves.  First the set is
integrated with regular steps while the a priori enclosure of each step
stays strictly before the section.  Then a point step brings the set close
to the section (still strictly before it), the crossing-time spread
``[0, delta]`` is verified by a point step of length ``delta`` that lands
strictly after the section plus a transversality check on that step's a
priori enclosure, and finally one step with interval length ``[0, delta]``
encloses P(X) together with all D_a phi(t_P(x), x).

Derivatives of t_P and P follow the Faa di Bruno-type formulas obtained by
differentiating P(x) = phi(t_P(x), x) and alpha(P(x)) = const order by
order; the time derivatives of D_b phi at the section come from the
variational jets started at the section data.
"""

from dataclasses import dataclass, field

import numpy as np

from .combinatorics import MultipointerTable, partitions, submultipointer
from .interval import Interval, IntervalError, as_interval, matmul
from .lohner import CnSet, IntegrationFailure, StepConfig, step
from .variational import derivative_jets, variational_jets
from math import factorial


class PoincareFailure(RuntimeError):
    """Return time could not be bracketed or transversality failed."""


@dataclass
class AffineSection:
    """Section {x : offset + <normal, x> = 0} crossed in ``direction``.

    ``direction`` is +1 when alpha increases through zero, -1 when it
    decreases, 0 for either.
    """

    normal: np.ndarray
    offset: float = 0.0
    direction: int = 0

    def __post_init__(self):
        self.normal = np.asarray(self.normal, float)
        if not np.any(self.normal != 0):
            raise ValueError("section normal must be nonzero")

    @classmethod
    def coordinate(cls, n, i, value=0.0, direction=0):
        """Section {x_i = value} (0-based i)."""
        g = np.zeros(n)
        g[i] = 1.0
        return cls(g, -float(value), direction)

    def axis(self):
        """Index of the coordinate axis if the section is {x_i = c}, else None."""
        nz = np.flatnonzero(self.normal)
        if len(nz) == 1 and self.normal[nz[0]] == 1.0:
            return int(nz[0])
        return None

    def value(self, x):
        """Enclosure of alpha over the box x."""
        x = as_interval(x)
        return matmul(as_interval(self.normal.reshape(1, -1)), x)[0] + self.offset

    def dot(self, v):
        """<normal, v> for a box v (last axis is the vector axis)."""
        v = as_interval(v)
        if v.ndim == 1:
            return matmul(as_interval(self.normal.reshape(1, -1)), v)[0]
        return matmul(v, as_interval(self.normal.reshape(-1, 1)))[..., 0]


@dataclass
class PoincareResult:
    """Enclosures at the section.

    Attributes
    ----------
    t_bracket : Interval
        Contains t_P(x) for every x in the initial set.
    image : Interval (n,)
        Contains P(X).
    dphi : Interval (M, n)
        D_a phi(t_P(x), x) enclosures.
    dtP : Interval (M,)
    dP : Interval (M, n)
    table : MultipointerTable
    cnset : CnSet or None
        The set after the interval step (encloses phi over the bracket).
    """

    t_bracket: Interval
    image: Interval
    dphi: Interval
    dtP: Interval
    dP: Interval
    table: MultipointerTable
    cnset: object = None
    steps: int = 0
    info: dict = field(default_factory=dict)

    def derivative(self, a):
        return self.dP[self.table.index[tuple(a)]]

    def jacobian(self):
        n = self.image.shape[0]
        return self.dP[[self.table.index[(j + 1,)] for j in range(n)]].T


def _side(section, box):
    """+1 if alpha > 0 on the box, -1 if < 0, 0 if it may vanish."""
    a = section.value(box)
    if float(a.lo) > 0:
        return 1
    if float(a.hi) < 0:
        return -1
    return 0


def _crossing_estimate(vf, section, x, order, hmax):
    """Nonrigorous root of alpha(phi(t, x)) on (0, hmax] by Newton on the jet."""
    c = vf.ode_jet(as_interval(x), order).mid()
    coef = section.normal @ c
    coef[0] += section.offset
    poly = np.polynomial.Polynomial(coef)
    dpoly = poly.deriv()
    s = float(dpoly(0.0))
    if s == 0:
        return None
    t = -float(poly(0.0)) / s
    for _ in range(50):
        d = float(dpoly(t))
        if d == 0:
            return None
        dt = float(poly(t)) / d
        t -= dt
        if abs(dt) <= 1e-16 * max(1.0, abs(t)):
            break
    if not (0 < t <= hmax) or not np.isfinite(t):
        return None
    return t


def _transversal(vf, section, E0, direction):
    d = section.dot(vf(E0))
    if direction > 0:
        return float(d.lo) > 0
    if direction < 0:
        return float(d.hi) < 0
    return float(d.lo) > 0 or float(d.hi) < 0


def return_time_bracket(vf, S, section, h, config=None, t_max=100.0, max_steps=100000):
    """Integrate S to the section; return (set before, delta, direction, steps).

    The returned set is strictly before the section and every trajectory
    from it crosses exactly once within time (0, delta).
    """
    config = config or StepConfig()
    before = None  # sign of alpha on the side we approach from
    want = section.direction
    steps = 0
    t0 = float(S.t.lo)
    while steps < max_steps:
        if float(S.t.hi) - t0 > t_max:
            raise PoincareFailure("no crossing within the time limit")
        side = _side(section, S.hull())
        if before is None:
            if side != 0 and (want == 0 or side == -want):
                before = side
            else:
                S = step(vf, S, h, config).cnset
                steps += 1
                continue
        direction = -before
        res = step(vf, S, h, config)
        steps += 1
        E0 = res.diagnostics["E0"]
        if _side(section, E0) == before:
            S = res.cnset
            if res.halvings:
                h = float(res.h.hi)
            continue
        # the next step may touch the section: approach carefully
        tau = _crossing_estimate(vf, section, S.v0, config.order, 2.0 * h)
        if tau is None or tau > h:
            # the crossing is not within this step for the midpoint; take half
            res = step(vf, S, 0.5 * h, config)
            steps += 1
            if _side(section, res.cnset.hull()) == before and (
                    _side(section, res.diagnostics["E0"]) == before
                    or _transversal(vf, section, res.diagnostics["E0"], direction)):
                S = res.cnset
                continue
            raise PoincareFailure("cannot approach the section")
        speed = abs(float(section.dot(vf(as_interval(S.v0))).mid()))
        hull = S.hull()
        spread = float(section.value(hull).diam()) / speed
        delta = 2.0 * spread + 1e-12 * (1.0 + tau)
        for _ in range(12):
            ta = tau - delta
            Sa = S
            if ta > 0:
                ra = step(vf, S, ta, config)
                steps += 1
                ok = _side(section, ra.cnset.hull()) == before and (
                    _side(section, ra.diagnostics["E0"]) == before
                    or _transversal(vf, section, ra.diagnostics["E0"], direction))
                if not ok:
                    delta *= 2.0
                    continue
                Sa = ra.cnset
            width = 2.0 * delta if ta > 0 else tau + delta
            rb = step(vf, Sa, width, config)
            steps += 1
            if _side(section, rb.cnset.hull()) == direction and rb.halvings == 0 and \
                    _transversal(vf, section, rb.diagnostics["E0"], direction):
                return Sa, width, direction, steps
            delta *= 2.0
        raise PoincareFailure("could not bracket the return time")
    raise PoincareFailure("too many steps")


def poincare_map(vf, X, section, r, h, config=None, t_max=100.0):
    """Rigorous Poincare map data from the box (or CnSet) X.

    Returns
    -------
    PoincareResult
    """
    config = config or StepConfig()
    S = X if isinstance(X, CnSet) else CnSet.from_box(X, r)
    Sa, delta, direction, steps = return_time_bracket(vf, S, section, h, config, t_max)
    res = step(vf, Sa, Interval(0.0, delta), config)
    Sp = res.cnset
    image = Sp.hull()
    ax = section.axis()
    if ax is not None:
        image = image.with_item(ax, Interval(-section.offset))
    dphi = Sp.derivatives()
    dtP, dP = section_derivatives(vf, section, image, dphi, r)
    return PoincareResult(
        t_bracket=Sp.t, image=image, dphi=dphi, dtP=dtP, dP=dP, table=Sp.table,
        cnset=Sp, steps=steps + 1, info={"direction": direction},
    )


def time_map(vf, X, T, r, h, config=None):
    """The time-T map phi(T, .) as a degenerate Poincare map (D t_P = 0)."""
    from .lohner import integrate

    config = config or StepConfig()
    S = X if isinstance(X, CnSet) else CnSet.from_box(X, r)
    count = [0]

    def tick(_):
        count[0] += 1

    S = integrate(vf, S, T, h, config, on_step=tick)
    dphi = S.derivatives()
    return PoincareResult(
        t_bracket=S.t, image=S.hull(), dphi=dphi, dtP=Interval.zeros(len(S.table)),
        dP=dphi, table=S.table, cnset=S, steps=count[0],
    )


# -- derivative formulas ----------------------------------------------------------


def time_jets(vf, image, dphi, r):
    """d^m/dt^m phi and d^m/dt^m D_b phi at the section (not divided by m!).

    Returns ``(tphi, tV)`` with ``tphi[m]`` (n,) for m = 0..r and ``tV[m]``
    (M, n) for m = 0..r-1 (entries of order p valid for m <= r - p).
    """
    n = vf.n
    if r == 0:
        phi = vf.ode_jet(image, 0)
        return [phi[:, 0]], []
    _, G, nz = derivative_jets(vf, max(r - 1, 1), image, r)
    phi = vf.ode_jet(image, r)
    tphi = [phi[:, m] * float(factorial(m)) for m in range(r + 1)]
    if r == 1:
        return tphi, [dphi]
    orders = [r - p for p in range(1, r)]
    table = MultipointerTable(n, r - 1)
    V = variational_jets(G, nz, dphi[:len(table)], orders, n, r - 1)
    M = len(MultipointerTable(n, r))
    tV = []
    for m in range(r):
        lo = np.zeros((M, n))
        hi = np.zeros((M, n))
        off = 0
        for p in range(1, r):
            cnt = table.count(p)
            if m <= orders[p - 1]:
                blk = V[p - 1][:, :, m] * float(factorial(m))
                lo[off:off + cnt] = blk.lo
                hi[off:off + cnt] = blk.hi
            else:
                lo[off:off + cnt] = -np.inf
                hi[off:off + cnt] = np.inf
            off += cnt
        if m == 0:
            lo[off:] = dphi[off:].lo
            hi[off:] = dphi[off:].hi
        else:
            lo[off:] = -np.inf
            hi[off:] = np.inf
        tV.append(Interval._raw(lo, hi))
    return tphi, tV


def _terms(a, table):
    """Yield (k, blocks, s) for the chain-rule expansion of D_a P.

    blocks are global indices of a_delta_j; s is the index of the block that
    differentiates phi in x (None when every block goes to t).
    """
    p = len(a)
    for k in range(1, p + 1):
        for delta in partitions(p, k):
            blocks = [table.index[submultipointer(a, d)] for d in delta]
            yield k, blocks, None
            for s in range(k):
                yield k, blocks, s


def section_derivatives(vf, section, image, dphi, r):
    """D_a t_P and D_a P for all |a| <= r at the section.

    Parameters
    ----------
    image : Interval (n,)
        Enclosure of P(X).
    dphi : Interval (M, n)
        Enclosures of D_a phi(t_P(x), x).

    Raises
    ------
    PoincareFailure
        When <grad alpha, f(P(X))> contains zero.
    """
    n = vf.n
    table = MultipointerTable(n, r)
    M = len(table)
    if M == 0:
        return Interval.zeros(0), Interval.zeros((0, n))
    tphi, tV = time_jets(vf, image, dphi, r)
    fP = tphi[1]
    denom = section.dot(fP)
    if float(denom.lo) <= 0 <= float(denom.hi):
        raise PoincareFailure("transversality fails at the section")
    dtP = [None] * M
    dP = [None] * M
    for gi, a in enumerate(table.items):
        rest = Interval.zeros(n)
        for k, blocks, s in _terms(a, table):
            if s is None:
                if k == 1:
                    continue  # the unknown term f * D_a t_P
                term = tphi[k]
                for b in blocks:
                    term = term * dtP[b]
            else:
                term = tV[k - 1][blocks[s]]
                for j, b in enumerate(blocks):
                    if j != s:
                        term = term * dtP[b]
            rest = rest + term
        dt = -section.dot(rest) / denom
        dtP[gi] = dt
        dP[gi] = rest + fP * dt
    from .interval import stack
    return stack(dtP), stack(dP)


def dtP_first(vf, section, image, dphi_first):
    """Gradient of t_P: -<grad alpha, D_j phi> / <grad alpha, f(P)>.

    ``dphi_first`` is the (n, n) matrix with columns D_(j) phi.
    """
    denom = section.dot(vf(image))
    if float(denom.lo) <= 0 <= float(denom.hi):
        raise PoincareFailure("transversality fails at the section")
    num = section.dot(as_interval(dphi_first).T)
    return -num / denom
