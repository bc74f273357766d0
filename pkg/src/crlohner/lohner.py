"""The C^r-Lohner integrator.

A :class:`CnSet` stores phi(t_k, X0) and all D_a phi(t_k, X0), |a| <= r, as
doubletons ``v + B r + C q``.  One :func:`step`:

1. encloses the flow and the variations over [0, h] a priori
   (:mod:`crlohner.enclosure`);
2. computes the Taylor series of the step map and of its derivatives
   [F_a] = D_a phi(h, X) with Lagrange remainders over the a priori boxes;
3. composes them with the current derivatives (Faa di Bruno) and
   rearranges every block with a QR-based change of coordinates.

The base set uses its own (B0, C0) pair; all derivative blocks share one
(B, C) pair.  ``C`` is kept as an interval matrix so that the Lipschitz-part
reset ``C := B`` stays rigorous.
"""

import json
from dataclasses import dataclass, field, replace

import numpy as np

from .combinatorics import MultipointerTable
from .enclosure import EnclosureFailure, c0_enclosure, derivative_enclosures
from .interval import Interval, IntervalError, as_interval, concatenate, format_decimal, matmul
from .interval import sqrt as isqrt
from .variational import derivative_jets, fdb_sum, fdb_table, identity_init, variational_jets


class IntegrationFailure(RuntimeError):
    """Step size fell below the minimum without a validated enclosure."""


def default_orders(order, r):
    """Taylor orders o_d = max(4, order - (d - 1)) for d = 1..r."""
    return [max(4, order - d) for d in range(max(r, 1))]


@dataclass
class StepConfig:
    order: int = 20
    orders: list = None
    norm: str = "inf"
    h_min: float = 1e-12
    reset_ratio: float = 10.0
    inflation: float = 1.5
    attempts: int = 20
    qr: bool = True
    mode: str = "doubleton"

    def var_orders(self, r):
        if self.orders is None:
            return default_orders(self.order, r)
        o = list(self.orders)
        if len(o) < max(r, 1):
            raise ValueError(f"need {max(r, 1)} variational orders, got {len(o)}")
        if any(o[i] < o[i + 1] for i in range(len(o) - 1)):
            raise ValueError("variational orders must be non-increasing")
        return o[:max(r, 1)]


@dataclass
class CnSet:
    """Doubleton enclosure of phi and its derivatives at time ``t``.

    Attributes
    ----------
    t : Interval
        Encloses the exact accumulated time.
    v0, B0, r0, C0, q0
        Base doubleton: phi in v0 + B0 r0 + C0 q0.
    v : ndarray (M, n)
    B, C : Interval (n, n)
        Shared by all derivative blocks.
    r, q : Interval (M, n)
        Row m is the block of multipointer ``table[m]``.
    order : int
        Highest derivative order r.
    """

    t: Interval
    v0: np.ndarray
    B0: Interval
    r0: Interval
    C0: Interval
    q0: Interval
    v: np.ndarray
    B: Interval
    C: Interval
    r: Interval
    q: Interval
    order: int
    table: MultipointerTable = field(repr=False, default=None)
    resets: int = 0

    @classmethod
    def from_box(cls, x, order, t=0.0, V0=None):
        """Set representing the box ``x`` with identity derivatives.

        ``V0`` optionally overrides the initial derivative blocks (M, n).
        """
        x = as_interval(x)
        n = x.shape[0]
        v0 = x.mid()
        table = MultipointerTable(n, order)
        M = len(table)
        Id = Interval.eye(n)
        if V0 is None:
            V = identity_init(n, order) if order else Interval.zeros((0, n))
        else:
            V = as_interval(V0)
        vm = V.mid() if M else np.zeros((0, n))
        return cls(
            t=as_interval(t), v0=v0, B0=Id, r0=Interval.zeros(n), C0=Id, q0=x - v0,
            v=vm, B=Id, C=Id, r=Interval.zeros((M, n)), q=V - vm if M else Interval.zeros((0, n)),
            order=order, table=table,
        )

    @property
    def n(self):
        return self.v0.shape[0]

    def hull(self):
        """Interval hull of the base set."""
        return self.v0 + matmul(self.B0, self.r0) + matmul(self.C0, self.q0)

    def derivatives(self):
        """Interval hulls of all derivative blocks, shape (M, n)."""
        if len(self.table) == 0:
            return Interval.zeros((0, self.n))
        return self.v + matmul(self.r, self.B.T) + matmul(self.q, self.C.T)

    def derivative(self, a):
        """Hull of D_a phi for the multipointer ``a``."""
        return self.derivatives()[self.table.index[tuple(a)]]

    def jacobian(self):
        """Hull of D phi as an (n, n) matrix."""
        n = self.n
        D = self.derivatives()
        return D[[self.table.index[(j + 1,)] for j in range(n)]].T

    def widths(self):
        """Per-order maximal widths of derivative hulls."""
        D = self.derivatives()
        return [float(np.max(D[list(self.table.of_order(p))].diam())) for p in range(1, self.order + 1)]

    def record(self):
        """Per-step diagnostics as a JSON-serializable dict."""
        return {
            "t": format_decimal(float(self.t.lo), float(self.t.hi)),
            "v0": [float(x) for x in self.v0],
            "r0_width": float(np.max(self.r0.diam())),
            "q0_width": float(np.max(self.q0.diam())),
            "order_widths": self.widths() if self.order else [],
        }


@dataclass
class StepResult:
    accepted: bool
    cnset: CnSet
    h: Interval
    halvings: int = 0
    diagnostics: dict = field(default_factory=dict)


# -- QR with a rigorous orthogonality defect ---------------------------------------


def orthogonal_enclosure(P):
    """Interval matrix containing an orthogonal matrix, from QR of point P.

    Q from Householder QR is off orthogonality by eps >= ||Q^T Q - I||_2; the
    nearest orthogonal matrix then differs from Q by at most
    sqrt(1 + eps) ((1 - eps)^(-1/2) - 1) in the 2-norm, which bounds every
    entry.  Falls back to the identity for rank-deficient or non-finite P.
    """
    n = P.shape[0]
    if not np.all(np.isfinite(P)):
        return Interval.eye(n), False
    Q, Rm = np.linalg.qr(P)
    if np.min(np.abs(np.diag(Rm))) <= 1e-300 * max(1.0, np.max(np.abs(P))):
        return Interval.eye(n), False
    Qi = as_interval(Q)
    D = matmul(Qi.T, Qi) - Interval.eye(n)
    fro = (D.mag() ** 2).sum()
    eps = float(Interval(fro * (1 + 1e-12)).hi) ** 0.5 * (1 + 1e-12)
    if eps >= 0.5:
        return Interval.eye(n), False
    e = Interval(eps)
    d = isqrt(1.0 + e) * (1.0 / isqrt(1.0 - e) - 1.0)
    dh = float(d.hi)
    return Interval.from_mid_rad(Q, np.full(Q.shape, dh)), True


def _pt(x):
    return as_interval(np.asarray(x, float))


def _rearrange(s, J, mJ, v_old_B, r_old, C_old, q_old, Q):
    """New (v, r, C, Z) from the propagated interval ``s``.

    s : Interval (..., n) raw propagated set (its midpoint becomes v)
    """
    v = s.mid()
    ds = s - v
    Z = matmul(mJ, C_old)
    Cn = _pt(Z.mid())
    dZ = Z - Cn
    QT = Q.T
    # r' = Q^T (ds + dZ q) + (Q^T mJ B) r
    QB = matmul(QT, matmul(mJ, v_old_B))
    if ds.ndim == 1:
        rn = matmul(QT, ds + matmul(dZ, q_old)) + matmul(QB, r_old)
    else:
        rn = matmul(ds + matmul(q_old, dZ.T), Q) + matmul(r_old, QB.T)
    return v, rn, Cn


def _horner(coeffs, H):
    """sum_i coeffs[..., i] H^i with interval H (last axis = powers)."""
    out = coeffs[..., -1]
    for i in range(coeffs.shape[-1] - 2, -1, -1):
        out = out * H + coeffs[..., i]
    return out


def taylor_Fa(vf, X, E0, E, H, r_eff, order, var_orders):
    """Enclosures of phi(h, X) over h in H, and of D_a phi(h, X) for |a| <= r_eff.

    Returns ``(phiX_jet, F)`` where F has shape (M, n); F for first order
    multipointers forms the Jacobian of the step map.
    """
    n = vf.n
    omax = max([order] + list(var_orders))
    # jets from X with identity initial variations
    _, GX, nzX = derivative_jets(vf, r_eff, X, omax)
    VX = variational_jets(GX, nzX, identity_init(n, r_eff), var_orders, n, r_eff)
    # remainder jets over the a priori enclosures
    _, GE, nzE = derivative_jets(vf, r_eff, E0, omax + 1)
    VE = variational_jets(GE, nzE, E, [o + 1 for o in var_orders], n, r_eff)
    parts = []
    for p in range(1, r_eff + 1):
        o = var_orders[p - 1]
        c = VX[p - 1]
        rem = VE[p - 1][:, :, o + 1:o + 2]
        parts.append(_horner(concatenate([c, rem], axis=2), H))
    return concatenate(parts, 0)


def step(vf, S, h, config=None):
    """One C^r-Lohner step of length h (float or Interval, h >= 0).

    Halves h on enclosure failure until ``config.h_min``.

    Returns
    -------
    StepResult
    """
    config = config or StepConfig()
    H = as_interval(h)
    halvings = 0
    while True:
        try:
            S2, diag = _step(vf, S, H, config)
            return StepResult(True, S2, H, halvings, diag)
        except (EnclosureFailure, IntervalError) as e:
            if not H.is_point():
                raise IntegrationFailure(f"enclosure failed for interval step: {e}") from None
            hn = float(H.hi) * 0.5
            if hn < config.h_min:
                raise IntegrationFailure(f"step below h_min: {e}") from None
            H = Interval(hn)
            halvings += 1


def _step(vf, S, H, config):
    n = vf.n
    r = S.order
    r_eff = max(r, 1)
    o = config.order
    vo = config.var_orders(r_eff)
    X = S.hull()
    E0 = c0_enclosure(vf, X, H, config.inflation, config.attempts)
    Id = identity_init(n, r_eff)
    E, info = derivative_enclosures(vf, E0, Id, H, r_eff, config.norm)
    F = taylor_Fa(vf, X, E0, E, H, r_eff, o, vo)
    table = fdb_table(n, r_eff).table
    first = [table.index[(j + 1,)] for j in range(n)]
    J = F[first].T
    if not J.is_bounded():
        raise EnclosureFailure("unbounded Jacobian enclosure")
    mJ = _pt(J.mid())
    dJ = J - mJ
    # base: y = phi(h, v0) with remainder over E0
    jet_pt = vf.ode_jet(_pt(S.v0), o)
    jetE = vf.ode_jet(E0, o + 1)
    y = _horner(concatenate([jet_pt, jetE[:, o + 1:o + 2]], 1), H)
    s0 = y + matmul(dJ, X - S.v0)
    if config.mode == "hull":
        return _hull_step(S, H, s0, J, mJ, F[:len(S.table)] if r >= 1 else None, info, E0, r, n)
    P0 = mJ.mid() @ S.B0.mid()
    Q0, ok0 = orthogonal_enclosure(P0) if config.qr else (Interval.eye(n), False)
    v0n, r0n, C0n = _rearrange(s0, J, mJ, S.B0, S.r0, S.C0, S.q0, Q0)
    out = replace(S, t=S.t + H, v0=v0n, B0=Q0, r0=r0n, C0=C0n, q0=S.q0)
    if r >= 1:
        M = len(S.table)
        Vh = S.derivatives()
        if r >= 2:
            groups = fdb_table(n, r).groups
            Gstep = F[:M].reshape(M, n, 1)
            W = Vh.reshape(M, n, 1)
            alphas = [Interval.zeros((S.table.count(1), n))]
            for p in range(2, r + 1):
                alphas.append(fdb_sum(groups, p, S.table.count(p), Gstep, W, 2, 1)[:, :, 0])
            alpha = concatenate(alphas, 0)
        else:
            alpha = Interval.zeros((M, n))
        s = alpha + matmul(_pt(S.v), mJ.T) + matmul(Vh, dJ.T)
        P = mJ.mid() @ S.B.mid()
        Q, ok = orthogonal_enclosure(P) if config.qr else (Interval.eye(n), False)
        vn, rn, Cn = _rearrange(s, J, mJ, S.B, S.r, S.C, S.q, Q)
        out = replace(out, v=vn, B=Q, r=rn, C=Cn, q=S.q)
    out = reset_lipschitz(out, config.reset_ratio)
    diag = {"l": info["l"], "E0": E0}
    return out, diag


def _hull_step(S, H, s0, J, mJ, F, info, E0, r, n):
    """Naive propagation: the new set is the interval hull of the image.

    Exists to exhibit the wrapping effect that the doubleton avoids.
    """
    box = s0 + matmul(mJ, S.hull() - S.v0)
    out = CnSet.from_box(box, 0, t=S.t + H)
    if r >= 1:
        Vh = S.derivatives()
        if r >= 2:
            raise ValueError("hull mode supports r <= 1")
        D = matmul(Vh, J.T)
        vm = D.mid()
        out = replace(out, order=r, table=S.table, v=vm, B=Interval.eye(n), C=Interval.eye(n),
                      r=Interval.zeros(D.shape), q=D - vm)
    return out, {"l": info["l"], "E0": E0}


def reset_lipschitz(S, ratio=10.0):
    """Move the r-parts into the Lipschitz parts when they dominate.

    Base and derivative blocks are tested separately; for the derivative
    blocks the test and the reset act on all blocks at once.
    """
    out = S
    dr = float(np.max(S.r0.diam())) if S.n else 0.0
    dq = float(np.max(S.q0.diam())) if S.n else 0.0
    if dr > ratio * dq:
        q0 = S.r0 + matmul(matmul(S.B0.T, S.C0), S.q0)
        out = replace(out, q0=q0, r0=Interval.zeros(S.n), C0=S.B0, B0=Interval.eye(S.n),
                      resets=out.resets + 1)
    if S.order >= 1 and len(S.table):
        dr = float(np.max(S.r.diam()))
        dq = float(np.max(S.q.diam()))
        if dr > ratio * dq:
            BtC = matmul(S.B.T, S.C)
            q = S.r + matmul(S.q, BtC.T)
            out = replace(out, q=q, r=Interval.zeros(S.r.shape), C=S.B, B=Interval.eye(S.n))
    return out


def integrate(vf, S, T, h, config=None, on_step=None):
    """Integrate the set S up to time T with nominal step h.

    The final step is shortened to hit T; since accumulated times are
    intervals, that last step length is an interval.
    """
    config = config or StepConfig()
    T = as_interval(T)
    steps = 0
    while True:
        remaining = T - S.t
        if float(remaining.hi) <= 0.0:
            break
        if float(remaining.lo) <= h:
            rem = Interval(max(float(remaining.lo), 0.0), float(remaining.hi))
            S = step(vf, S, rem, config).cnset
            steps += 1
            if on_step:
                on_step(S)
            break
        res = step(vf, S, h, config)
        S = res.cnset
        h_used = float(res.h.hi)
        if res.halvings:
            h = h_used
        steps += 1
        if on_step:
            on_step(S)
    return S


def dump_trajectory(records, fh):
    """Write per-step records as line-delimited JSON."""
    for rec in records:
        fh.write(json.dumps(rec) + "\n")
