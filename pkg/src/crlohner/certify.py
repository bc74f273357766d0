"""End-to-end certification pipelines for elliptic periodic orbits.

Each pipeline locates a fixed point of a return map nonrigorously, proves
its existence in a small box, computes a rigorous third-order jet of the
map there and certifies ellipticity, nonresonance and the twist condition.
Nonrigorous numbers enter certificates only as box centres and radii.
"""

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .interval import Interval, IntervalError, as_interval, hull, pi, solve
from .lohner import IntegrationFailure, StepConfig
from .normalform import NormalFormError, PlanarJet3, normal_form
from .poincare import AffineSection, PoincareFailure, poincare_map, time_map
from .variational import compose_derivatives
from .vectorfield import VectorField


class StageFailure(RuntimeError):
    """A certification stage did not produce its certificate."""

    def __init__(self, stage, message):
        super().__init__(f"{stage}: {message}")
        self.stage = stage


@dataclass
class NewtonResult:
    N: Interval
    box: Interval
    certified: bool


@dataclass
class CertificationReport:
    system: str
    param: Interval
    method: str
    verdict: str = "failed:unknown"
    fixed_point: Interval = None
    box: Interval = None
    eigenvalue: object = None
    resonance_distance: list = None
    gamma0: Interval = None
    gamma1: Interval = None
    checks: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)
    message: str = ""
    wall_clock: float = 0.0

    @property
    def certified(self):
        return self.verdict == "certified"

    def to_text(self, digits=17):
        """Structured text with outward-rounded decimals and a verdict line."""

        def fmt(x):
            if x is None:
                return "-"
            if isinstance(x, Interval):
                x = as_interval(x)
                if x.ndim == 0:
                    return x.to_decimal(digits)
                return " x ".join(x[i].to_decimal(digits) for i in range(x.shape[0]))
            return x.to_decimal(digits)

        lines = [
            f"system: {self.system}",
            f"parameter: {fmt(self.param)}",
            f"method: {self.method}",
            f"box: {fmt(self.box)}",
            f"fixed_point: {fmt(self.fixed_point)}",
            f"eigenvalue: {fmt(self.eigenvalue)}",
            "nonresonance: " + ("-" if self.resonance_distance is None else
                                " ".join(f"k={k + 1}:{d:.6e}" for k, d in enumerate(self.resonance_distance))),
            f"gamma0: {fmt(self.gamma0)}",
            f"gamma1: {fmt(self.gamma1)}",
        ]
        for name, val in self.checks.items():
            lines.append(f"check.{name}: {val}")
        for name, val in self.timings.items():
            lines.append(f"time.{name}: {val:.3f}s")
        if self.message:
            lines.append(f"message: {self.message}")
        lines.append(f"wall_clock: {self.wall_clock:.3f}s")
        lines.append(f"VERDICT: {self.verdict}")
        return "\n".join(lines) + "\n"


# -- interval Newton ----------------------------------------------------------------


def interval_newton(g, dg, x0, box):
    """One interval Newton step N = x0 - [Dg(box)]^{-1} g(x0).

    Parameters
    ----------
    g : callable
        Interval vector -> enclosure of g.
    dg : callable
        Interval box -> enclosure of Dg over the box (square matrix).
    x0 : array_like
        Point in the box.
    box : Interval

    Returns
    -------
    NewtonResult
        ``certified`` is True iff N lies in the interior of ``box``; then g
        has a unique zero in ``box`` and it lies in N.

    Raises
    ------
    StageFailure
        When the derivative enclosure is singular.
    """
    box = as_interval(box)
    x0 = as_interval(np.asarray(x0, float))
    gx = as_interval(g(x0))
    D = as_interval(dg(box))
    scalar = box.ndim == 0
    if scalar:
        D, gx, x0v, boxv = D.reshape(1, 1), gx.reshape(1), x0.reshape(1), box.reshape(1)
    else:
        x0v, boxv = x0, box
    try:
        step = solve(D, gx)
    except IntervalError as exc:
        raise StageFailure("interval-newton", f"singular derivative enclosure ({exc})") from exc
    N = x0v - step
    ok = bool(N.interior_subset(boxv))
    if scalar:
        N = N[0]
    return NewtonResult(N=N, box=box, certified=ok)


# -- systems ---------------------------------------------------------------------------


def pendulum_field(omega, forcing="single"):
    """theta'' = -sin theta + sin(omega t) [+ sin(2 omega t)] as a 3D autonomous system."""
    force = "sin(omega*t)" if forcing == "single" else "sin(omega*t) + sin(2*omega*t)"
    if forcing not in ("single", "double"):
        raise ValueError(f"unknown forcing {forcing!r}")
    return VectorField.parse(["v", f"-sin(theta) + {force}", "1"],
                             params={"omega": as_interval(omega)}, names=["theta", "v", "t"])


def michelson_field(c):
    """Michelson system x' = y, y' = z, z' = c^2 - y - x^2/2."""
    return VectorField.parse(["y", "z", "c*c - y - 0.5*x*x"],
                             params={"c": as_interval(c)}, names=["x", "y", "z"])


def _box(center, radius):
    c = np.asarray(center, float)
    return Interval(c - radius, c + radius)


def _embed(x2, coords, n, fill):
    """Place a planar interval vector into an n-vector with constant fill."""
    lo = np.array(fill, float)
    hi = np.array(fill, float)
    x2 = as_interval(x2)
    for k, i in enumerate(coords):
        lo[i], hi[i] = x2.lo[k], x2.hi[k]
    return Interval(lo, hi)


@dataclass
class MapProblem:
    """A planar return map g: R^2 -> R^2 built from an ODE.

    ``kind`` is "time" (time-T map, T = period) or "section" (Poincare map
    to ``section``, applied ``iterates`` times).  ``coords`` are the phase
    space coordinates of the plane and ``fill`` the full initial vector
    (entries outside ``coords`` are kept fixed).
    """

    vf: VectorField
    coords: tuple
    fill: tuple
    kind: str = "time"
    period: Interval = None
    section: AffineSection = None
    iterates: int = 1
    h: float = 0.1
    config: StepConfig = field(default_factory=StepConfig)
    t_max: float = 100.0

    def run(self, x2, r):
        """Return (image2, jet) with jet = (table, dP) for the full map."""
        n = self.vf.n
        X = _embed(x2, self.coords, n, self.fill)
        if self.kind == "time":
            res = time_map(self.vf, X, self.period, r, self.h, self.config)
            return self._restrict(res.image), (res.table, res.dP), [res]
        results = []
        dP = None
        for _ in range(self.iterates):
            res = poincare_map(self.vf, X, self.section, r, self.h, self.config, self.t_max)
            results.append(res)
            dP = res.dP if dP is None else compose_derivatives(res.dP, dP, n, r)
            X = res.image
        return self._restrict(X), (results[-1].table, dP), results

    def _restrict(self, x):
        return Interval(np.array([x.lo[i] for i in self.coords]), np.array([x.hi[i] for i in self.coords]))

    def jacobian(self, x2, r=1):
        _, (table, dP), res = self.run(x2, r)
        J = dP[[table.index[(j + 1,)] for j in range(self.vf.n)]].T
        c = list(self.coords)
        return J[c][:, c], res

    def float_newton(self, x0, iters=8, tol=1e-13):
        """Nonrigorous Newton for g(x) = x using midpoints of point runs."""
        x = np.asarray(x0, float)
        for _ in range(iters):
            img, (table, dP), _ = self.run(Interval(x), 1)
            J = dP[[table.index[(j + 1,)] for j in range(self.vf.n)]].T.mid()
            c = list(self.coords)
            A = J[np.ix_(c, c)] - np.eye(2)
            dx = np.linalg.solve(A, img.mid() - x)
            x = x - dx
            if np.max(np.abs(dx)) < tol:
                break
        return x


def _normal_form_stage(report, jet, normalization):
    try:
        nf = normal_form(jet, normalization)
    except NormalFormError as exc:
        msg = str(exc)
        stage = "elliptic" if "eigen" in msg or "discriminant" in msg or "orient" in msg else (
            "nonresonance" if "resonance" in msg else "normal-form")
        raise StageFailure(stage, msg) from exc
    report.eigenvalue = nf.lam
    report.resonance_distance = nf.resonance_distance
    report.gamma0 = nf.gamma0
    report.gamma1 = nf.gamma1
    report.checks["reality_condition"] = "ok"
    report.checks["im_gamma1_contains_0"] = "ok"
    if not nf.twist:
        raise StageFailure("twist", "gamma_1 enclosure contains 0")
    return nf


def _run_pipeline(report, body):
    t0 = time.perf_counter()
    try:
        body()
        report.verdict = "certified"
    except StageFailure as exc:
        report.verdict = f"failed:{exc.stage}"
        report.message = str(exc)
    except (IntegrationFailure, PoincareFailure) as exc:
        report.verdict = "failed:integration"
        report.message = str(exc)
    report.wall_clock = time.perf_counter() - t0
    return report


def _timed(report, name, fn, *args):
    t = time.perf_counter()
    out = fn(*args)
    report.timings[name] = report.timings.get(name, 0.0) + time.perf_counter() - t
    return out


def certify_fixed_point_map(report, problem, guess, box_radius, r=3, normalization="first",
                            center=None, stages="all"):
    """Interval Newton fixed point of a planar map, then its normal form.

    ``stages="fixed-point"`` stops after the interval Newton certificate.
    """

    def body():
        x0 = center if center is not None else _timed(report, "newton_search", problem.float_newton, guess)
        x0 = np.asarray(x0, float)
        box = _box(x0, box_radius)
        report.box = box

        def g(x):
            img, _, _ = problem.run(x, 0)
            return img - x

        def dg(b):
            J, _ = problem.jacobian(b, 1)
            return J - Interval.eye(2)

        try:
            nr = _timed(report, "interval_newton", interval_newton, g, dg, x0, box)
        except (IntegrationFailure, PoincareFailure) as exc:
            raise StageFailure("interval-newton", str(exc)) from exc
        if not nr.certified:
            raise StageFailure("interval-newton", "N not inside the box")
        report.fixed_point = nr.N
        if stages == "fixed-point":
            return
        _, (table, dP), res = _timed(report, "jet", problem.run, nr.N, r)
        J = dP[[table.index[(j + 1,)] for j in range(problem.vf.n)]].T
        report.checks["det_full_contains_1"] = _det_contains_one(J)
        jet = PlanarJet3.from_derivatives(table, dP, problem.coords)
        _timed(report, "normal_form", _normal_form_stage, report, jet, normalization)

    return _run_pipeline(report, body)


def _det_contains_one(J):
    J = as_interval(J)
    n = J.shape[0]
    if n == 2:
        d = J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0]
    else:
        d = (J[0, 0] * (J[1, 1] * J[2, 2] - J[1, 2] * J[2, 1])
             - J[0, 1] * (J[1, 0] * J[2, 2] - J[1, 2] * J[2, 0])
             + J[0, 2] * (J[1, 0] * J[2, 1] - J[1, 1] * J[2, 0]))
    return bool(d.contains(1.0))


# -- pendulum ---------------------------------------------------------------------------


def pendulum_guess(omega, forcing="single"):
    """Linear-response initial guess (0, v0) for the forced pendulum."""
    w = float(as_interval(omega).mid())
    v = w / (1 - w * w)
    if forcing == "double":
        v += 2 * w / (1 - 4 * w * w)
    return np.array([0.0, v])


def pendulum_problem(omega, forcing="single", steps=20, order=16, h=None, norm="inf", orders=None):
    omega = as_interval(omega)
    T = 2.0 * pi() / omega
    vf = pendulum_field(omega, forcing)
    hh = h if h is not None else float(T.mid()) / steps
    cfg = StepConfig(order=order, orders=orders, norm=norm)
    return MapProblem(vf=vf, coords=(0, 1), fill=(0.0, 0.0, 0.0), kind="time", period=T, h=hh, config=cfg)


def certify_pendulum(omega, forcing="single", box_radius=1e-4, order=16, steps=20, h=None,
                     norm="inf", normalization="first", center=None, guess=None, stages=None,
                     orders=None):
    """Certify an elliptic fixed point of the period map of the forced pendulum.

    Parameters
    ----------
    omega : Interval or float
        Forcing frequency (interval of parameters).
    forcing : {"single", "double"}
    box_radius : float
        Radius of the interval Newton box.
    center : array_like, optional
        Box centre; found by nonrigorous Newton when omitted.
    stages : {"all", "fixed-point"}, optional
        Defaults to "all" for single and "fixed-point" for double forcing,
        whose twist coefficient changes sign inside typical parameter
        intervals.

    Returns
    -------
    CertificationReport
    """
    omega = as_interval(omega)
    rep = CertificationReport(system=f"pendulum-{forcing}", param=omega, method="interval-newton")
    prob = pendulum_problem(omega, forcing, steps, order, h, norm, orders)
    mid_prob = pendulum_problem(float(omega.mid()), forcing, steps, order, h, norm, orders)
    x0 = None
    if center is None:
        g0 = pendulum_guess(omega, forcing) if guess is None else np.asarray(guess, float)
        t = time.perf_counter()
        x0 = mid_prob.float_newton(g0)
        rep.timings["newton_search"] = time.perf_counter() - t
    else:
        x0 = np.asarray(center, float)
    if stages is None:
        stages = "all" if forcing == "single" else "fixed-point"
    return certify_fixed_point_map(rep, prob, None, box_radius, 3, normalization, center=x0,
                                   stages=stages)


# -- Michelson ----------------------------------------------------------------------------


MICHELSON_GUESS = 0.386


def michelson_problem(c, iterates=1, order=16, h=0.1, norm="inf", orders=None):
    vf = michelson_field(c)
    sec = AffineSection.coordinate(3, 0, 0.0, direction=0)
    cfg = StepConfig(order=order, orders=orders, norm=norm)
    return MapProblem(vf=vf, coords=(1, 2), fill=(0.0, 0.0, 0.0), kind="section", section=sec,
                      iterates=iterates, h=h, config=cfg)


def symmetric_shooting(problem, y, eps):
    """Certify a sign change of z along the segment {z = 0} under the half map.

    Checks z(P(y - eps, 0)) and z(P(y + eps, 0)) have opposite certified
    signs and that P is defined on the whole segment N.

    Returns
    -------
    (N, image, result)
        N is the segment as an Interval (y, z), ``image`` encloses P(N).

    Raises
    ------
    StageFailure
        When a sign cannot be certified or both signs agree.
    """
    signs = []
    for yy in (y - eps, y + eps):
        img, _, _ = problem.run(Interval([yy, 0.0]), 0)
        z = img[1]
        if float(z.lo) > 0:
            signs.append(1)
        elif float(z.hi) < 0:
            signs.append(-1)
        else:
            raise StageFailure("symmetric-shooting", "sign of z at a segment end not certified")
    if signs[0] == signs[1]:
        raise StageFailure("symmetric-shooting", "no sign change on the segment")
    N = Interval([y - eps, 0.0], [y + eps, 0.0])
    img, jet, res = problem.run(N, 0)
    return N, img, res


def michelson_float_shooting(problem, y0, iters=30, tol=1e-14):
    """Nonrigorous secant solve of z(P(y, 0)) = 0."""

    def zf(y):
        img, _, _ = problem.run(Interval([y, 0.0]), 0)
        return float(img[1].mid())

    a, b = y0, y0 + 1e-4
    fa, fb = zf(a), zf(b)
    for _ in range(iters):
        if fb == fa:
            break
        a, b, fa = b, b - fb * (b - a) / (fb - fa), fb
        fb = zf(b)
        if abs(b - a) < tol:
            break
    return b


def certify_michelson(c, box_radius=1e-4, order=16, h=0.1, norm="inf", normalization="first",
                      guess=None, center=None, jet_radius=1e-8, orders=None):
    """Certify a symmetric elliptic periodic orbit of the Michelson system.

    The half map P (first return to {x = 0}) is reversible with respect to
    R(y, z) = (y, -z); a sign change of z(P) on Fix(R) gives a fixed point
    of P^2.  Its third-order jet is the composition of two half-map jets.

    Parameters
    ----------
    box_radius : float
        Half length of the shooting segment.
    jet_radius : float
        The sign change is certified again on this shorter segment around
        the same centre; the jet is computed over it.  Jet widths grow
        quickly with the segment length.
    """
    c = as_interval(c)
    rep = CertificationReport(system="michelson", param=c, method="symmetric-shooting")
    half = michelson_problem(c, 1, order, h, norm, orders)

    def body():
        if center is None:
            mid_half = michelson_problem(float(c.mid()), 1, order, h, norm, orders)
            y = _timed(rep, "newton_search", michelson_float_shooting, mid_half,
                       MICHELSON_GUESS if guess is None else guess)
        else:
            y = float(center)
        try:
            N, img, _ = _timed(rep, "shooting", symmetric_shooting, half, y, box_radius)
        except (IntegrationFailure, PoincareFailure) as exc:
            raise StageFailure("symmetric-shooting", str(exc)) from exc
        rep.box = N
        if jet_radius and jet_radius < box_radius:
            try:
                N, _, _ = _timed(rep, "shooting", symmetric_shooting, half, y, jet_radius)
            except (IntegrationFailure, PoincareFailure) as exc:
                raise StageFailure("symmetric-shooting", str(exc)) from exc
        rep.fixed_point = N
        n = 3
        X = _embed(N, (1, 2), n, (0.0, 0.0, 0.0))
        first = _timed(rep, "jet", poincare_map, half.vf, X, half.section, 3, h, half.config, half.t_max)
        second = _timed(rep, "jet", poincare_map, half.vf, first.image, half.section, 3, h,
                        half.config, half.t_max)
        dP2 = compose_derivatives(second.dP, first.dP, n, 3)
        table = first.table
        J2 = dP2[[table.index[(j + 1,)] for j in range(n)]].T
        Jyz = J2[[1, 2]][:, [1, 2]]
        rep.checks["det_DP2_contains_1"] = _det_contains_one(Jyz)
        rep.checks["reversibility"] = _reversibility_check(half, y)
        Jflow = first.dphi[[table.index[(j + 1,)] for j in range(n)]].T
        rep.checks["det_flow_contains_1"] = _det_contains_one(Jflow)
        rep.checks["section_gradient_contains_0"] = bool(
            all(first.dP[m][0].contains(0.0) for m in range(len(table))))
        jet = PlanarJet3.from_derivatives(table, dP2, (1, 2))
        _timed(rep, "normal_form", _normal_form_stage, rep, jet, normalization)

    return _run_pipeline(rep, body)


def _reversibility_check(half, y, offsets=(-1e-3, 1e-3)):
    """R P R P u contains u for sample points u = (y, dz) near Fix(R)."""
    for dz in offsets:
        u = Interval([y, dz])
        img, _, _ = half.run(u, 0)
        img = Interval(np.array([img.lo[0], -img.hi[1]]), np.array([img.hi[0], -img.lo[1]]))
        back, _, _ = half.run(img, 0)
        back = Interval(np.array([back.lo[0], -back.hi[1]]), np.array([back.hi[0], -back.lo[1]]))
        if not bool(np.all(back.lo <= u.lo) and np.all(u.hi <= back.hi)):
            return False
    return True


def certify_custom(config):
    """Certify a fixed point of a user-defined planar return map.

    ``config`` keys: ``equations`` (list of str), ``variables``,
    ``params`` (name -> [lo, hi]), ``coords`` (two variable names),
    ``fill`` (full initial vector), ``map`` ("time" with ``period``, or
    "section" with ``section_variable``, ``section_value``, ``direction``,
    ``iterates``), ``guess``, ``box_radius``, ``order``, ``step``,
    ``normalization``.
    """
    names = list(config["variables"])
    params = {k: Interval(float(v[0]), float(v[1])) if isinstance(v, (list, tuple)) else as_interval(float(v))
              for k, v in config.get("params", {}).items()}
    vf = VectorField.parse(list(config["equations"]), params=params, names=names)
    coords = tuple(names.index(v) for v in config["coords"])
    fill = tuple(float(x) for x in config.get("fill", [0.0] * len(names)))
    orders = config.get("taylor_orders")
    cfg = StepConfig(order=int(config.get("order", 16)), norm=str(config.get("norm", "inf")),
                     orders=[int(o) for o in orders] if orders else None)
    h = float(config.get("step", 0.1))
    if config.get("map", "time") == "time":
        per = config["period"]
        if isinstance(per, str):
            T = _eval_period(per, params)
        else:
            T = Interval(float(per[0]), float(per[1])) if isinstance(per, (list, tuple)) else as_interval(float(per))
        prob = MapProblem(vf=vf, coords=coords, fill=fill, kind="time", period=T, h=h, config=cfg)
    else:
        sec = AffineSection.coordinate(len(names), names.index(config["section_variable"]),
                                       float(config.get("section_value", 0.0)),
                                       int(config.get("direction", 0)))
        prob = MapProblem(vf=vf, coords=coords, fill=fill, kind="section", section=sec,
                          iterates=int(config.get("iterates", 1)), h=h, config=cfg)
    pname = next(iter(params), None)
    rep = CertificationReport(system=str(config.get("name", "custom")),
                              param=params[pname] if pname else Interval(0.0), method="interval-newton")
    mid_params = {k: float(v.mid()) for k, v in params.items()}
    mid_prob = MapProblem(**{**prob.__dict__, "vf": vf.with_params(**mid_params)})
    if prob.kind == "time" and isinstance(config["period"], str):
        mid_prob.period = _eval_period(config["period"], {k: as_interval(v) for k, v in mid_params.items()})
    t = time.perf_counter()
    x0 = mid_prob.float_newton(np.asarray(config["guess"], float))
    rep.timings["newton_search"] = time.perf_counter() - t
    return certify_fixed_point_map(rep, prob, None, float(config.get("box_radius", 1e-4)), 3,
                                   str(config.get("normalization", "first")), center=x0)


def _eval_period(text, params):
    """Evaluate a period expression such as "2*pi/omega" in interval arithmetic."""
    import ast
    import operator

    ops = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul, ast.Div: operator.truediv}

    def ev(node):
        if isinstance(node, ast.BinOp) and type(node.op) in ops:
            return ops[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.USub):
            return -ev(node.operand)
        if isinstance(node, ast.Constant):
            from .interval import from_decimal
            return from_decimal(ast.get_source_segment(text, node))
        if isinstance(node, ast.Name):
            if node.id == "pi":
                return pi()
            return as_interval(params[node.id])
        raise ValueError(f"unsupported period expression {text!r}")

    return ev(ast.parse(text, mode="eval").body)
