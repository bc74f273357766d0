"""Command line interface.

Subcommands: ``integrate``, ``poincare``, ``normalform`` and
``certify {pendulum,michelson,custom}``.  A ``--config`` file in INI
syntax supplies defaults: keys of the ``[run]`` section mirror the long
flags (``box-radius = 1e-4``), the ``[system]`` section defines a custom
vector field.  Exit code is 0 iff every run is certified (or, for the
non-certifying subcommands, succeeded).
"""

import argparse
import configparser
import json
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from .interval import Interval, as_interval, from_decimal
from .lohner import CnSet, IntegrationFailure, StepConfig, dump_trajectory, integrate
from .normalform import NormalFormError, PlanarJet3, normal_form, twist_map_jet
from .poincare import AffineSection, PoincareFailure, poincare_map

BUILTIN = ("pendulum", "pendulum-double", "michelson")


# -- argument helpers -------------------------------------------------------------------


def decimal_interval(lo, hi=None):
    """Interval enclosing the decimals ``lo`` and ``hi`` (strings)."""
    a = from_decimal(str(lo))
    b = from_decimal(str(hi if hi is not None else lo))
    if float(a.lo) > float(b.hi):
        raise argparse.ArgumentTypeError(f"empty parameter interval [{lo}, {hi}]")
    return Interval(float(a.lo), float(b.hi))


def split_interval(x, k):
    """k consecutive subintervals covering x."""
    if k <= 1:
        return [x]
    edges = np.linspace(float(x.lo), float(x.hi), k + 1)
    edges[0], edges[-1] = float(x.lo), float(x.hi)
    return [Interval(edges[i], edges[i + 1]) for i in range(k)]


def taylor_orders(text):
    """Parse ``o1[,o2,...]``: base order, then orders of variations of order 1, 2, ..."""
    vals = [int(v) for v in str(text).replace(" ", "").split(",") if v]
    if not vals:
        raise argparse.ArgumentTypeError("empty --taylor-order")
    return vals


def _floats(text):
    return [float(v) for v in str(text).split()]


def load_config(path):
    cp = configparser.ConfigParser(interpolation=None)
    with open(path) as fh:
        cp.read_file(fh)
    return cp


def system_from_config(cp):
    """Dict describing a vector field and return map from a ``[system]`` section."""
    if not cp.has_section("system"):
        raise SystemExit("config has no [system] section")
    s = cp["system"]
    out = {
        "name": s.get("name", "custom"),
        "variables": s["variables"].split(),
        "equations": [ln.strip() for ln in s["equations"].strip().splitlines() if ln.strip()],
    }
    params = {}
    for item in s.get("params", "").split(";"):
        item = item.strip()
        if not item:
            continue
        name, vals = item.split("=", 1)
        v = vals.split()
        params[name.strip()] = [v[0], v[-1]]
    out["params"] = params
    for key in ("map", "period", "section_variable", "section_value", "direction", "iterates",
                "normalization"):
        if key in s:
            out[key] = s[key]
    if "coords" in s:
        out["coords"] = s["coords"].split()
    if "fill" in s:
        out["fill"] = _floats(s["fill"])
    if "guess" in s:
        out["guess"] = _floats(s["guess"])
    return out


def _params_to_intervals(params):
    return {k: decimal_interval(v[0], v[1]) for k, v in params.items()}


def build_field(args, cp):
    """VectorField from --system (with --param) or the config's [system] section."""
    from .certify import michelson_field, pendulum_field
    from .vectorfield import VectorField

    if args.system in ("pendulum", "pendulum-double"):
        w = args.param if args.param is not None else decimal_interval("6")
        return pendulum_field(w, "single" if args.system == "pendulum" else "double")
    if args.system == "michelson":
        c = args.param if args.param is not None else decimal_interval("0.2")
        return michelson_field(c)
    if cp is None:
        raise SystemExit("--system or a config with a [system] section is required")
    sd = system_from_config(cp)
    return VectorField.parse(sd["equations"], params=_params_to_intervals(sd["params"]),
                             names=sd["variables"])


def step_config(args):
    o = args.taylor_order or [20]
    return StepConfig(order=o[0], orders=o[1:] or None, norm=args.norm)


def _box(args, n):
    if args.x0 is None or len(args.x0) != n:
        raise SystemExit(f"--x0 needs {n} values")
    c = np.array([float(from_decimal(v).mid()) for v in args.x0])
    return Interval(c - args.box_radius, c + args.box_radius)


def _fmt_vec(x):
    x = as_interval(x)
    return " x ".join(x[i].to_decimal() for i in range(x.shape[0]))


# -- subcommands ---------------------------------------------------------------------------


def cmd_integrate(args, cp):
    vf = build_field(args, cp)
    X = _box(args, vf.n)
    r = args.order if args.order is not None else 1
    S = CnSet.from_box(X, r)
    records = [S.record()]
    T = decimal_interval(args.time)
    try:
        S = integrate(vf, S, T, args.step or 0.1, step_config(args), on_step=lambda s: records.append(s.record()))
    except IntegrationFailure as exc:
        print(f"integration failed: {exc}")
        print("VERDICT: failed:integration")
        return 1
    if args.dump:
        with open(args.dump, "w") as fh:
            dump_trajectory(records, fh)
    lines = [f"time: {S.t.to_decimal()}", f"hull: {_fmt_vec(S.hull())}"]
    for p, w in enumerate(S.widths(), start=1):
        lines.append(f"derivative_width.order{p}: {w:.6e}")
    if r >= 1:
        J = S.jacobian()
        lines.append("jacobian: " + "; ".join(_fmt_vec(J[i]) for i in range(vf.n)))
    lines.append("VERDICT: certified")
    _emit("\n".join(lines) + "\n", args.report)
    return 0


def cmd_poincare(args, cp):
    vf = build_field(args, cp)
    X = _box(args, vf.n)
    r = args.order if args.order is not None else 1
    names = vf.names
    var = args.section_var
    if var is None:
        var = names[0]
    sec = AffineSection.coordinate(vf.n, names.index(var), float(args.section_value), args.direction)
    try:
        res = poincare_map(vf, X, sec, r, args.step or 0.1, step_config(args), args.t_max)
    except (IntegrationFailure, PoincareFailure) as exc:
        print(f"poincare failed: {exc}")
        print("VERDICT: failed:poincare")
        return 1
    lines = [f"return_time: {res.t_bracket.to_decimal()}", f"image: {_fmt_vec(res.image)}"]
    for m, a in enumerate(res.table.items):
        lines.append(f"D{list(a)}P: {_fmt_vec(res.dP[m])}")
        lines.append(f"D{list(a)}tP: {res.dtP[m].to_decimal()}")
    lines.append("VERDICT: certified")
    _emit("\n".join(lines) + "\n", args.report)
    return 0


def read_jet(path):
    """Planar jet from JSON: {"i,j": [[lo, hi], [lo, hi]] or [g1, g2]} Taylor coefficients."""
    with open(path) as fh:
        data = json.load(fh)
    coef = {}
    for key, val in data.items():
        i, j = (int(v) for v in key.split(","))
        lo, hi = [], []
        for comp in val:
            if isinstance(comp, (list, tuple)):
                lo.append(float(from_decimal(str(comp[0])).lo))
                hi.append(float(from_decimal(str(comp[1])).hi))
            else:
                e = from_decimal(str(comp))
                lo.append(float(e.lo))
                hi.append(float(e.hi))
        coef[(i, j)] = Interval(lo, hi)
    zero = Interval([0.0, 0.0])
    for k in range(1, 4):
        for i in range(k + 1):
            coef.setdefault((i, k - i), zero)
    return PlanarJet3(coef)


def cmd_normalform(args, cp):
    if args.twist is not None:
        jet = twist_map_jet(decimal_interval(args.twist[0]), decimal_interval(args.twist[1]))
    elif args.jet:
        jet = read_jet(args.jet)
    else:
        raise SystemExit("normalform needs --twist G0 G1 or --jet FILE")
    try:
        nf = normal_form(jet, args.normalization)
    except NormalFormError as exc:
        _emit(f"message: {exc}\nVERDICT: failed:normal-form\n", args.report)
        return 1
    lines = [
        f"eigenvalue: {nf.lam.to_decimal()}",
        "nonresonance: " + " ".join(f"k={k + 1}:{d:.6e}" for k, d in enumerate(nf.resonance_distance)),
        f"gamma0: {nf.gamma0.to_decimal()}",
        f"gamma1: {nf.gamma1.to_decimal()}",
        f"normalization: {nf.normalization}",
        "VERDICT: " + ("certified" if nf.certified else "failed:twist"),
    ]
    _emit("\n".join(lines) + "\n", args.report)
    return 0 if nf.certified else 1


def _certify_one(job):
    """Run one certification (top level so worker processes can pickle it)."""
    from .certify import certify_custom, certify_michelson, certify_pendulum

    kind, param, opts = job
    if kind == "pendulum":
        return certify_pendulum(param, **opts)
    if kind == "michelson":
        return certify_michelson(param, **opts)
    cfg = dict(opts["system"])
    if param is not None and cfg["params"]:
        name = next(iter(cfg["params"]))
        cfg["params"] = dict(cfg["params"])
        cfg["params"][name] = [float(param.lo), float(param.hi)]
    cfg["params"] = {k: v if isinstance(v, list) and isinstance(v[0], float) else
                     [float(decimal_interval(v[0], v[1]).lo), float(decimal_interval(v[0], v[1]).hi)]
                     for k, v in cfg["params"].items()}
    for key in ("box_radius", "order", "step", "norm", "taylor_orders"):
        if opts.get(key) is not None:
            cfg[key] = opts[key]
    return certify_custom(cfg)


def cmd_certify(args, cp):
    if args.order is not None and args.order != 3:
        raise SystemExit("certification needs third-order jets (--order 3)")
    o = args.taylor_order
    opts = {"norm": args.norm}
    if o:
        opts["order"] = o[0]
        if len(o) > 1:
            opts["orders"] = o[1:]
    if args.target == "pendulum":
        param = args.param if args.param is not None else decimal_interval("6")
        opts.update(forcing=args.forcing, box_radius=args.box_radius if args.box_radius is not None else 1e-4)
        if args.step:
            opts["h"] = args.step
        if args.normalization:
            opts["normalization"] = args.normalization
        if args.stages:
            opts["stages"] = args.stages
    elif args.target == "michelson":
        param = args.param if args.param is not None else decimal_interval("0.2")
        opts.update(box_radius=args.box_radius if args.box_radius is not None else 1e-4)
        if args.step:
            opts["h"] = args.step
        if args.normalization:
            opts["normalization"] = args.normalization
    else:
        if cp is None:
            raise SystemExit("certify custom needs --config with a [system] section")
        sd = system_from_config(cp)
        param = args.param
        opts = {"system": sd, "box_radius": args.box_radius, "step": args.step,
                "norm": args.norm, "order": o[0] if o else None,
                "taylor_orders": o[1:] if o and len(o) > 1 else None}
    params = split_interval(param, args.split) if param is not None else [None]
    jobs = [(args.target, p, opts) for p in params]
    if args.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            reports = list(pool.map(_certify_one, jobs))
    else:
        reports = [_certify_one(j) for j in jobs]
    text = "\n".join(r.to_text() for r in reports)
    if len(reports) > 1:
        ok = all(r.certified for r in reports)
        failed = [r.verdict for r in reports if not r.certified]
        text += f"\nVERDICT: {'certified' if ok else failed[0]}\n"
    _emit(text, args.report)
    return 0 if all(r.certified for r in reports) else 1


def _emit(text, path):
    sys.stdout.write(text)
    if path:
        with open(path, "w") as fh:
            fh.write(text)


# -- parser ----------------------------------------------------------------------------------


def _common(p):
    p.add_argument("--config", help="INI file; [run] keys mirror the long flags")
    p.add_argument("--param", nargs=2, metavar=("LO", "HI"), help="parameter interval")
    p.add_argument("--order", type=int, help="derivative order r")
    p.add_argument("--taylor-order", type=taylor_orders, metavar="O1[,O2,...]",
                   help="base Taylor order, then orders for variations of order 1, 2, ...")
    p.add_argument("--step", type=float, help="nominal time step")
    p.add_argument("--box-radius", type=float, help="radius of the initial box")
    p.add_argument("--norm", choices=["1", "2", "inf"], default="inf", help="norm for rough enclosures")
    p.add_argument("--report", help="write the report to this path")
    p.add_argument("--workers", type=int, default=1, help="parallel workers over parameter pieces")
    p.add_argument("--split", type=int, default=1, help="split the parameter interval into pieces")


def _system_args(p):
    p.add_argument("--system", choices=BUILTIN, help="built-in system (else [system] in --config)")
    p.add_argument("--x0", nargs="+", help="centre of the initial box")
    p.add_argument("--dump", help="line-delimited JSON trajectory dump")


def build_parser():
    ap = argparse.ArgumentParser(prog="crlohner", description="Rigorous C^r integration and KAM certificates.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("integrate", help="enclose phi(T, X) and its derivatives")
    _common(p)
    _system_args(p)
    p.add_argument("--time", default="1", help="final time T")
    p.set_defaults(func=cmd_integrate)

    p = sub.add_parser("poincare", help="enclose a Poincare map and its derivatives")
    _common(p)
    _system_args(p)
    p.add_argument("--section-var", help="variable defining the section {var = value}")
    p.add_argument("--section-value", default="0")
    p.add_argument("--direction", type=int, default=0, choices=[-1, 0, 1])
    p.add_argument("--t-max", type=float, default=100.0)
    p.set_defaults(func=cmd_poincare)

    p = sub.add_parser("normalform", help="twist coefficient of a planar third-order jet")
    _common(p)
    p.add_argument("--twist", nargs=2, metavar=("G0", "G1"), help="synthetic twist map z e^{i(g0 + g1|z|^2)}")
    p.add_argument("--jet", help="JSON file of Taylor coefficients")
    p.add_argument("--normalization", choices=["first", "symplectic"], default="first")
    p.set_defaults(func=cmd_normalform)

    p = sub.add_parser("certify", help="certify an elliptic periodic orbit and its twist")
    _common(p)
    p.add_argument("target", choices=["pendulum", "michelson", "custom"])
    p.add_argument("--forcing", choices=["single", "double"], default="single")
    p.add_argument("--stages", choices=["all", "fixed-point"])
    p.add_argument("--normalization", choices=["first", "symplectic"])
    p.set_defaults(func=cmd_certify)
    return ap


_CONVERT = {"order": int, "step": float, "box-radius": float, "workers": int, "split": int,
            "taylor-order": taylor_orders, "direction": int, "t-max": float}


def _apply_config(args, cp, argv):
    """Fill options not given on the command line from the [run] section."""
    if cp is None or not cp.has_section("run"):
        return
    given = {a.split("=")[0] for a in argv if a.startswith("--")}
    for key, raw in cp["run"].items():
        flag = "--" + key
        if flag in given:
            continue
        dest = key.replace("-", "_")
        if not hasattr(args, dest):
            raise SystemExit(f"unknown config key {key!r}")
        if key in ("param", "x0"):
            val = raw.split()
        elif key in _CONVERT:
            val = _CONVERT[key](raw)
        else:
            val = raw
        setattr(args, dest, val)


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    cp = load_config(args.config) if args.config else None
    _apply_config(args, cp, argv)
    if args.param is not None and not isinstance(args.param, Interval):
        args.param = decimal_interval(*args.param)
    if getattr(args, "box_radius", None) is None and args.command in ("integrate", "poincare"):
        args.box_radius = 0.0
    return args.func(args, cp)


if __name__ == "__main__":
    sys.exit(main())
