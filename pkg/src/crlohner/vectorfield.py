"""Vector fields as expression graphs with symbolic partials and Taylor jets.

Expressions live in a hash-consed DAG (:class:`Graph`), so common
subexpressions are shared automatically.  Partial derivatives are built
symbolically node by node with constant folding and 0/1 elimination only.
A :class:`Tape` is the topologically sorted subgraph needed for a set of
outputs; its Taylor coefficients in time are produced by the AD recurrences
in :mod:`crlohner.kernels`.

Constants are kept as exact fractions and enclosed only when a tape is
bound, so ``0.1`` in an expression means the real number 1/10.
"""

import ast
from fractions import Fraction

import numpy as np

from . import kernels
from .combinatorics import MultipointerTable, lam_inverse
from .interval import Interval, as_interval, from_fraction

OPS = kernels.OPS
_COMMUTATIVE = {"add", "mul"}


class Graph:
    """Hash-consed expression DAG.

    Nodes are tuples ``(op, a, b, payload)``; ``a`` and ``b`` are child node
    ids (or -1), ``payload`` is the variable index, parameter name or exact
    constant.  Children always have smaller ids than parents.
    """

    def __init__(self):
        self.nodes = []
        self._ids = {}
        self._dcache = {}

    def _make(self, op, a=-1, b=-1, payload=None):
        if op in _COMMUTATIVE and b < a:
            a, b = b, a
        key = (op, a, b, payload)
        i = self._ids.get(key)
        if i is None:
            i = len(self.nodes)
            self.nodes.append(key)
            self._ids[key] = i
        return i

    # -- leaves --------------------------------------------------------------------

    def var(self, i):
        return self._make("var", payload=int(i))

    def param(self, name):
        return self._make("param", payload=str(name))

    def const(self, value):
        return self._make("const", payload=Fraction(value))

    def const_value(self, i):
        op, _, _, p = self.nodes[i]
        return p if op == "const" else None

    def is_zero(self, i):
        return self.const_value(i) == 0

    def is_one(self, i):
        return self.const_value(i) == 1

    # -- arithmetic with folding ---------------------------------------------

    def add(self, a, b):
        ca, cb = self.const_value(a), self.const_value(b)
        if ca is not None and cb is not None:
            return self.const(ca + cb)
        if ca == 0:
            return b
        if cb == 0:
            return a
        return self._make("add", a, b)

    def sub(self, a, b):
        ca, cb = self.const_value(a), self.const_value(b)
        if ca is not None and cb is not None:
            return self.const(ca - cb)
        if cb == 0:
            return a
        if ca == 0:
            return self.neg(b)
        if a == b:
            return self.const(0)
        return self._make("sub", a, b)

    def neg(self, a):
        ca = self.const_value(a)
        if ca is not None:
            return self.const(-ca)
        op, x, _, _ = self.nodes[a]
        if op == "neg":
            return x
        return self._make("neg", a)

    def mul(self, a, b):
        ca, cb = self.const_value(a), self.const_value(b)
        if ca is not None and cb is not None:
            return self.const(ca * cb)
        if ca == 0 or cb == 0:
            return self.const(0)
        if ca == 1:
            return b
        if cb == 1:
            return a
        if ca == -1:
            return self.neg(b)
        if cb == -1:
            return self.neg(a)
        if a == b:
            return self._make("sqr", a)
        return self._make("mul", a, b)

    def div(self, a, b):
        ca, cb = self.const_value(a), self.const_value(b)
        if cb == 0:
            raise ZeroDivisionError("division by the constant 0")
        if ca is not None and cb is not None:
            return self.const(ca / cb)
        if ca == 0:
            return self.const(0)
        if cb == 1:
            return a
        return self._make("div", a, b)

    def sqr(self, a):
        ca = self.const_value(a)
        if ca is not None:
            return self.const(ca * ca)
        return self._make("sqr", a)

    def powi(self, a, k):
        k = int(k)
        if k < 0:
            return self.div(self.const(1), self.powi(a, -k))
        if k == 0:
            return self.const(1)
        if k == 1:
            return a
        half = self.powi(a, k // 2)
        sq = self.sqr(half)
        return self.mul(sq, a) if k % 2 else sq

    def sin(self, a):
        if self.is_zero(a):
            return self.const(0)
        return self._make("sin", a)

    def cos(self, a):
        if self.is_zero(a):
            return self.const(1)
        return self._make("cos", a)

    def exp(self, a):
        if self.is_zero(a):
            return self.const(1)
        return self._make("exp", a)

    # -- symbolic differentiation ---------------------------------------------

    def diff(self, i, j):
        """Node id of d(node i)/d(x_j)."""
        key = (i, j)
        if key in self._dcache:
            return self._dcache[key]
        op, a, b, p = self.nodes[i]
        if op == "var":
            d = self.const(1 if p == j else 0)
        elif op in ("param", "const"):
            d = self.const(0)
        elif op == "add":
            d = self.add(self.diff(a, j), self.diff(b, j))
        elif op == "sub":
            d = self.sub(self.diff(a, j), self.diff(b, j))
        elif op == "neg":
            d = self.neg(self.diff(a, j))
        elif op == "mul":
            d = self.add(self.mul(self.diff(a, j), b), self.mul(a, self.diff(b, j)))
        elif op == "div":
            # (a/b)' = (a' - (a/b) b') / b
            d = self.div(self.sub(self.diff(a, j), self.mul(i, self.diff(b, j))), b)
        elif op == "sqr":
            d = self.mul(self.const(2), self.mul(a, self.diff(a, j)))
        elif op == "sin":
            d = self.mul(self.cos(a), self.diff(a, j))
        elif op == "cos":
            d = self.neg(self.mul(self.sin(a), self.diff(a, j)))
        elif op == "exp":
            d = self.mul(i, self.diff(a, j))
        else:  # pragma: no cover
            raise ValueError(f"unknown op {op}")
        self._dcache[key] = d
        return d

    def to_str(self, i, names=None):
        op, a, b, p = self.nodes[i]
        s = lambda k: self.to_str(k, names)  # noqa: E731
        if op == "var":
            return names[p] if names else f"x{p + 1}"
        if op == "param":
            return p
        if op == "const":
            return str(p)
        if op in ("add", "sub", "mul", "div"):
            sym = {"add": "+", "sub": "-", "mul": "*", "div": "/"}[op]
            return f"({s(a)} {sym} {s(b)})"
        if op == "neg":
            return f"(-{s(a)})"
        return f"{op}({s(a)})"


class Tape:
    """Topologically sorted subgraph compiled for the jet kernels."""

    def __init__(self, graph, outputs, n, params):
        self.graph = graph
        self.n = n
        need = set()
        stack = list(outputs)
        while stack:
            i = stack.pop()
            if i in need:
                continue
            need.add(i)
            op, a, b, _ = graph.nodes[i]
            if op in ("sin", "cos"):
                stack.append(graph.cos(a) if op == "sin" else graph.sin(a))
            for c in (a, b):
                if c >= 0:
                    stack.append(c)
        order = sorted(need)
        # the state variables are always present so the ODE feedback can run
        for v in range(n):
            vid = graph.var(v)
            if vid not in need:
                order.append(vid)
        order = sorted(set(order))
        pos = {g: k for k, g in enumerate(order)}
        N = len(order)
        self.op = np.zeros(N, np.int64)
        self.a1 = np.full(N, -1, np.int64)
        self.a2 = np.full(N, -1, np.int64)
        self.partner = np.full(N, -1, np.int64)
        self.var = np.full(N, -1, np.int64)
        self._const_src = []
        for k, g in enumerate(order):
            op, a, b, p = graph.nodes[g]
            if op == "param":
                self.op[k] = OPS["const"]
                self._const_src.append((k, "param", p))
            elif op == "const":
                self.op[k] = OPS["const"]
                self._const_src.append((k, "const", p))
            else:
                self.op[k] = OPS[op]
            if op == "var":
                self.var[k] = p
            if a >= 0:
                self.a1[k] = pos[a]
            if b >= 0:
                self.a2[k] = pos[b]
            if op == "sin":
                self.partner[k] = pos[graph.cos(a)]
            elif op == "cos":
                self.partner[k] = pos[graph.sin(a)]
        self.index = pos
        self.outputs = np.array([pos[o] for o in outputs], np.int64)
        self.size = N
        self.bind(params)

    def bind(self, params):
        """Set parameter values (dict name -> Interval) in the constant slots."""
        N = self.size
        self.clo = np.zeros(N)
        self.chi = np.zeros(N)
        for k, kind, p in self._const_src:
            if kind == "param":
                if p not in params:
                    raise KeyError(f"parameter {p!r} has no value")
                v = as_interval(params[p])
            else:
                v = from_fraction(p)
            self.clo[k] = float(v.lo)
            self.chi[k] = float(v.hi)

    def arrays(self, feedback):
        """Argument tuple for :func:`crlohner.kernels.tape_jet`."""
        return (self.op, self.a1, self.a2, self.clo, self.chi, self.partner, self.var,
                np.asarray(feedback, np.int64))

    def run(self, x, order, feedback=None):
        """Jets of all tape nodes.

        Parameters
        ----------
        x : Interval, shape (n,) or (n, order + 1)
            Initial value (ODE mode, ``feedback`` given) or full variable jets.
        feedback : sequence of tape positions of the f components, optional
            When given, variable jets are generated by x' = f(x).
        """
        x = as_interval(x)
        L = order + 1
        xlo = np.zeros((self.n, L))
        xhi = np.zeros((self.n, L))
        if x.ndim == 1:
            xlo[:, 0], xhi[:, 0] = x.lo, x.hi
        else:
            xlo[:, :], xhi[:, :] = x.lo[:, :L], x.hi[:, :L]
        ode = feedback is not None
        fb = np.zeros(0, np.int64) if feedback is None else feedback
        lo, hi = kernels.tape_jet(self.arrays(fb), xlo, xhi, order, ode)
        return Interval._raw(lo, hi)


class VectorField:
    """Right-hand side f of x' = f(x) over an expression graph.

    Parameters
    ----------
    graph : Graph
    components : list of int
        Node ids of f_1..f_n.
    params : dict, optional
        Parameter values, name -> Interval (or anything :func:`as_interval`
        accepts).
    names : list of str, optional
        Variable names, default ``x1..xn``.
    """

    def __init__(self, graph, components, params=None, names=None):
        self.graph = graph
        self.components = list(components)
        self.n = len(self.components)
        self.params = {k: as_interval(v) for k, v in (params or {}).items()}
        self.names = list(names) if names else [f"x{i + 1}" for i in range(self.n)]
        self._tapes = {}

    # -- construction -------------------------------------------------------------

    @classmethod
    def parse(cls, exprs, params=None, names=None):
        """Build a field from expression strings.

        The syntax is Python's: ``+ - * / **`` (integer exponents), unary
        minus, ``sin cos exp sqr`` calls, decimal literals, variable names and
        parameter names.

        >>> vf = VectorField.parse(["x2", "-x1"])
        >>> vf.n
        2
        """
        exprs = list(exprs)
        n = len(exprs)
        names = list(names) if names else [f"x{i + 1}" for i in range(n)]
        if len(names) != n:
            raise ValueError("one variable name per component is required")
        params = dict(params or {})
        g = Graph()
        parser = _Parser(g, {nm: i for i, nm in enumerate(names)}, set(params))
        comps = [parser.parse(e) for e in exprs]
        return cls(g, comps, params, names)

    def with_params(self, **values):
        """Same field, new parameter values (graph and tapes are shared)."""
        p = dict(self.params)
        for k, v in values.items():
            if k not in p:
                raise KeyError(f"unknown parameter {k!r}")
            p[k] = as_interval(v)
        out = VectorField(self.graph, self.components, p, self.names)
        out._tapes = self._tapes
        return out

    def __repr__(self):
        body = ", ".join(self.graph.to_str(c, self.names) for c in self.components)
        return f"VectorField([{body}])"

    # -- derivatives ------------------------------------------------------------------

    def partial(self, alpha):
        """Node ids of D^alpha f_i for i = 1..n (alpha a multiindex)."""
        alpha = tuple(alpha)
        if len(alpha) != self.n:
            raise ValueError("multiindex length must equal the dimension")
        if sum(alpha) == 0:
            return list(self.components)
        mp = lam_inverse(alpha)
        out = list(self.components)
        for j in mp:
            out = [self.graph.diff(c, j - 1) for c in out]
        return out

    def partial_mp(self, a):
        """Same as :meth:`partial` with a multipointer label."""
        out = list(self.components)
        for j in a:
            out = [self.graph.diff(c, j - 1) for c in out]
        return out

    def derivative_tape(self, r):
        """Tape with outputs f followed by D^b f for every multipointer b, |b| <= r.

        Returns ``(tape, table, dpos, nonzero)`` where ``dpos[m, i]`` is the
        tape position of component i of the m-th derivative in ``table`` and
        ``nonzero[m, i]`` is False for structurally zero derivatives.
        """
        key = ("deriv", r)
        if key not in self._tapes:
            table = MultipointerTable(self.n, r)
            ids = []
            for a in table.items:
                ids.extend(self.partial_mp(a))
            tape = Tape(self.graph, self.components + ids, self.n, self.params)
            nz = np.array([not self.graph.is_zero(i) for i in ids], bool).reshape(len(table), self.n)
            dpos = tape.outputs[self.n:].reshape(len(table), self.n)
            self._tapes[key] = (tape, table, dpos, nz)
        tape, table, dpos, nz = self._tapes[key]
        tape.bind(self.params)
        return tape, table, dpos, nz

    def base_tape(self):
        """Tape whose outputs are the components of f."""
        key = ("base",)
        if key not in self._tapes:
            self._tapes[key] = Tape(self.graph, self.components, self.n, self.params)
        t = self._tapes[key]
        t.bind(self.params)
        return t

    # -- evaluation -----------------------------------------------------------------

    def __call__(self, x):
        """Enclosure of f(x) over the box x."""
        t = self.base_tape()
        jets = t.run(x, 0)
        return jets[t.outputs, 0]

    def ode_jet(self, x, order):
        """Taylor coefficients (1/i!) d^i/dt^i phi(0, x), shape (n, order + 1)."""
        t = self.base_tape()
        jets = t.run(x, order, feedback=t.outputs)
        var_pos = [t.index[self.graph.var(i)] for i in range(self.n)]
        return jets[var_pos]


class _Parser:
    _FUNCS = {"sin", "cos", "exp", "sqr"}

    def __init__(self, graph, variables, params):
        self.g = graph
        self.variables = variables
        self.params = params

    def parse(self, text):
        self.src = text
        try:
            tree = ast.parse(text.strip(), mode="eval")
        except SyntaxError as e:
            raise ValueError(f"cannot parse expression {text!r}: {e.msg}") from None
        self.src = text.strip()
        return self._node(tree.body)

    def _node(self, node):
        g = self.g
        if isinstance(node, ast.BinOp):
            if isinstance(node.op, ast.Pow):
                k = self._int_exponent(node.right)
                return g.powi(self._node(node.left), k)
            a, b = self._node(node.left), self._node(node.right)
            ops = {ast.Add: g.add, ast.Sub: g.sub, ast.Mult: g.mul, ast.Div: g.div}
            for t, fn in ops.items():
                if isinstance(node.op, t):
                    return fn(a, b)
            raise ValueError(f"unsupported operator in {self.src!r}")
        if isinstance(node, ast.UnaryOp):
            if isinstance(node.op, ast.USub):
                return g.neg(self._node(node.operand))
            if isinstance(node.op, ast.UAdd):
                return self._node(node.operand)
            raise ValueError(f"unsupported unary operator in {self.src!r}")
        if isinstance(node, ast.Call):
            if not isinstance(node.func, ast.Name) or node.func.id not in self._FUNCS:
                raise ValueError(f"unsupported function in {self.src!r}")
            if len(node.args) != 1 or node.keywords:
                raise ValueError(f"{node.func.id} takes one argument")
            return getattr(g, node.func.id)(self._node(node.args[0]))
        if isinstance(node, ast.Name):
            if node.id in self.variables:
                return g.var(self.variables[node.id])
            if node.id in self.params:
                return g.param(node.id)
            raise ValueError(f"unknown name {node.id!r} in {self.src!r}")
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            text = ast.get_source_segment(self.src, node)
            return g.const(Fraction(text))
        raise ValueError(f"unsupported syntax in {self.src!r}")

    def _int_exponent(self, node):
        sign = 1
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.USub):
            sign, node = -1, node.operand
        if isinstance(node, ast.Constant) and isinstance(node.value, int):
            return sign * node.value
        raise ValueError("only integer literal exponents are supported")
