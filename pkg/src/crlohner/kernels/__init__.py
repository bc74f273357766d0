"""Hot kernels with interchangeable numba and numpy backends.

The backend is chosen by the ``CRLOHNER_BACKEND`` environment variable
(``numba`` or ``numpy``) at import time and can be switched later with
:func:`set_backend`.  Both backends are rigorous; they may differ in the last
ulps because the numba kernels accumulate sums with per-addition directed
rounding while the numpy kernels use an a priori forward error bound.

All kernels take and return pairs of float64 arrays ``(lo, hi)``.
"""

import os

from . import numpy_impl

OPS = numpy_impl.OPS

_BACKENDS = {"numpy": numpy_impl}
_active = None


def _load(name):
    if name not in _BACKENDS:
        if name != "numba":
            raise ValueError(f"unknown backend {name!r}")
        from . import numba_impl
        _BACKENDS["numba"] = numba_impl
    return _BACKENDS[name]


def available_backends():
    names = ["numpy"]
    try:
        _load("numba")
        names.append("numba")
    except ImportError:
        pass
    return names


def set_backend(name):
    """Select the kernel backend by name and return the previous name."""
    global _active
    prev = backend_name()
    _active = _load(name)
    return prev


def backend_name():
    return None if _active is None else _active.NAME


def _default():
    name = os.environ.get("CRLOHNER_BACKEND", "").strip().lower()
    if name:
        return name
    try:
        import numba  # noqa: F401
        return "numba"
    except ImportError:
        return "numpy"


set_backend(_default())


def matmul(alo, ahi, blo, bhi):
    """Interval matrix product over the last two axes (batched)."""
    return _active.matmul(alo, ahi, blo, bhi)


def cauchy(alo, ahi, blo, bhi):
    """Truncated Cauchy product of jets along the last axis, batched."""
    return _active.cauchy(alo, ahi, blo, bhi)


def sum_axis(lo, hi, axis):
    """Rigorous sum along ``axis``."""
    return _active.sum_axis(lo, hi, axis)


def tape_jet(tape_arrays, xlo, xhi, order, ode):
    """Taylor coefficients of every tape node.

    Parameters
    ----------
    tape_arrays : tuple
        ``(op, arg1, arg2, clo, chi, partner, var, out)`` integer and float
        arrays describing the expression DAG in topological order.
    xlo, xhi : ndarray, shape (n, order + 1)
        Variable jets.  With ``ode=True`` only column 0 is read and the
        remaining columns are produced by the recurrence x' = out.
    order : int
    ode : bool

    Returns
    -------
    lo, hi : ndarray, shape (N, order + 1)
    """
    return _active.tape_jet(tape_arrays, xlo, xhi, order, ode)


def linrec(alo, ahi, blo, bhi, vlo, vhi, order):
    """Jets of the linear system V' = A V + B with V(0) = V0.

    ``A`` has shape (order, n, n), ``B`` shape (order, M, n) and ``V0`` shape
    (M, n); returns ``V`` with shape (order + 1, M, n) where
    ``V[k+1] = (B[k] + sum_j A[j] V[k-j]) / (k+1)``.
    """
    return _active.linrec(alo, ahi, blo, bhi, vlo, vhi, order)
