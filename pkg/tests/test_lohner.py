import io
import json
import math

import numpy as np
import pytest

from crlohner.interval import Interval
from crlohner.lohner import (
    CnSet, IntegrationFailure, StepConfig, default_orders, dump_trajectory, integrate,
    orthogonal_enclosure, reset_lipschitz, step,
)
from crlohner.vectorfield import VectorField

quad = VectorField.parse(["x*x"], names=["x"])
rot = VectorField.parse(["y", "-x"], names=["x", "y"])


def quad_exact(t, x0):
    d = 1 - x0 * t
    return [x0 / d, 1 / d ** 2, 2 * t / d ** 3, 6 * t ** 2 / d ** 4]


def test_quadratic_flow_and_derivatives_at_half(backend):
    S = CnSet.from_box(Interval([1.0]), 3)
    S = integrate(quad, S, 0.5, 1 / 64, StepConfig(order=10))
    got = [S.hull()[0]] + [S.derivatives()[m, 0] for m in range(3)]
    for g, e in zip(got, [2.0, 4.0, 8.0, 24.0]):
        assert g.contains(e)
        assert float(g.diam()) < 1e-6


@pytest.mark.parametrize("seed", range(4))
def test_quadratic_flow_random_pairs(seed):
    rng = np.random.default_rng(seed)
    for _ in range(5):
        x0 = float(rng.uniform(0.5, 1.2))
        t = float(rng.uniform(0.05, 0.6))
        S = integrate(quad, CnSet.from_box(Interval([x0]), 3), t, 1 / 32, StepConfig(order=10))
        got = [S.hull()[0]] + [S.derivatives()[m, 0] for m in range(3)]
        for g, e in zip(got, quad_exact(t, x0)):
            assert g.inflate(1.0, 0.0).contains(e)


def test_harmonic_oscillator_full_period_is_identity(backend):
    S = CnSet.from_box(Interval([1.0, 0.0]), 2)
    T = 2 * Interval(np.pi).hull(Interval(math.nextafter(np.pi, 4)))
    S = integrate(rot, S, T, 2 * np.pi / 100, StepConfig(order=12))
    assert S.hull().contains(np.array([1.0, 0.0]))
    J = S.jacobian()
    assert J.contains(np.eye(2))
    assert np.all(S.derivatives()[2:].contains(0.0))
    assert S.hull().width_max() < 1e-9


def test_wrapping_effect_is_suppressed():
    X = Interval([1 - 1e-3, -1e-3], [1 + 1e-3, 1e-3])
    growth = {}
    for mode in ("doubleton", "hull"):
        S = CnSet.from_box(X, 0)
        for _ in range(100):
            S = step(rot, S, 0.1, StepConfig(order=10, mode=mode)).cnset
        growth[mode] = float(np.max(S.hull().diam() / X.diam()))
    assert growth["doubleton"] < 5
    assert growth["hull"] > 1e3


def test_orthogonal_enclosure_contains_q():
    rng = np.random.default_rng(0)
    P = rng.standard_normal((3, 3))
    Q, ok = orthogonal_enclosure(P)
    assert ok
    QtQ = Q.T @ Q
    assert QtQ.contains(np.eye(3))


def test_reset_moves_r_to_q():
    S = CnSet.from_box(Interval([0.0, 0.0], [1e-6, 1e-6]), 0)
    S = S.__class__(**{**S.__dict__, "r0": Interval([-1.0, -1.0], [1.0, 1.0])})
    h0 = S.hull()
    S2 = reset_lipschitz(S, 10.0)
    assert S2.r0.width_max() == 0.0
    assert S2.hull().subset(h0.inflate(1.0, 1e-12))


def test_step_halving_and_failure():
    # blow-up at t = 1: a large step must be halved
    res = step(quad, CnSet.from_box(Interval([1.0]), 0), 0.9, StepConfig(order=8))
    assert res.halvings > 0 and float(res.h.hi) < 0.9
    with pytest.raises(IntegrationFailure):
        step(quad, CnSet.from_box(Interval([1.0]), 0), Interval(0.0, 2.0), StepConfig(order=8))


def test_interval_final_time_encloses_endpoints():
    S = integrate(quad, CnSet.from_box(Interval([1.0]), 1), Interval(0.25, 0.26), 1 / 16)
    assert S.hull()[0].contains(1 / (1 - 0.25)) and S.hull()[0].contains(1 / (1 - 0.26))


def test_taylor_orders():
    assert default_orders(20, 3) == [20, 19, 18]
    assert default_orders(5, 3) == [5, 4, 4]
    assert StepConfig(order=10, orders=[8, 6]).var_orders(2) == [8, 6]
    with pytest.raises(ValueError):
        StepConfig(orders=[5, 8]).var_orders(2)


def test_trajectory_dump_is_line_delimited_json():
    recs = []
    integrate(rot, CnSet.from_box(Interval([1.0, 0.0]), 1), 0.5, 0.1, on_step=lambda s: recs.append(s.record()))
    buf = io.StringIO()
    dump_trajectory(recs, buf)
    lines = buf.getvalue().strip().splitlines()
    assert len(lines) == len(recs) == 5
    assert set(json.loads(lines[0])) >= {"t", "v0", "r0_width", "q0_width", "order_widths"}
