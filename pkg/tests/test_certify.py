import numpy as np
import pytest

from crlohner.certify import (
    CertificationReport, StageFailure, certify_pendulum, interval_newton, michelson_field,
    symmetric_shooting,
)
from crlohner.interval import Interval, sqrt


def test_interval_newton_scalar_example():
    res = interval_newton(lambda x: x * x - 2.0, lambda b: 2.0 * b, 1.5, Interval(1.0, 2.0))
    assert res.certified
    assert res.N == Interval(1.375, 1.4375)


def test_interval_newton_inconclusive_box():
    res = interval_newton(lambda x: x * x - 2.0, lambda b: 2.0 * b, 1.9, Interval(1.8, 2.0))
    assert not res.certified


def test_interval_newton_singular_derivative():
    zero = lambda x: x * 0.0  # noqa: E731
    with pytest.raises(StageFailure) as exc:
        interval_newton(zero, lambda b: Interval(np.zeros((2, 2))), np.zeros(2), Interval([-1.0, -1.0], [1.0, 1.0]))
    assert exc.value.stage == "interval-newton"


def test_interval_newton_two_dimensional():
    # g(x, y) = (x^2 + y^2 - 1, x - y): zero at (s, s), s = 1/sqrt 2
    def g(v):
        return Interval([0.0, 0.0]) + _stack(v[0] * v[0] + v[1] * v[1] - 1.0, v[0] - v[1])

    def dg(b):
        lo = np.array([[2 * b.lo[0], 2 * b.lo[1]], [1.0, -1.0]])
        hi = np.array([[2 * b.hi[0], 2 * b.hi[1]], [1.0, -1.0]])
        return Interval(lo, hi)

    s = 0.5 ** 0.5
    res = interval_newton(g, dg, np.array([0.7, 0.7]), Interval([0.69, 0.69], [0.72, 0.72]))
    assert res.certified and res.N.contains(np.array([s, s]))


def _stack(a, b):
    from crlohner.interval import stack

    return stack([a, b])


class _OddMap:
    """Manufactured half map P(y, 0) = (y, y - ystar)."""

    def __init__(self, ystar):
        self.ystar = ystar

    def run(self, x, r):
        img = Interval([float(x.lo[0]), float(x.lo[0]) - self.ystar], [float(x.hi[0]), float(x.hi[0]) - self.ystar])
        return img, None, None


def test_symmetric_shooting_sign_change():
    N, img, _ = symmetric_shooting(_OddMap(0.3), 0.3, 1e-3)
    assert N.contains(np.array([0.3, 0.0]))


def test_symmetric_shooting_without_sign_change():
    with pytest.raises(StageFailure) as exc:
        symmetric_shooting(_OddMap(0.3), 0.31, 1e-3)
    assert exc.value.stage == "symmetric-shooting"


def test_michelson_equilibria():
    c = Interval(0.2)
    vf = michelson_field(c)
    for s in (1, -1):
        x = s * sqrt(Interval(2.0)) * c
        f = vf(Interval([float(x.lo), 0.0, 0.0], [float(x.hi), 0.0, 0.0]))
        assert f.contains(np.zeros(3))


def test_pendulum_certified_and_monotone():
    reports = [certify_pendulum(Interval(6.0 - w, 6.0 + w)) for w in (1e-7, 1e-9, 0.0)]
    assert all(r.certified for r in reports)
    g = [r.gamma1 for r in reports]
    # nested parameters: the point run lies in the wider enclosures
    assert g[0].contains(float(g[2].mid())) and g[1].contains(float(g[2].mid()))
    assert float(g[0].diam()) >= float(g[2].diam())
    assert reports[0].checks["det_full_contains_1"]


def test_failed_stage_is_reported():
    # a box far from the fixed point cannot pass interval Newton
    rep = certify_pendulum(6.0, center=np.array([0.0, 0.2]), box_radius=1e-4)
    assert rep.verdict == "failed:interval-newton"
    assert rep.to_text().rstrip().endswith("VERDICT: failed:interval-newton")


def test_report_text_is_outward_decimal():
    rep = CertificationReport(system="s", param=Interval(0.1, 0.2), method="m", verdict="certified",
                              gamma1=Interval(1 / 3, 1 / 3))
    text = rep.to_text()
    line = next(ln for ln in text.splitlines() if ln.startswith("gamma1:"))
    lo, hi = (float(v) for v in line.split(":", 1)[1].strip(" []").split(","))
    assert lo <= 1 / 3 <= hi
    assert text.rstrip().endswith("VERDICT: certified")
