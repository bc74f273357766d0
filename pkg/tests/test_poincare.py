import numpy as np
import pytest
import sympy as sp

from crlohner.combinatorics import MultipointerTable
from crlohner.interval import Interval
from crlohner.lohner import StepConfig
from crlohner.poincare import AffineSection, PoincareFailure, poincare_map, time_map
from crlohner.vectorfield import VectorField

rot = VectorField.parse(["y", "-x"], names=["x", "y"])
cfg = StepConfig(order=14)


def _symbolic_rotation_map():
    # first return to {x = 0} from y > 0: t_P = pi - atan(x/y), P = (0, -sqrt(x^2 + y^2))
    x, y = sp.symbols("x y")
    return (x, y), sp.pi - sp.atan(x / y), [sp.Integer(0), -sp.sqrt(x * x + y * y)]


@pytest.mark.parametrize("x0", [(0.0, 1.0), (0.1, 1.0), (0.3, 0.8)])
def test_rotation_half_map_matches_closed_form(x0, backend):
    sec = AffineSection.coordinate(2, 0, 0.0, direction=-1)
    res = poincare_map(rot, Interval(list(x0)), sec, 3, 0.1, cfg)
    (x, y), tP, P = _symbolic_rotation_map()
    at = {x: x0[0], y: x0[1]}
    assert res.t_bracket.contains(float(tP.subs(at)))
    assert res.image[1].contains(float(P[1].subs(at)))
    tab = MultipointerTable(2, 3)
    for m, a in enumerate(tab.items):
        dt, dp = tP, P[1]
        for j in a:
            dt = sp.diff(dt, (x, y)[j - 1])
            dp = sp.diff(dp, (x, y)[j - 1])
        vt, vp = float(dt.subs(at)), float(dp.subs(at))
        assert res.dtP[m].inflate(1.0, 1e-12).contains(vt)
        assert res.dP[m, 1].inflate(1.0, 1e-12).contains(vp)
        # the section coordinate is constant on the section
        assert res.dP[m, 0].contains(0.0)


def test_general_affine_section():
    # section x + y = 0 crossed with alpha decreasing, from (1, 0)
    sec = AffineSection(np.array([1.0, 1.0]), 0.0, direction=-1)
    res = poincare_map(rot, Interval([1.0, 0.0]), sec, 1, 0.1, cfg)
    # (x, y) = (cos t, -sin t) reaches x + y = 0 at t = pi/4
    assert res.t_bracket.contains(np.pi / 4)
    assert res.image.contains(np.array([np.sqrt(0.5), -np.sqrt(0.5)]))


def test_no_crossing_raises():
    drift = VectorField.parse(["1", "0"], names=["x", "y"])
    sec = AffineSection.coordinate(2, 0, 0.0)
    with pytest.raises(PoincareFailure):
        poincare_map(drift, Interval([1.0, 0.0]), sec, 1, 0.5, cfg, t_max=5.0)


def test_time_map_has_zero_return_time_derivatives():
    res = time_map(rot, Interval([1.0, 0.0]), np.pi / 2, 2, 0.1, cfg)
    assert res.image.contains(np.array([0.0, -1.0]))
    assert np.all(res.dtP.lo == 0) and np.all(res.dtP.hi == 0)
    assert res.jacobian().contains(np.array([[0.0, 1.0], [-1.0, 0.0]]))


def test_section_validation():
    with pytest.raises(ValueError):
        AffineSection(np.zeros(2))
    assert AffineSection.coordinate(3, 1, 2.0).axis() == 1
    assert AffineSection(np.array([1.0, 1.0])).axis() is None
