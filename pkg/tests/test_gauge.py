import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import FIXTURES, FIXTURE_IDS
from warpspec.gauge import (EffectivePotentials, Gauge, TransformOverflow, check_transformed_residual,
                            default_eps, divergence_identity, surface_derivative_identity,
                            transform)
from warpspec.geometry import Euclidean, Hyperbolic, ProfileDriven, SinLogPert, WarpedModel
from warpspec.radial import AngularMode, Potential, separate, shoot


def _solution(model, lam=1.0, l=0, pot=None, r_max=300.0, seed="regular"):
    eq = separate(model, pot or Potential.zero(), lam, AngularMode(l, model.n))
    return shoot(eq, r_max, seed=seed)


@pytest.mark.parametrize("name,model,gauge,delta", FIXTURES, ids=FIXTURE_IDS)
@pytest.mark.parametrize("m", [0.0, 1.0, 3.0])
def test_transformed_equation_residual(name, model, gauge, delta, m):
    sol = _solution(model, lam=1.3, l=1,
                    pot=Potential.coulomb_like(0.3, 0.5))
    ts = transform(sol, gauge, m)
    assert np.max(ts.residual(sol.probe_points(64))) < 1e-7


@pytest.mark.parametrize("name,model,gauge,delta", FIXTURES, ids=FIXTURE_IDS)
def test_gauge_equation_residual(name, model, gauge, delta):
    sol = _solution(model, lam=1.3)
    assert check_transformed_residual(sol, gauge) < 1e-7


def test_trivial_gauge_is_identity():
    model = WarpedModel(3, 1.0, Hyperbolic())
    sol = _solution(model, lam=2.0, r_max=50.0)
    r = np.linspace(1.0, 50.0, 40)
    z, zp, zpp = transform(sol, Gauge(), 0.0).evaluate(r)
    y, yp, ypp = sol.evaluate(r)
    np.testing.assert_array_equal(z, y)
    np.testing.assert_array_equal(zp, yp)
    np.testing.assert_array_equal(zpp, ypp)


@settings(max_examples=40, deadline=None)
@given(b=st.floats(-2, 2), c=st.floats(-2, 2), d=st.floats(0, 0.9), r=st.floats(5, 1e4))
def test_v0_expansion_remainder_is_second_order(b, c, d, r):
    model = WarpedModel(3, 1.0, ProfileDriven(b, c, SinLogPert(d)))
    ep = EffectivePotentials(model, Potential.zero(), Gauge(b, c), 1.0, delta=d)
    rem = r * r * abs(float(ep.V0(r) - ep.V0_expansion(r)))
    assert rem <= 0.25 * c * c + 0.5 * abs(c) * (d + 1.0) + 1e-9 * (1 + r * r * (b * b + 1))


@settings(max_examples=40, deadline=None)
@given(b=st.floats(-2, 2), d=st.floats(0, 0.9), r=st.floats(50, 1e4))
def test_q0_minus_q1_is_first_order(b, d, r):
    # m = 0, V1 = 0, c = 0: r |q0 - q1| <= |b| delta / 2
    model = WarpedModel(3, 1.0, ProfileDriven(b, 0.0, SinLogPert(d)))
    ep = EffectivePotentials(model, Potential.slow_decay(0.2, 0.5), Gauge(b, 0.0), 1.0, delta=d)
    assert r * abs(float(ep.q0(r) - ep.q1(r))) <= 0.5 * abs(b) * d + 1e-9 * (1 + r * b * b)


def test_signed_eps_follows_b():
    model = WarpedModel(3, 1.0, Euclidean())
    pos = EffectivePotentials(model, Potential.zero(), Gauge(1.0, 0.0), 1.0, delta=0.2)
    neg = EffectivePotentials(model, Potential.zero(), Gauge(-1.0, 0.0), 1.0, delta=0.2)
    assert pos.signed_eps == pytest.approx(0.01) and neg.signed_eps == pytest.approx(-0.01)
    assert default_eps(0.05) == pytest.approx(0.005)


def test_q_main_derivative_matches_difference():
    model = WarpedModel(3, 1.0, ProfileDriven(1.0, 0.5, SinLogPert(0.2)))
    ep = EffectivePotentials(model, Potential.slow_decay(0.3, 0.5), Gauge(1.0, 0.5), 1.0, delta=0.2)
    r, h = 7.0, 1e-5
    fd = (ep.q_main(r + h) - ep.q_main(r - h)) / (2 * h)
    assert float(ep.q_main_prime(r)) == pytest.approx(float(fd), rel=1e-7)


def test_overflow_radius_and_scaled_access():
    # z = e^(r/2) y grows like e^(r/2) for lam = 0 on hyperbolic n=2
    model = WarpedModel(2, 0.5, Hyperbolic())
    sol = _solution(model, lam=0.0, r_max=2000.0)
    ts = transform(sol, Gauge(1.0, 0.0))
    # y = 1 exactly, so e^(r/2) overflows near r = 1419.6; the radius is the first grid node past it
    assert ts.overflow_radius is not None and 1419.0 < ts.overflow_radius <= 2000.0
    with pytest.raises(TransformOverflow):
        ts.evaluate(1990.0)
    z, zp, zpp, lf = ts.evaluate_scaled(1990.0)
    assert np.isfinite(z).all() and lf[0] > 700


def test_surface_identity_flat_example():
    # f_sample = 1 on Euclidean n=3 with gauge (0, 2): the weight f^2 r^-2 is constant
    model = WarpedModel(3, 0.01, Euclidean())
    r = np.array([1.0, 10.0, 100.0])
    lhs, rhs = surface_derivative_identity(lambda t: np.ones_like(np.asarray(t)), Gauge(0.0, 2.0),
                                           model, r, lambda t: np.zeros_like(np.asarray(t)))
    np.testing.assert_allclose(lhs, 0.0, atol=1e-9)
    np.testing.assert_allclose(rhs, 0.0, atol=1e-12)


@pytest.mark.parametrize("name,model,gauge,delta", FIXTURES, ids=FIXTURE_IDS)
def test_surface_identity(name, model, gauge, delta):
    r = np.geomspace(max(2.0, 5 * model.r0), 60.0, 12)
    fs, fsp = (lambda t: np.cos(t) + 2.0), (lambda t: -np.sin(t))
    lhs, rhs = surface_derivative_identity(fs, gauge, model, r, fsp)
    np.testing.assert_allclose(lhs, rhs, rtol=1e-7)


@pytest.mark.parametrize("name,model,gauge,delta", FIXTURES, ids=FIXTURE_IDS)
def test_divergence_identity(name, model, gauge, delta):
    sol = _solution(model, lam=1.3, l=1, r_max=80.0)
    ts = transform(sol, gauge)
    r = np.linspace(3.0, 70.0, 15)
    lhs, rhs = divergence_identity(ts, r)
    scale = np.max(np.abs(rhs))
    assert np.max(np.abs(lhs - rhs)) < 1e-6 * scale
