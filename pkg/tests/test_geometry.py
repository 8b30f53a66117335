import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from warpspec.geometry import (CallablePert, DomainError, Euclidean, GaugeFitError, Hyperbolic,
                               KappaPower, ProfileDriven, SinLogPert, SinPert, TabulatedPert,
                               WarpedModel, convexity_constant, curvature_sample, fit_gauge,
                               hessian_bounds, mean_curvature, sphere_volume)


def test_sphere_volume_low_dimensions():
    assert sphere_volume(2) == pytest.approx(2 * math.pi, rel=1e-15)
    assert sphere_volume(3) == pytest.approx(4 * math.pi, rel=1e-15)
    assert sphere_volume(4) == pytest.approx(2 * math.pi ** 2, rel=1e-15)
    assert sphere_volume(5) == pytest.approx(8 * math.pi ** 2 / 3, rel=1e-15)


@pytest.mark.parametrize("n", range(2, 12))
def test_sphere_volume_gamma_form(n):
    assert sphere_volume(n) == pytest.approx(2 * math.pi ** (n / 2) / math.gamma(n / 2), rel=1e-14)


def test_euclidean_curvature():
    m = WarpedModel(3, 0.5, Euclidean())
    assert float(mean_curvature(m, 4.0)) == pytest.approx(0.5, rel=1e-15)
    s = curvature_sample(m, 2.0)
    assert s.radial_curv == pytest.approx(0.0, abs=1e-15)


def test_hyperbolic_curvature():
    m = WarpedModel(3, 0.5, Hyperbolic())
    r = np.linspace(0.5, 20, 50)
    np.testing.assert_allclose(m.mean_curvature(r), 2.0 / np.tanh(r), rtol=1e-14)
    np.testing.assert_allclose(m.radial_curvature(r), -1.0, rtol=1e-12)


def test_kappa_power_curvature():
    m = WarpedModel(2, 1.0, KappaPower(0.5, 2.0))
    r = np.linspace(1, 30, 40)
    np.testing.assert_allclose(m.mean_curvature(r), 2.0 + 0.5 / r, rtol=1e-14)


def test_profile_log_f_matches_quadrature():
    m = WarpedModel(3, 1.0, ProfileDriven(1.0, 0.0, SinLogPert(0.3)))
    # (log f)' = (1 + 0.3 sin(log r)/r)/2, integrated in closed form
    r = np.array([1.0, 2.0, 10.0, 100.0])
    exact = 0.5 * (r - 1.0) + 0.15 * (1.0 - np.cos(np.log(r)))
    np.testing.assert_allclose(m.log_f(r), exact, rtol=1e-11, atol=1e-12)


def test_profile_log_f_unordered_input():
    m = WarpedModel(3, 1.0, ProfileDriven(1.0, 0.5, SinPert(0.2)))
    r = np.array([5.0, 2.0, 9.0, 2.0])
    direct = np.array([float(m.log_f(x)) for x in r])
    np.testing.assert_allclose(m.log_f(r), direct, rtol=1e-12)


def test_domain_error_below_r0():
    m = WarpedModel(3, 1.0, Euclidean())
    with pytest.raises(DomainError):
        m.log_f(0.5)


@pytest.mark.parametrize("warp", [Euclidean(), Hyperbolic(), KappaPower(1.0, 0.5),
                                  ProfileDriven(1.0, 0.0, SinLogPert(0.2))])
def test_invariants_hold(warp):
    m = WarpedModel(3, 1.0, warp)
    assert m.check_invariants(np.geomspace(1.0, 200.0, 50))


def test_fit_gauge_examples():
    grid = np.geomspace(10, 1000, 200)
    fit = fit_gauge(WarpedModel(3, 1.0, ProfileDriven(1.0, 0.0, SinLogPert(0.3))), grid)
    assert (fit.b, fit.c) == (1.0, 0.0)
    assert fit.delta == pytest.approx(0.3, rel=1e-3)
    fit = fit_gauge(WarpedModel(3, 0.01, Euclidean()), grid)
    assert (fit.b, fit.c, fit.delta) == (0.0, 2.0, 0.0)
    fit = fit_gauge(WarpedModel(2, 0.5, Hyperbolic()), grid)
    assert fit.b == 1.0 and fit.c == 0.0 and fit.delta < 1e-6


def test_fit_gauge_least_squares_for_undeclared():
    warp = ProfileDriven.from_mean_curvature(lambda r: 0.7 + 1.5 / r)
    fit = fit_gauge(WarpedModel(3, 1.0, warp), np.geomspace(10, 1000, 100))
    assert fit.b == pytest.approx(0.7, abs=1e-10)
    assert fit.c == pytest.approx(1.5, abs=1e-8)


def test_fit_gauge_rejects_unbounded_residual():
    warp = ProfileDriven.from_mean_curvature(lambda r: 1.0 + 0.5 / np.sqrt(r))
    with pytest.raises(GaugeFitError):
        fit_gauge(WarpedModel(3, 1.0, warp), np.geomspace(10, 10000, 100), b_hint=1.0,
                  c_hint=0.0)


def test_fit_gauge_needs_a_decade():
    with pytest.raises(ValueError):
        fit_gauge(WarpedModel(3, 1.0, Euclidean()), np.linspace(10, 50, 20))


def test_hessian_bounds_and_convexity():
    m = WarpedModel(3, 1.0, Euclidean())
    grid = np.geomspace(1, 100, 30)
    assert hessian_bounds(m, 1.0, 1.0, grid)
    assert not hessian_bounds(m, 1.1, 2.0, grid)
    assert convexity_constant(m, grid) == pytest.approx(1.0, rel=1e-14)


def test_tabulated_and_callable_perturbations():
    r = np.linspace(1, 50, 200)
    tab = TabulatedPert(r, 0.2 * np.sin(r))
    np.testing.assert_allclose(tab(r[5:-5]), 0.2 * np.sin(r[5:-5]), atol=1e-3)
    cp = CallablePert(lambda x: 0.1 * np.cos(x), amplitude=0.1)
    assert float(cp.derivative(1.0)) == pytest.approx(-0.1 * np.sin(1.0), rel=1e-6)


@settings(max_examples=40, deadline=None)
@given(n=st.integers(2, 8), r=st.floats(1.0, 500.0))
def test_mean_curvature_is_trace_of_hessian(n, r):
    m = WarpedModel(n, 1.0, Hyperbolic())
    assert float(m.mean_curvature(r)) == pytest.approx((n - 1) * float(m.hess_coeff(r)),
                                                       rel=1e-14)


@settings(max_examples=30, deadline=None)
@given(p=st.floats(0.0, 3.0), kappa=st.floats(0.1, 2.0), r=st.floats(1.0, 100.0))
def test_radial_curvature_from_log_f(p, kappa, r):
    # K_rad = -f''/f checked against the log-derivative identity
    m = WarpedModel(3, 1.0, KappaPower(p, kappa))
    h = float(m.hess_coeff(r))
    hp = float(m.warping.hess_coeff_derivative(r, m))
    assert float(m.radial_curvature(r)) == pytest.approx(-(hp + h * h), rel=1e-12, abs=1e-14)
