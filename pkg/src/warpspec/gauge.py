"""Gauge transform ``v = e^rho u`` with ``2 rho' = b + c/r`` and its identity checks."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .geometry import WarpedModel
from .radial import Potential

LOG_MAX = math.log(np.finfo(float).max)


class TransformOverflow(OverflowError):
    def __init__(self, r):
        super().__init__(f"e^rho |y| leaves the floating-point range at r={r:.17g}; "
                         "use the scaled accessors")
        self.r = r


@dataclass(frozen=True)
class Gauge:
    """``rho(r) = (b r + c log r)/2 + shift``.

    ``shift`` is zero in normal use; it rescales every weighted surface
    integral by ``exp(-2 shift)`` and exists to test that verdicts ignore it.
    """

    b: float = 0.0
    c: float = 0.0
    shift: float = 0.0

    def rho(self, r):
        r = np.asarray(r, dtype=float)
        return 0.5 * (self.b * r + self.c * np.log(r)) + self.shift

    def rho_p(self, r):
        return 0.5 * (self.b + self.c / np.asarray(r, dtype=float))

    def rho_pp(self, r):
        return -0.5 * self.c / np.asarray(r, dtype=float) ** 2

    def log_weight(self, r):
        """``log e^(-2 rho)``."""
        return -2.0 * self.rho(r)

    def weight(self, r):
        return np.exp(self.log_weight(r))


def default_eps(delta: float) -> float:
    return min(0.01, delta / 10.0)


@dataclass(frozen=True)
class EffectivePotentials:
    """Potentials of the gauge-transformed equation for one ``(lam, m)``.

    ``delta`` is the asymptotic bound on ``|delta_bar|``; ``eps`` the shift used
    in ``q_main`` (its sign is taken so that ``b * (+-eps) >= 0``).
    """

    model: WarpedModel
    pot: Potential
    gauge: Gauge
    lam: float
    m: float = 0.0
    delta: float = 0.0
    eps: Optional[float] = None

    @property
    def signed_eps(self) -> float:
        eps = default_eps(self.delta) if self.eps is None else self.eps
        return -abs(eps) if self.gauge.b < 0 else abs(eps)

    def V0(self, r):
        rp = self.gauge.rho_p(r)
        return rp * self.model.mean_curvature(r) + self.gauge.rho_pp(r) - rp * rp

    def V0_expansion(self, r):
        """Leading terms ``b^2/4 + bc/2r + b delta_bar/2r``."""
        r = np.asarray(r, dtype=float)
        b, c = self.gauge.b, self.gauge.c
        return 0.25 * b * b + 0.5 * b * c / r + 0.5 * b * self.delta_bar(r) / r

    def delta_bar(self, r):
        r = np.asarray(r, dtype=float)
        return r * (self.model.mean_curvature(r) - self.gauge.b - self.gauge.c / r)

    def q0(self, r):
        r = np.asarray(r, dtype=float)
        m = self.m
        return (self.lam - self.V0(r) - self.pot.V(r) + m * (m + 1) / r ** 2
                + (m / r) * (2.0 * self.gauge.rho_p(r) - self.model.mean_curvature(r)))

    def q1(self, r):
        r = np.asarray(r, dtype=float)
        b, c = self.gauge.b, self.gauge.c
        return self.lam - 0.25 * b * b - 0.5 * b * c / r - self.pot.V2(r)

    def q1_prime(self, r):
        r = np.asarray(r, dtype=float)
        return 0.5 * self.gauge.b * self.gauge.c / r ** 2 - self.pot.V2_prime(r)

    def q_main(self, r):
        r = np.asarray(r, dtype=float)
        return self.q1(r) + 0.5 * self.gauge.b * (self.delta + self.signed_eps) / r

    def q_main_prime(self, r):
        r = np.asarray(r, dtype=float)
        return self.q1_prime(r) - 0.5 * self.gauge.b * (self.delta + self.signed_eps) / r ** 2


# --------------------------------------------------------------------------
# transformed solutions


@dataclass
class TransformedSolution:
    """``z_m = r^m e^rho y`` for one mode; ``z = z_0``."""

    base: object
    gauge: Gauge
    m: float = 0.0

    def __post_init__(self):
        if self.m < 0:
            raise ValueError("m must be nonnegative")
        self.overflow_radius = None
        grid = getattr(self.base, "grid", None)
        if grid is not None:
            s = self.base.evaluate_scaled(grid)
            with np.errstate(divide="ignore"):
                mag = self.gauge.rho(grid) + s.log_scale + np.log(np.abs(s.y))
            bad = np.nonzero(mag > LOG_MAX)[0]
            if bad.size:
                self.overflow_radius = float(grid[bad[0]])

    @property
    def model(self):
        return self.base.model

    @property
    def eq(self):
        return self.base.eq

    @property
    def r_min(self):
        return self.base.r_min

    @property
    def r_max(self):
        return self.base.r_max

    def _scaled(self, r, m):
        r = np.atleast_1d(np.asarray(r, dtype=float))
        s = self.base.evaluate_scaled(r)
        g = self.gauge.rho_p(r) + m / r
        gp = self.gauge.rho_pp(r) - m / r ** 2
        z = s.y
        zp = s.yp + g * s.y
        zpp = s.ypp + 2.0 * g * s.yp + (gp + g * g) * s.y
        log_factor = self.gauge.rho(r) + m * np.log(r) + s.log_scale
        return z, zp, zpp, log_factor

    def evaluate_scaled(self, r, m=None):
        """Mantissas ``(z_m, z_m', z_m'')`` and the common log factor."""
        return self._scaled(r, self.m if m is None else m)

    def evaluate(self, r, m=None):
        """Physical ``(z_m, z_m', z_m'')``."""
        z, zp, zpp, lf = self.evaluate_scaled(r, m)
        if np.any(lf > LOG_MAX - 50.0):
            with np.errstate(divide="ignore"):
                mag = lf + np.log(np.maximum.reduce([np.abs(z), np.abs(zp), np.abs(zpp)]))
            bad = np.nonzero(mag > LOG_MAX)[0]
            if bad.size:
                raise TransformOverflow(float(np.atleast_1d(r)[bad[0]]))
        f = np.exp(lf)
        return z * f, zp * f, zpp * f

    def residual(self, r):
        """Relative residual of the mode-reduced ``v_m`` equation at ``r``."""
        r = np.atleast_1d(np.asarray(r, dtype=float))
        z, zp, zpp, _ = self.evaluate_scaled(r)
        model, eq, m = self.model, self.eq, self.m
        ep = EffectivePotentials(model, eq.pot, self.gauge, eq.lam, m)
        dr = model.mean_curvature(r)
        ang = eq.mode.kappa_l * np.exp(-2.0 * model.log_f(r)) if eq.mode.kappa_l else 0.0 * r
        rp2 = 2.0 * self.gauge.rho_p(r)
        pot = (m * (m + 1) / r ** 2 + (m / r) * (rp2 - dr) - ep.V0(r) - eq.pot.V(r) + eq.lam)
        terms = [zpp, dr * zp, -ang * z, -(2.0 * m / r + rp2) * zp, pot * z]
        return _relative(terms)


def _relative(terms):
    total = np.zeros_like(terms[0])
    scale = np.zeros_like(terms[0])
    for t in terms:
        total = total + t
        scale = np.maximum(scale, np.abs(t))
    res = np.abs(total)
    return np.divide(res, scale, out=np.zeros_like(res), where=scale > 0)


def transform(sol, gauge: Gauge, m: float = 0.0) -> TransformedSolution:
    """Gauge-transform a mode solution: ``z_m = r^m e^rho y``.

    ``overflow_radius`` on the result records where ``e^rho |y|`` first leaves
    the double range (physical accessors then raise :class:`TransformOverflow`).
    """
    return TransformedSolution(sol, gauge, m)


def check_transformed_residual(sol, gauge: Gauge, points=None) -> float:
    """Max relative residual of ``-Lap v + 2 rho' v_r + (V1+V2+V0) v = lam v`` (mode-reduced)."""
    ts = transform(sol, gauge, 0.0)
    r = sol.probe_points(32) if points is None else np.atleast_1d(points)
    z, zp, zpp, _ = ts.evaluate_scaled(r)
    model, eq = sol.model, sol.eq
    ep = EffectivePotentials(model, eq.pot, gauge, eq.lam)
    dr = model.mean_curvature(r)
    ang = eq.mode.kappa_l * np.exp(-2.0 * model.log_f(r)) if eq.mode.kappa_l else 0.0 * r
    terms = [-zpp, -dr * zp, ang * z, 2.0 * gauge.rho_p(r) * zp,
             (eq.pot.V(r) + ep.V0(r)) * z, -eq.lam * z]
    return float(np.max(_relative(terms)))


check_equav_residual = check_transformed_residual


# --------------------------------------------------------------------------
# level-set derivative identities


def _level_weight(model, gauge, r):
    r = np.asarray(r, dtype=float)
    return model.sphere_volume * np.exp((model.n - 1) * model.log_f(r) + gauge.log_weight(r))


def _five_point(fn, r, h):
    return (fn(r - 2 * h) - 8.0 * fn(r - h) + 8.0 * fn(r + h) - fn(r + 2 * h)) / (12.0 * h)


def surface_derivative_identity(f_sample: Callable, gauge: Gauge, model: WarpedModel, r,
                                f_sample_prime: Optional[Callable] = None, rel_step=1e-4):
    """Both sides of ``d/dr int_S f e^(-2 rho) = int_S [f' + f (mean_curv - 2 rho')] e^(-2 rho)``.

    ``lhs`` is a five-point centered difference with step ``rel_step * r``;
    ``rhs`` uses ``f_sample_prime`` (or, if absent, the same difference on ``f``).
    """
    r = np.asarray(r, dtype=float)
    h = rel_step * r

    def integral(t):
        return _level_weight(model, gauge, t) * np.asarray(f_sample(t), dtype=float)

    lhs = _five_point(integral, r, h)
    fr = np.asarray(f_sample(r), dtype=float)
    fpr = (np.asarray(f_sample_prime(r), dtype=float) if f_sample_prime is not None
           else _five_point(lambda t: np.asarray(f_sample(t), dtype=float), r, h))
    rhs = _level_weight(model, gauge, r) * (fpr + fr * (model.mean_curvature(r)
                                                          - 2.0 * gauge.rho_p(r)))
    return lhs, rhs


def divergence_identity(ts: TransformedSolution, r, rel_step=1e-4):
    """Level-set divergence identity for ``X = v grad v`` (mode-reduced).

    Returns ``(lhs, rhs)`` with ``lhs = d/dr int_S z z' e^(-2 rho)`` by finite
    differences and ``rhs = int_S (|grad v|^2 + v Lap v - 2 rho' z z') e^(-2 rho)``.
    """
    r = np.asarray(r, dtype=float)
    model, gauge = ts.model, ts.gauge
    kappa = ts.eq.mode.kappa_l

    def flux(t):
        z, zp, _ = ts.evaluate(t, 0.0)
        return _level_weight(model, gauge, t) * z * zp

    lhs = _five_point(flux, r, rel_step * r)
    z, zp, zpp = ts.evaluate(r, 0.0)
    inv_f2 = np.exp(-2.0 * model.log_f(r))
    grad2 = zp * zp + kappa * z * z * inv_f2
    lap = zpp + model.mean_curvature(r) * zp - kappa * z * inv_f2
    rhs = _level_weight(model, gauge, r) * (grad2 + z * lap - 2.0 * gauge.rho_p(r) * z * zp)
    return lhs, rhs
