"""Separation of variables on a warped end and the radial mode equation.

For the angular mode with sphere eigenvalue ``kappa_l = l(l + n - 2)`` the
eigen-equation ``-Lap u + V u = lam u`` reduces to

    y'' + p(r) y' + q(r) y = 0,   p = (n-1) f'/f,   q = lam - V - kappa_l / f^2.

Solutions are stored as Dormand-Prince dense output with an exact binary
exponent per step, so decaying and growing branches stay representable far
beyond the double-precision range.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional

import numpy as np

from . import _dopri_py as _k
from . import kernels
from .geometry import DomainError, WarpedModel


class IntegrationError(RuntimeError):
    """Integrator failure (step-size collapse or non-finite values) at radius ``r``."""

    def __init__(self, message, r=math.nan):
        super().__init__(f"{message} at r={r:.17g}")
        self.r = r


class ExtrapolationError(DomainError):
    pass


# --------------------------------------------------------------------------
# potentials


@dataclass(frozen=True)
class PowerLaw:
    """``coef * r**(-power)``."""

    coef: float
    power: float

    def __call__(self, r):
        return self.coef * np.asarray(r, dtype=float) ** (-self.power)

    def derivative(self, r):
        return -self.power * self.coef * np.asarray(r, dtype=float) ** (-self.power - 1.0)

    def native(self):
        return [_k.POT_POWER, self.coef, self.power, 0.0]


@dataclass(frozen=True)
class GaussianWell:
    """Smooth attractive well ``-depth * exp(-((r - center)/width)**2)``."""

    depth: float
    center: float
    width: float

    def __call__(self, r):
        x = (np.asarray(r, dtype=float) - self.center) / self.width
        return -self.depth * np.exp(-x * x)

    def derivative(self, r):
        x = (np.asarray(r, dtype=float) - self.center) / self.width
        return 2.0 * self.depth * x / self.width * np.exp(-x * x)

    def native(self):
        return [_k.POT_GAUSSIAN, self.depth, self.center, self.width]


@dataclass(frozen=True)
class Potential:
    """``V = V1 + V2`` with ``r|V1| -> 0``, ``|V2| -> 0`` and ``r|V2'| -> 0``."""

    v1: tuple = ()
    v2: tuple = ()

    @classmethod
    def zero(cls):
        return cls()

    @classmethod
    def coulomb_like(cls, c1, beta):
        if beta <= 0:
            raise ValueError("beta must be positive")
        return cls(v1=(PowerLaw(c1, 1.0 + beta),))

    @classmethod
    def slow_decay(cls, c2, beta):
        if beta <= 0:
            raise ValueError("beta must be positive")
        return cls(v2=(PowerLaw(c2, beta),))

    @classmethod
    def well(cls, depth, center, width):
        return cls(v1=(GaussianWell(depth, center, width),))

    @staticmethod
    def _sum(terms, r, attr="__call__"):
        r = np.asarray(r, dtype=float)
        out = np.zeros_like(r)
        for t in terms:
            out = out + getattr(t, attr)(r)
        return out

    def V1(self, r):
        return self._sum(self.v1, r)

    def V2(self, r):
        return self._sum(self.v2, r)

    def V2_prime(self, r):
        return self._sum(self.v2, r, "derivative")

    def V(self, r):
        return self.V1(r) + self.V2(r)

    def V_prime(self, r):
        return self._sum(self.v1, r, "derivative") + self.V2_prime(r)

    @property
    def is_zero(self):
        return not self.v1 and not self.v2

    def native(self):
        rows = []
        for t in (*self.v1, *self.v2):
            if not hasattr(t, "native"):
                return None
            rows.append(t.native())
        return np.asarray(rows, dtype=float).reshape(-1, 4)

    def decay_radius(self, eps, grid):
        """Smallest grid radius beyond which ``r|V1|, |V2|, r|V2'|`` all stay below ``eps``."""
        grid = np.sort(np.asarray(grid, dtype=float))
        worst = np.maximum.reduce([grid * np.abs(self.V1(grid)), np.abs(self.V2(grid)),
                                   grid * np.abs(self.V2_prime(grid))])
        bad = np.nonzero(worst >= eps)[0]
        if bad.size == 0:
            return float(grid[0])
        if bad[-1] == grid.size - 1:
            return math.inf
        return float(grid[bad[-1] + 1])


@dataclass(frozen=True)
class AngularMode:
    l: int
    n: int = 3

    def __post_init__(self):
        if self.l < 0 or int(self.l) != self.l:
            raise ValueError("l must be a nonnegative integer")
        if self.n == 2 and self.l < 0:
            raise ValueError("invalid mode")

    @property
    def kappa_l(self) -> float:
        return float(self.l * (self.l + self.n - 2))


# --------------------------------------------------------------------------
# separated equation


@dataclass(frozen=True)
class RadialEquation:
    """Coefficients of ``y'' + p y' + q y = 0`` for one mode and spectral parameter."""

    model: WarpedModel
    pot: Potential
    lam: float
    mode: AngularMode

    def p(self, r):
        return self.model.mean_curvature(r)

    def q(self, r):
        r = np.asarray(r, dtype=float)
        out = self.lam - self.pot.V(r)
        if self.mode.kappa_l:
            out = out - self.mode.kappa_l * np.exp(-2.0 * self.model.log_f(r))
        return out


def separate(model: WarpedModel, pot: Potential, lam: float, mode: AngularMode) -> RadialEquation:
    if mode.n != model.n:
        mode = AngularMode(mode.l, model.n)
    return RadialEquation(model, pot, float(lam), mode)


# --------------------------------------------------------------------------
# solutions


class Scaled(NamedTuple):
    """``(y, y', y'')`` mantissas; the physical values are these times ``2**e2``."""

    y: np.ndarray
    yp: np.ndarray
    ypp: np.ndarray
    e2: np.ndarray

    @property
    def log_scale(self):
        return self.e2 * math.log(2.0)


def _dense(cont, theta, h):
    """Dense-output value and ``d/dr`` for every component."""
    c1, c2, c3, c4, c5 = (cont[:, i, :] for i in range(5))
    th = theta[:, None]
    th1 = 1.0 - th
    a = c4 + th1 * c5
    b = c3 + th * a
    c = c2 + th1 * b
    val = c1 + th * c
    dval = c + th * (-b + th1 * (a - th * c5))
    return val, dval / h[:, None]


@dataclass
class ModeSolution:
    """Dense-output solution of one radial mode equation."""

    eq: RadialEquation
    r_start: np.ndarray
    h: np.ndarray
    cont: np.ndarray
    e2: np.ndarray
    tol: float
    nfev: int = 0
    _lo: np.ndarray = field(init=False, repr=False)
    _order: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        lo = np.minimum(self.r_start, self.r_start + self.h)
        self._order = np.argsort(lo, kind="stable")
        self._lo = lo[self._order]
        ends = self.r_start + self.h
        self.r_min = float(np.min(np.minimum(self.r_start, ends)))
        self.r_max = float(np.max(np.maximum(self.r_start, ends)))

    @property
    def lam(self):
        return self.eq.lam

    @property
    def mode(self):
        return self.eq.mode

    @property
    def model(self):
        return self.eq.model

    @property
    def grid(self) -> np.ndarray:
        nodes = np.concatenate([self.r_start, [self.r_start[-1] + self.h[-1]]])
        return np.sort(nodes)

    @property
    def y(self) -> np.ndarray:
        return self.evaluate(self.grid)[0]

    @property
    def yp(self) -> np.ndarray:
        return self.evaluate(self.grid)[1]

    def _locate(self, r):
        r = np.atleast_1d(np.asarray(r, dtype=float))
        slack = 1e-12 * max(1.0, abs(self.r_max))
        if np.any(r < self.r_min - slack) or np.any(r > self.r_max + slack):
            raise ExtrapolationError(f"radius outside solution span [{self.r_min}, {self.r_max}]")
        k = np.clip(np.searchsorted(self._lo, r, side="right") - 1, 0, self._lo.size - 1)
        idx = self._order[k]
        theta = (r - self.r_start[idx]) / self.h[idx]
        return r, idx, np.clip(theta, 0.0, 1.0)

    def evaluate_scaled(self, r) -> Scaled:
        r, idx, theta = self._locate(r)
        val, dval = _dense(self.cont[idx], theta, self.h[idx])
        return Scaled(val[:, 0], val[:, 1], dval[:, 1], self.e2[idx].astype(float))

    def evaluate(self, r):
        """Physical ``(y, y', y'')``; ``y''`` is the derivative of the dense ``y'``."""
        s = self.evaluate_scaled(r)
        e = s.e2.astype(int)
        return np.ldexp(s.y, e), np.ldexp(s.yp, e), np.ldexp(s.ypp, e)

    def log_f(self, r):
        r, idx, theta = self._locate(r)
        val, _ = _dense(self.cont[idx], theta, self.h[idx])
        return val[:, 2]

    def residual(self, r):
        """Relative residual of the radial equation at ``r`` (largest-term normalised)."""
        s = self.evaluate_scaled(r)
        rr = np.atleast_1d(np.asarray(r, dtype=float))
        t1, t2, t3 = s.ypp, self.eq.p(rr) * s.yp, self.eq.q(rr) * s.y
        scale = np.maximum.reduce([np.abs(t1), np.abs(t2), np.abs(t3)])
        res = np.abs(t1 + t2 + t3)
        return np.divide(res, scale, out=np.zeros_like(res), where=scale > 0)

    def probe_points(self, count=32):
        return probe_points(self.r_min, self.r_max, count)


@dataclass
class ClosedFormSolution:
    """A solution given by callables; used for synthetic inputs and oracles."""

    eq: RadialEquation
    y_fn: Callable
    yp_fn: Callable
    ypp_fn: Callable
    r_min: float
    r_max: float
    tol: float = 0.0

    @property
    def lam(self):
        return self.eq.lam

    @property
    def mode(self):
        return self.eq.mode

    @property
    def model(self):
        return self.eq.model

    def evaluate_scaled(self, r) -> Scaled:
        r = np.atleast_1d(np.asarray(r, dtype=float))
        slack = 1e-12 * max(1.0, abs(self.r_max))
        if np.any(r < self.r_min - slack) or np.any(r > self.r_max + slack):
            raise ExtrapolationError("radius outside solution span")
        y = np.asarray(self.y_fn(r), dtype=float) * np.ones_like(r)
        yp = np.asarray(self.yp_fn(r), dtype=float) * np.ones_like(r)
        ypp = np.asarray(self.ypp_fn(r), dtype=float) * np.ones_like(r)
        return Scaled(y, yp, ypp, np.zeros_like(r))

    def evaluate(self, r):
        s = self.evaluate_scaled(r)
        return s.y, s.yp, s.ypp

    def probe_points(self, count=32):
        return probe_points(self.r_min, self.r_max, count)


def probe_points(r_min, r_max, count=32):
    """Deterministic low-discrepancy interior points (golden-ratio sequence)."""
    frac = np.mod(0.5 + np.arange(1, count + 1) * 0.6180339887498949, 1.0)
    frac = 0.02 + 0.96 * frac
    return np.sort(r_min + frac * (r_max - r_min))


# --------------------------------------------------------------------------
# integration


_STATUS = {
    _k.STATUS_COLLAPSE: "step-size collapse",
    _k.STATUS_NONFINITE: "non-finite values",
    _k.STATUS_MAX_STEPS: "step budget exhausted",
}


def integrate(eq: RadialEquation, y_init, span, tol: float = 1e-10, wave_frac: float = 0.1,
              backend: Optional[str] = None) -> ModeSolution:
    """Adaptive Dormand-Prince 5(4) integration with dense output.

    ``span = (r_a, r_b)`` may run inward (``r_b < r_a``).  Steps are capped at
    ``wave_frac`` of the local wavelength ``2 pi / sqrt(q)``.
    """
    if not 1e-13 <= tol <= 1e-6:
        raise ValueError("tol must lie in [1e-13, 1e-6]")
    r_a, r_b = map(float, span)
    model = eq.model
    if min(r_a, r_b) < model.r0 * (1.0 - 1e-12):
        raise DomainError("integration span starts below r0")
    if r_a == r_b:
        raise ValueError("empty integration span")
    y0, yp0 = map(float, y_init)
    logf0 = float(model.log_f(r_a))
    geom, pot = model.native(), eq.pot.native()
    if geom is not None and pot is not None:
        out = kernels.integrate_native(geom, pot, model.n, eq.lam, eq.mode.kappa_l, y0, yp0,
                                       logf0, r_a, r_b, tol, wave_frac, backend=backend)
    else:
        def coeffs(r):
            return float(model.mean_curvature(r)), float(eq.pot.V(r))
        out = kernels.integrate_callable(coeffs, model.n, eq.lam, eq.mode.kappa_l, y0, yp0,
                                         logf0, r_a, r_b, tol, wave_frac)
    r_start, h, cont, e2, nfev, status, r_fail = out
    if status != _k.STATUS_OK:
        raise IntegrationError(_STATUS.get(status, "integration failure"), r_fail)
    if r_start.size == 0:
        raise IntegrationError("no steps taken", r_a)
    return ModeSolution(eq, r_start, h, cont, e2, tol, nfev)


def decaying_slope(eq: RadialEquation, r: float) -> float:
    """Frozen-coefficient log-derivative ``y'/y`` of the recessive branch at ``r``."""
    p, q = float(eq.p(r)), float(eq.q(r))
    return -0.5 * p - math.sqrt(max(0.25 * p * p - q, 0.0))


def shoot(eq: RadialEquation, r_max: float, seed="regular", tol: float = 1e-10,
          r_start: Optional[float] = None, backend: Optional[str] = None) -> ModeSolution:
    """Integrate one branch over ``[r_start, r_max]``.

    ``seed`` is ``"regular"`` (``y = 1, y' = 0`` at the inner radius),
    ``"decaying"`` (recessive branch, integrated inward from ``r_max``) or an
    explicit ``(y0, y0')`` pair at the inner radius.
    """
    r_in = eq.model.r0 if r_start is None else float(r_start)
    if isinstance(seed, str):
        if seed == "regular":
            return integrate(eq, (1.0, 0.0), (r_in, r_max), tol, backend=backend)
        if seed == "decaying":
            return integrate(eq, (1.0, decaying_slope(eq, r_max)), (r_max, r_in), tol,
                             backend=backend)
        raise ValueError(f"unknown seed {seed!r}")
    return integrate(eq, seed, (r_in, r_max), tol, backend=backend)


# --------------------------------------------------------------------------
# surface norms


def log_surface_norms(sol, r):
    """``(log M^2, log N^2)`` with the ``omega f^(n-1)`` level-set weight; ``-inf`` for zeros."""
    r = np.atleast_1d(np.asarray(r, dtype=float))
    model = sol.model
    s = sol.evaluate_scaled(r)
    logw = math.log(model.sphere_volume) + (model.n - 1) * model.log_f(r) + 2.0 * s.log_scale
    with np.errstate(divide="ignore"):
        return logw + 2.0 * np.log(np.abs(s.y)), logw + 2.0 * np.log(np.abs(s.yp))


def surface_norms(sol, model: WarpedModel, r):
    """``(M^2, N^2) = omega f^(n-1) (y^2, y'^2)`` at ``r``."""
    if model is not sol.model and model != sol.model:
        raise ValueError("solution belongs to a different model")
    lm, ln = log_surface_norms(sol, r)
    m2, n2 = np.exp(lm), np.exp(ln)
    if np.ndim(r) == 0:
        return float(m2[0]), float(n2[0])
    return m2, n2
