"""Warped-product manifold ends ``g = dr^2 + f(r)^2 g_sphere`` and their curvature.

Every quantity here is radial: on a warped end the Hessian of the distance
function is ``(f'/f)`` times the tangential metric, so the mean curvature is
``(n - 1) f'/f`` and the radial sectional curvature is ``-f''/f``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional

import numpy as np
from scipy import integrate
from scipy.interpolate import CubicSpline

from . import _dopri_py as _k


class DomainError(ValueError):
    """Raised when a radius lies outside the end ``[r0, inf)``."""


class GaugeFitError(RuntimeError):
    """Raised when ``r |mean_curvature - b - c/r|`` is unbounded on the grid."""


def sphere_volume(n: int) -> float:
    """Area of the unit ``(n-1)``-sphere, ``2 pi^(n/2) / Gamma(n/2)``."""
    if n < 1:
        raise ValueError("dimension must be positive")
    k = n // 2
    if n % 2 == 0:
        # Gamma(k) = (k-1)!
        return 2.0 * math.pi ** k / math.factorial(k - 1)
    # Gamma(k + 1/2) = (2k)! sqrt(pi) / (4^k k!)
    gamma_half = math.factorial(2 * k) * math.sqrt(math.pi) / (4 ** k * math.factorial(k))
    return 2.0 * math.pi ** (n / 2.0) / gamma_half


# --------------------------------------------------------------------------
# bounded perturbations of the mean-curvature profile


class Perturbation:
    """Bounded smooth ``pert(r)`` entering ``mean_curvature = b + c/r + pert(r)/r``."""

    native_kind: Optional[int] = None
    amplitude: float = 0.0

    def __call__(self, r):
        raise NotImplementedError

    def derivative(self, r):
        raise NotImplementedError


@dataclass(frozen=True)
class ZeroPert(Perturbation):
    native_kind = _k.PERT_ZERO

    def __call__(self, r):
        return np.zeros_like(np.asarray(r, dtype=float))

    def derivative(self, r):
        return np.zeros_like(np.asarray(r, dtype=float))


@dataclass(frozen=True)
class SinLogPert(Perturbation):
    """``delta * sin(log r)``; keeps ``r |mean_curvature - b - c/r|`` bounded by ``delta``."""

    delta: float
    native_kind = _k.PERT_SIN_LOG

    @property
    def amplitude(self):
        return abs(self.delta)

    def __call__(self, r):
        return self.delta * np.sin(np.log(r))

    def derivative(self, r):
        return self.delta * np.cos(np.log(r)) / r


@dataclass(frozen=True)
class SinPert(Perturbation):
    delta: float
    native_kind = _k.PERT_SIN

    @property
    def amplitude(self):
        return abs(self.delta)

    def __call__(self, r):
        return self.delta * np.sin(r)

    def derivative(self, r):
        return self.delta * np.cos(r)


class TabulatedPert(Perturbation):
    """User-tabulated perturbation, interpolated by a cubic spline."""

    def __init__(self, radii, values):
        radii = np.asarray(radii, dtype=float)
        values = np.asarray(values, dtype=float)
        if radii.ndim != 1 or radii.shape != values.shape or np.any(np.diff(radii) <= 0):
            raise ValueError("tabulated perturbation needs strictly increasing radii")
        self._spline = CubicSpline(radii, values, extrapolate=False)
        self._deriv = self._spline.derivative()
        self.radii, self.values = radii, values
        self.amplitude = float(np.max(np.abs(values)))

    def __call__(self, r):
        out = self._spline(np.asarray(r, dtype=float))
        if np.any(np.isnan(out)):
            raise DomainError("radius outside tabulated perturbation range")
        return out

    def derivative(self, r):
        return self._deriv(np.asarray(r, dtype=float))


class CallablePert(Perturbation):
    """Arbitrary ``pert(r)``; the derivative defaults to a centered difference."""

    def __init__(self, func: Callable, deriv: Optional[Callable] = None, amplitude: float = math.nan):
        self.func, self.deriv, self.amplitude = func, deriv, amplitude

    def __call__(self, r):
        return np.asarray(self.func(np.asarray(r, dtype=float)), dtype=float)

    def derivative(self, r):
        r = np.asarray(r, dtype=float)
        if self.deriv is not None:
            return np.asarray(self.deriv(r), dtype=float)
        h = 1e-5 * np.maximum(1.0, np.abs(r))
        return (self(r + h) - self(r - h)) / (2.0 * h)


# --------------------------------------------------------------------------
# warping functions


class Warping:
    """Base class; subclasses define ``f`` on ``[r0, inf)`` for dimension ``n``."""

    def log_f(self, r, model):
        raise NotImplementedError

    def hess_coeff(self, r, model):
        """``f'/f``."""
        raise NotImplementedError

    def hess_coeff_derivative(self, r, model):
        raise NotImplementedError

    def asymptotic_gauge(self, n) -> Optional[tuple]:
        """Exact ``(b, c)`` with ``mean_curvature = b + c/r + O(1)/r``, when known in closed form."""
        return None

    def native(self, n) -> Optional[np.ndarray]:
        return None


@dataclass(frozen=True)
class Euclidean(Warping):
    def log_f(self, r, model):
        return np.log(r)

    def hess_coeff(self, r, model):
        return 1.0 / r

    def hess_coeff_derivative(self, r, model):
        return -1.0 / r ** 2

    def asymptotic_gauge(self, n):
        return 0.0, float(n - 1)

    def native(self, n):
        return np.array([_k.GEOM_EUCLIDEAN, n, 0, 0, 0, 0, 0, 0], dtype=float)


@dataclass(frozen=True)
class Hyperbolic(Warping):
    def log_f(self, r, model):
        return r + np.log1p(-np.exp(-2.0 * r)) - math.log(2.0)

    def hess_coeff(self, r, model):
        return 1.0 / np.tanh(r)

    def hess_coeff_derivative(self, r, model):
        return -1.0 / np.sinh(r) ** 2

    def asymptotic_gauge(self, n):
        return float(n - 1), 0.0

    def native(self, n):
        return np.array([_k.GEOM_HYPERBOLIC, n, 0, 0, 0, 0, 0, 0], dtype=float)


@dataclass(frozen=True)
class KappaPower(Warping):
    """``f = r^p e^(kappa r)``."""

    p: float = 1.0
    kappa: float = 0.0

    def __post_init__(self):
        if self.p < 0 or self.kappa < 0:
            raise ValueError("KappaPower needs p >= 0 and kappa >= 0")

    def log_f(self, r, model):
        return self.p * np.log(r) + self.kappa * r

    def hess_coeff(self, r, model):
        return self.kappa + self.p / r

    def hess_coeff_derivative(self, r, model):
        return -self.p / r ** 2

    def asymptotic_gauge(self, n):
        return (n - 1) * self.kappa, (n - 1) * self.p

    def native(self, n):
        return np.array([_k.GEOM_KAPPA_POWER, n, self.p, self.kappa, 0, 0, 0, 0], dtype=float)


@dataclass(frozen=True)
class ProfileDriven(Warping):
    """Geometry given by its mean curvature ``b + c/r + pert(r)/r``.

    ``f`` is recovered from ``(log f)' = mean_curvature / (n - 1)`` by adaptive
    quadrature, normalised so that ``f(r0) = f0``.
    """

    b: float = 0.0
    c: float = 0.0
    pert: Perturbation = field(default_factory=ZeroPert)
    f0: float = 1.0
    quad_tol: float = 1e-12
    declared: bool = True

    @classmethod
    def from_mean_curvature(cls, func: Callable, f0: float = 1.0, b: float = 0.0, c: float = 0.0):
        """Wrap an arbitrary mean-curvature callable (no declared asymptotics)."""
        pert = CallablePert(lambda r: r * (np.asarray(func(r)) - b - c / r))
        return cls(b=b, c=c, pert=pert, f0=f0, declared=False)

    def mean_curvature(self, r):
        r = np.asarray(r, dtype=float)
        return self.b + self.c / r + self.pert(r) / r

    def hess_coeff(self, r, model):
        return self.mean_curvature(r) / (model.n - 1)

    def hess_coeff_derivative(self, r, model):
        r = np.asarray(r, dtype=float)
        d = -self.c / r ** 2 + (self.pert.derivative(r) * r - self.pert(r)) / r ** 2
        return d / (model.n - 1)

    def log_f(self, r, model):
        r = np.asarray(r, dtype=float)
        flat = r.ravel()
        order = np.argsort(flat)
        pts = flat[order]
        n1 = model.n - 1

        def integrand(t):
            return float(self.mean_curvature(t)) / n1

        acc = np.empty_like(pts)
        total, prev = 0.0, model.r0
        for i, t in enumerate(pts):
            if t != prev:
                piece, _ = integrate.quad(integrand, prev, t, epsabs=0.0,
                                          epsrel=self.quad_tol, limit=200)
                total += piece
                prev = t
            acc[i] = total
        out = np.empty_like(flat)
        out[order] = acc + math.log(self.f0)
        return out.reshape(r.shape)

    def asymptotic_gauge(self, n):
        return (self.b, self.c) if self.declared else None

    def native(self, n):
        kind = self.pert.native_kind
        if kind is None or self.f0 <= 0:
            return None
        delta = getattr(self.pert, "delta", 0.0)
        return np.array([_k.GEOM_PROFILE, n, 0, 0, self.b, self.c, kind, delta], dtype=float)


# --------------------------------------------------------------------------
# the model


@dataclass(frozen=True)
class WarpedModel:
    n: int
    r0: float
    warping: Warping = field(default_factory=Euclidean)

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ValueError("dimension n must be an integer >= 2")
        if not self.r0 > 0:
            raise ValueError("r0 must be positive")

    @property
    def sphere_volume(self) -> float:
        return sphere_volume(self.n)

    def _check(self, r):
        r = np.asarray(r, dtype=float)
        if np.any(r < self.r0 * (1.0 - 1e-12)):
            raise DomainError(f"radius below r0={self.r0}")
        return r

    def log_f(self, r):
        return self.warping.log_f(self._check(r), self)

    def f(self, r):
        return np.exp(self.log_f(r))

    def hess_coeff(self, r):
        """Coefficient of the tangential metric in the Hessian of r, ``f'/f``."""
        return self.warping.hess_coeff(self._check(r), self)

    def mean_curvature(self, r):
        return (self.n - 1) * self.hess_coeff(r)

    def mean_curvature_derivative(self, r):
        return (self.n - 1) * self.warping.hess_coeff_derivative(self._check(r), self)

    def fp(self, r):
        return self.f(r) * self.hess_coeff(r)

    def fpp(self, r):
        h = self.hess_coeff(r)
        return self.f(r) * (self.warping.hess_coeff_derivative(np.asarray(r, float), self) + h * h)

    def radial_curvature(self, r):
        """``-f''/f``."""
        h = self.hess_coeff(r)
        return -(self.warping.hess_coeff_derivative(np.asarray(r, float), self) + h * h)

    def native(self):
        return self.warping.native(self.n)

    def check_invariants(self, grid) -> bool:
        """``f > 0`` and ``f' > 0`` on the grid (expanding end)."""
        grid = np.asarray(grid, dtype=float)
        return bool(np.all(np.isfinite(self.log_f(grid))) and np.all(self.hess_coeff(grid) > 0))


class CurvatureSample(NamedTuple):
    r: float
    mean_curv: float
    hess_coeff: float
    radial_curv: float


def curvature_sample(model: WarpedModel, r: float) -> CurvatureSample:
    return CurvatureSample(float(r), float(model.mean_curvature(r)),
                           float(model.hess_coeff(r)), float(model.radial_curvature(r)))


def mean_curvature(model: WarpedModel, r):
    """``(n - 1) f'(r)/f(r)``; raises :class:`DomainError` below ``r0``."""
    out = model.mean_curvature(r)
    return float(out) if np.ndim(out) == 0 else out


def hessian_bounds(model: WarpedModel, a: float, b: float, grid) -> bool:
    """True iff ``a/r <= f'/f <= b/r`` at every grid point."""
    grid = np.asarray(grid, dtype=float)
    h = model.hess_coeff(grid)
    slack = 1e-12 * np.abs(h)
    return bool(np.all(a / grid <= h + slack) and np.all(h <= b / grid + slack))


def convexity_constant(model: WarpedModel, grid) -> float:
    """Largest ``a`` with ``r f'/f >= a`` on the grid."""
    grid = np.asarray(grid, dtype=float)
    return float(np.min(grid * model.hess_coeff(grid)))


class GaugeFit(NamedTuple):
    b: float
    c: float
    delta: float


def fit_gauge(model: WarpedModel, grid, b_hint: Optional[float] = None,
              c_hint: Optional[float] = None) -> GaugeFit:
    """Fit ``mean_curvature ~ b + c/r`` and return ``(b, c, max r|residual|)``.

    Hints pass through verbatim.  Without hints, closed-form families use
    their exact asymptotic constants and everything else is least squares.
    """
    grid = np.unique(np.asarray(grid, dtype=float))
    if grid.size < 8 or grid[-1] < 10.0 * grid[0]:
        raise ValueError("gauge fit needs >= 8 points spanning a decade")
    dr = model.mean_curvature(grid)
    declared = model.warping.asymptotic_gauge(model.n)
    if b_hint is not None and c_hint is not None:
        b, c = float(b_hint), float(c_hint)
    elif b_hint is not None:
        b = float(b_hint)
        c = float(declared[1]) if declared else float(np.mean(grid * (dr - b)))
    elif c_hint is not None:
        c = float(c_hint)
        b = float(declared[0]) if declared else float(np.mean(dr - c / grid))
    elif declared is not None:
        b, c = map(float, declared)
    else:
        design = np.column_stack([np.ones_like(grid), 1.0 / grid])
        (b, c), *_ = np.linalg.lstsq(design, dr, rcond=None)
        b, c = float(b), float(c)
    resid = grid * np.abs(dr - b - c / grid)
    _check_bounded(grid, resid)
    return GaugeFit(b, c, float(np.max(resid)))


def _check_bounded(grid, resid):
    # envelope over four log-spaced bins must not keep growing
    edges = np.geomspace(grid[0], grid[-1], 5)
    env = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        sel = (grid >= lo) & (grid <= hi)
        if np.any(sel):
            env.append(np.max(resid[sel]))
    env = np.asarray(env)
    if env.size >= 3 and np.all(np.diff(env) > 0) and env[-1] > 3.0 * env[0] and env[-1] > 1e-6:
        raise GaugeFitError(
            f"r|mean_curvature - b - c/r| grows from {env[0]:.3g} to {env[-1]:.3g} over the grid")
