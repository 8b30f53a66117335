"""Mode-reduced energy function, its radial derivative, and the certificates built on it.

Every quantity is a level-set integral ``int_{S_r} (...) e^{-2 rho}``; for a
single angular mode these reduce to ``W(r) * (quadratic form in z_m, z_m')``
with ``W = omega f^(n-1) e^{-2 rho}``.  Values are carried as a mantissa times
``exp(log_factor)`` so decaying and growing branches stay representable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np

from .gauge import EffectivePotentials, Gauge, TransformedSolution, default_eps
from .geometry import WarpedModel, convexity_constant
from .radial import log_surface_norms

Q_CHOICES = ("q1", "q_main", "custom")


class InfeasibleHypothesis(Exception):
    """A hypothesis predicate failed; ``predicate`` names it."""

    def __init__(self, predicate: str, detail: str = ""):
        super().__init__(f"{predicate} fails" + (f": {detail}" if detail else ""))
        self.predicate = predicate
        self.detail = detail


class PreconditionViolation(Exception):
    def __init__(self, predicate: str, r: float, value: float):
        super().__init__(f"{predicate} fails at r={r:.6g} (value {value:.3g})")
        self.predicate = predicate
        self.r = r
        self.value = value


@dataclass(frozen=True)
class EnergyParams:
    """Parameters of ``F(m, r, s)``.

    ``s`` and ``s0`` default from ``mu`` and ``delta``; ``alpha`` of ``None``
    means the measured rule in :func:`select_alpha`.  ``q_custom`` is a pair
    ``(q, q')`` of callables used when ``q_choice == "custom"``.
    """

    lam: Optional[float] = None
    m: float = 0.0
    s: Optional[float] = None
    q_choice: str = "q_main"
    mu: float = 1.0
    delta: float = 0.0
    eps: Optional[float] = None
    alpha: Optional[float] = None
    s0: Optional[float] = None
    a: Optional[float] = None
    q_custom: Optional[Tuple[Callable, Callable]] = None

    def __post_init__(self):
        if self.m < 0:
            raise ValueError("m must be nonnegative")
        if self.q_choice not in Q_CHOICES:
            raise ValueError(f"q_choice must be one of {Q_CHOICES}")
        if self.q_choice == "custom" and self.q_custom is None:
            raise ValueError("q_choice='custom' needs q_custom=(q, q_prime)")
        if self.alpha is not None and self.alpha < 0:
            raise ValueError("alpha must be nonnegative")
        if self.delta < 0 or self.mu <= 0:
            raise ValueError("need delta >= 0 and mu > 0")

    @property
    def s_value(self) -> float:
        if self.s is not None:
            return self.s
        return self.mu - 0.05 * (self.mu - self.delta)

    @property
    def s0_value(self) -> float:
        if self.s0 is not None:
            return self.s0
        return self.delta + 0.05 * (min(self.mu, 1.0) - self.delta)

    @property
    def eps_value(self) -> float:
        return default_eps(self.delta) if self.eps is None else self.eps

    def gcons(self, a: float) -> bool:
        return self.mu > self.delta and 2.0 * a > self.mu + self.delta

    def gconl(self, b: float) -> bool:
        if self.mu <= self.delta:
            return False
        return self._lam() > 0.25 * b * b + (self.delta * b) ** 2 / (self.mu ** 2 - self.delta ** 2)

    def _lam(self):
        if self.lam is None:
            raise ValueError("lam is unset")
        return self.lam

    def with_(self, **kw) -> "EnergyParams":
        from dataclasses import replace
        return replace(self, **kw)


# --------------------------------------------------------------------------
# pointwise pieces


@dataclass
class _Pieces:
    r: np.ndarray
    z: np.ndarray            # z_m mantissa
    zp: np.ndarray
    log_w: np.ndarray        # log of W * (z_m scale)^2
    q: np.ndarray
    qp: np.ndarray
    ep: EffectivePotentials
    kappa_f2: np.ndarray     # kappa_l / f^2
    hess: np.ndarray         # f'/f
    delta_bar: np.ndarray


def _lam(ts, params):
    return ts.eq.lam if params.lam is None else params.lam


def _q(ep: EffectivePotentials, params: EnergyParams, r):
    if params.q_choice == "q1":
        return ep.q1(r), ep.q1_prime(r)
    if params.q_choice == "q_main":
        return ep.q_main(r), ep.q_main_prime(r)
    qf, qpf = params.q_custom
    return (np.asarray(qf(r), dtype=float) * np.ones_like(r),
            np.asarray(qpf(r), dtype=float) * np.ones_like(r))


def _pieces(ts: TransformedSolution, model: WarpedModel, gauge: Gauge,
            params: EnergyParams, r, m=None) -> _Pieces:
    r = np.atleast_1d(np.asarray(r, dtype=float))
    m = params.m if m is None else m
    if ts.gauge != gauge:
        ts = TransformedSolution(ts.base, gauge, m)
    z, zp, _, lf = ts.evaluate_scaled(r, m)
    log_f = model.log_f(r)
    log_w = (math.log(model.sphere_volume) + (model.n - 1) * log_f
             + gauge.log_weight(r) + 2.0 * lf)
    ep = EffectivePotentials(model, ts.eq.pot, gauge, _lam(ts, params), m,
                             params.delta, params.eps)
    q, qp = _q(ep, params, r)
    kappa = ts.eq.mode.kappa_l
    kappa_f2 = kappa * np.exp(-2.0 * log_f) if kappa else np.zeros_like(r)
    return _Pieces(r, z, zp, log_w, q, qp, ep, kappa_f2, model.hess_coeff(r), ep.delta_bar(r))


def _bracket(p: _Pieces, m):
    a = m * (m + 1) / p.r ** 2
    return 0.5 * (a + p.q) * p.z ** 2 + 0.5 * p.zp ** 2 - 0.5 * p.kappa_f2 * p.z ** 2


def _derivative_terms(p: _Pieces, m, s):
    """The four weighted terms of ``r^(1-s) dF/dr / W`` (mantissa form)."""
    r, z, zp, db = p.r, p.z, p.zp, p.delta_bar
    ep = p.ep
    a = m * (m + 1) / r ** 2
    lam = ep.lam
    pot = ep.pot
    tangential = (r * p.hess - 0.5 * s - 0.5 * db) * p.kappa_f2 * z * z
    radial = (2.0 * m - 0.5 * db + 0.5 * s) * zp * zp
    cross = (r * (ep.V0(r) + pot.V1(r) + pot.V2(r) + p.q - lam) + m * db / r) * zp * z
    potential = (0.5 * (s - 2.0) * a + 0.5 * r * p.qp + 0.5 * s * p.q
                 + 0.5 * db * (a + p.q)) * z * z
    return tangential, radial, cross, potential


def energy_scaled(ts, model, gauge, params: EnergyParams, r, s=None):
    """``(mantissa, log_factor)`` with ``F = mantissa * exp(log_factor)``."""
    s = params.s_value if s is None else s
    p = _pieces(ts, model, gauge, params, r)
    return _bracket(p, params.m), p.log_w + s * np.log(p.r)


def energy(ts, model, gauge, params: EnergyParams, r, s=None):
    """``F(m, r, s)`` for one angular mode."""
    mant, lf = energy_scaled(ts, model, gauge, params, r, s)
    return _physical(mant, lf, r)


def energy_derivative_scaled(ts, model, gauge, params: EnergyParams, r, s=None):
    s = params.s_value if s is None else s
    p = _pieces(ts, model, gauge, params, r)
    total = sum(_derivative_terms(p, params.m, s))
    return total, p.log_w + (s - 1.0) * np.log(p.r)


def energy_derivative(ts, model, gauge, params: EnergyParams, r, s=None):
    """Analytic ``dF/dr`` obtained by eliminating ``z_m''`` with the mode equation."""
    mant, lf = energy_derivative_scaled(ts, model, gauge, params, r, s)
    return _physical(mant, lf, r)


def _physical(mant, lf, r):
    with np.errstate(over="ignore", under="ignore"):
        out = mant * np.exp(lf)
    return float(out[0]) if np.ndim(r) == 0 else out


def energy_fd(ts, model, gauge, params, r, s=None, rel_step=1e-4, max_step=5e-3):
    """Five-point centered difference of :func:`energy`.

    The step is ``rel_step * r`` capped at ``max_step`` so oscillating traces
    stay resolved far out.
    """
    r = np.asarray(r, dtype=float)
    h = np.minimum(rel_step * r, max_step)

    def fn(t):
        return energy(ts, model, gauge, params, t, s)

    return (fn(r - 2 * h) - 8.0 * fn(r - h) + 8.0 * fn(r + h) - fn(r + 2 * h)) / (12.0 * h)


# --------------------------------------------------------------------------
# augmented energy (alpha term)


def measure_c2(ts, model, gauge, params: EnergyParams, grid) -> float:
    """Empirical constant in ``r^2 |q0 - q1 - m(m+1)/r^2| <= C2 m``."""
    m = params.m
    if m == 0:
        return 0.0
    r = np.asarray(grid, dtype=float)
    ep = EffectivePotentials(model, ts.eq.pot, gauge, _lam(ts, params), m, params.delta,
                             params.eps)
    dev = np.abs(ep.q0(r) - ep.q1(r) - m * (m + 1) / r ** 2)
    return float(np.max(r ** 2 * dev) / m)


def select_alpha(ts, model, gauge, params: EnergyParams, grid) -> float:
    """``alpha = 2 C2 (m / t) + 1`` with ``t`` the inner grid radius."""
    if params.alpha is not None:
        return params.alpha
    t = float(np.min(grid))
    return 2.0 * measure_c2(ts, model, gauge, params, grid) * params.m / t + 1.0


def augmented_energy(ts, model, gauge, params, r, alpha, s=None):
    """``F + alpha r^(s-1) int_S v_m^2 e^{-2 rho}``."""
    s = params.s_value if s is None else s
    p = _pieces(ts, model, gauge, params, r)
    mant = _bracket(p, params.m) + alpha * p.z ** 2 / p.r
    return _physical(mant, p.log_w + s * np.log(p.r), r)


def augmented_derivative(ts, model, gauge, params, r, alpha, s=None):
    s = params.s_value if s is None else s
    p = _pieces(ts, model, gauge, params, r)
    extra = alpha * ((s - 1.0 + p.delta_bar) / p.r * p.z ** 2 + 2.0 * p.z * p.zp)
    mant = sum(_derivative_terms(p, params.m, s)) + extra
    return _physical(mant, p.log_w + (s - 1.0) * np.log(p.r), r)


# --------------------------------------------------------------------------
# traces


@dataclass
class EnergyTrace:
    r: np.ndarray
    M2: np.ndarray
    N2: np.ndarray
    F: np.ndarray
    dF_analytic: np.ndarray
    dF_fd: np.ndarray
    G: np.ndarray
    residual: np.ndarray

    COLUMNS = ("r", "M2", "N2", "F", "dF_analytic", "dF_fd", "G", "residual")

    @property
    def MN(self):
        return self.M2 + self.N2

    @property
    def scale(self) -> float:
        return float(np.max(np.abs(self.F))) if self.F.size else 0.0

    def derivative_mismatch(self) -> float:
        """Max of ``|dF - dF_fd| / max(1e-6 |dF_fd|, 1e-9 scale)``; at most 1 is consistent."""
        allow = np.maximum(1e-6 * np.abs(self.dF_fd), 1e-9 * self.scale)
        err = np.abs(self.dF_analytic - self.dF_fd)
        if not np.any(allow > 0):
            return 0.0 if not np.any(err) else math.inf
        return float(np.max(np.where(allow > 0, err / np.where(allow > 0, allow, 1.0),
                                     np.where(err > 0, math.inf, 0.0))))

    def columns(self):
        return [getattr(self, c) for c in self.COLUMNS]


def build_trace(ts, model, gauge, params: EnergyParams, grid, rel_step=1e-4) -> EnergyTrace:
    r = np.asarray(grid, dtype=float)
    lm, ln = log_surface_norms(ts.base, r)
    F = energy(ts, model, gauge, params, r)
    dF = energy_derivative(ts, model, gauge, params, r)
    dF_fd = energy_fd(ts, model, gauge, params, r, rel_step=rel_step)
    G = g_values(ts, model, gauge, r)
    res = ts.residual(r) if ts.m == params.m else TransformedSolution(
        ts.base, gauge, params.m).residual(r)
    return EnergyTrace(r, np.exp(lm), np.exp(ln), F, dF, dF_fd, G, res)


# --------------------------------------------------------------------------
# certificates


def _dense_grid(ts, R, R_max, points):
    lam = ts.eq.lam
    q_far = lam - float(ts.eq.pot.V(R_max)) - 0.25 * float(ts.eq.model.mean_curvature(R_max)) ** 2
    count = points
    if q_far > 0:
        count = max(points, int(20 * (R_max - R) * math.sqrt(q_far) / (2 * math.pi)) + 1)
    return np.linspace(R, R_max, count)


def _log_abs(x):
    with np.errstate(divide="ignore"):
        return np.log(np.abs(x))


@dataclass
class Certificate:
    verdict: Optional[bool]
    first_violation_r: Optional[float] = None
    s: float = math.nan
    points: int = 0
    reason: str = ""


def _feasible_s(params: EnergyParams, b: float):
    """Pick ``s`` so that ``lam > b^2/4 + delta^2 b^2/(s^2 - delta^2)``, or ``None``."""
    lam, d = params._lam(), params.delta

    def ok(s):
        return s > d and lam > 0.25 * b * b + (d * b) ** 2 / (s * s - d * d)

    s = params.s_value
    if ok(s) or params.s is not None:
        return s if ok(s) else None
    # default s is too far from mu; move toward mu while staying below it
    gap = lam - 0.25 * b * b
    if gap <= 0:
        return None
    s_min = math.sqrt(d * d + (d * b) ** 2 / gap) if d > 0 else 0.0
    if s_min >= params.mu:
        return None
    s = 0.5 * (s_min + params.mu)
    return s if ok(s) else None


def check_feasibility(ts, model, gauge, params: EnergyParams, R, R_max) -> dict:
    a = params.a if params.a is not None else convexity_constant(model, np.linspace(R, R_max, 512))
    return {"a": a, "gcons": params.gcons(a), "gconl": params.gconl(gauge.b)}


def certify_monotone(ts, model, gauge, params: EnergyParams, R, R_max, points=2000,
                     margin=1e-9) -> Certificate:
    """Check ``dF/dr > -margin * max|F|`` on a dense grid of ``[R, R_max]``.

    Raises :class:`InfeasibleHypothesis` when the hypotheses fail.
    """
    feas = check_feasibility(ts, model, gauge, params, R, R_max)
    for key in ("gcons", "gconl"):
        if not feas[key]:
            raise InfeasibleHypothesis(key, f"a={feas['a']:.6g}, delta={params.delta}, "
                                            f"mu={params.mu}, lam={params.lam}")
    s = _feasible_s(params, gauge.b)
    if s is None:
        raise InfeasibleHypothesis("gconl_s", f"no admissible s for lam={params.lam}")
    r = _dense_grid(ts, R, R_max, points)
    p = _pieces(ts, model, gauge, params, r)
    dmant = sum(_derivative_terms(p, params.m, s))
    fmant = _bracket(p, params.m)
    log_d = _log_abs(dmant) + p.log_w + (s - 1.0) * np.log(r)
    log_f = _log_abs(fmant) + p.log_w + s * np.log(r)
    if not np.any(np.isfinite(log_f)) and not np.any(np.isfinite(log_d)):
        return Certificate(None, None, s, r.size, "degenerate: zero solution")
    log_scale = np.max(log_f[np.isfinite(log_f)]) if np.any(np.isfinite(log_f)) else -math.inf
    bad = (dmant < 0) & (log_d > math.log(margin) + log_scale)
    idx = np.nonzero(bad)[0]
    if idx.size:
        return Certificate(False, float(r[idx[0]]), s, r.size, "derivative negative")
    return Certificate(True, None, s, r.size, "")


@dataclass
class Positivity:
    found_r: Optional[float]
    F_value: float
    gq_margin: float = math.nan


def gq_margin(ts, model, gauge, params: EnergyParams, grid) -> Tuple[float, float]:
    """``min r (q - lam + V0 + V1 + V2)`` over ``grid`` and where it is attained."""
    r = np.asarray(grid, dtype=float)
    p = _pieces(ts, model, gauge, params, r)
    val = r * (p.q - p.ep.lam + p.ep.V0(r) + ts.eq.pot.V(r))
    i = int(np.argmin(val))
    return float(val[i]), float(r[i])


def initial_positivity(ts, model, gauge, params: EnergyParams, R, R_max=None, points=2000,
                       significance=1e-6) -> Positivity:
    """First ``r`` in ``[R, R_max]`` with ``F(r, 0) > 0``.

    ``F`` counts as positive only above ``significance`` times the largest term
    of its bracket, which keeps rounding noise out of the verdict.
    """
    R_max = ts.r_max if R_max is None else R_max
    r = _dense_grid(ts, R, R_max, points)
    eps_q, r_eps = gq_margin(ts, model, gauge, params, r)
    if eps_q < -1e-12 * max(1.0, abs(_lam(ts, params))):
        raise PreconditionViolation("gq", r_eps, eps_q)
    p = _pieces(ts, model, gauge, params, r)
    m = params.m
    a = m * (m + 1) / r ** 2
    terms = [0.5 * (a + p.q) * p.z ** 2, 0.5 * p.zp ** 2, -0.5 * p.kappa_f2 * p.z ** 2]
    mant = terms[0] + terms[1] + terms[2]
    scale = np.maximum.reduce([np.abs(t) for t in terms])
    hit = np.nonzero((mant > significance * scale) & (scale > 0))[0]
    if hit.size:
        i = hit[0]
        with np.errstate(over="ignore"):
            return Positivity(float(r[i]), float(mant[i] * np.exp(p.log_w[i])), eps_q)
    return Positivity(None, 0.0, eps_q)


@dataclass
class GrowthVerdict:
    verdict: Optional[bool]
    fitted_floor: float
    window_minima: np.ndarray = field(default_factory=lambda: np.empty(0))
    window_argmin: np.ndarray = field(default_factory=lambda: np.empty(0))


def growth_verdict(sol, model, mu, window, samples_per_window=2000) -> GrowthVerdict:
    """Lower-envelope test of ``r^mu (M^2 + N^2)`` over dyadic sub-windows."""
    r1, r2 = map(float, window)
    if r2 < 10.0 * r1 * (1 - 1e-12):
        raise ValueError("window must span at least one decade")
    edges = [r1]
    while edges[-1] * 2.0 < r2 * (1 - 1e-12):
        edges.append(edges[-1] * 2.0)
    edges.append(r2)
    mins, where = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        r = np.linspace(lo, hi, samples_per_window)
        lm, ln = log_surface_norms(sol, r)
        val = mu * np.log(r) + np.logaddexp(lm, ln)
        i = int(np.argmin(val))
        mins.append(val[i])
        where.append(r[i])
    mins, where = np.array(mins), np.array(where)
    if not np.all(np.isfinite(mins)):
        return GrowthVerdict(None, math.nan, mins, where)
    nondecreasing = bool(np.all(np.diff(mins) >= -1e-12 * np.abs(mins[1:]).clip(1.0)))
    doubled = bool(mins[-1] - mins[0] > math.log(2.0))
    slope = float(np.polyfit(np.log(where), mins, 1)[0])
    with np.errstate(over="ignore"):
        return GrowthVerdict(nondecreasing and doubled, slope, np.exp(mins), where)


def g_values(ts, model, gauge, t):
    """``G(t) = t^(1-2m) int_{S_t} v_m^2 e^{-2 rho} = t W z^2``."""
    lg = g_log(ts, model, gauge, t)
    with np.errstate(under="ignore", over="ignore"):
        return np.exp(lg)


def g_log(ts, model, gauge, t):
    t = np.atleast_1d(np.asarray(t, dtype=float))
    z, _, _, lf = (ts if ts.gauge == gauge else TransformedSolution(ts.base, gauge)
                   ).evaluate_scaled(t, 0.0)
    return (np.log(t) + math.log(model.sphere_volume) + (model.n - 1) * model.log_f(t)
            + gauge.log_weight(t) + 2.0 * lf + 2.0 * _log_abs(z))


@dataclass
class GProbe:
    t: np.ndarray
    G: np.ndarray
    eps: float
    degenerate: bool = False


def g_function_probe(ts, gauge, model, t_grid, chunks=16) -> GProbe:
    """Fit ``log G`` against ``t``; ``eps`` is minus the slope.

    Zeros of ``z`` are bridged by fitting the per-chunk maxima of ``log G``.
    """
    t = np.asarray(t_grid, dtype=float)
    lg = g_log(ts, model, gauge, t)
    G = np.exp(np.clip(lg, -745.0, 709.0))
    G[~np.isfinite(lg)] = 0.0
    xs, ys = [], []
    for part_t, part_g in zip(np.array_split(t, chunks), np.array_split(lg, chunks)):
        if part_t.size and np.any(np.isfinite(part_g)):
            i = int(np.argmax(part_g))
            xs.append(part_t[i])
            ys.append(part_g[i])
    if len(xs) < 2:
        return GProbe(t, G, math.nan, True)
    return GProbe(t, G, -float(np.polyfit(xs, ys, 1)[0]))


# --------------------------------------------------------------------------
# sub-exponential decay probe


@dataclass(frozen=True)
class DecayProbe:
    """Weight ``e^{k r^theta}`` applied to ``v``."""

    k: float = 10.0
    theta: float = 0.9
    sigma: float = 0.5

    def __post_init__(self):
        if self.k <= 0 or not 0 < self.theta < 1 or self.sigma >= 1:
            raise ValueError("need k > 0, 0 < theta < 1, sigma < 1")

    def rho_bar_p(self, r):
        return self.k * self.theta * np.asarray(r, dtype=float) ** (self.theta - 1.0)

    def Vbar0(self, r, model, gauge):
        r = np.asarray(r, dtype=float)
        k, th = self.k, self.theta
        return (-k * k * th * th * r ** (2 * th - 2) - k * (1 - th) * th * r ** (th - 2)
                + k * r ** (th - 1) * (model.mean_curvature(r) - 2.0 * gauge.rho_p(r)))

    def qbar(self, r, lam, b, pot):
        r = np.asarray(r, dtype=float)
        k, th = self.k, self.theta
        return (lam - 0.25 * b * b - pot.V2(r) + k * k * th * th * r ** (2 * th - 2)
                + k * th * (1 - th) * r ** (th - 2))

    def cancellation(self, r, lam, model, gauge, pot):
        """``Vbar0 + qbar - (lam - b^2/4 - V2) - k r^(theta-1)(mean_curv - 2 rho')``; zero up to rounding."""
        r = np.asarray(r, dtype=float)
        return (self.Vbar0(r, model, gauge) + self.qbar(r, lam, gauge.b, pot)
                - (lam - 0.25 * gauge.b ** 2 - pot.V2(r))
                - self.k * r ** (self.theta - 1) * (model.mean_curvature(r) - 2.0 * gauge.rho_p(r)))


def _log_ge(sa, la, sb, lb, rtol=1e-12):
    """Elementwise ``a >= b`` for numbers given as (sign, log|x|)."""
    a_big = la >= lb
    out = np.empty(sa.shape, dtype=bool)
    same = sa == sb
    pos = same & (sa > 0)
    neg = same & (sa < 0)
    close = np.abs(la - lb) <= rtol
    out[:] = sa > sb
    out[pos] = a_big[pos] | close[pos]
    out[neg] = (~a_big[neg]) | close[neg]
    zero = same & (sa == 0)
    out[zero] = True
    return out


@dataclass
class DecayVerdict:
    k: float
    monotone: Optional[bool]
    first_violation_r: Optional[float] = None


def decay_probe(ts, model, gauge, probe: DecayProbe, params: EnergyParams, window,
                ks=None, points=2000):
    """Monotonicity of ``r^s0 Fbar(r)`` for ``vbar = e^{k r^theta} v`` and each ``k``."""
    ks = (10.0, 30.0, 100.0) if ks is None else ks
    r = np.linspace(float(window[0]), float(window[1]), points)
    z, zp, _, lf = (ts if ts.gauge == gauge else TransformedSolution(ts.base, gauge)
                    ).evaluate_scaled(r, 0.0)
    log_f = model.log_f(r)
    kappa = ts.eq.mode.kappa_l
    kappa_f2 = kappa * np.exp(-2.0 * log_f) if kappa else np.zeros_like(r)
    lam = _lam(ts, params)
    base_log = (params.s0_value * np.log(r) + math.log(model.sphere_volume)
                + (model.n - 1) * log_f + gauge.log_weight(r) + 2.0 * lf)
    out = []
    for k in ks:
        pr = DecayProbe(k, probe.theta, probe.sigma)
        w = z
        wp = zp + pr.rho_bar_p(r) * z
        qb = pr.qbar(r, lam, gauge.b, ts.eq.pot)
        mant = 0.5 * qb * w * w + 0.5 * wp * wp - 0.5 * kappa_f2 * w * w
        if not np.any(mant):
            out.append(DecayVerdict(k, None))
            continue
        logv = base_log + 2.0 * k * r ** probe.theta + _log_abs(mant)
        sg = np.sign(mant)
        ok = _log_ge(sg[1:], logv[1:], sg[:-1], logv[:-1])
        bad = np.nonzero(~ok)[0]
        out.append(DecayVerdict(k, not bad.size, float(r[bad[0] + 1]) if bad.size else None))
    return out
