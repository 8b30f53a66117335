"""Shooting scan over a grid of spectral parameters.

Each grid point is integrated outward and classified by the slope of
``log(M^2 + N^2)`` over the last decade.  Below the essential-spectrum bottom
the regular solution grows for every non-eigenvalue, so candidates are located
by bisection on the sign of the normalised Wronskian between the outward
solution and the inward recessive branch at a matching radius.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

import numpy as np
from scipy.integrate import trapezoid

from .geometry import WarpedModel, fit_gauge, GaugeFitError
from .radial import (AngularMode, IntegrationError, Potential, decaying_slope,
                     integrate, log_surface_norms, separate)
from .thresholds import PoleError, e0_flat

CLASSES = ("decaying", "oscillatory", "growing", "failed")


@dataclass(frozen=True)
class ScanConfig:
    """``lambda_range`` is sampled as ``lo + k (hi - lo)/steps`` for ``k = 1..steps``."""

    lambda_range: Sequence[float]
    steps: int = 50
    mode: AngularMode = AngularMode(0)
    r_max: float = 200.0
    decay_criterion: float = 0.05
    refine: int = 40
    tol: float = 1e-10
    seed: tuple = (1.0, 0.0)
    r_match: Optional[float] = None
    match_tol: float = 1e-6

    def __post_init__(self):
        lo, hi = map(float, self.lambda_range)
        if not lo < hi:
            raise ValueError("lambda_range must satisfy lambda_min < lambda_max")
        if self.steps < 2:
            raise ValueError("steps must be at least 2")
        if self.refine < 0 or self.decay_criterion <= 0:
            raise ValueError("need refine >= 0 and decay_criterion > 0")

    def grid(self) -> np.ndarray:
        lo, hi = map(float, self.lambda_range)
        return lo + (hi - lo) * np.arange(1, self.steps + 1) / self.steps

    def validate(self, model: WarpedModel) -> None:
        if self.r_max < 100.0 * model.r0:
            raise ValueError("r_max must be at least 100 r0")


@dataclass
class ScanResult:
    lam: float
    tail_slope: float
    l2_tail: float
    classification: str
    excluded_by: str = ""
    refined: bool = False
    wronskian: float = math.nan
    error: str = ""
    # slope within 20% of the decay criterion: low-confidence verdict
    near_boundary: bool = False


class DegenerateFit(ValueError):
    pass


def classify_tail(sol, model: WarpedModel, window, criterion: float = 0.05, samples: int = 800):
    """Least-squares slope of ``log(M^2 + N^2)`` against ``r`` on ``window``."""
    r1, r2 = map(float, window)
    if r2 < math.sqrt(10.0) * r1 * (1 - 1e-12):
        raise ValueError("window must span at least half a decade")
    r = np.linspace(r1, r2, samples)
    lm, ln = log_surface_norms(sol, r)
    lmn = np.logaddexp(lm, ln)
    if not np.all(np.isfinite(lmn)):
        raise DegenerateFit("M^2 + N^2 vanishes on the window")
    slope = float(np.polyfit(r, lmn, 1)[0])
    if slope < -criterion:
        cls = "decaying"
    elif slope > criterion:
        cls = "growing"
    else:
        cls = "oscillatory"
    return slope, cls


def _l2_tail(sol, model, window, samples=800, log_shift=0.0):
    """``int y^2 f^(n-1) dr`` over the window (log-sum-exp trapezoid).

    ``log_shift`` rescales ``y^2`` by ``exp(log_shift)`` before summing.
    """
    r = np.linspace(float(window[0]), float(window[1]), samples)
    lm, _ = log_surface_norms(sol, r)
    lw = lm - math.log(model.sphere_volume) + log_shift
    top = np.max(lw)
    if not np.isfinite(top):
        return 0.0
    with np.errstate(over="ignore"):
        return float(trapezoid(np.exp(lw - top), r) * math.exp(top)) if top < 700 else math.inf


def essential_bottom(model: WarpedModel, pot: Potential, r: float) -> float:
    """``V + (mean curvature)^2 / 4`` at ``r`` (its limit is the continuum edge)."""
    return float(pot.V(r)) + 0.25 * float(model.mean_curvature(r)) ** 2


def default_bounds(model: WarpedModel, r_max: float) -> Dict[str, float]:
    """Thresholds applicable to ``model`` with ``mu = 1`` from its gauge fit."""
    try:
        fit = fit_gauge(model, np.geomspace(max(model.r0, r_max / 100.0), r_max, 200))
    except GaugeFitError:
        return {}
    try:
        return {"E0": e0_flat(fit.b, fit.delta, 1.0)}
    except PoleError:
        return {}


class _Shooter:
    def __init__(self, model, pot, cfg: ScanConfig, tol: float):
        self.model, self.pot, self.cfg, self.tol = model, pot, cfg, tol
        self.r_match = (cfg.r_match if cfg.r_match is not None
                        else model.r0 + 0.1 * (cfg.r_max - model.r0))

    def eq(self, lam):
        return separate(self.model, self.pot, lam, self.cfg.mode)

    def outward(self, lam, r_end=None):
        return integrate(self.eq(lam), self.cfg.seed,
                         (self.model.r0, self.cfg.r_max if r_end is None else r_end), self.tol)

    def inward(self, lam):
        eq = self.eq(lam)
        return integrate(eq, (1.0, decaying_slope(eq, self.cfg.r_max)),
                         (self.cfg.r_max, self.r_match), self.tol)

    def match(self, lam):
        """Normalised Wronskian at ``r_match`` and the inward branch.

        Also returns ``log(|y_out| / |y_in|)`` there, which glues the branches.
        """
        inward = self.inward(lam)
        out = self.outward(lam, self.r_match).evaluate_scaled(self.r_match)
        inn = inward.evaluate_scaled(self.r_match)
        yo, ypo, yi, ypi = out.y[0], out.yp[0], inn.y[0], inn.yp[0]
        no, ni = math.hypot(yo, ypo), math.hypot(yi, ypi)
        wr = (yo * ypi - ypo * yi) / (no * ni)
        glue = math.log(no) - math.log(ni) + (out.log_scale[0] - inn.log_scale[0])
        return wr, inward, glue

    def wronskian(self, lam):
        return self.match(lam)[0]

    def bisect(self, lo, hi, depth):
        w_lo = self.wronskian(lo)
        for _ in range(depth):
            mid = 0.5 * (lo + hi)
            w_mid = self.wronskian(mid)
            if w_mid == 0.0:
                return mid
            if (w_mid < 0) == (w_lo < 0):
                lo, w_lo = mid, w_mid
            else:
                hi = mid
        return 0.5 * (lo + hi)


def _record(sol, model, cfg, lam, window, bounds, refined=False, wr=math.nan, log_shift=0.0):
    slope, cls = classify_tail(sol, model, window, cfg.decay_criterion)
    rec = ScanResult(lam, slope, _l2_tail(sol, model, window, log_shift=log_shift), cls,
                     refined=refined, wronskian=wr)
    rec.near_boundary = abs(abs(slope) - cfg.decay_criterion) < 0.2 * cfg.decay_criterion
    if cls == "decaying":
        over = [name for name, val in sorted(bounds.items()) if math.isfinite(val) and lam > val]
        rec.excluded_by = ";".join(over)
    return rec


def refine_candidate(model, pot, cfg: ScanConfig, lo, hi, tol=None, bounds=None) -> ScanResult:
    """Bisect the matching Wronskian on ``[lo, hi]`` and classify the glued solution."""
    sh = _Shooter(model, pot, cfg, cfg.tol if tol is None else tol)
    lam = sh.bisect(lo, hi, cfg.refine)
    wr, inward, glue = sh.match(lam)
    window = (cfg.r_max / 10.0, cfg.r_max)
    if abs(wr) > cfg.match_tol:
        # sign change without a matching zero: not an eigenvalue
        return ScanResult(lam, math.nan, math.nan, "oscillatory", refined=True, wronskian=wr,
                          error="wronskian sign change without a zero")
    # past r_match the glued solution is the recessive branch, scaled to the seed
    return _record(inward, model, cfg, lam, (max(window[0], sh.r_match), window[1]),
                   bounds or {}, refined=True, wr=wr, log_shift=2.0 * glue)


def scan(model: WarpedModel, pot: Potential, cfg: ScanConfig,
         bounds: Optional[Dict[str, float]] = None) -> List[ScanResult]:
    """Classify every grid value; refined candidates are merged in ``lam`` order."""
    cfg.validate(model)
    if cfg.mode.n != model.n:
        cfg = ScanConfig(**{**cfg.__dict__, "mode": AngularMode(cfg.mode.l, model.n)})
    bounds = default_bounds(model, cfg.r_max) if bounds is None else bounds
    sh = _Shooter(model, pot, cfg, cfg.tol)
    window = (cfg.r_max / 10.0, cfg.r_max)
    edge = essential_bottom(model, pot, cfg.r_max)
    records: List[ScanResult] = []
    wr_prev, lam_prev = None, None
    for lam in cfg.grid():
        lam = float(lam)
        try:
            rec = _record(sh.outward(lam), model, cfg, lam, window, bounds)
        except (IntegrationError, DegenerateFit) as exc:
            records.append(ScanResult(lam, math.nan, math.nan, "failed", error=str(exc)))
            wr_prev = None
            continue
        records.append(rec)
        if lam < edge and cfg.refine > 0:
            try:
                wr = sh.wronskian(lam)
            except IntegrationError:
                wr = None
            if wr is not None and wr_prev is not None and (wr < 0) != (wr_prev < 0):
                try:
                    records.append(refine_candidate(model, pot, cfg, lam_prev, lam, bounds=bounds))
                except (IntegrationError, DegenerateFit) as exc:
                    records.append(ScanResult(0.5 * (lam + lam_prev), math.nan, math.nan,
                                              "failed", refined=True, error=str(exc)))
            wr_prev, lam_prev = wr, lam
        else:
            wr_prev = None
    records.sort(key=lambda r: r.lam)
    return records


def candidates(results: Sequence[ScanResult]) -> List[ScanResult]:
    return [r for r in results if r.classification == "decaying"]
