"""Closed-form eigenvalue-exclusion thresholds and hypothesis predicates."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

# relative distance to a pole inside which a warning is issued
POLE_WARN = 1e-8


class PoleError(ZeroDivisionError):
    """A threshold formula was evaluated at (or past) its pole."""


class NearPoleWarning(RuntimeWarning):
    pass


def _guard(den: float, ref: float, name: str) -> None:
    if den <= 0.0:
        raise PoleError(f"{name}: denominator {den:.3g} is not positive")
    if den < POLE_WARN * max(ref, 1.0):
        warnings.warn(f"{name}: within {den:.3g} of the pole; value is ill-conditioned",
                      NearPoleWarning, stacklevel=3)


# flat forms: delta is the perturbation bound, mu the growth exponent

def e0_flat(b: float, delta: float, mu: float = 1.0) -> float:
    if delta < 0 or mu <= 0:
        raise ValueError("need delta >= 0 and mu > 0")
    if delta == 0.0:
        return 0.25 * b * b
    den = mu * mu - delta * delta
    _guard(den, mu * mu, "E0")
    return 0.25 * b * b + delta * delta * b * b / den


def e1_flat(b: float, delta: float) -> float:
    if delta < 0:
        raise ValueError("need delta >= 0")
    if delta == 0.0:
        return 0.25 * b * b
    den = 4.0 * (1.0 - delta * delta)
    _guard(den, 4.0, "E1")
    return 0.25 * b * b + delta * delta * b * b / den


def e2_flat(b: float, delta: float) -> float:
    if delta < 0:
        raise ValueError("need delta >= 0")
    den = 4.0 * (1.0 - delta)
    _guard(den, 4.0, "E2")
    return b * b / den


# kappa forms: x = (n-1)(b-a) plays the role of the perturbation

def _x(n, b, a):
    x = (n - 1) * (b - a)
    if x < 0:
        raise ValueError("need b >= a")
    return x


def e0_kappa(n: int, kappa: float, a: float, b: float) -> float:
    x = _x(n, b, a)
    base = kappa * kappa * (n - 1) ** 2
    if x == 0.0:
        return 0.25 * base
    den = 4.0 - x * x
    _guard(den, 4.0, "E0")
    return 0.25 * base + base * x * x / den


def e1_kappa(n: int, kappa: float, a: float, b: float) -> float:
    x = _x(n, b, a)
    base = kappa * kappa * (n - 1) ** 2
    if x == 0.0:
        return 0.25 * base
    den = 4.0 * (4.0 - x * x)
    _guard(den, 16.0, "E1")
    return 0.25 * base + base * x * x / den


def e2_kappa(n: int, kappa: float, a: float, b: float) -> float:
    x = _x(n, b, a)
    base = kappa * kappa * (n - 1) ** 2
    den = 2.0 * (2.0 - x)
    _guard(den, 4.0, "E2")
    return base / den


def crossover(b: float, lo: float = 1e-6, hi: float = 0.9) -> float:
    """Perturbation size where the flat ``E0`` (``mu = 1``) meets ``E2``, by bisection."""
    if b <= 0:
        raise ValueError("crossover needs b > 0")

    def gap(d):
        return e0_flat(b, d, 1.0) - e2_flat(b, d)

    g_lo = gap(lo)
    if g_lo * gap(hi) > 0:
        raise ValueError("no sign change on the bracket")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        g_mid = gap(mid)
        if g_mid == 0.0:
            return mid
        if (g_mid < 0) == (g_lo < 0):
            lo, g_lo = mid, g_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# --------------------------------------------------------------------------


@dataclass(frozen=True)
class BoundInput:
    """Hypothesis constants.  ``kappa`` selects the kappa form when set."""

    n: int = 3
    b: float = 1.0
    c: float = 0.0
    delta: float = 0.0
    mu: float = 1.0
    a: float = 1.0
    kappa: Optional[float] = None

    def __post_init__(self):
        if self.delta < 0 or self.mu <= 0:
            raise ValueError("need delta >= 0 and mu > 0")
        if self.n < 2:
            raise ValueError("n must be at least 2")


def feasibility(inp: BoundInput) -> dict:
    """Every hypothesis predicate, by name, plus the regimes that apply."""
    n, a, b, d, mu = inp.n, inp.a, inp.b, inp.delta, inp.mu
    x = (n - 1) * (b - a)
    rec = {
        "gcons": mu > d and 2.0 * a > mu + d,
        "gconl_form": mu > d,
        "delta_lt_1": d < 1.0,
        "x_lt_2": x < 2.0,
        "a_le_b": a <= b,
        "convexity_ratio": (n + 1) * a / (n - 1) > b,
    }
    rec["mu_threshold"] = 0.5 * x
    rec["mu_above_threshold"] = mu > 0.5 * x
    regimes = []
    if b == 0 or (b == a and d == 0):
        regimes.append("unperturbed")
    if rec["a_le_b"] and rec["convexity_ratio"]:
        regimes.append("convexity")
    if 0.5 * x < 1.0:
        regimes.append("half_x_lt_1")
    rec["regimes"] = ";".join(regimes)
    return rec


@dataclass
class BoundSet:
    E0: float
    E1: float
    E2: float
    feasible: dict = field(default_factory=dict)

    @property
    def ordered(self) -> bool:
        return self.E1 <= self.E0 and self.E1 <= self.E2


def _safe(fn, *args):
    try:
        return fn(*args)
    except PoleError:
        return math.nan


def bounds(inp: BoundInput) -> BoundSet:
    """The three thresholds for ``inp``; ``nan`` where a formula is past its pole."""
    if inp.kappa is not None:
        args = (inp.n, inp.kappa, inp.a, inp.b)
        vals = (_safe(e0_kappa, *args), _safe(e1_kappa, *args), _safe(e2_kappa, *args))
    else:
        vals = (_safe(e0_flat, inp.b, inp.delta, inp.mu), _safe(e1_flat, inp.b, inp.delta),
                _safe(e2_flat, inp.b, inp.delta))
    return BoundSet(*vals, feasible=feasibility(inp))
