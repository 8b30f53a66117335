"""Kernel backend selection.

The compiled extension is used when it imports and the coefficients are
expressible as a native descriptor; otherwise the pure-Python kernel runs.
Set ``WARPSPEC_PURE_PYTHON=1`` to force the fallback.
"""

import os

import numpy as np

from . import _dopri_py

try:
    if os.environ.get("WARPSPEC_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("pure-Python backend requested")
    from ._dopri_c import integrate_native as _integrate_native_c
    BACKEND = "cython"
except ImportError:
    _integrate_native_c = None
    BACKEND = "python"


def integrate_native(geom, pot, n, lam, kappa_l, y0, yp0, logf0, r_a, r_b, tol,
                     wave_frac=0.1, backend=None):
    """Run the integrator on a native (geometry, potential) descriptor."""
    geom = np.ascontiguousarray(geom, dtype=float)
    pot = np.ascontiguousarray(np.reshape(pot, (-1, 4)), dtype=float)
    backend = backend or BACKEND
    if backend == "cython":
        if _integrate_native_c is None:
            raise RuntimeError("compiled kernel is not available")
        return _integrate_native_c(geom, pot, float(n), float(lam), float(kappa_l),
                                   float(y0), float(yp0), float(logf0),
                                   float(r_a), float(r_b), float(tol), float(wave_frac))
    coeffs = _dopri_py.native_coefficients(geom, pot)
    return _dopri_py.integrate(coeffs, n, lam, kappa_l, y0, yp0, logf0, r_a, r_b, tol,
                               wave_frac)


def integrate_callable(coeffs, n, lam, kappa_l, y0, yp0, logf0, r_a, r_b, tol,
                       wave_frac=0.1):
    """Run the pure-Python integrator on ``coeffs(r) -> (mean_curvature, V)``."""
    return _dopri_py.integrate(coeffs, n, lam, kappa_l, y0, yp0, logf0, r_a, r_b, tol,
                               wave_frac)
