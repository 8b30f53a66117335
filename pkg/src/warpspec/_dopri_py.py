"""Pure-Python Dormand-Prince 5(4) kernel for the radial mode equation.

The integrated state is ``(y, y', L)`` with ``L = log f`` and

    y'' = -dr(r) y' - (lam - V(r) - kappa_l exp(-2L)) y,    L' = dr(r) / (n - 1).

``(y, y')`` is kept inside a safe floating-point band by exact power-of-two
rescaling; the exponent in force during each step is returned alongside the
dense-output coefficients.  ``_dopri_c.pyx`` implements the same arithmetic
for native coefficient descriptors.
"""

import math

import numpy as np

# Butcher tableau, error weights and dense-output weights (Hairer & Wanner).
C2, C3, C4, C5 = 0.2, 0.3, 0.8, 8.0 / 9.0
A21 = 0.2
A31, A32 = 3.0 / 40.0, 9.0 / 40.0
A41, A42, A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
A51, A52, A53, A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
A61, A62, A63, A64, A65 = (9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0,
                           49.0 / 176.0, -5103.0 / 18656.0)
A71, A73, A74, A75, A76 = (35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0,
                           -2187.0 / 6784.0, 11.0 / 84.0)
E1, E3, E4, E5, E6, E7 = (71.0 / 57600.0, -71.0 / 16695.0, 71.0 / 1920.0,
                          -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0)
D1, D3, D4, D5, D6, D7 = (-12715105075.0 / 11282082432.0, 87487479700.0 / 32700410799.0,
                          -10690763975.0 / 1880347072.0, 701980252875.0 / 199316789632.0,
                          -1453857185.0 / 822651844.0, 69997945.0 / 29380423.0)

# geometry descriptor kinds
GEOM_EUCLIDEAN, GEOM_HYPERBOLIC, GEOM_KAPPA_POWER, GEOM_PROFILE = 0, 1, 2, 3
PERT_ZERO, PERT_SIN_LOG, PERT_SIN = 0, 1, 2
# potential term kinds
POT_POWER, POT_GAUSSIAN = 0, 1

STATUS_OK, STATUS_COLLAPSE, STATUS_NONFINITE, STATUS_MAX_STEPS = 0, 1, 2, 3

RESCALE_HI = 2.0 ** 400
RESCALE_LO = 2.0 ** -400


def native_coefficients(geom, pot):
    """Return ``coeffs(r) -> (dr, V)`` evaluating a native descriptor."""
    kind = int(geom[0])
    n1 = geom[1] - 1.0
    p, kappa, b, c = geom[2], geom[3], geom[4], geom[5]
    pert_kind, pert_delta = int(geom[6]), geom[7]
    terms = [(int(t[0]), t[1], t[2], t[3]) for t in pot]

    def coeffs(r):
        if kind == GEOM_EUCLIDEAN:
            dr = n1 / r
        elif kind == GEOM_HYPERBOLIC:
            dr = n1 / math.tanh(r)
        elif kind == GEOM_KAPPA_POWER:
            dr = n1 * (kappa + p / r)
        else:
            if pert_kind == PERT_SIN_LOG:
                pert = pert_delta * math.sin(math.log(r))
            elif pert_kind == PERT_SIN:
                pert = pert_delta * math.sin(r)
            else:
                pert = 0.0
            dr = b + c / r + pert / r
        v = 0.0
        for tk, t1, t2, t3 in terms:
            if tk == POT_POWER:
                v += t1 * r ** (-t2)
            else:
                x = (r - t2) / t3
                v -= t1 * math.exp(-x * x)
        return dr, v

    return coeffs


def integrate(coeffs, n, lam, kappa_l, y0, yp0, logf0, r_a, r_b, tol,
              wave_frac=0.1, max_steps=5_000_000):
    """Integrate from ``r_a`` to ``r_b`` (either direction).

    Returns ``(r_start, h, cont, e2, nfev, status, r_fail)`` where ``cont`` has
    shape ``(nsteps, 5, 3)`` and ``e2[i]`` is the binary exponent such that the
    physical ``(y, y')`` on step ``i`` equals the dense value times ``2**e2[i]``.
    """
    n1 = n - 1.0
    direction = 1.0 if r_b >= r_a else -1.0
    span = abs(r_b - r_a)

    def rhs(r, y, yp, lf):
        dr, v = coeffs(r)
        q = lam - v - kappa_l * math.exp(-2.0 * lf)
        return yp, -dr * yp - q * y, dr / n1, q

    e2 = 0
    if y0 != 0.0 or yp0 != 0.0:
        _, e = math.frexp(max(abs(y0), abs(yp0)))
        y0, yp0 = math.ldexp(y0, -e), math.ldexp(yp0, -e)
        e2 = e

    r = r_a
    y, yp, lf = y0, yp0, logf0
    k1a, k1b, k1c, qloc = rhs(r, y, yp, lf)
    nfev = 1

    h = direction * min(0.01 * span, 0.1)
    out_r, out_h, out_cont, out_e2 = [], [], [], []
    status, r_fail = STATUS_OK, math.nan
    nsteps = 0
    while direction * (r_b - r) > 0.0:
        if nsteps >= max_steps:
            status, r_fail = STATUS_MAX_STEPS, r
            break
        hmax = span
        if qloc > 0.0:
            hmax = min(hmax, wave_frac * 2.0 * math.pi / math.sqrt(qloc))
        if abs(h) > hmax:
            h = direction * hmax
        if direction * (r + h - r_b) > 0.0:
            h = r_b - r
        if abs(h) < 1e-14 * max(1.0, abs(r)):
            status, r_fail = STATUS_COLLAPSE, r
            break

        k2a, k2b, k2c, _ = rhs(r + C2 * h,
                               y + h * A21 * k1a, yp + h * A21 * k1b, lf + h * A21 * k1c)
        k3a, k3b, k3c, _ = rhs(r + C3 * h,
                               y + h * (A31 * k1a + A32 * k2a),
                               yp + h * (A31 * k1b + A32 * k2b),
                               lf + h * (A31 * k1c + A32 * k2c))
        k4a, k4b, k4c, _ = rhs(r + C4 * h,
                               y + h * (A41 * k1a + A42 * k2a + A43 * k3a),
                               yp + h * (A41 * k1b + A42 * k2b + A43 * k3b),
                               lf + h * (A41 * k1c + A42 * k2c + A43 * k3c))
        k5a, k5b, k5c, _ = rhs(r + C5 * h,
                               y + h * (A51 * k1a + A52 * k2a + A53 * k3a + A54 * k4a),
                               yp + h * (A51 * k1b + A52 * k2b + A53 * k3b + A54 * k4b),
                               lf + h * (A51 * k1c + A52 * k2c + A53 * k3c + A54 * k4c))
        k6a, k6b, k6c, _ = rhs(r + h,
                               y + h * (A61 * k1a + A62 * k2a + A63 * k3a + A64 * k4a + A65 * k5a),
                               yp + h * (A61 * k1b + A62 * k2b + A63 * k3b + A64 * k4b + A65 * k5b),
                               lf + h * (A61 * k1c + A62 * k2c + A63 * k3c + A64 * k4c + A65 * k5c))
        ya = y + h * (A71 * k1a + A73 * k3a + A74 * k4a + A75 * k5a + A76 * k6a)
        yb = yp + h * (A71 * k1b + A73 * k3b + A74 * k4b + A75 * k5b + A76 * k6b)
        yc = lf + h * (A71 * k1c + A73 * k3c + A74 * k4c + A75 * k5c + A76 * k6c)
        k7a, k7b, k7c, q7 = rhs(r + h, ya, yb, yc)
        nfev += 6

        ea = h * (E1 * k1a + E3 * k3a + E4 * k4a + E5 * k5a + E6 * k6a + E7 * k7a)
        eb = h * (E1 * k1b + E3 * k3b + E4 * k4b + E5 * k5b + E6 * k6b + E7 * k7b)
        ec = h * (E1 * k1c + E3 * k3c + E4 * k4c + E5 * k5c + E6 * k6c + E7 * k7c)
        amp = max(abs(y), abs(yp), abs(ya), abs(yb))
        if amp == 0.0:
            amp = 1.0
        sk_y = tol * amp
        sk_l = tol * max(1.0, abs(lf), abs(yc))
        ea, eb, ec = ea / sk_y, eb / sk_y, ec / sk_l
        err = math.sqrt((ea * ea + eb * eb + ec * ec) / 3.0)
        if not math.isfinite(err):
            if not (math.isfinite(ya) and math.isfinite(yb)) and abs(h) < 1e-8 * max(1.0, abs(r)):
                status, r_fail = STATUS_NONFINITE, r
                break
            h *= 0.2
            continue

        if err <= 1.0:
            ha = h
            dya, dyb, dyc = ya - y, yb - yp, yc - lf
            ba = ha * k1a - dya
            bb = ha * k1b - dyb
            bc = ha * k1c - dyc
            out_r.append(r)
            out_h.append(ha)
            out_e2.append(e2)
            out_cont.append((
                (y, yp, lf),
                (dya, dyb, dyc),
                (ba, bb, bc),
                (dya - ha * k7a - ba, dyb - ha * k7b - bb, dyc - ha * k7c - bc),
                (ha * (D1 * k1a + D3 * k3a + D4 * k4a + D5 * k5a + D6 * k6a + D7 * k7a),
                 ha * (D1 * k1b + D3 * k3b + D4 * k4b + D5 * k5b + D6 * k6b + D7 * k7b),
                 ha * (D1 * k1c + D3 * k3c + D4 * k4c + D5 * k5c + D6 * k6c + D7 * k7c)),
            ))
            nsteps += 1
            r = r + ha
            y, yp, lf = ya, yb, yc
            k1a, k1b, k1c, qloc = k7a, k7b, k7c, q7
            big = max(abs(y), abs(yp))
            if big > RESCALE_HI or (0.0 < big < RESCALE_LO):
                _, e = math.frexp(big)
                y, yp = math.ldexp(y, -e), math.ldexp(yp, -e)
                e2 += e
                k1a, k1b, k1c, qloc = rhs(r, y, yp, lf)
                nfev += 1
            fac = 10.0 if err == 0.0 else min(10.0, max(0.2, 0.9 * err ** -0.2))
            h = ha * fac
        else:
            h *= max(0.2, 0.9 * err ** -0.2)

    cont = np.array(out_cont, dtype=float).reshape(-1, 5, 3)
    return (np.array(out_r, dtype=float), np.array(out_h, dtype=float), cont,
            np.array(out_e2, dtype=np.int64), nfev, status, r_fail)
