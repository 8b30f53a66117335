# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Dormand-Prince 5(4) kernel for native coefficient descriptors.

Arithmetic mirrors ``_dopri_py.integrate`` operation for operation.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sin, log, exp, tanh, pow, sqrt, fabs, frexp, ldexp, isfinite, M_PI

cnp.import_array()

cdef double C2 = 0.2, C3 = 0.3, C4 = 0.8, C5 = 8.0 / 9.0
cdef double A21 = 0.2
cdef double A31 = 3.0 / 40.0, A32 = 9.0 / 40.0
cdef double A41 = 44.0 / 45.0, A42 = -56.0 / 15.0, A43 = 32.0 / 9.0
cdef double A51 = 19372.0 / 6561.0, A52 = -25360.0 / 2187.0, A53 = 64448.0 / 6561.0, A54 = -212.0 / 729.0
cdef double A61 = 9017.0 / 3168.0, A62 = -355.0 / 33.0, A63 = 46732.0 / 5247.0
cdef double A64 = 49.0 / 176.0, A65 = -5103.0 / 18656.0
cdef double A71 = 35.0 / 384.0, A73 = 500.0 / 1113.0, A74 = 125.0 / 192.0
cdef double A75 = -2187.0 / 6784.0, A76 = 11.0 / 84.0
cdef double E1 = 71.0 / 57600.0, E3 = -71.0 / 16695.0, E4 = 71.0 / 1920.0
cdef double E5 = -17253.0 / 339200.0, E6 = 22.0 / 525.0, E7 = -1.0 / 40.0
cdef double D1 = -12715105075.0 / 11282082432.0, D3 = 87487479700.0 / 32700410799.0
cdef double D4 = -10690763975.0 / 1880347072.0, D5 = 701980252875.0 / 199316789632.0
cdef double D6 = -1453857185.0 / 822651844.0, D7 = 69997945.0 / 29380423.0

cdef double RESCALE_HI = ldexp(1.0, 400)
cdef double RESCALE_LO = ldexp(1.0, -400)


cdef struct Desc:
    int kind
    double n1, p, kappa, b, c
    int pert_kind
    double pert_delta
    int nterms
    double *terms
    double lam, kappa_l


cdef inline void _rhs(Desc *d, double r, double y, double yp, double lf,
                      double *oa, double *ob, double *oc, double *oq) noexcept nogil:
    cdef double dr, v, pert, x, q
    cdef int i, tk
    if d.kind == 0:
        dr = d.n1 / r
    elif d.kind == 1:
        dr = d.n1 / tanh(r)
    elif d.kind == 2:
        dr = d.n1 * (d.kappa + d.p / r)
    else:
        if d.pert_kind == 1:
            pert = d.pert_delta * sin(log(r))
        elif d.pert_kind == 2:
            pert = d.pert_delta * sin(r)
        else:
            pert = 0.0
        dr = d.b + d.c / r + pert / r
    v = 0.0
    for i in range(d.nterms):
        tk = <int> d.terms[4 * i]
        if tk == 0:
            v += d.terms[4 * i + 1] * pow(r, -d.terms[4 * i + 2])
        else:
            x = (r - d.terms[4 * i + 2]) / d.terms[4 * i + 3]
            v -= d.terms[4 * i + 1] * exp(-x * x)
    q = d.lam - v - d.kappa_l * exp(-2.0 * lf)
    oa[0] = yp
    ob[0] = -dr * yp - q * y
    oc[0] = dr / d.n1
    oq[0] = q


def integrate_native(double[::1] geom, double[:, ::1] pot, double n, double lam,
                     double kappa_l, double y0, double yp0, double logf0,
                     double r_a, double r_b, double tol, double wave_frac=0.1,
                     long max_steps=5000000):
    cdef Desc d
    cdef cnp.ndarray[cnp.double_t, ndim=1] terms_arr = np.ascontiguousarray(pot, dtype=float).ravel()
    d.kind = <int> geom[0]
    d.n1 = geom[1] - 1.0
    d.p = geom[2]
    d.kappa = geom[3]
    d.b = geom[4]
    d.c = geom[5]
    d.pert_kind = <int> geom[6]
    d.pert_delta = geom[7]
    d.nterms = pot.shape[0]
    d.terms = <double *> terms_arr.data if d.nterms > 0 else NULL
    d.lam = lam
    d.kappa_l = kappa_l

    cdef double direction = 1.0 if r_b >= r_a else -1.0
    cdef double span = fabs(r_b - r_a)
    cdef long e2 = 0
    cdef int e
    if y0 != 0.0 or yp0 != 0.0:
        frexp(max(fabs(y0), fabs(yp0)), &e)
        y0 = ldexp(y0, -e)
        yp0 = ldexp(yp0, -e)
        e2 = e

    cdef double r = r_a, y = y0, yp = yp0, lf = logf0
    cdef double k1a, k1b, k1c, qloc, k2a, k2b, k2c, k3a, k3b, k3c, k4a, k4b, k4c
    cdef double k5a, k5b, k5c, k6a, k6b, k6c, k7a, k7b, k7c, q7, dummy
    cdef double ya, yb, yc, ea, eb, ec, amp, sk_y, sk_l, err, ha, dya, dyb, dyc
    cdef double ba, bb, bc, big, fac, hmax, h
    _rhs(&d, r, y, yp, lf, &k1a, &k1b, &k1c, &qloc)
    cdef long nfev = 1

    h = direction * min(0.01 * span, 0.1)
    cdef long cap = 1024, nsteps = 0
    cdef cnp.ndarray[cnp.double_t, ndim=1] out_r = np.empty(cap)
    cdef cnp.ndarray[cnp.double_t, ndim=1] out_h = np.empty(cap)
    cdef cnp.ndarray[cnp.double_t, ndim=3] out_cont = np.empty((cap, 5, 3))
    cdef cnp.ndarray[cnp.int64_t, ndim=1] out_e2 = np.empty(cap, dtype=np.int64)
    cdef int status = 0
    cdef double r_fail = np.nan

    while direction * (r_b - r) > 0.0:
        if nsteps >= max_steps:
            status = 3
            r_fail = r
            break
        hmax = span
        if qloc > 0.0:
            hmax = min(hmax, wave_frac * 2.0 * M_PI / sqrt(qloc))
        if fabs(h) > hmax:
            h = direction * hmax
        if direction * (r + h - r_b) > 0.0:
            h = r_b - r
        if fabs(h) < 1e-14 * max(1.0, fabs(r)):
            status = 1
            r_fail = r
            break

        _rhs(&d, r + C2 * h, y + h * A21 * k1a, yp + h * A21 * k1b, lf + h * A21 * k1c,
             &k2a, &k2b, &k2c, &dummy)
        _rhs(&d, r + C3 * h,
             y + h * (A31 * k1a + A32 * k2a),
             yp + h * (A31 * k1b + A32 * k2b),
             lf + h * (A31 * k1c + A32 * k2c), &k3a, &k3b, &k3c, &dummy)
        _rhs(&d, r + C4 * h,
             y + h * (A41 * k1a + A42 * k2a + A43 * k3a),
             yp + h * (A41 * k1b + A42 * k2b + A43 * k3b),
             lf + h * (A41 * k1c + A42 * k2c + A43 * k3c), &k4a, &k4b, &k4c, &dummy)
        _rhs(&d, r + C5 * h,
             y + h * (A51 * k1a + A52 * k2a + A53 * k3a + A54 * k4a),
             yp + h * (A51 * k1b + A52 * k2b + A53 * k3b + A54 * k4b),
             lf + h * (A51 * k1c + A52 * k2c + A53 * k3c + A54 * k4c), &k5a, &k5b, &k5c, &dummy)
        _rhs(&d, r + h,
             y + h * (A61 * k1a + A62 * k2a + A63 * k3a + A64 * k4a + A65 * k5a),
             yp + h * (A61 * k1b + A62 * k2b + A63 * k3b + A64 * k4b + A65 * k5b),
             lf + h * (A61 * k1c + A62 * k2c + A63 * k3c + A64 * k4c + A65 * k5c),
             &k6a, &k6b, &k6c, &dummy)
        ya = y + h * (A71 * k1a + A73 * k3a + A74 * k4a + A75 * k5a + A76 * k6a)
        yb = yp + h * (A71 * k1b + A73 * k3b + A74 * k4b + A75 * k5b + A76 * k6b)
        yc = lf + h * (A71 * k1c + A73 * k3c + A74 * k4c + A75 * k5c + A76 * k6c)
        _rhs(&d, r + h, ya, yb, yc, &k7a, &k7b, &k7c, &q7)
        nfev += 6

        ea = h * (E1 * k1a + E3 * k3a + E4 * k4a + E5 * k5a + E6 * k6a + E7 * k7a)
        eb = h * (E1 * k1b + E3 * k3b + E4 * k4b + E5 * k5b + E6 * k6b + E7 * k7b)
        ec = h * (E1 * k1c + E3 * k3c + E4 * k4c + E5 * k5c + E6 * k6c + E7 * k7c)
        amp = max(max(fabs(y), fabs(yp)), max(fabs(ya), fabs(yb)))
        if amp == 0.0:
            amp = 1.0
        sk_y = tol * amp
        sk_l = tol * max(1.0, max(fabs(lf), fabs(yc)))
        ea = ea / sk_y
        eb = eb / sk_y
        ec = ec / sk_l
        err = sqrt((ea * ea + eb * eb + ec * ec) / 3.0)
        if not isfinite(err):
            if not (isfinite(ya) and isfinite(yb)) and fabs(h) < 1e-8 * max(1.0, fabs(r)):
                status = 2
                r_fail = r
                break
            h *= 0.2
            continue

        if err <= 1.0:
            if nsteps == cap:
                cap *= 2
                out_r = np.resize(out_r, cap)
                out_h = np.resize(out_h, cap)
                out_e2 = np.resize(out_e2, cap)
                out_cont = np.resize(out_cont, (cap, 5, 3))
            ha = h
            dya = ya - y
            dyb = yb - yp
            dyc = yc - lf
            ba = ha * k1a - dya
            bb = ha * k1b - dyb
            bc = ha * k1c - dyc
            out_r[nsteps] = r
            out_h[nsteps] = ha
            out_e2[nsteps] = e2
            out_cont[nsteps, 0, 0] = y
            out_cont[nsteps, 0, 1] = yp
            out_cont[nsteps, 0, 2] = lf
            out_cont[nsteps, 1, 0] = dya
            out_cont[nsteps, 1, 1] = dyb
            out_cont[nsteps, 1, 2] = dyc
            out_cont[nsteps, 2, 0] = ba
            out_cont[nsteps, 2, 1] = bb
            out_cont[nsteps, 2, 2] = bc
            out_cont[nsteps, 3, 0] = dya - ha * k7a - ba
            out_cont[nsteps, 3, 1] = dyb - ha * k7b - bb
            out_cont[nsteps, 3, 2] = dyc - ha * k7c - bc
            out_cont[nsteps, 4, 0] = ha * (D1 * k1a + D3 * k3a + D4 * k4a + D5 * k5a + D6 * k6a + D7 * k7a)
            out_cont[nsteps, 4, 1] = ha * (D1 * k1b + D3 * k3b + D4 * k4b + D5 * k5b + D6 * k6b + D7 * k7b)
            out_cont[nsteps, 4, 2] = ha * (D1 * k1c + D3 * k3c + D4 * k4c + D5 * k5c + D6 * k6c + D7 * k7c)
            nsteps += 1
            r = r + ha
            y = ya
            yp = yb
            lf = yc
            k1a = k7a
            k1b = k7b
            k1c = k7c
            qloc = q7
            big = max(fabs(y), fabs(yp))
            if big > RESCALE_HI or (0.0 < big < RESCALE_LO):
                frexp(big, &e)
                y = ldexp(y, -e)
                yp = ldexp(yp, -e)
                e2 += e
                _rhs(&d, r, y, yp, lf, &k1a, &k1b, &k1c, &qloc)
                nfev += 1
            if err == 0.0:
                fac = 10.0
            else:
                fac = min(10.0, max(0.2, 0.9 * pow(err, -0.2)))
            h = ha * fac
        else:
            h *= max(0.2, 0.9 * pow(err, -0.2))

    return (out_r[:nsteps].copy(), out_h[:nsteps].copy(), out_cont[:nsteps].copy(),
            out_e2[:nsteps].copy(), nfev, status, r_fail)
