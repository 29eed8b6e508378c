# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled integration kernels.

Dormand-Prince 5(4) stepping for the reduced profile equations (minimal /
expander / shrinker), their phase-plane and linearized forms, plus the
per-step normal-velocity evaluation used by the front-tracking flow.

The pure-Python twin in `_pure.py` implements the identical algorithm with
the same coefficients and branch structure; both backends must stay in
lockstep (see tests/test_backends.py).
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport atan2, cos, exp, fabs, sin, sqrt

cnp.import_array()

# status codes shared with _pure.py / codes.py
DEF ST_RMAX = 0
DEF ST_AXIS = 1
DEF ST_ESCAPE_UP = 2
DEF ST_ESCAPE_DOWN = 3
DEF ST_STEP_LIMIT = 4
DEF ST_OVERFLOW = 5
DEF ST_BUFFER = -2

# Dormand-Prince 5(4) tableau
DEF A21 = 1.0 / 5.0
DEF A31 = 3.0 / 40.0
DEF A32 = 9.0 / 40.0
DEF A41 = 44.0 / 45.0
DEF A42 = -56.0 / 15.0
DEF A43 = 32.0 / 9.0
DEF A51 = 19372.0 / 6561.0
DEF A52 = -25360.0 / 2187.0
DEF A53 = 64448.0 / 6561.0
DEF A54 = -212.0 / 729.0
DEF A61 = 9017.0 / 3168.0
DEF A62 = -355.0 / 33.0
DEF A63 = 46732.0 / 5247.0
DEF A64 = 49.0 / 176.0
DEF A65 = -5103.0 / 18656.0
DEF B1 = 35.0 / 384.0
DEF B3 = 500.0 / 1113.0
DEF B4 = 125.0 / 192.0
DEF B5 = -2187.0 / 6784.0
DEF B6 = 11.0 / 84.0
DEF E1 = 71.0 / 57600.0
DEF E3 = -71.0 / 16695.0
DEF E4 = 71.0 / 1920.0
DEF E5 = -17253.0 / 339200.0
DEF E6 = 22.0 / 525.0
DEF E7 = -1.0 / 40.0


cdef inline double profile_curvature(int kind, double p, double q,
                                     double r, double u, double th) noexcept nogil:
    # curvature solved from the parametric equation of the given kind
    cdef double st = sin(th)
    cdef double ct = cos(th)
    if kind == 0:
        return (q - 1.0) * ct / u - (p - 1.0) * st / r
    elif kind == 1:
        return ((q - 1.0) / u + 0.5 * u) * ct - ((p - 1.0) / r + 0.5 * r) * st
    else:
        return ((q - 1.0) / u - 0.5 * u) * ct - ((p - 1.0) / r - 0.5 * r) * st


cdef inline int profile_rhs(int kind, double p, double q,
                            double* y, double* f) noexcept nogil:
    # y = (r, u, theta); returns -1 when a stage leaves the open quadrant
    if y[0] <= 0.0 or y[1] <= 0.0:
        return -1
    f[0] = cos(y[2])
    f[1] = sin(y[2])
    f[2] = profile_curvature(kind, p, q, y[0], y[1], y[2])
    return 0


cdef inline void hermite3(double* y0, double* f0, double* y1, double* f1,
                          double h, double xi, int dim, double* out) noexcept nogil:
    cdef double h00 = (2.0 * xi - 3.0) * xi * xi + 1.0
    cdef double h10 = ((xi - 2.0) * xi + 1.0) * xi
    cdef double h01 = (3.0 - 2.0 * xi) * xi * xi
    cdef double h11 = (xi - 1.0) * xi * xi
    cdef int i
    for i in range(dim):
        out[i] = h00 * y0[i] + h10 * h * f0[i] + h01 * y1[i] + h11 * h * f1[i]


cdef inline double event_g(int code, double* y, double r_max, double theta_down,
                           double theta_up, double band, double lam,
                           double floor_u, double floor_r) noexcept nogil:
    # signed event functions; an event fires when g crosses zero
    if code == 0:
        return y[0] - r_max
    elif code == 1:
        return y[1] - floor_u
    elif code == 2:
        return y[0] - floor_r
    elif code == 3:
        return y[2] - theta_down
    elif code == 4:
        return y[2] - theta_up
    elif code == 5:
        return (y[1] - lam * y[0]) - band * y[0]
    else:
        return (y[1] - lam * y[0]) + band * y[0]


cdef double refine_event(int code, double* y0, double* f0, double* y1, double* f1,
                         double h, double r_max, double theta_down, double theta_up,
                         double band, double lam, double floor_u,
                         double floor_r) noexcept nogil:
    # bisection on the cubic Hermite interpolant of the accepted step
    cdef double lo = 0.0
    cdef double hi = 1.0
    cdef double mid, gm
    cdef double ylo[3]
    cdef double ym[3]
    cdef double g0 = event_g(code, y0, r_max, theta_down, theta_up, band, lam,
                             floor_u, floor_r)
    cdef int it
    cdef double sgn = 1.0 if g0 <= 0.0 else -1.0
    for it in range(60):
        mid = 0.5 * (lo + hi)
        hermite3(y0, f0, y1, f1, h, mid, 3, ym)
        gm = event_g(code, ym, r_max, theta_down, theta_up, band, lam,
                     floor_u, floor_r)
        if sgn * gm <= 0.0:
            lo = mid
        else:
            hi = mid
    return hi


cdef int _run_profile(int kind, double p, double q,
                      double* s_io, double* y_io, double* h_io, long* step_io,
                      double[:, ::1] buf, long cap, long* n_io,
                      double rel_tol, double abs_tol, double r_max, long max_steps,
                      double h_cap, double theta_down, double theta_up,
                      double band, double band_gate, double lam,
                      double floor_u, double floor_r,
                      double overflow_lim) noexcept nogil:
    cdef double s = s_io[0]
    cdef double h = h_io[0]
    cdef long nstep = step_io[0]
    cdef long n = n_io[0]
    cdef double y[3]
    cdef double ynew[3]
    cdef double yref[3]
    cdef double f0[3]
    cdef double f1[3]
    cdef double k2[3]
    cdef double k3[3]
    cdef double k4[3]
    cdef double k5[3]
    cdef double k6[3]
    cdef double ytmp[3]
    cdef double err, sc, tol_ratio, fac, g_old, g_new, xi, xi_best
    cdef int i, bad, code, code_best, fired
    cdef double w_new, dw_new
    cdef int status = -1

    y[0] = y_io[0]
    y[1] = y_io[1]
    y[2] = y_io[2]
    if profile_rhs(kind, p, q, y, f0) != 0:
        return ST_AXIS

    while True:
        if nstep >= max_steps:
            status = ST_STEP_LIMIT
            break
        if h > h_cap:
            h = h_cap
        if h < 1e-14 * (1.0 + fabs(s)):
            # step size exhausted against a boundary: report the axis event
            status = ST_AXIS
            break

        # stages (FSAL: f0 is the derivative at the current point)
        bad = 0
        for i in range(3):
            ytmp[i] = y[i] + h * A21 * f0[i]
        bad |= profile_rhs(kind, p, q, ytmp, k2)
        if not bad:
            for i in range(3):
                ytmp[i] = y[i] + h * (A31 * f0[i] + A32 * k2[i])
            bad |= profile_rhs(kind, p, q, ytmp, k3)
        if not bad:
            for i in range(3):
                ytmp[i] = y[i] + h * (A41 * f0[i] + A42 * k2[i] + A43 * k3[i])
            bad |= profile_rhs(kind, p, q, ytmp, k4)
        if not bad:
            for i in range(3):
                ytmp[i] = y[i] + h * (A51 * f0[i] + A52 * k2[i] + A53 * k3[i]
                                      + A54 * k4[i])
            bad |= profile_rhs(kind, p, q, ytmp, k5)
        if not bad:
            for i in range(3):
                ytmp[i] = y[i] + h * (A61 * f0[i] + A62 * k2[i] + A63 * k3[i]
                                      + A64 * k4[i] + A65 * k5[i])
            bad |= profile_rhs(kind, p, q, ytmp, k6)
        if not bad:
            for i in range(3):
                ynew[i] = y[i] + h * (B1 * f0[i] + B3 * k3[i] + B4 * k4[i]
                                      + B5 * k5[i] + B6 * k6[i])
            bad |= profile_rhs(kind, p, q, ynew, f1)
        if bad:
            h *= 0.3
            continue

        err = 0.0
        for i in range(3):
            sc = abs_tol + rel_tol * (fabs(y[i]) if fabs(y[i]) > fabs(ynew[i])
                                      else fabs(ynew[i]))
            tol_ratio = h * (E1 * f0[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i]
                             + E6 * k6[i] + E7 * f1[i]) / sc
            err += tol_ratio * tol_ratio
        err = sqrt(err / 3.0)
        if err > 1.0:
            fac = 0.9 * err ** -0.2
            if fac < 0.2:
                fac = 0.2
            h *= fac
            continue

        if n >= cap:
            # no room for the next row: hand back to the wrapper to regrow,
            # without committing this step
            s_io[0] = s
            y_io[0] = y[0]
            y_io[1] = y[1]
            y_io[2] = y[2]
            h_io[0] = h
            step_io[0] = nstep
            n_io[0] = n
            return ST_BUFFER

        # accepted step: scan events in priority order, refine the earliest
        nstep += 1
        fired = 0
        xi_best = 2.0
        code_best = -1
        if fabs(ynew[1]) > overflow_lim or fabs(f1[2]) > overflow_lim:
            status = ST_OVERFLOW
            s += h
            for i in range(3):
                y[i] = ynew[i]
            if n < cap:
                buf[n, 0] = s
                buf[n, 1] = y[0]
                buf[n, 2] = y[1]
                buf[n, 3] = y[2]
                buf[n, 4] = f1[2]
                n += 1
            break

        for code in range(7):
            if code == 0:
                g_old = y[0] - r_max
                g_new = ynew[0] - r_max
                if g_new < 0.0:
                    continue
            elif code == 1:
                g_old = y[1] - floor_u
                g_new = ynew[1] - floor_u
                if g_new > 0.0:
                    continue
            elif code == 2:
                g_old = y[0] - floor_r
                g_new = ynew[0] - floor_r
                if g_new > 0.0:
                    continue
            elif code == 3:
                if theta_down < -1e200:
                    continue
                g_old = y[2] - theta_down
                g_new = ynew[2] - theta_down
                if g_new > 0.0:
                    continue
            elif code == 4:
                if theta_up > 1e200:
                    continue
                g_old = y[2] - theta_up
                g_new = ynew[2] - theta_up
                if g_new < 0.0:
                    continue
            elif code == 5:
                if band <= 0.0 or ynew[0] < band_gate:
                    continue
                w_new = ynew[1] - lam * ynew[0]
                dw_new = f1[1] - lam * f1[0]
                if not (w_new > band * ynew[0] and dw_new > 0.0):
                    continue
                g_old = (y[1] - lam * y[0]) - band * y[0]
                g_new = w_new - band * ynew[0]
            else:
                if band <= 0.0 or ynew[0] < band_gate:
                    continue
                w_new = ynew[1] - lam * ynew[0]
                dw_new = f1[1] - lam * f1[0]
                if not (w_new < -band * ynew[0] and dw_new < 0.0):
                    continue
                g_old = (y[1] - lam * y[0]) + band * y[0]
                g_new = w_new + band * ynew[0]
            xi = refine_event(code, y, f0, ynew, f1, h, r_max, theta_down,
                              theta_up, band, lam, floor_u, floor_r)
            if xi < xi_best:
                xi_best = xi
                code_best = code
            fired = 1

        if fired:
            hermite3(y, f0, ynew, f1, h, xi_best, 3, yref)
            s += xi_best * h
            for i in range(3):
                y[i] = yref[i]
            if code_best == 0:
                status = ST_RMAX
            elif code_best == 1 or code_best == 2:
                status = ST_AXIS
            elif code_best == 3:
                status = ST_ESCAPE_DOWN
            elif code_best == 4:
                status = ST_ESCAPE_UP
            elif code_best == 5:
                status = ST_ESCAPE_UP
            else:
                status = ST_ESCAPE_DOWN
            if n < cap:
                buf[n, 0] = s
                buf[n, 1] = y[0]
                buf[n, 2] = y[1]
                buf[n, 3] = y[2]
                buf[n, 4] = profile_curvature(kind, p, q, y[0], y[1], y[2])
                n += 1
            break

        s += h
        for i in range(3):
            y[i] = ynew[i]
            f0[i] = f1[i]
        buf[n, 0] = s
        buf[n, 1] = y[0]
        buf[n, 2] = y[1]
        buf[n, 3] = y[2]
        buf[n, 4] = f0[2]
        n += 1

        fac = 0.9 * err ** -0.2 if err > 1e-30 else 5.0
        if fac > 5.0:
            fac = 5.0
        if fac < 0.2:
            fac = 0.2
        h *= fac

    s_io[0] = s
    y_io[0] = y[0]
    y_io[1] = y[1]
    y_io[2] = y[2]
    h_io[0] = h
    step_io[0] = nstep
    n_io[0] = n
    return status


def integrate_profile(int kind, double p, double q,
                      double s0, double r0, double u0, double th0,
                      double rel_tol, double abs_tol, double r_max,
                      long max_steps, double h0, double h_cap,
                      double theta_down, double theta_up,
                      double band, double band_gate, double lam,
                      double floor_u, double floor_r, double overflow_lim):
    """Integrate one profile curve; returns (samples (n,5), status)."""
    cdef long cap = 4096
    cdef cnp.ndarray out = np.empty((cap, 5), dtype=np.float64)
    cdef double[:, ::1] buf = out
    cdef double s = s0
    cdef double h = h0
    cdef long nstep = 0
    cdef long n = 0
    cdef double y[3]
    cdef int status = ST_BUFFER
    y[0] = r0
    y[1] = u0
    y[2] = th0
    buf[0, 0] = s0
    buf[0, 1] = r0
    buf[0, 2] = u0
    buf[0, 3] = th0
    buf[0, 4] = profile_curvature(kind, p, q, r0, u0, th0)
    n = 1
    while status == ST_BUFFER:
        with nogil:
            status = _run_profile(kind, p, q, &s, y, &h, &nstep, buf, cap, &n,
                                  rel_tol, abs_tol, r_max, max_steps, h_cap,
                                  theta_down, theta_up, band, band_gate, lam,
                                  floor_u, floor_r, overflow_lim)
        if status == ST_BUFFER:
            cap *= 2
            new = np.empty((cap, 5), dtype=np.float64)
            new[: out.shape[0]] = out
            out = new
            buf = out
    return out[:n].copy(), status


cdef inline void phase_rhs(int kind, double p, double lam2, double eta,
                           double* y, double* f) noexcept nogil:
    # y = (X, Y)
    cdef double one_y2 = 1.0 + y[1] * y[1]
    f[0] = y[1] - y[0]
    f[1] = (p - 1.0) * one_y2 * (lam2 - y[0] * y[1]) / y[0]
    if kind == 1:
        f[1] -= 0.5 * one_y2 * exp(2.0 * eta) * (y[1] - y[0])


def integrate_phase(int kind, double p, double q,
                    double eta0, double x0, double y0v,
                    double rel_tol, double abs_tol, double eta_max,
                    long max_steps, double h0, double h_cap,
                    double overflow_lim):
    """Integrate the phase-plane system; returns (samples (n,3), status)."""
    cdef double lam2 = (q - 1.0) / (p - 1.0)
    cdef long cap = max_steps + 2
    cdef cnp.ndarray out = np.empty((cap, 3), dtype=np.float64)
    cdef double[:, ::1] buf = out
    cdef double eta = eta0
    cdef double h = h0
    cdef long n = 0
    cdef long nstep = 0
    cdef double y[2]
    cdef double ynew[2]
    cdef double f0[2]
    cdef double f1[2]
    cdef double k2[2]
    cdef double k3[2]
    cdef double k4[2]
    cdef double k5[2]
    cdef double k6[2]
    cdef double ytmp[2]
    cdef double err, sc, e, fac
    cdef int i, status = -1, last
    y[0] = x0
    y[1] = y0v
    buf[0, 0] = eta0
    buf[0, 1] = x0
    buf[0, 2] = y0v
    n = 1
    phase_rhs(kind, p, lam2, eta, y, f0)
    with nogil:
        while True:
            if nstep >= max_steps:
                status = ST_STEP_LIMIT
                break
            if h > h_cap:
                h = h_cap
            last = 0
            if eta + h >= eta_max:
                h = eta_max - eta
                last = 1
            if h < 1e-15 * (1.0 + fabs(eta)):
                status = ST_RMAX if last else ST_AXIS
                break

            for i in range(2):
                ytmp[i] = y[i] + h * A21 * f0[i]
            if ytmp[0] <= 0.0:
                h *= 0.3
                continue
            phase_rhs(kind, p, lam2, eta + h / 5.0, ytmp, k2)
            for i in range(2):
                ytmp[i] = y[i] + h * (A31 * f0[i] + A32 * k2[i])
            if ytmp[0] <= 0.0:
                h *= 0.3
                continue
            phase_rhs(kind, p, lam2, eta + 0.3 * h, ytmp, k3)
            for i in range(2):
                ytmp[i] = y[i] + h * (A41 * f0[i] + A42 * k2[i] + A43 * k3[i])
            if ytmp[0] <= 0.0:
                h *= 0.3
                continue
            phase_rhs(kind, p, lam2, eta + 0.8 * h, ytmp, k4)
            for i in range(2):
                ytmp[i] = y[i] + h * (A51 * f0[i] + A52 * k2[i] + A53 * k3[i]
                                      + A54 * k4[i])
            if ytmp[0] <= 0.0:
                h *= 0.3
                continue
            phase_rhs(kind, p, lam2, eta + 8.0 * h / 9.0, ytmp, k5)
            for i in range(2):
                ytmp[i] = y[i] + h * (A61 * f0[i] + A62 * k2[i] + A63 * k3[i]
                                      + A64 * k4[i] + A65 * k5[i])
            if ytmp[0] <= 0.0:
                h *= 0.3
                continue
            phase_rhs(kind, p, lam2, eta + h, ytmp, k6)
            for i in range(2):
                ynew[i] = y[i] + h * (B1 * f0[i] + B3 * k3[i] + B4 * k4[i]
                                      + B5 * k5[i] + B6 * k6[i])
            if ynew[0] <= 0.0:
                h *= 0.3
                continue
            phase_rhs(kind, p, lam2, eta + h, ynew, f1)

            err = 0.0
            for i in range(2):
                sc = abs_tol + rel_tol * (fabs(y[i]) if fabs(y[i]) > fabs(ynew[i])
                                          else fabs(ynew[i]))
                e = h * (E1 * f0[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i]
                         + E6 * k6[i] + E7 * f1[i]) / sc
                err += e * e
            err = sqrt(err / 2.0)
            if err > 1.0:
                fac = 0.9 * err ** -0.2
                if fac < 0.2:
                    fac = 0.2
                h *= fac
                continue

            nstep += 1
            eta += h
            for i in range(2):
                y[i] = ynew[i]
                f0[i] = f1[i]
            if fabs(y[1]) > overflow_lim:
                status = ST_OVERFLOW
                break
            buf[n, 0] = eta
            buf[n, 1] = y[0]
            buf[n, 2] = y[1]
            n += 1
            if last:
                status = ST_RMAX
                break
            fac = 0.9 * err ** -0.2 if err > 1e-30 else 5.0
            if fac > 5.0:
                fac = 5.0
            if fac < 0.2:
                fac = 0.2
            h *= fac

    return out[:n].copy(), status


cdef inline void linear_rhs(int kind, double p, double lam2, double r,
                            double* y, double* f) noexcept nogil:
    # y = (g, g'); second-order linearization over the cone as a first-order system
    cdef double one = 1.0 + lam2
    f[0] = y[1]
    if kind == 0:
        f[1] = one * (-((p - 1.0) / r + 0.5 * r) * y[1]
                      - (-0.5 + (p - 1.0) / (r * r)) * y[0])
    else:
        f[1] = one * (-((p - 1.0) / r - 0.5 * r) * y[1]
                      - (0.5 + (p - 1.0) / (r * r)) * y[0])


def integrate_linear(int kind, double p, double q,
                     double r0, double g0, double gp0, double r1,
                     double rel_tol, double abs_tol, long max_steps,
                     double h0, double h_cap, double overflow_lim):
    """Integrate a linearized equation from r0 to r1 (either direction)."""
    cdef double lam2 = (q - 1.0) / (p - 1.0)
    cdef long cap = max_steps + 2
    cdef cnp.ndarray out = np.empty((cap, 3), dtype=np.float64)
    cdef double[:, ::1] buf = out
    cdef double direction = 1.0 if r1 >= r0 else -1.0
    cdef double r = r0
    cdef double h = h0 * direction
    cdef long n = 0
    cdef long nstep = 0
    cdef double y[2]
    cdef double ynew[2]
    cdef double f0[2]
    cdef double f1[2]
    cdef double k2[2]
    cdef double k3[2]
    cdef double k4[2]
    cdef double k5[2]
    cdef double k6[2]
    cdef double ytmp[2]
    cdef double err, sc, e, fac
    cdef int i, status = -1, last
    y[0] = g0
    y[1] = gp0
    buf[0, 0] = r0
    buf[0, 1] = g0
    buf[0, 2] = gp0
    n = 1
    linear_rhs(kind, p, lam2, r, y, f0)
    with nogil:
        while True:
            if nstep >= max_steps:
                status = ST_STEP_LIMIT
                break
            if fabs(h) > h_cap:
                h = h_cap * direction
            last = 0
            if (r + h - r1) * direction >= 0.0:
                h = r1 - r
                last = 1
            if fabs(h) < 1e-15 * (1.0 + fabs(r)):
                status = ST_RMAX
                break

            for i in range(2):
                ytmp[i] = y[i] + h * A21 * f0[i]
            linear_rhs(kind, p, lam2, r + h / 5.0, ytmp, k2)
            for i in range(2):
                ytmp[i] = y[i] + h * (A31 * f0[i] + A32 * k2[i])
            linear_rhs(kind, p, lam2, r + 0.3 * h, ytmp, k3)
            for i in range(2):
                ytmp[i] = y[i] + h * (A41 * f0[i] + A42 * k2[i] + A43 * k3[i])
            linear_rhs(kind, p, lam2, r + 0.8 * h, ytmp, k4)
            for i in range(2):
                ytmp[i] = y[i] + h * (A51 * f0[i] + A52 * k2[i] + A53 * k3[i]
                                      + A54 * k4[i])
            linear_rhs(kind, p, lam2, r + 8.0 * h / 9.0, ytmp, k5)
            for i in range(2):
                ytmp[i] = y[i] + h * (A61 * f0[i] + A62 * k2[i] + A63 * k3[i]
                                      + A64 * k4[i] + A65 * k5[i])
            linear_rhs(kind, p, lam2, r + h, ytmp, k6)
            for i in range(2):
                ynew[i] = y[i] + h * (B1 * f0[i] + B3 * k3[i] + B4 * k4[i]
                                      + B5 * k5[i] + B6 * k6[i])
            linear_rhs(kind, p, lam2, r + h, ynew, f1)

            err = 0.0
            for i in range(2):
                sc = abs_tol + rel_tol * (fabs(y[i]) if fabs(y[i]) > fabs(ynew[i])
                                          else fabs(ynew[i]))
                e = h * (E1 * f0[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i]
                         + E6 * k6[i] + E7 * f1[i]) / sc
                err += e * e
            err = sqrt(err / 2.0)
            if err > 1.0:
                fac = 0.9 * err ** -0.2
                if fac < 0.2:
                    fac = 0.2
                h *= fac
                continue

            nstep += 1
            r += h
            for i in range(2):
                y[i] = ynew[i]
                f0[i] = f1[i]
            if fabs(y[0]) > overflow_lim or fabs(y[1]) > overflow_lim:
                status = ST_OVERFLOW
                break
            buf[n, 0] = r
            buf[n, 1] = y[0]
            buf[n, 2] = y[1]
            n += 1
            if last:
                status = ST_RMAX
                break
            fac = 0.9 * err ** -0.2 if err > 1e-30 else 5.0
            if fac > 5.0:
                fac = 5.0
            if fac < 0.2:
                fac = 0.2
            h *= fac

    return out[:n].copy(), status


def flow_velocity(double[::1] r, double[::1] u, double p, double q,
                  int bc_left, int bc_right):
    """Discrete normal velocity H*nu for the reduced flow markers.

    bc codes: 0 = pinned on the u-axis (r = 0), 1 = pinned on the r-axis
    (u = 0), 2 = mirror continuation in r, 3 = frozen endpoint.
    Returns (vr, vu, theta, kappa, hmean).
    """
    cdef long n = r.shape[0]
    cdef cnp.ndarray vr_a = np.empty(n, dtype=np.float64)
    cdef cnp.ndarray vu_a = np.empty(n, dtype=np.float64)
    cdef cnp.ndarray th_a = np.empty(n, dtype=np.float64)
    cdef cnp.ndarray kk_a = np.empty(n, dtype=np.float64)
    cdef cnp.ndarray hh_a = np.empty(n, dtype=np.float64)
    cdef double[::1] vr = vr_a
    cdef double[::1] vu = vu_a
    cdef double[::1] th = th_a
    cdef double[::1] kk = kk_a
    cdef double[::1] hh = hh_a
    cdef long i
    cdef double ar, au, br, bu, cr, cu
    cdef double e1r, e1u, e2r, e2u, tr, tu, tn
    cdef double l1, l2, l3, cross, kcur, theta, st, ct, hm, term_p, term_q
    with nogil:
        for i in range(n):
            br = r[i]
            bu = u[i]
            if i == 0:
                if bc_left == 0:
                    ar = -r[1]
                    au = u[1]
                elif bc_left == 2:
                    ar = 2.0 * r[0] - r[1]
                    au = u[1]
                else:
                    vr[i] = 0.0
                    vu[i] = 0.0
                    th[i] = 0.0
                    kk[i] = 0.0
                    hh[i] = 0.0
                    continue
            else:
                ar = r[i - 1]
                au = u[i - 1]
            if i == n - 1:
                if bc_right == 1:
                    cr = r[n - 2]
                    cu = -u[n - 2]
                elif bc_right == 2:
                    cr = 2.0 * r[n - 1] - r[n - 2]
                    cu = u[n - 2]
                elif bc_right == 0:
                    cr = -r[n - 2]
                    cu = u[n - 2]
                else:
                    vr[i] = 0.0
                    vu[i] = 0.0
                    th[i] = 0.0
                    kk[i] = 0.0
                    hh[i] = 0.0
                    continue
            else:
                cr = r[i + 1]
                cu = u[i + 1]

            e1r = br - ar
            e1u = bu - au
            e2r = cr - br
            e2u = cu - bu
            tr = cr - ar
            tu = cu - au
            l1 = sqrt(e1r * e1r + e1u * e1u)
            l2 = sqrt(e2r * e2r + e2u * e2u)
            l3 = sqrt(tr * tr + tu * tu)
            theta = atan2(tu, tr)
            cross = e1r * e2u - e1u * e2r
            kcur = 2.0 * cross / (l1 * l2 * l3)
            st = sin(theta)
            ct = cos(theta)
            # orbital curvature terms; at an axis the orthogonal-meeting
            # limit replaces the singular quotient
            if br == 0.0:
                term_p = (p - 1.0) * kcur
            else:
                term_p = (p - 1.0) * st / br
            if bu == 0.0:
                term_q = (q - 1.0) * kcur
            else:
                term_q = -(q - 1.0) * ct / bu
            hm = kcur + term_p + term_q
            vr[i] = -hm * st
            vu[i] = hm * ct
            th[i] = theta
            kk[i] = kcur
            hh[i] = hm
    return vr_a, vu_a, th_a, kk_a, hh_a
