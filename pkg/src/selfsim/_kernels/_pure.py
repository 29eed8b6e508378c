"""Pure-Python fallback kernels.

Same Dormand-Prince 5(4) algorithm, coefficients, event handling, and branch
structure as the compiled backend in `_fast.pyx`. Used when the extension is
unavailable or when SELFSIM_PURE=1; roughly two orders of magnitude slower.
"""

import math

import numpy as np

from .codes import (
    AXIS_HIT,
    ESCAPE_DOWN,
    ESCAPE_UP,
    OVERFLOW,
    REACHED_RMAX,
    STEP_LIMIT,
)

_A = (
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
)
_B = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84)
_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)


def profile_curvature_scalar(kind, p, q, r, u, th):
    st = math.sin(th)
    ct = math.cos(th)
    if kind == 0:
        return (q - 1.0) * ct / u - (p - 1.0) * st / r
    if kind == 1:
        return ((q - 1.0) / u + 0.5 * u) * ct - ((p - 1.0) / r + 0.5 * r) * st
    return ((q - 1.0) / u - 0.5 * u) * ct - ((p - 1.0) / r - 0.5 * r) * st


def _profile_rhs(kind, p, q, y):
    if y[0] <= 0.0 or y[1] <= 0.0:
        return None
    return (
        math.cos(y[2]),
        math.sin(y[2]),
        profile_curvature_scalar(kind, p, q, y[0], y[1], y[2]),
    )


def _hermite(y0, f0, y1, f1, h, xi):
    h00 = (2.0 * xi - 3.0) * xi * xi + 1.0
    h10 = ((xi - 2.0) * xi + 1.0) * xi
    h01 = (3.0 - 2.0 * xi) * xi * xi
    h11 = (xi - 1.0) * xi * xi
    return tuple(
        h00 * a + h10 * h * b + h01 * c + h11 * h * d
        for a, b, c, d in zip(y0, f0, y1, f1)
    )


def _dp_step(rhs, y, f0, h):
    """One Dormand-Prince trial step; returns (ynew, f1, err) or None."""
    ks = [f0]
    for row in _A:
        ytmp = tuple(
            yi + h * sum(a * k[i] for a, k in zip(row, ks))
            for i, yi in enumerate(y)
        )
        f = rhs(ytmp)
        if f is None:
            return None
        ks.append(f)
    ynew = tuple(
        yi + h * sum(b * k[i] for b, k in zip(_B, ks))
        for i, yi in enumerate(y)
    )
    f1 = rhs(ynew)
    if f1 is None:
        return None
    ks.append(f1)
    return ynew, f1, ks


def _err_norm(y, ynew, ks, h, rel_tol, abs_tol):
    acc = 0.0
    for i in range(len(y)):
        sc = abs_tol + rel_tol * max(abs(y[i]), abs(ynew[i]))
        e = h * sum(c * k[i] for c, k in zip(_E, ks)) / sc
        acc += e * e
    return math.sqrt(acc / len(y))


def integrate_profile(kind, p, q, s0, r0, u0, th0, rel_tol, abs_tol, r_max,
                      max_steps, h0, h_cap, theta_down, theta_up,
                      band, band_gate, lam, floor_u, floor_r, overflow_lim):
    def rhs(state):
        return _profile_rhs(kind, p, q, state)

    def g_of(code, st):
        if code == 0:
            return st[0] - r_max
        if code == 1:
            return st[1] - floor_u
        if code == 2:
            return st[0] - floor_r
        if code == 3:
            return st[2] - theta_down
        if code == 4:
            return st[2] - theta_up
        if code == 5:
            return (st[1] - lam * st[0]) - band * st[0]
        return (st[1] - lam * st[0]) + band * st[0]

    rows = [(s0, r0, u0, th0, profile_curvature_scalar(kind, p, q, r0, u0, th0))]
    s = s0
    y = (r0, u0, th0)
    f0 = rhs(y)
    if f0 is None:
        return np.array(rows), AXIS_HIT
    h = h0
    nstep = 0
    status = None
    while status is None:
        if nstep >= max_steps:
            status = STEP_LIMIT
            break
        h = min(h, h_cap)
        if h < 1e-14 * (1.0 + abs(s)):
            status = AXIS_HIT
            break
        trial = _dp_step(rhs, y, f0, h)
        if trial is None:
            h *= 0.3
            continue
        ynew, f1, ks = trial
        err = _err_norm(y, ynew, ks, h, rel_tol, abs_tol)
        if err > 1.0:
            h *= max(0.2, 0.9 * err ** -0.2)
            continue
        nstep += 1

        if abs(ynew[1]) > overflow_lim or abs(f1[2]) > overflow_lim:
            s += h
            y = ynew
            rows.append((s, y[0], y[1], y[2], f1[2]))
            status = OVERFLOW
            break

        fired = []
        for code in range(7):
            if code == 0 and ynew[0] < r_max:
                continue
            if code == 1 and ynew[1] > floor_u:
                continue
            if code == 2 and ynew[0] > floor_r:
                continue
            if code == 3 and (theta_down < -1e200 or ynew[2] > theta_down):
                continue
            if code == 4 and (theta_up > 1e200 or ynew[2] < theta_up):
                continue
            if code in (5, 6):
                if band <= 0.0 or ynew[0] < band_gate:
                    continue
                w_new = ynew[1] - lam * ynew[0]
                dw_new = f1[1] - lam * f1[0]
                if code == 5 and not (w_new > band * ynew[0] and dw_new > 0.0):
                    continue
                if code == 6 and not (w_new < -band * ynew[0] and dw_new < 0.0):
                    continue
            g0 = g_of(code, y)
            sgn = 1.0 if g0 <= 0.0 else -1.0
            lo, hi = 0.0, 1.0
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                gm = g_of(code, _hermite(y, f0, ynew, f1, h, mid))
                if sgn * gm <= 0.0:
                    lo = mid
                else:
                    hi = mid
            fired.append((hi, code))
        if fired:
            xi, code = min(fired)
            y = _hermite(y, f0, ynew, f1, h, xi)
            s += xi * h
            k_end = profile_curvature_scalar(kind, p, q, y[0], y[1], y[2])
            rows.append((s, y[0], y[1], y[2], k_end))
            status = {0: REACHED_RMAX, 1: AXIS_HIT, 2: AXIS_HIT,
                      3: ESCAPE_DOWN, 4: ESCAPE_UP, 5: ESCAPE_UP,
                      6: ESCAPE_DOWN}[code]
            break

        s += h
        y = ynew
        f0 = f1
        rows.append((s, y[0], y[1], y[2], f0[2]))
        h *= min(5.0, max(0.2, 0.9 * err ** -0.2)) if err > 1e-30 else 5.0
    return np.array(rows), status


def integrate_phase(kind, p, q, eta0, x0, y0v, rel_tol, abs_tol, eta_max,
                    max_steps, h0, h_cap, overflow_lim):
    lam2 = (q - 1.0) / (p - 1.0)

    def rhs_at(eta, st):
        if st[0] <= 0.0:
            return None
        one_y2 = 1.0 + st[1] * st[1]
        fx = st[1] - st[0]
        fy = (p - 1.0) * one_y2 * (lam2 - st[0] * st[1]) / st[0]
        if kind == 1:
            fy -= 0.5 * one_y2 * math.exp(2.0 * eta) * (st[1] - st[0])
        return (fx, fy)

    return _drive_nonautonomous(rhs_at, eta0, (x0, y0v), eta_max, rel_tol,
                                abs_tol, max_steps, h0, h_cap, overflow_lim,
                                overflow_component=1)


def integrate_linear(kind, p, q, r0, g0, gp0, r1, rel_tol, abs_tol,
                     max_steps, h0, h_cap, overflow_lim):
    lam2 = (q - 1.0) / (p - 1.0)
    one = 1.0 + lam2

    def rhs_at(r, st):
        if kind == 0:
            gpp = one * (-((p - 1.0) / r + 0.5 * r) * st[1]
                         - (-0.5 + (p - 1.0) / (r * r)) * st[0])
        else:
            gpp = one * (-((p - 1.0) / r - 0.5 * r) * st[1]
                         - (0.5 + (p - 1.0) / (r * r)) * st[0])
        return (st[1], gpp)

    return _drive_nonautonomous(rhs_at, r0, (g0, gp0), r1, rel_tol, abs_tol,
                                max_steps, h0, h_cap, overflow_lim,
                                overflow_component=None)


_C_NODES = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)


def _drive_nonautonomous(rhs_at, t0, y0, t1, rel_tol, abs_tol, max_steps,
                         h0, h_cap, overflow_lim, overflow_component):
    direction = 1.0 if t1 >= t0 else -1.0
    t = t0
    y = y0
    rows = [(t0,) + tuple(y0)]
    f0 = rhs_at(t0, y0)
    if f0 is None:
        return np.array(rows), AXIS_HIT
    h = h0 * direction
    nstep = 0
    status = None
    while status is None:
        if nstep >= max_steps:
            status = STEP_LIMIT
            break
        if abs(h) > h_cap:
            h = h_cap * direction
        last = False
        if (t + h - t1) * direction >= 0.0:
            h = t1 - t
            last = True
        if abs(h) < 1e-15 * (1.0 + abs(t)):
            status = REACHED_RMAX if last else AXIS_HIT
            break
        ks = [f0]
        ok = True
        for irow, row in enumerate(_A):
            ytmp = tuple(
                yi + h * sum(a * k[i] for a, k in zip(row, ks))
                for i, yi in enumerate(y)
            )
            f = rhs_at(t + _C_NODES[irow + 1] * h, ytmp)
            if f is None:
                ok = False
                break
            ks.append(f)
        if ok:
            ynew = tuple(
                yi + h * sum(b * k[i] for b, k in zip(_B, ks))
                for i, yi in enumerate(y)
            )
            f1 = rhs_at(t + h, ynew)
            if f1 is None:
                ok = False
        if not ok:
            h *= 0.3
            continue
        ks.append(f1)
        err = _err_norm(y, ynew, ks, h, rel_tol, abs_tol)
        if err > 1.0:
            h *= max(0.2, 0.9 * err ** -0.2)
            continue
        nstep += 1
        t += h
        y = ynew
        f0 = f1
        if overflow_component is not None and abs(y[overflow_component]) > overflow_lim:
            rows.append((t,) + tuple(y))
            status = OVERFLOW
            break
        if overflow_component is None and max(abs(v) for v in y) > overflow_lim:
            rows.append((t,) + tuple(y))
            status = OVERFLOW
            break
        rows.append((t,) + tuple(y))
        if last:
            status = REACHED_RMAX
            break
        h *= min(5.0, max(0.2, 0.9 * err ** -0.2)) if err > 1e-30 else 5.0
    return np.array(rows), status


def flow_velocity(r, u, p, q, bc_left, bc_right):
    """Vectorized twin of the compiled per-marker velocity evaluation."""
    r = np.asarray(r, dtype=float)
    u = np.asarray(u, dtype=float)
    n = r.shape[0]
    ra = np.empty(n + 2)
    ua = np.empty(n + 2)
    ra[1:-1] = r
    ua[1:-1] = u
    if bc_left == 0:
        ra[0], ua[0] = -r[1], u[1]
    elif bc_left == 2:
        ra[0], ua[0] = 2.0 * r[0] - r[1], u[1]
    else:
        ra[0], ua[0] = r[0], u[0]
    if bc_right == 1:
        ra[-1], ua[-1] = r[-2], -u[-2]
    elif bc_right == 2:
        ra[-1], ua[-1] = 2.0 * r[-1] - r[-2], u[-2]
    elif bc_right == 0:
        ra[-1], ua[-1] = -r[-2], u[-2]
    else:
        ra[-1], ua[-1] = r[-1], u[-1]

    e1r = ra[1:-1] - ra[:-2]
    e1u = ua[1:-1] - ua[:-2]
    e2r = ra[2:] - ra[1:-1]
    e2u = ua[2:] - ua[1:-1]
    tr = ra[2:] - ra[:-2]
    tu = ua[2:] - ua[:-2]
    l1 = np.hypot(e1r, e1u)
    l2 = np.hypot(e2r, e2u)
    l3 = np.hypot(tr, tu)
    theta = np.arctan2(tu, tr)
    cross = e1r * e2u - e1u * e2r
    with np.errstate(divide="ignore", invalid="ignore"):
        kcur = 2.0 * cross / (l1 * l2 * l3)
        st = np.sin(theta)
        ct = np.cos(theta)
        term_p = np.where(r == 0.0, (p - 1.0) * kcur,
                          (p - 1.0) * st / np.where(r == 0.0, 1.0, r))
        term_q = np.where(u == 0.0, (q - 1.0) * kcur,
                          -(q - 1.0) * ct / np.where(u == 0.0, 1.0, u))
    hm = kcur + term_p + term_q
    vr = -hm * st
    vu = hm * ct
    if bc_left == 3:
        vr[0] = vu[0] = theta[0] = kcur[0] = hm[0] = 0.0
    if bc_right == 3:
        vr[-1] = vu[-1] = theta[-1] = kcur[-1] = hm[-1] = 0.0
    return vr, vu, theta, kcur, hm
