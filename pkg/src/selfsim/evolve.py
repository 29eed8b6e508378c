"""Time-dependent reduced mean curvature flow of profile curves.

Front tracking: markers move with normal velocity H (curve term plus the
orbital terms of the rotation factors), explicit stepping under the
parabolic stability bound dt <= dt_safety * h_min^2 / 2, uniform-arclength
cubic resampling, and per-step diagnostics. The scheme is exactly
equivariant under parabolic rescaling (all thresholds are relative), which
the tests exercise directly.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from . import _kernels
from ._kernels import codes
from .geometry import FlowParams, ProfileCurve, Ray, intersection_count, weighted_area

__all__ = [
    "BoundaryKind",
    "SchemeConfig",
    "FlowState",
    "FlowTrajectory",
    "StopReason",
    "run_flow",
    "self_similarity_residual",
    "intersection_audit",
    "sphere_profile",
    "cylinder_profile",
    "curve_from_points",
]


class BoundaryKind(enum.Enum):
    AXIS_U = codes.BC_AXIS_U      # endpoint on the u-axis, meets it orthogonally
    AXIS_R = codes.BC_AXIS_R      # endpoint on the r-axis, meets it orthogonally
    MIRROR = codes.BC_MIRROR      # flat mirror continuation (periodic/infinite)
    FIXED = codes.BC_FIXED        # frozen endpoint (outflow Dirichlet on a ray)


class StopReason(enum.Enum):
    REACHED_T_END = "reached_t_end"
    EXTINCT = "extinct"
    NECKPINCH = "neckpinch"
    STEP_UNDERFLOW = "step_underflow"


@dataclass
class SchemeConfig:
    dt_safety: float = 0.5
    resample_tol: float = 0.01  # target marker spacing
    record_every: int = 200
    reference_curves: list | None = None

    def __post_init__(self):
        if not 0.0 < self.dt_safety <= 1.0:
            raise ValueError("dt_safety must lie in (0, 1]")
        if self.resample_tol <= 0:
            raise ValueError("resample_tol must be positive")


@dataclass
class FlowState:
    t: float
    curve: ProfileCurve


@dataclass
class FlowTrajectory:
    states: list
    scheme: SchemeConfig
    params: FlowParams
    diagnostics: list = field(default_factory=list)
    stop_reason: StopReason | None = None
    t_singular: float | None = None

    @property
    def times(self):
        return np.array([st.t for st in self.states])


def curve_from_points(r, u, params: FlowParams,
                      bc_left: BoundaryKind, bc_right: BoundaryKind) -> ProfileCurve:
    """Build a ProfileCurve from marker positions, with discrete geometry."""
    r = np.asarray(r, dtype=float)
    u = np.asarray(u, dtype=float)
    _, _, theta, kcur, _ = _kernels.flow_velocity(
        np.ascontiguousarray(r), np.ascontiguousarray(u),
        float(params.p), float(params.q), bc_left.value, bc_right.value)
    seg = np.hypot(np.diff(r), np.diff(u))
    s = np.concatenate([[0.0], np.cumsum(seg)])
    samples = np.column_stack([s, r, u, theta, kcur])
    curve = ProfileCurve(samples, params)
    curve.bc_left = bc_left
    curve.bc_right = bc_right
    return curve


def sphere_profile(radius: float, params: FlowParams, n_pts: int = 200) -> ProfileCurve:
    """Quarter-circle profile of the round hypersurface, axis to axis.

    Built with exact arclength, tangent angle, and curvature so that
    quadrature oracles see no discretization bias; the flow re-derives
    discrete geometry from the positions anyway.
    """
    phi = np.linspace(0.0, 0.5 * math.pi, n_pts)
    r = radius * np.sin(phi)
    u = radius * np.cos(phi)
    r[0], u[-1] = 0.0, 0.0
    samples = np.column_stack([radius * phi, r, u, -phi,
                               np.full_like(phi, -1.0 / radius)])
    curve = ProfileCurve(samples, params)
    curve.bc_left = BoundaryKind.AXIS_U
    curve.bc_right = BoundaryKind.AXIS_R
    return curve


def cylinder_profile(height: float, length: float, params: FlowParams,
                     n_pts: int = 200) -> ProfileCurve:
    r = np.linspace(0.0, length, n_pts)
    u = np.full_like(r, height)
    samples = np.column_stack([r, r, u, np.zeros_like(r), np.zeros_like(r)])
    curve = ProfileCurve(samples, params)
    curve.bc_left = BoundaryKind.AXIS_U
    curve.bc_right = BoundaryKind.MIRROR
    return curve


def _resample(r, u, h_target, bc_left, bc_right):
    seg = np.hypot(np.diff(r), np.diff(u))
    s = np.concatenate([[0.0], np.cumsum(seg)])
    length = s[-1]
    n_new = max(12, int(round(length / h_target)) + 1)
    s_new = np.linspace(0.0, length, n_new)
    r_new = CubicSpline(s, r)(s_new)
    u_new = CubicSpline(s, u)(s_new)
    # clamp axis endpoints exactly
    if bc_left is BoundaryKind.AXIS_U:
        r_new[0] = 0.0
    if bc_right is BoundaryKind.AXIS_R:
        u_new[-1] = 0.0
    if bc_right is BoundaryKind.AXIS_U:
        r_new[-1] = 0.0
    if bc_left is BoundaryKind.FIXED:
        r_new[0], u_new[0] = r[0], u[0]
    if bc_right is BoundaryKind.FIXED:
        r_new[-1], u_new[-1] = r[-1], u[-1]
    return r_new, u_new


def run_flow(init: ProfileCurve, t_end: float, params: FlowParams,
             scheme: SchemeConfig,
             bc_left: BoundaryKind | None = None,
             bc_right: BoundaryKind | None = None,
             t_start: float = 0.0) -> FlowTrajectory:
    """Front-tracking evolution of a profile curve up to t_end.

    Boundary kinds default to axis pinning where the initial curve touches
    an axis and a frozen (ray Dirichlet) endpoint otherwise. The run stops
    early when the curve's extent falls below 10 * resample_tol
    (extinction; the singular time is estimated by the round-profile law)
    or when an interior neck reaches the same scale.
    """
    r = init.r.copy()
    u = init.u.copy()
    if bc_left is None:
        bc_left = getattr(init, "bc_left", None)
    if bc_right is None:
        bc_right = getattr(init, "bc_right", None)
    if bc_left is None:
        bc_left = BoundaryKind.AXIS_U if r[0] < 1e-12 else BoundaryKind.FIXED
    if bc_right is None:
        if u[-1] < 1e-12:
            bc_right = BoundaryKind.AXIS_R
        elif r[-1] < 1e-12:
            bc_right = BoundaryKind.AXIS_U
        else:
            bc_right = BoundaryKind.FIXED
    if bc_left is BoundaryKind.AXIS_U:
        r[0] = 0.0
    if bc_right is BoundaryKind.AXIS_R:
        u[-1] = 0.0
    if bc_right is BoundaryKind.AXIS_U:
        r[-1] = 0.0

    p, q = float(params.p), float(params.q)
    h_target = scheme.resample_tol
    r, u = _resample(r, u, h_target, bc_left, bc_right)
    t = t_start
    traj = FlowTrajectory(states=[], scheme=scheme, params=params)

    def snapshot():
        curve = curve_from_points(r, u, params, bc_left, bc_right)
        traj.states.append(FlowState(t, curve))
        hmax = float(np.max(np.abs(curve.k)))
        interior_u = _interior_u(u, bc_left, bc_right)
        traj.diagnostics.append({
            "t": t,
            "max_abs_k": hmax,
            "min_u": float(interior_u.min()) if interior_u.size else float("nan"),
            "extent": float(np.max(np.hypot(r, u))),
            "n_markers": int(len(r)),
        })

    snapshot()
    step_count = 0
    stop = None
    while t < t_end:
        vr, vu, theta, kcur, hmean = _kernels.flow_velocity(
            np.ascontiguousarray(r), np.ascontiguousarray(u), p, q,
            bc_left.value, bc_right.value)
        seg = np.hypot(np.diff(r), np.diff(u))
        h_min = float(seg.min())
        vmax = float(np.max(np.hypot(vr, vu)))
        dt = scheme.dt_safety * h_min * h_min / 2.0
        if vmax > 0:
            dt = min(dt, 0.25 * h_min / vmax)
        if dt < 1e-16 * max(1.0, abs(t)):
            stop = StopReason.STEP_UNDERFLOW
            break
        dt = min(dt, t_end - t)
        r = r + dt * vr
        u = u + dt * vu
        if bc_left is BoundaryKind.AXIS_U:
            r[0] = 0.0
        if bc_right is BoundaryKind.AXIS_R:
            u[-1] = 0.0
        if bc_right is BoundaryKind.AXIS_U:
            r[-1] = 0.0
        t += dt
        step_count += 1

        extent = float(np.max(np.hypot(r, u)))
        if extent < 10.0 * h_target:
            stop = StopReason.EXTINCT
            break
        # a neck is a locally thin horizontal throat, small relative to the
        # whole curve; global shrinkage is handled by the extent test above
        neck = _neck_scale(r, u, theta, bc_left, bc_right)
        if neck is not None and neck < 10.0 * h_target and neck < 0.2 * extent:
            stop = StopReason.NECKPINCH
            break
        seg = np.hypot(np.diff(r), np.diff(u))
        if seg.max() > 2.0 * seg.min() or seg.max() > 1.6 * h_target:
            r, u = _resample(r, u, h_target, bc_left, bc_right)
        if step_count % scheme.record_every == 0:
            snapshot()

    snapshot()
    if stop is None:
        stop = StopReason.REACHED_T_END
    traj.stop_reason = stop
    if stop is StopReason.EXTINCT:
        extent = float(np.max(np.hypot(r, u)))
        traj.t_singular = t + extent * extent / (2.0 * (params.n - 1.0))
    elif stop is StopReason.NECKPINCH:
        interior_u = _interior_u(u, bc_left, bc_right)
        umin = float(interior_u.min())
        traj.t_singular = t + umin * umin / (2.0 * (params.q - 1.0))
    return traj


def _interior_u(u, bc_left, bc_right):
    lo = 3 if bc_left is BoundaryKind.AXIS_R else 0
    hi = -3 if bc_right is BoundaryKind.AXIS_R else None
    return u[lo:hi] if u.size > 6 else u


def _neck_scale(r, u, theta, bc_left, bc_right):
    """Depth of the thinnest interior throat, if any.

    A neck is a strict interior local minimum of u among horizontal-ish
    markers that rises on both sides; curves that merely run low near an
    axis (or shrink globally) are not necks.
    """
    n = len(u)
    if n < 9:
        return None
    best = None
    for i in range(3, n - 3):
        if abs(math.cos(theta[i])) <= 0.7:
            continue
        if not (u[i] < u[i - 1] and u[i] < u[i + 1]):
            continue
        lo = max(0, i - 10)
        hi = min(n, i + 11)
        if max(u[lo:hi]) > 1.5 * u[i]:
            if best is None or u[i] < best:
                best = float(u[i])
    return best


def self_similarity_residual(traj: FlowTrajectory, profile: ProfileCurve,
                             mode: str, window_frac: float = 0.6,
                             window_inner: float = 0.0) -> float:
    """Deviation of the rescaled trajectory from a fixed reference profile.

    mode "shrink" rescales states by (-t)^(-1/2), mode "expand" by
    t^(-1/2); the distance is the largest point-to-polyline distance over
    samples in the annulus window_inner <= |x| <= window_frac * extent.
    The outer fraction is dropped because the artificial outflow boundary
    pollutes the solution; a nonzero inner radius excludes the axis cap of
    the discrete shrinking members, whose linearized instability rate
    ~ max|A|^2 makes pointwise tracking there exponentially expensive.
    """
    if mode not in ("shrink", "expand"):
        raise ValueError("mode must be 'shrink' or 'expand'")
    ref = np.column_stack([profile.r, profile.u])
    ref_extent = profile.extent
    worst = 0.0
    for state in traj.states:
        t = state.t
        if mode == "shrink":
            if t >= 0:
                raise ValueError("shrink mode needs t < 0")
            c = 1.0 / math.sqrt(-t)
        else:
            if t <= 0:
                raise ValueError("expand mode needs t > 0")
            c = 1.0 / math.sqrt(t)
        pts = np.column_stack([state.curve.r * c, state.curve.u * c])
        rad = np.hypot(pts[:, 0], pts[:, 1])
        lim = window_frac * min(ref_extent, float(np.max(rad)))
        sel = (rad <= lim) & (rad >= window_inner)
        if not np.any(sel):
            raise ValueError("empty overlap window between state and reference")
        d = _max_distance_to_polyline(pts[sel], ref)
        worst = max(worst, d)
    return worst


def _max_distance_to_polyline(pts, poly):
    a = poly[:-1]
    b = poly[1:]
    ab = b - a
    ab2 = np.maximum(np.einsum("ij,ij->i", ab, ab), 1e-300)
    worst = 0.0
    for x in pts:
        tpar = np.clip(np.einsum("ij,ij->i", x - a, ab) / ab2, 0.0, 1.0)
        proj = a + tpar[:, None] * ab
        d2 = np.einsum("ij,ij->i", x - proj, x - proj)
        worst = max(worst, math.sqrt(float(d2.min())))
    return worst


@dataclass
class IntersectionAudit:
    times: list
    raw_counts: list
    counts: list
    tangency_events: list
    nonincreasing: bool


def intersection_audit(traj: FlowTrajectory, reference,
                       kind: str = "static") -> IntersectionAudit:
    """Per-snapshot transverse intersection counts against a reference.

    kind "static" compares against a fixed profile (e.g. the companion
    graph); "rescaled-shrinker" dilates the reference by sqrt(-t) at each
    recorded time. Counts are nonincreasing for flows of the same reduced
    equation; isolated upticks at near-tangency are interpolated from
    neighbors and logged.
    """
    if kind not in ("static", "rescaled-shrinker"):
        raise ValueError("kind must be 'static' or 'rescaled-shrinker'")
    times = []
    raw = []
    for state in traj.states:
        if kind == "static" or isinstance(reference, Ray):
            ref = reference
        else:
            if state.t >= 0:
                raise ValueError("rescaled-shrinker reference needs t < 0")
            ref = reference.dilate(math.sqrt(-state.t))
        rep = intersection_count(state.curve, ref)
        times.append(state.t)
        raw.append(rep.crossings + (0 if not rep.ambiguous else 0))
    counts = list(raw)
    events = []
    for i in range(1, len(counts) - 1):
        if counts[i] > counts[i - 1] and counts[i + 1] <= counts[i - 1]:
            events.append((times[i], raw[i], counts[i - 1]))
            counts[i] = counts[i - 1]
    noninc = all(c1 <= c0 for c0, c1 in zip(counts[:-1], counts[1:]))
    return IntersectionAudit(times=times, raw_counts=raw, counts=counts,
                             tangency_events=events, nonincreasing=noninc)
