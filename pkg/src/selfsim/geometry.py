"""Symmetry-reduced geometry of rotationally invariant hypersurfaces.

A hypersurface invariant under the block rotation group acting on
R^p x R^q is generated by a planar profile curve in the closed quadrant
(r, u) = (|y|, |z|). This module holds the profile data structures,
pointwise curvature formulas, weighted area quadrature, and transverse
intersection counting between profiles.

Orientation convention throughout: tangent (cos th, sin th), normal
nu = (-sin th, cos th), curvature k = d th / ds. With this convention a
round profile traversed from the u-axis to the r-axis has H = -(n-1)/R
with respect to the outward normal.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "FlowParams",
    "ConeData",
    "ProfilePoint",
    "ProfileCurve",
    "Ray",
    "IntersectionReport",
    "AxisDomainError",
    "unit_sphere_area",
    "cone_slope",
    "principal_curvatures",
    "mean_curvature",
    "second_fundamental_norm",
    "weighted_area",
    "window_segments",
    "intersection_count",
]

# a crossing must clear this relative excursion on both sides; smaller
# touches are reported as tangencies
CROSSING_RTOL = 1e-9


class AxisDomainError(ValueError):
    """Pointwise curvature quantities are undefined on the axes r=0, u=0."""


@dataclass(frozen=True)
class FlowParams:
    """Rotation-orbit dimensions: factors p >= 1 and q >= 2, ambient n = p+q."""

    p: int
    q: int

    def __post_init__(self):
        if self.p < 1:
            raise ValueError(f"p must be >= 1, got {self.p}")
        if self.q < 2:
            raise ValueError(f"q must be >= 2, got {self.q}")

    @property
    def n(self) -> int:
        return self.p + self.q


@dataclass(frozen=True)
class ConeData:
    lambda_s: float
    alpha_s: float


def unit_sphere_area(m: int) -> float:
    """Surface area of the unit m-sphere; the 0-sphere counts two points."""
    if m < 0:
        raise ValueError("sphere dimension must be nonnegative")
    return 2.0 * math.pi ** ((m + 1) / 2.0) / math.gamma((m + 1) / 2.0)


def cone_slope(params: FlowParams) -> ConeData:
    """Slope and opening angle of the minimal cone for p, q >= 2."""
    if params.p < 2:
        raise ValueError("the minimal cone requires p >= 2")
    lam = math.sqrt((params.q - 1.0) / (params.p - 1.0))
    return ConeData(lambda_s=lam, alpha_s=math.atan(lam))


@dataclass(frozen=True)
class ProfilePoint:
    s: float
    r: float
    u: float
    theta: float
    k: float


def principal_curvatures(pt: ProfilePoint, params: FlowParams):
    """Principal curvatures [(value, multiplicity), ...] at a profile point.

    The profile direction contributes k once, the two orbit spheres
    contribute -cos th/u with multiplicity q-1 and sin th/r with
    multiplicity p-1.
    """
    if pt.r <= 0.0 or pt.u <= 0.0:
        raise AxisDomainError("principal curvatures undefined on an axis")
    return [
        (pt.k, 1),
        (-math.cos(pt.theta) / pt.u, params.q - 1),
        (math.sin(pt.theta) / pt.r, params.p - 1),
    ]


def mean_curvature(pt: ProfilePoint, params: FlowParams) -> float:
    if pt.r <= 0.0 or pt.u <= 0.0:
        raise AxisDomainError("mean curvature undefined on an axis")
    return (
        pt.k
        + (params.p - 1.0) * math.sin(pt.theta) / pt.r
        - (params.q - 1.0) * math.cos(pt.theta) / pt.u
    )


def second_fundamental_norm(pt: ProfilePoint, params: FlowParams) -> float:
    """Squared norm of the second fundamental form at a profile point."""
    if pt.r <= 0.0 or pt.u <= 0.0:
        raise AxisDomainError("|A|^2 undefined on an axis")
    return (
        pt.k * pt.k
        + (params.q - 1.0) * (math.cos(pt.theta) / pt.u) ** 2
        + (params.p - 1.0) * (math.sin(pt.theta) / pt.r) ** 2
    )


class ProfileCurve:
    """Arclength-sampled profile curve.

    Wraps an (n, 5) array with columns (s, r, u, theta, k); s strictly
    increasing. Derivatives of position are known exactly from theta, so
    panel-wise cubic Hermite interpolation is available between samples.
    """

    def __init__(self, samples: np.ndarray, params: FlowParams,
                 termination=None):
        samples = np.asarray(samples, dtype=float)
        if samples.ndim != 2 or samples.shape[1] != 5:
            raise ValueError("samples must be an (n, 5) array")
        if samples.shape[0] >= 2 and not np.all(np.diff(samples[:, 0]) > 0):
            raise ValueError("arclength must be strictly increasing")
        self.samples = samples
        self.params = params
        self.termination = termination

    @property
    def s(self):
        return self.samples[:, 0]

    @property
    def r(self):
        return self.samples[:, 1]

    @property
    def u(self):
        return self.samples[:, 2]

    @property
    def theta(self):
        return self.samples[:, 3]

    @property
    def k(self):
        return self.samples[:, 4]

    def __len__(self):
        return self.samples.shape[0]

    def point(self, i: int) -> ProfilePoint:
        s, r, u, th, k = self.samples[i]
        return ProfilePoint(s, r, u, th, k)

    @property
    def length(self) -> float:
        return float(self.samples[-1, 0] - self.samples[0, 0])

    @property
    def extent(self) -> float:
        return float(np.max(np.hypot(self.r, self.u)))

    def dilate(self, factor: float) -> "ProfileCurve":
        """Homothety by `factor`: lengths scale, angles fixed, k scales 1/factor."""
        if factor <= 0:
            raise ValueError("dilation factor must be positive")
        out = self.samples.copy()
        out[:, 0] *= factor
        out[:, 1] *= factor
        out[:, 2] *= factor
        out[:, 4] /= factor
        return ProfileCurve(out, self.params, self.termination)

    def resampled(self, n: int) -> "ProfileCurve":
        """Uniform-arclength Hermite resampling to n points."""
        s_new = np.linspace(self.samples[0, 0], self.samples[-1, 0], n)
        return ProfileCurve(self.eval(s_new), self.params, self.termination)

    def eval(self, s_new: np.ndarray) -> np.ndarray:
        """Hermite-interpolated samples at the given arclengths."""
        s_new = np.atleast_1d(np.asarray(s_new, dtype=float))
        s = self.s
        idx = np.clip(np.searchsorted(s, s_new, side="right") - 1, 0, len(s) - 2)
        h = s[idx + 1] - s[idx]
        xi = (s_new - s[idx]) / h
        out = np.empty((len(s_new), 5))
        out[:, 0] = s_new
        h00 = (2 * xi - 3) * xi * xi + 1
        h10 = ((xi - 2) * xi + 1) * xi
        h01 = (3 - 2 * xi) * xi * xi
        h11 = (xi - 1) * xi * xi
        for col, dcol in ((1, np.cos), (2, np.sin)):
            y0 = self.samples[idx, col]
            y1 = self.samples[idx + 1, col]
            d0 = dcol(self.samples[idx, 3])
            d1 = dcol(self.samples[idx + 1, 3])
            out[:, col] = h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1
        th0 = self.samples[idx, 3]
        th1 = self.samples[idx + 1, 3]
        k0 = self.samples[idx, 4]
        k1 = self.samples[idx + 1, 4]
        out[:, 3] = h00 * th0 + h10 * h * k0 + h01 * th1 + h11 * h * k1
        out[:, 4] = np.interp(s_new, s, self.k)
        return out

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["s", "r", "u", "theta", "k"])
            for row in self.samples:
                writer.writerow([f"{v:.17g}" for v in row])

    @classmethod
    def from_csv(cls, path, params: FlowParams) -> "ProfileCurve":
        data = np.loadtxt(path, delimiter=",", skiprows=1)
        return cls(np.atleast_2d(data), params)


@dataclass(frozen=True)
class Ray:
    """The ray u = slope * r, r >= 0, through the origin."""

    slope: float


@dataclass
class IntersectionReport:
    crossings: int
    tangencies: int
    ambiguous: bool = False
    crossing_r: list = field(default_factory=list)

    def __int__(self):
        return self.crossings


def _runs_to_counts(f, scale):
    """Count sign changes of f, treating sub-threshold runs as touches."""
    tol = CROSSING_RTOL * scale
    crossings = 0
    tangencies = 0
    locs = []
    last_sign = 0
    pending_touch = False
    touch_start = None
    for i, v in enumerate(f):
        if abs(v) <= tol[i]:
            if not pending_touch:
                pending_touch = True
                touch_start = i
            continue
        sign = 1 if v > 0 else -1
        if last_sign == 0:
            last_sign = sign
            pending_touch = False
            continue
        if sign != last_sign:
            crossings += 1
            locs.append(i)
        elif pending_touch:
            tangencies += 1
        pending_touch = False
        last_sign = sign
    return crossings, tangencies, locs


def _separation_from_ray(curve: ProfileCurve, ray: Ray):
    f = curve.u - ray.slope * curve.r
    scale = np.maximum(np.hypot(curve.r, curve.u), 1e-300)
    return f, scale


def _separation_from_polyline(pts, poly):
    """Signed distance of points to a polyline, by nearest segment."""
    a = poly[:-1]
    b = poly[1:]
    ab = b - a
    ab2 = np.maximum(np.einsum("ij,ij->i", ab, ab), 1e-300)
    out = np.empty(len(pts))
    for i, x in enumerate(pts):
        t = np.clip(np.einsum("ij,ij->i", x - a, ab) / ab2, 0.0, 1.0)
        proj = a + t[:, None] * ab
        d2 = np.einsum("ij,ij->i", x - proj, x - proj)
        j = int(np.argmin(d2))
        cross = ab[j, 0] * (x[1] - a[j, 1]) - ab[j, 1] * (x[0] - a[j, 0])
        out[i] = math.copysign(math.sqrt(d2[j]), cross if cross != 0 else 1.0)
    return out


def intersection_count(curve_a: ProfileCurve, other) -> IntersectionReport:
    """Transverse crossings between a profile and a ray or second profile.

    Touches that do not produce a sign change of the separation count as
    tangencies. Curves sharing an endpoint (or a curve against itself) are
    flagged ambiguous.
    """
    if isinstance(other, Ray):
        f, scale = _separation_from_ray(curve_a, other)
        crossings, tangencies, locs = _runs_to_counts(f, scale)
        report = IntersectionReport(crossings, tangencies,
                                    crossing_r=[float(curve_a.r[i]) for i in locs])
        return report

    if other is curve_a or np.array_equal(curve_a.samples, other.samples):
        return IntersectionReport(0, 0, ambiguous=True)

    pa = np.column_stack([curve_a.r, curve_a.u])
    pb = np.column_stack([other.r, other.u])
    scale_ends = max(curve_a.extent, other.extent)
    for ea in (pa[0], pa[-1]):
        for eb in (pb[0], pb[-1]):
            if np.hypot(*(ea - eb)) <= CROSSING_RTOL * scale_ends:
                return IntersectionReport(0, 0, ambiguous=True)

    f = _separation_from_polyline(pa, pb)
    scale = np.maximum(np.hypot(pa[:, 0], pa[:, 1]), 1e-300)
    c_ab, t_ab, locs = _runs_to_counts(f, scale)
    g = _separation_from_polyline(pb, pa)
    scale_b = np.maximum(np.hypot(pb[:, 0], pb[:, 1]), 1e-300)
    c_ba, t_ba, _ = _runs_to_counts(g, scale_b)
    report = IntersectionReport(max(c_ab, c_ba), max(t_ab, t_ba),
                                ambiguous=(c_ab != c_ba),
                                crossing_r=[float(pa[i, 0]) for i in locs])
    return report


# 5-node Gauss-Legendre used per arclength panel
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(5)


def _panel_quadrature(curve: ProfileCurve, integrand, s_lo=None, s_hi=None):
    """Composite Gauss over the integrator's accepted-step panels.

    `integrand(r, u, theta, k, s)` is evaluated on Hermite-interpolated
    positions at the Gauss nodes of every panel inside [s_lo, s_hi].
    """
    s = curve.s
    lo = s[0] if s_lo is None else max(s_lo, s[0])
    hi = s[-1] if s_hi is None else min(s_hi, s[-1])
    if hi <= lo:
        return 0.0
    edges = np.unique(np.clip(s, lo, hi))
    if edges[0] > lo:
        edges = np.concatenate([[lo], edges])
    if edges[-1] < hi:
        edges = np.concatenate([edges, [hi]])
    mids = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1:] - edges[:-1])
    nodes = (mids[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
    weights = (half[:, None] * _GL_WEIGHTS[None, :]).ravel()
    vals = curve.eval(nodes)
    fvals = integrand(vals[:, 1], vals[:, 2], vals[:, 3], vals[:, 4], nodes)
    if not np.all(np.isfinite(fvals)):
        raise ValueError("non-finite integrand in curve quadrature")
    return float(np.sum(weights * fvals))


def window_segments(curve: ProfileCurve, window: float):
    """Maximal arclength intervals where the profile lies in the ball |x| <= window.

    Boundary crossings are refined by bisection on the Hermite interpolant so
    clipped quadrature keeps its panel accuracy.
    """
    s = curve.s
    g = np.hypot(curve.r, curve.u) - window

    def g_at(sv):
        row = curve.eval(np.array([sv]))[0]
        return math.hypot(row[1], row[2]) - window

    segments = []
    open_lo = s[0] if g[0] <= 0 else None
    for i in range(len(s) - 1):
        if g[i] <= 0 < g[i + 1] or g[i] > 0 >= g[i + 1]:
            lo, hi = s[i], s[i + 1]
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                if (g_at(mid) > 0) == (g[i] > 0):
                    lo = mid
                else:
                    hi = mid
            crossing = 0.5 * (lo + hi)
            if g[i] <= 0:
                segments.append((open_lo, crossing))
                open_lo = None
            else:
                open_lo = crossing
    if open_lo is not None:
        segments.append((open_lo, s[-1]))
    return segments


def weighted_area(curve: ProfileCurve, weight: str = "unit",
                  window: float | None = None) -> float:
    """Weighted area of the generated hypersurface, reduced to the profile.

    weight is one of "unit", "gaussian_minus" (exp(-|x|^2/4)) or
    "gaussian_plus" (exp(+|x|^2/4)); the latter requires a finite ball
    window because the integrand grows superexponentially.
    """
    p, q = curve.params.p, curve.params.q
    if weight not in ("unit", "gaussian_minus", "gaussian_plus"):
        raise ValueError(f"unknown weight {weight!r}")
    if weight == "gaussian_plus" and window is None:
        raise ValueError("gaussian_plus weight requires a finite window")
    orbit = unit_sphere_area(p - 1) * unit_sphere_area(q - 1)

    def integrand(r, u, theta, k, s):
        base = r ** (p - 1) * u ** (q - 1)
        if weight == "unit":
            w = np.ones_like(r)
        elif weight == "gaussian_minus":
            w = np.exp(-(r * r + u * u) / 4.0)
        else:
            w = np.exp((r * r + u * u) / 4.0)
        return base * w

    if window is None:
        return orbit * _panel_quadrature(curve, integrand)
    total = 0.0
    for s_lo, s_hi in window_segments(curve, window):
        total += _panel_quadrature(curve, integrand, s_lo, s_hi)
    return orbit * total
