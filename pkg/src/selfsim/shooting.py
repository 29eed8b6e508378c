"""Root-finding layers over the profile integrators.

Shooting produces the objects the rest of the package certifies: the
companion minimal graph spiraling into the cone, the continuous expander
family a -> alpha(a), the discrete shrinker family a_k found by bisection
on the escape direction, critical apertures of double cones, continuation
counting, and the equal-angle junction construction.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .geometry import FlowParams, ProfileCurve, Ray, cone_slope, intersection_count
from .ode import (
    EquationKind,
    IntegratorConfig,
    TerminationTag,
    integrate_profile,
    series_start,
)

__all__ = [
    "ExpanderRecord",
    "ShrinkerClassTag",
    "ShrinkerClass",
    "ShrinkerRecord",
    "CriticalAngleResult",
    "CompanionResult",
    "TripleJunctionResult",
    "companion",
    "expander_slope",
    "alpha_curve",
    "critical_angle",
    "aperture_solutions",
    "classify_shrinker",
    "find_shrinkers",
    "count_continuations",
    "triple_junction",
]

# classification thresholds: a profile "turns down" once theta drops below
# -THETA_TOL and "turns up" once it passes vertical by the same margin
THETA_TOL = 1e-6

# auto-extension ceiling for expander runs that have not yet reached the
# friction-dominated regime (large starting heights)
EXPANDER_RMAX_LIMIT = 64.0


@dataclass
class ExpanderRecord:
    a: float
    lambda_a: float
    alpha_a: float
    crossings: int | None = None
    stabilized: bool = True
    err: float = 0.0

    @property
    def offset(self) -> float:
        """tan(alpha(a)) relative to the cone slope; only for p >= 2."""
        return self.lambda_a


class ShrinkerClassTag(enum.Enum):
    UP = "up"
    DOWN = "down"
    COMPLETE = "complete"
    AMBIGUOUS = "ambiguous"


@dataclass
class ShrinkerClass:
    tag: ShrinkerClassTag
    escape_r: float | None = None


@dataclass
class ShrinkerRecord:
    k: int
    a_k: float
    alpha_k: float
    lambda_k: float
    bracket_width: float
    bracket: tuple
    sign: int
    readout_window: tuple | None = None


@dataclass
class CriticalAngleResult:
    alpha_crit: float
    argmin_a: float
    sweep: list
    boundary_flag: bool = False
    widened: bool = False


@dataclass
class CompanionResult:
    curve: ProfileCurve
    crossings: int
    crossing_r: list
    final_phase: tuple
    fixed_point_distance: float


@dataclass
class TripleJunctionResult:
    a_star: float
    junction: tuple
    angles: tuple
    endpoint_angles: tuple
    monotone: bool = True


def _map_maybe_parallel(fn, items, threads):
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            return list(ex.map(fn, items))
    return [fn(x) for x in items]


def companion(params: FlowParams, cfg: IntegratorConfig) -> CompanionResult:
    """The minimal graph with v(0) = 1; by homothety this fixes the family."""
    cone = cone_slope(params)
    if not 4 <= params.n <= 7:
        raise ValueError("the oscillatory companion requires 4 <= n <= 7")
    start = series_start(EquationKind.MINIMAL, 1.0, params)
    curve = integrate_profile(EquationKind.MINIMAL, start, params, cfg)
    rep = intersection_count(curve, Ray(cone.lambda_s))
    X = curve.u[-1] / curve.r[-1]
    Y = math.tan(curve.theta[-1])
    dist = math.hypot(X - cone.lambda_s, Y - cone.lambda_s)
    return CompanionResult(curve, rep.crossings, rep.crossing_r, (X, Y), dist)


def _expander_curve(a: float, params: FlowParams, cfg: IntegratorConfig,
                    r_max: float) -> ProfileCurve:
    start = series_start(EquationKind.EXPANDER, a, params)
    return integrate_profile(EquationKind.EXPANDER, start, params,
                             cfg.with_rmax(r_max))


def expander_slope(a: float, params: FlowParams,
                   cfg: IntegratorConfig) -> ExpanderRecord:
    """Limiting ray slope of the expander with u(0) = a.

    Every such profile is asymptotic to a ray u = lambda(a) r. Past the
    oscillatory region the trajectory rides the friction-dominated slow
    manifold Y - X = 2((q-1) - (p-1) X Y)/(X r^2); the remaining drift to
    r = infinity integrates to (Y - X)/2, so lambda = (X + Y)/2 up to
    O(r^-4). The integration range is extended until the slow-manifold
    balance holds (large a needs r beyond the default range).
    """
    if a <= 0:
        raise ValueError("a must be positive")
    p, q = params.p, params.q
    r_end = cfg.r_max
    curve = None
    on_manifold = False
    while True:
        curve = _expander_curve(a, params, cfg, r_end)
        if curve.termination.tag is not TerminationTag.REACHED_RMAX:
            raise ArithmeticError(
                f"expander integration ended with {curve.termination.tag}")
        rr = curve.r[-1]
        X = curve.u[-1] / rr
        Y = math.tan(curve.theta[-1])
        gap = Y - X
        manifold_gap = 2.0 * ((q - 1.0) - (p - 1.0) * X * Y) / (X * rr * rr)
        if abs(gap - manifold_gap) <= 0.05 * abs(manifold_gap) + 1e-9:
            on_manifold = True
            break
        if r_end >= EXPANDER_RMAX_LIMIT:
            break
        r_end = min(EXPANDER_RMAX_LIMIT, 1.6 * r_end)
    lam = 0.5 * (X + Y)
    stabilized = bool(on_manifold and abs(gap) < 1e-8 and abs(gap) / rr < 1e-8)
    err = abs(gap - manifold_gap) * 0.5 + abs(manifold_gap) * 2.0 / (rr * rr)
    crossings = None
    if params.p >= 2:
        crossings = intersection_count(curve, Ray(cone_slope(params).lambda_s)).crossings
    return ExpanderRecord(a=a, lambda_a=lam, alpha_a=math.atan(lam),
                          crossings=crossings, stabilized=stabilized, err=err)


@dataclass
class AlphaCurve:
    records: list
    extrema: list = field(default_factory=list)  # (a, lambda_a - lam_s)

    def offsets(self, lam_s: float):
        a = np.array([rec.a for rec in self.records])
        f = np.array([rec.lambda_a for rec in self.records]) - lam_s
        return a, f


def _golden_extremum(fn, a_lo, a_hi, maximize, rel_tol=1e-10, max_iter=120):
    """Golden-section extremum search with a noise-floor early stop."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    sgn = 1.0 if maximize else -1.0
    x1 = a_hi - invphi * (a_hi - a_lo)
    x2 = a_lo + invphi * (a_hi - a_lo)
    f1 = sgn * fn(x1)
    f2 = sgn * fn(x2)
    for _ in range(max_iter):
        if a_hi - a_lo <= rel_tol * a_lo:
            break
        if f1 >= f2:
            a_hi, x2, f2 = x2, x1, f1
            x1 = a_hi - invphi * (a_hi - a_lo)
            f1 = sgn * fn(x1)
        else:
            a_lo, x1, f1 = x1, x2, f2
            x2 = a_lo + invphi * (a_hi - a_lo)
            f2 = sgn * fn(x2)
    x_best = x1 if f1 >= f2 else x2
    f_best = max(f1, f2)
    return x_best, sgn * f_best


def alpha_curve(a_grid, params: FlowParams, cfg: IntegratorConfig,
                threads: int | None = None, refine: bool = True) -> AlphaCurve:
    """expander_slope over a sorted grid, with extrema localized by
    golden-section refinement."""
    a_grid = np.asarray(a_grid, dtype=float)
    if np.any(np.diff(a_grid) <= 0):
        raise ValueError("a_grid must be sorted ascending")
    records = _map_maybe_parallel(lambda a: expander_slope(a, params, cfg),
                                  a_grid, threads)
    curve = AlphaCurve(records=records)
    if not refine or params.p < 2:
        return curve
    lam_s = cone_slope(params).lambda_s
    f = np.array([rec.lambda_a for rec in records]) - lam_s

    def val(a):
        return expander_slope(a, params, cfg).lambda_a - lam_s

    for i in range(1, len(a_grid) - 1):
        if f[i] >= f[i - 1] and f[i] >= f[i + 1] and f[i] > 0:
            a_star, f_star = _golden_extremum(val, a_grid[i - 1], a_grid[i + 1], True)
            curve.extrema.append((a_star, f_star))
        elif f[i] <= f[i - 1] and f[i] <= f[i + 1] and f[i] < 0:
            a_star, f_star = _golden_extremum(val, a_grid[i - 1], a_grid[i + 1], False)
            curve.extrema.append((a_star, f_star))
    return curve


def critical_angle(params: FlowParams, cfg: IntegratorConfig,
                   b_range=(0.05, 20.0), n_grid: int = 60,
                   threads: int | None = None) -> CriticalAngleResult:
    """Critical aperture of the double cone: inf over b of alpha(b), p = 1.

    The double cone u = |r| tan(alpha) bounds rotationally symmetric
    expanders that are graphs over the full axis; sweeping the waist height
    b and minimizing the asymptotic aperture gives the smallest angle at
    which a one-sheeted evolution exists.
    """
    if params.p != 1:
        raise ValueError("double-cone aperture uses the single-axis chart p = 1")
    lo, hi = b_range
    widened = False
    for _attempt in range(2):
        grid = np.geomspace(lo, hi, n_grid)
        records = _map_maybe_parallel(
            lambda b: expander_slope(b, params, cfg), grid, threads)
        alphas = np.array([rec.alpha_a for rec in records])
        i = int(np.argmin(alphas))
        if 0 < i < len(grid) - 1:
            break
        lo, hi = lo / 10.0, hi * 10.0
        widened = True
    boundary = not (0 < i < len(grid) - 1)

    def val(b):
        return expander_slope(b, params, cfg).alpha_a

    if not boundary:
        b_star, a_star = _golden_extremum(val, grid[i - 1], grid[i + 1],
                                          maximize=False, rel_tol=1e-12)
        # golden interval well below 1e-6 rad in alpha near the flat minimum
        alpha_min = a_star
    else:
        b_star, alpha_min = grid[i], alphas[i]
    return CriticalAngleResult(alpha_crit=alpha_min, argmin_a=b_star,
                               sweep=records, boundary_flag=boundary,
                               widened=widened)


def aperture_solutions(result: CriticalAngleResult, alpha: float,
                       params: FlowParams, cfg: IntegratorConfig):
    """The b values with alpha(b) = alpha, one per monotone branch of the sweep.

    Above the critical angle the double cone admits (at least) two
    one-sheeted solutions of the same topology but different geometry.
    """
    if alpha <= result.alpha_crit:
        return []
    grid = np.array([rec.a for rec in result.sweep])
    alphas = np.array([rec.alpha_a for rec in result.sweep])
    i0 = int(np.argmin(alphas))

    def g(b):
        return expander_slope(b, params, cfg).alpha_a - alpha

    sols = []
    for side in (slice(i0, None, -1), slice(i0, None, 1)):
        bs = grid[side]
        fs = alphas[side] - alpha
        hit = np.nonzero((fs[:-1] < 0) & (fs[1:] >= 0))[0]
        if len(hit) == 0:
            continue
        lo, hi = sorted((bs[hit[0]], bs[hit[0] + 1]))
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if (g(mid) < 0) == (g(lo) < 0):
                lo = mid
            else:
                hi = mid
            if hi - lo < 1e-10 * lo:
                break
        sols.append(0.5 * (lo + hi))
    return sols


def classify_shrinker(a: float, params: FlowParams,
                      cfg: IntegratorConfig) -> ShrinkerClass:
    """Escape direction of the shrinker profile started at u(0) = a.

    The dichotomy is the turning of the inclination: a profile that stops
    being an increasing graph going down (theta <= 0) is Down, one passing
    vertical (theta >= pi/2) is Up. Complete graphs reach r_max with a
    stabilized positive slope. (A band monitor on u - lam_s r fires earlier
    but misfires on members whose limiting slope differs from the cone by
    more than the band; the turning test has no such blind spot.)
    """
    if a <= 0:
        raise ValueError("a must be positive")
    if params.p < 2:
        raise ValueError("shrinker shooting requires p >= 2")
    start = series_start(EquationKind.SHRINKER, a, params)
    curve = integrate_profile(
        EquationKind.SHRINKER, start, params, cfg,
        theta_down=-THETA_TOL, theta_up=math.pi / 2.0 + THETA_TOL)
    tag = curve.termination.tag
    r_end = float(curve.r[-1])
    if tag is TerminationTag.ESCAPE_UP:
        return ShrinkerClass(ShrinkerClassTag.UP, r_end)
    if tag is TerminationTag.ESCAPE_DOWN:
        return ShrinkerClass(ShrinkerClassTag.DOWN, r_end)
    if tag is TerminationTag.AXIS_HIT:
        # returned to an axis without ever turning: treat as Down (the
        # profile left the graph family on the low side)
        return ShrinkerClass(ShrinkerClassTag.DOWN, r_end)
    if tag is TerminationTag.REACHED_RMAX:
        X = curve.u[-1] / curve.r[-1]
        Y = math.tan(curve.theta[-1])
        if Y > 0 and abs(Y - X) < cfg.escape_band:
            return ShrinkerClass(ShrinkerClassTag.COMPLETE, None)
        # the exact cylinder keeps theta = 0 and never stabilizes u/r -> Y
        if abs(Y) < 1e-4 and curve.u[-1] < math.sqrt(2.0 * (params.q - 1.0)) * 1.5:
            return ShrinkerClass(ShrinkerClassTag.COMPLETE, None)
    return ShrinkerClass(ShrinkerClassTag.AMBIGUOUS, None)


def _shrinker_profile(a, params, cfg):
    start = series_start(EquationKind.SHRINKER, a, params)
    return integrate_profile(
        EquationKind.SHRINKER, start, params, cfg,
        theta_down=-THETA_TOL, theta_up=math.pi / 2.0 + THETA_TOL)


def _slope_readout(curve: ProfileCurve, lam_s: float, k_true: int | None = None):
    """Limiting slope of a near-complete shrinker graph.

    Reads m = (u/r + u_r)/2 (which cancels the O(r^-2) outer correction) at
    the flattest interior point of the first window where |u_r - u/r| <
    1e-4 beyond the crossing zone; the growing-mode contamination from the
    finite bisection bracket is still exponentially small there.
    """
    rep = intersection_count(curve, Ray(lam_s))
    crossings = rep.crossing_r
    if k_true is not None:
        # the escape dive of a bracket-endpoint profile adds one spurious
        # late crossing; gate on the k genuine ones only
        crossings = crossings[:k_true]
    r_gate = 1.3 * crossings[-1] if crossings else 0.8
    r_gate = max(r_gate, 0.8)
    r = curve.r
    Y = np.tan(curve.theta)
    X = curve.u / r
    m = 0.5 * (X + Y)
    inside = (r > r_gate) & (np.abs(Y - X) < 1e-4)
    if not np.any(inside):
        return None, None
    idx = np.nonzero(inside)[0]
    # first contiguous run only: later dips are growing-mode artifacts
    run_end = len(idx)
    for j in range(len(idx) - 1):
        if idx[j + 1] != idx[j] + 1:
            run_end = j + 1
            break
    run = idx[:run_end]
    if len(run) < 3:
        i_best = run[len(run) // 2]
        return float(m[i_best]), (float(r[run[0]]), float(r[run[-1]]))
    drift = np.abs(np.gradient(m[run], r[run]))
    i_best = run[int(np.argmin(drift))]
    return float(m[i_best]), (float(r[run[0]]), float(r[run[-1]]))


def find_shrinkers(k_max: int, params: FlowParams, cfg: IntegratorConfig,
                   bracket_rel: float = 1e-13) -> list[ShrinkerRecord]:
    """Discrete shrinker family by bisection on the escape direction.

    Scans a downward from the round-profile height, brackets every
    classification flip, and bisects each to relative width bracket_rel.
    The k-th member crosses the cone ray in exactly k points; the count is
    the minimum over the two bracket endpoints because the endpoint on the
    escape side acquires exactly one spurious crossing during its dive.
    The k = 1 member is the exact cylinder (limiting aperture zero).
    """
    if params.p < 2 or not 4 <= params.n <= 7:
        raise ValueError("shrinker family requires p >= 2 and 4 <= n <= 7")
    if k_max < 1 or k_max > 8:
        raise ValueError("k_max must be in 1..8 (double-precision budget)")
    cone = cone_slope(params)
    lam_s = cone.lambda_s
    mu = math.sqrt(8.0 - (params.n - 5.0) ** 2) / 2.0
    ratio = math.exp(math.pi / (12.0 * mu))
    a_hi = math.sqrt(2.0 * (params.n - 1.0))
    a_floor = a_hi * math.exp(-(k_max + 2.5) * math.pi / mu)

    def cls(a):
        c = classify_shrinker(a, params, cfg)
        if c.tag is ShrinkerClassTag.AMBIGUOUS:
            deep = IntegratorConfig(
                rel_tol=cfg.rel_tol, abs_tol=cfg.abs_tol,
                r_max=min(cfg.r_max + 4.0, 14.5), max_steps=cfg.max_steps,
                escape_band=cfg.escape_band, h_cap=cfg.h_cap)
            c = classify_shrinker(a, params, deep)
        return c.tag

    # downward scan collecting classification flips
    flips = []
    a_prev = a_hi
    t_prev = cls(a_prev)
    a = a_hi / ratio
    while a > a_floor and len(flips) < k_max:
        t = cls(a)
        if t is not t_prev and t_prev in (ShrinkerClassTag.UP, ShrinkerClassTag.DOWN) \
                and t in (ShrinkerClassTag.UP, ShrinkerClassTag.DOWN):
            flips.append((a, a_prev, t, t_prev))
        if t in (ShrinkerClassTag.UP, ShrinkerClassTag.DOWN):
            a_prev, t_prev = a, t
        a /= ratio

    records = []
    for idx, (lo, hi, t_lo, t_hi) in enumerate(flips):
        while hi - lo > bracket_rel * 0.5 * (hi + lo):
            mid = 0.5 * (lo + hi)
            t = cls(mid)
            if t is t_lo:
                lo = mid
            elif t is t_hi:
                hi = mid
            else:
                break  # ambiguous at machine scale: keep current bracket
        a_k = 0.5 * (lo + hi)
        c_lo = _shrinker_profile(lo, params, cfg)
        c_hi = _shrinker_profile(hi, params, cfg)
        k_count = min(intersection_count(c_lo, Ray(lam_s)).crossings,
                      intersection_count(c_hi, Ray(lam_s)).crossings)
        cyl = math.sqrt(2.0 * (params.q - 1.0))
        if abs(a_k - cyl) <= 1e-6 * cyl:
            # degenerate first member: the exact cylinder, aperture zero
            records.append(ShrinkerRecord(
                k=k_count, a_k=cyl, alpha_k=0.0, lambda_k=0.0,
                bracket_width=hi - lo, bracket=(lo, hi), sign=-1))
            continue
        c_mid = _shrinker_profile(a_k, params, cfg)
        lam_k, window = _slope_readout(c_mid, lam_s, k_count)
        if lam_k is None:
            lam_k, window = _slope_readout(c_lo, lam_s, k_count)
        if lam_k is None:
            raise ArithmeticError(
                f"slope readout found no stabilized window for a={a_k}")
        records.append(ShrinkerRecord(
            k=k_count, a_k=a_k, alpha_k=math.atan(lam_k), lambda_k=lam_k,
            bracket_width=hi - lo, bracket=(lo, hi),
            sign=int(math.copysign(1.0, lam_k - lam_s)),
            readout_window=window))
    records.sort(key=lambda rec: -rec.a_k)
    return records[:k_max]


def count_continuations(alpha: float, params: FlowParams, cfg: IntegratorConfig,
                        sweep: AlphaCurve | None = None,
                        a_range=(1e-7, 20.0), per_decade: int = 400,
                        threads: int | None = None):
    """All expanders with limiting angle alpha, by level bracketing on the sweep.

    Returns (records, L, resolved): solutions of alpha(a) = alpha located by
    sign changes of the refined sweep; `resolved` is False when adjacent
    sweep extrema were too close to the grid spacing to exclude missed pairs.
    """
    lam_s = cone_slope(params).lambda_s
    level = math.tan(alpha)
    if sweep is None:
        n_pts = int(per_decade * math.log10(a_range[1] / a_range[0])) + 1
        grid = np.geomspace(a_range[0], a_range[1], n_pts)
        sweep = alpha_curve(grid, params, cfg, threads=threads, refine=False)
    a, f = sweep.offsets(lam_s)
    g = f - (level - lam_s)
    sols = []
    for i in np.nonzero(np.sign(g[:-1]) * np.sign(g[1:]) < 0)[0]:
        lo, hi = a[i], a[i + 1]
        glo = g[i]
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            gm = expander_slope(mid, params, cfg).lambda_a - level
            if (gm < 0) == (glo < 0):
                lo = mid
            else:
                hi = mid
            if hi - lo <= 1e-10 * lo:
                break
        sols.append(expander_slope(0.5 * (lo + hi), params, cfg))
    # resolution check: adjacent solutions should be separated by several
    # grid points, otherwise a pair may have been missed near an extremum
    idxs = np.searchsorted(a, [rec.a for rec in sols])
    resolved = bool(np.all(np.diff(idxs) >= 2)) if len(idxs) > 1 else True
    return sols, len(sols), resolved


def _first_cone_crossing(curve: ProfileCurve, slope: float):
    """Arclength location and tangent angle at the first crossing of u = slope*r."""
    w = curve.u - slope * curve.r
    sign = np.sign(w)
    idx = np.nonzero(sign[:-1] * sign[1:] < 0)[0]
    if len(idx) == 0:
        return None
    i = idx[0]
    lo, hi = curve.s[i], curve.s[i + 1]
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        row = curve.eval(np.array([mid]))[0]
        wm = row[2] - slope * row[1]
        if (wm > 0) == (w[i] > 0):
            lo = mid
        else:
            hi = mid
    row = curve.eval(np.array([0.5 * (lo + hi)]))[0]
    return row  # (s, r, u, theta, k)


def triple_junction(params: FlowParams, cfg: IntegratorConfig,
                    tol: float = 1e-6) -> TripleJunctionResult:
    """Shrinker arc meeting the diagonal ray at equal 120-degree angles.

    Valid for p = q (cone slope 1). The cylinder member crosses u = r at
    135 degrees and the round member at 90 degrees; bisection on the first
    crossing's tangent angle finds the height a* whose crossing makes all
    three junction angles equal. Returns a*, the junction point, and the
    three pairwise angles between outgoing directions.
    """
    if params.p != params.q:
        raise ValueError("triple junction construction requires p = q")
    n = params.n
    a_cyl = math.sqrt(n - 2.0)
    a_sph = math.sqrt(2.0 * (n - 1.0))
    target = -math.pi / 12.0  # tangent angle giving a 120-degree junction

    def crossing_theta(a):
        # no escape triggers: these profiles descend (theta < 0) by design
        start = series_start(EquationKind.SHRINKER, a, params)
        curve = integrate_profile(EquationKind.SHRINKER, start, params, cfg)
        row = _first_cone_crossing(curve, 1.0)
        if row is None:
            raise ArithmeticError(f"profile from a={a} never meets u = r")
        return row

    # monotonicity probe of theta at the crossing
    probes = np.linspace(a_cyl * 1.0001, a_sph * 0.9999, 7)
    thetas = [crossing_theta(x)[3] for x in probes]
    monotone = bool(np.all(np.diff(thetas) < 0))
    lo, hi = probes[0], probes[-1]
    if not monotone:
        # fall back to the bracketing pair around the target angle
        t = np.array(thetas) - target
        j = int(np.nonzero(t[:-1] * t[1:] < 0)[0][0])
        lo, hi = probes[j], probes[j + 1]
    row = None
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        row = crossing_theta(mid)
        if abs(row[3] - target) <= tol * 0.1:
            break
        if row[3] > target:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-15 * lo:
            break
    a_star = 0.5 * (lo + hi)
    th = row[3]
    b = 0.5 * (row[1] + row[2])
    # outgoing unit directions: back along the arc, its mirror, and the ray
    d1 = np.array([-math.cos(th), -math.sin(th)])
    d2 = d1[::-1].copy()
    d3 = np.array([1.0, 1.0]) / math.sqrt(2.0)

    def ang(u, v):
        return math.acos(float(np.clip(np.dot(u, v), -1.0, 1.0)))

    angles = (ang(d1, d3), ang(d3, d2), ang(d2, d1))
    # reference crossings of the exact cylinder and round members
    th_cyl = 0.0
    th_sph = -math.pi / 4.0
    endpoint_angles = (0.75 * math.pi + th_cyl, 0.75 * math.pi + th_sph)
    return TripleJunctionResult(a_star=a_star, junction=(b, b), angles=angles,
                                endpoint_angles=endpoint_angles,
                                monotone=monotone)
