"""Initial-value integration of the reduced profile equations.

Three parametric curvature laws are integrated in arclength form
(dr/ds, du/ds, dth/ds) = (cos th, sin th, k(r, u, th)):

  minimal:   k = (q-1) cos th / u - (p-1) sin th / r
  expander:  k = ((q-1)/u + u/2) cos th - ((p-1)/r + r/2) sin th
  shrinker:  k = ((q-1)/u - u/2) cos th - ((p-1)/r - r/2) sin th

The arclength chart is robust through vertical tangents, which shrinker
profiles routinely develop; graph-chart forms of the same equations exist
in the tests only, as equivalence oracles. The module also integrates the
log-radius phase plane (X, Y) = (u/r, u_r) and the linearizations over the
cone used by the matched asymptotics.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from ._kernels import codes
from .geometry import FlowParams, ProfileCurve, ProfilePoint, cone_slope

__all__ = [
    "EquationKind",
    "IntegratorConfig",
    "TerminationTag",
    "TerminationEvent",
    "PhaseState",
    "SampledFunction",
    "LinearBasis",
    "FixedPointSpectrum",
    "parametric_curvature",
    "series_start",
    "integrate_profile",
    "integrate_phase",
    "fixed_point_linearization",
    "linear_basis",
    "export_profile",
]

# beyond r ~ 15 the shrinker equation's growing mode exp((1+lam^2) r^2/4)
# exhausts double precision, so shrinker integrations refuse larger r_max
SHRINKER_RMAX_LIMIT = 15.0
OVERFLOW_LIMIT = 1e12


class EquationKind(enum.Enum):
    MINIMAL = "minimal"
    EXPANDER = "expander"
    SHRINKER = "shrinker"
    LINEARIZED_EXPANDER = "linearized_expander"
    LINEARIZED_SHRINKER = "linearized_shrinker"


_PROFILE_CODE = {
    EquationKind.MINIMAL: codes.PROFILE_MINIMAL,
    EquationKind.EXPANDER: codes.PROFILE_EXPANDER,
    EquationKind.SHRINKER: codes.PROFILE_SHRINKER,
}


class TerminationTag(enum.Enum):
    REACHED_RMAX = "reached_rmax"
    VERTICAL_TANGENT = "vertical_tangent"
    AXIS_HIT = "axis_hit"
    ESCAPE_UP = "escape_up"
    ESCAPE_DOWN = "escape_down"
    STEP_LIMIT = "step_limit"
    OVERFLOW = "overflow"


_TAG_FROM_STATUS = {
    codes.REACHED_RMAX: TerminationTag.REACHED_RMAX,
    codes.AXIS_HIT: TerminationTag.AXIS_HIT,
    codes.ESCAPE_UP: TerminationTag.ESCAPE_UP,
    codes.ESCAPE_DOWN: TerminationTag.ESCAPE_DOWN,
    codes.STEP_LIMIT: TerminationTag.STEP_LIMIT,
    codes.OVERFLOW: TerminationTag.OVERFLOW,
}


@dataclass(frozen=True)
class TerminationEvent:
    tag: TerminationTag
    location: ProfilePoint


@dataclass(frozen=True)
class IntegratorConfig:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    r_max: float = 10.0
    max_steps: int = 400_000
    escape_band: float = 0.02
    h_cap: float = 0.25

    def __post_init__(self):
        if not (0.0 < self.rel_tol < 1.0 and 0.0 < self.abs_tol < 1.0):
            raise ValueError("tolerances must lie in (0, 1)")
        if self.r_max <= 0:
            raise ValueError("r_max must be positive")
        if self.max_steps <= 0:
            raise ValueError("max_steps must be positive")
        if self.escape_band <= 0:
            raise ValueError("escape_band must be positive")

    def with_rmax(self, r_max: float) -> "IntegratorConfig":
        return replace(self, r_max=r_max)


@dataclass(frozen=True)
class PhaseState:
    eta: float
    X: float
    Y: float


def parametric_curvature(kind: EquationKind, params: FlowParams,
                         r: float, u: float, theta: float) -> float:
    """Curvature solved from the parametric equation for the given kind."""
    p, q = params.p, params.q
    st, ct = math.sin(theta), math.cos(theta)
    if kind is EquationKind.MINIMAL:
        return (q - 1.0) * ct / u - (p - 1.0) * st / r
    if kind is EquationKind.EXPANDER:
        return ((q - 1.0) / u + 0.5 * u) * ct - ((p - 1.0) / r + 0.5 * r) * st
    if kind is EquationKind.SHRINKER:
        return ((q - 1.0) / u - 0.5 * u) * ct - ((p - 1.0) / r - 0.5 * r) * st
    raise ValueError(f"{kind} has no parametric curvature form")


def series_coefficient(kind: EquationKind, a: float, params: FlowParams) -> float:
    """Quadratic coefficient of the regular start u = a + c r^2 at r = 0."""
    p, q = params.p, params.q
    if kind is EquationKind.MINIMAL:
        return (q - 1.0) / (2.0 * p * a)
    if kind is EquationKind.EXPANDER:
        return (0.5 * a + (q - 1.0) / a) / (2.0 * p)
    if kind is EquationKind.SHRINKER:
        return ((q - 1.0) / a - 0.5 * a) / (2.0 * p)
    raise ValueError(f"{kind} does not admit a regular axis start")


def series_start(kind: EquationKind, a: float, params: FlowParams,
                 r0: float | None = None) -> ProfilePoint:
    """Second-order series state at small r0 for the start u(0)=a, u_r(0)=0.

    The axis r = 0 is a regular singular point; u_r(0) = 0 is forced and the
    curvature of each equation fixes the quadratic term.
    """
    if a <= 0:
        raise ValueError("start height a must be positive")
    if kind in (EquationKind.LINEARIZED_EXPANDER, EquationKind.LINEARIZED_SHRINKER):
        raise ValueError("linearized kinds start from the oscillatory basis; "
                         "see linear_basis")
    if r0 is None:
        r0 = 1e-4 * a
    c = series_coefficient(kind, a, params)
    u0 = a + c * r0 * r0
    ur = 2.0 * c * r0
    theta = math.atan(ur)
    k = parametric_curvature(kind, params, r0, u0, theta)
    # s ~ r to cubic order for a flat start
    return ProfilePoint(s=r0, r=r0, u=u0, theta=theta, k=k)


def integrate_profile(kind: EquationKind, start: ProfilePoint,
                      params: FlowParams, cfg: IntegratorConfig,
                      *, theta_down: float | None = None,
                      theta_up: float | None = None,
                      band: float = 0.0, band_gate: float = 0.0,
                      lam: float = 0.0) -> ProfileCurve:
    """Adaptive embedded Runge-Kutta integration of one profile curve.

    Optional escape triggers (used by shrinker classification): terminate
    EscapeDown once theta <= theta_down, EscapeUp once theta >= theta_up,
    and band triggers on w = u - lam*r beyond band_gate.
    """
    if kind not in _PROFILE_CODE:
        raise ValueError(f"{kind} is not a profile equation")
    if kind is EquationKind.SHRINKER and cfg.r_max > SHRINKER_RMAX_LIMIT:
        raise ValueError(
            f"shrinker integration beyond r = {SHRINKER_RMAX_LIMIT} exceeds "
            "double precision (growing mode exp((1+lam^2) r^2/4))")
    h0 = min(max(start.r / 20.0, 1e-12), cfg.h_cap)
    floor_r = min(1e-10, 0.1 * start.r)
    # terminating at u ~ 1e-7 keeps the axis-hit radius accurate to O(1e-14)
    # while avoiding the 1/u stiffness blowup of a sub-resolution descent
    floor_u = min(1e-7, 0.05 * start.u)
    samples, status = _kernels.integrate_profile(
        _PROFILE_CODE[kind], float(params.p), float(params.q),
        start.s, start.r, start.u, start.theta,
        cfg.rel_tol, cfg.abs_tol, cfg.r_max, cfg.max_steps, h0, cfg.h_cap,
        -1e300 if theta_down is None else theta_down,
        1e300 if theta_up is None else theta_up,
        band, band_gate, lam,
        floor_u, floor_r, OVERFLOW_LIMIT)
    tag = _TAG_FROM_STATUS[status]
    curve = ProfileCurve(samples, params)
    curve.termination = TerminationEvent(tag, curve.point(len(curve) - 1))
    return curve


def integrate_phase(kind: EquationKind, init: PhaseState, params: FlowParams,
                    cfg: IntegratorConfig):
    """Integrate the log-radius phase system X_eta = Y - X, Y_eta = ...

    For the minimal equation Y_eta = (p-1)(1+Y^2)(lam_s^2 - XY)/X; the
    expander adds the friction term -(1+Y^2) e^{2 eta} (Y - X)/2. Returns
    (states, termination tag).
    """
    if params.p < 2:
        raise ValueError("phase plane requires p >= 2")
    if kind is EquationKind.MINIMAL:
        kcode = codes.PHASE_MINIMAL
    elif kind is EquationKind.EXPANDER:
        kcode = codes.PHASE_EXPANDER
    else:
        raise ValueError(f"{kind} has no phase-plane form")
    if init.X <= 0:
        raise ValueError("X = u/r must be positive")
    eta_max = math.log(cfg.r_max)
    samples, status = _kernels.integrate_phase(
        kcode, float(params.p), float(params.q),
        init.eta, init.X, init.Y,
        cfg.rel_tol, cfg.abs_tol, eta_max, cfg.max_steps,
        1e-4, 0.05, OVERFLOW_LIMIT)
    states = [PhaseState(*row) for row in samples]
    return states, _TAG_FROM_STATUS[status]


@dataclass(frozen=True)
class FixedPointSpectrum:
    eigenvalues: tuple
    oscillatory: bool
    jacobian: tuple


def fixed_point_linearization(params: FlowParams) -> FixedPointSpectrum:
    """Spectrum of the minimal phase system at (lam_s, lam_s), closed form.

    The Jacobian is [[-1, 1], [-(n-2), -(n-2)]]; for 4 <= n <= 7 the
    eigenvalues are complex, -(beta+1) +/- i mu, and the approach to the
    fixed point is an inward spiral.
    """
    if params.p < 2 or params.q < 2:
        raise ValueError("fixed point requires p, q >= 2")
    n = params.n
    jac = ((-1.0, 1.0), (-(n - 2.0), -(n - 2.0)))
    disc = (n - 1.0) ** 2 - 8.0 * (n - 2.0)
    if disc < 0.0:
        re = -(n - 1.0) / 2.0
        im = math.sqrt(-disc) / 2.0
        return FixedPointSpectrum((complex(re, im), complex(re, -im)), True, jac)
    root = math.sqrt(disc)
    lam1 = (-(n - 1.0) + root) / 2.0
    lam2 = (-(n - 1.0) - root) / 2.0
    return FixedPointSpectrum((complex(lam1, 0.0), complex(lam2, 0.0)), False, jac)


@dataclass
class SampledFunction:
    """A scalar function sampled on a radius grid, with derivative values."""

    r: np.ndarray
    g: np.ndarray
    gp: np.ndarray

    def __call__(self, r_new):
        return np.interp(r_new, self.r, self.g)

    @property
    def end_slope(self) -> float:
        """(g/r + g')/2 at the outer end; cancels the O(r^-2) correction."""
        return float(0.5 * (self.g[-1] / self.r[-1] + self.gp[-1]))


@dataclass
class LinearBasis:
    h1: SampledFunction
    h2: SampledFunction
    g3: SampledFunction | None


def _indicial_start(which: str, r0: float, beta: float, mu: float):
    L = math.log(r0)
    amp = r0 ** (-beta)
    if which == "cos":
        g = amp * math.cos(mu * L)
        gp = r0 ** (-beta - 1.0) * (-beta * math.cos(mu * L) - mu * math.sin(mu * L))
    else:
        g = amp * math.sin(mu * L)
        gp = r0 ** (-beta - 1.0) * (-beta * math.sin(mu * L) + mu * math.cos(mu * L))
    return g, gp


def linear_basis(kind: EquationKind, params: FlowParams, cfg: IntegratorConfig,
                 r0: float = 1e-3) -> LinearBasis:
    """Bases of the linearized equations over the cone.

    h1, h2 start from the indicial series r^{-beta} cos/sin(mu log r) at r0.
    For the shrinker linearization the outer-normalized solution g3 (g ~ r at
    large r) is additionally produced by backward integration, which
    suppresses the growing mode; forward extraction of g3 is ill-conditioned
    and not offered.
    """
    if params.p < 2:
        raise ValueError("linearizations over the cone require p >= 2")
    n = params.n
    if not 4 <= n <= 7:
        raise ValueError("oscillatory linearization requires 4 <= n <= 7")
    beta = (n - 3.0) / 2.0
    mu = math.sqrt(8.0 - (n - 5.0) ** 2) / 2.0
    if kind is EquationKind.LINEARIZED_EXPANDER:
        kcode = codes.LINEAR_EXPANDER
    elif kind is EquationKind.LINEARIZED_SHRINKER:
        kcode = codes.LINEAR_SHRINKER
    else:
        raise ValueError(f"{kind} is not a linearized kind")

    r_hi = cfg.r_max
    if kind is EquationKind.LINEARIZED_SHRINKER:
        # the oscillatory pair blows up like exp((1+lam^2) r^2/4); stop early
        r_hi = min(r_hi, 5.0)

    funcs = []
    for which in ("cos", "sin"):
        g0, gp0 = _indicial_start(which, r0, beta, mu)
        samples, status = _kernels.integrate_linear(
            kcode, float(params.p), float(params.q),
            r0, g0, gp0, r_hi,
            cfg.rel_tol, cfg.abs_tol, cfg.max_steps, 1e-6, 0.1, 1e280)
        if status == codes.OVERFLOW and kind is EquationKind.LINEARIZED_EXPANDER:
            raise ArithmeticError("unexpected overflow in expander linearization")
        funcs.append(SampledFunction(samples[:, 0], samples[:, 1], samples[:, 2]))

    g3 = None
    if kind is EquationKind.LINEARIZED_SHRINKER:
        p = params.p
        rb = max(cfg.r_max, 12.0)
        # outer series g3 = r - 2(p-1)/r + 2(p-1)^2/((n-2) r^3) + O(r^-5)
        c1 = -2.0 * (p - 1.0)
        c3 = 2.0 * (p - 1.0) ** 2 / (n - 2.0)
        g0 = rb + c1 / rb + c3 / rb ** 3
        gp0 = 1.0 - c1 / rb ** 2 - 3.0 * c3 / rb ** 4
        samples, status = _kernels.integrate_linear(
            kcode, float(params.p), float(params.q),
            rb, g0, gp0, r0,
            cfg.rel_tol, cfg.abs_tol, cfg.max_steps, 1e-4, 0.1, 1e280)
        if status != codes.REACHED_RMAX:
            raise ArithmeticError("backward integration of the outer solution failed")
        rev = samples[::-1]
        g3 = SampledFunction(rev[:, 0].copy(), rev[:, 1].copy(), rev[:, 2].copy())
    return LinearBasis(funcs[0], funcs[1], g3)


def export_profile(curve: ProfileCurve, path_base: str, kind: EquationKind,
                   params: FlowParams, a: float, cfg: IntegratorConfig) -> tuple:
    """Write a profile as CSV plus a sidecar JSON run record.

    Returns the (csv_path, json_path) pair. The sidecar holds the equation
    kind, symmetry parameters, starting height, integrator configuration,
    and the termination event.
    """
    import json

    csv_path = path_base + ".csv"
    json_path = path_base + ".json"
    curve.to_csv(csv_path)
    term = curve.termination
    record = {
        "kind": kind.value,
        "params": {"p": params.p, "q": params.q, "n": params.n},
        "a": a,
        "config": {
            "rel_tol": cfg.rel_tol, "abs_tol": cfg.abs_tol,
            "r_max": cfg.r_max, "max_steps": cfg.max_steps,
            "escape_band": cfg.escape_band,
        },
        "termination": {
            "tag": term.tag.value,
            "location": {"s": term.location.s, "r": term.location.r,
                         "u": term.location.u, "theta": term.location.theta,
                         "k": term.location.k},
        } if term else None,
    }
    with open(json_path, "w") as fh:
        json.dump(record, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return csv_path, json_path
