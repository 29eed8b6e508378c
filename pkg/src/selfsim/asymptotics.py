"""Matched-asymptotics constants and oscillatory tail fits.

Near the cone, deviations of the minimal companion behave like
r^{-beta} (A1 cos(mu log r) + A2 sin(mu log r)) with beta = (n-3)/2 and
mu = sqrt(8 - (n-5)^2)/2; linearizing the expander and shrinker equations
over the cone produces bases whose inner/outer normalizations tie the
family parameters a to the limiting slopes. This module extracts those
constants numerically and evaluates the resulting slope predictions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import FlowParams, cone_slope
from .ode import EquationKind, IntegratorConfig, linear_basis
from .shooting import ShrinkerRecord

__all__ = [
    "DecayConstants",
    "OscillatoryFit",
    "MatchingConstants",
    "SequenceReport",
    "decay_constants",
    "fit_oscillation",
    "matching_constants",
    "predict_expander_slope",
    "verify_shrinker_sequence",
]


@dataclass(frozen=True)
class DecayConstants:
    n: int
    beta: float
    mu: float
    tau: float
    sigma: float

    @property
    def half_period_ratio(self) -> float:
        """Radial ratio between successive oscillation zeros, e^(pi/mu)."""
        return 1.0 / self.tau


def decay_constants(n: int) -> DecayConstants:
    """Closed-form decay exponents of the cone linearization, 4 <= n <= 7."""
    if not 4 <= n <= 7:
        raise ValueError("oscillatory decay constants exist only for 4 <= n <= 7")
    beta = (n - 3.0) / 2.0
    mu = math.sqrt(8.0 - (n - 5.0) ** 2) / 2.0
    tau = math.exp(-math.pi / mu)
    return DecayConstants(n=n, beta=beta, mu=mu, tau=tau, sigma=tau ** (beta + 1.0))


@dataclass
class OscillatoryFit:
    A1: float
    A2: float
    window: tuple
    residual_rms: float

    @property
    def amplitude(self) -> float:
        return math.hypot(self.A1, self.A2)

    @property
    def phase(self) -> float:
        return math.atan2(self.A2, self.A1)


def fit_oscillation(r: np.ndarray, w: np.ndarray, constants: DecayConstants,
                    window: tuple | None = None) -> OscillatoryFit:
    """Least squares of r^beta w(r) against cos/sin(mu log r) on a window.

    w is the deviation from the cone (u - lam_s r sampled on r). Raises if
    the window covers less than half an oscillation period (the normal
    equations degenerate).
    """
    r = np.asarray(r, dtype=float)
    w = np.asarray(w, dtype=float)
    if window is None:
        window = (float(r[0]), float(r[-1]))
    lo, hi = window
    sel = (r >= lo) & (r <= hi)
    if sel.sum() < 8:
        raise ValueError("window contains too few samples")
    if math.log(hi / lo) * constants.mu < math.pi:
        raise ValueError("window shorter than half an oscillation period")
    rr = r[sel]
    target = rr ** constants.beta * w[sel]
    phase = constants.mu * np.log(rr)
    basis = np.column_stack([np.cos(phase), np.sin(phase)])
    coef, *_ = np.linalg.lstsq(basis, target, rcond=None)
    resid = target - basis @ coef
    rms = float(np.sqrt(np.mean(resid ** 2)))
    return OscillatoryFit(A1=float(coef[0]), A2=float(coef[1]),
                          window=(lo, hi), residual_rms=rms)


@dataclass
class MatchingConstants:
    lam_s: float
    lambda1: float
    lambda2: float
    A1: float
    A2: float
    B1: float
    B2: float
    D1: float
    D2: float
    D: float
    E: float

    @property
    def slope_amplitude(self) -> float:
        return math.hypot(self.D1, self.D2)


def _companion_tail_fit(params: FlowParams, cfg: IntegratorConfig,
                        dc: DecayConstants, r_far: float = 2.0e4):
    """Inner-region amplitude of the companion: fit over two periods far out.

    Samples are resampled log-uniformly so the least squares is not
    dominated by the adaptively dense small-r region, and the window floor
    r = 30 keeps the quadratic model error of the tail expansion below 0.1%.
    """
    from .shooting import companion

    far_cfg = IntegratorConfig(rel_tol=cfg.rel_tol, abs_tol=cfg.abs_tol,
                               r_max=r_far, max_steps=4_000_000,
                               escape_band=cfg.escape_band, h_cap=r_far)
    comp = companion(params, far_cfg)
    lam_s = cone_slope(params).lambda_s
    r = comp.curve.r
    w = comp.curve.u - lam_s * r
    r_hi = r[-1] * 0.999
    r_lo = max(30.0, r_hi * math.exp(-4.0 * math.pi / dc.mu))
    grid = np.geomspace(r_lo, r_hi, 4000)
    w_grid = np.interp(grid, r, w)
    return fit_oscillation(grid, w_grid, dc, window=(r_lo, r_hi))


def matching_constants(params: FlowParams, cfg: IntegratorConfig) -> MatchingConstants:
    """Numerical matching data tying the inner minimal region to the cone.

    lambda1, lambda2 are the outer slopes of the expander-linearization
    basis; B1, B2 the inner oscillation coefficients of the outer-normalized
    shrinker solution; A1, A2 the companion's tail amplitudes. The phase E
    is read as arg(B1 + i B2) - arg(A1 + i A2) mod pi and the amplitude
    ratio D = |A| / |B|; slope coefficients follow by the rotation
    (D1, D2) = (l1 A1 + l2 A2, -l1 A2 + l2 A1).
    """
    dc = decay_constants(params.n)
    fitA = _companion_tail_fit(params, cfg, dc)

    basis_e = linear_basis(EquationKind.LINEARIZED_EXPANDER, params, cfg)
    lam1 = basis_e.h1.end_slope
    lam2 = basis_e.h2.end_slope

    basis_s = linear_basis(EquationKind.LINEARIZED_SHRINKER, params, cfg)
    g3 = basis_s.g3
    sel_hi = min(0.15, g3.r[0] * math.exp(2.0 * math.pi / dc.mu) * 1.05)
    fitB = fit_oscillation(g3.r, g3.g, dc, window=(g3.r[0], sel_hi))

    ampA = math.hypot(fitA.A1, fitA.A2)
    ampB = math.hypot(fitB.A1, fitB.A2)
    E = (math.atan2(fitB.A2, fitB.A1) - math.atan2(fitA.A2, fitA.A1)) % math.pi
    D1 = lam1 * fitA.A1 + lam2 * fitA.A2
    D2 = -lam1 * fitA.A2 + lam2 * fitA.A1
    return MatchingConstants(lam_s=cone_slope(params).lambda_s,
                             lambda1=lam1, lambda2=lam2,
                             A1=fitA.A1, A2=fitA.A2,
                             B1=fitB.A1, B2=fitB.A2,
                             D1=D1, D2=D2, D=ampA / ampB, E=E)


def predict_expander_slope(a: float, mc: MatchingConstants,
                           dc: DecayConstants) -> float:
    """Asymptotic limiting slope lam_s + a^{beta+1}(D1 cos + D2 sin)(mu log a)."""
    if not 0.0 < a <= 0.1:
        raise ValueError("slope prediction is asymptotic; requires 0 < a <= 0.1")
    phase = dc.mu * math.log(a)
    corr = a ** (dc.beta + 1.0) * (mc.D1 * math.cos(phase) + mc.D2 * math.sin(phase))
    return mc.lam_s + corr


@dataclass
class SequenceReport:
    a_ratios: list
    slope_gap_ratios: list
    signs: list
    a_ratio_target: float
    gap_ratio_target: float
    sign_alternation: bool

    def max_a_ratio_deviation(self, k_min: int = 3) -> float:
        vals = [abs(r / self.a_ratio_target - 1.0)
                for k, r in self.a_ratios if k >= k_min]
        return max(vals) if vals else float("nan")

    def max_gap_ratio_deviation(self, k_min: int = 3) -> float:
        vals = [abs(r / self.gap_ratio_target - 1.0)
                for k, r in self.slope_gap_ratios if k >= k_min]
        return max(vals) if vals else float("nan")


def verify_shrinker_sequence(records: list[ShrinkerRecord], dc: DecayConstants,
                             lam_s: float) -> SequenceReport:
    """Geometric-spacing report for the shrinker family.

    Consecutive height ratios a_k / a_{k+1} approach e^{pi/mu} and the
    slope gaps |tan(alpha_k) - lam_s| shrink by e^{pi (beta+1)/mu}; the
    gap signs alternate with k. Entries are (k of the earlier member, ratio).
    """
    if len(records) < 2:
        raise ValueError("need at least two records")
    recs = sorted(records, key=lambda rec: rec.k)
    a_ratios = []
    gap_ratios = []
    signs = [(rec.k, rec.sign) for rec in recs]
    for r0, r1 in zip(recs[:-1], recs[1:]):
        if r1.k != r0.k + 1:
            continue
        a_ratios.append((r0.k, r0.a_k / r1.a_k))
        if r0.k >= 2:
            gap_ratios.append((r0.k, abs(r0.lambda_k - lam_s)
                               / abs(r1.lambda_k - lam_s)))
    alt = all(s0[1] * s1[1] == -1 for s0, s1 in zip(signs[:-1], signs[1:]))
    return SequenceReport(
        a_ratios=a_ratios,
        slope_gap_ratios=gap_ratios,
        signs=signs,
        a_ratio_target=math.exp(math.pi / dc.mu),
        gap_ratio_target=math.exp(math.pi * (dc.beta + 1.0) / dc.mu),
        sign_alternation=alt,
    )
