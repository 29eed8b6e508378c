import math
import warnings

import numpy as np
import pytest

from selfsim.evolve import SchemeConfig, cylinder_profile, run_flow, sphere_profile
from selfsim.functionals import (
    CuspError,
    HeatKernelSpec,
    analytic_first_variation,
    density_trace,
    first_variation,
    gauss_bonnet_audit,
    gaussian_density,
    kernel_identity_residual,
    plane_density,
    total_curvature,
    transverse_bound_check,
)
from selfsim.functionals import _orbit_factor
from selfsim.geometry import FlowParams, ProfileCurve

P12 = FlowParams(1, 2)
P22 = FlowParams(2, 2)

SPHERE_DENSITY = 4.0 / math.e                     # 1.4715177646857693
CYLINDER_DENSITY = math.sqrt(2.0 * math.pi / math.e)  # 1.5203469010662807


def _bump(center, width):
    def phi(s):
        x = (np.asarray(s) - center) / width
        out = np.exp(-1.0 / np.maximum(1e-12, 1.0 - x * x))
        out[np.abs(x) >= 1] = 0.0
        return out

    return phi


def test_plane_density_unit():
    assert plane_density() == 1.0


def test_round_profile_density_constant():
    spec = HeatKernelSpec(t0=0.0, n=3)
    for t in (-1.0, -0.4, -0.05):
        R = math.sqrt(-4.0 * t)
        curve = sphere_profile(R, P12, 900)
        phi = gaussian_density(curve, P12, spec, t)
        assert abs(phi - SPHERE_DENSITY) < 1e-6


def test_cylinder_density_constant():
    spec = HeatKernelSpec(t0=0.0, n=3)
    for t in (-1.0, -0.3):
        R = math.sqrt(-2.0 * t)
        curve = cylinder_profile(R, 14.0 * math.sqrt(-t), P12, 2500)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            phi = gaussian_density(curve, P12, spec, t)
        assert abs(phi - CYLINDER_DENSITY) < 1e-6


def test_density_scale_invariance():
    spec = HeatKernelSpec(t0=0.0, n=3)
    curve = sphere_profile(2.0, P12, 700)
    base = gaussian_density(curve, P12, spec, -1.0)
    lam = 1.7
    scaled = gaussian_density(curve.dilate(lam), P12,
                              HeatKernelSpec(t0=0.0, n=3), -lam * lam)
    assert abs(scaled - base) < 1e-10


def test_density_requires_past_time():
    spec = HeatKernelSpec(t0=0.0, n=3)
    with pytest.raises(ValueError):
        gaussian_density(sphere_profile(1.0, P12, 100), P12, spec, 0.0)


def test_density_truncation_warns():
    spec = HeatKernelSpec(t0=0.0, n=3)
    short = cylinder_profile(1.0, 1.5, P12, 200)
    with pytest.warns(RuntimeWarning):
        gaussian_density(short, P12, spec, -1.0)


def test_orbit_factor_closed_forms():
    rho = np.linspace(0.0, 3.0, 13)
    assert np.allclose(_orbit_factor(1, rho), 2.0 * np.cosh(rho), rtol=1e-14)
    # the 2-sphere orbit integral has the elementary closed form 4 pi sinh/rho
    vals = _orbit_factor(3, rho[1:])
    exact = 4.0 * math.pi * np.sinh(rho[1:]) / rho[1:]
    assert np.allclose(vals, exact, rtol=1e-12)
    assert abs(_orbit_factor(2, np.zeros(1))[0] - 2.0 * math.pi) < 1e-12


def test_off_axis_density_two_sheets():
    # p = 1 center on the symmetry axis: both sheets weighted explicitly;
    # a very distant center sees almost no mass
    spec_far = HeatKernelSpec(t0=0.0, n=3, x0=(40.0, 0.0))
    curve = sphere_profile(2.0, P12, 500)
    phi_far = gaussian_density(curve, P12, spec_far, -1.0)
    assert phi_far < 1e-10
    spec0 = HeatKernelSpec(t0=0.0, n=3, x0=(1e-9, 0.0))
    phi0 = gaussian_density(curve, P12, spec0, -1.0)
    assert abs(phi0 - gaussian_density(curve, P12, HeatKernelSpec(0.0, 3), -1.0)) < 1e-9


def test_kernel_identity_randomized():
    rng = np.random.default_rng(42)
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(3, 8))
        spec = HeatKernelSpec(t0=float(rng.uniform(0.5, 2.0)), n=n)
        x = rng.normal(size=n)
        t = spec.t0 - float(rng.uniform(0.1, 2.0))
        basis, _ = np.linalg.qr(rng.normal(size=(n, n)))
        frame = basis.T[: n - 1]
        worst = max(worst, abs(kernel_identity_residual(x, t, frame, spec)))
    assert worst < 1e-10


def test_kernel_identity_negative_control():
    spec = HeatKernelSpec(t0=1.0, n=3)
    frame = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    res = kernel_identity_residual(np.ones(3), 0.0, frame, spec,
                                   exponent_scale=4.1)
    assert abs(res) > 1e-5


def test_kernel_identity_center_point():
    spec = HeatKernelSpec(t0=1.0, n=4)
    frame = np.eye(4)[:3]
    res = kernel_identity_residual(np.zeros(4), 0.0, frame, spec)
    assert abs(res) < 1e-14


def test_density_trace_monotone_three_flows(sphere_flow_n3):
    flows = [sphere_flow_n3]
    # the cylinder must be long enough that the mirror cut sits in the
    # kernel's dead zone; otherwise truncation flux masks the monotonicity
    flows.append(run_flow(cylinder_profile(1.0, 8.0, P12, 400), 0.42, P12,
                          SchemeConfig(0.5, 0.012, record_every=400)))
    # a perturbed oval relaxing under the flow
    from selfsim.evolve import BoundaryKind, curve_from_points

    phi = np.linspace(0.0, math.pi / 2, 300)
    R = 1.0 + 0.15 * np.cos(4 * phi)
    r, u = R * np.sin(phi), R * np.cos(phi)
    r[0] = 0.0
    u[-1] = 0.0
    oval = curve_from_points(r, u, P12, BoundaryKind.AXIS_U, BoundaryKind.AXIS_R)
    flows.append(run_flow(oval, 0.4, P12, SchemeConfig(0.5, 0.008,
                                                       record_every=400)))
    for traj in flows:
        t0 = traj.t_singular if traj.t_singular is not None else \
            traj.states[-1].t + 0.05
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            trace = density_trace(traj, HeatKernelSpec(t0=t0, n=3))
        assert trace.max_upward_violation < 1e-3


def test_density_trace_round_limit(sphere_flow_n3):
    # the shrinking round profile is self-similar: its density stays pinned
    # at the round value all the way to extinction
    trace = density_trace(sphere_flow_n3,
                          HeatKernelSpec(t0=sphere_flow_n3.t_singular, n=3))
    phis = [phi for _, phi in trace.samples]
    assert trace.max_upward_violation < 1e-4
    for phi in phis:
        assert phi == pytest.approx(SPHERE_DENSITY, abs=2e-3)


def test_density_trace_constant_on_shrinker(shrinkers22, cfg_tight):
    from selfsim.shooting import _shrinker_profile

    rec = next(r for r in shrinkers22 if r.k == 2)
    prof = _shrinker_profile(rec.a_k, P22, cfg_tight)
    prof = ProfileCurve(prof.samples[prof.r <= 9.0], P22)

    class _Traj:
        params = P22
        states = [type("S", (), {"t": t, "curve": prof.dilate(math.sqrt(-t))})
                  for t in np.linspace(-1.0, -0.25, 16)]

    trace = density_trace(_Traj(), HeatKernelSpec(t0=0.0, n=4))
    phis = [phi for _, phi in trace.samples]
    assert max(phis) - min(phis) < 1e-4


def test_first_variation_vanishes_at_shrinkers(shrinkers22, cfg_tight):
    from selfsim.shooting import _shrinker_profile

    for rec in shrinkers22:
        if rec.k not in (2, 3):
            continue
        prof = _shrinker_profile(rec.a_k, P22, cfg_tight)
        prof = ProfileCurve(prof.samples[prof.r <= 7.0], P22)
        L = prof.length
        for center in (0.35, 0.6):
            val = first_variation(prof, "J", _bump(center * L, 0.2 * L), h=1e-3)
            assert abs(val) < 1e-6


def test_first_variation_vanishes_at_expander(cfg_tight):
    from selfsim.geometry import weighted_area
    from selfsim.ode import EquationKind, integrate_profile, series_start

    start = series_start(EquationKind.EXPANDER, 1.0, P22)
    prof = integrate_profile(EquationKind.EXPANDER, start, P22,
                             cfg_tight.with_rmax(6.0))
    window = 5.0
    # the perturbation must stay strictly inside the window, otherwise the
    # finite difference sees mass moved across the cutoff
    s_in = prof.s[np.hypot(prof.r, prof.u) <= 0.7 * window]
    # the derivative sits at the quadrature noise floor here, so the
    # Richardson probe has nothing quadratic to compare against
    val = first_variation(prof, "K", _bump(0.5 * s_in[-1], 0.3 * s_in[-1]),
                          h=1e-3, window=window, check=False)
    scale = weighted_area(prof, "gaussian_plus", window=window)
    assert abs(val) < 1e-5 * scale


def test_first_variation_round_profile_sign_flip(cfg_tight):
    # the Gaussian-weighted area of round profiles peaks at R^2 = 2(n-1)
    for R, sign in ((2.0, +1.0), (2.6, -1.0)):
        curve = sphere_profile(R, P22, 700)
        val = first_variation(curve, "J",
                              _bump(0.5 * curve.length, 0.35 * curve.length),
                              h=1e-3)
        assert math.copysign(1.0, val) == sign


def test_first_variation_matches_analytic_order2():
    curve = sphere_profile(2.0, P22, 1500)
    direction = _bump(0.5 * curve.length, 0.3 * curve.length)
    exact = analytic_first_variation(curve, "J", direction)
    errs = [abs(first_variation(curve, "J", direction, h=h, check=False) - exact)
            for h in (0.08, 0.04, 0.02)]
    orders = [math.log2(errs[i] / errs[i + 1]) for i in range(2)]
    for order in orders:
        assert abs(order - 2.0) < 0.1


def test_first_variation_step_check():
    # a step comparable to the curve scale trips the quadratic-dominance probe
    curve = sphere_profile(0.5, P22, 400)
    with pytest.raises(ValueError):
        first_variation(curve, "J", _bump(0.5 * curve.length,
                                          0.3 * curve.length), h=1.2)
    with pytest.raises(ValueError):
        first_variation(curve, "K", _bump(1.0, 0.5), h=1e-3)  # no window


def test_gauss_bonnet_round_profile():
    curve = sphere_profile(1.0, P12, 900)
    rep = gauss_bonnet_audit(curve, genus=0, epsilon=0.5)
    assert rep.lhs == pytest.approx(0.5 * 8.0 * math.pi, rel=1e-6)
    assert rep.rhs_terms[0] == pytest.approx(16.0 * math.pi, rel=1e-6)
    assert rep.rhs_terms[1] == 0.0
    assert rep.D_ratio == pytest.approx(4.0, rel=1e-6)
    assert rep.holds and rep.own_holds


def test_gauss_bonnet_catenoid_window():
    c = 0.5
    t = np.linspace(0.0, 4.8, 3000)
    samples = np.column_stack([
        c * np.sinh(t), c * t, c * np.cosh(t),
        np.arctan(np.sinh(t)), 1.0 / (c * np.cosh(t) ** 2)])
    curve = ProfileCurve(samples, P12)
    rep = gauss_bonnet_audit(curve, genus=0, epsilon=0.5)
    assert rep.rhs_terms[0] < 1e-8
    assert rep.lhs > 0.1
    assert rep.holds and rep.own_holds


def test_gauss_bonnet_torus():
    center, rad = 1.2, 0.4
    phi = np.linspace(-math.pi / 2, math.pi / 2, 1600)
    samples = np.column_stack([
        rad * (phi - phi[0]), rad * np.cos(phi), center + rad * np.sin(phi),
        phi + math.pi / 2, np.full_like(phi, 1.0 / rad)])
    samples[0, 1] = samples[-1, 1] = 0.0
    curve = ProfileCurve(samples, P12)
    for eps in (0.1, 0.5, 0.9):
        rep = gauss_bonnet_audit(curve, genus=1, epsilon=eps)
        assert rep.rhs_terms[1] == pytest.approx(8.0 * math.pi)
        assert rep.holds and rep.own_holds


def test_gauss_bonnet_needs_three_dims():
    with pytest.raises(ValueError):
        gauss_bonnet_audit(sphere_profile(1.0, P22, 100), genus=0)


def test_total_curvature_closed_convex():
    th = np.linspace(0.0, 2 * math.pi, 720)
    circle = np.column_stack([np.cos(th), np.sin(th)])
    assert total_curvature(circle).integral == pytest.approx(2 * math.pi,
                                                             abs=1e-6)
    ellipse = np.column_stack([2 * np.cos(th), np.sin(th)])
    assert total_curvature(ellipse).integral == pytest.approx(2 * math.pi,
                                                              abs=1e-6)
    two = total_curvature([circle, circle + 4.0])
    assert two.integral == pytest.approx(4 * math.pi, abs=1e-6)
    assert two.components == 2


def test_total_curvature_space_curve():
    th = np.linspace(0.0, 2 * math.pi, 1440)
    helixish = np.column_stack([np.cos(th), np.sin(th), 0.2 * np.sin(2 * th)])
    res = total_curvature(helixish)
    assert res.integral >= 2 * math.pi - 1e-9


def test_total_curvature_cusp_detected():
    zigzag = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 0.05], [1.0, 0.1],
                       [0.0, 0.15], [0.0, 0.0]])
    with pytest.raises(CuspError):
        total_curvature(zigzag)


def test_transverse_bound_plane_sphere_equality():
    # horizontal plane meeting the unit round surface at height h
    for h in (0.0, 0.3, 0.8):
        k = 1.0 / math.sqrt(1.0 - h * h)
        sin_alpha = math.sqrt(1.0 - h * h)
        bound = (0.0 + 1.0) / sin_alpha
        assert abs(bound - k) < 1e-8
        assert transverse_bound_check(0.0, 1.0, sin_alpha, k)
        assert not transverse_bound_check(0.0, 1.0, sin_alpha, k + 1e-6)


def test_transverse_bound_orthogonal_planes():
    assert transverse_bound_check(0.0, 0.0, 1.0, 0.0)
    with pytest.raises(ValueError):
        transverse_bound_check(1.0, 1.0, 0.0, 1.0)
