import json
import math

import numpy as np
import pytest

from selfsim.geometry import FlowParams, Ray, cone_slope, intersection_count
from selfsim.ode import (
    EquationKind,
    IntegratorConfig,
    PhaseState,
    TerminationTag,
    export_profile,
    fixed_point_linearization,
    integrate_phase,
    integrate_profile,
    linear_basis,
    parametric_curvature,
    series_coefficient,
    series_start,
)

P22 = FlowParams(2, 2)
CFG = IntegratorConfig()


def _graph_residual(kind, a, c, params, r=1e-3):
    """Independent oracle: plug u = a + c r^2 into the graph equation."""
    u = a + c * r * r
    ur = 2.0 * c * r
    urr = 2.0 * c
    p, q = params.p, params.q
    base = urr / (1 + ur * ur)
    if kind is EquationKind.MINIMAL:
        return base + (p - 1) / r * ur - (q - 1) / u
    if kind is EquationKind.EXPANDER:
        return base + ((p - 1) / r + r / 2) * ur - u / 2 - (q - 1) / u
    return base + ((p - 1) / r - r / 2) * ur + u / 2 - (q - 1) / u


@pytest.mark.parametrize("kind", [EquationKind.MINIMAL, EquationKind.EXPANDER,
                                  EquationKind.SHRINKER])
@pytest.mark.parametrize("p,q,a", [(2, 2, 1.0), (2, 3, 0.4), (3, 2, 2.2), (1, 2, 0.8)])
def test_series_coefficient_balances_equation(kind, p, q, a):
    params = FlowParams(p, q)
    c = series_coefficient(kind, a, params)
    assert abs(_graph_residual(kind, a, c, params)) < 1e-5
    assert abs(_graph_residual(kind, a, c + 0.1, params)) > 0.1


def test_series_coefficient_values():
    assert series_coefficient(EquationKind.MINIMAL, 1.0, P22) == pytest.approx(0.25)
    cyl = math.sqrt(2.0)
    assert series_coefficient(EquationKind.SHRINKER, cyl, P22) == pytest.approx(0.0, abs=1e-16)
    # flat start at large height: c -> a / (4p)
    a = 1e4
    c = series_coefficient(EquationKind.EXPANDER, a, P22)
    assert c == pytest.approx(a / 8.0, rel=1e-7)


def test_series_start_rejects_bad_input():
    with pytest.raises(ValueError):
        series_start(EquationKind.MINIMAL, -1.0, P22)
    with pytest.raises(ValueError):
        series_start(EquationKind.LINEARIZED_EXPANDER, 1.0, P22)


def test_exact_cylinder_preserved():
    a = math.sqrt(2.0)
    start = series_start(EquationKind.SHRINKER, a, P22)
    curve = integrate_profile(EquationKind.SHRINKER, start, P22, CFG)
    assert curve.termination.tag is TerminationTag.REACHED_RMAX
    assert np.max(np.abs(curve.u - a)) < 1e-8


def test_exact_round_profile_hits_axis():
    for (p, q) in [(2, 2), (1, 2)]:
        params = FlowParams(p, q)
        R = math.sqrt(2.0 * (params.n - 1.0))
        start = series_start(EquationKind.SHRINKER, R, params)
        curve = integrate_profile(EquationKind.SHRINKER, start, params, CFG)
        assert curve.termination.tag is TerminationTag.AXIS_HIT
        assert abs(curve.r[-1] - R) < 1e-8
        assert np.max(np.abs(np.hypot(curve.r, curve.u) - R)) < 1e-8


def test_residual_of_accepted_samples():
    start = series_start(EquationKind.EXPANDER, 0.7, P22)
    curve = integrate_profile(EquationKind.EXPANDER, start, P22, CFG)
    for i in range(0, len(curve), 7):
        pt = curve.point(i)
        k_eq = parametric_curvature(EquationKind.EXPANDER, P22, pt.r, pt.u,
                                    pt.theta)
        assert abs(pt.k - k_eq) <= 10.0 * (CFG.rel_tol * abs(pt.k) + CFG.abs_tol)


def test_graph_chart_equivalence():
    # arclength solution satisfies the graph equation on a graph sub-arc
    from scipy.integrate import solve_ivp

    start = series_start(EquationKind.SHRINKER, 0.9, P22)
    curve = integrate_profile(EquationKind.SHRINKER, start, P22,
                              IntegratorConfig(r_max=3.0))

    def rhs(r, y):
        u, up = y
        return [up, (1 + up * up) * ((1.0) / u - u / 2 - (1.0 / r - r / 2) * up)]

    i0 = 5
    r0, u0 = curve.r[i0], curve.u[i0]
    up0 = math.tan(curve.theta[i0])
    sol = solve_ivp(rhs, (r0, curve.r[-1]), [u0, up0], rtol=1e-12, atol=1e-14,
                    dense_output=True)
    for i in range(i0, len(curve), 10):
        u_graph = sol.sol(curve.r[i])[0]
        assert abs(u_graph - curve.u[i]) < 1e-7


def test_minimal_homothety_equivariance():
    base = integrate_profile(
        EquationKind.MINIMAL, series_start(EquationKind.MINIMAL, 1.0, P22),
        P22, IntegratorConfig(rel_tol=1e-12, abs_tol=1e-14, r_max=8.0),
    ).resampled(100000)
    for a in (0.5, 2.0):
        scaled = integrate_profile(
            EquationKind.MINIMAL, series_start(EquationKind.MINIMAL, a, P22),
            P22, IntegratorConfig(rel_tol=1e-12, abs_tol=1e-14, r_max=8.0 * a))
        sel = (scaled.r > 0.6 * a) & (scaled.r < 7.5 * a)
        u_base = np.interp(scaled.r[sel] / a, base.r, base.u)
        assert np.max(np.abs(scaled.u[sel] / a - u_base)) < 1e-8


def test_phase_profile_equivalence():
    cfg = IntegratorConfig()
    curve = integrate_profile(EquationKind.MINIMAL,
                              series_start(EquationKind.MINIMAL, 1.0, P22),
                              P22, cfg)
    dense = curve.resampled(40000)
    i0 = int(np.searchsorted(dense.r, 0.5))
    init = PhaseState(eta=math.log(dense.r[i0]),
                      X=dense.u[i0] / dense.r[i0],
                      Y=math.tan(dense.theta[i0]))
    states, tag = integrate_phase(EquationKind.MINIMAL, init, P22, cfg)
    assert tag is TerminationTag.REACHED_RMAX
    eta_prof = np.log(dense.r[i0:])
    X_prof = dense.u[i0:] / dense.r[i0:]
    for st in states[:: max(1, len(states) // 40)]:
        X_interp = np.interp(st.eta, eta_prof, X_prof)
        assert abs(st.X - X_interp) < 1e-6


def test_phase_fixed_point_is_stationary():
    c = cone_slope(P22)
    init = PhaseState(eta=0.0, X=c.lambda_s, Y=c.lambda_s)
    states, _ = integrate_phase(EquationKind.MINIMAL, init, P22, CFG)
    final = states[-1]
    assert abs(final.X - c.lambda_s) < 1e-9
    assert abs(final.Y - c.lambda_s) < 1e-9


def test_phase_expander_grinds_to_halt():
    # friction freezes the trajectory at a slope other than the cone's;
    # the residual gap Y - X sits on the slow manifold ~ 1/r^2
    init = PhaseState(eta=math.log(0.05), X=3.0 / 0.05, Y=0.1)
    states, tag = integrate_phase(EquationKind.EXPANDER, init, P22,
                                  IntegratorConfig(r_max=14.0))
    assert tag is TerminationTag.REACHED_RMAX
    final = states[-1]
    gap_pred = 2.0 * (1.0 - final.X * final.Y) / (final.X * 14.0 ** 2)
    assert abs(final.Y - final.X) < 0.05
    assert abs((final.Y - final.X) - gap_pred) < 0.2 * abs(gap_pred)
    assert abs(final.X - 1.0) > 0.05


def test_fixed_point_spectrum_closed_form():
    for n, expected in [(5, complex(-2.0, math.sqrt(2.0))),
                        (7, complex(-3.0, 1.0))]:
        params = FlowParams(2, n - 2)
        spec = fixed_point_linearization(params)
        assert spec.oscillatory
        ev = sorted(spec.eigenvalues, key=lambda z: -z.imag)[0]
        assert abs(ev - expected) < 1e-14
        # oracle: numpy eigenvalues of the stated Jacobian
        ev_np = np.linalg.eigvals(np.array(spec.jacobian))
        assert sorted(ev_np.real.round(12)) == sorted(
            [z.real for z in spec.eigenvalues])
    spec9 = fixed_point_linearization(FlowParams(2, 7))
    assert not spec9.oscillatory
    assert all(abs(z.imag) == 0 for z in spec9.eigenvalues)


def test_fixed_point_spectrum_matches_decay_constants():
    for n in range(4, 8):
        params = FlowParams(2, n - 2)
        spec = fixed_point_linearization(params)
        beta = (n - 3) / 2.0
        mu = math.sqrt(8.0 - (n - 5.0) ** 2) / 2.0
        ev = spec.eigenvalues[0]
        assert abs(ev.real + (beta + 1.0)) < 1e-12
        assert abs(abs(ev.imag) - mu) < 1e-12


def test_linear_basis_indicial_exponents():
    basis = linear_basis(EquationKind.LINEARIZED_EXPANDER, P22, CFG, r0=1e-5)
    n = P22.n
    beta = (n - 3) / 2.0
    mu = math.sqrt(8.0 - (n - 5.0) ** 2) / 2.0
    # z = h1 + i h2 ~ r^(-beta + i mu); measure d log z / d log r near zero
    # (h1 and h2 live on different adaptive grids, so interpolate h2)
    r = basis.h1.r
    sel = (r > 2e-5) & (r < 2e-4)
    z = basis.h1.g[sel] + 1j * np.interp(r[sel], basis.h2.r, basis.h2.g)
    slopes = np.diff(np.log(z)) / np.diff(np.log(r[sel]))
    est = slopes.mean()
    assert abs(est - complex(-beta, mu)) < 1e-4


def test_linear_basis_outer_slopes_stable():
    # the end-slope readout carries an O(r^-4) correction tail
    b10 = linear_basis(EquationKind.LINEARIZED_EXPANDER, P22, CFG)
    b14 = linear_basis(EquationKind.LINEARIZED_EXPANDER, P22,
                       IntegratorConfig(r_max=14.0))
    assert abs(b10.h1.end_slope - b14.h1.end_slope) < 1e-4
    assert abs(b10.h2.end_slope - b14.h2.end_slope) < 1e-4
    assert b10.g3 is None


def test_linear_basis_outer_solution_matches_inner_pair():
    basis = linear_basis(EquationKind.LINEARIZED_SHRINKER, P22, CFG)
    g3 = basis.g3
    assert g3 is not None
    # on a small-r window, g3 must be a combination of the inner pair
    sel = (g3.r > 1.2e-3) & (g3.r < 0.05)
    A = np.column_stack([basis.h1(g3.r[sel]), basis.h2(g3.r[sel])])
    coef, *_ = np.linalg.lstsq(A, g3.g[sel], rcond=None)
    resid = g3.g[sel] - A @ coef
    assert np.max(np.abs(resid)) < 1e-3 * np.max(np.abs(g3.g[sel]))
    # and it is normalized to the outer linear behavior
    assert abs(g3.g[-1] / g3.r[-1] - 1.0) < 0.05


def test_shrinker_rmax_guard():
    start = series_start(EquationKind.SHRINKER, 1.0, P22)
    with pytest.raises(ValueError):
        integrate_profile(EquationKind.SHRINKER, start, P22,
                          IntegratorConfig(r_max=20.0))


def test_forward_shrinker_linearization_overflows():
    # forward integration rides the growing Gaussian mode into overflow
    from selfsim import _kernels
    from selfsim._kernels import codes

    samples, status = _kernels.integrate_linear(
        codes.LINEAR_SHRINKER, 2.0, 2.0, 1e-3, 1.0, 0.0, 40.0,
        1e-10, 1e-12, 400_000, 1e-6, 0.1, 1e280)
    assert status == codes.OVERFLOW
    assert samples[-1, 0] < 40.0


def test_export_profile_sidecar(tmp_path):
    start = series_start(EquationKind.EXPANDER, 1.0, P22)
    curve = integrate_profile(EquationKind.EXPANDER, start, P22, CFG)
    csv_path, json_path = export_profile(
        curve, str(tmp_path / "run"), EquationKind.EXPANDER, P22, 1.0, CFG)
    record = json.loads(open(json_path).read())
    assert record["kind"] == "expander"
    assert record["params"] == {"p": 2, "q": 2, "n": 4}
    assert record["termination"]["tag"] == "reached_rmax"
    assert record["config"]["r_max"] == CFG.r_max
    assert open(csv_path).readline().strip() == "s,r,u,theta,k"


def test_integrator_config_validation():
    with pytest.raises(ValueError):
        IntegratorConfig(rel_tol=2.0)
    with pytest.raises(ValueError):
        IntegratorConfig(r_max=-1.0)
    with pytest.raises(ValueError):
        IntegratorConfig(escape_band=0.0)
