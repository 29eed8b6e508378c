"""Command-line front end with reproducible run manifests.

Every subcommand maps onto one library operation, writes its data files
(CSV/JSON, fixed formatting, no timestamps inside data) into the output
directory, and finishes by atomically writing a manifest listing every
output with its sha256. `selfsim --verify <manifest>` recomputes the
checksums and reports drift.

Exit codes: 0 success, 2 usage error, 3 numerical failure, 4 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import sys
import tempfile
import time
import warnings

import numpy as np

from . import __version__
from ._kernels import BACKEND
from .geometry import FlowParams, ProfileCurve, cone_slope

DATA_FMT = "%.17g"


def _fmt(x) -> str:
    return DATA_FMT % float(x)


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) if isinstance(v, (int, float, np.floating))
                        else str(v) for v in row])


def _np_default(obj):
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def _write_json(path, payload):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=_np_default)
        fh.write("\n")


def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def _params_from(args) -> FlowParams:
    if args.n is not None:
        if args.p is not None or args.q is not None:
            raise SystemExit("use either --n or --p/--q, not both")
        # --n selects the single-axis chart (p = 1); --axis is documentation
        return FlowParams(1, args.n - 1)
    if args.p is None or args.q is None:
        raise SystemExit("need --p and --q (or --n for the p = 1 chart)")
    return FlowParams(args.p, args.q)


def _config_from(args):
    from .ode import IntegratorConfig

    kwargs = {}
    if args.tol is not None:
        kwargs["rel_tol"] = args.tol
        kwargs["abs_tol"] = args.tol * 1e-2
    if args.rmax is not None:
        kwargs["r_max"] = args.rmax
    return IntegratorConfig(**kwargs)


def _expander_rows(records):
    for rec in records:
        yield (rec.a, rec.lambda_a, rec.alpha_a,
               rec.crossings if rec.crossings is not None else -1,
               "ok" if rec.stabilized else "estimate")


def _profile_json(curve: ProfileCurve):
    term = curve.termination
    return {
        "n_samples": int(len(curve)),
        "termination": term.tag.value if term else None,
        "end": {"r": float(curve.r[-1]), "u": float(curve.u[-1]),
                "theta": float(curve.theta[-1])},
    }


# ---------------------------------------------------------------- commands


def cmd_companion(args, outdir, params, cfg):
    from .shooting import companion

    res = companion(params, cfg)
    res.curve.to_csv(os.path.join(outdir, "companion.csv"))
    _write_json(os.path.join(outdir, "companion.json"), {
        "crossings": res.crossings,
        "crossing_r": [float(v) for v in res.crossing_r],
        "final_phase": {"X": res.final_phase[0], "Y": res.final_phase[1]},
        "fixed_point_distance": res.fixed_point_distance,
        "profile": _profile_json(res.curve),
    })
    return ["companion.csv", "companion.json"]


def cmd_expander(args, outdir, params, cfg):
    from .shooting import expander_slope

    rec = expander_slope(args.a, params, cfg)
    _write_json(os.path.join(outdir, "expander.json"), {
        "a": rec.a, "lambda": rec.lambda_a, "alpha_rad": rec.alpha_a,
        "alpha_deg": math.degrees(rec.alpha_a),
        "crossings": rec.crossings, "stabilized": rec.stabilized,
        "err": rec.err,
    })
    return ["expander.json"]


def cmd_alpha_curve(args, outdir, params, cfg):
    from .shooting import alpha_curve

    grid = np.geomspace(args.amin, args.amax,
                        int(args.per_decade * math.log10(args.amax / args.amin)) + 1)
    curve = alpha_curve(grid, params, cfg, threads=args.threads)
    _write_csv(os.path.join(outdir, "alpha_curve.csv"),
               ["a", "lambda", "alpha", "crossings", "status"],
               _expander_rows(curve.records))
    _write_json(os.path.join(outdir, "alpha_extrema.json"), {
        "extrema": [{"a": a, "offset": f} for a, f in curve.extrema],
    })
    return ["alpha_curve.csv", "alpha_extrema.json"]


def cmd_critical_angle(args, outdir, params, cfg):
    from .shooting import critical_angle

    res = critical_angle(params, cfg, threads=args.threads)
    _write_csv(os.path.join(outdir, "aperture_sweep.csv"),
               ["a", "lambda", "alpha", "crossings", "status"],
               _expander_rows(res.sweep))
    _write_json(os.path.join(outdir, "critical_angle.json"), {
        "alpha_crit_rad": res.alpha_crit,
        "alpha_crit_deg": math.degrees(res.alpha_crit),
        "argmin_a": res.argmin_a,
        "boundary_flag": res.boundary_flag,
        "widened": res.widened,
    })
    return ["aperture_sweep.csv", "critical_angle.json"]


def cmd_shrinkers(args, outdir, params, cfg):
    from .shooting import find_shrinkers

    recs = find_shrinkers(args.kmax, params, cfg)
    outputs = []
    if args.format in (None, "csv"):
        _write_csv(os.path.join(outdir, "shrinkers.csv"),
                   ["k", "a", "lambda", "alpha", "sign", "bracket_width"],
                   [(r.k, r.a_k, r.lambda_k, r.alpha_k, r.sign, r.bracket_width)
                    for r in recs])
        outputs.append("shrinkers.csv")
    if args.format in (None, "json"):
        _write_json(os.path.join(outdir, "shrinkers.json"), {
            "records": [{
                "k": r.k, "a": r.a_k, "lambda": r.lambda_k,
                "alpha_rad": r.alpha_k, "sign": r.sign,
                "bracket": list(r.bracket),
                "bracket_width": r.bracket_width,
            } for r in recs],
        })
        outputs.append("shrinkers.json")
    return outputs


def cmd_continuations(args, outdir, params, cfg):
    from .shooting import count_continuations, find_shrinkers

    if args.alpha_deg is not None:
        alpha = math.radians(args.alpha_deg)
    else:
        recs = find_shrinkers(args.k, params, cfg)
        rec = next(r for r in recs if r.k == args.k)
        alpha = rec.alpha_k
    sols, L, resolved = count_continuations(alpha, params, cfg,
                                            threads=args.threads)
    _write_json(os.path.join(outdir, "continuations.json"), {
        "alpha_rad": alpha, "alpha_deg": math.degrees(alpha),
        "L": L, "resolved": resolved,
        "solutions": [{"a": r.a, "lambda": r.lambda_a,
                       "crossings": r.crossings} for r in sols],
    })
    return ["continuations.json"]


def cmd_triple_junction(args, outdir, params, cfg):
    from .shooting import triple_junction

    res = triple_junction(params, cfg)
    _write_json(os.path.join(outdir, "triple_junction.json"), {
        "a_star": res.a_star,
        "junction": list(res.junction),
        "angles_deg": [math.degrees(a) for a in res.angles],
        "endpoint_angles_deg": [math.degrees(a) for a in res.endpoint_angles],
        "monotone": res.monotone,
    })
    return ["triple_junction.json"]


def cmd_constants(args, outdir, params, cfg):
    from .asymptotics import decay_constants, matching_constants

    dc = decay_constants(params.n)
    payload = {
        "n": dc.n, "beta": dc.beta, "mu": dc.mu, "tau": dc.tau,
        "sigma": dc.sigma,
    }
    if not args.decay_only:
        mc = matching_constants(params, cfg)
        payload["matching"] = {
            "lambda1": mc.lambda1, "lambda2": mc.lambda2,
            "A1": mc.A1, "A2": mc.A2, "B1": mc.B1, "B2": mc.B2,
            "D1": mc.D1, "D2": mc.D2, "D": mc.D, "E": mc.E,
        }
    _write_json(os.path.join(outdir, "constants.json"), payload)
    return ["constants.json"]


def cmd_fit(args, outdir, params, cfg):
    from .asymptotics import decay_constants, fit_oscillation
    from .shooting import companion

    dc = decay_constants(params.n)
    if args.curve:
        curve = ProfileCurve.from_csv(args.curve, params)
    else:
        from .ode import IntegratorConfig

        far = IntegratorConfig(rel_tol=cfg.rel_tol, abs_tol=cfg.abs_tol,
                               r_max=max(cfg.r_max, 2.0e4),
                               max_steps=4_000_000, h_cap=2.0e4)
        curve = companion(params, far).curve
    lam_s = cone_slope(params).lambda_s
    w = curve.u - lam_s * curve.r
    window = None
    if args.window:
        window = tuple(args.window)
    else:
        r_hi = curve.r[-1] * 0.999
        window = (max(3.0, r_hi * math.exp(-4.0 * math.pi / dc.mu)), r_hi)
    fit = fit_oscillation(curve.r, w, dc, window=window)
    _write_json(os.path.join(outdir, "fit.json"), {
        "A1": fit.A1, "A2": fit.A2, "window": list(fit.window),
        "residual_rms": fit.residual_rms, "amplitude": fit.amplitude,
        "phase": fit.phase,
    })
    return ["fit.json"]


def _evolve_preset(args, params, cfg):
    from .evolve import cylinder_profile, sphere_profile
    from .ode import EquationKind, integrate_profile, series_start

    if args.preset == "sphere":
        return sphere_profile(args.radius, params, 250), params
    if args.preset == "cylinder":
        return cylinder_profile(args.radius, 4.0 * args.radius, params, 200), params
    if args.preset == "shrinker":
        from .shooting import find_shrinkers

        recs = find_shrinkers(args.k, params, cfg)
        rec = next(r for r in recs if r.k == args.k)
        start = series_start(EquationKind.SHRINKER, rec.a_k, params)
        curve = integrate_profile(EquationKind.SHRINKER, start, params,
                                  cfg.with_rmax(min(8.0, cfg.r_max)))
        return curve, params
    if args.preset == "expander":
        start = series_start(EquationKind.EXPANDER, args.a, params)
        curve = integrate_profile(EquationKind.EXPANDER, start, params, cfg)
        return curve, params
    raise SystemExit(f"unknown preset {args.preset}")


def cmd_evolve(args, outdir, params, cfg):
    from .evolve import SchemeConfig, run_flow

    init, params = _evolve_preset(args, params, cfg)
    scheme = SchemeConfig(dt_safety=args.dt_safety,
                          resample_tol=args.resample_tol)
    traj = run_flow(init, args.t_end, params, scheme, t_start=args.t_start)
    outputs = []
    index = []
    for i, state in enumerate(traj.states):
        name = f"snapshot_{i:04d}.csv"
        state.curve.to_csv(os.path.join(outdir, name))
        diag = traj.diagnostics[min(i, len(traj.diagnostics) - 1)]
        index.append({"t": state.t, "file": name,
                      "min_u": diag["min_u"], "max_abs_k": diag["max_abs_k"],
                      "extent": diag["extent"]})
        outputs.append(name)
    _write_json(os.path.join(outdir, "trajectory.json"), {
        "states": index,
        "stop_reason": traj.stop_reason.value,
        "t_singular": traj.t_singular,
    })
    outputs.append("trajectory.json")
    return outputs


def cmd_audit_intersections(args, outdir, params, cfg):
    from .evolve import SchemeConfig, intersection_audit, run_flow, sphere_profile
    from .shooting import companion

    comp = companion(params, cfg)
    radius = math.sqrt(2.0 * (params.n - 1.0))
    scheme = SchemeConfig(dt_safety=0.5, resample_tol=args.resample_tol)
    traj = run_flow(sphere_profile(radius, params, 250), args.t_end, params,
                    scheme)
    audit = intersection_audit(traj, comp.curve, kind="static")
    _write_json(os.path.join(outdir, "audit.json"), {
        "times": audit.times,
        "raw_counts": audit.raw_counts,
        "counts": audit.counts,
        "nonincreasing": audit.nonincreasing,
        "tangency_events": audit.tangency_events,
    })
    return ["audit.json"]


def _density_preset(args, params):
    from .evolve import cylinder_profile, sphere_profile
    from .functionals import HeatKernelSpec

    n = params.n
    t = args.t
    spec = HeatKernelSpec(t0=0.0, n=n)
    if args.preset == "sphere":
        radius = math.sqrt(-2.0 * (n - 1.0) * t)
        return sphere_profile(radius, params, 800), spec, t
    if args.preset == "cylinder":
        radius = math.sqrt(-2.0 * (params.q - 1.0) * t)
        length = 14.0 * math.sqrt(-t)
        return cylinder_profile(radius, length, params, 2500), spec, t
    raise SystemExit(f"unknown density preset {args.preset}")


def cmd_density(args, outdir, params, cfg):
    from .functionals import gaussian_density, plane_density

    if args.preset == "plane":
        phi = plane_density()
        payload = {"preset": "plane", "phi": phi,
                   "note": "hyperplane through the center, closed form"}
    else:
        curve, spec, t = _density_preset(args, params)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            phi = gaussian_density(curve, params, spec, t)
        payload = {"preset": args.preset, "t": t, "phi": phi}
    _write_json(os.path.join(outdir, "density.json"), payload)
    return ["density.json"]


def cmd_density_trace(args, outdir, params, cfg):
    from .evolve import SchemeConfig, run_flow, sphere_profile
    from .functionals import HeatKernelSpec, density_trace

    radius = args.radius
    scheme = SchemeConfig(dt_safety=0.5, resample_tol=args.resample_tol)
    traj = run_flow(sphere_profile(radius, params, 250), args.t_end, params,
                    scheme)
    t0 = traj.t_singular if traj.t_singular is not None else args.t_end * 1.05
    trace = density_trace(traj, HeatKernelSpec(t0=t0, n=params.n))
    trace.to_csv(os.path.join(outdir, "density_trace.csv"))
    _write_json(os.path.join(outdir, "density_trace.json"), {
        "t0": t0, "max_upward_violation": trace.max_upward_violation,
        "n_samples": len(trace.samples),
    })
    return ["density_trace.csv", "density_trace.json"]


def cmd_kernel_check(args, outdir, params, cfg):
    from .functionals import HeatKernelSpec, kernel_identity_residual

    rng = np.random.default_rng(args.seed)
    worst = 0.0
    for _ in range(args.draws):
        n = int(rng.integers(3, 8))
        spec = HeatKernelSpec(t0=float(rng.uniform(0.5, 2.0)), n=n)
        x = rng.normal(size=n)
        t = spec.t0 - float(rng.uniform(0.1, 2.0))
        basis, _ = np.linalg.qr(rng.normal(size=(n, n)))
        frame = basis.T[: n - 1]
        res = kernel_identity_residual(x, t, frame, spec)
        worst = max(worst, abs(res))
    perturbed = abs(kernel_identity_residual(
        np.ones(3), 0.0, np.array([[1.0, 0, 0], [0, 1.0, 0]]),
        HeatKernelSpec(t0=1.0, n=3), exponent_scale=4.1))
    _write_json(os.path.join(outdir, "kernel_check.json"), {
        "draws": args.draws, "worst_residual": worst,
        "perturbed_residual": perturbed, "seed": args.seed,
    })
    return ["kernel_check.json"]


def cmd_first_variation(args, outdir, params, cfg):
    from .functionals import first_variation
    from .evolve import sphere_profile

    curve = sphere_profile(args.radius, params, 800)
    L = curve.length

    def bump(s):
        x = (np.asarray(s) - 0.5 * L) / (0.3 * L)
        out = np.exp(-1.0 / np.maximum(1e-12, 1.0 - x * x))
        out[np.abs(x) >= 1] = 0.0
        return out

    val = first_variation(curve, args.functional, bump, h=1e-3,
                          window=args.window)
    _write_json(os.path.join(outdir, "first_variation.json"), {
        "functional": args.functional, "radius": args.radius,
        "derivative": val,
    })
    return ["first_variation.json"]


def cmd_gauss_bonnet(args, outdir, params, cfg):
    from .functionals import gauss_bonnet_audit
    from .evolve import sphere_profile

    if args.preset == "sphere":
        curve, genus = sphere_profile(1.0, params, 800), 0
    elif args.preset == "catenoid":
        curve, genus = _catenoid_profile(params), 0
    elif args.preset == "torus":
        curve, genus = _torus_profile(params), 1
    else:
        raise SystemExit(f"unknown preset {args.preset}")
    reports = []
    for eps in (0.1, 0.5, 0.9):
        rep = gauss_bonnet_audit(curve, genus, epsilon=eps)
        reports.append({
            "epsilon": eps, "lhs": rep.lhs,
            "rhs_terms": list(rep.rhs_terms), "D": rep.D_ratio,
            "holds": rep.holds, "own_constant_term": rep.own_constant_term,
            "own_holds": rep.own_holds,
        })
    _write_json(os.path.join(outdir, "gauss_bonnet.json"), {
        "preset": args.preset, "genus": genus, "reports": reports,
    })
    return ["gauss_bonnet.json"]


def _catenoid_profile(params, c: float = 0.5, r_top: float = 2.4,
                      n_pts: int = 2000):
    t = np.linspace(0.0, r_top / c, n_pts)
    r = c * t
    u = c * np.cosh(t)
    s = c * np.sinh(t)
    th = np.arctan(np.sinh(t))
    k = 1.0 / (c * np.cosh(t) ** 2)
    return ProfileCurve(np.column_stack([s, r, u, th, k]), params)


def _torus_profile(params, center: float = 1.2, radius: float = 0.4,
                   n_pts: int = 1500):
    phi = np.linspace(-math.pi / 2.0, math.pi / 2.0, n_pts)
    r = radius * np.cos(phi)
    u = center + radius * np.sin(phi)
    s = radius * (phi - phi[0])
    th = phi + math.pi / 2.0
    k = np.full_like(phi, 1.0 / radius)
    r[0] = r[-1] = 0.0
    return ProfileCurve(np.column_stack([s, r, u, th, k]), params)


def cmd_total_curvature(args, outdir, params, cfg):
    from .functionals import total_curvature

    th = np.linspace(0.0, 2.0 * math.pi, args.samples)
    if args.preset == "circle":
        comps = [np.column_stack([np.cos(th), np.sin(th)])]
    elif args.preset == "ellipse":
        comps = [np.column_stack([2.0 * np.cos(th), np.sin(th)])]
    elif args.preset == "two-circles":
        ring = np.column_stack([np.cos(th), np.sin(th)])
        comps = [ring, ring + 5.0]
    else:
        raise SystemExit(f"unknown preset {args.preset}")
    res = total_curvature(comps)
    _write_json(os.path.join(outdir, "total_curvature.json"), {
        "preset": args.preset, "integral": res.integral,
        "components": res.components,
        "lower_bound": 2.0 * math.pi * res.components,
    })
    return ["total_curvature.json"]


COMMANDS = {
    "companion": cmd_companion,
    "expander": cmd_expander,
    "alpha-curve": cmd_alpha_curve,
    "critical-angle": cmd_critical_angle,
    "shrinkers": cmd_shrinkers,
    "continuations": cmd_continuations,
    "triple-junction": cmd_triple_junction,
    "constants": cmd_constants,
    "fit": cmd_fit,
    "evolve": cmd_evolve,
    "audit-intersections": cmd_audit_intersections,
    "density": cmd_density,
    "density-trace": cmd_density_trace,
    "kernel-check": cmd_kernel_check,
    "first-variation": cmd_first_variation,
    "gauss-bonnet": cmd_gauss_bonnet,
    "total-curvature": cmd_total_curvature,
}


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="selfsim",
        description="Self-similar solutions of rotationally symmetric mean "
                    "curvature flow: shooting, asymptotics, diagnostics.")
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    parser.add_argument("--verify", metavar="MANIFEST",
                        help="recompute checksums of a previous run and report drift")
    sub = parser.add_subparsers(dest="command")

    def common(sp):
        sp.add_argument("--p", type=int, default=None)
        sp.add_argument("--q", type=int, default=None)
        sp.add_argument("--n", type=int, default=None,
                        help="ambient dimension in the single-axis chart (p = 1)")
        sp.add_argument("--axis", action="store_true",
                        help="with --n: rotation about one axis (implied)")
        sp.add_argument("--rmax", type=float, default=None)
        sp.add_argument("--tol", type=float, default=None)
        sp.add_argument("--out", default=None)
        sp.add_argument("--format", choices=("csv", "json"), default=None,
                        help="restrict record tables to one serialization")
        sp.add_argument("--threads", type=int, default=2)

    sp = sub.add_parser("companion", help="minimal graph spiraling into the cone")
    common(sp)

    sp = sub.add_parser("expander", help="limiting slope of one expander")
    common(sp)
    sp.add_argument("--a", type=float, required=True)

    sp = sub.add_parser("alpha-curve", help="expander slope sweep over a")
    common(sp)
    sp.add_argument("--amin", type=float, default=1e-4)
    sp.add_argument("--amax", type=float, default=10.0)
    sp.add_argument("--per-decade", type=int, default=400)

    sp = sub.add_parser("critical-angle", help="double-cone critical aperture")
    common(sp)

    sp = sub.add_parser("shrinkers", help="discrete shrinker family")
    common(sp)
    sp.add_argument("--kmax", type=int, default=6)

    sp = sub.add_parser("continuations", help="count expanders at a given angle")
    common(sp)
    sp.add_argument("--alpha-deg", type=float, default=None)
    sp.add_argument("--k", type=int, default=None,
                    help="use the angle of the k-th shrinker")

    sp = sub.add_parser("triple-junction", help="equal-angle junction height")
    common(sp)

    sp = sub.add_parser("constants", help="decay and matching constants")
    common(sp)
    sp.add_argument("--decay-only", action="store_true")

    sp = sub.add_parser("fit", help="oscillatory tail fit")
    common(sp)
    sp.add_argument("--curve", default=None, help="profile CSV to fit")
    sp.add_argument("--window", type=float, nargs=2, default=None)

    sp = sub.add_parser("evolve", help="front-tracking flow of a preset curve")
    common(sp)
    sp.add_argument("--preset", default="sphere",
                    choices=("sphere", "cylinder", "shrinker", "expander"))
    sp.add_argument("--radius", type=float, default=1.0)
    sp.add_argument("--a", type=float, default=1.0)
    sp.add_argument("--k", type=int, default=2)
    sp.add_argument("--t-start", type=float, default=0.0)
    sp.add_argument("--t-end", type=float, default=0.3)
    sp.add_argument("--dt-safety", type=float, default=0.5)
    sp.add_argument("--resample-tol", type=float, default=0.01)

    sp = sub.add_parser("audit-intersections",
                        help="intersection counts against the static companion")
    common(sp)
    sp.add_argument("--t-end", type=float, default=0.5)
    sp.add_argument("--resample-tol", type=float, default=0.01)

    sp = sub.add_parser("density", help="Gaussian density of a preset")
    common(sp)
    sp.add_argument("--preset", default="sphere",
                    choices=("sphere", "cylinder", "plane"))
    sp.add_argument("--t", type=float, default=-1.0)

    sp = sub.add_parser("density-trace", help="density along an evolved flow")
    common(sp)
    sp.add_argument("--radius", type=float, default=1.0)
    sp.add_argument("--t-end", type=float, default=0.3)
    sp.add_argument("--resample-tol", type=float, default=0.01)

    sp = sub.add_parser("kernel-check", help="backwards-kernel identity residual")
    common(sp)
    sp.add_argument("--draws", type=int, default=1000)
    sp.add_argument("--seed", type=int, default=20240801)

    sp = sub.add_parser("first-variation", help="weighted first variation probe")
    common(sp)
    sp.add_argument("--functional", choices=("J", "K"), default="J")
    sp.add_argument("--radius", type=float, default=2.0)
    sp.add_argument("--window", type=float, default=None)

    sp = sub.add_parser("gauss-bonnet", help="localized curvature-energy audit")
    common(sp)
    sp.add_argument("--preset", default="sphere",
                    choices=("sphere", "catenoid", "torus"))

    sp = sub.add_parser("total-curvature", help="turning-angle total curvature")
    common(sp)
    sp.add_argument("--preset", default="circle",
                    choices=("circle", "ellipse", "two-circles"))
    sp.add_argument("--samples", type=int, default=720)

    return parser


def _verify(manifest_path) -> int:
    try:
        with open(manifest_path) as fh:
            manifest = json.load(fh)
    except OSError as exc:
        print(f"cannot read manifest: {exc}", file=sys.stderr)
        return 4
    base = os.path.dirname(os.path.abspath(manifest_path))
    drift = []
    for entry in manifest.get("outputs", []):
        path = os.path.join(base, entry["path"])
        if not os.path.exists(path):
            drift.append((entry["path"], "missing"))
            continue
        digest = _sha256(path)
        if digest != entry["sha256"]:
            drift.append((entry["path"], "checksum mismatch"))
    if drift:
        for path, why in drift:
            print(f"DRIFT {path}: {why}")
        return 3
    print(f"verified {len(manifest.get('outputs', []))} outputs, no drift")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.verify:
        return _verify(args.verify)
    if not args.command:
        parser.print_help()
        return 2

    outdir = args.out or os.environ.get("SELFSIM_OUT") or "selfsim-out"
    try:
        os.makedirs(outdir, exist_ok=True)
    except OSError as exc:
        print(f"cannot create output directory: {exc}", file=sys.stderr)
        return 4

    try:
        params = _params_from(args)
        cfg = _config_from(args)
    except SystemExit as exc:
        print(exc, file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"invalid parameters: {exc}", file=sys.stderr)
        return 2

    started = time.time()
    try:
        outputs = COMMANDS[args.command](args, outdir, params, cfg)
    except (ArithmeticError, ValueError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"I/O failure: {exc}", file=sys.stderr)
        return 4

    manifest = {
        "command": args.command,
        "argv": list(argv) if argv is not None else sys.argv[1:],
        "params": {"p": params.p, "q": params.q, "n": params.n},
        "config": {
            "rel_tol": cfg.rel_tol, "abs_tol": cfg.abs_tol,
            "r_max": cfg.r_max, "max_steps": cfg.max_steps,
            "escape_band": cfg.escape_band,
        },
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime(started)),
        "runtime_s": round(time.time() - started, 3),
        "code_version": __version__,
        "backend": BACKEND,
        "outputs": [{"path": name,
                     "sha256": _sha256(os.path.join(outdir, name))}
                    for name in outputs],
    }
    fd, tmp = tempfile.mkstemp(dir=outdir, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")
        os.replace(tmp, os.path.join(outdir, "manifest.json"))
    except OSError as exc:
        print(f"cannot write manifest: {exc}", file=sys.stderr)
        return 4
    print(f"wrote {len(outputs)} outputs + manifest.json to {outdir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
