import json
import math
import os

import pytest

from selfsim.cli import main


def run(tmp_path, *argv):
    out = tmp_path / "out"
    code = main(list(argv) + ["--out", str(out)])
    return code, out


def test_constants_decay_only(tmp_path):
    code, out = run(tmp_path, "constants", "--p", "2", "--q", "3",
                    "--decay-only")
    assert code == 0
    data = json.loads((out / "constants.json").read_text())
    assert data["beta"] == 1.0
    assert data["mu"] == pytest.approx(math.sqrt(2.0))
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["command"] == "constants"
    assert {e["path"] for e in manifest["outputs"]} == {"constants.json"}


def test_usage_errors():
    assert main(["expander", "--a", "1.0"]) == 2          # missing p/q
    assert main(["expander", "--a", "1.0", "--n", "3",
                 "--p", "2", "--q", "2"]) == 2            # both spellings
    with pytest.raises(SystemExit):
        main(["no-such-command"])


def test_n_implies_axis_chart(tmp_path):
    code, out = run(tmp_path, "constants", "--n", "4", "--decay-only")
    assert code == 0
    assert json.loads((out / "constants.json").read_text())["beta"] == 0.5


def test_format_flag_narrows_outputs(tmp_path):
    code, out = run(tmp_path, "shrinkers", "--p", "2", "--q", "2",
                    "--kmax", "2", "--format", "csv")
    assert code == 0
    assert (out / "shrinkers.csv").exists()
    assert not (out / "shrinkers.json").exists()


def test_alpha_curve_command(tmp_path):
    code, out = run(tmp_path, "alpha-curve", "--p", "2", "--q", "2",
                    "--amin", "0.001", "--amax", "0.1", "--per-decade", "60")
    assert code == 0
    rows = (out / "alpha_curve.csv").read_text().splitlines()
    assert rows[0] == "a,lambda,alpha,crossings,status"
    assert len(rows) > 60


def test_continuations_command(tmp_path):
    code, out = run(tmp_path, "continuations", "--p", "2", "--q", "2",
                    "--alpha-deg", "50.0")
    assert code == 0
    data = json.loads((out / "continuations.json").read_text())
    assert data["L"] == len(data["solutions"])


def test_audit_intersections_command(tmp_path):
    code, out = run(tmp_path, "audit-intersections", "--p", "2", "--q", "2",
                    "--t-end", "0.05", "--resample-tol", "0.02")
    assert code == 0
    data = json.loads((out / "audit.json").read_text())
    assert data["nonincreasing"] is True


def test_density_trace_command(tmp_path):
    code, out = run(tmp_path, "density-trace", "--p", "1", "--q", "2",
                    "--radius", "0.6", "--t-end", "0.05",
                    "--resample-tol", "0.02")
    assert code == 0
    rows = (out / "density_trace.csv").read_text().splitlines()
    assert rows[0] == "t,phi,err"
    data = json.loads((out / "density_trace.json").read_text())
    assert data["max_upward_violation"] < 1e-3


def test_density_presets_and_determinism(tmp_path):
    code1, out1 = run(tmp_path / "a", "density", "--preset", "sphere",
                      "--p", "1", "--q", "2")
    code2, out2 = run(tmp_path / "b", "density", "--preset", "sphere",
                      "--p", "1", "--q", "2")
    assert code1 == code2 == 0
    b1 = (out1 / "density.json").read_bytes()
    b2 = (out2 / "density.json").read_bytes()
    assert b1 == b2
    phi = json.loads(b1)["phi"]
    assert phi == pytest.approx(4.0 / math.e, abs=1e-6)
    code3, out3 = run(tmp_path / "c", "density", "--preset", "plane",
                      "--p", "1", "--q", "2")
    assert json.loads((out3 / "density.json").read_text())["phi"] == 1.0


def test_manifest_verify_and_drift(tmp_path):
    code, out = run(tmp_path, "total-curvature", "--preset", "ellipse",
                    "--p", "1", "--q", "2")
    assert code == 0
    manifest = out / "manifest.json"
    assert main(["--verify", str(manifest)]) == 0
    target = out / "total_curvature.json"
    target.write_text(target.read_text() + " ")
    assert main(["--verify", str(manifest)]) == 3
    assert main(["--verify", str(out / "missing.json")]) == 4


def test_kernel_check_command(tmp_path):
    code, out = run(tmp_path, "kernel-check", "--p", "1", "--q", "2",
                    "--draws", "50")
    assert code == 0
    data = json.loads((out / "kernel_check.json").read_text())
    assert data["worst_residual"] < 1e-10
    assert data["perturbed_residual"] > 1e-5


def test_expander_command(tmp_path):
    code, out = run(tmp_path, "expander", "--p", "2", "--q", "2",
                    "--a", "0.5")
    assert code == 0
    data = json.loads((out / "expander.json").read_text())
    assert 0.0 < data["lambda"] < 2.0
    assert data["crossings"] >= 0


def test_critical_angle_command(tmp_path):
    code, out = run(tmp_path, "critical-angle", "--n", "3", "--axis")
    assert code == 0
    data = json.loads((out / "critical_angle.json").read_text())
    assert 60.0 < data["alpha_crit_deg"] < 70.0
    assert not data["boundary_flag"]
    sweep = (out / "aperture_sweep.csv").read_text().splitlines()
    assert sweep[0] == "a,lambda,alpha,crossings,status"
    assert len(sweep) > 10


def test_shrinkers_command(tmp_path):
    code, out = run(tmp_path, "shrinkers", "--p", "2", "--q", "2",
                    "--kmax", "3")
    assert code == 0
    data = json.loads((out / "shrinkers.json").read_text())
    ks = [rec["k"] for rec in data["records"]]
    assert ks == [1, 2, 3]


def test_evolve_command(tmp_path):
    code, out = run(tmp_path, "evolve", "--p", "1", "--q", "2",
                    "--preset", "sphere", "--radius", "0.5",
                    "--t-end", "0.02", "--resample-tol", "0.02")
    assert code == 0
    data = json.loads((out / "trajectory.json").read_text())
    assert data["stop_reason"] in ("reached_t_end", "extinct")
    assert os.path.exists(out / data["states"][0]["file"])


def test_companion_command(tmp_path):
    code, out = run(tmp_path, "companion", "--p", "2", "--q", "2")
    assert code == 0
    data = json.loads((out / "companion.json").read_text())
    assert data["fixed_point_distance"] < 0.05
    header = (out / "companion.csv").read_text().splitlines()[0]
    assert header == "s,r,u,theta,k"


def test_triple_junction_command(tmp_path):
    code, out = run(tmp_path, "triple-junction", "--p", "2", "--q", "2")
    assert code == 0
    data = json.loads((out / "triple_junction.json").read_text())
    assert math.sqrt(2.0) < data["a_star"] < math.sqrt(6.0)
    for ang in data["angles_deg"]:
        assert abs(ang - 120.0) < 1e-4


def test_first_variation_command(tmp_path):
    code, out = run(tmp_path, "first-variation", "--p", "2", "--q", "2",
                    "--radius", "2.0")
    assert code == 0
    data = json.loads((out / "first_variation.json").read_text())
    assert data["derivative"] > 0


def test_gauss_bonnet_command(tmp_path):
    code, out = run(tmp_path, "gauss-bonnet", "--p", "1", "--q", "2",
                    "--preset", "torus")
    assert code == 0
    data = json.loads((out / "gauss_bonnet.json").read_text())
    assert len(data["reports"]) == 3
    assert all(rep["holds"] for rep in data["reports"])


def test_fit_command(tmp_path):
    code, out = run(tmp_path, "fit", "--p", "2", "--q", "2")
    assert code == 0
    data = json.loads((out / "fit.json").read_text())
    assert data["amplitude"] > 0.1
    assert data["residual_rms"] < 0.05 * data["amplitude"]


def test_numerical_failure_exit_code(tmp_path):
    # shrinker family for p = 1 has no cone: clean numerical-failure exit
    code = main(["shrinkers", "--p", "1", "--q", "3", "--kmax", "2",
                 "--out", str(tmp_path / "x")])
    assert code == 3
