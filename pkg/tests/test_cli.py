from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest

from armwing import cli, parse_mechanism_file, read_trajectory_csv

from conftest import DEMO_PATH, REFERENCE_PATH


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_no_arguments_exits_with_usage():
    with pytest.raises(SystemExit) as err:
        cli.main([])
    assert err.value.code == 2


def test_validate_reference(capsys):
    code, out, err = run(capsys, "validate", REFERENCE_PATH)
    assert code == 0
    assert "valid" in out
    assert "loops 2" in out
    assert err == ""


def test_validate_json_summary(capsys):
    code, out, _ = run(capsys, "validate", REFERENCE_PATH, "--json")
    assert code == 0
    doc = json.loads(out)
    assert doc["links"] == 7
    assert doc["free_joints"] == 4
    assert doc["parameters"]["humerus"] == 14
    assert doc["parameters"]["radius"] == 18
    assert doc["valid"] is True


def test_validate_reports_domain_errors(tmp_path: Path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"format_version": 99}')
    code, out, err = run(capsys, "validate", bad)
    assert code == 1
    assert err.startswith("error: VersionError:")
    code, _, err = run(capsys, "validate", tmp_path / "missing.json")
    assert code == 1
    assert err.startswith("error: IoError:")


def test_solve_prints_angles_and_points(capsys):
    code, out, _ = run(capsys, "solve", REFERENCE_PATH, "--phi", "45")
    assert code == 0
    assert "phi = 45 deg" in out
    assert "angle j2_shoulder:" in out
    assert "point wingtip:" in out
    assert "point elbow:" in out


def test_solve_json(capsys):
    code, out, _ = run(capsys, "solve", REFERENCE_PATH, "--phi", "45", "--json")
    assert code == 0
    doc = json.loads(out)
    assert set(doc["joint_angles_deg"]) >= {"j2_shoulder", "j5_elbow"}
    assert "wingtip" in doc["points_mm"]
    assert "elbow" in doc["points_mm"]
    assert doc["phi_deg"] == 45.0
    assert doc["residual_norm_mm"] < 1e-9


def test_sweep_writes_csv(tmp_path: Path, capsys):
    out_csv = tmp_path / "traj.csv"
    code, out, _ = run(
        capsys, "sweep", "--mech", REFERENCE_PATH, "--samples", "90",
        "--out", out_csv,
    )
    assert code == 0
    data = read_trajectory_csv(out_csv)
    assert len(data["phi_deg"]) == 90
    assert "90 samples" in out


def test_sweep_to_stdout(capsys):
    code, out, _ = run(capsys, "sweep", "--mech", DEMO_PATH, "--samples", "12")
    assert code == 0
    lines = out.strip().splitlines()
    assert len(lines) == 13
    assert lines[0].startswith("phi_deg,")


def test_sweep_failure_names_the_phase(tmp_path: Path, capsys):
    from armwing import write_mechanism_file

    spec = parse_mechanism_file(REFERENCE_PATH)
    crank = next(link for link in spec.links if link.id == "crank")
    crank.points["tip"][0] = 31.0
    binding = next(p for p in spec.parameters if p.name == "crank_len")
    binding.max = 40.0
    broken = tmp_path / "broken.json"
    write_mechanism_file(spec, broken)
    code, _, err = run(capsys, "sweep", "--mech", broken)
    assert code == 1
    assert err.startswith("error: NotAssemblable:")
    assert "phi=" in err


def test_target_emits_the_gait(tmp_path: Path, capsys):
    out_csv = tmp_path / "target.csv"
    code, _, _ = run(capsys, "target", "--samples", "360", "--out", out_csv)
    assert code == 0
    lines = out_csv.read_text().splitlines()
    assert len(lines) == 361
    data = read_trajectory_csv(out_csv)
    assert np.array_equal(data["phi_deg"], np.arange(360.0))
    assert float(data["theta_s_deg"].min()) == -45.0
    assert float(data["theta_s_deg"].max()) == 25.0
    assert np.all(data["tip_x_mm"] == 0.0)


def test_optimize_writes_report_and_fitted_mechanism(tmp_path: Path, capsys):
    target_csv = tmp_path / "target.csv"
    code, _, _ = run(capsys, "target", "--samples", "60", "--out", target_csv)
    assert code == 0
    mech_in = tmp_path / "in.json"
    mech_in.write_bytes(DEMO_PATH.read_bytes())
    report_path = tmp_path / "fit.json"
    code, out, _ = run(
        capsys, "optimize", "--mech", mech_in, "--targets", target_csv,
        "--stage", "humerus", "--seed", "0", "--multistarts", "2",
        "--maxiter", "10", "--out", report_path,
    )
    assert code == 0
    assert report_path.exists()
    fitted = tmp_path / "fit_mechanism.json"
    assert fitted.exists()
    # The input mechanism file is never touched.
    assert mech_in.read_bytes() == DEMO_PATH.read_bytes()
    report = json.loads(report_path.read_text())
    assert report["stage"] == "humerus"
    assert report["final_cost_deg2"] <= report["initial_cost_deg2"]
    assert "stage humerus: cost" in out
    assert "deg^2" in out
    parse_mechanism_file(fitted)


def test_optimize_is_deterministic(tmp_path: Path, capsys):
    target_csv = tmp_path / "target.csv"
    run(capsys, "target", "--samples", "60", "--out", target_csv)
    outputs = []
    for tag in ("a", "b"):
        report_path = tmp_path / f"fit_{tag}.json"
        code, _, _ = run(
            capsys, "optimize", "--mech", DEMO_PATH, "--targets", target_csv,
            "--stage", "humerus", "--seed", "7", "--multistarts", "2",
            "--maxiter", "15", "--out", report_path,
        )
        assert code == 0
        outputs.append(report_path.read_bytes())
    assert outputs[0] == outputs[1]


def test_sensitivity_rank_table(capsys):
    code, out, _ = run(
        capsys, "sensitivity", "--mech", REFERENCE_PATH, "--rank",
        "--samples", "60",
    )
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0].startswith("parameter")
    assert len(lines) == 34
    assert lines[1].split()[0] == "shoulder_x"


def test_sensitivity_rank_json(capsys):
    code, out, _ = run(
        capsys, "sensitivity", "--mech", REFERENCE_PATH, "--rank",
        "--samples", "60", "--json",
    )
    assert code == 0
    doc = json.loads(out)
    assert len(doc) == 33
    assert doc[0]["parameter"] == "shoulder_x"
    assert doc[0]["score_mm_per_pct"] > doc[-1]["score_mm_per_pct"]


def test_sensitivity_family_with_plot(tmp_path: Path, capsys):
    svg = tmp_path / "family.svg"
    code, out, _ = run(
        capsys, "sensitivity", "--mech", REFERENCE_PATH,
        "--param", "crank_len", "--range", "0.95:1.05:0.025",
        "--samples", "60", "--plot", svg,
    )
    assert code == 0
    assert svg.exists()
    assert "crank_len" in out
    assert svg.read_text().startswith("<svg")


def test_sensitivity_needs_rank_or_param(capsys):
    with pytest.raises(SystemExit) as err:
        cli.main(["sensitivity", "--mech", str(REFERENCE_PATH)])
    assert err.value.code == 2


def test_material_list(capsys):
    code, out, _ = run(capsys, "material", "--list")
    assert code == 0
    assert "FLX9870" in out
    assert "mooney-rivlin" in out


def test_material_check_pass_and_fail(capsys):
    code, out, _ = run(
        capsys, "material", "--check", "--strain", "43", "--material", "FLX9870"
    )
    assert code == 0
    assert "pass" in out and "+77" in out
    code, out, _ = run(
        capsys, "material", "--check", "--strain", "130", "--material", "FLX9870"
    )
    assert code == 1
    assert "FAIL" in out and "-10" in out


def test_material_unknown_name(capsys):
    code, _, err = run(
        capsys, "material", "--check", "--strain", "43", "--material", "FLX0000"
    )
    assert code == 1
    assert err.startswith("error: UnknownMaterial:")


def test_material_env_var_database(tmp_path: Path, capsys, monkeypatch):
    db = {
        "format_version": 1,
        "materials": [
            {
                "name": "FLX9870",
                "shore_a": [60.0, 70.0],
                "elongation_break_pct": [50.0, 60.0],
            }
        ],
    }
    path = tmp_path / "custom.json"
    path.write_text(json.dumps(db))
    monkeypatch.setenv(cli.MATERIALS_ENV, str(path))
    code, out, _ = run(
        capsys, "material", "--check", "--strain", "43", "--material", "FLX9870"
    )
    assert code == 0
    assert "capacity 50%" in out


def test_plot_overlays_two_trajectories(tmp_path: Path, capsys):
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    run(capsys, "sweep", "--mech", DEMO_PATH, "--samples", "24", "--out", a)
    run(capsys, "sweep", "--mech", REFERENCE_PATH, "--samples", "24", "--out", b)
    svg = tmp_path / "overlay.svg"
    code, _, _ = run(
        capsys, "plot", "--csv", a, "--csv", b, "--series", "theta_e",
        "--label", "demo", "--label", "armwing", "--out", svg,
    )
    assert code == 0
    text = svg.read_text()
    assert text.count("<polyline") >= 2
    assert "demo" in text and "armwing" in text


def test_bad_range_spec_is_a_usage_error(capsys):
    with pytest.raises(SystemExit) as err:
        cli.main([
            "sensitivity", "--mech", str(REFERENCE_PATH),
            "--param", "crank_len", "--range", "1.05:0.95:0.01",
        ])
    assert err.value.code == 2
