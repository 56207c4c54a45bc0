"""End-to-end acceptance checks, one test per release criterion.

Each test prints a single PASS/FAIL line with the measured numbers before
asserting, so `pytest tests/test_acceptance.py -v -s` reads as a checklist.
Every check compares the package against an independent route: extended or
arbitrary precision re-evaluation, bisection on the loop residual, a plain
circle intersection, a strain-energy closed form, or byte-level replays.
"""

from __future__ import annotations

import json
import math
import time

import mpmath
import numpy as np

from armwing import (
    FitOptions,
    FourBar,
    PlotSpec,
    Series,
    evaluate_constraints,
    fourbar_spec,
    load_materials,
    mooney_rivlin_stress,
    mooney_rivlin_uniaxial,
    optimize_armwing,
    optimize_stage,
    parse_mechanism_file,
    render_svg,
    report_to_dict,
    sample_targets,
    sensitivity_rank,
    sensitivity_sweep,
    solve_configuration,
    solve_fourbar,
    strain_budget_check,
    sweep_gait,
    sweep_series,
    target_elbow,
    target_shoulder,
    validate_mechanism,
    write_mechanism_file,
    write_report_file,
    write_trajectory_csv,
)
from armwing.fitting import TargetGait
from armwing.gait import phase_grid
from armwing.solver import wrap_pi

from conftest import REFERENCE_PATH
from test_fourbar import random_crank_rocker, rocker_by_bisection


def report_line(number: int, label: str, passed: bool, detail: str) -> None:
    status = "PASS" if passed else "FAIL"
    print(f"criterion {number} ({label}): {status} -- {detail}")


def test_criterion_1_gait_targets_match_extended_precision(reference):
    t0 = time.monotonic()
    rng = np.random.default_rng(20260814)
    phi = rng.uniform(0.0, 2.0 * math.pi, size=10_000)

    ld = np.longdouble
    k = ld(0.5)
    pi_ld = np.arccos(ld(-1.0))
    u = phi.astype(ld) + ld(2.0) * pi_ld / ld(3.0)
    inner = np.arctan(-k * np.sin(u) / (ld(1.0) + k * np.cos(u)))
    elbow_ref = (-k * inner * ld(45.0) + ld(120.0)).astype(float)
    shoulder_ref = (ld(35.0) * np.sin(phi.astype(ld)) - ld(10.0)).astype(float)

    err_s = float(np.max(np.abs(target_shoulder(phi) - shoulder_ref)))
    err_e = float(np.max(np.abs(target_elbow(phi) - elbow_ref)))
    grid = target_shoulder(phase_grid(360))
    lo, hi = float(grid.min()), float(grid.max())
    elapsed = time.monotonic() - t0

    ok = err_s <= 1e-12 and err_e <= 1e-12 and lo == -45.0 and hi == 25.0 \
        and elapsed < 1.0
    report_line(1, "gait target oracle", ok,
                f"shoulder err {err_s:.2e} deg, elbow err {err_e:.2e} deg, "
                f"range [{lo:g}, {hi:g}] deg, {elapsed:.2f} s")
    assert err_s <= 1e-12
    assert err_e <= 1e-12
    assert (lo, hi) == (-45.0, 25.0)
    assert elapsed < 1.0


def test_criterion_2_fourbar_matches_brute_force():
    t0 = time.monotonic()

    # Anchor case by a standalone circle intersection: crank pin B, rocker
    # pivot D, coupler circle about B, rocker circle about D.
    bx, by = 2.0 * math.cos(math.pi / 2.0), 2.0 * math.sin(math.pi / 2.0)
    dx, dy = 5.0, 0.0
    d = math.hypot(dx - bx, dy - by)
    a = (6.0**2 - 4.0**2 + d * d) / (2.0 * d)
    h = math.sqrt(6.0**2 - a * a)
    ux, uy = (dx - bx) / d, (dy - by) / d
    px, py = bx + a * ux, by + a * uy
    rocker_ref = None
    for sgn in (1.0, -1.0):
        cx, cy = px - sgn * h * uy, py + sgn * h * ux
        if (dx - bx) * (cy - by) - (dy - by) * (cx - bx) > 0.0:
            rocker_ref = math.atan2(cy - dy, cx - dx)
    assert rocker_ref is not None
    pose = solve_fourbar(FourBar(5.0, 2.0, 6.0, 4.0), math.pi / 2.0)
    anchor_err = abs(float(wrap_pi(pose.theta_rocker - rocker_ref)))
    anchor_deg = math.degrees(rocker_ref)

    thetas = phase_grid(360)
    rng = np.random.default_rng(42)
    worst = 0.0
    for _ in range(20):
        fb = random_crank_rocker(rng)
        got = solve_fourbar(fb, thetas).theta_rocker
        ref = rocker_by_bisection(fb, thetas)
        worst = max(worst, float(np.max(np.abs(wrap_pi(got - ref)))))
    elapsed = time.monotonic() - t0

    ok = worst <= 1e-9 and anchor_err <= 1e-6 and abs(anchor_deg - 80.26) <= 0.005 \
        and elapsed < 5.0
    report_line(2, "four-bar vs bisection", ok,
                f"worst |err| {worst:.2e} rad over 20x360, "
                f"anchor {anchor_deg:.5f} deg off by {anchor_err:.2e} rad, "
                f"{elapsed:.2f} s")
    assert worst <= 1e-9
    assert anchor_err <= 1e-6
    assert abs(anchor_deg - 80.26) <= 0.005
    assert elapsed < 5.0


def test_criterion_3_general_solver_reduces_to_fourbar(demo_fourbar):
    t0 = time.monotonic()
    fb = FourBar(50.0, 20.0, 60.0, 40.0)
    worst = 0.0
    for phi in phase_grid(360):
        pose = solve_fourbar(fb, float(phi))
        config = solve_configuration(demo_fourbar, float(phi))
        rocker = config.joint_angles["j_root"]
        coupler = config.joint_angles["j_drive"] + config.joint_angles["j_knee"]
        worst = max(worst,
                    abs(float(wrap_pi(rocker - pose.theta_rocker))),
                    abs(float(wrap_pi(coupler - pose.theta_coupler))))
    elapsed = time.monotonic() - t0

    ok = worst <= 1e-9 and elapsed < 5.0
    report_line(3, "general solver reduction", ok,
                f"worst |err| {worst:.2e} rad at 360 samples, {elapsed:.2f} s")
    assert worst <= 1e-9
    assert elapsed < 5.0


def test_criterion_4_synthetic_recovery():
    t0 = time.monotonic()
    truth = validate_mechanism(fourbar_spec(60.0, 15.0, 55.0, 50.0))
    series = sweep_series(truth, 360)
    targets = TargetGait(phi=series["phi"],
                         shoulder_deg=series["theta_s_deg"],
                         elbow_deg=series["theta_e_deg"])

    rng = np.random.default_rng(20260814)
    f = 1.0 + rng.uniform(-0.2, 0.2, size=3)
    start = validate_mechanism(
        fourbar_spec(60.0, 15.0 * f[0], 55.0 * f[1], 50.0 * f[2]))

    options = FitOptions(seed=0, multistarts=10, maxiter=150)
    report = optimize_stage(start, targets, "all", options)
    recovered = sum(1 for s in report.starts if s.feasible and s.cost <= 1e-8)
    elapsed = time.monotonic() - t0

    ok = recovered >= 8 and elapsed < 60.0
    report_line(4, "synthetic recovery", ok,
                f"{recovered}/10 starts at cost <= 1e-8 deg^2, "
                f"best {report.final_cost:.2e} deg^2, {elapsed:.1f} s")
    assert recovered >= 8
    assert elapsed < 60.0


def test_criterion_5_staged_armwing_fit(reference):
    t0 = time.monotonic()
    targets = sample_targets(360)
    options = FitOptions(seed=0, multistarts=4, maxiter=60)
    report = optimize_armwing(reference, targets, options)

    humerus = report.stage_reports["humerus"].design
    final = report.stage_reports["radius"].design
    h_idx = [i for i, s in enumerate(humerus.stages) if s == "humerus"]
    frozen = all(final.values[i] == humerus.values[i] for i in h_idx)

    fitted = report.design.apply(reference)
    f_c = evaluate_constraints(fitted)
    violation = float(np.max(f_c))
    ratio = report.final_cost / report.initial_cost
    elapsed = time.monotonic() - t0

    ok = ratio <= 0.10 and frozen and violation <= 1e-6 and elapsed < 600.0
    report_line(5, "staged armwing fit", ok,
                f"cost {report.initial_cost:.4g} -> {report.final_cost:.4g} "
                f"deg^2 ({100.0 * ratio:.2f}%), humerus frozen {frozen}, "
                f"max f_c {violation:.2e}, {elapsed:.1f} s")
    assert ratio <= 0.10
    assert frozen
    assert violation <= 1e-6
    assert elapsed < 600.0


def test_criterion_6_sensitivity_behavior(reference):
    t0 = time.monotonic()
    family = sensitivity_sweep(reference, "shoulder_x", (0.95, 1.0, 1.05),
                               samples=120)
    nominal_dev = family.deviations[1.0]

    wide = sensitivity_rank(reference, delta=0.025, samples=360)
    narrow = sensitivity_rank(reference, delta=0.01, samples=360)
    top = wide[0][1]
    floor = min(score for _, score in wide if score > 0.0)
    ratio = top / floor
    top3_wide = [name for name, _ in wide[:3]]
    top3_narrow = [name for name, _ in narrow[:3]]
    elapsed = time.monotonic() - t0

    ok = nominal_dev == 0.0 and ratio >= 5.0 and top3_wide == top3_narrow \
        and elapsed < 120.0
    report_line(6, "sensitivity ranking", ok,
                f"scale-1.0 deviation {nominal_dev:g} mm, spread {ratio:.1f}x, "
                f"top-3 {top3_wide} at both deltas, {elapsed:.1f} s")
    assert nominal_dev == 0.0
    assert ratio >= 5.0
    assert top3_wide == top3_narrow
    assert elapsed < 120.0


def test_criterion_7_material_checks():
    t0 = time.monotonic()
    db = load_materials()
    flx = db["FLX9870"]
    b43 = strain_budget_check(43.0, flx)
    b30 = strain_budget_check(30.0, flx)
    b130 = strain_budget_check(130.0, flx)

    zero = mooney_rivlin_uniaxial(1.0, flx)
    got = mooney_rivlin_stress(1.43, 0.3339, -0.000337)
    with mpmath.workdps(50):
        lam = mpmath.mpf("1.43")
        ref = 2 * (lam - lam**-2) * (mpmath.mpf("0.3339")
                                     + mpmath.mpf("-0.000337") / lam)
        stress_err = abs(float(got - ref))
    elapsed = time.monotonic() - t0

    ok = b43.passed and b30.passed and not b130.passed and zero == 0.0 \
        and stress_err <= 1e-3 and flx.min_elongation_break_pct >= 120.0 \
        and elapsed < 1.0
    report_line(7, "material checks", ok,
                f"margins {b43.margin_pct:+g}/{b30.margin_pct:+g}/"
                f"{b130.margin_pct:+g}%, sigma(1) = {zero:g}, "
                f"sigma(1.43) err {stress_err:.2e} MPa, {elapsed:.2f} s")
    assert b43.passed and b30.passed
    assert not b130.passed
    assert zero == 0.0
    assert stress_err <= 1e-3
    assert flx.min_elongation_break_pct >= 120.0
    assert elapsed < 1.0


def test_criterion_8_determinism_and_round_trips(reference, demo_fourbar, tmp_path):
    t0 = time.monotonic()
    targets = sample_targets(90)
    options = FitOptions(seed=11, multistarts=2, maxiter=15)

    reports = []
    for tag in ("a", "b"):
        report = optimize_stage(demo_fourbar, targets, "humerus", options)
        path = tmp_path / f"report_{tag}.json"
        write_report_file(report, path)
        reports.append(path.read_bytes())
    reports_identical = reports[0] == reports[1]
    dicts_identical = (
        json.dumps(report_to_dict(optimize_stage(demo_fourbar, targets,
                                                 "humerus", options)))
        == json.dumps(report_to_dict(optimize_stage(demo_fourbar, targets,
                                                    "humerus", options))))

    csvs = []
    for tag in ("a", "b"):
        traj = sweep_gait(reference, samples=90)
        path = tmp_path / f"traj_{tag}.csv"
        write_trajectory_csv(traj, path)
        csvs.append(path.read_bytes())
    csv_identical = csvs[0] == csvs[1]

    svgs = []
    for tag in ("a", "b"):
        family = sensitivity_sweep(reference, "shoulder_x", (0.95, 1.0, 1.05),
                                   samples=36)
        series = [Series(name=f"x{scale:g}",
                         x=np.degrees(family.trajectories[scale].phi),
                         y=family.trajectories[scale].theta_e_deg,
                         scale=scale)
                  for scale in family.scales]
        svgs.append(render_svg(PlotSpec(title="elbow family",
                                        x_label="phase [deg]",
                                        y_label="theta_e [deg]",
                                        series=series)))
    svg_identical = svgs[0] == svgs[1]

    first_mech = tmp_path / "mech_1.json"
    second_mech = tmp_path / "mech_2.json"
    write_mechanism_file(parse_mechanism_file(REFERENCE_PATH), first_mech)
    write_mechanism_file(parse_mechanism_file(first_mech), second_mech)
    mech_roundtrip = second_mech.read_bytes() == first_mech.read_bytes()

    from armwing import read_trajectory_csv
    from armwing.io import TRAJECTORY_COLUMNS

    reread = read_trajectory_csv(tmp_path / "traj_a.csv")
    rewritten = [",".join(TRAJECTORY_COLUMNS)]
    for k in range(len(reread["phi_deg"])):
        rewritten.append(
            ",".join("%.12g" % reread[c][k] for c in TRAJECTORY_COLUMNS))
    traj_roundtrip = ("\n".join(rewritten) + "\n").encode() == csvs[0]
    elapsed = time.monotonic() - t0

    ok = (reports_identical and dicts_identical and csv_identical
          and svg_identical and mech_roundtrip and traj_roundtrip
          and elapsed < 10.0)
    report_line(8, "determinism and round-trips", ok,
                f"report bytes {reports_identical}, csv bytes {csv_identical}, "
                f"svg bytes {svg_identical}, mechanism round-trip "
                f"{mech_roundtrip}, trajectory round-trip {traj_roundtrip}, "
                f"{elapsed:.1f} s")
    assert reports_identical
    assert dicts_identical
    assert csv_identical
    assert svg_identical
    assert mech_roundtrip
    assert traj_roundtrip
    assert elapsed < 10.0
