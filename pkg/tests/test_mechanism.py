from __future__ import annotations

import copy
import math

import numpy as np
import pytest

from armwing import (
    AngleOutput,
    DanglingOutput,
    GearCoupling,
    GroundPivot,
    Joint,
    Link,
    MissingDriver,
    NonPositiveLength,
    OpenChain,
    OverConstrained,
    ParameterBinding,
    SchemaError,
    SymmetryConstraint,
    UnknownParameter,
    ZeroRatio,
    fourbar_spec,
    gear_couple,
    mirror_mechanism,
    solve_configuration,
    validate_mechanism,
)


def plain_spec():
    return fourbar_spec(50.0, 20.0, 60.0, 40.0)


def test_fourbar_spec_validates_and_counts():
    mech = validate_mechanism(plain_spec())
    summary = mech.summary()
    assert summary["links"] == 3
    assert summary["joints"] == 4
    assert summary["loops"] == 1
    assert summary["free_unknowns"] == 2
    assert summary["parameters"] == 4
    assert summary["free_parameters"] == 3
    assert summary["analytic_plan"] is True
    assert mech.closures == ["j_wrist"]


def test_validate_leaves_the_input_spec_alone():
    spec = plain_spec()
    mech = validate_mechanism(spec)
    mech.set_parameter("crank_len", 25.0)
    assert float(spec.links[0].points["tip"][0]) == 20.0


def test_missing_driver():
    spec = plain_spec()
    spec.driver = None
    with pytest.raises(MissingDriver):
        validate_mechanism(spec)


def test_open_chain_when_a_loop_joint_is_removed():
    spec = plain_spec()
    spec.joints = [j for j in spec.joints if j.id != "j_wrist"]
    spec.branches = {}
    with pytest.raises(OpenChain):
        validate_mechanism(spec)


def test_disconnected_link_is_an_open_chain():
    spec = plain_spec()
    spec.links.append(Link("orphan", {"a": np.zeros(2), "b": np.array([1.0, 0.0])}))
    with pytest.raises(OpenChain):
        validate_mechanism(spec)


def test_over_constrained_when_a_loop_is_doubled():
    spec = plain_spec()
    spec.joints.append(Joint("j_pin2", ("ground", "D"), ("coupler", "far")))
    with pytest.raises(OverConstrained):
        validate_mechanism(spec)


def test_zero_extent_link_rejected():
    spec = plain_spec()
    spec.links[0].points["tip"][:] = 0.0
    with pytest.raises(NonPositiveLength):
        validate_mechanism(spec)


def test_gear_zero_ratio_rejected():
    assert gear_couple(0.5, 2.0, 0.25) == pytest.approx(1.25, abs=1e-15)
    assert gear_couple(0.5, -1.0) == -0.5
    with pytest.raises(ZeroRatio):
        gear_couple(0.5, 0.0)


def test_unknown_joint_reference_is_a_schema_error():
    spec = plain_spec()
    spec.joints[1] = Joint("j_knee", ("crank", "tip"), ("misspelt", "near"))
    with pytest.raises(SchemaError) as err:
        validate_mechanism(spec)
    assert "j_knee" in str(err.value)


def test_duplicate_ids_are_schema_errors():
    spec = plain_spec()
    spec.links.append(copy.deepcopy(spec.links[0]))
    with pytest.raises(SchemaError):
        validate_mechanism(spec)
    spec = plain_spec()
    spec.ground_pivots.append(GroundPivot("A", 1.0, 1.0))
    with pytest.raises(SchemaError):
        validate_mechanism(spec)


def test_dangling_angle_output():
    spec = plain_spec()
    spec.angle_outputs.append(AngleOutput("theta_x", link="phantom"))
    with pytest.raises(DanglingOutput):
        validate_mechanism(spec)


def test_dangling_point_output():
    spec = plain_spec()
    spec.point_outputs["extra"] = ("rocker", "no_such_point")
    with pytest.raises(DanglingOutput):
        validate_mechanism(spec)


def test_required_outputs_must_exist():
    spec = plain_spec()
    spec.angle_outputs = [a for a in spec.angle_outputs if a.name != "theta_e"]
    with pytest.raises(SchemaError) as err:
        validate_mechanism(spec)
    assert "theta_e" in str(err.value)
    spec = plain_spec()
    del spec.point_outputs["wingtip"]
    with pytest.raises(SchemaError):
        validate_mechanism(spec)


def test_parameter_bindings_checked_against_bounds():
    spec = plain_spec()
    spec.parameters[1] = ParameterBinding(
        "crank_len", "point:crank.tip.x", 30.0, 40.0, "humerus"
    )
    with pytest.raises(SchemaError) as err:
        validate_mechanism(spec)
    assert "outside bounds" in str(err.value)


def test_duplicate_parameter_names_rejected():
    spec = plain_spec()
    spec.parameters.append(spec.parameters[1])
    with pytest.raises(SchemaError):
        validate_mechanism(spec)


def test_unresolvable_parameter_target_rejected():
    spec = plain_spec()
    spec.parameters[1] = ParameterBinding(
        "crank_len", "point:crank.nub.x", 10.0, 30.0, "humerus"
    )
    with pytest.raises(SchemaError):
        validate_mechanism(spec)


def test_bad_stage_rejected():
    spec = plain_spec()
    spec.parameters[1] = ParameterBinding(
        "crank_len", "point:crank.tip.x", 10.0, 30.0, "forearm"
    )
    with pytest.raises(SchemaError):
        validate_mechanism(spec)


def test_symmetry_constraints_validated():
    spec = plain_spec()
    spec.symmetry = [
        SymmetryConstraint("pin_a", "pivot:A.x", 0.0),
        SymmetryConstraint("pin_a", "pivot:A.y", 0.0),
    ]
    with pytest.raises(SchemaError):
        validate_mechanism(spec)
    spec = plain_spec()
    spec.symmetry = [SymmetryConstraint("pin_a", "pivot:Z.x", 0.0)]
    with pytest.raises(SchemaError):
        validate_mechanism(spec)


def test_branch_keys_validated():
    spec = plain_spec()
    spec.branches = {"j_wrist": "sideways"}
    with pytest.raises(SchemaError):
        validate_mechanism(spec)
    spec = plain_spec()
    spec.branches = {"j_made_up": "open"}
    with pytest.raises(SchemaError):
        validate_mechanism(spec)


def test_home_pose_keys_validated():
    spec = plain_spec()
    spec.home_pose_deg = {"j_made_up": 10.0}
    with pytest.raises(SchemaError):
        validate_mechanism(spec)


def test_parameter_roundtrip_and_unknown_name():
    mech = validate_mechanism(plain_spec())
    assert mech.get_parameter("crank_len") == 20.0
    moved = mech.with_parameters({"crank_len": 22.0})
    assert moved.get_parameter("crank_len") == 22.0
    assert mech.get_parameter("crank_len") == 20.0
    values = mech.parameter_values()
    assert list(values) == ["ground_span", "crank_len", "coupler_len", "rocker_len"]
    with pytest.raises(UnknownParameter):
        mech.get_parameter("wing_area")


def test_reference_armwing_structure(reference):
    summary = reference.summary()
    assert summary["links"] == 7
    assert summary["joints"] == 9
    assert summary["ground_pivots"] == 3
    assert summary["loops"] == 2
    assert summary["free_unknowns"] == 4
    assert summary["humerus_parameters"] == 14
    assert summary["radius_parameters"] == 18
    assert summary["fixed_parameters"] == 1
    assert summary["analytic_plan"] is True
    assert reference.closures == ["j4_wrist", "j7_ctrl"]
    assert reference.free_joints == [
        "j2_shoulder",
        "j3_crankpin",
        "j5_elbow",
        "j6_rcrankpin",
    ]
    assert len(reference.spec.symmetry) == 2


def test_reference_gear_couplings_are_exact(reference):
    rng = np.random.default_rng(4)
    for phi in rng.uniform(0.0, 2.0 * math.pi, size=12):
        config = solve_configuration(reference, float(phi))
        for gear in reference.spec.gear_couplings:
            theta_in = config.joint_angles[gear.joint_in]
            theta_out = config.joint_angles[gear.joint_out]
            assert theta_out == pytest.approx(
                gear_couple(theta_in, gear.ratio, math.radians(gear.offset_deg)),
                abs=1e-12,
            )


def test_mirror_negates_x_geometry(reference):
    mirrored = mirror_mechanism(reference)
    for pivot in reference.spec.ground_pivots:
        twin = next(p for p in mirrored.spec.ground_pivots if p.id == pivot.id)
        assert twin.x == -pivot.x
        assert twin.y == pivot.y
    assert mirrored.spec.driver.sign == -reference.spec.driver.sign


def test_mirror_is_an_involution(reference):
    twice = mirror_mechanism(mirror_mechanism(reference))
    assert twice.parameter_values() == reference.parameter_values()
    for pivot, twin in zip(reference.spec.ground_pivots, twice.spec.ground_pivots):
        assert pivot.x == twin.x and pivot.y == twin.y
    for link, twin in zip(reference.spec.links, twice.spec.links):
        for name in link.points:
            assert np.array_equal(link.points[name], twin.points[name])


def test_mirror_preserves_parameter_names(reference):
    mirrored = mirror_mechanism(reference)
    assert mirrored.parameter_names() == reference.parameter_names()
    # x-coordinate bindings negate (their bounds swap along); y coordinates
    # and gear ratios carry over unchanged.
    assert mirrored.get_parameter("shoulder_x") == -reference.get_parameter(
        "shoulder_x"
    )
    assert mirrored.get_parameter("h_coupler_len") == -reference.get_parameter(
        "h_coupler_len"
    )
    assert mirrored.get_parameter("shoulder_y") == reference.get_parameter(
        "shoulder_y"
    )
    assert mirrored.get_parameter("mirror_ratio") == reference.get_parameter(
        "mirror_ratio"
    )
    before = reference.parameters["h_coupler_len"]
    after = mirrored.parameters["h_coupler_len"]
    assert (after.min, after.max) == (-before.max, -before.min)


def test_gear_ratio_zero_via_spec(reference):
    spec = copy.deepcopy(reference.spec)
    spec.gear_couplings[0].ratio = 0.0
    with pytest.raises(ZeroRatio):
        validate_mechanism(spec)
