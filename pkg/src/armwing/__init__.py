"""armwing: planar linkage kinematics and design fitting for flapping wings.

The package models crank and gear driven four-bar chains of the kind used
in bat-scale ornithopter arm wings, solves their kinematics over a wingbeat,
fits design parameters to target shoulder and elbow trajectories, and
screens designs for parameter sensitivity and hinge material strain.
"""

from .errors import (
    AnalysisError,
    ArmwingError,
    BudgetExhausted,
    DanglingOutput,
    EmptyResidual,
    FittingError,
    GridMismatch,
    MechanismError,
    MechanismSyntaxError,
    MissingDriver,
    MissingMaterialModel,
    NoConvergence,
    NoFeasibleStart,
    NonPositiveLength,
    NonPositiveStretch,
    NotAssemblable,
    OpenChain,
    OverConstrained,
    SchemaError,
    SingularConfiguration,
    SingularJacobian,
    SolveError,
    UnknownMaterial,
    UnknownParameter,
    VersionError,
    ZeroRatio,
)
from .fourbar import (
    FourBar,
    FourBarPose,
    circle_circle,
    grashof_classify,
    solve_fourbar,
)
from .gait import (
    DOWNSTROKE_END,
    DOWNSTROKE_START,
    GaitShape,
    TargetGait,
    phase_grid,
    sample_targets,
    target_elbow,
    target_shoulder,
    wrap_phase,
)
from .linkage import (
    GROUND,
    AngleOutput,
    Driver,
    GearCoupling,
    GroundPivot,
    Joint,
    Link,
    LinkageSpec,
    MechanismGraph,
    ParameterBinding,
    SymmetryConstraint,
    fourbar_spec,
    gear_couple,
    mirror_mechanism,
    validate_mechanism,
)
from .fitting import (
    DesignVector,
    FitOptions,
    FitReport,
    StartRecord,
    constraint_names,
    cost,
    evaluate_constraints,
    optimize_armwing,
    optimize_stage,
    residuals,
)
from .io import (
    mechanism_to_dict,
    parse_mechanism_file,
    parse_mechanism_text,
    read_trajectory_csv,
    report_to_dict,
    targets_from_trajectory,
    trajectory_csv_text,
    write_mechanism_file,
    write_report_file,
    write_trajectory_csv,
)
from .materials import (
    MaterialSpec,
    MooneyRivlin,
    StrainBudget,
    default_materials_path,
    get_material,
    load_materials,
    mooney_rivlin_stress,
    mooney_rivlin_uniaxial,
    strain_budget_check,
)
from .sensitivity import SensitivityResult, sensitivity_rank, sensitivity_sweep
from .solver import (
    Configuration,
    GaitTrajectory,
    assembly_report,
    solve_configuration,
    sweep_gait,
    sweep_series,
)
from .svgplot import PlotSpec, Series, render_svg, write_svg

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # errors
    "ArmwingError",
    "MechanismError",
    "SchemaError",
    "MechanismSyntaxError",
    "VersionError",
    "MissingDriver",
    "OpenChain",
    "OverConstrained",
    "NonPositiveLength",
    "DanglingOutput",
    "ZeroRatio",
    "SolveError",
    "NotAssemblable",
    "SingularConfiguration",
    "NoConvergence",
    "SingularJacobian",
    "FittingError",
    "EmptyResidual",
    "GridMismatch",
    "NoFeasibleStart",
    "BudgetExhausted",
    "AnalysisError",
    "UnknownParameter",
    "NonPositiveStretch",
    "UnknownMaterial",
    "MissingMaterialModel",
    # four-bar
    "FourBar",
    "FourBarPose",
    "circle_circle",
    "grashof_classify",
    "solve_fourbar",
    # gait targets
    "DOWNSTROKE_START",
    "DOWNSTROKE_END",
    "GaitShape",
    "TargetGait",
    "phase_grid",
    "wrap_phase",
    "target_shoulder",
    "target_elbow",
    "sample_targets",
    # mechanism model
    "GROUND",
    "Link",
    "GroundPivot",
    "Joint",
    "Driver",
    "GearCoupling",
    "AngleOutput",
    "ParameterBinding",
    "SymmetryConstraint",
    "LinkageSpec",
    "MechanismGraph",
    "validate_mechanism",
    "mirror_mechanism",
    "gear_couple",
    "fourbar_spec",
    # solving
    "Configuration",
    "GaitTrajectory",
    "solve_configuration",
    "sweep_gait",
    "sweep_series",
    "assembly_report",
    # fitting
    "DesignVector",
    "FitOptions",
    "FitReport",
    "StartRecord",
    "cost",
    "residuals",
    "constraint_names",
    "evaluate_constraints",
    "optimize_stage",
    "optimize_armwing",
    # sensitivity
    "SensitivityResult",
    "sensitivity_sweep",
    "sensitivity_rank",
    # materials
    "MooneyRivlin",
    "MaterialSpec",
    "StrainBudget",
    "mooney_rivlin_stress",
    "mooney_rivlin_uniaxial",
    "strain_budget_check",
    "default_materials_path",
    "load_materials",
    "get_material",
    # files
    "parse_mechanism_file",
    "parse_mechanism_text",
    "mechanism_to_dict",
    "write_mechanism_file",
    "read_trajectory_csv",
    "trajectory_csv_text",
    "write_trajectory_csv",
    "targets_from_trajectory",
    "report_to_dict",
    "write_report_file",
    # plots
    "Series",
    "PlotSpec",
    "render_svg",
    "write_svg",
]
