"""Design fitting: staged constrained least squares over mechanism geometry.

The fit minimizes the mean squared angle tracking error (degrees squared)
between a swept mechanism and a target gait, subject to bounds and a
constraint vector f_c (feasible iff every entry is <= 0):

* per-loop assemblability margin over the whole phase grid,
* a Grashof full-rotation margin for each loop driven by a fully
  rotating input (the crank must be able to complete its turn),
* a minimum transmission angle floor (default 10 degrees),
* the mechanism's declared symmetry equalities, published as paired
  inequalities (h <= 0 and -h <= 0).

Optimization runs a bounded, inequality-constrained local descent
(scipy's trust-constr) with 3-point finite-difference gradients at
relative step 1e-6 from several starting points: the nominal design plus
seeded uniform draws inside the box.  Starts are independent, each on a
private mechanism copy, and merge deterministically by (cost, index).
Failed solves during the search contribute a fixed penalty per sample
instead of aborting, so the search can skirt the assemblability boundary
while the margin entries push it back.

Stages: 'humerus' fits the shoulder-drive parameters against the shoulder
target, 'radius' fits the elbow-drive parameters against the elbow target,
'all' fits both parameter groups against both angle series at once.  The
staged driver optimize_armwing runs humerus then radius; stage-1 values
are excluded from the stage-2 design vector, so they stay bit-identical.
"""

from __future__ import annotations

import math
import warnings
from collections import OrderedDict
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import Bounds, NonlinearConstraint, least_squares, minimize

from .errors import EmptyResidual, GridMismatch, NoFeasibleStart
from .fourbar import FourBar
from .gait import TargetGait, phase_grid
from .linkage import GROUND, MechanismGraph, _target_get
from .solver import sweep_series

__all__ = [
    "DesignVector",
    "FitOptions",
    "StartRecord",
    "FitReport",
    "cost",
    "residuals",
    "evaluate_constraints",
    "constraint_names",
    "optimize_stage",
    "optimize_armwing",
]

STAGE_CHOICES = ("humerus", "radius", "all")
PENALTY_DEG = 1e3
CONSTRAINT_PENALTY = 1e6
FEASIBILITY_TOL = 1e-6


# ---------------------------------------------------------------------------
# design vector


@dataclass(frozen=True)
class DesignVector:
    """Ordered named design scalars with bounds and per-entry stage tags.

    Entries tagged 'fixed' are carried for bookkeeping but are never moved
    by the optimizer; staged fits move only the entries whose tag matches
    the running stage.
    """

    names: tuple[str, ...]
    values: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    stages: tuple[str, ...]

    def __post_init__(self):
        n = len(self.names)
        for arr_name in ("values", "lower", "upper"):
            arr = np.asarray(getattr(self, arr_name), dtype=float)
            if arr.shape != (n,):
                raise ValueError(f"{arr_name} must have shape ({n},)")
            object.__setattr__(self, arr_name, arr)
        if len(self.stages) != n:
            raise ValueError("stages length mismatch")
        if np.any(self.values < self.lower) or np.any(self.values > self.upper):
            bad = [
                self.names[i]
                for i in range(n)
                if not self.lower[i] <= self.values[i] <= self.upper[i]
            ]
            raise ValueError(f"values outside bounds: {', '.join(bad)}")

    @classmethod
    def from_mechanism(cls, mech: MechanismGraph) -> "DesignVector":
        bindings = list(mech.parameters.values())
        return cls(
            names=tuple(b.name for b in bindings),
            values=np.array([mech.get_parameter(b.name) for b in bindings]),
            lower=np.array([b.min for b in bindings]),
            upper=np.array([b.max for b in bindings]),
            stages=tuple(b.stage for b in bindings),
        )

    def as_dict(self) -> "OrderedDict[str, float]":
        return OrderedDict(zip(self.names, (float(v) for v in self.values)))

    def apply(self, mech: MechanismGraph) -> MechanismGraph:
        return mech.with_parameters(self.as_dict())

    def with_values(self, values) -> "DesignVector":
        return replace(self, values=np.asarray(values, dtype=float))

    def indices_for_stage(self, stage: str) -> list[int]:
        if stage == "all":
            wanted = ("humerus", "radius")
        else:
            wanted = (stage,)
        return [i for i, s in enumerate(self.stages) if s in wanted]


@dataclass(frozen=True)
class FitOptions:
    """Knobs for the staged optimizer; defaults match the shipped fits."""

    seed: int = 0
    multistarts: int = 10
    maxiter: int = 150
    fd_rel_step: float = 1e-6
    min_transmission_deg: float = 10.0
    polish: bool = True
    feasibility_tol: float = FEASIBILITY_TOL


@dataclass(frozen=True)
class StartRecord:
    """One multistart outcome (costs are true, unpenalized where finite)."""

    index: int
    cost: float
    feasible: bool
    iterations: int
    polished: bool
    message: str


@dataclass(frozen=True)
class FitReport:
    """Outcome of one stage fit, or of the staged pipeline (nested)."""

    stage: str
    initial_cost: float
    final_cost: float
    iterations: int
    winner_start: int
    constraint_violation_max: float
    design: DesignVector
    starts: tuple[StartRecord, ...] = ()
    incumbent_history: tuple[tuple[int, float], ...] = ()
    stage_reports: "OrderedDict[str, FitReport]" = field(default_factory=OrderedDict)
    flags: tuple[str, ...] = ()
    seed: int = 0
    multistarts: int = 1
    samples: int = 0


# ---------------------------------------------------------------------------
# residuals and cost


def cost(y) -> float:
    """Mean squared residual, degrees squared: (y^T y) / N."""
    y = np.asarray(y, dtype=float)
    if y.size == 0:
        raise EmptyResidual("cannot take the mean square of an empty residual")
    return float(y @ y / y.size)


def _check_grid(targets: TargetGait, samples: int | None) -> int:
    n = len(targets.phi)
    if samples is not None and samples != n:
        raise GridMismatch(
            f"sweep grid has {samples} samples but targets have {n}"
        )
    if not np.array_equal(targets.phi, phase_grid(n)):
        raise GridMismatch(
            "targets must lie on the uniform phase grid 2*pi*k/N used by sweeps"
        )
    return n


def residuals(
    mech: MechanismGraph,
    targets: TargetGait,
    stage: str = "all",
    samples: int | None = None,
    flagged: bool = False,
) -> np.ndarray:
    """Angle tracking errors (degrees) on the targets' phase grid.

    stage 'humerus' compares the shoulder series only, 'radius' the elbow
    series only, 'all' stacks shoulder then elbow.  In flagged mode a
    sample whose solve fails contributes a fixed PENALTY_DEG entry instead
    of raising, which keeps optimization alive near the assemblability
    boundary; in strict mode solver errors propagate.
    """
    if stage not in STAGE_CHOICES:
        raise ValueError(f"stage must be one of {STAGE_CHOICES}, got {stage!r}")
    n = _check_grid(targets, samples)
    series = sweep_series(mech, n, strict=not flagged)
    parts = []
    ok = series["ok"]
    if stage in ("humerus", "all"):
        parts.append(_masked(series["theta_s_deg"] - targets.shoulder_deg, ok))
    if stage in ("radius", "all"):
        parts.append(_masked(series["theta_e_deg"] - targets.elbow_deg, ok))
    return np.concatenate(parts)


def _masked(diff: np.ndarray, ok: np.ndarray) -> np.ndarray:
    bad = ~ok | ~np.isfinite(diff)
    if np.any(bad):
        diff = np.where(bad, PENALTY_DEG, diff)
    return diff


# ---------------------------------------------------------------------------
# constraint vector


def _loop_fourbar(mech: MechanismGraph, closure_id: str) -> FourBar | None:
    """Equivalent four-bar lengths of one loop, when it is a plain four-bar.

    A qualifying loop has four joints, exactly two of them on ground, and
    three moving links each spanning two of the loop's joints.  The crank
    is the ground-adjacent link on the loop's input side.  Returns None
    when the pattern does not match (no Grashof statement is made then).
    """
    cycle = mech.loops[closure_id]
    if len(cycle) != 4:
        return None
    joints = [mech.joints[j] for j in cycle]
    ground_joints = [j for j in joints if GROUND in (j.a[0], j.b[0])]
    if len(ground_joints) != 2:
        return None
    moving = []
    for j in joints:
        for link_id in (j.a[0], j.b[0]):
            if link_id != GROUND and link_id not in moving:
                moving.append(link_id)
    if len(moving) != 3:
        return None

    def link_joints(link_id):
        return [j for j in joints if link_id in (j.a[0], j.b[0])]

    ground_xy = [mech.pivots[j.attachment(GROUND)].xy for j in ground_joints]
    ground_len = float(np.hypot(*(ground_xy[0] - ground_xy[1])))

    side = {}  # link -> length, for ground-adjacent links
    middle = None
    lengths = {}
    for link_id in moving:
        lj = link_joints(link_id)
        if len(lj) != 2:
            return None
        p0 = mech.links[link_id].point(lj[0].attachment(link_id))
        p1 = mech.links[link_id].point(lj[1].attachment(link_id))
        lengths[link_id] = float(np.hypot(*(p0 - p1)))
        if any(j in ground_joints for j in lj):
            side[link_id] = lengths[link_id]
        else:
            middle = link_id
    if middle is None or len(side) != 2:
        return None

    # The crank side is the one whose ground joint angle is imposed by the
    # drive train (driver or gear-slaved); the other side link rocks.
    crank = None
    for link_id in side:
        for j in link_joints(link_id):
            if j in ground_joints and mech.joint_kind.get(j.id) in ("driver", "gear"):
                crank = link_id
    if crank is None:
        return None
    rocker = next(l for l in side if l != crank)
    try:
        return FourBar(
            ground=ground_len,
            crank=lengths[crank],
            coupler=lengths[middle],
            rocker=lengths[rocker],
        )
    except Exception:
        return None


def _driven_loops(mech: MechanismGraph) -> list[str]:
    """Closures whose loop contains a fully rotating input joint."""
    out = []
    for cid in mech.closures:
        kinds = {mech.joint_kind.get(j) for j in mech.loops[cid]}
        if "driver" in kinds or "gear" in kinds:
            out.append(cid)
    return out


def constraint_names(mech: MechanismGraph, samples: int = 360) -> list[str]:
    """Entry names matching evaluate_constraints, in order."""
    names = [f"assembly_margin[{cid}]" for cid in mech.closures]
    for cid in _driven_loops(mech):
        if _loop_fourbar(mech, cid) is not None:
            names.append(f"grashof_margin[{cid}]")
            names.append(f"crank_shortest[{cid}]")
    names.extend(f"transmission_floor[{cid}]" for cid in mech.closures)
    for sym in mech.spec.symmetry:
        names.append(f"symmetry[{sym.name}]+")
        names.append(f"symmetry[{sym.name}]-")
    return names


def _constraint_core(
    mech: MechanismGraph,
    samples: int,
    min_transmission_deg: float,
    series: dict | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """(inequality entries, symmetry equality values h).

    Inequality entries are feasible at <= 0; equalities are feasible at
    h = 0.  All entries are finite: quantities undefined because a loop
    never assembled are replaced by CONSTRAINT_PENALTY.
    """
    if series is None:
        series = sweep_series(mech, samples, strict=False)
    margin = series["margin"]
    transmission = series["transmission"]
    ineq = []
    for cid in mech.closures:
        m = margin.get(cid)
        if m is None:
            # No analytic margin (Newton-only topology): binary form.
            ineq.append(-1.0 if bool(np.all(series["ok"])) else CONSTRAINT_PENALTY)
        else:
            m = np.asarray(m, dtype=float)
            m = np.where(np.isfinite(m), m, CONSTRAINT_PENALTY)
            ineq.append(float(np.max(m)))
    for cid in _driven_loops(mech):
        fb = _loop_fourbar(mech, cid)
        if fb is None:
            continue
        lengths = sorted(fb.lengths())
        s, l = lengths[0], lengths[-1]
        p, q = lengths[1], lengths[2]
        ineq.append(s + l - (p + q))
        ineq.append(fb.crank - min(fb.ground, fb.coupler, fb.rocker))
    floor = math.radians(min_transmission_deg)
    for cid in mech.closures:
        t = transmission.get(cid)
        if t is None:
            ineq.append(-1.0 if bool(np.all(series["ok"])) else CONSTRAINT_PENALTY)
            continue
        t = np.asarray(t, dtype=float)
        if np.all(np.isfinite(t)):
            ineq.append(floor - float(np.min(t)))
        else:
            ineq.append(CONSTRAINT_PENALTY)
    eq = [
        float(_target_get(mech.spec, sym.target)) - sym.value
        for sym in mech.spec.symmetry
    ]
    return np.asarray(ineq, dtype=float), np.asarray(eq, dtype=float)


def evaluate_constraints(
    mech: MechanismGraph,
    q: DesignVector | None = None,
    samples: int = 360,
    min_transmission_deg: float = 10.0,
) -> np.ndarray:
    """The constraint vector f_c; the design is feasible iff all <= 0.

    Symmetry equalities h = 0 appear as consecutive pairs (h, -h).  Pass
    ``q`` to evaluate a candidate design without mutating ``mech``.
    Entries are always finite; see constraint_names for labels.
    """
    if q is not None:
        mech = q.apply(mech)
    ineq, eq = _constraint_core(mech, samples, min_transmission_deg)
    paired = np.empty(2 * len(eq))
    paired[0::2] = eq
    paired[1::2] = -eq
    return np.concatenate([ineq, paired])


# ---------------------------------------------------------------------------
# the stage optimizer


class _StageProblem:
    """Objective/constraint adapters over the movable subvector, cached.

    One sweep per evaluated point powers both the residual cost and the
    constraint entries; a small LRU keyed by the point's bytes keeps the
    finite-difference stencil warm without unbounded growth.
    """

    def __init__(self, mech, targets, stage, options: FitOptions):
        self.base = DesignVector.from_mechanism(mech)
        self.move = self.base.indices_for_stage(stage)
        if not self.move:
            raise ValueError(f"no parameters tagged for stage {stage!r}")
        self.mech = mech
        self.targets = targets
        self.stage = stage
        self.options = options
        self.samples = len(targets.phi)
        self.lower = self.base.lower[self.move]
        self.upper = self.base.upper[self.move]
        self.x0 = self.base.values[self.move]
        self._cache: OrderedDict[bytes, tuple[float, np.ndarray, np.ndarray]] = (
            OrderedDict()
        )
        self._cache_cap = 16 * len(self.move) + 64
        ineq0, eq0 = _constraint_core(mech, self.samples, options.min_transmission_deg)
        self.con_lb = np.concatenate(
            [np.full(ineq0.shape, -np.inf), np.zeros(eq0.shape)]
        )
        self.con_ub = np.zeros(ineq0.size + eq0.size)

    def mech_at(self, x: np.ndarray) -> MechanismGraph:
        values = self.base.values.copy()
        values[self.move] = x
        return self.base.with_values(values).apply(self.mech)

    def _evaluate(self, x: np.ndarray):
        key = np.asarray(x, dtype=float).tobytes()
        hit = self._cache.get(key)
        if hit is not None:
            self._cache.move_to_end(key)
            return hit
        m = self.mech_at(x)
        series = sweep_series(m, self.samples, strict=False)
        parts = []
        ok = series["ok"]
        if self.stage in ("humerus", "all"):
            parts.append(_masked(series["theta_s_deg"] - self.targets.shoulder_deg, ok))
        if self.stage in ("radius", "all"):
            parts.append(_masked(series["theta_e_deg"] - self.targets.elbow_deg, ok))
        resid = np.concatenate(parts)
        ineq, eq = _constraint_core(
            m, self.samples, self.options.min_transmission_deg, series=series
        )
        out = (cost(resid), resid, np.concatenate([ineq, eq]))
        self._cache[key] = out
        if len(self._cache) > self._cache_cap:
            self._cache.popitem(last=False)
        return out

    def objective(self, x) -> float:
        return self._evaluate(x)[0]

    def residual_vector(self, x) -> np.ndarray:
        return self._evaluate(x)[1]

    def constraint_vector(self, x) -> np.ndarray:
        return self._evaluate(x)[2]

    def violation(self, x) -> float:
        ineq_eq = self._evaluate(x)[2]
        over = np.maximum(ineq_eq - self.con_ub, 0.0)
        under = np.maximum(self.con_lb - ineq_eq, 0.0)
        return float(np.max(np.concatenate([over, under]), initial=0.0))

    def feasible(self, x) -> bool:
        return self.violation(x) <= self.options.feasibility_tol


def _run_start(problem: _StageProblem, x0: np.ndarray):
    """One local descent; returns (x, true cost, iterations, status msg)."""
    opts = problem.options
    nlc = NonlinearConstraint(
        problem.constraint_vector,
        problem.con_lb,
        problem.con_ub,
        jac="3-point",
        finite_diff_rel_step=opts.fd_rel_step,
    )
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # scipy chatters near bound-active points
        result = minimize(
            problem.objective,
            np.clip(x0, problem.lower, problem.upper),
            method="trust-constr",
            jac="3-point",
            bounds=Bounds(problem.lower, problem.upper, keep_feasible=True),
            constraints=[nlc],
            options={
                "maxiter": opts.maxiter,
                "gtol": 1e-10,
                "xtol": 1e-12,
                "finite_diff_rel_step": opts.fd_rel_step,
            },
        )
    x = np.clip(result.x, problem.lower, problem.upper)
    iterations = int(result.niter)
    message = str(result.message)
    budget = int(result.status) == 0  # trust-constr: 0 means maxiter reached
    polished = False
    if opts.polish:
        x_new = _polish(problem, x)
        if x_new is not None:
            x, polished = x_new, True
    return x, problem.objective(x), iterations, message, budget, polished


def _polish(problem: _StageProblem, x: np.ndarray) -> np.ndarray | None:
    """Bound-constrained least-squares refinement, accepted only when it
    strictly improves the cost and keeps the constraint vector feasible."""
    before = problem.objective(x)
    if before == 0.0:
        return None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        try:
            result = least_squares(
                problem.residual_vector,
                x,
                jac="3-point",
                bounds=(problem.lower, problem.upper),
                method="trf",
                diff_step=problem.options.fd_rel_step,
                xtol=1e-15,
                ftol=1e-15,
                gtol=1e-15,
                max_nfev=200 * (len(x) + 1),
            )
        except Exception:
            return None
    x_new = np.clip(result.x, problem.lower, problem.upper)
    if problem.objective(x_new) < before and problem.feasible(x_new):
        return x_new
    return None


def optimize_stage(
    mech: MechanismGraph,
    targets: TargetGait,
    stage: str,
    options: FitOptions | None = None,
) -> FitReport:
    """Fit one stage's parameters to the targets with multistart descent.

    Runs options.multistarts independent local solves (the nominal design
    first, then seeded uniform draws in the bound box), keeps the feasible
    result of least cost (ties broken by start index), and reports every
    start.  Raises NoFeasibleStart when no start ends feasible; a winner
    that stopped on the iteration budget is flagged 'budget_exhausted',
    not raised.
    """
    if options is None:
        options = FitOptions()
    if stage not in STAGE_CHOICES:
        raise ValueError(f"stage must be one of {STAGE_CHOICES}, got {stage!r}")
    _check_grid(targets, None)
    problem = _StageProblem(mech, targets, stage, options)
    initial_cost = problem.objective(problem.x0)

    if initial_cost <= 1e-12 and problem.feasible(problem.x0):
        # Already tracking the target; nothing to descend.
        return FitReport(
            stage=stage,
            initial_cost=initial_cost,
            final_cost=initial_cost,
            iterations=0,
            winner_start=0,
            constraint_violation_max=problem.violation(problem.x0),
            design=problem.base,
            starts=(
                StartRecord(
                    index=0,
                    cost=initial_cost,
                    feasible=True,
                    iterations=0,
                    polished=False,
                    message="initial design already optimal",
                ),
            ),
            incumbent_history=((0, initial_cost),),
            seed=options.seed,
            multistarts=1,
            samples=problem.samples,
        )

    rng = np.random.default_rng(options.seed)
    k = max(1, int(options.multistarts))
    starts = [problem.x0]
    if k > 1:
        u = rng.uniform(size=(k - 1, len(problem.move)))
        starts.extend(problem.lower + u * (problem.upper - problem.lower))

    records: list[StartRecord] = []
    incumbent: tuple[float, int] | None = None
    incumbent_x = None
    history: list[tuple[int, float]] = []
    budget_flags: set[int] = set()
    for index, x0 in enumerate(starts):
        x, final, iterations, message, budget, polished = _run_start(problem, x0)
        feasible = problem.feasible(x)
        records.append(
            StartRecord(
                index=index,
                cost=final,
                feasible=feasible,
                iterations=iterations,
                polished=polished,
                message=message,
            )
        )
        if budget:
            budget_flags.add(index)
        if feasible and (incumbent is None or (final, index) < incumbent):
            incumbent = (final, index)
            incumbent_x = x
        if incumbent is not None:
            history.append((index, incumbent[0]))

    if incumbent is None:
        raise NoFeasibleStart(
            f"none of {k} starts produced a feasible {stage} design"
        )
    final_cost, winner = incumbent
    flags = []
    if winner in budget_flags:
        flags.append("budget_exhausted")

    values = problem.base.values.copy()
    values[problem.move] = incumbent_x
    design = problem.base.with_values(values)
    violation = problem.violation(incumbent_x)
    return FitReport(
        stage=stage,
        initial_cost=initial_cost,
        final_cost=final_cost,
        iterations=records[winner].iterations,
        winner_start=winner,
        constraint_violation_max=violation,
        design=design,
        starts=tuple(records),
        incumbent_history=tuple(history),
        flags=tuple(flags),
        seed=options.seed,
        multistarts=k,
        samples=problem.samples,
    )


def optimize_armwing(
    mech: MechanismGraph,
    targets: TargetGait,
    options: FitOptions | None = None,
    order: tuple[str, str] = ("humerus", "radius"),
) -> FitReport:
    """Staged fit: shoulder-drive parameters first, then elbow-drive.

    Stage 1 fits humerus-tagged parameters against the shoulder target;
    stage 2 starts from that result with the humerus entries excluded from
    its design vector (frozen bit-exactly) and fits radius-tagged
    parameters against the elbow target.  Forcing the reverse order is
    supported for comparison but warns: the elbow chain rides on the
    shoulder chain, so fitting it first optimizes against geometry the
    humerus stage will then move underneath it.
    """
    if options is None:
        options = FitOptions()
    if sorted(order) != ["humerus", "radius"]:
        raise ValueError(f"order must permute ('humerus', 'radius'), got {order!r}")
    flags: list[str] = []
    if order != ("humerus", "radius"):
        warnings.warn(
            "fitting the radius stage before the humerus stage optimizes the "
            "elbow against geometry the humerus fit will then change; expect "
            "a worse combined result",
            stacklevel=2,
        )
        flags.append("stage_order_warning")

    initial_cost = cost(residuals(mech, targets, "all", flagged=True))
    current = mech
    stage_reports: "OrderedDict[str, FitReport]" = OrderedDict()
    for stage in order:
        report = optimize_stage(current, targets, stage, options)
        stage_reports[stage] = report
        current = report.design.apply(mech)
    final_design = stage_reports[order[-1]].design
    final_cost = cost(residuals(current, targets, "all", flagged=True))
    violation = float(
        np.max(evaluate_constraints(current, samples=len(targets.phi)))
    )
    for stage in order:
        if "budget_exhausted" in stage_reports[stage].flags:
            flags.append(f"budget_exhausted:{stage}")
    return FitReport(
        stage="staged",
        initial_cost=initial_cost,
        final_cost=final_cost,
        iterations=sum(r.iterations for r in stage_reports.values()),
        winner_start=-1,
        constraint_violation_max=violation,
        design=final_design,
        stage_reports=stage_reports,
        flags=tuple(flags),
        seed=options.seed,
        multistarts=options.multistarts,
        samples=len(targets.phi),
    )
