"""Mechanism definition types, validation and structural analysis.

A mechanism is a planar linkage chain: rigid links carrying named local
attachment points, ground pivots fixed in the body frame, revolute joints
pairing two attachment points, one driven (crank) joint, and optional gear
couplings that slave one joint angle to another.  ``validate_mechanism``
checks a LinkageSpec and derives the structure the solver needs:

* a deterministic spanning tree of the joint graph rooted at ground (the
  driver joint is pulled into the tree with priority),
* the loop set: every non-tree joint closes exactly one loop,
* a classification of every tree joint angle as driven, gear-slaved or a
  free unknown, with the free-unknown count matching the closure equation
  count (2 per loop),
* an analytic solve plan (a sequence of two-link dyad constructions) when
  the topology supports one, used for closed-form sweeps and for assembly
  margin reporting,
* the design parameter map: named scalars bound to geometry fields.

Angles are radians internally and counterclockwise from the body +x axis;
the JSON document format keeps offsets in degrees (see io.py).  Lengths
are millimetres.
"""

from __future__ import annotations

import copy
import math
from collections import OrderedDict
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DanglingOutput,
    MissingDriver,
    NonPositiveLength,
    OpenChain,
    OverConstrained,
    SchemaError,
    ZeroRatio,
)

__all__ = [
    "Link",
    "GroundPivot",
    "Joint",
    "Driver",
    "GearCoupling",
    "AngleOutput",
    "ParameterBinding",
    "SymmetryConstraint",
    "LinkageSpec",
    "DyadStep",
    "MechanismGraph",
    "validate_mechanism",
    "mirror_mechanism",
    "gear_couple",
    "fourbar_spec",
    "GROUND",
    "STAGES",
]

GROUND = "ground"
STAGES = ("humerus", "radius", "fixed")
BRANCHES = ("open", "crossed")


def gear_couple(theta_in: float, ratio: float, offset: float = 0.0) -> float:
    """Output angle of an ideal gear pair: ratio * theta_in + offset.

    All angles radians.  Negative ratios model external meshes (sense
    reversal); |ratio| < 1 is a reduction.  A zero ratio is rejected.
    """
    if ratio == 0.0:
        raise ZeroRatio("gear ratio must be nonzero")
    return ratio * theta_in + offset


@dataclass
class Link:
    id: str
    points: dict[str, np.ndarray]
    length: float | None = None

    def point(self, name: str) -> np.ndarray:
        return self.points[name]

    def principal_length(self) -> float:
        """Largest pairwise distance between the link's points."""
        names = list(self.points)
        best = 0.0
        for i, a in enumerate(names):
            for b in names[i + 1 :]:
                d = float(np.hypot(*(self.points[a] - self.points[b])))
                best = max(best, d)
        return best


@dataclass
class GroundPivot:
    id: str
    x: float
    y: float

    @property
    def xy(self) -> np.ndarray:
        return np.array([self.x, self.y])


@dataclass
class Joint:
    """Revolute joint pairing attachment ``a`` to attachment ``b``.

    Attachments are (link_id, point_name) with the special link id
    ``ground`` naming a pivot.  The joint angle is the orientation of the
    b-side link minus the a-side link.
    """

    id: str
    a: tuple[str, str]
    b: tuple[str, str]

    def other(self, link_id: str) -> str:
        if self.a[0] == link_id:
            return self.b[0]
        return self.a[0]

    def attachment(self, link_id: str) -> str:
        if self.a[0] == link_id:
            return self.a[1]
        return self.b[1]


@dataclass
class Driver:
    joint: str
    sign: int = 1
    offset_deg: float = 0.0


@dataclass
class GearCoupling:
    id: str
    joint_in: str
    joint_out: str
    ratio: float
    offset_deg: float = 0.0


@dataclass
class AngleOutput:
    """Named angle output: sign * reference_angle + offset, degrees out.

    The reference is either a link orientation (absolute) or a joint angle
    (relative); exactly one of ``link``/``joint`` is set.
    """

    name: str
    link: str | None = None
    joint: str | None = None
    sign: int = 1
    offset_deg: float = 0.0


@dataclass
class ParameterBinding:
    """A named design scalar bound to one geometry field.

    Targets:
      pivot:<id>.<x|y>
      point:<link>.<point>.<x|y>
      driver.offset_deg
      gear:<id>.<ratio|offset_deg>
      output:<name>.offset_deg
    """

    name: str
    target: str
    min: float
    max: float
    stage: str


@dataclass
class SymmetryConstraint:
    """An equality the fitted design must honor: scalar at ``target`` equals
    ``value``.  Uses the same target grammar as ParameterBinding.  The
    fitting module enforces these (as paired inequalities in the public
    constraint vector); the solver itself does not."""

    name: str
    target: str
    value: float


@dataclass
class LinkageSpec:
    """Declarative mechanism description, as held in a mechanism file."""

    name: str = "mechanism"
    links: list[Link] = field(default_factory=list)
    ground_pivots: list[GroundPivot] = field(default_factory=list)
    joints: list[Joint] = field(default_factory=list)
    driver: Driver | None = None
    gear_couplings: list[GearCoupling] = field(default_factory=list)
    angle_outputs: list[AngleOutput] = field(default_factory=list)
    point_outputs: dict[str, tuple[str, str]] = field(default_factory=dict)
    branches: dict[str, str] = field(default_factory=dict)
    home_pose_deg: dict[str, float] = field(default_factory=dict)
    parameters: list[ParameterBinding] = field(default_factory=list)
    symmetry: list[SymmetryConstraint] = field(default_factory=list)
    description: str = ""


@dataclass
class DyadStep:
    """One closed-form construction: two links of unknown orientation
    between two known attachment positions, hinged at a shared joint."""

    closure: str
    link1: str
    link2: str
    hinge: str
    outer1: str  # joint giving the known position on link1's side
    outer2: str  # joint giving the known position on link2's side
    p_ref: tuple[str, str]  # (link, point) whose world position anchors link1
    q_ref: tuple[str, str]  # (link, point) whose world position anchors link2
    a1: str  # link1 local point at outer1
    m1: str  # link1 local point at hinge
    m2: str  # link2 local point at hinge
    b2: str  # link2 local point at outer2


class MechanismGraph:
    """A validated mechanism: spec plus derived solve structure.

    The topology tables are fixed after validation.  The numeric geometry
    (pivot coordinates, link point coordinates, offsets, gear ratios) may
    be changed through the parameter map; use ``copy()`` to obtain an
    independent mechanism before mutating in concurrent or exploratory
    code.  Solves never mutate the graph.
    """

    def __init__(self, spec: LinkageSpec):
        self.spec = spec
        self.links: dict[str, Link] = {}
        self.pivots: dict[str, GroundPivot] = {}
        self.joints: dict[str, Joint] = {}
        self.tree_parent: dict[str, tuple[str, str]] = {}  # link -> (joint, parent)
        self.tree_child: dict[str, str] = {}  # tree joint -> child link
        self.tree_order: list[str] = []  # joint ids, root outward
        self.closures: list[str] = []
        self.loops: dict[str, list[str]] = {}
        self.joint_kind: dict[str, str] = {}  # driver | gear | free | closure
        self.free_joints: list[str] = []
        self.gear_by_out: dict[str, GearCoupling] = {}
        self.gear_by_id: dict[str, GearCoupling] = {}
        self.gear_order: list[str] = []
        self.plan: list[DyadStep] | None = None
        self.branch_of: dict[str, str] = {}
        self.home_pose: dict[str, float] = {}
        self.parameters: "OrderedDict[str, ParameterBinding]" = OrderedDict()
        self._angle_outputs: dict[str, AngleOutput] = {}
        _build(self)

    # -- parameter map ----------------------------------------------------

    def parameter_names(self) -> list[str]:
        return list(self.parameters)

    def parameter_values(self) -> "OrderedDict[str, float]":
        return OrderedDict((n, self.get_parameter(n)) for n in self.parameters)

    def get_parameter(self, name: str) -> float:
        binding = self._binding(name)
        return _target_get(self.spec, binding.target)

    def set_parameter(self, name: str, value: float) -> None:
        binding = self._binding(name)
        _target_set(self.spec, binding.target, float(value))

    def with_parameters(self, values: dict[str, float]) -> "MechanismGraph":
        out = self.copy()
        for name, value in values.items():
            out.set_parameter(name, value)
        return out

    def _binding(self, name: str) -> ParameterBinding:
        try:
            return self.parameters[name]
        except KeyError:
            from .errors import UnknownParameter

            raise UnknownParameter(f"no design parameter named {name!r}") from None

    def copy(self) -> "MechanismGraph":
        return MechanismGraph(copy.deepcopy(self.spec))

    # -- lookups used by the solver ---------------------------------------

    def angle_output(self, name: str) -> AngleOutput:
        return self._angle_outputs[name]

    def attachment_local(self, joint: Joint, link_id: str) -> np.ndarray:
        if link_id == GROUND:
            return self.pivots[joint.attachment(GROUND)].xy
        return self.links[link_id].point(joint.attachment(link_id))

    def summary(self) -> dict:
        """Counts used by the validate CLI and by tests."""
        stages = {"humerus": 0, "radius": 0, "fixed": 0}
        for b in self.parameters.values():
            stages[b.stage] += 1
        return {
            "name": self.spec.name,
            "links": len(self.links),
            "ground_pivots": len(self.pivots),
            "joints": len(self.joints),
            "loops": len(self.closures),
            "free_unknowns": len(self.free_joints),
            "parameters": len(self.parameters),
            "free_parameters": stages["humerus"] + stages["radius"],
            "humerus_parameters": stages["humerus"],
            "radius_parameters": stages["radius"],
            "fixed_parameters": stages["fixed"],
            "analytic_plan": self.plan is not None,
        }


def validate_mechanism(spec: LinkageSpec) -> MechanismGraph:
    """Validate a LinkageSpec and derive its solve structure.

    Raises SchemaError for malformed references, MissingDriver, OpenChain,
    OverConstrained, NonPositiveLength, DanglingOutput or ZeroRatio as the
    corresponding defect is found.  The argument is not retained; the
    returned graph owns a deep copy.
    """
    return MechanismGraph(copy.deepcopy(spec))


# ---------------------------------------------------------------------------
# construction internals


def _build(g: MechanismGraph) -> None:
    spec = g.spec
    for link in spec.links:
        if link.id == GROUND:
            raise SchemaError(f"links[{link.id}]", "link id 'ground' is reserved")
        if link.id in g.links:
            raise SchemaError(f"links[{link.id}]", "duplicate link id")
        link.points = {k: np.asarray(v, dtype=float) for k, v in link.points.items()}
        g.links[link.id] = link
    for pivot in spec.ground_pivots:
        if pivot.id in g.pivots:
            raise SchemaError(f"ground_pivots[{pivot.id}]", "duplicate pivot id")
        g.pivots[pivot.id] = pivot
    for joint in spec.joints:
        if joint.id in g.joints:
            raise SchemaError(f"joints[{joint.id}]", "duplicate joint id")
        for end, ref in (("a", joint.a), ("b", joint.b)):
            link_id, point = ref
            if link_id == GROUND:
                if point not in g.pivots:
                    raise SchemaError(
                        f"joints[{joint.id}].{end}", f"unknown ground pivot {point!r}"
                    )
            elif link_id not in g.links:
                raise SchemaError(
                    f"joints[{joint.id}].{end}", f"unknown link {link_id!r}"
                )
            elif point not in g.links[link_id].points:
                raise SchemaError(
                    f"joints[{joint.id}].{end}",
                    f"link {link_id!r} has no point {point!r}",
                )
        if joint.a[0] == joint.b[0]:
            raise SchemaError(
                f"joints[{joint.id}]", "both attachments on the same link"
            )
        g.joints[joint.id] = joint

    for link in g.links.values():
        if link.length is not None and not link.length > 0.0:
            raise SchemaError(f"links[{link.id}].length", "length must be > 0")
        if not link.principal_length() > 0.0:
            raise NonPositiveLength(
                f"link {link.id!r} has zero extent (all points coincide)"
            )

    if spec.driver is None:
        raise MissingDriver("mechanism declares no driver joint")
    if spec.driver.joint not in g.joints:
        raise SchemaError("driver.joint", f"unknown joint {spec.driver.joint!r}")
    if spec.driver.sign not in (1, -1):
        raise SchemaError("driver.sign", "sign must be +1 or -1")

    seen_gear_ids: set[str] = set()
    for coupling in spec.gear_couplings:
        if coupling.id in seen_gear_ids:
            raise SchemaError(f"gear_couplings[{coupling.id}]", "duplicate id")
        seen_gear_ids.add(coupling.id)
        if coupling.ratio == 0.0:
            raise ZeroRatio(f"gear coupling {coupling.id!r} has zero ratio")
        for fieldname, jid in (
            ("joint_in", coupling.joint_in),
            ("joint_out", coupling.joint_out),
        ):
            if jid not in g.joints:
                raise SchemaError(
                    f"gear_couplings[{coupling.id}].{fieldname}",
                    f"unknown joint {jid!r}",
                )
        if coupling.joint_in == coupling.joint_out:
            raise SchemaError(
                f"gear_couplings[{coupling.id}]", "joint_in equals joint_out"
            )
        if coupling.joint_out == spec.driver.joint:
            raise SchemaError(
                f"gear_couplings[{coupling.id}].joint_out",
                "cannot slave the driver joint",
            )
        if coupling.joint_out in g.gear_by_out:
            raise SchemaError(
                f"gear_couplings[{coupling.id}].joint_out",
                f"joint {coupling.joint_out!r} slaved twice",
            )
        g.gear_by_out[coupling.joint_out] = coupling
        g.gear_by_id[coupling.id] = coupling

    _spanning_tree(g)
    _classify_joints(g)
    _check_balance(g)
    _branches_and_home(g)
    _outputs(g)
    _parameter_map(g)
    g.plan = _derive_plan(g)


def _spanning_tree(g: MechanismGraph) -> None:
    """Prim-style growth from ground, driver joint first, then joint id."""
    adjacency: dict[str, list[str]] = {GROUND: [], **{l: [] for l in g.links}}
    for joint in g.joints.values():
        adjacency[joint.a[0]].append(joint.id)
        adjacency[joint.b[0]].append(joint.id)

    driver_joint = g.spec.driver.joint
    in_tree = {GROUND}
    frontier: set[str] = set(adjacency[GROUND])
    used: set[str] = set()
    while frontier:
        candidates = sorted(
            (jid for jid in frontier),
            key=lambda jid: (jid != driver_joint, jid),
        )
        picked = None
        for jid in candidates:
            joint = g.joints[jid]
            ends = {joint.a[0], joint.b[0]}
            new = ends - in_tree
            if len(new) == 1:
                picked = (jid, new.pop())
                break
            if len(new) == 0:
                # both ends already reached: this joint closes a loop
                frontier.discard(jid)
                used.add(jid)
                g.closures.append(jid)
        if picked is None:
            if not frontier - used:
                break
            continue
        jid, child = picked
        joint = g.joints[jid]
        parent = joint.other(child)
        g.tree_parent[child] = (jid, parent)
        g.tree_child[jid] = child
        g.tree_order.append(jid)
        in_tree.add(child)
        frontier.discard(jid)
        used.add(jid)
        frontier.update(j for j in adjacency[child] if j not in used)

    unreachable = set(g.links) - in_tree
    if unreachable:
        names = ", ".join(sorted(unreachable))
        raise OpenChain(f"links not connected to ground: {names}")
    g.closures.sort()
    for cid in g.closures:
        g.loops[cid] = _loop_cycle(g, cid)


def _loop_cycle(g: MechanismGraph, closure_id: str) -> list[str]:
    """Joint ids around the loop closed by ``closure_id``."""
    joint = g.joints[closure_id]

    def path_to_root(link: str) -> list[str]:
        out = []
        while link != GROUND:
            jid, parent = g.tree_parent[link]
            out.append(jid)
            link = parent
        return out

    pa = path_to_root(joint.a[0])
    pb = path_to_root(joint.b[0])
    shared = set(pa) & set(pb)
    pa = [j for j in pa if j not in shared]
    pb = [j for j in pb if j not in shared]
    return [closure_id] + pa + list(reversed(pb))


def _classify_joints(g: MechanismGraph) -> None:
    driver_joint = g.spec.driver.joint
    if driver_joint in g.closures:
        raise SchemaError(
            "driver.joint", "driver joint closes a loop; drive a tree joint instead"
        )
    tree_set = set(g.tree_order)
    for coupling in g.gear_by_out.values():
        if coupling.joint_out not in tree_set:
            raise SchemaError(
                f"gear_couplings[{coupling.id}].joint_out",
                "slaved joint must be a tree joint (its angle is eliminated)",
            )
    for jid in g.tree_order:
        if jid == driver_joint:
            g.joint_kind[jid] = "driver"
        elif jid in g.gear_by_out:
            g.joint_kind[jid] = "gear"
        else:
            g.joint_kind[jid] = "free"
            g.free_joints.append(jid)
    for jid in g.closures:
        g.joint_kind[jid] = "closure"
    _gear_order(g)


def _gear_order(g: MechanismGraph) -> None:
    """Topological order of couplings so each input angle is resolvable.

    An angle is resolvable once it belongs to the driver, a free joint, an
    earlier-ordered coupling, or a joint whose two link orientations are
    both expressible (every tree joint on their root paths resolved).
    Couplings that cannot be ordered form a dependency cycle.
    """
    pending = {c.id: c for c in g.spec.gear_couplings}
    alpha_known = {
        jid
        for jid in g.tree_order
        if jid == g.spec.driver.joint or jid not in g.gear_by_out
    }

    def theta_known(link: str) -> bool:
        while link != GROUND:
            jid, parent = g.tree_parent[link]
            if jid not in alpha_known:
                return False
            link = parent
        return True

    order: list[str] = []
    while pending:
        progressed = False
        for cid in sorted(pending):
            coupling = pending[cid]
            jin = coupling.joint_in
            joint = g.joints[jin]
            ok = jin in alpha_known or (
                theta_known(joint.a[0]) and theta_known(joint.b[0])
            )
            if ok:
                order.append(cid)
                alpha_known.add(coupling.joint_out)
                del pending[cid]
                progressed = True
        if not progressed:
            names = ", ".join(sorted(pending))
            raise SchemaError(
                "gear_couplings", f"cyclic gear coupling dependency: {names}"
            )
    g.gear_order = order


def _check_balance(g: MechanismGraph) -> None:
    unknowns = len(g.free_joints)
    equations = 2 * len(g.closures)
    if unknowns > equations:
        raise OpenChain(
            f"{unknowns} free joint angles but only {equations} loop equations; "
            "a driven chain is not closed"
        )
    if unknowns < equations:
        raise OverConstrained(
            f"{equations} loop equations but only {unknowns} free joint angles"
        )


def _branches_and_home(g: MechanismGraph) -> None:
    for jid, flag in g.spec.branches.items():
        if jid not in g.joints:
            raise SchemaError(f"branches[{jid}]", "unknown joint")
        if jid not in g.closures:
            raise SchemaError(
                f"branches[{jid}]", "branch flags apply to loop-closing joints only"
            )
        if flag not in BRANCHES:
            raise SchemaError(f"branches[{jid}]", f"branch must be one of {BRANCHES}")
    # Loops without an explicit flag assemble on the open branch.
    g.branch_of = {cid: g.spec.branches.get(cid, "open") for cid in g.closures}
    for jid, angle in g.spec.home_pose_deg.items():
        if jid not in g.joints:
            raise SchemaError(f"home_pose_deg[{jid}]", "unknown joint")
        g.home_pose[jid] = math.radians(float(angle))


def _outputs(g: MechanismGraph) -> None:
    for out in g.spec.angle_outputs:
        if (out.link is None) == (out.joint is None):
            raise SchemaError(
                f"outputs.angles.{out.name}",
                "exactly one of link/joint must be given",
            )
        if out.link is not None and out.link not in g.links:
            raise DanglingOutput(
                f"angle output {out.name!r} references missing link {out.link!r}"
            )
        if out.joint is not None and out.joint not in g.joints:
            raise DanglingOutput(
                f"angle output {out.name!r} references missing joint {out.joint!r}"
            )
        if out.sign not in (1, -1):
            raise SchemaError(f"outputs.angles.{out.name}.sign", "sign must be +1/-1")
        g._angle_outputs[out.name] = out
    for required in ("theta_s", "theta_e"):
        if required not in g._angle_outputs:
            raise SchemaError(f"outputs.angles.{required}", "angle output missing")
    for name, (link_id, point) in g.spec.point_outputs.items():
        if link_id == GROUND:
            if point not in g.pivots:
                raise DanglingOutput(
                    f"point output {name!r} references missing pivot {point!r}"
                )
        elif link_id not in g.links or point not in g.links[link_id].points:
            raise DanglingOutput(
                f"point output {name!r} references missing point "
                f"{link_id}:{point}"
            )
    for required in ("elbow", "wingtip"):
        if required not in g.spec.point_outputs:
            raise SchemaError(f"outputs.points.{required}", "point output missing")


def _parameter_map(g: MechanismGraph) -> None:
    for binding in g.spec.parameters:
        if binding.name in g.parameters:
            raise SchemaError(f"parameters[{binding.name}]", "duplicate name")
        if binding.stage not in STAGES:
            raise SchemaError(
                f"parameters[{binding.name}].stage", f"stage must be one of {STAGES}"
            )
        try:
            value = _target_get(g.spec, binding.target)
        except KeyError as exc:
            raise SchemaError(
                f"parameters[{binding.name}].target", f"unresolvable: {exc}"
            ) from None
        if not binding.min <= value <= binding.max:
            raise SchemaError(
                f"parameters[{binding.name}]",
                f"value {value!r} outside bounds [{binding.min}, {binding.max}]",
            )
        g.parameters[binding.name] = binding
    seen_sym: set[str] = set()
    for sym in g.spec.symmetry:
        if sym.name in seen_sym:
            raise SchemaError(f"symmetry[{sym.name}]", "duplicate name")
        seen_sym.add(sym.name)
        try:
            _target_get(g.spec, sym.target)
        except KeyError as exc:
            raise SchemaError(
                f"symmetry[{sym.name}].target", f"unresolvable: {exc}"
            ) from None


def _target_parts(target: str):
    head, _, rest = target.partition(":")
    if head == "driver.offset_deg" and not rest:
        return ("driver",)
    if head == "pivot":
        ref, _, axis = rest.rpartition(".")
        if axis not in ("x", "y") or not ref:
            raise KeyError(f"bad pivot target {target!r}")
        return ("pivot", ref, axis)
    if head == "point":
        ref, _, axis = rest.rpartition(".")
        link, _, point = ref.partition(".")
        if axis not in ("x", "y") or not link or not point:
            raise KeyError(f"bad point target {target!r}")
        return ("point", link, point, axis)
    if head == "gear":
        ref, _, fieldname = rest.rpartition(".")
        if fieldname == "offset_deg":
            ref2, fieldname = ref, "offset_deg"
        elif rest.endswith(".ratio"):
            ref2, fieldname = rest[: -len(".ratio")], "ratio"
        else:
            raise KeyError(f"bad gear target {target!r}")
        if not ref2:
            raise KeyError(f"bad gear target {target!r}")
        return ("gear", ref2, fieldname)
    if head == "output":
        ref, _, fieldname = rest.rpartition(".")
        if fieldname != "offset_deg" or not ref:
            raise KeyError(f"bad output target {target!r}")
        return ("output", ref, "offset_deg")
    raise KeyError(f"unknown target {target!r}")


def _find(seq, key, what):
    for item in seq:
        if getattr(item, "id", getattr(item, "name", None)) == key:
            return item
    raise KeyError(f"unknown {what} {key!r}")


def _target_get(spec: LinkageSpec, target: str) -> float:
    parts = _target_parts(target)
    if parts[0] == "driver":
        if spec.driver is None:
            raise KeyError("no driver")
        return float(spec.driver.offset_deg)
    if parts[0] == "pivot":
        pivot = _find(spec.ground_pivots, parts[1], "pivot")
        return float(getattr(pivot, parts[2]))
    if parts[0] == "point":
        link = _find(spec.links, parts[1], "link")
        if parts[2] not in link.points:
            raise KeyError(f"unknown point {parts[1]}.{parts[2]}")
        return float(link.points[parts[2]][0 if parts[3] == "x" else 1])
    if parts[0] == "gear":
        coupling = _find(spec.gear_couplings, parts[1], "gear coupling")
        return float(getattr(coupling, parts[2]))
    out = _find(spec.angle_outputs, parts[1], "angle output")
    return float(out.offset_deg)


def _target_set(spec: LinkageSpec, target: str, value: float) -> None:
    parts = _target_parts(target)
    if parts[0] == "driver":
        spec.driver.offset_deg = value
    elif parts[0] == "pivot":
        pivot = _find(spec.ground_pivots, parts[1], "pivot")
        setattr(pivot, parts[2], value)
    elif parts[0] == "point":
        link = _find(spec.links, parts[1], "link")
        link.points[parts[2]][0 if parts[3] == "x" else 1] = value
    elif parts[0] == "gear":
        coupling = _find(spec.gear_couplings, parts[1], "gear coupling")
        setattr(coupling, parts[2], value)
    else:
        out = _find(spec.angle_outputs, parts[1], "angle output")
        out.offset_deg = value


# ---------------------------------------------------------------------------
# analytic plan derivation


def _derive_plan(g: MechanismGraph) -> list[DyadStep] | None:
    """Find a dyad order solving every loop in closed form, if one exists."""
    resolved = _initially_resolved(g)
    plan: list[DyadStep] = []
    remaining = list(g.closures)
    while remaining:
        progressed = False
        for cid in list(remaining):
            step = _plan_dyad(g, cid, resolved)
            if step is not None:
                plan.append(step)
                resolved.update((step.link1, step.link2))
                remaining.remove(cid)
                progressed = True
        if not progressed:
            return None
    return plan


def _initially_resolved(g: MechanismGraph) -> set[str]:
    """Links whose orientation is fixed by phase alone (no free unknowns).

    Walks the tree outward: a link is phase-resolved when its parent is
    and its parent joint is the driver or a gear coupling whose input is
    itself phase-resolved (input joint driver/gear on the resolved set).
    """
    resolved = {GROUND}
    resolved_angles = {g.spec.driver.joint}
    changed = True
    while changed:
        changed = False
        for jid in g.tree_order:
            joint = g.joints[jid]
            child = None
            for link_id in (joint.a[0], joint.b[0]):
                if link_id != GROUND and g.tree_parent.get(link_id, (None,))[0] == jid:
                    child = link_id
            if child is None or child in resolved:
                continue
            parent = g.tree_parent[child][1]
            if parent not in resolved:
                continue
            if jid in resolved_angles:
                resolved.add(child)
                changed = True
            elif g.joint_kind[jid] == "gear":
                coupling = g.gear_by_out[jid]
                if coupling.joint_in in resolved_angles:
                    resolved_angles.add(jid)
                    resolved.add(child)
                    changed = True
    return resolved


def _plan_dyad(g: MechanismGraph, cid: str, resolved: set[str]) -> DyadStep | None:
    cycle = g.loops[cid]
    links_in_cycle: list[str] = []
    for jid in cycle:
        joint = g.joints[jid]
        for link_id in (joint.a[0], joint.b[0]):
            if link_id not in links_in_cycle:
                links_in_cycle.append(link_id)
    unresolved = [l for l in links_in_cycle if l not in resolved]
    if len(unresolved) != 2:
        return None
    l1, l2 = unresolved
    hinge = None
    for jid in cycle:
        joint = g.joints[jid]
        if {joint.a[0], joint.b[0]} == {l1, l2}:
            hinge = jid
            break
    if hinge is None:
        return None

    def outer_joint(link_id: str) -> tuple[str, str, str] | None:
        for jid in cycle:
            if jid == hinge:
                continue
            joint = g.joints[jid]
            if link_id in (joint.a[0], joint.b[0]):
                other = joint.other(link_id)
                if other in resolved:
                    return jid, other, joint.attachment(other)
        return None

    o1 = outer_joint(l1)
    o2 = outer_joint(l2)
    if o1 is None or o2 is None:
        return None
    hinge_joint = g.joints[hinge]
    return DyadStep(
        closure=cid,
        link1=l1,
        link2=l2,
        hinge=hinge,
        outer1=o1[0],
        outer2=o2[0],
        p_ref=(o1[1], o1[2]),
        q_ref=(o2[1], o2[2]),
        a1=g.joints[o1[0]].attachment(l1),
        m1=hinge_joint.attachment(l1),
        m2=hinge_joint.attachment(l2),
        b2=g.joints[o2[0]].attachment(l2),
    )


# ---------------------------------------------------------------------------
# mirroring


def mirror_mechanism(mech: MechanismGraph) -> MechanismGraph:
    """Reflect a mechanism across the body y axis.

    Ground pivots and link-local geometry negate their x coordinates, the
    driver and gear phase offsets negate (the crank spins the other way),
    angle output signs negate so reported angles keep their meaning, and
    every loop's assembly branch flips handedness.  Applying the operation
    twice restores the original mechanism exactly: all transforms are
    sign flips.  Parameter bounds on negated fields swap and negate so the
    bound semantics survive the reflection.
    """
    spec = copy.deepcopy(mech.spec)
    marker = " (mirrored)"
    if spec.name.endswith(marker):
        spec.name = spec.name[: -len(marker)]
    else:
        spec.name = spec.name + marker
    for pivot in spec.ground_pivots:
        pivot.x = -pivot.x
    for link in spec.links:
        for point in link.points.values():
            point[0] = -point[0]
    spec.driver.sign = -spec.driver.sign
    spec.driver.offset_deg = -spec.driver.offset_deg
    for coupling in spec.gear_couplings:
        coupling.offset_deg = -coupling.offset_deg
    for out in spec.angle_outputs:
        out.sign = -out.sign
    spec.branches = {
        jid: ("crossed" if flag == "open" else "open")
        for jid, flag in spec.branches.items()
    }
    spec.home_pose_deg = {jid: -a for jid, a in spec.home_pose_deg.items()}
    for binding in spec.parameters:
        if _target_negates_under_mirror(binding.target):
            binding.min, binding.max = -binding.max, -binding.min
    for sym in spec.symmetry:
        if _target_negates_under_mirror(sym.target):
            sym.value = -sym.value
    return MechanismGraph(spec)


def _target_negates_under_mirror(target: str) -> bool:
    parts = _target_parts(target)
    return (
        parts[0] == "driver"
        or (parts[0] == "pivot" and parts[2] == "x")
        or (parts[0] == "point" and parts[3] == "x")
        or (parts[0] == "gear" and parts[2] == "offset_deg")
    )


# ---------------------------------------------------------------------------
# programmatic four-bar construction


def fourbar_spec(
    ground: float,
    crank: float,
    coupler: float,
    rocker: float,
    branch: str = "open",
    name: str = "fourbar",
) -> LinkageSpec:
    """Build a plain four-bar LinkageSpec in canonical placement.

    Crank pivot A at the origin, rocker pivot D at (ground, 0); the rocker
    orientation is exposed as theta_s and the coupler orientation as
    theta_e.  The four design parameters are the ground span and the three
    moving link lengths.
    """
    def within(value):
        return max(0.05 * value, value - 0.5 * abs(value)), value + 0.5 * abs(value)

    spec = LinkageSpec(
        name=name,
        links=[
            Link("crank", {"root": np.array([0.0, 0.0]), "tip": np.array([crank, 0.0])}),
            Link(
                "coupler",
                {"near": np.array([0.0, 0.0]), "far": np.array([coupler, 0.0])},
            ),
            Link(
                "rocker", {"root": np.array([0.0, 0.0]), "pin": np.array([rocker, 0.0])}
            ),
        ],
        ground_pivots=[GroundPivot("A", 0.0, 0.0), GroundPivot("D", ground, 0.0)],
        joints=[
            Joint("j_drive", ("ground", "A"), ("crank", "root")),
            Joint("j_knee", ("crank", "tip"), ("coupler", "near")),
            Joint("j_root", ("ground", "D"), ("rocker", "root")),
            Joint("j_wrist", ("coupler", "far"), ("rocker", "pin")),
        ],
        driver=Driver(joint="j_drive", sign=1, offset_deg=0.0),
        angle_outputs=[
            AngleOutput("theta_s", link="rocker", sign=1, offset_deg=0.0),
            AngleOutput("theta_e", link="coupler", sign=1, offset_deg=0.0),
        ],
        point_outputs={"elbow": ("crank", "tip"), "wingtip": ("rocker", "pin")},
        branches={"j_wrist": branch},
        parameters=[
            ParameterBinding("ground_span", "pivot:D.x", *within(ground), "fixed"),
            ParameterBinding("crank_len", "point:crank.tip.x", *within(crank), "humerus"),
            ParameterBinding(
                "coupler_len", "point:coupler.far.x", *within(coupler), "humerus"
            ),
            ParameterBinding(
                "rocker_len", "point:rocker.pin.x", *within(rocker), "humerus"
            ),
        ],
        description="canonical four-bar: crank pivot at origin, rocker pivot on +x",
    )
    return spec
