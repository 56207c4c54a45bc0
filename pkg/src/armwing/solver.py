"""Kinematic solving: single configurations, sweeps, assembly margins.

Two solve routes share the same mechanism graph:

* an analytic route that executes the validated dyad plan with the
  circle-intersection construction, vectorized over a whole phase grid
  (exact to machine precision, branch chosen by the per-loop flags), and
* a Newton route iterating the stacked loop-closure residuals with an
  analytic Jacobian, used when no plan exists, when a caller forces it,
  or to polish a guess.

Every returned Configuration carries a residual certificate re-evaluated
from the closure equations; a configuration is only reported as solved
when that norm is at or below NEWTON_TOL_MM.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    NoConvergence,
    NonPositiveLength,
    NotAssemblable,
    SingularConfiguration,
    SingularJacobian,
)
from .fourbar import COLLINEAR_TOL_RAD, circle_circle
from .gait import phase_grid
from .linkage import GROUND, MechanismGraph

__all__ = [
    "Configuration",
    "GaitTrajectory",
    "solve_configuration",
    "sweep_gait",
    "sweep_series",
    "assembly_report",
    "NEWTON_TOL_MM",
    "NEWTON_MAX_ITER",
]

NEWTON_TOL_MM = 1e-9
NEWTON_MAX_ITER = 50
TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Configuration:
    """One solved mechanism pose.

    ``joint_angles`` maps every joint id to its angle (b-side link
    orientation minus a-side, radians); gear-slaved entries satisfy their
    coupling equation exactly.  ``points`` maps 'link:point' and
    'ground:pivot' keys, plus the named point outputs, to world (x, y) in
    millimetres.  ``residual_norm`` is the loop-closure certificate, mm.
    """

    phase: float
    joint_angles: dict[str, float]
    points: dict[str, tuple[float, float]]
    residual_norm: float


@dataclass(frozen=True)
class GaitTrajectory:
    """A swept wingbeat on a uniform phase grid.

    Angle series are degrees and unwrapped (continuous across the sweep);
    paths are world millimetres with shape (N, 2).  ``wrap_deviation_rad``
    is the largest joint-angle discontinuity, modulo one turn, between the
    continuation past the last sample and the first sample.
    """

    phi: np.ndarray
    theta_s_deg: np.ndarray
    theta_e_deg: np.ndarray
    elbow_path: np.ndarray
    tip_path: np.ndarray
    configurations: list[Configuration] = field(repr=False)
    wrap_deviation_rad: float
    max_step_rad: float
    residual_max: float

    def __len__(self) -> int:
        return len(self.phi)


def wrap_pi(angle):
    """Wrap to (-pi, pi]."""
    a = np.fmod(np.pi - np.asarray(angle, dtype=float), TWO_PI)
    a = np.where(a < 0.0, a + TWO_PI, a)
    return np.pi - a


def _rotate(theta, v):
    c = np.cos(theta)
    s = np.sin(theta)
    return np.stack([c * v[0] - s * v[1], s * v[0] + c * v[1]], axis=-1)


def _perp(w):
    return np.stack([-w[..., 1], w[..., 0]], axis=-1)


class _Solution:
    """Dense solved state over a scalar phase or a phase grid."""

    def __init__(self, graph: MechanismGraph, phi):
        self.graph = graph
        self.phi = np.asarray(phi, dtype=float)
        shape = self.phi.shape
        self.theta = {GROUND: np.zeros(shape)}
        self.origin = {GROUND: np.zeros(shape + (2,))}
        self.alpha: dict[str, np.ndarray] = {}
        self.ok = np.ones(shape, dtype=bool)
        self.margin: dict[str, np.ndarray] = {}
        self.transmission: dict[str, np.ndarray] = {}
        self.residual: np.ndarray | None = None

    def point_world(self, link_id: str, point: str) -> np.ndarray:
        if link_id == GROUND:
            return self.origin[GROUND] + self.graph.pivots[point].xy
        return self.origin[link_id] + _rotate(
            self.theta[link_id], self.graph.links[link_id].point(point)
        )

    def finish(self):
        """Fill closure angles and the loop-closure residual certificate."""
        g = self.graph
        for cid in g.closures:
            joint = g.joints[cid]
            if cid not in self.alpha:
                self.alpha[cid] = self.theta[joint.b[0]] - self.theta[joint.a[0]]
        gaps = []
        for cid in g.closures:
            joint = g.joints[cid]
            delta = self.point_world(*joint.a) - self.point_world(*joint.b)
            gaps.append(delta)
        if gaps:
            stacked = np.concatenate(gaps, axis=-1)
            self.residual = np.sqrt(np.sum(stacked * stacked, axis=-1))
        else:
            self.residual = np.zeros(self.phi.shape)
        return self


def _first_bad_phi(phi, mask) -> float:
    return float(np.atleast_1d(phi)[np.atleast_1d(mask)][0])


def _solve_analytic(graph: MechanismGraph, phi, strict: bool = True) -> _Solution:
    """Execute the dyad plan; vectorized over ``phi``.

    With ``strict`` the first non-assemblable or branch-ambiguous sample
    raises, annotated with its phase.  Otherwise failed samples are masked
    in ``sol.ok`` and NaNs propagate through dependent quantities, while
    per-loop assembly margins stay finite wherever computable.
    """
    g = graph
    sol = _Solution(g, phi)
    drv = g.spec.driver
    sol.alpha[drv.joint] = drv.sign * sol.phi + math.radians(drv.offset_deg)

    pending_tree = list(g.tree_order)
    pending_gears = list(g.gear_order)
    pending_dyads = list(g.plan or ())

    while pending_tree or pending_gears or pending_dyads:
        moved = False

        for jid in list(pending_tree):
            child = g.tree_child[jid]
            parent = g.tree_parent[child][1]
            joint = g.joints[jid]
            if child in sol.theta:
                if parent in sol.theta:
                    sol.alpha.setdefault(
                        jid, sol.theta[joint.b[0]] - sol.theta[joint.a[0]]
                    )
                    pending_tree.remove(jid)
                    moved = True
                continue
            if jid in sol.alpha and parent in sol.theta:
                # The joint angle convention is b minus a; flip when the
                # tree child happens to sit on the a side.
                sign = 1.0 if joint.b[0] == child else -1.0
                theta_child = sol.theta[parent] + sign * sol.alpha[jid]
                anchor = sol.point_world(parent, joint.attachment(parent))
                local = g.links[child].point(joint.attachment(child))
                sol.theta[child] = theta_child
                sol.origin[child] = anchor - _rotate(theta_child, local)
                pending_tree.remove(jid)
                moved = True

        for cid in list(pending_gears):
            coupling = g.gear_by_id[cid]
            jin = coupling.joint_in
            value = None
            if jin in sol.alpha:
                value = sol.alpha[jin]
            else:
                joint = g.joints[jin]
                if joint.a[0] in sol.theta and joint.b[0] in sol.theta:
                    value = sol.theta[joint.b[0]] - sol.theta[joint.a[0]]
            if value is not None:
                sol.alpha[coupling.joint_out] = coupling.ratio * value + math.radians(
                    coupling.offset_deg
                )
                pending_gears.remove(cid)
                moved = True

        for step in list(pending_dyads):
            if step.p_ref[0] not in sol.theta or step.q_ref[0] not in sol.theta:
                continue
            link1 = g.links[step.link1]
            link2 = g.links[step.link2]
            v1 = link1.point(step.m1) - link1.point(step.a1)
            v2 = link2.point(step.m2) - link2.point(step.b2)
            r1 = float(np.hypot(*v1))
            r2 = float(np.hypot(*v2))
            if r1 <= 0.0 or r2 <= 0.0:
                raise NonPositiveLength(
                    f"dyad leg through joint {step.hinge!r} has zero length"
                )
            p = sol.point_world(*step.p_ref)
            q = sol.point_world(*step.q_ref)
            sign = 1.0 if g.branch_of[step.closure] == "open" else -1.0
            with np.errstate(invalid="ignore"):
                hinge, _h, d = circle_circle(p, r1, q, r2, sign)
                sol.margin[step.closure] = np.maximum(d - (r1 + r2), np.abs(r1 - r2) - d)
                bad = ~np.isfinite(hinge[..., 0])
                cos_mu = (r1 * r1 + r2 * r2 - d * d) / (2.0 * r1 * r2)
                mu = np.arccos(np.clip(cos_mu, -1.0, 1.0))
                trans = np.minimum(mu, np.pi - mu)
            sol.transmission[step.closure] = np.where(bad, np.nan, trans)
            if strict and np.any(bad):
                raise NotAssemblable(
                    f"loop {step.closure!r} cannot close "
                    f"(gap {float(np.nanmax(np.where(bad, sol.margin[step.closure], -np.inf))):.6g} mm)",
                    phi=_first_bad_phi(sol.phi, bad),
                )
            singular = ~bad & (trans < COLLINEAR_TOL_RAD)
            if strict and np.any(singular):
                raise SingularConfiguration(
                    f"loop {step.closure!r} at a branch-ambiguous (collinear) pose",
                    phi=_first_bad_phi(sol.phi, singular),
                )
            sol.ok &= ~bad
            theta1 = np.arctan2(hinge[..., 1] - p[..., 1], hinge[..., 0] - p[..., 0])
            theta1 = theta1 - math.atan2(v1[1], v1[0])
            theta2 = np.arctan2(hinge[..., 1] - q[..., 1], hinge[..., 0] - q[..., 0])
            theta2 = theta2 - math.atan2(v2[1], v2[0])
            sol.theta[step.link1] = theta1
            sol.theta[step.link2] = theta2
            sol.origin[step.link1] = p - _rotate(theta1, link1.point(step.a1))
            sol.origin[step.link2] = q - _rotate(theta2, link2.point(step.b2))
            pending_dyads.remove(step)
            moved = True

        if not moved:
            raise RuntimeError("analytic solve plan stalled; graph inconsistent")

    return sol.finish()


# ---------------------------------------------------------------------------
# Newton route


def _affine_tables(graph: MechanismGraph):
    """Joint angles and link orientations as affine forms c + p*phi + w.q.

    Driven and gear-slaved angles enter through their current numeric
    offsets and ratios, so the tables must be rebuilt after any parameter
    change; they are cheap.
    """
    g = graph
    nq = len(g.free_joints)
    zeros = np.zeros(nq)
    alpha: dict[str, tuple[float, float, np.ndarray]] = {}
    drv = g.spec.driver
    alpha[drv.joint] = (math.radians(drv.offset_deg), float(drv.sign), zeros)
    for k, jid in enumerate(g.free_joints):
        w = np.zeros(nq)
        w[k] = 1.0
        alpha[jid] = (0.0, 0.0, w)

    theta_cache: dict[str, tuple[float, float, np.ndarray]] = {
        GROUND: (0.0, 0.0, zeros)
    }

    def theta(link: str):
        if link in theta_cache:
            return theta_cache[link]
        jid, parent = g.tree_parent[link]
        pc, pp, pw = theta(parent)
        joint = g.joints[jid]
        sign = 1.0 if joint.b[0] == link else -1.0
        ac, ap, aw = alpha[jid]
        out = (pc + sign * ac, pp + sign * ap, pw + sign * aw)
        theta_cache[link] = out
        return out

    pending = list(g.gear_order)
    while pending:
        moved = False
        for cid in list(pending):
            coupling = g.gear_by_id[cid]
            jin = coupling.joint_in
            if jin in alpha:
                ac, ap, aw = alpha[jin]
            else:
                joint = g.joints[jin]
                ready = True
                for end in (joint.a[0], joint.b[0]):
                    link = end
                    while link != GROUND:
                        tj, parent = g.tree_parent[link]
                        if tj not in alpha:
                            ready = False
                            break
                        link = parent
                    if not ready:
                        break
                if not ready:
                    continue
                bc, bp, bw = theta(joint.b[0])
                acc, acp, acw = theta(joint.a[0])
                ac, ap, aw = bc - acc, bp - acp, bw - acw
            alpha[coupling.joint_out] = (
                coupling.ratio * ac + math.radians(coupling.offset_deg),
                coupling.ratio * ap,
                coupling.ratio * aw,
            )
            pending.remove(cid)
            moved = True
        if not moved:
            raise RuntimeError("gear coupling resolution stalled")

    for link in g.links:
        theta(link)
    return alpha, theta_cache


def _newton_eval(graph, theta_aff, phi: float, q: np.ndarray, with_jac: bool):
    """Residual (and Jacobian) of the stacked loop equations at (phi, q)."""
    g = graph
    nq = len(q)
    theta = {}
    for link, (c, p, w) in theta_aff.items():
        theta[link] = c + p * phi + float(w @ q)
    origin = {GROUND: np.zeros(2)}
    dorigin = {GROUND: np.zeros((nq, 2))} if with_jac else None

    def point_world(link, point):
        if link == GROUND:
            return g.pivots[point].xy.astype(float)
        return origin[link] + _rotate(theta[link], g.links[link].point(point))

    def dpoint(link, point):
        if link == GROUND:
            return np.zeros((nq, 2))
        w = theta_aff[link][2]
        arm = _rotate(theta[link], g.links[link].point(point))
        return dorigin[link] + np.outer(w, _perp(arm))

    for jid in g.tree_order:
        child = g.tree_child[jid]
        joint = g.joints[jid]
        parent = g.tree_parent[child][1]
        attach_p = joint.attachment(parent)
        attach_c = joint.attachment(child)
        anchor = point_world(parent, attach_p)
        arm_c = _rotate(theta[child], g.links[child].point(attach_c))
        origin[child] = anchor - arm_c
        if with_jac:
            danchor = dpoint(parent, attach_p)
            w_c = theta_aff[child][2]
            dorigin[child] = danchor - np.outer(w_c, _perp(arm_c))

    residual = np.empty(2 * len(g.closures))
    jac = np.empty((2 * len(g.closures), nq)) if with_jac else None
    for i, cid in enumerate(g.closures):
        joint = g.joints[cid]
        residual[2 * i : 2 * i + 2] = point_world(*joint.a) - point_world(*joint.b)
        if with_jac:
            jac[2 * i : 2 * i + 2, :] = (dpoint(*joint.a) - dpoint(*joint.b)).T
    return residual, jac, theta


def _solve_newton(graph: MechanismGraph, phi: float, q0: np.ndarray):
    """Damped Newton on the loop equations from guess ``q0``."""
    alpha_aff, theta_aff = _affine_tables(graph)
    q = np.asarray(q0, dtype=float).copy()
    residual, _, _ = _newton_eval(graph, theta_aff, phi, q, with_jac=False)
    norm = float(np.linalg.norm(residual))
    for _ in range(NEWTON_MAX_ITER):
        if norm <= NEWTON_TOL_MM:
            break
        _, jac, _ = _newton_eval(graph, theta_aff, phi, q, with_jac=True)
        try:
            step = np.linalg.solve(jac, -residual)
        except np.linalg.LinAlgError:
            raise SingularJacobian(
                "loop-closure Jacobian is singular", phi=float(phi)
            ) from None
        scale = 1.0
        for _halving in range(30):
            q_try = q + scale * step
            res_try, _, _ = _newton_eval(graph, theta_aff, phi, q_try, with_jac=False)
            norm_try = float(np.linalg.norm(res_try))
            if norm_try < norm:
                q, residual, norm = q_try, res_try, norm_try
                break
            scale *= 0.5
        else:
            raise NoConvergence(
                f"Newton stalled at residual {norm:.3e} mm", phi=float(phi)
            )
    if norm > NEWTON_TOL_MM:
        raise NoConvergence(
            f"residual {norm:.3e} mm after {NEWTON_MAX_ITER} iterations",
            phi=float(phi),
        )

    sol = _Solution(graph, float(phi))
    for link, (c, p, w) in theta_aff.items():
        sol.theta[link] = np.asarray(c + p * phi + float(w @ q))
    for jid, (c, p, w) in alpha_aff.items():
        sol.alpha[jid] = np.asarray(c + p * phi + float(w @ q))
    g = graph
    for jid in g.tree_order:
        child = g.tree_child[jid]
        joint = g.joints[jid]
        parent = g.tree_parent[child][1]
        anchor = sol.point_world(parent, joint.attachment(parent))
        arm = _rotate(sol.theta[child], g.links[child].point(joint.attachment(child)))
        sol.origin[child] = anchor - arm
    return sol.finish()


# ---------------------------------------------------------------------------
# public API


def _free_vector(graph, sol: _Solution) -> np.ndarray:
    return np.stack([sol.alpha[jid] for jid in graph.free_joints], axis=-1)


def _guess_vector(graph, guess, phi: float) -> np.ndarray:
    if guess is not None:
        angles = guess.joint_angles if isinstance(guess, Configuration) else guess
        return np.array([angles[jid] for jid in graph.free_joints])
    if graph.plan is not None:
        try:
            sol = _solve_analytic(graph, phi, strict=True)
            return np.array([float(sol.alpha[jid]) for jid in graph.free_joints])
        except (NotAssemblable, SingularConfiguration):
            pass
    return np.array(
        [graph.home_pose.get(jid, 0.0) for jid in graph.free_joints]
    )


def _configuration(graph, sol: _Solution, index=None) -> Configuration:
    def pick(arr):
        return float(arr if index is None else arr[index])

    joint_angles = {jid: pick(sol.alpha[jid]) for jid in graph.joints}
    points: dict[str, tuple[float, float]] = {}
    for pid in graph.pivots:
        xy = graph.pivots[pid].xy
        points[f"ground:{pid}"] = (float(xy[0]), float(xy[1]))
    for link_id, link in graph.links.items():
        for pname in link.points:
            w = sol.point_world(link_id, pname)
            if index is not None:
                w = w[index]
            points[f"{link_id}:{pname}"] = (float(w[0]), float(w[1]))
    for name, ref in graph.spec.point_outputs.items():
        key = f"{ref[0]}:{ref[1]}"
        points[name] = points[key]
    phase = float(sol.phi if index is None else sol.phi[index])
    residual = pick(sol.residual)
    return Configuration(
        phase=phase, joint_angles=joint_angles, points=points, residual_norm=residual
    )


def solve_configuration(
    mech: MechanismGraph,
    phi: float,
    guess: "Configuration | dict[str, float] | None" = None,
    method: str = "auto",
) -> Configuration:
    """Solve the mechanism at crank phase ``phi`` (radians).

    ``method``: 'auto' uses the analytic dyad plan when the topology has
    one, falling back to Newton; 'analytic' requires the plan; 'newton'
    forces the iterative route (seeded by ``guess``, else the analytic
    solution, else the stored home pose).  ``guess`` may be a previous
    Configuration or a mapping of free-joint angles in radians, such as
    ``mech.home_pose``.
    """
    if method not in ("auto", "analytic", "newton"):
        raise ValueError(f"unknown method {method!r}")
    phi = float(phi)
    if method in ("auto", "analytic") and mech.plan is not None:
        sol = _solve_analytic(mech, phi, strict=True)
        if float(sol.residual) > NEWTON_TOL_MM:  # defensive; not expected
            sol = _solve_newton(mech, phi, _free_vector(mech, sol))
        return _configuration(mech, sol)
    if method == "analytic":
        raise ValueError("mechanism has no analytic solve plan")
    q0 = _guess_vector(mech, guess, phi)
    sol = _solve_newton(mech, phi, q0)
    return _configuration(mech, sol)


def sweep_series(
    mech: MechanismGraph,
    samples: int = 360,
    strict: bool = True,
    method: str = "auto",
) -> dict:
    """Sweep one wingbeat and return dense arrays (no Configuration objects).

    Returns a dict with phi, ok, theta_s_deg, theta_e_deg, elbow, tip,
    residual, margin, transmission, free (free joint angle matrix) and
    wrap_deviation_rad.  With ``strict`` the first failing sample raises,
    annotated with its phase; otherwise failures are masked in ``ok`` and
    angle series are principal-valued where the sweep is interrupted.
    """
    phi = phase_grid(samples)
    analytic = method in ("auto", "analytic") and mech.plan is not None
    if method == "analytic" and mech.plan is None:
        raise ValueError("mechanism has no analytic solve plan")

    if analytic:
        sol = _solve_analytic(mech, phi, strict=strict)
        wrap_sol = _solve_analytic(mech, np.array([TWO_PI]), strict=False)
        free = _free_vector(mech, sol)
        wrap_free = _free_vector(mech, wrap_sol)[0]
        all_ok = bool(np.all(sol.ok))
    else:
        free = np.empty((samples, len(mech.free_joints)))
        sols = []
        ok = np.ones(samples, dtype=bool)
        q = _guess_vector(mech, None, float(phi[0]))
        for k in range(samples):
            try:
                sk = _solve_newton(mech, float(phi[k]), q)
            except (NoConvergence, SingularJacobian, NotAssemblable):
                if strict:
                    raise
                ok[k] = False
                sols.append(None)
                free[k] = np.nan
                continue
            sols.append(sk)
            free[k] = _free_vector(mech, sk)
            q = free[k]
        all_ok = bool(np.all(ok))
        try:
            wrap_sol = _solve_newton(mech, TWO_PI, q)
            wrap_free = _free_vector(mech, wrap_sol)
        except (NoConvergence, SingularJacobian, NotAssemblable):
            wrap_free = np.full(len(mech.free_joints), np.nan)
        sol = _merge_newton_sweep(mech, phi, sols, ok)

    out = {
        "phi": phi,
        "ok": sol.ok.copy(),
        "residual": sol.residual,
        "margin": dict(sol.margin),
        "transmission": dict(sol.transmission),
        "free": free,
    }
    if all_ok and len(phi) > 1:
        steps = np.abs(wrap_pi(np.diff(free, axis=0)))
        wrap_step = np.abs(wrap_pi(wrap_free - free[-1]))
        out["max_step_rad"] = float(max(steps.max(), wrap_step.max()))
        out["wrap_deviation_rad"] = float(np.max(np.abs(wrap_pi(wrap_free - free[0]))))
    else:
        out["max_step_rad"] = math.nan
        out["wrap_deviation_rad"] = math.nan

    unwrap = all_ok
    for name in ("theta_s", "theta_e"):
        spec_out = mech.angle_output(name)
        if spec_out.link is not None:
            raw = sol.theta[spec_out.link]
        else:
            raw = sol.alpha[spec_out.joint]
        raw = np.asarray(raw, dtype=float)
        if unwrap:
            raw = np.unwrap(raw)
        out[f"{name}_deg"] = spec_out.sign * np.degrees(raw) + spec_out.offset_deg
    elbow_ref = mech.spec.point_outputs["elbow"]
    tip_ref = mech.spec.point_outputs["wingtip"]
    out["elbow"] = sol.point_world(*elbow_ref)
    out["tip"] = sol.point_world(*tip_ref)
    out["_solution"] = sol
    return out


def _merge_newton_sweep(mech, phi, sols, ok) -> _Solution:
    merged = _Solution(mech, phi)
    merged.ok = ok
    n = len(phi)

    def collect(getter, keys, store):
        for key in keys:
            arr = np.full(n, np.nan)
            for k, sk in enumerate(sols):
                if sk is not None:
                    arr[k] = float(getter(sk, key))
            store[key] = arr

    collect(lambda s, k: s.theta[k], list(mech.links) + [GROUND], merged.theta)
    collect(lambda s, k: s.alpha[k], list(mech.joints), merged.alpha)
    for link in list(mech.links) + [GROUND]:
        arr = np.full((n, 2), np.nan)
        for k, sk in enumerate(sols):
            if sk is not None:
                arr[k] = sk.origin[link]
        merged.origin[link] = arr
    arr = np.full(n, np.nan)
    for k, sk in enumerate(sols):
        if sk is not None:
            arr[k] = float(sk.residual)
    merged.residual = arr
    return merged


def sweep_gait(
    mech: MechanismGraph, samples: int = 360, method: str = "auto"
) -> GaitTrajectory:
    """Sweep one full wingbeat over the uniform N-sample phase grid.

    The sweep is strict: any sample that cannot be assembled raises with
    the failing phase in the message.  At least 8 samples are required.
    """
    if samples < 8:
        raise ValueError(f"a gait sweep needs at least 8 samples, got {samples}")
    series = sweep_series(mech, samples, strict=True, method=method)
    sol = series["_solution"]
    configurations = [_configuration(mech, sol, index=k) for k in range(samples)]
    return GaitTrajectory(
        phi=series["phi"],
        theta_s_deg=series["theta_s_deg"],
        theta_e_deg=series["theta_e_deg"],
        elbow_path=series["elbow"],
        tip_path=series["tip"],
        configurations=configurations,
        wrap_deviation_rad=series["wrap_deviation_rad"],
        max_step_rad=series["max_step_rad"],
        residual_max=float(np.max(series["residual"])),
    )


def assembly_report(mech: MechanismGraph, samples: int = 360) -> dict:
    """Non-raising assembly survey over the phase grid.

    Returns {'phi', 'ok', 'margin', 'transmission'}; margins are mm
    (negative when the loop closes), transmission angles radians folded to
    (0, pi/2], NaN where the loop never assembled.  Requires a mechanism
    with an analytic plan.
    """
    if mech.plan is None:
        raise ValueError("assembly_report requires an analytic solve plan")
    phi = phase_grid(samples)
    sol = _solve_analytic(mech, phi, strict=False)
    return {
        "phi": phi,
        "ok": sol.ok,
        "margin": sol.margin,
        "transmission": sol.transmission,
    }
