"""Planar kinematics and static torques of the 4-DoF arm under the drone.

Frame convention: the manipulation plane is (x forward, z up), attached to
the drone body at the shoulder joint. The chain is

    shoulder --(l1, offset l_dis)--> elbow --(l2)--> wrist --(l3)--> grip end

with theta the shoulder angle, beta the elbow angle and alpha the wrist
pitch. The grip-rotation DoF (wrist_roll) does not affect the plane and is
carried through unchanged. End-effector orientation in the plane is
phi = alpha - beta + theta.

All operations here are pure functions; nothing in this module holds state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

Point2 = tuple[float, float]

# Slack used to absorb float dust when an IK solution sits exactly on a
# joint-limit boundary.
_LIMIT_SNAP = 1e-9


class Unreachable(ValueError):
    """The target lies outside the annular workspace of the arm."""


class LimitViolation(ValueError):
    """A geometric solution exists but every branch violates the joint limits."""


def wrap_angle(angle: float) -> float:
    """Normalize an angle to (-pi, pi]."""
    wrapped = math.remainder(angle, math.tau)
    if wrapped <= -math.pi:
        wrapped = math.pi
    return wrapped


@dataclass(frozen=True)
class LinkGeometry:
    """Segment lengths of the arm, in meters.

    l_dis is the perpendicular offset between the shoulder and elbow frames
    caused by the shape of the first link; it may be zero for a plain
    revolute chain.
    """

    l1: float
    l2: float
    l3: float
    l_dis: float = 0.0

    def __post_init__(self) -> None:
        for name in ("l1", "l2", "l3"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be strictly positive")
        if self.l_dis < 0.0 or not math.isfinite(self.l_dis):
            raise ValueError("l_dis must be finite and >= 0")

    @property
    def total_length(self) -> float:
        return self.l1 + self.l2 + self.l3


@dataclass(frozen=True)
class MassModel:
    """Point-mass model of the arm's own weight and the carried payload.

    arm_com_lever is the arc-length position of the arm's lumped center of
    mass along the chain, measured from the shoulder. The shipped default is
    calibrated so that holding the rated payload fully extended loads the
    shoulder with the rated 5.3 N*m.
    """

    arm_mass: float
    arm_com_lever: float
    payload_mass: float = 0.0
    gravity: float = 9.81

    def __post_init__(self) -> None:
        if self.arm_mass < 0.0 or self.payload_mass < 0.0:
            raise ValueError("masses must be >= 0")
        if self.arm_com_lever < 0.0:
            raise ValueError("arm_com_lever must be >= 0")
        if not self.gravity > 0.0:
            raise ValueError("gravity must be > 0")


@dataclass(frozen=True)
class JointAngles:
    """Arm configuration in radians: shoulder, elbow, wrist pitch, grip roll."""

    theta: float
    beta: float
    alpha: float
    wrist_roll: float = 0.0

    def __post_init__(self) -> None:
        for name in ("theta", "beta", "alpha", "wrist_roll"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")


@dataclass(frozen=True)
class JointLimits:
    """Per-joint [min, max] bounds in radians."""

    theta: tuple[float, float]
    beta: tuple[float, float]
    alpha: tuple[float, float]
    wrist_roll: tuple[float, float]

    def __post_init__(self) -> None:
        for name in ("theta", "beta", "alpha", "wrist_roll"):
            lo, hi = getattr(self, name)
            if not lo < hi:
                raise ValueError(f"{name}: min must be < max")

    def contains(self, q: JointAngles, tol: float = 0.0) -> bool:
        for name in ("theta", "beta", "alpha", "wrist_roll"):
            lo, hi = getattr(self, name)
            value = getattr(q, name)
            if value < lo - tol or value > hi + tol:
                return False
        return True

    def clamp(self, q: JointAngles) -> JointAngles:
        def clip(value: float, bounds: tuple[float, float]) -> float:
            return min(max(value, bounds[0]), bounds[1])

        return JointAngles(
            theta=clip(q.theta, self.theta),
            beta=clip(q.beta, self.beta),
            alpha=clip(q.alpha, self.alpha),
            wrist_roll=clip(q.wrist_roll, self.wrist_roll),
        )


@dataclass(frozen=True)
class PlanarPose:
    """Grip-end pose in the drone frame: position (m) and orientation (rad).

    phi is normalized to (-pi, pi] at construction.
    """

    x: float
    z: float
    phi: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "phi", wrap_angle(self.phi))


@dataclass(frozen=True)
class JointTorques:
    """Static gravity torques (N*m) about shoulder, elbow and wrist."""

    t1: float
    t2: float
    t3: float


def fk_elbow(geom: LinkGeometry, base: Point2, angles: JointAngles) -> Point2:
    """Elbow joint position: shoulder + rotated first link and its offset."""
    xs, zs = base
    return (
        xs + geom.l1 * math.cos(angles.theta) - geom.l_dis * math.sin(angles.theta),
        zs + geom.l1 * math.sin(angles.theta) + geom.l_dis * math.cos(angles.theta),
    )


def fk_wrist(geom: LinkGeometry, base: Point2, angles: JointAngles) -> Point2:
    """Wrist joint position: elbow + forearm at the elbow bend angle."""
    xe, ze = fk_elbow(geom, base, angles)
    bend = angles.beta - angles.theta
    return (xe + geom.l2 * math.cos(bend), ze - geom.l2 * math.sin(bend))


def fk_grip(geom: LinkGeometry, base: Point2, angles: JointAngles) -> PlanarPose:
    """Grip-end pose: wrist + final segment along the end-effector heading."""
    xw, zw = fk_wrist(geom, base, angles)
    phi = angles.alpha - angles.beta + angles.theta
    return PlanarPose(
        x=xw + geom.l3 * math.cos(phi),
        z=zw + geom.l3 * math.sin(phi),
        phi=phi,
    )


def ik_solve(geom: LinkGeometry, target: PlanarPose, limits: JointLimits) -> JointAngles:
    """Solve joint angles that place the grip end at `target`.

    The end-effector orientation target.phi is imposed (phi = 0 keeps a
    carried object parallel to the ground), which pins the wrist point and
    reduces the problem to a two-link reach with the l_dis offset folded in.
    Of the two elbow branches the elbow-down one (larger beta) is preferred;
    the other branch is used only when joint limits reject the first. The
    result satisfies alpha - beta + theta == target.phi exactly up to float
    rounding and a possible 2*pi shift of alpha (the in-limit representative
    of the same physical wrist position is returned).

    Raises Unreachable when no real elbow solution exists and LimitViolation
    when both branches violate `limits`.
    """
    if not (math.isfinite(target.x) and math.isfinite(target.z)):
        raise Unreachable("target is not finite")

    xw = target.x - geom.l3 * math.cos(target.phi)
    zw = target.z - geom.l3 * math.sin(target.phi)

    # Wrist distance fixes the elbow angle: l1*cos(beta) - l_dis*sin(beta) = c.
    c = (xw * xw + zw * zw - geom.l1**2 - geom.l2**2 - geom.l_dis**2) / (2.0 * geom.l2)
    reach = math.hypot(geom.l1, geom.l_dis)
    u = c / reach
    if abs(u) > 1.0:
        if abs(u) - 1.0 > 1e-12:
            raise Unreachable(
                f"wrist target ({xw:.4f}, {zw:.4f}) outside annular workspace"
            )
        u = math.copysign(1.0, u)

    spread = math.acos(u)
    skew = math.atan2(geom.l_dis, geom.l1)

    def within(value: float, bounds: tuple[float, float]) -> bool:
        return bounds[0] - _LIMIT_SNAP <= value <= bounds[1] + _LIMIT_SNAP

    def snap(value: float, bounds: tuple[float, float]) -> float:
        return min(max(value, bounds[0]), bounds[1])

    if not within(0.0, limits.wrist_roll):
        raise LimitViolation("wrist_roll limits exclude the neutral position")

    for beta in (wrap_angle(spread - skew), wrap_angle(-spread - skew)):
        k1 = geom.l2 * math.cos(beta) + geom.l1
        k2 = -geom.l2 * math.sin(beta) + geom.l_dis
        theta = wrap_angle(math.atan2(zw, xw) - math.atan2(k2, k1))
        if not (within(theta, limits.theta) and within(beta, limits.beta)):
            continue
        # Snap float dust at a limit boundary onto the limit, then build
        # alpha from the snapped angles so the orientation identity
        # alpha - beta + theta == phi survives to rounding. alpha itself is
        # never clipped; instead the 2*pi-equivalent representative inside
        # the limits is selected (same physical wrist position).
        theta = snap(theta, limits.theta)
        beta = snap(beta, limits.beta)
        alpha = target.phi + beta - theta
        for candidate in (alpha, alpha - math.tau, alpha + math.tau):
            if within(candidate, limits.alpha):
                return JointAngles(theta, beta, candidate, 0.0)
    raise LimitViolation(
        f"target ({target.x:.4f}, {target.z:.4f}, phi={target.phi:.4f}) "
        "violates joint limits on both elbow branches"
    )


def workspace_contains(geom: LinkGeometry, limits: JointLimits, target: PlanarPose) -> bool:
    """True iff ik_solve succeeds for `target`. Never raises."""
    try:
        ik_solve(geom, target, limits)
    except ValueError:
        return False
    return True


def _chain_points(geom: LinkGeometry, angles: JointAngles) -> tuple[Point2, Point2, Point2, Point2]:
    base = (0.0, 0.0)
    grip = fk_grip(geom, base, angles)
    return base, fk_elbow(geom, base, angles), fk_wrist(geom, base, angles), (grip.x, grip.z)


def arm_com_point(geom: LinkGeometry, angles: JointAngles, arc_lever: float) -> Point2:
    """Lumped arm center of mass: the point `arc_lever` meters along the chain."""
    points = _chain_points(geom, angles)
    remaining = arc_lever
    ax, az = points[0]
    for bx, bz in points[1:]:
        seg = math.hypot(bx - ax, bz - az)
        if remaining <= seg:
            f = 0.0 if seg == 0.0 else remaining / seg
            return (ax + f * (bx - ax), az + f * (bz - az))
        remaining -= seg
        ax, az = bx, bz
    return points[-1]


def static_torques(
    geom: LinkGeometry,
    masses: MassModel,
    angles: JointAngles,
    payload_attached: bool = True,
) -> JointTorques:
    """Gravity-only torques about each joint from the horizontal lever arms.

    Each mass (the arm's lumped CoM, and the payload at the grip end when
    attached) contributes m*g*(x_mass - x_joint) to every joint it hangs
    distal of. Torques are signed; they are positive when the mass hangs
    forward of the joint.
    """
    if masses.arm_com_lever > geom.total_length:
        raise ValueError("arm_com_lever exceeds the total arm length")
    shoulder, elbow, wrist, grip = _chain_points(geom, angles)
    com = arm_com_point(geom, angles, masses.arm_com_lever)

    seg1 = math.hypot(elbow[0] - shoulder[0], elbow[1] - shoulder[1])
    joints: list[tuple[Point2, float]] = [
        (shoulder, 0.0),
        (elbow, seg1),
        (wrist, seg1 + geom.l2),
    ]

    g = masses.gravity
    out = []
    for joint_xy, joint_arc in joints:
        torque = 0.0
        if masses.arm_mass > 0.0 and masses.arm_com_lever > joint_arc:
            torque += masses.arm_mass * g * (com[0] - joint_xy[0])
        if payload_attached and masses.payload_mass > 0.0:
            torque += masses.payload_mass * g * (grip[0] - joint_xy[0])
        out.append(torque)
    return JointTorques(t1=out[0], t2=out[1], t3=out[2])
