"""Human-input sources: teleop mapping, arrow-key jog steps, script replay.

Live input arrives as tracker/glove samples (stand-ins for the worn
hardware) or as cockpit messages; scripted input comes from waypoint files.
Everything funnels into OperatorCommand values consumed by the simulation
loop, which applies the latest command each tick. The absence of a fresh
command always means "hold position".
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Literal

import yaml

from aerotwin.kinematics import (
    JointAngles,
    JointLimits,
    LimitViolation,
    LinkGeometry,
    PlanarPose,
    Unreachable,
    ik_solve,
)

CommandMode = Literal["teleop", "jog", "script"]
WaypointAction = Literal["none", "grasp", "drop"]


class ScriptError(ValueError):
    """A waypoint script failed validation; the message names the waypoint."""


@dataclass(frozen=True)
class TrackerSample:
    """Already-resolved human joint angles from the arm trackers."""

    shoulder_angle: float
    elbow_angle: float
    timestamp: float


@dataclass(frozen=True)
class GloveSample:
    """Five finger flexions (normalized) plus the IMU wrist pitch."""

    flex: tuple[float, float, float, float, float]
    wrist_pitch: float
    timestamp: float

    def __post_init__(self) -> None:
        clamped = tuple(min(max(f, 0.0), 1.0) for f in self.flex)
        object.__setattr__(self, "flex", clamped)


@dataclass(frozen=True)
class OperatorCommand:
    """One command toward the arm. Exactly one mode payload is populated:

    teleop/script carry resolved joint targets, jog carries a cartesian
    step that still needs IK resolution. grip_fraction of None means "keep
    the current grip target".
    """

    mode: CommandMode
    timestamp: float
    joint_targets: JointAngles | None = None
    cartesian_step: tuple[float, float] | None = None
    grip_fraction: float | None = None

    def __post_init__(self) -> None:
        if self.mode in ("teleop", "script"):
            if self.cartesian_step is not None:
                raise ValueError(f"{self.mode} command cannot carry a step")
        elif self.mode == "jog":
            if self.cartesian_step is None or self.joint_targets is not None:
                raise ValueError("jog command carries exactly a cartesian step")
        else:
            raise ValueError(f"unknown command mode '{self.mode}'")
        if self.grip_fraction is not None:
            object.__setattr__(
                self, "grip_fraction", min(max(self.grip_fraction, 0.0), 1.0)
            )


def teleop_map(
    tracker: TrackerSample,
    glove: GloveSample,
    limits: JointLimits,
    now: float,
    stale_window: float = 0.2,
    align_window: float = 0.05,
    grip_reduction: str = "mean",
) -> OperatorCommand | None:
    """Map tracker + glove samples onto clamped joint targets.

    Returns None (hold position) when the samples are stale or not
    time-aligned; absence of fresh input must never produce motion.
    """
    if abs(tracker.timestamp - glove.timestamp) > align_window:
        return None
    if now - min(tracker.timestamp, glove.timestamp) > stale_window:
        return None

    targets = limits.clamp(
        JointAngles(
            theta=tracker.shoulder_angle,
            beta=tracker.elbow_angle,
            alpha=glove.wrist_pitch,
            wrist_roll=0.0,
        )
    )
    if grip_reduction == "mean":
        grip = sum(glove.flex) / len(glove.flex)
    elif grip_reduction == "max":
        grip = max(glove.flex)
    elif grip_reduction == "index":
        grip = glove.flex[1]
    else:
        raise ValueError(f"unknown grip_reduction '{grip_reduction}'")
    return OperatorCommand(
        mode="teleop",
        timestamp=now,
        joint_targets=targets,
        grip_fraction=grip,
    )


def jog_step(
    current: PlanarPose,
    step: tuple[float, float],
    geom: LinkGeometry,
    limits: JointLimits,
    max_step: float = 0.05,
    timestamp: float = 0.0,
) -> OperatorCommand | None:
    """Resolve an arrow-key step through IK; None when it must be rejected.

    The returned command carries the solved joint targets (mode teleop,
    since the step is consumed by the resolution). phi is preserved.
    """
    dx = min(max(step[0], -max_step), max_step)
    dz = min(max(step[1], -max_step), max_step)
    target = PlanarPose(current.x + dx, current.z + dz, current.phi)
    try:
        targets = ik_solve(geom, target, limits)
    except (Unreachable, LimitViolation):
        return None
    return OperatorCommand(mode="teleop", timestamp=timestamp,
                           joint_targets=targets)


@dataclass(frozen=True)
class ScriptWaypoint:
    target: PlanarPose
    dwell: float
    action: WaypointAction = "none"

    def __post_init__(self) -> None:
        if self.dwell < 0.0:
            raise ValueError("dwell must be >= 0")
        if self.action not in ("none", "grasp", "drop"):
            raise ValueError(f"unknown action '{self.action}'")


def load_script(path: str, geom: LinkGeometry, limits: JointLimits) -> list[ScriptWaypoint]:
    """Load and validate a waypoint script file."""
    try:
        with open(path, encoding="utf-8") as handle:
            data = yaml.safe_load(handle)
    except OSError as exc:
        raise ScriptError(f"cannot read script file: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ScriptError(f"script file is not valid YAML: {exc}") from exc
    return parse_script(data, geom, limits)


def parse_script(data: Any, geom: LinkGeometry, limits: JointLimits) -> list[ScriptWaypoint]:
    if not isinstance(data, dict) or set(data) != {"waypoints"}:
        raise ScriptError("script root must be a mapping with a 'waypoints' list")
    entries = data["waypoints"]
    if not isinstance(entries, list) or not entries:
        raise ScriptError("'waypoints' must be a non-empty list")

    waypoints = []
    for index, entry in enumerate(entries, start=1):
        if not isinstance(entry, dict):
            raise ScriptError(f"waypoint {index}: must be a mapping")
        unknown = set(entry) - {"x", "z", "phi", "dwell", "action"}
        if unknown:
            raise ScriptError(f"waypoint {index}: unknown keys {sorted(unknown)}")
        try:
            target = PlanarPose(
                x=float(entry["x"]),
                z=float(entry["z"]),
                phi=float(entry.get("phi", 0.0)),
            )
            wp = ScriptWaypoint(
                target=target,
                dwell=float(entry.get("dwell", 0.0)),
                action=entry.get("action", "none"),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ScriptError(f"waypoint {index}: {exc}") from exc
        try:
            ik_solve(geom, target, limits)
        except (Unreachable, LimitViolation) as exc:
            raise ScriptError(
                f"waypoint {index}: target ({target.x}, {target.z}, "
                f"phi={target.phi}) is not reachable: {exc}"
            ) from exc
        waypoints.append(wp)
    return waypoints


@dataclass(frozen=True)
class _Segment:
    arrive: float
    depart: float
    targets: JointAngles
    grip_after_arrival: float | None
    waypoint_index: int  # 1-based


class ScriptPlayer:
    """Deterministic command stream for a validated waypoint script.

    Travel times are derived from the servo rates, so the schedule is a
    pure function of script, geometry, limits and rates: the commanded
    target switches to the next waypoint exactly when the previous dwell
    ends, and grasp/drop actions fire on arrival.
    """

    def __init__(
        self,
        script: list[ScriptWaypoint],
        geom: LinkGeometry,
        limits: JointLimits,
        servo_rates: dict[str, float],
        start_angles: JointAngles,
        initial_grip: float = 0.0,
    ):
        if not script:
            raise ScriptError("script is empty")
        self._segments: list[_Segment] = []
        clock = 0.0
        previous = start_angles
        grip = initial_grip
        for index, wp in enumerate(script, start=1):
            targets = ik_solve(geom, wp.target, limits)
            travel = max(
                abs(targets.theta - previous.theta) / servo_rates["theta"],
                abs(targets.beta - previous.beta) / servo_rates["beta"],
                abs(targets.alpha - previous.alpha) / servo_rates["alpha"],
                abs(targets.wrist_roll - previous.wrist_roll)
                / servo_rates["wrist_roll"],
            )
            arrive = clock + travel
            depart = arrive + wp.dwell
            if wp.action == "grasp":
                grip_after = 1.0
            elif wp.action == "drop":
                grip_after = 0.0
            else:
                grip_after = None
            self._segments.append(
                _Segment(arrive, depart, targets, grip_after, index)
            )
            clock = depart
            previous = targets
        self._initial_grip = initial_grip

    @property
    def end_time(self) -> float:
        return self._segments[-1].depart

    def finished(self, t: float) -> bool:
        return t >= self.end_time

    def active_waypoint(self, t: float) -> int:
        """1-based index of the waypoint being served at time t."""
        for seg in self._segments:
            if t < seg.depart:
                return seg.waypoint_index
        return self._segments[-1].waypoint_index

    def command_at(self, t: float) -> OperatorCommand | None:
        """The command for simulation time t; None after the script ends."""
        if self.finished(t):
            return None
        grip = self._initial_grip
        for seg in self._segments:
            if t >= seg.arrive and seg.grip_after_arrival is not None:
                grip = seg.grip_after_arrival
            if t < seg.depart:
                return OperatorCommand(
                    mode="script",
                    timestamp=t,
                    joint_targets=seg.targets,
                    grip_fraction=grip,
                )
        return None
