"""Servo tracking, gripper closure and contact detection.

This is the layer between commanded joint targets and the instantaneous
arm state: rate-limited servo trackers for the four joints, a normalized
gripper (0 = open, 1 = closed) whose bar forces come from a linear squeeze
model, and a small state machine that turns force readings into
contact / grasp / release / drop events.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Literal

from aerotwin.kinematics import JointAngles

EventKind = Literal["contact", "grasp", "release", "drop"]


@dataclass(frozen=True)
class ServoState:
    """A rate-limited position tracker (radians, radians/s)."""

    position: float
    target: float
    max_rate: float

    def __post_init__(self) -> None:
        if not self.max_rate > 0.0:
            raise ValueError("max_rate must be > 0")


def step_servo(servo: ServoState, target: float, dt: float) -> ServoState:
    """Move toward `target` by at most max_rate*dt, arriving exactly."""
    if not dt > 0.0:
        raise ValueError("dt must be > 0")
    step = servo.max_rate * dt
    delta = target - servo.position
    if abs(delta) <= step:
        position = target
    else:
        position = servo.position + math.copysign(step, delta)
    return replace(servo, position=position, target=target)


@dataclass(frozen=True)
class ArmServos:
    """The four joint servos plus the gripper drive (fraction in [0, 1])."""

    theta: ServoState
    beta: ServoState
    alpha: ServoState
    wrist_roll: ServoState
    gripper: ServoState

    def angles(self) -> JointAngles:
        return JointAngles(
            theta=self.theta.position,
            beta=self.beta.position,
            alpha=self.alpha.position,
            wrist_roll=self.wrist_roll.position,
        )

    @property
    def grip_fraction(self) -> float:
        return self.gripper.position


def step_servos(
    servos: ArmServos,
    targets: JointAngles | None,
    grip_fraction: float | None,
    dt: float,
) -> ArmServos:
    """Advance every tracker one step; None targets hold the previous ones."""
    if targets is None:
        targets = JointAngles(
            servos.theta.target,
            servos.beta.target,
            servos.alpha.target,
            servos.wrist_roll.target,
        )
    if grip_fraction is None:
        grip_fraction = servos.gripper.target
    grip_fraction = min(max(grip_fraction, 0.0), 1.0)
    return ArmServos(
        theta=step_servo(servos.theta, targets.theta, dt),
        beta=step_servo(servos.beta, targets.beta, dt),
        alpha=step_servo(servos.alpha, targets.alpha, dt),
        wrist_roll=step_servo(servos.wrist_roll, targets.wrist_roll, dt),
        gripper=step_servo(servos.gripper, grip_fraction, dt),
    )


@dataclass(frozen=True)
class GripperState:
    """Closure fraction and the normalized force on each gripper bar."""

    fraction: float
    bar_force_left: float = 0.0
    bar_force_right: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "fraction", min(max(self.fraction, 0.0), 1.0))

    @property
    def max_force(self) -> float:
        return max(self.bar_force_left, self.bar_force_right)


def grip_force_model(
    fraction: float, object_size: float, stiffness: float
) -> tuple[float, float]:
    """Bar forces from squeezing an object of normalized jaw-axis size.

    Zero until the jaws meet the object (fraction >= 1 - object_size), then
    linear in the overclosure, clamped to [0, 1] and equal on both bars.
    """
    for name, value in (("fraction", fraction), ("object_size", object_size),
                        ("stiffness", stiffness)):
        if not 0.0 <= value <= 1.0:
            raise ValueError(f"{name} must be in [0, 1]")
    engage = 1.0 - object_size
    if fraction <= engage:
        return (0.0, 0.0)
    force = min(max(stiffness * (fraction - engage), 0.0), 1.0)
    return (force, force)


@dataclass(frozen=True)
class ContactEvent:
    timestamp: float
    kind: EventKind
    force: float


class ContactDetector:
    """Turns per-tick gripper readings into an ordered event stream.

    The emitted sequence for one object always matches
    (contact (grasp (release | drop))?)*: a contact may fade without a
    grasp, a grasp always follows a contact, and a grasped object leaves
    either by release (forces fall below threshold) or drop (object out of
    the jaws while still held).
    """

    def __init__(self, threshold: float = 0.05, grasp_fraction_min: float = 0.3):
        if not 0.0 < threshold < 1.0:
            raise ValueError("threshold must be in (0, 1)")
        self.threshold = threshold
        self.grasp_fraction_min = grasp_fraction_min
        self._phase: str = "idle"
        self._prev_above = False

    @property
    def phase(self) -> str:
        return self._phase

    @property
    def grasped(self) -> bool:
        return self._phase == "grasped"

    def detect_contact(
        self, timestamp: float, gripper: GripperState, object_within_jaws: bool
    ) -> list[ContactEvent]:
        events: list[ContactEvent] = []
        above_any = gripper.max_force >= self.threshold
        above_both = (
            min(gripper.bar_force_left, gripper.bar_force_right) >= self.threshold
        )

        if self._phase == "grasped":
            if not object_within_jaws:
                events.append(ContactEvent(timestamp, "drop", gripper.max_force))
                self._phase = "idle"
            elif not above_any:
                events.append(ContactEvent(timestamp, "release", gripper.max_force))
                self._phase = "idle"
        elif self._phase == "idle":
            if object_within_jaws and above_any and not self._prev_above:
                events.append(ContactEvent(timestamp, "contact", gripper.max_force))
                self._phase = "contact"

        if self._phase == "contact":
            if not (object_within_jaws and above_any):
                self._phase = "idle"  # brushed past, no grasp: no event
            elif above_both and gripper.fraction > self.grasp_fraction_min:
                events.append(ContactEvent(timestamp, "grasp", gripper.max_force))
                self._phase = "grasped"

        self._prev_above = above_any
        return events
