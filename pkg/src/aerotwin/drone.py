"""Hover model of the quadrotor carrying the arm.

Each attitude axis is a linear second-order system with PD stabilization
toward level hover; position follows its setpoint through a first-order
lag. The arm couples in three ways: the suspended masses' horizontal CoM
moment shifts the pitch equilibrium, the rate of change of the static
joint torques excites roll, and attaching or releasing the payload kicks
the pitch rate.

Integration is semi-implicit Euler with the damping term taken implicitly,

    rate' = (rate + dt * (wn^2 * (eq - angle) + excitation)) / (1 + 2*zeta*wn*dt)
    angle' = angle + dt * rate'

in exactly this arithmetic order, so identical inputs reproduce identical
trajectories bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from aerotwin.kinematics import (
    JointAngles,
    JointTorques,
    LinkGeometry,
    MassModel,
    arm_com_point,
    fk_grip,
)

Vec3 = tuple[float, float, float]


class Diverged(RuntimeError):
    """Attitude left the +/- pi/2 envelope; the run is aborted."""


@dataclass(frozen=True)
class DroneState:
    position: Vec3
    velocity: Vec3
    roll: float
    pitch: float
    yaw: float
    angular_rate: Vec3

    @classmethod
    def hovering(cls, position: Vec3, yaw: float = 0.0) -> "DroneState":
        return cls(
            position=position,
            velocity=(0.0, 0.0, 0.0),
            roll=0.0,
            pitch=0.0,
            yaw=yaw,
            angular_rate=(0.0, 0.0, 0.0),
        )


@dataclass(frozen=True)
class AttitudeSetpoint:
    position: Vec3
    yaw: float = 0.0

    def __post_init__(self) -> None:
        if not all(math.isfinite(v) for v in (*self.position, self.yaw)):
            raise ValueError("setpoint must be finite")


@dataclass(frozen=True)
class CouplingParams:
    """How arm motion disturbs the airframe.

    com_gain: steady pitch tilt per kg*m of suspended horizontal CoM moment.
    torque_gain: roll acceleration per N*m/s of joint-torque rate.
    payload_step_gain: pitch-rate kick per kg*m of moment stepped on
    attach/detach.
    """

    com_gain: float = 0.03
    torque_gain: float = 0.2
    payload_step_gain: float = 9.0

    def __post_init__(self) -> None:
        for name in ("com_gain", "torque_gain", "payload_step_gain"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be >= 0")


@dataclass(frozen=True)
class AttitudeGains:
    natural_freq: float = 3.0    # rad/s, tuned for the 4 s settle anchor
    damping_ratio: float = 0.6
    position_tau: float = 1.5    # s, first-order position lag

    def __post_init__(self) -> None:
        if not (self.natural_freq > 0 and self.damping_ratio > 0
                and self.position_tau > 0):
            raise ValueError("gains must be > 0")


@dataclass(frozen=True)
class ArmDisturbance:
    """Per-tick disturbance summary handed from the arm to the airframe."""

    pitch_moment: float = 0.0    # kg*m, horizontal moment of suspended masses
    torque_rate: float = 0.0     # N*m/s, d/dt of total static joint torque
    payload_step: float = 0.0    # kg*m stepped this tick by attach/detach

    @classmethod
    def none(cls) -> "ArmDisturbance":
        return cls()


def arm_disturbance(
    geom: LinkGeometry,
    masses: MassModel,
    angles: JointAngles,
    torques: JointTorques,
    prev_torques: JointTorques | None,
    payload_attached: bool,
    payload_step: float,
    dt: float,
) -> ArmDisturbance:
    """Map the arm configuration and torque history to airframe disturbances."""
    com = arm_com_point(geom, angles, masses.arm_com_lever)
    moment = masses.arm_mass * com[0]
    if payload_attached and masses.payload_mass > 0.0:
        grip = fk_grip(geom, (0.0, 0.0), angles)
        moment += masses.payload_mass * grip.x

    if prev_torques is None:
        torque_rate = 0.0
    else:
        total = torques.t1 + torques.t2 + torques.t3
        prev_total = prev_torques.t1 + prev_torques.t2 + prev_torques.t3
        torque_rate = (total - prev_total) / dt

    return ArmDisturbance(
        pitch_moment=moment,
        torque_rate=torque_rate,
        payload_step=payload_step,
    )


def _axis_step(
    angle: float,
    rate: float,
    equilibrium: float,
    excitation: float,
    gains: AttitudeGains,
    dt: float,
) -> tuple[float, float]:
    wn = gains.natural_freq
    denom = 1.0 + 2.0 * gains.damping_ratio * wn * dt
    rate = (rate + dt * (wn * wn * (equilibrium - angle) + excitation)) / denom
    angle = angle + dt * rate
    return angle, rate


def step_drone(
    state: DroneState,
    setpoint: AttitudeSetpoint,
    disturbance: ArmDisturbance,
    coupling: CouplingParams,
    gains: AttitudeGains,
    dt: float,
) -> DroneState:
    """Advance the airframe one tick. Raises Diverged past +/- pi/2 tilt."""
    if not 0.0 < dt <= 0.02:
        raise ValueError("dt must be in (0, 0.02] for a stable 100 Hz base rate")

    roll_rate, pitch_rate, yaw_rate = state.angular_rate

    pitch_rate += coupling.payload_step_gain * disturbance.payload_step
    pitch_eq = coupling.com_gain * disturbance.pitch_moment
    pitch, pitch_rate = _axis_step(state.pitch, pitch_rate, pitch_eq, 0.0, gains, dt)

    roll_exc = coupling.torque_gain * disturbance.torque_rate
    roll, roll_rate = _axis_step(state.roll, roll_rate, 0.0, roll_exc, gains, dt)

    yaw_rate = (setpoint.yaw - state.yaw) / gains.position_tau
    yaw = state.yaw + dt * yaw_rate

    velocity = tuple(
        (sp - p) / gains.position_tau
        for sp, p in zip(setpoint.position, state.position)
    )
    position = tuple(p + dt * v for p, v in zip(state.position, velocity))

    if abs(roll) >= math.pi / 2 or abs(pitch) >= math.pi / 2:
        raise Diverged(
            f"attitude diverged: roll={math.degrees(roll):.1f} deg, "
            f"pitch={math.degrees(pitch):.1f} deg"
        )
    return DroneState(
        position=position,
        velocity=velocity,
        roll=roll,
        pitch=pitch,
        yaw=yaw,
        angular_rate=(roll_rate, pitch_rate, yaw_rate),
    )
