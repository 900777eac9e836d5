"""The simulation loop: one deterministic tick pipeline.

Each tick applies due operator commands, advances the servos, evaluates
grip forces and contact events against the scene object, maps the arm
state to airframe disturbances, steps the drone, and emits one telemetry
frame. Everything is a pure function of (config, submitted commands), so
identical inputs reproduce identical frames bit for bit.

World mapping: the drone flies at its setpoint; the grip end lives at
drone position plus the drone-frame pose rotated by the current pitch
(x forward, z up in the manipulation plane).
"""

from __future__ import annotations

import dataclasses
import math
from typing import Any

from aerotwin.actuation import (
    ArmServos,
    ContactDetector,
    GripperState,
    ServoState,
    grip_force_model,
    step_servos,
)
from aerotwin.config import Config
from aerotwin.drone import DroneState, arm_disturbance, step_drone
from aerotwin.kinematics import JointAngles, fk_grip, ik_solve, static_torques
from aerotwin.operator import OperatorCommand, ScriptPlayer, jog_step
from aerotwin.telemetry import (
    HapticEvent,
    SessionRecord,
    TelemetryFrame,
    command_from_wire,
    command_to_wire,
)


class Simulator:
    """Single-writer digital twin stepped at the telemetry rate."""

    def __init__(self, config: Config):
        self.config = config
        self._dt = config.dt
        self._tick = 0

        start = ik_solve(config.geometry, config.initial_pose, config.limits)
        rates = config.servo_rates
        self._servos = ArmServos(
            theta=ServoState(start.theta, start.theta, rates["theta"]),
            beta=ServoState(start.beta, start.beta, rates["beta"]),
            alpha=ServoState(start.alpha, start.alpha, rates["alpha"]),
            wrist_roll=ServoState(start.wrist_roll, start.wrist_roll,
                                  rates["wrist_roll"]),
            gripper=ServoState(0.0, 0.0, rates["grip"]),
        )
        self._detector = ContactDetector(
            threshold=config.contact_threshold,
            grasp_fraction_min=config.grasp_fraction_min,
        )
        self._drone = DroneState.hovering(config.setpoint.position,
                                          config.setpoint.yaw)
        self._object_pos = (config.scene_object.x, config.scene_object.z)
        self._payload_attached = False
        self._prev_torques = None
        self._latency_ticks = int(round(config.command_latency * config.rate_hz))
        self._pending: list[tuple[int, OperatorCommand]] = []
        self._targets: JointAngles | None = None
        self._grip_target: float | None = None
        self.command_log: list[tuple[int, dict[str, Any]]] = []

    # -- inspection ------------------------------------------------------------

    @property
    def tick(self) -> int:
        return self._tick

    @property
    def time(self) -> float:
        return self._tick * self._dt

    @property
    def joints(self) -> JointAngles:
        return self._servos.angles()

    @property
    def grip_fraction(self) -> float:
        return self._servos.grip_fraction

    @property
    def grip_pose(self):
        return fk_grip(self.config.geometry, (0.0, 0.0), self.joints)

    @property
    def drone(self) -> DroneState:
        return self._drone

    @property
    def payload_attached(self) -> bool:
        return self._payload_attached

    @property
    def object_position(self) -> tuple[float, float]:
        return self._object_pos

    def grip_world(self, joints: JointAngles | None = None) -> tuple[float, float]:
        """Grip end in world (x, z): drone position + pitch-rotated pose."""
        pose = fk_grip(self.config.geometry, (0.0, 0.0),
                       joints if joints is not None else self.joints)
        pitch = self._drone.pitch
        xd = self._drone.position[0]
        zd = self._drone.position[2]
        return (
            xd + pose.x * math.cos(pitch) + pose.z * math.sin(pitch),
            zd - pose.x * math.sin(pitch) + pose.z * math.cos(pitch),
        )

    def teleport_object(self, x: float, z: float) -> None:
        """Scenario hook: force the object to a world position."""
        self._object_pos = (x, z)

    # -- commands ----------------------------------------------------------------

    def submit(self, command: OperatorCommand, apply_tick: int | None = None) -> None:
        """Queue a command; it takes effect after the configured latency."""
        if apply_tick is None:
            apply_tick = self._tick + self._latency_ticks
        self._pending.append((apply_tick, command))

    def _apply_due_commands(self) -> None:
        due = [entry for entry in self._pending if entry[0] <= self._tick]
        if not due:
            return
        self._pending = [e for e in self._pending if e[0] > self._tick]
        for apply_tick, command in due:
            if self._apply_command(command):
                self.command_log.append((self._tick, command_to_wire(command)))

    def _apply_command(self, command: OperatorCommand) -> bool:
        cfg = self.config
        if command.mode == "jog":
            resolved = jog_step(
                self.grip_pose, command.cartesian_step, cfg.geometry,
                cfg.limits, max_step=cfg.jog_max_step,
                timestamp=command.timestamp,
            )
            if resolved is None:
                return False  # rejected: pose held
            targets = resolved.joint_targets
            grip = command.grip_fraction
        else:
            targets = (cfg.limits.clamp(command.joint_targets)
                       if command.joint_targets is not None else None)
            grip = command.grip_fraction
        if targets is not None:
            self._targets = targets
        if grip is not None:
            self._grip_target = grip
        return True

    # -- stepping ------------------------------------------------------------------

    def step(self) -> TelemetryFrame:
        cfg = self.config
        dt = self._dt
        t = self.time

        self._apply_due_commands()
        self._servos = step_servos(self._servos, self._targets,
                                   self._grip_target, dt)
        self._targets = None  # servo states remember their targets
        self._grip_target = None

        joints = self._servos.angles()
        fraction = self._servos.grip_fraction
        grip_pose = fk_grip(cfg.geometry, (0.0, 0.0), joints)
        grip_world = self.grip_world(joints)

        distance = math.hypot(grip_world[0] - self._object_pos[0],
                              grip_world[1] - self._object_pos[1])
        within = distance <= cfg.capture_radius
        if self._payload_attached and within:
            self._object_pos = grip_world  # carried along with the grip

        if within:
            forces = grip_force_model(fraction, cfg.scene_object.size,
                                      cfg.scene_object.stiffness)
        else:
            forces = (0.0, 0.0)

        gripper = GripperState(fraction, *forces)
        events = list(self._detector.detect_contact(t, gripper, within))

        payload_step = 0.0
        for event in events:
            if event.kind == "grasp":
                self._payload_attached = True
                self._object_pos = grip_world
                payload_step += cfg.scene_object.mass * grip_pose.x
            elif event.kind in ("release", "drop"):
                self._payload_attached = False
                payload_step -= cfg.scene_object.mass * grip_pose.x

        if self._detector.phase in ("contact", "grasped") and gripper.max_force > 0:
            events.append(HapticEvent(timestamp=t, intensity=gripper.max_force))

        masses = dataclasses.replace(cfg.masses,
                                     payload_mass=cfg.scene_object.mass)
        torques = static_torques(cfg.geometry, masses, joints,
                                 self._payload_attached)
        disturbance = arm_disturbance(
            cfg.geometry, masses, joints, torques, self._prev_torques,
            self._payload_attached, payload_step, dt,
        )
        self._prev_torques = torques
        self._drone = step_drone(self._drone, cfg.setpoint, disturbance,
                                 cfg.coupling, cfg.gains, dt)

        frame = TelemetryFrame(
            tick=self._tick,
            t=t,
            drone_position=self._drone.position,
            drone_attitude=(self._drone.roll, self._drone.pitch,
                            self._drone.yaw),
            joints=joints,
            grip_fraction=fraction,
            grip_pose=grip_pose,
            torques=torques,
            forces=forces,
            events=tuple(events),
        )
        self._tick += 1
        return frame


def run_script(config: Config, script) -> tuple[SessionRecord, ScriptPlayer]:
    """Run a waypoint script headlessly; returns the record and the player."""
    sim = Simulator(config)
    player = ScriptPlayer(
        script, config.geometry, config.limits, config.servo_rates,
        sim.joints, initial_grip=0.0,
    )
    ticks = int(math.ceil(player.end_time / config.dt))
    frames = []
    for _ in range(ticks):
        command = player.command_at(sim.time)
        if command is not None:
            sim.submit(command, apply_tick=sim.tick)
        frames.append(sim.step())
    return (
        SessionRecord(config=config.snapshot, frames=frames,
                      commands=sim.command_log),
        player,
    )


def replay_commands(config: Config, commands, ticks: int) -> list[TelemetryFrame]:
    """Re-run a recorded command stream; reproduces the frames bitwise."""
    sim = Simulator(config)
    by_tick: dict[int, list[dict[str, Any]]] = {}
    for tick, wire in commands:
        by_tick.setdefault(tick, []).append(wire)
    frames = []
    for _ in range(ticks):
        for wire in by_tick.get(sim.tick, []):
            sim.submit(command_from_wire(wire), apply_tick=sim.tick)
        frames.append(sim.step())
    return frames
