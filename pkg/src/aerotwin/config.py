"""Typed configuration with strict YAML loading.

A config file may set any subset of the keys below; everything else falls
back to the shipped defaults. Unknown keys are rejected with their dotted
path. Angles in the file are radians except under keys suffixed `_deg`.

The merged raw dict is kept on the Config as `snapshot` so a session
record can rebuild the exact same Config later.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field
from typing import Any

import yaml

from aerotwin.drone import AttitudeGains, AttitudeSetpoint, CouplingParams
from aerotwin.kinematics import (
    JointLimits,
    LinkGeometry,
    MassModel,
    PlanarPose,
    Unreachable,
    ik_solve,
)


class ConfigError(ValueError):
    """A config file failed validation; the message names the bad key."""


DEFAULTS: dict[str, Any] = {
    "geometry": {
        "l1": 0.30,
        "l2": 0.25,
        "l3": 0.19,
        "l_dis": 0.05,
        # Rated total manipulator length; the segments must sum to it.
        "total_length": 0.74,
    },
    "masses": {
        "arm_mass": 0.918,
        # Calibrated so the rated payload held fully extended loads the
        # shoulder with exactly the rated 5.3 N*m.
        "arm_com_lever": 0.26975421,
        "payload_mass": 0.400,
        "gravity": 9.81,
    },
    "joint_limits_deg": {
        "theta": [-120.0, 120.0],
        "beta": [0.0, 150.0],
        "alpha": [-100.0, 100.0],
        "wrist_roll": [-150.0, 150.0],
    },
    "servo_rates": {
        "theta": 3.0,
        "beta": 3.0,
        "alpha": 3.0,
        "wrist_roll": 3.0,
        "grip": 2.0,  # closure fraction per second
    },
    "coupling": {
        "com_gain": 0.03,
        "torque_gain": 0.2,
        "payload_step_gain": 9.0,
    },
    "attitude": {
        "natural_freq": 3.0,
        "damping_ratio": 0.6,
        "position_tau": 1.5,
    },
    "gripper": {
        "contact_threshold": 0.05,
        "grasp_fraction_min": 0.3,
        "capture_radius": 0.06,
    },
    "operator": {
        "stale_window": 0.2,
        "jog_max_step": 0.05,
        "command_rate_hz": 50.0,
    },
    "telemetry": {
        "rate_hz": 100.0,
        "port": 7450,
        "command_latency": 0.0,
    },
    "scene": {
        "drone_setpoint": [0.0, 0.0, 1.0],
        "drone_yaw": 0.0,
        "object": {"x": 0.45, "z": 0.60, "size": 0.5, "mass": 0.105,
                   "stiffness": 1.0},
        "initial_pose": {"x": 0.50, "z": -0.15, "phi": 0.0},
    },
    "seed": 0,
}


@dataclass(frozen=True)
class SceneObject:
    x: float
    z: float
    size: float
    mass: float
    stiffness: float = 1.0


@dataclass(frozen=True)
class Config:
    geometry: LinkGeometry
    masses: MassModel
    limits: JointLimits
    servo_rates: dict[str, float]
    coupling: CouplingParams
    gains: AttitudeGains
    contact_threshold: float
    grasp_fraction_min: float
    capture_radius: float
    stale_window: float
    jog_max_step: float
    command_rate_hz: float
    rate_hz: float
    port: int
    command_latency: float
    setpoint: AttitudeSetpoint
    scene_object: SceneObject
    initial_pose: PlanarPose
    seed: int
    snapshot: dict[str, Any] = field(compare=False, repr=False, default_factory=dict)

    @property
    def dt(self) -> float:
        return 1.0 / self.rate_hz


def _merge(defaults: dict, override: dict, path: str = "") -> dict:
    merged = copy.deepcopy(defaults)
    for key, value in override.items():
        here = f"{path}.{key}" if path else key
        if key not in defaults:
            raise ConfigError(f"unknown config key '{here}'")
        if isinstance(defaults[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"'{here}' must be a mapping")
            merged[key] = _merge(defaults[key], value, here)
        else:
            merged[key] = value
    return merged


def _number(raw: dict, path: str, minimum: float | None = None,
            maximum: float | None = None, strict_min: bool = False) -> float:
    node: Any = raw
    for part in path.split("."):
        node = node[part]
    if isinstance(node, bool) or not isinstance(node, (int, float)):
        raise ConfigError(f"'{path}' must be a number")
    value = float(node)
    if not math.isfinite(value):
        raise ConfigError(f"'{path}' must be finite")
    if minimum is not None:
        if strict_min and not value > minimum:
            raise ConfigError(f"'{path}' must be > {minimum}")
        if not strict_min and value < minimum:
            raise ConfigError(f"'{path}' must be >= {minimum}")
    if maximum is not None and value > maximum:
        raise ConfigError(f"'{path}' must be <= {maximum}")
    return value


def _pair_deg(raw: dict, name: str) -> tuple[float, float]:
    node = raw["joint_limits_deg"][name]
    if (not isinstance(node, (list, tuple)) or len(node) != 2
            or any(isinstance(v, bool) or not isinstance(v, (int, float))
                   for v in node)):
        raise ConfigError(f"'joint_limits_deg.{name}' must be [min, max]")
    lo, hi = (math.radians(float(v)) for v in node)
    if not lo < hi:
        raise ConfigError(f"'joint_limits_deg.{name}': min must be < max")
    return (lo, hi)


def config_from_dict(data: dict[str, Any] | None) -> Config:
    """Validate and build a Config from a raw mapping (file content)."""
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("config root must be a mapping")
    raw = _merge(DEFAULTS, data)

    try:
        geometry = LinkGeometry(
            l1=_number(raw, "geometry.l1", 0.0, strict_min=True),
            l2=_number(raw, "geometry.l2", 0.0, strict_min=True),
            l3=_number(raw, "geometry.l3", 0.0, strict_min=True),
            l_dis=_number(raw, "geometry.l_dis", 0.0),
        )
    except ValueError as exc:
        raise ConfigError(f"geometry: {exc}") from exc
    total = _number(raw, "geometry.total_length", 0.0, strict_min=True)
    if abs(geometry.total_length - total) > 1e-9:
        raise ConfigError(
            f"geometry: l1+l2+l3 = {geometry.total_length!r} does not match "
            f"total_length = {total!r} within 1e-9"
        )

    try:
        masses = MassModel(
            arm_mass=_number(raw, "masses.arm_mass", 0.0),
            arm_com_lever=_number(raw, "masses.arm_com_lever", 0.0),
            payload_mass=_number(raw, "masses.payload_mass", 0.0),
            gravity=_number(raw, "masses.gravity", 0.0, strict_min=True),
        )
    except ValueError as exc:
        raise ConfigError(f"masses: {exc}") from exc
    if masses.arm_com_lever > geometry.total_length:
        raise ConfigError("masses.arm_com_lever exceeds the total arm length")

    limits = JointLimits(
        theta=_pair_deg(raw, "theta"),
        beta=_pair_deg(raw, "beta"),
        alpha=_pair_deg(raw, "alpha"),
        wrist_roll=_pair_deg(raw, "wrist_roll"),
    )

    servo_rates = {
        name: _number(raw, f"servo_rates.{name}", 0.0, strict_min=True)
        for name in ("theta", "beta", "alpha", "wrist_roll", "grip")
    }

    try:
        coupling = CouplingParams(
            com_gain=_number(raw, "coupling.com_gain", 0.0),
            torque_gain=_number(raw, "coupling.torque_gain", 0.0),
            payload_step_gain=_number(raw, "coupling.payload_step_gain", 0.0),
        )
        gains = AttitudeGains(
            natural_freq=_number(raw, "attitude.natural_freq", 0.0, strict_min=True),
            damping_ratio=_number(raw, "attitude.damping_ratio", 0.0, strict_min=True),
            position_tau=_number(raw, "attitude.position_tau", 0.0, strict_min=True),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    rate_hz = _number(raw, "telemetry.rate_hz", 0.0, strict_min=True)
    if 1.0 / rate_hz > 0.02:
        raise ConfigError("telemetry.rate_hz must be >= 50 (dt <= 0.02 s)")
    port = raw["telemetry"]["port"]
    if isinstance(port, bool) or not isinstance(port, int) or not 1 <= port <= 65535:
        raise ConfigError("telemetry.port must be an integer in [1, 65535]")

    sp = raw["scene"]["drone_setpoint"]
    if (not isinstance(sp, (list, tuple)) or len(sp) != 3
            or any(isinstance(v, bool) or not isinstance(v, (int, float))
                   for v in sp)):
        raise ConfigError("scene.drone_setpoint must be [x, y, z]")
    try:
        setpoint = AttitudeSetpoint(
            position=(float(sp[0]), float(sp[1]), float(sp[2])),
            yaw=_number(raw, "scene.drone_yaw"),
        )
    except ValueError as exc:
        raise ConfigError(f"scene.drone_setpoint: {exc}") from exc

    scene_object = SceneObject(
        x=_number(raw, "scene.object.x"),
        z=_number(raw, "scene.object.z"),
        size=_number(raw, "scene.object.size", 0.0, 1.0, strict_min=True),
        mass=_number(raw, "scene.object.mass", 0.0),
        stiffness=_number(raw, "scene.object.stiffness", 0.0, 1.0),
    )

    initial_pose = PlanarPose(
        x=_number(raw, "scene.initial_pose.x"),
        z=_number(raw, "scene.initial_pose.z"),
        phi=_number(raw, "scene.initial_pose.phi"),
    )
    try:
        ik_solve(geometry, initial_pose, limits)
    except (Unreachable, ValueError) as exc:
        raise ConfigError(f"scene.initial_pose is not reachable: {exc}") from exc

    seed = raw["seed"]
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ConfigError("seed must be an integer")

    return Config(
        geometry=geometry,
        masses=masses,
        limits=limits,
        servo_rates=servo_rates,
        coupling=coupling,
        gains=gains,
        contact_threshold=_number(raw, "gripper.contact_threshold", 0.0, 1.0,
                                  strict_min=True),
        grasp_fraction_min=_number(raw, "gripper.grasp_fraction_min", 0.0, 1.0),
        capture_radius=_number(raw, "gripper.capture_radius", 0.0, strict_min=True),
        stale_window=_number(raw, "operator.stale_window", 0.0, strict_min=True),
        jog_max_step=_number(raw, "operator.jog_max_step", 0.0, strict_min=True),
        command_rate_hz=_number(raw, "operator.command_rate_hz", 0.0,
                                strict_min=True),
        rate_hz=rate_hz,
        port=port,
        command_latency=_number(raw, "telemetry.command_latency", 0.0),
        setpoint=setpoint,
        scene_object=scene_object,
        initial_pose=initial_pose,
        seed=seed,
        snapshot=raw,
    )


def load_config(path: str | None = None) -> Config:
    """Load a YAML config file, or the built-in defaults when path is None."""
    if path is None:
        return config_from_dict({})
    try:
        with open(path, encoding="utf-8") as handle:
            data = yaml.safe_load(handle)
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"config file is not valid YAML: {exc}") from exc
    return config_from_dict(data)
