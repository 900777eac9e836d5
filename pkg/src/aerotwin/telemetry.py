"""Wire protocol, session recording and the statistics pipeline.

One message = one length-prefixed UTF-8 JSON document:

    <decimal byte length of body>\\n<body>

Every message body carries `type` and `protocol_version`. Unknown body
fields are ignored on decode (forward compatibility); see
docs/protocol.md for the full schema. Over message-oriented transports
(the cockpit's browser socket) the same JSON bodies travel without the
length prefix.

Encoding is canonical: sorted keys, no whitespace, shortest round-trip
float representation. Encoded bytes are therefore deterministic and safe
to compare bit for bit, which the golden fixtures and the session-record
replay test rely on.
"""

from __future__ import annotations

import json
import math
import threading
from collections import deque
from dataclasses import dataclass
from typing import Any

import numpy as np

from aerotwin.actuation import ContactEvent
from aerotwin.kinematics import JointAngles, JointTorques, PlanarPose
from aerotwin.operator import OperatorCommand

PROTOCOL_VERSION = 1


class MalformedMessage(ValueError):
    """Bytes on the wire did not parse as a protocol message."""


class EmptyWindow(ValueError):
    """A statistics window selected no frames."""


@dataclass(frozen=True)
class HapticEvent:
    """Contact-force feedback toward the operator's fingertips."""

    timestamp: float
    intensity: float


Event = ContactEvent | HapticEvent


@dataclass(frozen=True)
class TelemetryFrame:
    """One 10 ms snapshot of the whole twin."""

    tick: int
    t: float
    drone_position: tuple[float, float, float]
    drone_attitude: tuple[float, float, float]  # roll, pitch, yaw
    joints: JointAngles
    grip_fraction: float
    grip_pose: PlanarPose
    torques: JointTorques
    forces: tuple[float, float]
    events: tuple[Event, ...] = ()


# --- message codec ----------------------------------------------------------


def encode_body(body: dict[str, Any]) -> bytes:
    return json.dumps(
        body, sort_keys=True, separators=(",", ":"), allow_nan=False
    ).encode("utf-8")


def encode_message(body: dict[str, Any]) -> bytes:
    payload = encode_body(body)
    return str(len(payload)).encode("ascii") + b"\n" + payload


def decode_body(payload: bytes) -> dict[str, Any]:
    try:
        body = json.loads(payload.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise MalformedMessage(f"body is not valid JSON: {exc}") from exc
    if not isinstance(body, dict) or "type" not in body:
        raise MalformedMessage("message body must be an object with a 'type'")
    return body


def decode_message(data: bytes) -> dict[str, Any]:
    """Decode exactly one length-prefixed message."""
    newline = data.find(b"\n")
    if newline < 0:
        raise MalformedMessage("missing length prefix")
    try:
        length = int(data[:newline])
    except ValueError as exc:
        raise MalformedMessage("length prefix is not an integer") from exc
    payload = data[newline + 1:]
    if length < 0 or len(payload) != length:
        raise MalformedMessage(
            f"length prefix {length} does not match body size {len(payload)}"
        )
    return decode_body(payload)


class MessageSplitter:
    """Incremental splitter for a length-prefixed byte stream."""

    MAX_LENGTH = 16 * 1024 * 1024

    def __init__(self) -> None:
        self._buffer = bytearray()

    def feed(self, data: bytes) -> list[dict[str, Any]]:
        self._buffer.extend(data)
        out = []
        while True:
            newline = self._buffer.find(b"\n")
            if newline < 0:
                if len(self._buffer) > 32:
                    raise MalformedMessage("runaway length prefix")
                return out
            try:
                length = int(self._buffer[:newline])
            except ValueError as exc:
                raise MalformedMessage("length prefix is not an integer") from exc
            if not 0 <= length <= self.MAX_LENGTH:
                raise MalformedMessage(f"unreasonable message length {length}")
            end = newline + 1 + length
            if len(self._buffer) < end:
                return out
            out.append(decode_body(bytes(self._buffer[newline + 1:end])))
            del self._buffer[:end]


# --- frame / command wire forms ---------------------------------------------


def _event_to_wire(event: Event) -> dict[str, Any]:
    if isinstance(event, HapticEvent):
        return {"kind": "haptic", "t": event.timestamp,
                "intensity": event.intensity}
    return {"kind": event.kind, "t": event.timestamp, "force": event.force}


def _event_from_wire(data: dict[str, Any]) -> Event:
    try:
        kind = data["kind"]
        if kind == "haptic":
            return HapticEvent(timestamp=data["t"], intensity=data["intensity"])
        if kind in ("contact", "grasp", "release", "drop"):
            return ContactEvent(timestamp=data["t"], kind=kind,
                                force=data["force"])
    except (KeyError, TypeError) as exc:
        raise MalformedMessage(f"bad event entry: {exc}") from exc
    raise MalformedMessage(f"unknown event kind '{kind}'")


def frame_to_wire(frame: TelemetryFrame) -> dict[str, Any]:
    x, y, z = frame.drone_position
    roll, pitch, yaw = frame.drone_attitude
    return {
        "type": "frame",
        "protocol_version": PROTOCOL_VERSION,
        "tick": frame.tick,
        "t": frame.t,
        "drone": {"x": x, "y": y, "z": z, "roll": roll, "pitch": pitch,
                  "yaw": yaw},
        "joints": {
            "theta": frame.joints.theta,
            "beta": frame.joints.beta,
            "alpha": frame.joints.alpha,
            "wrist_roll": frame.joints.wrist_roll,
        },
        "grip_fraction": frame.grip_fraction,
        "grip_pose": {"x": frame.grip_pose.x, "z": frame.grip_pose.z,
                      "phi": frame.grip_pose.phi},
        "torques": {"t1": frame.torques.t1, "t2": frame.torques.t2,
                    "t3": frame.torques.t3},
        "forces": {"left": frame.forces[0], "right": frame.forces[1]},
        "events": [_event_to_wire(e) for e in frame.events],
    }


def frame_from_wire(body: dict[str, Any]) -> TelemetryFrame:
    if body.get("type") != "frame":
        raise MalformedMessage(f"expected a frame, got '{body.get('type')}'")
    try:
        drone = body["drone"]
        joints = body["joints"]
        pose = body["grip_pose"]
        torques = body["torques"]
        forces = body["forces"]
        return TelemetryFrame(
            tick=body["tick"],
            t=body["t"],
            drone_position=(drone["x"], drone["y"], drone["z"]),
            drone_attitude=(drone["roll"], drone["pitch"], drone["yaw"]),
            joints=JointAngles(
                theta=joints["theta"],
                beta=joints["beta"],
                alpha=joints["alpha"],
                wrist_roll=joints["wrist_roll"],
            ),
            grip_fraction=body["grip_fraction"],
            grip_pose=PlanarPose(pose["x"], pose["z"], pose["phi"]),
            torques=JointTorques(torques["t1"], torques["t2"], torques["t3"]),
            forces=(forces["left"], forces["right"]),
            events=tuple(_event_from_wire(e) for e in body["events"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, MalformedMessage):
            raise
        raise MalformedMessage(f"bad frame field: {exc}") from exc


def encode_frame(frame: TelemetryFrame) -> bytes:
    return encode_message(frame_to_wire(frame))


def decode_frame(data: bytes) -> TelemetryFrame:
    return frame_from_wire(decode_message(data))


def command_to_wire(cmd: OperatorCommand) -> dict[str, Any]:
    body: dict[str, Any] = {
        "type": "command",
        "protocol_version": PROTOCOL_VERSION,
        "mode": cmd.mode,
        "timestamp": cmd.timestamp,
    }
    if cmd.joint_targets is not None:
        q = cmd.joint_targets
        body["joint_targets"] = {"theta": q.theta, "beta": q.beta,
                                 "alpha": q.alpha, "wrist_roll": q.wrist_roll}
    if cmd.cartesian_step is not None:
        body["cartesian_step"] = {"dx": cmd.cartesian_step[0],
                                  "dz": cmd.cartesian_step[1]}
    if cmd.grip_fraction is not None:
        body["grip_fraction"] = cmd.grip_fraction
    return body


def command_from_wire(body: dict[str, Any]) -> OperatorCommand:
    if body.get("type") != "command":
        raise MalformedMessage(f"expected a command, got '{body.get('type')}'")
    try:
        targets = None
        if "joint_targets" in body:
            q = body["joint_targets"]
            targets = JointAngles(q["theta"], q["beta"], q["alpha"],
                                  q["wrist_roll"])
        step = None
        if "cartesian_step" in body:
            step = (body["cartesian_step"]["dx"], body["cartesian_step"]["dz"])
        return OperatorCommand(
            mode=body["mode"],
            timestamp=body["timestamp"],
            joint_targets=targets,
            cartesian_step=step,
            grip_fraction=body.get("grip_fraction"),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedMessage(f"bad command field: {exc}") from exc


def encode_command(cmd: OperatorCommand) -> bytes:
    return encode_message(command_to_wire(cmd))


def decode_command(data: bytes) -> OperatorCommand:
    return command_from_wire(decode_message(data))


def gap_marker(t: float, dropped: int) -> dict[str, Any]:
    return {"type": "gap", "protocol_version": PROTOCOL_VERSION, "t": t,
            "dropped": dropped}


# --- frame fan-out with bounded buffering ------------------------------------


class SinkClosed(Exception):
    """The frame consumer is gone; the stream ends cleanly."""


class FrameBuffer:
    """Bounded frame queue: overflow drops oldest and marks a gap.

    Thread-safe single-producer / single-consumer handoff used both by
    stream_session and by the network server's per-session writers.
    """

    def __init__(self, capacity: int = 32):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self._items: deque[tuple[float, bytes]] = deque()
        self._capacity = capacity
        self._dropped = 0
        self._lock = threading.Lock()
        self._ready = threading.Condition(self._lock)
        self._closed = False

    def push(self, t: float, message: bytes) -> None:
        with self._ready:
            if self._closed:
                return
            if len(self._items) >= self._capacity:
                self._items.popleft()
                self._dropped += 1
            self._items.append((t, message))
            self._ready.notify()

    def pop(self, timeout: float | None = 0.0) -> bytes | None:
        """Next message, inserting a gap marker after any drops.

        timeout of 0 polls; None blocks until data or close.
        """
        with self._ready:
            if timeout != 0.0:
                while not self._items and not self._closed:
                    if not self._ready.wait(timeout):
                        break
            if self._dropped and self._items:
                marker = encode_message(
                    gap_marker(self._items[0][0], self._dropped)
                )
                self._dropped = 0
                return marker
            if self._items:
                return self._items.popleft()[1]
            if self._closed:
                raise SinkClosed
            return None

    def close(self) -> None:
        with self._ready:
            self._closed = True
            self._ready.notify_all()

    def __len__(self) -> int:
        with self._lock:
            return len(self._items)


@dataclass
class StreamStats:
    frames_emitted: int = 0
    frames_delivered: int = 0
    gaps: int = 0


def stream_session(sim, sink, rate: float = 100.0, ticks: int | None = None,
                   buffer_capacity: int = 32) -> StreamStats:
    """Drive `sim` at `rate` and feed encoded frames to `sink`.

    sink.write(bytes) returns False while stalled (the message is retried
    later; meanwhile frames accumulate and the oldest fall out of the
    bounded buffer, marked by a gap message). sink raising SinkClosed ends
    the stream cleanly. Runs unpaced: one sim tick per iteration.
    """
    if not rate > 0:
        raise ValueError("rate must be > 0")
    if ticks is None:
        ticks = int(round(rate))
    buffer = FrameBuffer(buffer_capacity)
    stats = StreamStats()
    pending: bytes | None = None

    def drain() -> None:
        nonlocal pending
        while True:
            if pending is None:
                try:
                    pending = buffer.pop()
                except SinkClosed:
                    raise
            if pending is None:
                return
            if not sink.write(pending):
                return
            if b'"type":"gap"' in pending:
                stats.gaps += 1
            else:
                stats.frames_delivered += 1
            pending = None

    try:
        for _ in range(ticks):
            frame = sim.step()
            buffer.push(frame.t, encode_frame(frame))
            stats.frames_emitted += 1
            drain()
        drain()
    except SinkClosed:
        pass
    return stats


# --- session record -----------------------------------------------------------


class RecordError(ValueError):
    """A session record file failed to parse."""


@dataclass
class SessionRecord:
    """Deterministic capture of one session: config, commands, frames."""

    config: dict[str, Any]
    frames: list[TelemetryFrame]
    commands: list[tuple[int, dict[str, Any]]]  # (tick applied, wire form)

    @property
    def contact_events(self) -> list[ContactEvent]:
        out = []
        for frame in self.frames:
            out.extend(e for e in frame.events if isinstance(e, ContactEvent))
        return out

    @property
    def duration(self) -> float:
        return self.frames[-1].t if self.frames else 0.0

    def save(self, path: str) -> None:
        with open(path, "wb") as handle:
            header = {
                "type": "record_header",
                "protocol_version": PROTOCOL_VERSION,
                "config": self.config,
            }
            handle.write(encode_body(header) + b"\n")
            for tick, command in self.commands:
                entry = {"type": "command_at",
                         "protocol_version": PROTOCOL_VERSION,
                         "tick": tick, "command": command}
                handle.write(encode_body(entry) + b"\n")
            for frame in self.frames:
                handle.write(encode_body(frame_to_wire(frame)) + b"\n")

    @classmethod
    def load(cls, path: str) -> "SessionRecord":
        config: dict[str, Any] | None = None
        frames: list[TelemetryFrame] = []
        commands: list[tuple[int, dict[str, Any]]] = []
        try:
            with open(path, "rb") as handle:
                lines = handle.read().splitlines()
        except OSError as exc:
            raise RecordError(f"cannot read record: {exc}") from exc
        for number, line in enumerate(lines, start=1):
            if not line.strip():
                continue
            try:
                body = decode_body(line)
            except MalformedMessage as exc:
                raise RecordError(f"line {number}: {exc}") from exc
            kind = body["type"]
            if kind == "record_header":
                config = body.get("config")
            elif kind == "command_at":
                try:
                    commands.append((body["tick"], body["command"]))
                except KeyError as exc:
                    raise RecordError(f"line {number}: {exc}") from exc
            elif kind == "frame":
                try:
                    frames.append(frame_from_wire(body))
                except MalformedMessage as exc:
                    raise RecordError(f"line {number}: {exc}") from exc
            else:
                raise RecordError(f"line {number}: unknown entry '{kind}'")
        if config is None:
            raise RecordError("record has no header")
        return cls(config=config, frames=frames, commands=commands)


# --- statistics ----------------------------------------------------------------


@dataclass(frozen=True)
class DeviationStats:
    """Attitude deviation from setpoint over a window, in degrees."""

    signal: str
    max_abs: float
    std_dev: float
    mean: float
    samples: int


_SIGNAL_INDEX = {"roll": 0, "pitch": 1}


def compute_stats(
    record: SessionRecord,
    signal: str,
    window: tuple[float, float] | None = None,
    setpoint: float = 0.0,
) -> DeviationStats:
    """Deviation statistics of roll or pitch over [t0, t1] (degrees).

    std_dev is the population standard deviation (divide by N).
    """
    if signal not in _SIGNAL_INDEX:
        raise ValueError(f"unknown signal '{signal}'")
    index = _SIGNAL_INDEX[signal]
    t0, t1 = window if window is not None else (-math.inf, math.inf)
    values = np.array(
        [
            math.degrees(frame.drone_attitude[index] - setpoint)
            for frame in record.frames
            if t0 <= frame.t <= t1
        ]
    )
    if values.size == 0:
        raise EmptyWindow(f"no frames in window [{t0}, {t1}]")
    return DeviationStats(
        signal=signal,
        max_abs=float(np.max(np.abs(values))),
        std_dev=float(np.std(values)),
        mean=float(np.mean(values)),
        samples=int(values.size),
    )


# Deviations reported from the original hardware flight trials, used only
# to label comparison columns in analysis reports (max_abs, std) degrees.
REFERENCE_TRIALS = {
    "gui": {"roll": (5.22, 0.99), "pitch": (9.38, 3.51)},
    "vr": {"roll": (None, 0.83), "pitch": (7.15, 2.03)},
}


# --- CSV export -----------------------------------------------------------------

CSV_COLUMNS = ["t", "x_grip", "z_grip", "t1", "t2", "t3", "roll_deg",
               "pitch_deg", "force_l", "force_r", "event"]


def export_csv(record: SessionRecord, path: str) -> None:
    """Write one row per frame; numbers carry 9 significant digits."""
    if not record.frames:
        raise ValueError("record has no frames")

    def fmt(value: float) -> str:
        return format(value, ".9g")

    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(",".join(CSV_COLUMNS) + "\n")
        for frame in record.frames:
            events = ";".join(
                e.kind for e in frame.events if isinstance(e, ContactEvent)
            )
            row = [
                fmt(frame.t),
                fmt(frame.grip_pose.x),
                fmt(frame.grip_pose.z),
                fmt(frame.torques.t1),
                fmt(frame.torques.t2),
                fmt(frame.torques.t3),
                fmt(math.degrees(frame.drone_attitude[0])),
                fmt(math.degrees(frame.drone_attitude[1])),
                fmt(frame.forces[0]),
                fmt(frame.forces[1]),
                events,
            ]
            handle.write(",".join(row) + "\n")
