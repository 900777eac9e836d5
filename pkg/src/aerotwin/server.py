"""Network serving: the simulation loop plus telemetry sessions.

One process runs one Simulator. Clients connect to a single TCP port;
connections opening with an HTTP GET are upgraded to WebSocket (the
cockpit's browser transport), anything else speaks raw length-prefixed
messages. Each session starts with a hello/welcome handshake, after
which frames flow outward through a bounded per-session buffer (slow
consumers lose frames, marked by gap messages) while commands flow
inward through an unbounded queue that is never dropped. The first
session asking for the control role gets it; everyone else observes.
"""

from __future__ import annotations

import logging
import socket
import threading
import time
from collections import deque
from typing import Any

from aerotwin import ws
from aerotwin.config import Config
from aerotwin.simulation import Simulator
from aerotwin.telemetry import (
    PROTOCOL_VERSION,
    FrameBuffer,
    MalformedMessage,
    MessageSplitter,
    SessionRecord,
    SinkClosed,
    command_from_wire,
    decode_body,
    encode_body,
    encode_frame,
    encode_message,
)

log = logging.getLogger("aerotwin.server")


class PortInUse(OSError):
    pass


def _welcome_body(config: Config, role: str, granted: bool) -> dict[str, Any]:
    geom = config.geometry
    limits = config.limits
    obj = config.scene_object
    return {
        "type": "welcome",
        "protocol_version": PROTOCOL_VERSION,
        "role": role,
        "requested_role_granted": granted,
        "rate_hz": config.rate_hz,
        "command_rate_hz": config.command_rate_hz,
        "geometry": {"l1": geom.l1, "l2": geom.l2, "l3": geom.l3,
                     "l_dis": geom.l_dis},
        "limits": {
            "theta": list(limits.theta),
            "beta": list(limits.beta),
            "alpha": list(limits.alpha),
            "wrist_roll": list(limits.wrist_roll),
        },
        "jog_max_step": config.jog_max_step,
        "object": {"x": obj.x, "z": obj.z, "size": obj.size},
        "setpoint": {"x": config.setpoint.position[0],
                     "y": config.setpoint.position[1],
                     "z": config.setpoint.position[2],
                     "yaw": config.setpoint.yaw},
        "initial_pose": {"x": config.initial_pose.x,
                         "z": config.initial_pose.z,
                         "phi": config.initial_pose.phi},
    }


def _error_body(code: str, message: str) -> dict[str, Any]:
    return {"type": "error", "protocol_version": PROTOCOL_VERSION,
            "code": code, "message": message}


class _RawTransport:
    """Length-prefixed messages straight over TCP."""

    def __init__(self, sock: socket.socket):
        self._sock = sock
        self._splitter = MessageSplitter()

    def send_body(self, body_bytes: bytes) -> None:
        self._sock.sendall(
            str(len(body_bytes)).encode("ascii") + b"\n" + body_bytes
        )

    def recv_bodies(self):
        while True:
            data = self._sock.recv(65536)
            if not data:
                return
            yield from self._splitter.feed(data)

    def close(self) -> None:
        try:
            self._sock.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        self._sock.close()


class _WsTransport:
    """One protocol message body per WebSocket text frame."""

    def __init__(self, sock: socket.socket, conn: ws.WebSocketConnection):
        self._sock = sock
        self._conn = conn

    def send_body(self, body_bytes: bytes) -> None:
        self._conn.send_message(body_bytes)

    def recv_bodies(self):
        while True:
            payload = self._conn.recv_message()
            if payload is None:
                return
            yield decode_body(payload)

    def close(self) -> None:
        self._conn.close()
        try:
            self._sock.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        self._sock.close()


class _Session:
    _ids = 0

    def __init__(self, server: "TelemetryServer", transport):
        _Session._ids += 1
        self.id = _Session._ids
        self.server = server
        self.transport = transport
        self.buffer = FrameBuffer(server.buffer_capacity)
        self.role = "observer"
        self.ready = threading.Event()
        self.writer = threading.Thread(target=self._write_loop, daemon=True,
                                       name=f"session-{self.id}-writer")
        self.reader = threading.Thread(target=self._read_loop, daemon=True,
                                       name=f"session-{self.id}-reader")

    def start(self) -> None:
        self.writer.start()
        self.reader.start()

    def send_body(self, body: dict[str, Any]) -> None:
        try:
            self.transport.send_body(encode_body(body))
        except OSError:
            pass

    def _write_loop(self) -> None:
        try:
            while True:
                try:
                    message = self.buffer.pop(timeout=0.25)
                except SinkClosed:
                    return
                if message is None:
                    continue
                # buffered messages are length-prefixed; transports that
                # frame natively get the bare body
                body_bytes = message.split(b"\n", 1)[1]
                self.transport.send_body(body_bytes)
        except OSError:
            pass
        finally:
            self.server._drop_session(self)

    def _read_loop(self) -> None:
        try:
            for body in self.transport.recv_bodies():
                self._handle(body)
        except (MalformedMessage, ws.WebSocketError) as exc:
            self.send_body(_error_body("malformed", str(exc)))
        except OSError:
            pass
        finally:
            self.server._drop_session(self)

    def _handle(self, body: dict[str, Any]) -> None:
        kind = body.get("type")
        if kind == "hello":
            wanted = body.get("role", "observer")
            granted = self.server._grant_role(self, wanted)
            self.role = granted
            self.send_body(
                _welcome_body(self.server.config, granted, granted == wanted)
            )
            self.ready.set()
            return
        if kind == "command":
            if not self.ready.is_set():
                self.send_body(_error_body("no-handshake",
                                           "send hello before commands"))
                return
            if self.role != "control":
                self.send_body(_error_body("not-control",
                                           "observer sessions cannot command"))
                return
            try:
                command = command_from_wire(body)
            except MalformedMessage as exc:
                self.send_body(_error_body("malformed", str(exc)))
                return
            self.server._enqueue_command(command)
            return
        if kind == "bye":
            raise OSError("client said bye")
        self.send_body(_error_body("unknown-type", f"unknown type '{kind}'"))


class TelemetryServer:
    """Simulation loop plus session fan-out on one TCP port."""

    def __init__(
        self,
        config: Config,
        port: int | None = None,
        pace: bool = True,
        duration: float | None = None,
        record_path: str | None = None,
        wait_sessions: int = 0,
        buffer_capacity: int = 32,
    ):
        self.config = config
        self.port = config.port if port is None else port
        self.pace = pace
        self.duration_ticks = (
            None if duration is None else int(round(duration * config.rate_hz))
        )
        self.record_path = record_path
        self.wait_sessions = wait_sessions
        self.buffer_capacity = buffer_capacity

        self.sim = Simulator(config)
        self._frames = [] if record_path else None
        self._commands: deque = deque()
        self._sessions: list[_Session] = []
        self._control: _Session | None = None
        self._lock = threading.Lock()
        self._stop = threading.Event()
        self._listener: socket.socket | None = None
        self._threads: list[threading.Thread] = []

    # -- lifecycle -------------------------------------------------------------

    def start(self) -> None:
        listener = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        listener.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        try:
            listener.bind(("127.0.0.1", self.port))
        except OSError as exc:
            listener.close()
            raise PortInUse(f"port {self.port} is in use: {exc}") from exc
        listener.listen(16)
        if self.port == 0:
            self.port = listener.getsockname()[1]
        self._listener = listener

        accept = threading.Thread(target=self._accept_loop, daemon=True,
                                  name="accept")
        loop = threading.Thread(target=self._sim_loop, daemon=True,
                                name="sim-loop")
        self._threads = [accept, loop]
        accept.start()
        loop.start()
        log.info("serving on 127.0.0.1:%d (pace=%s)", self.port, self.pace)

    def stop(self) -> None:
        self._stop.set()

    def join(self, timeout: float | None = None) -> None:
        for thread in self._threads:
            thread.join(timeout)

    def serve_forever(self) -> None:
        """Block until the loop finishes (duration reached or stop())."""
        try:
            while not self._stop.wait(0.1):
                pass
        except KeyboardInterrupt:
            self.stop()
        self.join(timeout=5.0)
        self._shutdown_sessions()
        if self.record_path is not None:
            self.write_record(self.record_path)

    def write_record(self, path: str) -> None:
        record = SessionRecord(
            config=self.config.snapshot,
            frames=list(self._frames or []),
            commands=list(self.sim.command_log),
        )
        record.save(path)
        log.info("wrote session record to %s", path)

    # -- internals ----------------------------------------------------------------

    def _grant_role(self, session: _Session, wanted: str) -> str:
        with self._lock:
            if wanted == "control" and self._control is None:
                self._control = session
                return "control"
            return "observer"

    def _enqueue_command(self, command) -> None:
        self._commands.append(command)

    def _drop_session(self, session: _Session) -> None:
        with self._lock:
            if session in self._sessions:
                self._sessions.remove(session)
            if self._control is session:
                self._control = None  # arm holds position (stale-input rule)
        session.buffer.close()
        try:
            session.transport.close()
        except OSError:
            pass

    def _accept_loop(self) -> None:
        assert self._listener is not None
        self._listener.settimeout(0.2)
        while not self._stop.is_set():
            try:
                sock, _addr = self._listener.accept()
            except socket.timeout:
                continue
            except OSError:
                break
            threading.Thread(target=self._open_session, args=(sock,),
                             daemon=True, name="session-open").start()
        self._listener.close()

    def _open_session(self, sock: socket.socket) -> None:
        try:
            sock.settimeout(10.0)
            head = sock.recv(4, socket.MSG_PEEK)
            if head.startswith(b"GET"):
                ws.perform_handshake(sock)
                transport = _WsTransport(sock, ws.WebSocketConnection(sock))
            else:
                transport = _RawTransport(sock)
            sock.settimeout(None)
        except (OSError, ws.WebSocketError) as exc:
            log.warning("handshake failed: %s", exc)
            sock.close()
            return
        session = _Session(self, transport)
        with self._lock:
            self._sessions.append(session)
        session.start()

    def _sim_loop(self) -> None:
        config = self.config
        dt = config.dt
        while self.wait_sessions and not self._stop.is_set():
            with self._lock:
                ready = sum(1 for s in self._sessions if s.ready.is_set())
            if ready >= self.wait_sessions:
                break
            time.sleep(0.005)

        start = time.monotonic()
        ticks = 0
        while not self._stop.is_set():
            if self.duration_ticks is not None and ticks >= self.duration_ticks:
                break
            while self._commands:
                self.sim.submit(self._commands.popleft())
            frame = self.sim.step()
            if self._frames is not None:
                self._frames.append(frame)
            data = encode_frame(frame)
            with self._lock:
                sessions = list(self._sessions)
            for session in sessions:
                if session.ready.is_set():
                    session.buffer.push(frame.t, data)
            ticks += 1
            if self.pace:
                deadline = start + ticks * dt
                delay = deadline - time.monotonic()
                if delay > 0:
                    time.sleep(delay)
        self._finish_streams()
        self._stop.set()

    def _finish_streams(self) -> None:
        end = encode_message({"type": "end", "protocol_version": PROTOCOL_VERSION,
                              "t": self.sim.time})
        with self._lock:
            sessions = list(self._sessions)
        for session in sessions:
            if session.ready.is_set():
                session.buffer.push(self.sim.time, end)
        deadline = time.monotonic() + 2.0
        for session in sessions:
            while len(session.buffer) and time.monotonic() < deadline:
                time.sleep(0.01)
        for session in sessions:
            session.buffer.close()

    def _shutdown_sessions(self) -> None:
        with self._lock:
            sessions = list(self._sessions)
        for session in sessions:
            self._drop_session(session)
