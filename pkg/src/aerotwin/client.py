"""Small blocking client for the raw TCP protocol (tests and tooling)."""

from __future__ import annotations

import socket
from typing import Any, Iterator

from aerotwin.operator import OperatorCommand
from aerotwin.telemetry import (
    PROTOCOL_VERSION,
    MessageSplitter,
    command_to_wire,
    encode_body,
)


class TelemetryClient:
    def __init__(self, port: int, host: str = "127.0.0.1",
                 timeout: float = 10.0):
        self._sock = socket.create_connection((host, port), timeout=timeout)
        self._splitter = MessageSplitter()
        self.welcome: dict[str, Any] | None = None

    def hello(self, role: str = "observer") -> dict[str, Any]:
        self.send_body({"type": "hello", "protocol_version": PROTOCOL_VERSION,
                        "role": role})
        for body in self.bodies():
            if body["type"] == "welcome":
                self.welcome = body
                return body
            if body["type"] == "error":
                raise ConnectionError(body.get("message", "handshake rejected"))
        raise ConnectionError("server closed during handshake")

    def send_body(self, body: dict[str, Any]) -> None:
        payload = encode_body(body)
        self._sock.sendall(str(len(payload)).encode("ascii") + b"\n" + payload)

    def send_command(self, command: OperatorCommand) -> None:
        self.send_body(command_to_wire(command))

    def bodies(self) -> Iterator[dict[str, Any]]:
        """Yield decoded message bodies until the connection closes."""
        while True:
            try:
                data = self._sock.recv(65536)
            except socket.timeout:
                return
            if not data:
                return
            yield from self._splitter.feed(data)

    def collect_until_end(self) -> list[dict[str, Any]]:
        out = []
        for body in self.bodies():
            out.append(body)
            if body["type"] == "end":
                break
        return out

    def close(self) -> None:
        try:
            self._sock.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        self._sock.close()

    def __enter__(self) -> "TelemetryClient":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
