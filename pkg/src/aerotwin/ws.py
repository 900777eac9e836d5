"""Minimal server-side WebSocket layer (RFC 6455).

Just enough for the cockpit transport: HTTP upgrade handshake, masked
client frames (text/binary, fragmentation, ping/pong, close), unmasked
server frames. One WebSocket text frame carries one protocol message
body (no length prefix; the socket provides framing).
"""

from __future__ import annotations

import base64
import hashlib
import socket
import struct

_GUID = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11"

OP_CONT = 0x0
OP_TEXT = 0x1
OP_BINARY = 0x2
OP_CLOSE = 0x8
OP_PING = 0x9
OP_PONG = 0xA


class WebSocketError(ConnectionError):
    pass


def accept_key(client_key: str) -> str:
    digest = hashlib.sha1((client_key + _GUID).encode("ascii")).digest()
    return base64.b64encode(digest).decode("ascii")


def _recv_exact(sock: socket.socket, n: int) -> bytes:
    chunks = bytearray()
    while len(chunks) < n:
        chunk = sock.recv(n - len(chunks))
        if not chunk:
            raise WebSocketError("connection closed mid-frame")
        chunks.extend(chunk)
    return bytes(chunks)


def perform_handshake(sock: socket.socket, initial: bytes = b"") -> None:
    """Read the HTTP upgrade request and answer 101. Raises on anything else."""
    request = bytearray(initial)
    while b"\r\n\r\n" not in request:
        if len(request) > 16384:
            raise WebSocketError("oversized handshake request")
        chunk = sock.recv(4096)
        if not chunk:
            raise WebSocketError("connection closed during handshake")
        request.extend(chunk)

    head = bytes(request).split(b"\r\n\r\n", 1)[0].decode("latin-1")
    lines = head.split("\r\n")
    headers: dict[str, str] = {}
    for line in lines[1:]:
        if ":" in line:
            name, value = line.split(":", 1)
            headers[name.strip().lower()] = value.strip()

    if "websocket" not in headers.get("upgrade", "").lower():
        raise WebSocketError("not a websocket upgrade request")
    key = headers.get("sec-websocket-key")
    if not key:
        raise WebSocketError("missing Sec-WebSocket-Key")

    response = (
        "HTTP/1.1 101 Switching Protocols\r\n"
        "Upgrade: websocket\r\n"
        "Connection: Upgrade\r\n"
        f"Sec-WebSocket-Accept: {accept_key(key)}\r\n"
        "\r\n"
    )
    sock.sendall(response.encode("latin-1"))


class WebSocketConnection:
    """Blocking message-level wrapper over an upgraded socket."""

    def __init__(self, sock: socket.socket):
        self._sock = sock
        self._closed = False

    def send_message(self, payload: bytes) -> None:
        self._send_frame(OP_TEXT, payload)

    def _send_frame(self, opcode: int, payload: bytes) -> None:
        if self._closed:
            raise WebSocketError("connection closed")
        header = bytearray([0x80 | opcode])
        n = len(payload)
        if n < 126:
            header.append(n)
        elif n < 1 << 16:
            header.append(126)
            header.extend(struct.pack(">H", n))
        else:
            header.append(127)
            header.extend(struct.pack(">Q", n))
        self._sock.sendall(bytes(header) + payload)

    def recv_message(self) -> bytes | None:
        """Next text/binary payload; None once the peer closes."""
        fragments = bytearray()
        while True:
            first = self._sock.recv(1)
            if not first:
                return None
            b0 = first[0]
            b1 = _recv_exact(self._sock, 1)[0]
            fin = bool(b0 & 0x80)
            opcode = b0 & 0x0F
            masked = bool(b1 & 0x80)
            length = b1 & 0x7F
            if length == 126:
                length = struct.unpack(">H", _recv_exact(self._sock, 2))[0]
            elif length == 127:
                length = struct.unpack(">Q", _recv_exact(self._sock, 8))[0]
            if length > 16 * 1024 * 1024:
                raise WebSocketError("oversized frame")
            mask = _recv_exact(self._sock, 4) if masked else b""
            payload = _recv_exact(self._sock, length) if length else b""
            if masked:
                payload = bytes(b ^ mask[i % 4] for i, b in enumerate(payload))

            if opcode == OP_PING:
                self._send_frame(OP_PONG, payload)
                continue
            if opcode == OP_PONG:
                continue
            if opcode == OP_CLOSE:
                if not self._closed:
                    try:
                        self._send_frame(OP_CLOSE, payload[:2])
                    except OSError:
                        pass
                    self._closed = True
                return None
            if opcode in (OP_TEXT, OP_BINARY, OP_CONT):
                fragments.extend(payload)
                if fin:
                    return bytes(fragments)
                continue
            raise WebSocketError(f"unsupported opcode {opcode}")

    def close(self) -> None:
        if not self._closed:
            self._closed = True
            try:
                self._send_frame(OP_CLOSE, struct.pack(">H", 1000))
            except OSError:
                pass
