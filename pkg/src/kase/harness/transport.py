"""Message transports and the transcript recorder.

Two interchangeable transports carry the same JSON messages: an in-process
channel that still round-trips every message through JSON text, and a local
TCP socket with a 4-byte big-endian length prefix and one request per
connection. Both record identical transcripts.
"""

from __future__ import annotations

import json
import socket
import socketserver
import struct
import threading
from dataclasses import dataclass
from typing import Callable

from ..errors import ProtocolError

MAX_FRAME = 1 << 28


@dataclass(frozen=True)
class TranscriptEntry:
    msg_id: int
    src: str
    dst: str
    payload: dict


class Transcript:
    """Append-only message log; safe to append from several threads."""

    def __init__(self):
        self._entries: list[TranscriptEntry] = []
        self._lock = threading.Lock()

    def record(self, src: str, dst: str, payload: dict) -> int:
        with self._lock:
            msg_id = len(self._entries)
            self._entries.append(TranscriptEntry(msg_id, src, dst, payload))
            return msg_id

    @property
    def entries(self) -> list[TranscriptEntry]:
        with self._lock:
            return list(self._entries)

    def __len__(self) -> int:
        with self._lock:
            return len(self._entries)


Tamper = Callable[[dict], dict]


class _Endpoint:
    def __init__(self, src: str, dst: str, transcript: Transcript | None = None, tamper: Tamper | None = None):
        self.src = src
        self.dst = dst
        self.transcript = transcript
        self.tamper = tamper

    def __call__(self, msg: dict) -> dict:
        return self.send(msg)

    def send(self, msg: dict) -> dict:
        if self.tamper is not None:
            msg = self.tamper(msg)
        wire = json.dumps(msg).encode()
        if self.transcript is not None:
            self.transcript.record(self.src, self.dst, json.loads(wire))
        reply_wire = self._exchange(wire)
        reply = json.loads(reply_wire)
        if self.transcript is not None:
            self.transcript.record(self.dst, self.src, reply)
        return reply

    def _exchange(self, wire: bytes) -> bytes:
        raise NotImplementedError


class InProcessEndpoint(_Endpoint):
    def __init__(self, server, src, dst, transcript=None, tamper=None):
        super().__init__(src, dst, transcript, tamper)
        self.server = server

    def _exchange(self, wire: bytes) -> bytes:
        return json.dumps(self.server.handle(json.loads(wire))).encode()


def _read_exact(sock: socket.socket, n: int) -> bytes:
    buf = bytearray()
    while len(buf) < n:
        chunk = sock.recv(n - len(buf))
        if not chunk:
            raise ProtocolError("connection closed mid-frame")
        buf.extend(chunk)
    return bytes(buf)


def read_frame(sock: socket.socket) -> bytes:
    (length,) = struct.unpack(">I", _read_exact(sock, 4))
    if length > MAX_FRAME:
        raise ProtocolError(f"frame of {length} bytes exceeds limit")
    return _read_exact(sock, length)


def write_frame(sock: socket.socket, body: bytes) -> None:
    sock.sendall(struct.pack(">I", len(body)) + body)


class SocketEndpoint(_Endpoint):
    def __init__(self, address: tuple[str, int], src, dst, transcript=None, tamper=None, timeout: float = 30.0):
        super().__init__(src, dst, transcript, tamper)
        self.address = address
        self.timeout = timeout

    def _exchange(self, wire: bytes) -> bytes:
        try:
            with socket.create_connection(self.address, timeout=self.timeout) as sock:
                write_frame(sock, wire)
                return read_frame(sock)
        except OSError as exc:
            raise ProtocolError(f"{self.dst} at {self.address}: {exc}") from None


class _Handler(socketserver.BaseRequestHandler):
    def handle(self):
        try:
            msg = json.loads(read_frame(self.request))
        except (ProtocolError, json.JSONDecodeError) as exc:
            write_frame(self.request, json.dumps({"type": "error", "code": "format", "message": str(exc)}).encode())
            return
        reply = self.server.role_server.handle(msg)
        write_frame(self.request, json.dumps(reply).encode())


class _TCPServer(socketserver.ThreadingTCPServer):
    daemon_threads = True
    allow_reuse_address = True


class SocketServer:
    """Runs a role server on a local TCP port in a background thread."""

    def __init__(self, role_server, host: str = "127.0.0.1", port: int = 0):
        self._tcp = _TCPServer((host, port), _Handler)
        self._tcp.role_server = role_server
        self._thread = threading.Thread(target=self._tcp.serve_forever, daemon=True)
        self._thread.start()

    @property
    def address(self) -> tuple[str, int]:
        return self._tcp.server_address[:2]

    def serve_forever(self) -> None:
        self._thread.join()

    def close(self) -> None:
        self._tcp.shutdown()
        self._tcp.server_close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
