"""Minimal topic-based publish-subscribe bus for the weld cell.

One broker, any number of clients. Transport is a TCP stream carrying
length-prefixed UTF-8 JSON frames: 4-byte big-endian length, then a JSON
object. Data frames are protocol messages
``{topic, command, payload, msg_id, timestamp}``; control frames are
``{"subscribe": topic}`` / ``{"unsubscribe": topic}`` (acked with
``{"subscribed"|"unsubscribed": topic}``). The broker forwards a data frame
byte-for-byte to every subscriber of its topic, exactly once, in
per-publisher order, and never forwards a frame it could not fully decode.

The same JSON objects are also served over a WebSocket port (one message per
text frame, no length prefix) so a browser HMI can join the cell. TLS is a
deployment concern: the framing is transport-agnostic and can be wrapped in
an encrypted channel.
"""

import base64
import hashlib
import itertools
import json
import queue
import socket
import struct
import threading
import time
from dataclasses import dataclass, field
from enum import Enum

from .errors import (AddressInUse, ConnectionLost, DecodeError, FrameTooLarge,
                     ProtocolError)

MAX_FRAME_BYTES = 16 * 1024 * 1024
DEFAULT_TOPIC = "weldcell/job"

_WS_GUID = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11"


class Command(Enum):
    """Message set exchanged between operator HMI and robot handler.

    ProgramUpload replaces the original FTP side channel (program text rides
    in the payload; the FTP_OK / FTP_NO_OK acknowledgements are kept).
    ErrorReport carries capture/sequencing faults, which the original set
    lacked.
    """

    InterfaceReady = "InterfaceReady"
    HandlerRobotReady = "HandlerRobotReady"
    Capture = "Capture"
    AnswerCapture = "AnswerCapture"
    ProgramUpload = "ProgramUpload"
    FTP_OK = "FTP_OK"
    FTP_NO_OK = "FTP_NO_OK"
    Welding = "Welding"
    EndWelding = "EndWelding"
    Pickup = "Pickup"
    Pickuped = "Pickuped"
    ErrorReport = "ErrorReport"


# commands published by the operator side; everything else is handler-side
OPERATOR_COMMANDS = frozenset({
    Command.InterfaceReady, Command.Capture, Command.ProgramUpload,
    Command.Welding, Command.Pickup,
})


@dataclass(frozen=True)
class ProtocolMessage:
    topic: str
    command: Command
    payload: dict = field(default_factory=dict)
    msg_id: int = 0
    timestamp: int = 0  # ms since epoch

    def __post_init__(self):
        if not isinstance(self.payload, dict):
            raise ValueError("payload must be a JSON object")


def encode(message):
    """ProtocolMessage -> length-prefixed frame bytes."""
    body = json.dumps({
        "topic": message.topic,
        "command": message.command.value,
        "payload": message.payload,
        "msg_id": message.msg_id,
        "timestamp": message.timestamp,
    }, separators=(",", ":"), sort_keys=True).encode("utf-8")
    if len(body) > MAX_FRAME_BYTES:
        raise FrameTooLarge(f"frame of {len(body)} bytes exceeds 16 MiB")
    return struct.pack(">I", len(body)) + body


def decode(data):
    """Frame bytes -> ProtocolMessage. Rejects truncated or trailing bytes."""
    if len(data) < 4:
        raise DecodeError("frame shorter than its length prefix")
    (length,) = struct.unpack(">I", data[:4])
    if length > MAX_FRAME_BYTES:
        raise FrameTooLarge(f"declared frame length {length} exceeds 16 MiB")
    if len(data) != 4 + length:
        raise DecodeError(f"frame declares {length} bytes, carries {len(data) - 4}")
    return decode_body(data[4:])


def decode_body(body):
    """JSON frame body -> ProtocolMessage (shared by TCP and WebSocket)."""
    try:
        obj = json.loads(body.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise DecodeError(f"invalid JSON frame: {exc}") from None
    if not isinstance(obj, dict):
        raise DecodeError("frame is not a JSON object")
    try:
        return ProtocolMessage(
            topic=obj["topic"],
            command=Command(obj["command"]),
            payload=obj["payload"],
            msg_id=int(obj["msg_id"]),
            timestamp=int(obj["timestamp"]),
        )
    except (KeyError, ValueError, TypeError) as exc:
        raise DecodeError(f"bad protocol message: {exc}") from None


# --- low-level stream helpers -------------------------------------------------

def _read_exact(sock, n):
    buf = b""
    while len(buf) < n:
        try:
            chunk = sock.recv(n - len(buf))
        except OSError:
            return None
        if not chunk:
            return None
        buf += chunk
    return buf


def _read_frame_body(sock):
    """One frame body from a length-prefixed stream; None on EOF/overflow."""
    header = _read_exact(sock, 4)
    if header is None:
        return None
    (length,) = struct.unpack(">I", header)
    if length > MAX_FRAME_BYTES:
        return None  # stream is poisoned; caller closes the session
    return _read_exact(sock, length)


def _send_with_prefix(sock, body, lock):
    with lock:
        sock.sendall(struct.pack(">I", len(body)) + body)


# --- WebSocket framing (RFC 6455, server side, text frames only) ---------------

def websocket_accept_value(key):
    digest = hashlib.sha1((key + _WS_GUID).encode("ascii")).digest()
    return base64.b64encode(digest).decode("ascii")


def _ws_handshake(sock):
    data = b""
    while b"\r\n\r\n" not in data:
        chunk = sock.recv(4096)
        if not chunk:
            return False
        data += chunk
        if len(data) > 65536:
            return False
    headers = {}
    for line in data.split(b"\r\n")[1:]:
        if b":" in line:
            k, v = line.split(b":", 1)
            headers[k.strip().lower()] = v.strip()
    key = headers.get(b"sec-websocket-key")
    if key is None:
        return False
    accept = websocket_accept_value(key.decode("ascii"))
    sock.sendall(
        b"HTTP/1.1 101 Switching Protocols\r\n"
        b"Upgrade: websocket\r\n"
        b"Connection: Upgrade\r\n"
        b"Sec-WebSocket-Accept: " + accept.encode("ascii") + b"\r\n\r\n")
    return True


def _ws_read_message(sock):
    """One complete text message (handles continuation, ping, close)."""
    parts = []
    while True:
        head = _read_exact(sock, 2)
        if head is None:
            return None
        fin = bool(head[0] & 0x80)
        opcode = head[0] & 0x0F
        masked = bool(head[1] & 0x80)
        length = head[1] & 0x7F
        if length == 126:
            ext = _read_exact(sock, 2)
            if ext is None:
                return None
            (length,) = struct.unpack(">H", ext)
        elif length == 127:
            ext = _read_exact(sock, 8)
            if ext is None:
                return None
            (length,) = struct.unpack(">Q", ext)
        if length > MAX_FRAME_BYTES:
            return None
        mask = _read_exact(sock, 4) if masked else None
        payload = _read_exact(sock, length) if length else b""
        if payload is None:
            return None
        if mask:
            payload = bytes(b ^ mask[i % 4] for i, b in enumerate(payload))
        if opcode == 0x8:  # close
            return None
        if opcode == 0x9:  # ping -> pong
            _ws_send_raw(sock, payload, opcode=0xA)
            continue
        if opcode == 0xA:  # pong
            continue
        parts.append(payload)
        if fin:
            return b"".join(parts)


def _ws_send_raw(sock, payload, opcode=0x1):
    header = bytes([0x80 | opcode])
    n = len(payload)
    if n < 126:
        header += bytes([n])
    elif n < 65536:
        header += bytes([126]) + struct.pack(">H", n)
    else:
        header += bytes([127]) + struct.pack(">Q", n)
    sock.sendall(header + payload)


# --- broker ---------------------------------------------------------------------

class _Session:
    _ids = itertools.count(1)

    def __init__(self, sock, kind):
        self.id = next(_Session._ids)
        self.sock = sock
        self.kind = kind  # "tcp" | "ws"
        self.send_lock = threading.Lock()

    def send_body(self, body):
        if self.kind == "tcp":
            _send_with_prefix(self.sock, body, self.send_lock)
        else:
            with self.send_lock:
                _ws_send_raw(self.sock, body)

    def close(self):
        try:
            self.sock.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        try:
            self.sock.close()
        except OSError:
            pass


class Broker:
    """Topic router. Serves raw TCP framing and, optionally, WebSocket."""

    def __init__(self, host="127.0.0.1", port=0, ws_port=None):
        self.host = host
        self._want_port = port
        self._want_ws_port = ws_port
        self._listener = None
        self._ws_listener = None
        self._threads = []
        self._sessions = {}
        self._subs = {}  # topic -> list of session ids, insertion ordered
        self._lock = threading.Lock()
        self._running = False

    # address properties are valid after start()
    @property
    def port(self):
        return self._listener.getsockname()[1]

    @property
    def ws_port(self):
        return self._ws_listener.getsockname()[1] if self._ws_listener else None

    @property
    def address(self):
        return (self.host, self.port)

    def start(self):
        self._listener = self._bind(self._want_port)
        if self._want_ws_port is not None:
            try:
                self._ws_listener = self._bind(self._want_ws_port)
            except AddressInUse:
                self._listener.close()
                raise
        self._running = True
        self._spawn(self._accept_loop, self._listener, "tcp")
        if self._ws_listener is not None:
            self._spawn(self._accept_loop, self._ws_listener, "ws")
        return self

    def _bind(self, port):
        try:
            sock = socket.create_server((self.host, port))
        except OSError as exc:
            raise AddressInUse(f"cannot bind {self.host}:{port}: {exc}") from exc
        # closing a listener does not reliably wake a blocked accept();
        # poll instead so stop() returns promptly
        sock.settimeout(0.25)
        return sock

    def _spawn(self, fn, *args):
        t = threading.Thread(target=fn, args=args, daemon=True)
        t.start()
        self._threads.append(t)

    def stop(self):
        self._running = False
        for listener in (self._listener, self._ws_listener):
            if listener is not None:
                listener.close()
        with self._lock:
            sessions = list(self._sessions.values())
        for session in sessions:
            session.close()
        for t in self._threads:
            t.join(timeout=2.0)
        self._threads.clear()

    def __enter__(self):
        return self.start()

    def __exit__(self, *exc):
        self.stop()

    def _accept_loop(self, listener, kind):
        while self._running:
            try:
                sock, _ = listener.accept()
            except socket.timeout:
                continue
            except OSError:
                return
            sock.settimeout(None)  # sessions use blocking reads
            session = _Session(sock, kind)
            if kind == "ws" and not _ws_handshake(sock):
                session.close()
                continue
            with self._lock:
                self._sessions[session.id] = session
            self._spawn(self._session_loop, session)

    def _session_loop(self, session):
        try:
            while self._running:
                if session.kind == "tcp":
                    body = _read_frame_body(session.sock)
                else:
                    body = _ws_read_message(session.sock)
                if body is None:
                    return
                self._handle_body(session, body)
        finally:
            self._drop(session)

    def _handle_body(self, session, body):
        try:
            obj = json.loads(body.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError):
            return  # undecodable: never forwarded
        if isinstance(obj, dict) and ("subscribe" in obj or "unsubscribe" in obj):
            self._handle_control(session, obj)
            return
        try:
            message = decode_body(body)
        except DecodeError:
            return
        self._route(message.topic, body)

    def _handle_control(self, session, obj):
        if "subscribe" in obj:
            topic = obj["subscribe"]
            with self._lock:
                subs = self._subs.setdefault(topic, [])
                if session.id not in subs:
                    subs.append(session.id)
            ack = {"subscribed": topic}
        else:
            topic = obj["unsubscribe"]
            with self._lock:
                subs = self._subs.get(topic, [])
                if session.id in subs:
                    subs.remove(session.id)
            ack = {"unsubscribed": topic}
        try:
            session.send_body(json.dumps(ack).encode("utf-8"))
        except OSError:
            pass

    def _route(self, topic, body):
        with self._lock:
            targets = [self._sessions[sid] for sid in self._subs.get(topic, [])
                       if sid in self._sessions]
        for target in targets:
            try:
                target.send_body(body)
            except OSError:
                pass  # dying session; its reader loop will drop it

    def _drop(self, session):
        with self._lock:
            self._sessions.pop(session.id, None)
            for subs in self._subs.values():
                if session.id in subs:
                    subs.remove(session.id)
        session.close()


# --- client ---------------------------------------------------------------------

class BusClient:
    """Synchronous bus client; safe to publish from several threads.

    Incoming messages land in an internal queue consumed with receive();
    control acknowledgements are handled separately so subscribe() returns
    only once the broker has registered the subscription.
    """

    def __init__(self, host, port, default_topic=DEFAULT_TOPIC, client_id=None):
        self.host = host
        self.port = port
        self.default_topic = default_topic
        self.client_id = client_id or f"client-{id(self):x}"
        self._sock = None
        self._send_lock = threading.Lock()
        self._in_q = queue.Queue()
        self._control_q = queue.Queue()
        self._msg_ids = itertools.count(1)
        self._closed = threading.Event()
        self._reader = None

    def connect(self):
        self._sock = socket.create_connection((self.host, self.port))
        self._reader = threading.Thread(target=self._read_loop, daemon=True)
        self._reader.start()
        return self

    def close(self):
        self._closed.set()
        if self._sock is not None:
            try:
                self._sock.shutdown(socket.SHUT_RDWR)
            except OSError:
                pass
            self._sock.close()

    def __enter__(self):
        return self.connect()

    def __exit__(self, *exc):
        self.close()

    def _read_loop(self):
        while not self._closed.is_set():
            body = _read_frame_body(self._sock)
            if body is None:
                self._closed.set()
                self._in_q.put(None)  # wake any blocked receive()
                return
            try:
                obj = json.loads(body.decode("utf-8"))
            except (UnicodeDecodeError, json.JSONDecodeError):
                continue
            if isinstance(obj, dict) and ("subscribed" in obj or "unsubscribed" in obj):
                self._control_q.put(obj)
                continue
            try:
                self._in_q.put(decode_body(body))
            except DecodeError:
                continue

    def subscribe(self, topic=None, timeout=5.0):
        topic = topic or self.default_topic
        self._send_control({"subscribe": topic})
        self._await_ack("subscribed", topic, timeout)

    def unsubscribe(self, topic=None, timeout=5.0):
        topic = topic or self.default_topic
        self._send_control({"unsubscribe": topic})
        self._await_ack("unsubscribed", topic, timeout)

    def _send_control(self, obj):
        self._send_body(json.dumps(obj).encode("utf-8"))

    def _await_ack(self, key, topic, timeout):
        deadline = time.monotonic() + timeout
        while True:
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                raise ProtocolError(f"no {key} ack for topic {topic!r}")
            try:
                obj = self._control_q.get(timeout=remaining)
            except queue.Empty:
                continue
            if obj.get(key) == topic:
                return

    def _send_body(self, body):
        if self._sock is None or self._closed.is_set():
            raise ConnectionLost("client is not connected")
        try:
            _send_with_prefix(self._sock, body, self._send_lock)
        except OSError as exc:
            raise ConnectionLost(str(exc)) from exc

    def publish(self, command, payload=None, topic=None):
        """Build, stamp and send a message; returns the sent ProtocolMessage."""
        message = ProtocolMessage(
            topic=topic or self.default_topic,
            command=command,
            payload=payload or {},
            msg_id=next(self._msg_ids),
            timestamp=int(time.time() * 1000),
        )
        frame = encode(message)
        self._send_body(frame[4:])
        return message

    def receive(self, timeout=None):
        """Next message for a subscribed topic; None when `timeout` elapses.

        Raises ConnectionLost once the stream is closed and drained.
        """
        if self._closed.is_set() and self._in_q.empty():
            raise ConnectionLost("connection closed")
        try:
            item = self._in_q.get(timeout=timeout)
        except queue.Empty:
            return None
        if item is None:
            raise ConnectionLost("connection closed")
        return item
