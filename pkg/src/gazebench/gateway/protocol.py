"""Gateway wire protocol: length-delimited JSON with a websocket upgrade.

Every client command is {"kind": str, "seq": int, "payload": {...}} and
receives exactly one ack or error echoing its seq; server-initiated
broadcasts use seq 0 and carry the state revision. A command's side-effect
messages (broadcasts, slice images) are written before its ack, so a client
that awaited the ack has already seen them. Raw-socket clients use 4-byte
big-endian length prefixes; browsers connect with a standard websocket
handshake on the same port.
"""

from __future__ import annotations

import asyncio
import base64
import hashlib
import json
import math
import struct
from typing import Optional

from gazebench.errors import ProtocolError

PROTOCOL_VERSION = 1

MESSAGE_KINDS = {
    "session.open": 1,
    "session.close": 1,
    "gaze.batch": 1,
    "key.press": 1,
    "view.set": 1,
    "image.get": 1,
    "state.get": 1,
    "ping": 1,
}
SERVER_KINDS = {"ack": 1, "error": 1, "state.broadcast": 1, "slice.image": 1}

_WS_GUID = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11"


def nan_to_none(obj):
    """JSON-safe deep copy: NaN floats become null."""
    if isinstance(obj, float) and math.isnan(obj):
        return None
    if isinstance(obj, dict):
        return {k: nan_to_none(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [nan_to_none(v) for v in obj]
    return obj


def none_to_nan(obj):
    """Inverse of nan_to_none for numeric payload fields (lists of floats)."""
    if obj is None:
        return float("nan")
    if isinstance(obj, dict):
        return {k: none_to_nan(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [none_to_nan(v) for v in obj]
    return obj


def encode_message(msg: dict) -> bytes:
    return json.dumps(nan_to_none(msg), separators=(",", ":")).encode("utf-8")


def decode_message(raw: bytes) -> dict:
    try:
        msg = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ProtocolError(f"malformed JSON frame: {exc}") from exc
    if not isinstance(msg, dict) or "kind" not in msg or "seq" not in msg:
        raise ProtocolError("message must be an object with kind and seq")
    return msg


class LengthDelimitedTransport:
    """4-byte big-endian length prefix framing over an asyncio stream."""

    def __init__(self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter):
        self.reader = reader
        self.writer = writer

    async def read_frame(self) -> Optional[bytes]:
        try:
            head = await self.reader.readexactly(4)
        except (asyncio.IncompleteReadError, ConnectionError):
            return None
        (length,) = struct.unpack(">I", head)
        if length > 64 * 1024 * 1024:
            raise ProtocolError(f"frame too large: {length} bytes")
        try:
            return await self.reader.readexactly(length)
        except (asyncio.IncompleteReadError, ConnectionError):
            return None

    async def write_frame(self, payload: bytes) -> None:
        self.writer.write(struct.pack(">I", len(payload)) + payload)
        await self.writer.drain()

    async def close(self) -> None:
        self.writer.close()


class WebSocketTransport:
    """Minimal RFC 6455 server side: text frames, client masking, ping/pong."""

    def __init__(self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter):
        self.reader = reader
        self.writer = writer

    @staticmethod
    async def handshake(
        reader: asyncio.StreamReader, writer: asyncio.StreamWriter, first_chunk: bytes
    ) -> "WebSocketTransport":
        data = bytearray(first_chunk)
        while b"\r\n\r\n" not in data:
            chunk = await reader.read(4096)
            if not chunk:
                raise ProtocolError("connection closed during websocket handshake")
            data.extend(chunk)
        header_text = bytes(data).split(b"\r\n\r\n", 1)[0].decode("latin-1")
        key = None
        for line in header_text.split("\r\n")[1:]:
            name, _, value = line.partition(":")
            if name.strip().lower() == "sec-websocket-key":
                key = value.strip()
        if key is None:
            raise ProtocolError("websocket handshake missing Sec-WebSocket-Key")
        accept = base64.b64encode(
            hashlib.sha1((key + _WS_GUID).encode("ascii")).digest()
        ).decode("ascii")
        writer.write(
            (
                "HTTP/1.1 101 Switching Protocols\r\n"
                "Upgrade: websocket\r\n"
                "Connection: Upgrade\r\n"
                f"Sec-WebSocket-Accept: {accept}\r\n\r\n"
            ).encode("ascii")
        )
        await writer.drain()
        return WebSocketTransport(reader, writer)

    async def read_frame(self) -> Optional[bytes]:
        buffer = bytearray()
        while True:
            try:
                head = await self.reader.readexactly(2)
            except (asyncio.IncompleteReadError, ConnectionError):
                return None
            fin = head[0] & 0x80
            opcode = head[0] & 0x0F
            masked = head[1] & 0x80
            length = head[1] & 0x7F
            if length == 126:
                (length,) = struct.unpack(">H", await self.reader.readexactly(2))
            elif length == 127:
                (length,) = struct.unpack(">Q", await self.reader.readexactly(8))
            mask = await self.reader.readexactly(4) if masked else b"\x00" * 4
            payload = bytearray(await self.reader.readexactly(length))
            if masked:
                for i in range(length):
                    payload[i] ^= mask[i % 4]
            if opcode == 0x8:  # close
                return None
            if opcode == 0x9:  # ping -> pong
                await self._write_raw(0xA, bytes(payload))
                continue
            if opcode in (0x1, 0x2, 0x0):
                buffer.extend(payload)
                if fin:
                    return bytes(buffer)
                continue
            # ignore pongs and unknown control frames

    async def _write_raw(self, opcode: int, payload: bytes) -> None:
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
        self.writer.write(bytes(header) + payload)
        await self.writer.drain()

    async def write_frame(self, payload: bytes) -> None:
        await self._write_raw(0x1, payload)

    async def close(self) -> None:
        try:
            await self._write_raw(0x8, b"")
        except (ConnectionError, RuntimeError):
            pass
        self.writer.close()
