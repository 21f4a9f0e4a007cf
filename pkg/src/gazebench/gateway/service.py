"""The gateway service: one UI connection drives one annotation session.

GatewayCore holds the protocol logic free of any transport so tests can
drive it message-by-message; WorkbenchService wraps it in an asyncio server
speaking both framings from protocol.py.
"""

from __future__ import annotations

import asyncio
import base64
import logging
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Tuple

from gazebench.errors import GazebenchError, ProtocolError
from gazebench.gateway.protocol import (
    LengthDelimitedTransport,
    MESSAGE_KINDS,
    WebSocketTransport,
    decode_message,
    encode_message,
    none_to_nan,
)
from gazebench.gateway.render import render_view_png
from gazebench.proposal.engine import ProposalPolicy
from gazebench.proposal.model import Mode, SliceStatus
from gazebench.session.driver import CT_PRESETS, WorkbenchSession
from gazebench.session.io import append_metadata, emit_session, session_dir_for
from gazebench.session.io import tracker_sample_from_dict
from gazebench.session.model import SessionHeader, ViewModality
from gazebench.studies import load_study, resolve_study
from gazebench.volume.core import DisplayWindow
from gazebench.volume.mip import mip_stack

log = logging.getLogger(__name__)

STATUS_COLORS = {
    "candidate": "blue",
    "extrapolated": "orange",
    "accepted": "green",
    "rejected": "red",
}


@dataclass
class ServiceConfig:
    data_root: Path
    host: str = "127.0.0.1"
    port: int = 8765
    policy: ProposalPolicy = field(default_factory=ProposalPolicy)
    monitor: Tuple[int, int] = (2560, 1440)
    window_dim: Tuple[int, int] = (1024, 1024)

    @classmethod
    def from_file(cls, path, data_root: Path, **overrides) -> "ServiceConfig":
        """Service config from a JSON file: policy knobs, monitor, window.

        Recognized keys: policy.{filter_iou, resize_factor, threshold_floor,
        propagation_cap}, monitor, window_dim, host, port.
        """
        import json

        doc = json.loads(Path(path).read_text())
        policy = ProposalPolicy(**doc.get("policy", {}))
        kwargs = dict(
            data_root=data_root,
            host=doc.get("host", cls.host),
            port=int(doc.get("port", cls.port)),
            policy=policy,
            monitor=tuple(doc.get("monitor", cls.monitor)),
            window_dim=tuple(doc.get("window_dim", cls.window_dim)),
        )
        kwargs.update(overrides)
        return cls(**kwargs)


class GatewayCore:
    """Per-connection message handling; all replies are returned, not sent."""

    def __init__(self, config: ServiceConfig):
        self.config = config
        self.session: Optional[WorkbenchSession] = None
        self.reader_id: Optional[str] = None
        self.reader_role: str = "trainee"
        self.study_path: Optional[str] = None
        self._last_seq: Optional[int] = None
        self._mip_cache = None
        self.closed = False
        self.saved_files: List[Path] = []

    # -- plumbing -------------------------------------------------------------

    def _ack(self, seq: int, payload: Optional[dict] = None) -> dict:
        return {"kind": "ack", "seq": seq, "payload": payload or {}}

    def _error(self, seq: int, message: str) -> dict:
        return {"kind": "error", "seq": seq, "payload": {"message": message}}

    def handle(self, msg: dict) -> List[dict]:
        """Process one decoded client message; returns replies in order."""
        kind = msg.get("kind")
        seq = msg.get("seq")
        if not isinstance(seq, int) or (self._last_seq is not None and seq <= self._last_seq):
            raise ProtocolError(f"seq must increase monotonically, got {seq!r}")
        self._last_seq = seq
        if kind not in MESSAGE_KINDS:
            raise ProtocolError(f"unknown message kind {kind!r}")
        payload = msg.get("payload") or {}
        handler = getattr(self, "_on_" + kind.replace(".", "_"))
        try:
            return handler(seq, payload)
        except GazebenchError as exc:
            # engine/session errors go back as error messages, not disconnects
            return [self._error(seq, str(exc))]
        except (KeyError, ValueError, TypeError) as exc:
            return [self._error(seq, f"bad payload for {kind}: {exc}")]

    def _require_session(self) -> WorkbenchSession:
        if self.session is None or self.closed:
            raise GazebenchError("no open session")
        return self.session

    # -- message handlers -------------------------------------------------------

    def _on_ping(self, seq: int, payload: dict) -> List[dict]:
        return [self._ack(seq, {"version": 1})]

    def _on_session_open(self, seq: int, payload: dict) -> List[dict]:
        if self.session is not None and not self.closed:
            return [self._error(seq, "a session is already open on this connection")]
        study_path = payload["study_path"]
        try:
            study_dir = resolve_study(study_path, self.config.data_root)
            study = load_study(study_dir)
        except FileNotFoundError as exc:
            return [self._error(seq, str(exc))]
        monitor = tuple(payload.get("monitor", self.config.monitor))
        window_dim = tuple(payload.get("window_dim", self.config.window_dim))
        header = SessionHeader(
            monitor_width=int(monitor[0]),
            monitor_height=int(monitor[1]),
            display_window_dim=(int(window_dim[0]), int(window_dim[1])),
            case_difficulty=int(payload.get("case_difficulty", 0)),
            ui_experience=int(payload.get("ui_experience", 0)),
            comment=str(payload.get("comment", "")),
        )
        window_rect = payload.get("window_rect")
        self.session = WorkbenchSession(
            study.pet,
            study.ct,
            header,
            window_rect=tuple(window_rect) if window_rect else None,
            policy=self.config.policy,
        )
        self.reader_id = str(payload.get("reader_id", "anonymous"))
        self.reader_role = str(payload.get("reader_role", "trainee"))
        self.study_path = study_path
        self.closed = False
        self._mip_cache = None
        pet = study.pet
        return [
            self._broadcast(),
            self._ack(
                seq,
                {
                    "study_path": study_path,
                    "dims": list(pet.dims),
                    "spacing_mm": list(pet.spacing),
                    "n_slices": pet.nz,
                    "window_rect": list(self.session.window_rect),
                },
            ),
        ]

    def _on_session_close(self, seq: int, payload: dict) -> List[dict]:
        session = self._require_session()
        save = bool(payload.get("save", False))
        recording = session.close(save=save)
        self.closed = True
        files: List[str] = []
        if save and recording is not None:
            out_dir = session_dir_for(
                self.config.data_root, self.reader_id, self.study_path
            )
            paths = emit_session(recording, out_dir)
            append_metadata(self.config.data_root, self.reader_id, self.study_path)
            self.saved_files = paths
            files = [str(p) for p in paths]
        return [self._ack(seq, {"saved": bool(files), "files": files})]

    def _on_gaze_batch(self, seq: int, payload: dict) -> List[dict]:
        session = self._require_session()
        ticks = payload["ticks"]
        samples = [tracker_sample_from_dict(none_to_nan(t)) for t in ticks]
        samples.sort(key=lambda s: s.system_time_stamp)
        for sample in samples:
            session.ingest_gaze(sample)
        return [self._ack(seq, {"ingested": len(samples)})]

    def _on_key_press(self, seq: int, payload: dict) -> List[dict]:
        session = self._require_session()
        warning = session.handle_key(int(payload["code"]), int(payload["timestamp_us"]))
        return [self._broadcast(), self._ack(seq, {"warning": warning})]

    def _on_view_set(self, seq: int, payload: dict) -> List[dict]:
        session = self._require_session()
        modality = payload.get("modality")
        session.set_view(
            slice_number=payload.get("slice_number"),
            modality=ViewModality(modality) if modality else None,
            mip_angle=payload.get("mip_angle"),
            norm=payload.get("norm"),
            window_rect=payload.get("window_rect"),
        )
        return [self._broadcast(), self._slice_image(), self._ack(seq, {})]

    def _on_image_get(self, seq: int, payload: dict) -> List[dict]:
        self._require_session()
        return [self._slice_image(), self._ack(seq, {})]

    def _on_state_get(self, seq: int, payload: dict) -> List[dict]:
        self._require_session()
        return [self._broadcast(), self._ack(seq, {})]

    # -- server-initiated payloads ------------------------------------------------

    def _boxes_for_broadcast(self) -> List[dict]:
        session = self.session
        slice_number = session.slice_number
        boxes = []
        state = session.engine.state
        for lesion in state.accepted:
            sb = lesion.slice_boxes.get(slice_number)
            if sb is None:
                continue
            status = (
                "accepted" if sb.status is SliceStatus.VALIDATED else "extrapolated"
            )
            boxes.append(
                {
                    "slice_number": slice_number,
                    "bbox": [sb.box.x, sb.box.y, sb.box.w, sb.box.h],
                    "status": status,
                    "color": STATUS_COLORS[status],
                    "lesion_id": lesion.lesion_id,
                }
            )
        for s, box in state.rejected_boxes:
            if s != slice_number:
                continue
            boxes.append(
                {
                    "slice_number": s,
                    "bbox": [box.x, box.y, box.w, box.h],
                    "status": "rejected",
                    "color": STATUS_COLORS["rejected"],
                    "lesion_id": None,
                }
            )
        if state.pending is not None and state.pending.candidate.slice_number == slice_number:
            cand = state.pending.candidate
            boxes.append(
                {
                    "slice_number": slice_number,
                    "bbox": [cand.box.x, cand.box.y, cand.box.w, cand.box.h],
                    "status": "candidate",
                    "color": STATUS_COLORS["candidate"],
                    "lesion_id": None,
                }
            )
        return boxes

    def _broadcast(self) -> dict:
        session = self.session
        paused = session.user_paused or session.engine.state.mode is Mode.CONFIRMATION
        return {
            "kind": "state.broadcast",
            "seq": 0,
            "payload": {
                "revision": session.engine.revision,
                "recording": "red" if paused else "green",
                "pending": session.engine.state.mode is Mode.CONFIRMATION,
                "pending_at_limit": bool(
                    session.engine.state.pending and session.engine.state.pending.at_limit
                ),
                "slice_number": session.slice_number,
                "modality": session.modality.value,
                "mip_angle": session.mip_angle,
                "norm": [session.pet_norm[0], session.pet_norm[1]],
                "ct_window": session.ct_preset,
                "n_lesions": len(session.engine.state.accepted),
                "boxes": self._boxes_for_broadcast(),
                "warnings": session.warnings[-3:],
            },
        }

    def _slice_image(self) -> dict:
        session = self.session
        if session.modality is ViewModality.MIP and self._mip_cache is None:
            self._mip_cache = mip_stack(session.pet)
        level, width = CT_PRESETS[session.ct_preset]
        png, size = render_view_png(
            session.modality,
            session.slice_number,
            session.pet,
            session.ct,
            DisplayWindow(*session.pet_norm),
            DisplayWindow(level - width / 2.0, level + width / 2.0),
            mip_stack_cache=self._mip_cache,
            mip_angle=session.mip_angle,
        )
        return {
            "kind": "slice.image",
            "seq": 0,
            "payload": {
                "slice_number": session.slice_number,
                "modality": session.modality.value,
                "mip_angle": session.mip_angle,
                "width": size[0],
                "height": size[1],
                "png_base64": base64.b64encode(png).decode("ascii"),
            },
        }


class WorkbenchService:
    """Asyncio server accepting one UI connection per session."""

    def __init__(self, config: ServiceConfig):
        self.config = config
        self._server: Optional[asyncio.AbstractServer] = None

    async def start(self) -> None:
        self._server = await asyncio.start_server(
            self._handle_connection, self.config.host, self.config.port
        )

    @property
    def port(self) -> int:
        return self._server.sockets[0].getsockname()[1]

    async def serve_forever(self) -> None:
        await self.start()
        async with self._server:
            await self._server.serve_forever()

    async def close(self) -> None:
        if self._server is not None:
            self._server.close()
            await self._server.wait_closed()

    async def _handle_connection(
        self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter
    ) -> None:
        core = GatewayCore(self.config)
        try:
            try:
                first = await reader.readexactly(4)
            except asyncio.IncompleteReadError:
                writer.close()
                return
            if first.startswith(b"GET"):
                transport = await WebSocketTransport.handshake(reader, writer, first)
            else:
                # the sniffed bytes are the first frame's length prefix
                transport = LengthDelimitedTransport(reader, writer)
                frame = await self._read_primed_frame(transport, first)
                if frame is None:
                    await transport.close()
                    return
                if not await self._dispatch(core, transport, frame):
                    await transport.close()
                    return
            while True:
                frame = await transport.read_frame()
                if frame is None:
                    break
                if not await self._dispatch(core, transport, frame):
                    break
            await transport.close()
        except (ConnectionError, asyncio.IncompleteReadError):
            pass
        except ProtocolError as exc:
            log.warning("protocol error: %s", exc)
            writer.close()

    async def _read_primed_frame(
        self, transport: LengthDelimitedTransport, head: bytes
    ) -> Optional[bytes]:
        (length,) = struct.unpack(">I", head)
        try:
            return await transport.reader.readexactly(length)
        except (asyncio.IncompleteReadError, ConnectionError):
            return None

    async def _dispatch(self, core: GatewayCore, transport, frame: bytes) -> bool:
        """Handle one frame; False closes the connection (protocol violation)."""
        try:
            msg = decode_message(frame)
            replies = core.handle(msg)
        except ProtocolError as exc:
            await transport.write_frame(
                encode_message(
                    {"kind": "error", "seq": -1, "payload": {"message": str(exc)}}
                )
            )
            return False
        for reply in replies:
            await transport.write_frame(encode_message(reply))
        return True
