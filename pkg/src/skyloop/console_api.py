"""Console gateway: mission metadata over HTTP plus one duplex socket.

The socket pushes ``frame`` messages at the mission's UI refresh cadence
and answers each ``command`` with a ``command_result``. A slow reader is
never allowed to queue frames unboundedly; the per-connection mailbox
holds only the newest unsent frame, so late consumers skip straight to
the present (latest wins).

Message shapes on the socket:

* server -> client: ``{"type": "frame", ...}`` (one self-contained view
  of the mission) and ``{"type": "command_result", "seq", "result"}``.
* client -> server: ``{"type": "command", "seq", "command": {...}}``
  where the inner command carries its affordance kind and the version
  stamp of the frame that enabled it.
"""

from __future__ import annotations

import asyncio
import json
import threading
from dataclasses import dataclass, field

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from starlette.concurrency import run_in_threadpool

from .common import dumps_compact
from .gcs import GcsService
from .mission import traceability_report


class FrameMailbox:
    """One-slot frame buffer: writers overwrite, the reader drains."""

    def __init__(self):
        self._cond = threading.Condition()
        self._frame: dict | None = None
        self._closed = False

    def put(self, frame: dict) -> None:
        with self._cond:
            self._frame = frame  # an unread frame is stale the moment a newer one exists
            self._cond.notify_all()

    def close(self) -> None:
        with self._cond:
            self._closed = True
            self._cond.notify_all()

    @property
    def closed(self) -> bool:
        with self._cond:
            return self._closed

    def take(self, timeout: float = 0.05) -> dict | None:
        """Newest unseen frame, or None once the timeout lapses."""
        with self._cond:
            if self._frame is None and not self._closed:
                self._cond.wait(timeout)
            frame, self._frame = self._frame, None
            return frame


@dataclass
class ConsoleGateway:
    """Serialized console access to one live mission service.

    The gateway's lock is shared with whatever loop drives the clock, so
    command handling never interleaves with a delivery step; the bus and
    models stay single-writer even with concurrent console connections.
    """

    gcs: GcsService
    lock: threading.RLock = field(default_factory=threading.RLock)

    def execute(self, command: dict) -> dict:
        with self.lock:
            return self.gcs.handle_command(command)

    def mission_metadata(self) -> dict:
        spec = self.gcs.spec
        with self.lock:
            return {
                "name": spec.name,
                "lifecycle": self.gcs.lifecycle,
                "clock": self.gcs.clock_mode,
                "seed": self.gcs.seed,
                "duration_ms": spec.duration_ms,
                "ui_refresh_ms": spec.ui_refresh_ms,
                "origin": spec.origin.to_record(),
                "search_area": [p.to_record() for p in spec.search_area],
                "uavs": [
                    {"id": f.name, "color": f.color} for f in spec.uavs
                ],
                "views": {v.name: v.max_displayed for v in spec.views},
                "coordination": {
                    "waiting_period_ms": spec.coordination.waiting_period_ms,
                    "alternation_threshold": spec.coordination.alternation_threshold,
                    "window_ms": spec.coordination.window_ms,
                },
                "service_classes": dict(spec.service_classes),
                "teaming": traceability_report(),
            }


def _result(seq, result: dict) -> str:
    return dumps_compact({"type": "command_result", "seq": seq, "result": result})


def build_app(gateway: ConsoleGateway) -> FastAPI:
    app = FastAPI(title=gateway.gcs.spec.name)

    @app.get("/mission")
    def mission() -> dict:
        return gateway.mission_metadata()

    @app.websocket("/ws")
    async def console(ws: WebSocket) -> None:
        # subscribe before the handshake finishes so no frame produced
        # after the client sees the connection as open can be missed
        mailbox = FrameMailbox()
        gateway.gcs.subscribe_frames(mailbox.put)
        send_lock = asyncio.Lock()

        async def send(text: str) -> None:
            async with send_lock:  # frames and results share one socket
                await ws.send_text(text)

        async def pump() -> None:
            while not mailbox.closed:
                frame = await run_in_threadpool(mailbox.take)
                if frame is not None:
                    await send(dumps_compact(frame))

        pusher = None
        try:
            await ws.accept()
            pusher = asyncio.ensure_future(pump())
            while True:
                raw = await ws.receive_text()
                try:
                    msg = json.loads(raw)
                except json.JSONDecodeError:
                    await send(
                        _result(None, {"accepted": False, "reason": "not JSON"})
                    )
                    continue
                seq = msg.get("seq") if isinstance(msg, dict) else None
                if (
                    not isinstance(msg, dict)
                    or msg.get("type") != "command"
                    or not isinstance(msg.get("command"), dict)
                ):
                    await send(
                        _result(
                            seq,
                            {"accepted": False, "reason": "expected a command message"},
                        )
                    )
                    continue
                outcome = await run_in_threadpool(gateway.execute, msg["command"])
                await send(_result(seq, outcome))
        except WebSocketDisconnect:
            pass
        finally:
            mailbox.close()
            gateway.gcs.unsubscribe_frames(mailbox.put)
            if pusher is not None:
                pusher.cancel()

    return app
