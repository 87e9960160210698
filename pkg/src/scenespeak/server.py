"""Wire service: one session behind a WebSocket endpoint.

Every WebSocket message is one JSON frame. A client opens with a hello
frame and gets back the session info plus a full scene snapshot (which is
also how a reconnecting client resyncs mid-stream). Ingest frames mutate
the session under a lock; event frames fan out to every connected client
in emission order. A malformed frame costs only the connection that sent
it.
"""
from __future__ import annotations

import json
import threading
from typing import Any

from websockets.sync.server import Server, ServerConnection, serve as ws_serve

from .session import IngestError, Session, SessionConfig, TraceRecorder

PROTOCOL_VERSION = 1


class SessionServer:
    def __init__(self, config: SessionConfig, host: str = "127.0.0.1",
                 port: int = 8765, recorder: TraceRecorder | None = None) -> None:
        self.config = config
        self.host = host
        self.port = port
        self.session = Session(config, recorder=recorder)
        self._lock = threading.Lock()
        self._clients: list[ServerConnection] = []
        self._server: Server | None = None
        self.session.subscribe(self._broadcast)

    # -- fan-out -----------------------------------------------------------

    def _broadcast(self, event: dict[str, Any]) -> None:
        data = json.dumps(event)
        for ws in list(self._clients):
            try:
                ws.send(data)
            except Exception:
                self._drop(ws)

    def _drop(self, ws: ServerConnection) -> None:
        if ws in self._clients:
            self._clients.remove(ws)

    # -- per-connection ------------------------------------------------------

    def _hello_reply(self) -> dict[str, Any]:
        return {
            "type": "hello",
            "protocol": PROTOCOL_VERSION,
            "session": {
                "mode": self.config.mode,
                "task": self.config.task,
                "revision": self.session.scene.revision,
                "metrics": self.session.metrics_report(),
            },
            "scene": self.session.scene.to_file_doc(),
        }

    def _handle(self, ws: ServerConnection) -> None:
        try:
            raw = ws.recv()
            doc = json.loads(raw)
            if not isinstance(doc, dict) or doc.get("type") != "hello":
                raise IngestError("first frame must be hello")
        except (json.JSONDecodeError, IngestError) as exc:
            self._refuse(ws, str(exc))
            return
        except Exception:
            return
        with self._lock:
            ws.send(json.dumps(self._hello_reply()))
            self._clients.append(ws)
        try:
            for raw in ws:
                try:
                    doc = json.loads(raw)
                except json.JSONDecodeError as exc:
                    raise IngestError(f"frame is not JSON: {exc}") from exc
                if isinstance(doc, dict) and doc.get("type") == "session.info":
                    ws.send(json.dumps(self._hello_reply()))
                    continue
                with self._lock:
                    self.session.ingest(doc)
        except IngestError as exc:
            self._refuse(ws, str(exc))
        except Exception:
            pass
        finally:
            with self._lock:
                self._drop(ws)

    def _refuse(self, ws: ServerConnection, detail: str) -> None:
        with self._lock:
            self._drop(ws)
        try:
            ws.send(json.dumps({"type": "event.error", "detail": detail}))
            ws.close(code=1008, reason="bad frame")
        except Exception:
            pass

    # -- lifecycle -------------------------------------------------------------

    def start(self) -> None:
        """Bind and serve on a background thread; returns once accepting."""
        self._server = ws_serve(self._handle, self.host, self.port)
        self.port = self._server.socket.getsockname()[1]
        thread = threading.Thread(target=self._server.serve_forever, daemon=True)
        thread.start()

    def serve_forever(self) -> None:
        self._server = ws_serve(self._handle, self.host, self.port)
        self.port = self._server.socket.getsockname()[1]
        self._server.serve_forever()

    def stop(self) -> None:
        if self._server is not None:
            self._server.shutdown()
            self._server = None
        self.session.close()
