"""Networked session service: WebSocket and raw-TCP NDJSON front doors.

Each connection is one session with its own pipeline; sessions are isolated
and processed serially in arrival order. Every session is persisted to a
JSONL file holding a header line plus all inbound and outbound frames in
order, which `replay` can re-run deterministically.
"""

from __future__ import annotations

import asyncio
import base64
import contextlib
import datetime
import json
import logging
from pathlib import Path

from fastapi import FastAPI, WebSocket, WebSocketDisconnect

from .config import PipelineConfig
from .wire import PROTOCOL_VERSION, SessionPipeline, dump_frame

logger = logging.getLogger(__name__)


class SessionWriter:
    """Append-only JSONL log for one session."""

    def __init__(self, path: Path | None, session_id: str, config: PipelineConfig):
        self._fh = None
        if path is not None:
            path.parent.mkdir(parents=True, exist_ok=True)
            self._fh = open(path, "w", encoding="utf-8")
            header = {
                "type": "session_start",
                "session_id": session_id,
                "started_at": datetime.datetime.now(datetime.timezone.utc).isoformat(),
                "protocol_version": PROTOCOL_VERSION,
                "config": config.to_dict(),
            }
            self._fh.write(json.dumps(header, separators=(",", ":")) + "\n")

    def record_inbound(self, line: str) -> None:
        if self._fh is None:
            return
        line = line.strip()
        if not line:
            return
        try:
            json.loads(line)
            self._fh.write(line + "\n")
        except json.JSONDecodeError:
            # keep malformed input replayable without breaking the JSONL file
            wrapped = {
                "type": "raw_in",
                "b64": base64.b64encode(line.encode("utf-8", "replace")).decode(),
            }
            self._fh.write(json.dumps(wrapped, separators=(",", ":")) + "\n")

    def record_frame(self, frame: dict) -> None:
        if self._fh is not None:
            self._fh.write(json.dumps(frame, separators=(",", ":")) + "\n")

    def close(self) -> None:
        if self._fh is not None:
            self._fh.close()
            self._fh = None


class SessionStore:
    def __init__(self, directory: str | Path | None):
        self.directory = Path(directory) if directory is not None else None

    def open(self, session: SessionPipeline) -> SessionWriter:
        path = (
            self.directory / f"{session.session_id}.jsonl"
            if self.directory is not None
            else None
        )
        return SessionWriter(path, session.session_id, session.config)


class SessionRegistry:
    """Tracks live session ids; safe under a single event loop."""

    def __init__(self):
        self.active: set[str] = set()

    def add(self, session_id: str) -> None:
        self.active.add(session_id)

    def remove(self, session_id: str) -> None:
        self.active.discard(session_id)


def _iter_lines(text: str):
    for line in text.split("\n"):
        if line.strip():
            yield line


def create_app(
    config: PipelineConfig | None = None,
    store: SessionStore | None = None,
    registry: SessionRegistry | None = None,
    static_dir: str | Path | None = None,
) -> FastAPI:
    config = config if config is not None else PipelineConfig()
    store = store if store is not None else SessionStore(None)
    registry = registry if registry is not None else SessionRegistry()

    app = FastAPI(title="gazeinspect session service")
    app.state.config = config
    app.state.store = store
    app.state.registry = registry

    @app.websocket("/ws")
    async def gaze_ws(websocket: WebSocket):
        await websocket.accept()
        session = SessionPipeline(config=config.clone())
        writer = store.open(session)
        registry.add(session.session_id)
        try:
            while True:
                text = await websocket.receive_text()
                for line in _iter_lines(text):
                    writer.record_inbound(line)
                    frames, close = session.handle_line(line)
                    for frame in frames:
                        writer.record_frame(frame)
                        await websocket.send_text(dump_frame(frame))
                    if close:
                        await websocket.close(code=1002)
                        return
        except WebSocketDisconnect:
            pass
        finally:
            for frame in session.handle_close():
                writer.record_frame(frame)
            writer.close()
            registry.remove(session.session_id)

    @app.get("/healthz")
    def health():
        return {"status": "ok", "active_sessions": len(registry.active)}

    if static_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app


async def _tcp_connection(
    reader: asyncio.StreamReader,
    writer: asyncio.StreamWriter,
    config: PipelineConfig,
    store: SessionStore,
    registry: SessionRegistry,
) -> None:
    session = SessionPipeline(config=config.clone())
    log = store.open(session)
    registry.add(session.session_id)
    try:
        while True:
            raw = await reader.readline()
            if not raw:
                break
            line = raw.decode("utf-8", "replace")
            log.record_inbound(line)
            frames, close = session.handle_line(line)
            for frame in frames:
                log.record_frame(frame)
                writer.write(dump_frame(frame).encode("utf-8"))
            await writer.drain()
            if close:
                break
    except (ConnectionResetError, asyncio.IncompleteReadError):
        pass
    finally:
        for frame in session.handle_close():
            log.record_frame(frame)
        log.close()
        registry.remove(session.session_id)
        with contextlib.suppress(Exception):
            writer.close()
            await writer.wait_closed()


async def start_tcp_server(
    host: str,
    port: int,
    config: PipelineConfig,
    store: SessionStore,
    registry: SessionRegistry,
) -> asyncio.AbstractServer:
    async def handler(reader, writer):
        await _tcp_connection(reader, writer, config, store, registry)

    server = await asyncio.start_server(handler, host, port)
    logger.info("TCP NDJSON listener on %s:%d", host, port)
    return server


def parse_bind(bind: str) -> tuple[str, int]:
    host, _, port = bind.rpartition(":")
    if not host or not port:
        raise ValueError(f"bind address must be host:port, got {bind!r}")
    return host, int(port)


def serve(
    bind: str,
    config: PipelineConfig | None = None,
    sessions_dir: str | Path | None = None,
    tcp_bind: str | None = None,
    static_dir: str | Path | None = None,
) -> None:
    """Run the WebSocket service (plus the TCP listener) until interrupted."""
    import uvicorn

    config = config if config is not None else PipelineConfig()
    store = SessionStore(sessions_dir)
    registry = SessionRegistry()
    host, port = parse_bind(bind)
    tcp_host, tcp_port = parse_bind(tcp_bind) if tcp_bind else (host, port + 1)

    app = create_app(config, store, registry, static_dir=static_dir)
    uv = uvicorn.Server(uvicorn.Config(app, host=host, port=port, log_level="info"))

    async def main():
        tcp = await start_tcp_server(tcp_host, tcp_port, config, store, registry)
        try:
            await uv.serve()
        finally:
            tcp.close()
            await tcp.wait_closed()

    asyncio.run(main())
