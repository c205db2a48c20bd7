"""Websocket gateway and static UI serving for the station.

One FastAPI app per station: `/ws` streams every bus event as a JSON
frame and accepts command frames back; the operator UI's static assets
are served from a local directory so the whole stack works offline. The
station stays a single logical event loop: client commands are funneled
into it in arrival order on the server's asyncio loop.
"""

from __future__ import annotations

import asyncio
from pathlib import Path

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.staticfiles import StaticFiles

from .linkmodel import round_trip_latency
from .simulation import SessionDriver
from .station import (
    DuplicateCommand,
    LinkEvent,
    SchemaViolation,
    Station,
    TOPIC_ACK,
    TOPIC_GIMBAL,
    TOPIC_SESSION,
    TOPIC_STATS,
    UnknownCommand,
    gateway_decode,
    gateway_encode,
)


def bootstrap_frames(station: Station) -> list[str]:
    """Frames that bring a fresh client up to the current state."""
    snap = station.snapshot()
    now = snap.telemetry[-1].received_at if snap.telemetry else station.config.start_time
    events = [
        LinkEvent(TOPIC_SESSION, station.config.start_time, station.config.to_body()),
        LinkEvent(
            TOPIC_GIMBAL,
            now,
            {
                "az": snap.gimbal.azimuth_deg,
                "el": snap.gimbal.elevation_deg,
                "mode": snap.gimbal.mode,
                "sweep_progress_deg": snap.gimbal.sweep_progress_deg,
            },
        ),
        LinkEvent(
            TOPIC_STATS,
            now,
            {
                "sent": snap.counters.sent,
                "delivered": snap.counters.delivered,
                "lost": snap.counters.lost,
                "success_ratio": snap.success_ratio,
                "avg_latency_ms": round_trip_latency(station.link) * 1000.0,
                "last": None,
            },
        ),
    ]
    return [gateway_encode(e) for e in events]


def create_app(station: Station, static_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="trackstation gateway")
    app.state.station = station

    @app.get("/healthz")
    def healthz() -> dict:
        snap = station.snapshot()
        return {"session": snap.session_id, "mode": snap.mode}

    @app.websocket("/ws")
    async def ws_endpoint(websocket: WebSocket) -> None:
        await websocket.accept()
        loop = asyncio.get_running_loop()
        queue: asyncio.Queue[str] = asyncio.Queue()

        def forward(event: LinkEvent) -> None:
            loop.call_soon_threadsafe(queue.put_nowait, gateway_encode(event))

        station.bus.subscribe("*", forward)
        for frame in bootstrap_frames(station):
            await websocket.send_text(frame)

        async def pump() -> None:
            while True:
                await websocket.send_text(await queue.get())

        sender = asyncio.create_task(pump())
        try:
            while True:
                text = await websocket.receive_text()
                now = _station_now(station)
                try:
                    command = gateway_decode(text)
                    station.handle_command(command, now)
                except (SchemaViolation, UnknownCommand, DuplicateCommand) as exc:
                    # Transport-level nack: not journalled, not a bus ack.
                    await websocket.send_text(
                        gateway_encode(
                            LinkEvent(
                                TOPIC_ACK,
                                now,
                                {"id": _frame_id(text), "status": "error", "detail": str(exc)},
                            )
                        )
                    )
        except WebSocketDisconnect:
            pass
        finally:
            sender.cancel()
            station.bus.unsubscribe("*", forward)

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")
    return app


def _station_now(station: Station) -> float:
    snap = station.snapshot()
    if snap.telemetry:
        return snap.telemetry[-1].received_at
    return station.config.start_time


def _frame_id(text: str) -> str:
    import json

    try:
        return str(json.loads(text).get("body", {}).get("id", ""))
    except Exception:
        return ""


async def serve_session(
    driver: SessionDriver,
    host: str = "127.0.0.1",
    port: int = 8871,
    static_dir: str | Path | None = None,
    realtime: bool = True,
) -> None:
    """Run the closed-loop session while serving the gateway.

    Ticks advance in wall time when ``realtime`` is set; the session runs
    to completion whether or not a client ever connects, then the server
    shuts down cleanly.
    """
    import uvicorn

    app = create_app(driver.station, static_dir)
    config = uvicorn.Config(app, host=host, port=port, log_level="warning")
    server = uvicorn.Server(config)

    async def drive() -> None:
        for k in range(driver.total_ticks):
            driver.step(k)
            if realtime:
                await asyncio.sleep(driver.scenario.dt_s)
            else:
                await asyncio.sleep(0)
        server.should_exit = True

    await asyncio.gather(server.serve(), drive())
