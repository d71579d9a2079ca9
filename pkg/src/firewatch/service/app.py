"""HTTP front of the monitoring service.

Device-facing endpoints (``/packages``, frequency poll) authenticate by
envelope cryptography, not bearer tokens; everything operator-facing
needs a token from ``/auth/login``.  ``/events`` is a Server-Sent
Events stream of assessment/alert/declaration/frequency-change log
entries with seamless resume via ``Last-Event-ID`` or ``?since=``.
"""
from __future__ import annotations

import asyncio
import json
import logging
import threading
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, HTTPException, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, StreamingResponse
from fastapi.staticfiles import StaticFiles
from starlette.concurrency import run_in_threadpool

from ..errors import ConfigError, UnknownDeviceError
from ..fuzzy import RiskLevel
from .auth import Authenticator, TokenInfo
from .eventlog import LogEntry
from .pipeline import IngestPipeline

log = logging.getLogger(__name__)

SSE_KEEPALIVE_S = 15.0


class EventBus:
    """Fan-out of pipeline log entries to SSE subscribers.

    ``publish`` may be called from any thread; it hops onto each
    subscriber's event loop.
    """

    def __init__(self):
        self._subs: dict[int, tuple[asyncio.Queue, asyncio.AbstractEventLoop]] = {}
        self._next_id = 0
        self._lock = threading.Lock()

    def publish(self, entry: LogEntry) -> None:
        with self._lock:
            targets = list(self._subs.values())
        for queue, loop in targets:
            loop.call_soon_threadsafe(queue.put_nowait, entry)

    def subscribe(self) -> tuple[int, asyncio.Queue]:
        queue: asyncio.Queue = asyncio.Queue()
        loop = asyncio.get_running_loop()
        with self._lock:
            sub_id = self._next_id = self._next_id + 1
            self._subs[sub_id] = (queue, loop)
        return sub_id, queue

    def unsubscribe(self, sub_id: int) -> None:
        with self._lock:
            self._subs.pop(sub_id, None)


def _error(status: int, code: str, message: str) -> HTTPException:
    return HTTPException(status_code=status,
                         detail={"code": code, "message": message})


def _parse_when(value: Optional[str], name: str) -> Optional[datetime]:
    if value is None or value == "":
        return None
    try:
        if value.lstrip("-").isdigit():
            return datetime.fromtimestamp(int(value), tz=timezone.utc)
        dt = datetime.fromisoformat(value)
        return dt if dt.tzinfo else dt.replace(tzinfo=timezone.utc)
    except (ValueError, OverflowError, OSError):
        raise _error(400, "malformed", f"cannot parse {name}={value!r} as a time")


def create_app(
    pipeline: IngestPipeline,
    authenticator: Authenticator,
    bus: Optional[EventBus] = None,
    static_dir: Optional[str | Path] = None,
) -> FastAPI:
    """Wire routes around an existing pipeline and authenticator.

    The caller must have constructed ``pipeline`` with
    ``publish=bus.publish`` for the event stream to carry live entries.
    """
    bus = bus or EventBus()
    app = FastAPI(title="forest risk monitor", docs_url=None, redoc_url=None)
    app.state.pipeline = pipeline
    app.state.authenticator = authenticator
    app.state.bus = bus

    # -- error shaping -------------------------------------------------

    @app.exception_handler(HTTPException)
    async def _http_error(request: Request, exc: HTTPException):
        if isinstance(exc.detail, dict) and "code" in exc.detail:
            body = exc.detail
        else:
            body = {"code": "error", "message": str(exc.detail)}
        return JSONResponse(body, status_code=exc.status_code)

    @app.exception_handler(RequestValidationError)
    async def _validation_error(request: Request, exc: RequestValidationError):
        return JSONResponse({"code": "malformed", "message": str(exc.errors())},
                            status_code=400)

    # -- auth helpers --------------------------------------------------

    def _token_from(request: Request) -> str:
        header = request.headers.get("authorization", "")
        if header.lower().startswith("bearer "):
            return header[7:].strip()
        return request.query_params.get("token", "")

    def _require(request: Request) -> TokenInfo:
        info = authenticator.check(_token_from(request))
        if info is None:
            raise _error(401, "unauthorized", "missing or invalid token")
        return info

    # -- authentication ------------------------------------------------

    @app.post("/auth/login")
    async def login(body: dict):
        username = str(body.get("username", ""))
        password = str(body.get("password", ""))
        issued = await run_in_threadpool(authenticator.login, username, password)
        if issued is None:
            raise _error(401, "bad-credentials", "username or password rejected")
        token, info = issued
        return {"token": token, "role": info.role,
                "expires_at": int(info.expires_at.timestamp())}

    # -- device-facing -------------------------------------------------

    @app.post("/packages")
    async def ingest(request: Request):
        raw = await request.body()
        if not raw:
            raise _error(400, "malformed", "empty package body")
        result = await run_in_threadpool(pipeline.ingest_envelope, raw)
        if result.status == "rejected":
            raise _error(result.http_status, result.code, result.reason)
        body = {"status": result.status, "package_id": result.package_id}
        if result.assessment is not None:
            body["assessment"] = result.assessment.to_dict()
            body["alert"] = result.alert.to_dict() if result.alert else None
        return body

    @app.get("/devices/{device_id}/frequency")
    async def poll_frequency(device_id: str):
        try:
            pipeline.registry.get(device_id)
        except UnknownDeviceError as exc:
            raise _error(404, "unknown-device", str(exc))
        period = pipeline.poll_frequency(device_id)
        return {"device_id": device_id, "period_s": period}

    # -- operator: queries ---------------------------------------------

    @app.get("/areas")
    async def areas(request: Request):
        _require(request)
        return pipeline.area_summaries()

    @app.get("/areas/{area_id}")
    async def area(request: Request, area_id: str):
        _require(request)
        try:
            return pipeline.area_detail(area_id)
        except KeyError:
            raise _error(404, "unknown-area", f"no data for area {area_id!r}")

    @app.get("/areas/{area_id}/measurements")
    async def area_measurements(request: Request, area_id: str,
                                limit: int = 1000):
        _require(request)
        since = _parse_when(request.query_params.get("from"), "from")
        until = _parse_when(request.query_params.get("to"), "to")
        if limit < 1:
            raise _error(400, "malformed", f"limit must be positive, got {limit}")
        try:
            return pipeline.measurements(area_id, since=since, until=until,
                                         limit=limit)
        except KeyError:
            raise _error(404, "unknown-area", f"no data for area {area_id!r}")

    @app.get("/alerts")
    async def alerts(request: Request, state: Optional[str] = None,
                     area: Optional[str] = None):
        _require(request)
        if state is not None and state not in ("active", "superseded", "cleared"):
            raise _error(400, "malformed", f"unknown alert state {state!r}")
        return pipeline.list_alerts(state_filter=state, area_id=area)

    @app.get("/stats")
    async def stats(request: Request):
        _require(request)
        data = pipeline.stats()
        data["rejection_log"] = data["rejection_log"][-20:]
        return data

    # -- operator: actions ---------------------------------------------

    @app.post("/areas/{area_id}/declarations")
    async def declare(request: Request, area_id: str, body: dict):
        _require(request)
        try:
            level = RiskLevel.parse(str(body.get("level", "")))
            ttl_s = int(body.get("ttl_s", 0))
        except (KeyError, ValueError, ConfigError) as exc:
            raise _error(400, "malformed", str(exc))
        try:
            return pipeline.declare_risk(area_id, level, ttl_s)
        except (ValueError, ConfigError) as exc:
            raise _error(400, "malformed", str(exc))

    @app.put("/devices/{device_id}/frequency")
    async def set_frequency(request: Request, device_id: str, body: dict):
        _require(request)
        try:
            period_s = int(body.get("period_s", 0))
        except (TypeError, ValueError):
            raise _error(400, "malformed", f"bad period_s {body.get('period_s')!r}")
        try:
            setting = pipeline.set_frequency(device_id, period_s)
        except UnknownDeviceError as exc:
            raise _error(404, "unknown-device", str(exc))
        except ValueError as exc:
            raise _error(400, "malformed", str(exc))
        return setting.to_dict()

    # -- event stream --------------------------------------------------

    def _sse_frame(entry: LogEntry) -> str:
        data = json.dumps(entry.payload, sort_keys=True, separators=(",", ":"))
        return f"id: {entry.seq}\nevent: {entry.kind}\ndata: {data}\n\n"

    @app.get("/events")
    async def events(request: Request):
        _require(request)
        since_raw = request.headers.get("last-event-id") \
            or request.query_params.get("since") or "0"
        try:
            since = int(since_raw)
        except ValueError:
            raise _error(400, "malformed", f"bad resume position {since_raw!r}")

        async def stream():
            sub_id, queue = bus.subscribe()
            try:
                last = since
                backlog = pipeline.eventlog.entries(
                    since=since, kinds=IngestPipeline.STREAM_KINDS)
                for entry in backlog:
                    yield _sse_frame(entry)
                    last = entry.seq
                while True:
                    try:
                        entry = await asyncio.wait_for(
                            queue.get(), timeout=SSE_KEEPALIVE_S)
                    except asyncio.TimeoutError:
                        yield ": keep-alive\n\n"
                        continue
                    if entry.seq <= last:
                        continue  # already sent during backlog replay
                    last = entry.seq
                    yield _sse_frame(entry)
            finally:
                bus.unsubscribe(sub_id)

        return StreamingResponse(stream(), media_type="text/event-stream",
                                 headers={"Cache-Control": "no-store",
                                          "X-Accel-Buffering": "no"})

    # -- optional bundled dashboard ------------------------------------

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=str(static_dir), html=True),
                  name="ui")
        log.info("serving dashboard from %s under /ui", static_dir)

    return app
