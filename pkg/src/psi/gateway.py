"""REST + WebSocket surface over one shared bus and store.

The bridge and dispatcher roles live in one process by default; the
``role`` flag can restrict an instance to just the REST routes or just
the chat WebSocket so the original two-process topology is still
runnable against a shared data directory.
"""
from __future__ import annotations

import asyncio
import logging
from typing import Any

from fastapi import FastAPI, Request, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse, PlainTextResponse

from .bus import DescriptorError, DuplicateProviderError, UnknownProviderError
from .dispatcher import Condition, Dispatcher
from .errors import UnknownEndpointError, ValidationError
from .runtime import Runtime
from .store import IntegrityError, UnknownModuleError
from .timeutil import parse_ts

logger = logging.getLogger(__name__)

REST_ROUTES = [
    "GET /health",
    "GET /context",
    "GET /modules",
    "POST /modules",
    "GET /state/{toolkit_id}",
    "POST /actions/{toolkit_id}/{endpoint}",
]


def _descriptor_doc(desc) -> dict:
    return {
        "toolkit_id": desc.toolkit_id,
        "display_name": desc.display_name,
        "keywords": sorted(desc.keywords),
        "summary_source": desc.summary_source,
        "endpoints": [
            {
                "name": ep.name,
                "description": ep.description,
                "params": [
                    {"name": p.name, "type": p.type, "required": p.required, "unit": p.unit}
                    for p in ep.params
                ],
            }
            for ep in desc.endpoints
        ],
    }


def _error(status: int, error: str, detail: Any) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": error, "detail": detail})


def create_app(runtime: Runtime, dispatcher: Dispatcher | None = None, role: str = "all") -> FastAPI:
    app = FastAPI(title="psi gateway")
    if dispatcher is None and role in ("all", "ws"):
        dispatcher = Dispatcher(runtime)
    app.state.runtime = runtime
    app.state.dispatcher = dispatcher

    @app.exception_handler(404)
    async def not_found(request: Request, exc):  # noqa: ANN001
        return _error(404, "unknown route", {"path": request.url.path, "routes": REST_ROUTES})

    if role in ("all", "rest"):
        _mount_rest(app, runtime)
    if role in ("all", "ws"):
        _mount_ws(app, dispatcher)
    return app


def _mount_rest(app: FastAPI, runtime: Runtime) -> None:
    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "modules": len(runtime.bus.list_providers())}

    @app.get("/context", response_class=PlainTextResponse)
    def context(as_of: str | None = None) -> str:
        when = parse_ts(as_of) if as_of else runtime.now()
        return runtime.assemble(when).rendered

    @app.get("/modules")
    def modules() -> list[dict]:
        return [_descriptor_doc(d) for d in runtime.bus.list_providers()]

    @app.post("/modules")
    async def add_module(request: Request):
        manifest = await request.json()
        violations = runtime.dynamic.validate(manifest)
        if violations:
            return _error(400, "invalid manifest", violations)
        desc = runtime.dynamic.register(manifest)
        return _descriptor_doc(desc)

    @app.get("/state/{toolkit_id}")
    def state(toolkit_id: str):
        try:
            st = runtime.store.read_state(toolkit_id)
        except UnknownModuleError as exc:
            return _error(404, "unknown module", str(exc))
        except IntegrityError as exc:
            return _error(500, "state integrity error", str(exc))
        return {
            "toolkit_id": st.toolkit_id,
            "version": st.version,
            "updated_at": st.updated_at,
            "body": st.body,
        }

    @app.post("/actions/{toolkit_id}/{endpoint}")
    async def action(toolkit_id: str, endpoint: str, request: Request):
        try:
            params = await request.json() if await request.body() else {}
        except Exception:
            return _error(400, "invalid request body", "expected a JSON object")
        try:
            result = runtime.execute_action(toolkit_id, endpoint, params)
        except UnknownProviderError as exc:
            return _error(404, "unknown module", str(exc))
        except UnknownEndpointError as exc:
            return _error(404, "unknown endpoint", str(exc))
        except ValidationError as exc:
            return _error(400, "validation error", exc.detail)
        return {"version": result.get("version"), "result": result}


def _mount_ws(app: FastAPI, dispatcher: Dispatcher) -> None:
    @app.websocket("/chat")
    async def chat(ws: WebSocket) -> None:
        await ws.accept()
        sub = dispatcher.subscribe()
        send_lock = asyncio.Lock()

        async def pump() -> None:
            # Forward state events and notifications as they happen.
            while True:
                frame = await asyncio.to_thread(sub.get, 0.2)
                if frame is None:
                    if sub.closed:
                        return
                    continue
                async with send_lock:
                    await ws.send_json(frame)

        pump_task = asyncio.create_task(pump())
        try:
            while True:
                msg = await ws.receive_json()
                if msg.get("type") != "user_msg":
                    async with send_lock:
                        await ws.send_json({"error": "expected user_msg", "detail": msg.get("type")})
                    continue
                condition = _parse_condition(msg)
                session = dispatcher.open_session(condition, msg.get("frozen_clock"))
                resp = await asyncio.to_thread(dispatcher.handle_message, session, msg.get("text", ""))
                frames: list[dict] = []
                if msg.get("debug_context"):
                    frames.append({
                        "type": "context_injected",
                        "bytes": len(resp.injected_context.encode("utf-8")),
                        "text": resp.injected_context,
                    })
                for call in resp.tool_calls:
                    frames.append({
                        "type": "tool_call",
                        "toolkit_id": call.toolkit_id,
                        "endpoint": call.endpoint,
                        "params": call.params,
                        "result": call.result,
                    })
                frames.append({
                    "type": "reply",
                    "text": resp.reply_text,
                    "modules_used": sorted(resp.modules_used),
                    "latency_s": resp.latency_s,
                    "error": resp.error,
                })
                async with send_lock:
                    for frame in frames:
                        await ws.send_json(frame)
        except WebSocketDisconnect:
            pass
        finally:
            dispatcher.unsubscribe(sub)
            pump_task.cancel()


def _parse_condition(msg: dict) -> Condition:
    raw = msg.get("condition") or "shared_context"
    if raw in ("shared", "shared_context"):
        return Condition.shared()
    if raw in ("search", "search_only"):
        return Condition.search()
    if raw.startswith("single_module:"):
        return Condition.single(raw.split(":", 1)[1])
    return Condition.shared()


def serve(
    runtime: Runtime,
    host: str = "127.0.0.1",
    port: int = 8777,
    role: str = "all",
    backend: str = "deterministic",
) -> None:
    import uvicorn

    dispatcher = Dispatcher(runtime, backend=backend) if role in ("all", "ws") else None
    app = create_app(runtime, dispatcher, role=role)
    uvicorn.run(app, host=host, port=port)
