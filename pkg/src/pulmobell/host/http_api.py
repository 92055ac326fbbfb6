"""HTTP and WebSocket surface of the host service.

REST endpoints cover session CRUD, queries, and the clinician CSV export;
the /api/live/{id} socket streams appended records as JSON objects and
accepts {"command": ..., "arg": ...} or {"steer": ..., "value": ...}
objects which are forwarded to the bound device.
"""

from __future__ import annotations

import asyncio
from pathlib import Path

from fastapi import FastAPI, Query, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse, Response
from fastapi.staticfiles import StaticFiles

from ..codes import CommandCode
from ..errors import (
    DeviceUnavailableError,
    NotFoundError,
    ParameterError,
    RejectedError,
    ValidationError,
)
from ..session.types import Regimen
from .store import SessionRecord, SessionStore, summary_to_dict

COMMAND_BY_NAME = {c.name.lower(): c for c in CommandCode}


def _record_json(record: SessionRecord) -> dict:
    return {
        "id": record.id,
        "created_at": record.created_at,
        "status": record.status,
        "device_label": record.device_label,
        "regimen": {
            "sets": record.regimen.sets,
            "rest_s": record.regimen.rest_s,
            "start_level": record.regimen.start_level,
            "max_level": record.regimen.max_level,
        },
    }


def create_app(store: SessionStore, static_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="pulmobell-host", docs_url=None, redoc_url=None)

    @app.exception_handler(NotFoundError)
    async def _not_found(_, exc):
        return JSONResponse(status_code=404, content={"error": str(exc)})

    @app.exception_handler(ParameterError)
    async def _bad_param(_, exc):
        return JSONResponse(status_code=400, content={"error": str(exc)})

    @app.exception_handler(ValidationError)
    async def _bad_body(_, exc):
        return JSONResponse(status_code=400, content={"error": str(exc)})

    @app.post("/api/sessions")
    async def create_session(body: dict | None = None):
        body = body or {}
        try:
            regimen = Regimen(
                sets=int(body.get("sets", 3)),
                rest_s=float(body.get("rest_s", 90.0)),
                start_level=int(body.get("start_level", 2)),
                max_level=int(body.get("max_level", 5)),
            )
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ValidationError):
                raise
            raise ValidationError(f"bad regimen: {exc}") from exc
        record, token = store.create_session(regimen, device_label=str(body.get("device_label", "device")))
        return {"id": record.id, "device_token": token.hex()}

    @app.get("/api/sessions")
    async def list_sessions():
        return [_record_json(r) for r in sorted(store.list_sessions(), key=lambda r: r.created_at)]

    @app.get("/api/sessions/{session_id}")
    async def get_session(session_id: str):
        record = store.get(session_id)
        return {**_record_json(record), "summary": _summary_or_none(store, session_id)}

    @app.get("/api/sessions/{session_id}/events")
    async def get_events(session_id: str):
        return [
            {"t_ms": r.t_ms, "recv_seq": r.recv_seq, "kind": r.kind, "payload": r.payload}
            for r in store.records(session_id)
        ]

    @app.get("/api/sessions/{session_id}/metrics")
    async def get_metrics(
        session_id: str,
        from_ms: int | None = Query(default=None, alias="from"),
        to_ms: int | None = Query(default=None, alias="to"),
    ):
        return [
            {"t_ms": r.t_ms, "recv_seq": r.recv_seq, "kind": r.kind, "payload": r.payload}
            for r in store.metrics(session_id, from_ms, to_ms)
        ]

    @app.get("/api/sessions/{session_id}/export.csv")
    async def export_csv(session_id: str):
        return Response(content=store.export_csv(session_id), media_type="text/csv")

    @app.get("/api/sessions/{session_id}/report")
    async def report(session_id: str):
        return store.clinician_report(session_id)

    @app.websocket("/api/live/{session_id}")
    async def live(websocket: WebSocket, session_id: str):
        try:
            store.get(session_id)
        except NotFoundError:
            await websocket.close(code=4404)
            return
        await websocket.accept()
        sub = store.subscribe(session_id)
        loop = asyncio.get_running_loop()

        async def pump():
            while True:
                try:
                    record = await loop.run_in_executor(None, sub.get, 0.25)
                except OverflowError:
                    await websocket.send_json({"overflow": True})
                    await websocket.close(code=4408)
                    return
                if sub.closed:
                    await websocket.close(code=1000)
                    return
                if record is None:
                    continue
                await websocket.send_json(
                    {
                        "t_ms": record.t_ms,
                        "recv_seq": record.recv_seq,
                        "kind": record.kind,
                        "payload": record.payload,
                    }
                )

        pump_task = asyncio.create_task(pump())
        try:
            while True:
                msg = await websocket.receive_json()
                reply = await loop.run_in_executor(None, _handle_ws_message, store, session_id, msg)
                await websocket.send_json(reply)
        except WebSocketDisconnect:
            pass
        except RuntimeError:
            pass  # socket torn down while pump was closing
        finally:
            pump_task.cancel()
            store.unsubscribe(session_id, sub)

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="dashboard")

    return app


def _summary_or_none(store: SessionStore, session_id: str):
    try:
        return summary_to_dict(store.summary(session_id))
    except Exception:
        return None


def _handle_ws_message(store: SessionStore, session_id: str, msg: dict) -> dict:
    try:
        if "command" in msg:
            name = str(msg["command"]).lower()
            if name not in COMMAND_BY_NAME:
                return {"error": f"unknown command {name!r}"}
            status = store.submit_command(
                session_id, int(COMMAND_BY_NAME[name]), int(msg.get("arg", 0))
            )
            return {"ack": {"command": name, "status": status}}
        if "steer" in msg:
            status = store.submit_steering(session_id, str(msg["steer"]), float(msg["value"]))
            return {"ack": {"steer": msg["steer"], "status": status}}
        return {"error": "expected a command or steer object"}
    except DeviceUnavailableError as exc:
        return {"error": str(exc), "device_unavailable": True}
    except (RejectedError, ParameterError, ValueError) as exc:
        return {"error": str(exc)}
