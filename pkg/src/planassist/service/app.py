"""FastAPI application binding forecasts, explanations, decision flows,
feedback, and query suggestions into one JSON API."""

from __future__ import annotations

import uuid
from datetime import date, datetime, timezone
from pathlib import Path

from fastapi import FastAPI, Header, Query
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from ..errors import AssistantError
from ..explainer import ExplanationRecord
from ..feedback import (
    ACTION_EDIT_QUANTITY,
    ACTION_REMOVE_FEATURE,
    MODE_EXPLICIT,
    FeedbackRecord,
    SessionLedger,
    close_session,
    record_explicit,
    record_reason,
)
from ..forecasting import ForecastRecord
from ..recommender import DecisionSnapshot
from . import schemas
from .state import AppState

_NOT_FOUND = {
    "unknown-entity", "unknown-material", "unknown-session", "unknown-target",
    "no-model", "no-models", "orphan-node",
}
_CONFLICT = {"already-selected", "session-closed", "no-selection-yet"}


def _status_for(code: str) -> int:
    if code in _NOT_FOUND:
        return 404
    if code in _CONFLICT:
        return 409
    return 400


def _envelope(code: str, message: str) -> dict:
    return {"error": {"code": code, "message": message}}


def create_app(state: AppState, ui_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="planassist", docs_url="/api/docs", openapi_url="/api/openapi.json")
    app.state.assistant = state

    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(AssistantError)
    async def handle_domain_error(request, exc: AssistantError):
        return JSONResponse(status_code=_status_for(exc.code),
                            content=_envelope(exc.code, exc.message))

    @app.exception_handler(RequestValidationError)
    async def handle_validation_error(request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content=_envelope("validation", str(exc.errors())))

    @app.exception_handler(ValueError)
    async def handle_value_error(request, exc: ValueError):
        return JSONResponse(status_code=400, content=_envelope("validation", str(exc)))

    def open_ledger(session_id: str) -> SessionLedger:
        ledger = state.session(session_id)
        if ledger.closed:
            from ..errors import SessionClosedError
            raise SessionClosedError(f"session {session_id} is closed")
        return ledger

    def forecast_view(record: ForecastRecord, ledger: SessionLedger) -> schemas.ForecastOut:
        return schemas.ForecastOut(
            forecast_id=record.forecast_id,
            material_id=record.series.material_id,
            client_id=record.series.client_id,
            date=record.target_date.isoformat(),
            quantity=state.current_quantity(record.forecast_id),
            edited=record.forecast_id in ledger.edited_forecasts,
            model_id=record.model_id,
        )

    def explanation_view(record: ExplanationRecord) -> schemas.ExplanationOut:
        return schemas.ExplanationOut(
            explanation_id=record.explanation_id,
            forecast_id=record.forecast_id,
            attributions=[
                schemas.AttributionOut(feature_name=a.feature_name, weight=a.weight)
                for a in record.attributions
            ],
            fidelity=record.fidelity,
        )

    def snapshot_view(snapshot: DecisionSnapshot) -> schemas.SnapshotOut:
        return schemas.SnapshotOut(
            snapshot_id=snapshot.snapshot_id,
            forecast_id=snapshot.forecast_id,
            stage=snapshot.stage,
            position=state.chain_position(snapshot.snapshot_id),
            options=[
                schemas.OptionOut(option_id=o.option_id, kind=o.kind, rank=o.rank,
                                  transport_id=o.transport_id, payload=o.payload)
                for o in snapshot.options
            ],
        )

    # --- sessions ---

    @app.post("/api/sessions", response_model=schemas.SessionOut)
    def post_session():
        return schemas.SessionOut(session_id=state.open_session().session_id)

    @app.post("/api/sessions/{session_id}/close", response_model=schemas.CloseOut)
    def post_close(session_id: str):
        with state.lock:
            ledger = state.session(session_id)
            approvals = close_session(ledger, state.graph)
            return schemas.CloseOut(implicit_approvals=len(approvals))

    # --- forecasts ---

    @app.get("/api/forecasts", response_model=list[schemas.ForecastOut])
    def get_forecasts(date_: str = Query(alias="date"), material: str = Query(),
                      x_session: str = Header()):
        with state.lock:
            ledger = open_ledger(x_session)
            records = state.forecasts_for(ledger, date.fromisoformat(date_), material)
            return [forecast_view(r, ledger) for r in records]

    @app.post("/api/forecasts/{forecast_id}/edit", response_model=schemas.EditOut)
    def post_edit(forecast_id: str, body: schemas.EditIn, x_session: str = Header()):
        with state.lock:
            ledger = open_ledger(x_session)
            state.forecast(forecast_id)  # 404 before any write
            record = FeedbackRecord(
                feedback_id=f"fb-{uuid.uuid4().hex}",
                mode=MODE_EXPLICIT,
                target_kind="forecast",
                target_id=forecast_id,
                action=ACTION_EDIT_QUANTITY,
                payload={"new_quantity": body.quantity},
                session_id=ledger.session_id,
                created_at=datetime.now(timezone.utc),
            )
            feedback_id = record_explicit(ledger, record, state.graph)
            return schemas.EditOut(feedback_id=feedback_id, forecast_id=forecast_id,
                                   quantity=state.current_quantity(forecast_id))

    # --- explanations ---

    @app.get("/api/forecasts/{forecast_id}/explanation", response_model=schemas.ExplanationOut)
    def get_explanation(forecast_id: str, x_session: str = Header()):
        with state.lock:
            open_ledger(x_session)
            state.forecast(forecast_id)
            return explanation_view(state.explanation_for(forecast_id))

    @app.post("/api/explanations/{explanation_id}/remove-feature",
              response_model=schemas.FeedbackAck)
    def post_remove_feature(explanation_id: str, body: schemas.RemoveFeatureIn,
                            x_session: str = Header()):
        with state.lock:
            ledger = open_ledger(x_session)
            state.explanation_by_id(explanation_id)
            record = FeedbackRecord(
                feedback_id=f"fb-{uuid.uuid4().hex}",
                mode=MODE_EXPLICIT,
                target_kind="explanation",
                target_id=explanation_id,
                action=ACTION_REMOVE_FEATURE,
                payload={"feature_name": body.feature_name},
                session_id=ledger.session_id,
                created_at=datetime.now(timezone.utc),
            )
            return schemas.FeedbackAck(feedback_id=record_explicit(ledger, record, state.graph))

    # --- decision flows ---

    @app.get("/api/forecasts/{forecast_id}/options", response_model=schemas.SnapshotOut)
    def get_options(forecast_id: str, x_session: str = Header()):
        with state.lock:
            open_ledger(x_session)
            state.forecast(forecast_id)
            return snapshot_view(state.options_for(forecast_id))

    @app.post("/api/snapshots/{snapshot_id}/select", response_model=schemas.SelectOut)
    def post_select(snapshot_id: str, body: schemas.SelectIn, x_session: str = Header()):
        with state.lock:
            open_ledger(x_session)
            result = state.select_option(snapshot_id, body.option_id, quantity=body.quantity)
            if result.terminal:
                return schemas.SelectOut(
                    terminal=True,
                    committed_transport_id=result.committed_transport_id,
                    committed_quantity=result.committed_quantity,
                    created_transport=result.created_transport,
                )
            return schemas.SelectOut(terminal=False, snapshot=snapshot_view(result.next_snapshot))

    # --- feedback ---

    @app.post("/api/feedback/reason", response_model=schemas.FeedbackAck)
    def post_reason(body: schemas.ReasonIn, x_session: str = Header()):
        with state.lock:
            ledger = open_ledger(x_session)
            state.snapshot(body.snapshot_id)
            feedback_id = record_reason(
                ledger, body.snapshot_id, body.option_id, state.reasons, state.graph,
                code=body.reason_code, text=body.reason_text,
            )
            return schemas.FeedbackAck(feedback_id=feedback_id)

    @app.get("/api/reasons", response_model=schemas.ReasonsOut)
    def get_reasons():
        with state.lock:
            return schemas.ReasonsOut(reasons=state.reasons.list())

    # --- active learning ---

    @app.get("/api/al/suggestions", response_model=list[schemas.SuggestionOut])
    def get_suggestions(k: int = Query(ge=1)):
        with state.lock:
            batch = state.al_suggestions(k)
            return [
                schemas.SuggestionOut(rank=i + 1, target_kind=c.target_kind, target_id=c.target_id,
                                      informativeness=c.informativeness, rationale=c.rationale)
                for i, c in enumerate(batch)
            ]

    # --- provenance ---

    @app.get("/api/kg/trace/{entity_id}", response_model=schemas.TraceOut)
    def get_trace(entity_id: str):
        with state.lock:
            result = state.graph.trace_to_forecast(entity_id)
            return schemas.TraceOut(origin_forecast=result.origin_forecast, path=list(result.path))

    # --- catalog (UI convenience) ---

    @app.get("/api/catalog", response_model=schemas.CatalogOut)
    def get_catalog():
        with state.lock:
            return schemas.CatalogOut(
                materials=state.store.materials(),
                clients=state.store.clients(),
                first_date=min(state.store.first_date(k) for k in state.store.series()).isoformat(),
                last_date=state.store.last_date_overall().isoformat(),
                default_date=state.default_date.isoformat(),
            )

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
