"""Mirrors domain records into knowledge-graph entities.

Every forecast, explanation, and model gets a graph twin so downstream
triples (explains, suggestsActionFor, feedbackOn*) have something to
attach to.
"""

from __future__ import annotations

from .explainer import ExplanationRecord
from .forecasting import ForecastRecord, LinearModel
from .ingestion import TransportRecord
from .kg import Entity


def forecast_entity(record: ForecastRecord) -> Entity:
    return Entity(record.forecast_id, "Forecast", {
        "material_id": record.series.material_id,
        "client_id": record.series.client_id,
        "target_date": record.target_date.isoformat(),
        "quantity": record.quantity,
        "model_id": record.model_id,
        "created_at": record.created_at.isoformat(),
    })


def explanation_entity(record: ExplanationRecord) -> Entity:
    return Entity(record.explanation_id, "ForecastExplanation", {
        "forecast_id": record.forecast_id,
        "fidelity": record.fidelity,
        "feature_names": ",".join(record.feature_names()),
        "created_at": record.created_at.isoformat(),
    })


def model_entity(model: LinearModel) -> Entity:
    return Entity(model.model_id, "AIModel", {
        "material_id": model.series.material_id,
        "client_id": model.series.client_id,
        "seed": model.seed,
    })


def transport_entity(record: TransportRecord) -> Entity:
    return Entity(record.transport_id, "Transport", {
        "departure_date": record.departure_date.isoformat(),
        "destination_client_id": record.destination_client_id,
        "capacity": record.capacity,
        "committed": record.committed,
    })
