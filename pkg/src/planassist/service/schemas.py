"""Request/response models for the JSON API."""

from __future__ import annotations

from pydantic import BaseModel, Field, model_validator


class SessionOut(BaseModel):
    session_id: str


class ForecastOut(BaseModel):
    forecast_id: str
    material_id: str
    client_id: str
    date: str
    quantity: float
    edited: bool
    model_id: str


class EditIn(BaseModel):
    quantity: float = Field(ge=0)


class EditOut(BaseModel):
    feedback_id: str
    forecast_id: str
    quantity: float


class AttributionOut(BaseModel):
    feature_name: str
    weight: float


class ExplanationOut(BaseModel):
    explanation_id: str
    forecast_id: str
    attributions: list[AttributionOut]
    fidelity: float


class RemoveFeatureIn(BaseModel):
    feature_name: str


class FeedbackAck(BaseModel):
    feedback_id: str


class OptionOut(BaseModel):
    option_id: str
    kind: str
    rank: int
    transport_id: str | None = None
    payload: dict = Field(default_factory=dict)


class SnapshotOut(BaseModel):
    snapshot_id: str
    forecast_id: str
    stage: str
    position: int
    options: list[OptionOut]


class SelectIn(BaseModel):
    option_id: str
    quantity: float | None = Field(default=None, ge=0)


class SelectOut(BaseModel):
    terminal: bool
    snapshot: SnapshotOut | None = None
    committed_transport_id: str | None = None
    committed_quantity: float | None = None
    created_transport: bool = False


class ReasonIn(BaseModel):
    snapshot_id: str
    option_id: str
    reason_code: str | None = None
    reason_text: str | None = None

    @model_validator(mode="after")
    def exactly_one_reason(self):
        if (self.reason_code is None) == (self.reason_text is None):
            raise ValueError("provide exactly one of reason_code or reason_text")
        return self


class ReasonsOut(BaseModel):
    reasons: list[str]


class CloseOut(BaseModel):
    implicit_approvals: int


class SuggestionOut(BaseModel):
    rank: int
    target_kind: str
    target_id: str
    informativeness: float
    rationale: str


class TraceOut(BaseModel):
    origin_forecast: str
    path: list[str]


class CatalogOut(BaseModel):
    materials: list[str]
    clients: list[str]
    first_date: str
    last_date: str
    default_date: str
