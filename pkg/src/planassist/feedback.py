"""User feedback capture.

Explicit signals are forecast edits, explanation feature removals, and
reasons for chosen options. Implicit approval is inferred at session
close: every forecast the session displayed but never edited counts as
approved. Everything lands in the knowledge graph.
"""

from __future__ import annotations

import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone

from .errors import (
    InvalidPayloadError,
    NoSelectionYetError,
    SessionClosedError,
    UnknownTargetError,
)
from .kg import Entity, KnowledgeGraph, Triple

MODE_IMPLICIT = "implicit"
MODE_EXPLICIT = "explicit"

TARGET_FORECAST = "forecast"
TARGET_EXPLANATION = "explanation"
TARGET_OPTION = "option"

ACTION_APPROVE = "approve"
ACTION_EDIT_QUANTITY = "edit_quantity"
ACTION_REMOVE_FEATURE = "remove_feature"
ACTION_REASON_SELECTED = "reason_selected"
ACTION_REASON_FREE_TEXT = "reason_free_text"

_TARGET_KIND_TO_ENTITY = {
    TARGET_FORECAST: ("Forecast", "feedbackOnForecast"),
    TARGET_EXPLANATION: ("ForecastExplanation", "feedbackOnExplanation"),
    TARGET_OPTION: ("DecisionOption", "feedbackOnOption"),
}

DEFAULT_REASONS = ("earliest departure", "best capacity fit", "customer request", "cost", "other")


@dataclass(frozen=True)
class FeedbackRecord:
    feedback_id: str
    mode: str
    target_kind: str
    target_id: str
    action: str
    payload: dict
    session_id: str
    created_at: datetime

    def __post_init__(self):
        if self.mode not in (MODE_IMPLICIT, MODE_EXPLICIT):
            raise InvalidPayloadError(f"unknown feedback mode {self.mode!r}")
        if self.target_kind not in _TARGET_KIND_TO_ENTITY:
            raise InvalidPayloadError(f"unknown target kind {self.target_kind!r}")
        if self.mode == MODE_IMPLICIT and self.action != ACTION_APPROVE:
            raise InvalidPayloadError("implicit feedback can only approve")
        if self.action == ACTION_EDIT_QUANTITY:
            quantity = self.payload.get("new_quantity")
            if quantity is None or float(quantity) < 0:
                raise InvalidPayloadError("edit_quantity needs a new_quantity >= 0")
        if self.action == ACTION_REMOVE_FEATURE and not self.payload.get("feature_name"):
            raise InvalidPayloadError("remove_feature needs a feature_name")


@dataclass
class SessionLedger:
    """Per-session bookkeeping that makes 'lack of editing' observable."""

    session_id: str
    displayed_forecasts: set[str] = field(default_factory=set)
    edited_forecasts: set[str] = field(default_factory=set)
    closed: bool = False

    def mark_displayed(self, forecast_ids) -> None:
        self.displayed_forecasts.update(forecast_ids)

    def mark_edited(self, forecast_id: str) -> None:
        # an edit implies the client saw the forecast, so edited stays <= displayed
        self.displayed_forecasts.add(forecast_id)
        self.edited_forecasts.add(forecast_id)


class ReasonCatalog:
    """Predefined reasons shown in the feedback panel; free text grows it."""

    def __init__(self, initial=DEFAULT_REASONS):
        self._reasons: list[str] = list(initial)

    def __contains__(self, reason: str) -> bool:
        return reason in self._reasons

    def __len__(self) -> int:
        return len(self._reasons)

    def add(self, reason: str) -> bool:
        if reason in self._reasons:
            return False
        self._reasons.append(reason)
        return True

    def list(self) -> list[str]:
        return list(self._reasons)


def _new_id() -> str:
    return f"fb-{uuid.uuid4().hex}"


def _persist(record: FeedbackRecord, graph: KnowledgeGraph) -> str:
    attributes = {
        "mode": record.mode,
        "action": record.action,
        "target_kind": record.target_kind,
        "session_id": record.session_id,
        "created_at": record.created_at.isoformat(),
    }
    for key, value in record.payload.items():
        attributes[key] = value
    graph.assert_entity(Entity(record.feedback_id, "Feedback", attributes))
    _, predicate = _TARGET_KIND_TO_ENTITY[record.target_kind]
    graph.assert_triple(Triple(record.feedback_id, predicate, record.target_id))
    return record.feedback_id


def record_explicit(ledger: SessionLedger, record: FeedbackRecord, graph: KnowledgeGraph) -> str:
    """Persist one explicit feedback record; edits also update the forecast."""
    if ledger.closed:
        raise SessionClosedError(f"session {ledger.session_id} is closed")
    if record.mode != MODE_EXPLICIT:
        raise InvalidPayloadError("record_explicit only accepts explicit feedback")
    if not graph.has_entity(record.target_id):
        raise UnknownTargetError(f"unknown feedback target {record.target_id}")
    expected_kind, _ = _TARGET_KIND_TO_ENTITY[record.target_kind]
    target = graph.entity(record.target_id)
    if target.kind != expected_kind:
        raise InvalidPayloadError(
            f"target {record.target_id} has kind {target.kind}, expected {expected_kind}"
        )
    if record.action == ACTION_REMOVE_FEATURE:
        names = str(target.attributes.get("feature_names", "")).split(",")
        feature = record.payload["feature_name"]
        if feature not in names:
            raise InvalidPayloadError(
                f"feature {feature!r} is not among the explanation's attributions"
            )
    _persist(record, graph)
    if record.action == ACTION_EDIT_QUANTITY:
        graph.set_attribute(record.target_id, "quantity", float(record.payload["new_quantity"]))
        ledger.mark_edited(record.target_id)
    return record.feedback_id


def record_reason(
    ledger: SessionLedger,
    snapshot_id: str,
    option_id: str,
    catalog: ReasonCatalog,
    graph: KnowledgeGraph,
    *,
    code: str | None = None,
    text: str | None = None,
) -> str:
    """Attach a why-this-option reason to a selected option.

    Predefined codes must exist in the catalog; free text is persisted and
    added to the catalog for future display.
    """
    if ledger.closed:
        raise SessionClosedError(f"session {ledger.session_id} is closed")
    if (code is None) == (text is None):
        raise InvalidPayloadError("provide exactly one of code or text")
    selected = graph.query(subject=snapshot_id, predicate="selectedOption")
    if not selected:
        raise NoSelectionYetError(f"snapshot {snapshot_id} has no selected option yet")
    if selected[0].object != option_id:
        raise InvalidPayloadError(
            f"option {option_id} is not the selected option of snapshot {snapshot_id}"
        )
    if code is not None:
        if code not in catalog:
            raise InvalidPayloadError(f"unknown reason code {code!r}")
        action, payload = ACTION_REASON_SELECTED, {"reason_code": code}
    else:
        action, payload = ACTION_REASON_FREE_TEXT, {"reason_text": text}
        catalog.add(text)
    record = FeedbackRecord(
        feedback_id=_new_id(),
        mode=MODE_EXPLICIT,
        target_kind=TARGET_OPTION,
        target_id=option_id,
        action=action,
        payload=payload,
        session_id=ledger.session_id,
        created_at=datetime.now(timezone.utc),
    )
    return _persist(record, graph)


def close_session(ledger: SessionLedger, graph: KnowledgeGraph) -> list[str]:
    """Emit one implicit approval per displayed-but-unedited forecast; idempotent."""
    if ledger.closed:
        return []
    approvals = []
    for forecast_id in sorted(ledger.displayed_forecasts - ledger.edited_forecasts):
        record = FeedbackRecord(
            feedback_id=_new_id(),
            mode=MODE_IMPLICIT,
            target_kind=TARGET_FORECAST,
            target_id=forecast_id,
            action=ACTION_APPROVE,
            payload={},
            session_id=ledger.session_id,
            created_at=datetime.now(timezone.utc),
        )
        approvals.append(_persist(record, graph))
    ledger.closed = True
    return approvals
