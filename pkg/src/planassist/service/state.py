"""Application state: stores, models, graph, sessions, caches.

All mutations are serialized through one lock, honoring the graph's
single-writer contract. Handlers validate before writing so a failed
request never leaves partial graph state behind.
"""

from __future__ import annotations

import threading
import uuid
from dataclasses import replace
from datetime import date, timedelta
from pathlib import Path

from ..active_learning import (
    CommitteeConfig,
    QueryCandidate,
    forecast_uncertainty,
    interleave_by_kind,
    rank_queries,
    select_batch,
    snapshot_coverage_scorer,
    train_committee,
)
from ..errors import (
    InsufficientDataError,
    InsufficientHistoryError,
    NoModelError,
    NoModelsError,
    UnknownEntityError,
    UnknownMaterialError,
    UnknownSessionError,
)
from ..explainer import ExplainerConfig, ExplanationRecord, explain
from ..feedback import ReasonCatalog, SessionLedger
from ..forecasting import ForecastRecord, LinearModel, build_features, predict
from ..graphmap import explanation_entity, forecast_entity, model_entity, transport_entity
from ..ingestion import DemandStore, SeriesKey, TransportRecord
from ..kg import KnowledgeGraph, Triple
from ..recommender import DecisionSnapshot, Recommender, SelectionResult, TransportFleet


class AppState:
    def __init__(
        self,
        store: DemandStore,
        transports: list[TransportRecord],
        models: dict[SeriesKey, LinearModel],
        *,
        graph: KnowledgeGraph | None = None,
        explainer_config: ExplainerConfig | None = None,
        committee_config: CommitteeConfig | None = None,
        default_date: date | None = None,
    ):
        self.store = store
        self.models = models
        self.graph = graph if graph is not None else KnowledgeGraph()
        self.fleet = TransportFleet(transports)
        self.recommender = Recommender(self.graph, self.fleet)
        self.explainer_config = explainer_config or ExplainerConfig(top_k=3, seed=0)
        self.committee_config = committee_config or CommitteeConfig()
        self.default_date = default_date or (store.last_date_overall() + timedelta(days=1))
        self.reasons = ReasonCatalog()
        self.lock = threading.RLock()

        self.sessions: dict[str, SessionLedger] = {}
        self.forecasts: dict[str, ForecastRecord] = {}
        self._forecast_by_key: dict[tuple[str, str, str], str] = {}
        self.explanations: dict[str, ExplanationRecord] = {}  # keyed by forecast_id
        self._explanations_by_id: dict[str, ExplanationRecord] = {}
        self.snapshots: dict[str, DecisionSnapshot] = {}
        self._first_snapshot: dict[str, str] = {}
        self._committees: dict[SeriesKey, list[LinearModel]] = {}

        for model in models.values():
            if not self.graph.has_entity(model.model_id):
                self.graph.assert_entity(model_entity(model))
        for record in transports:
            if not self.graph.has_entity(record.transport_id):
                self.graph.assert_entity(transport_entity(record))

    # --- sessions ---

    def open_session(self) -> SessionLedger:
        with self.lock:
            ledger = SessionLedger(session_id=f"ss-{uuid.uuid4().hex}")
            self.sessions[ledger.session_id] = ledger
            return ledger

    def session(self, session_id: str) -> SessionLedger:
        ledger = self.sessions.get(session_id)
        if ledger is None:
            raise UnknownSessionError(f"unknown session {session_id}")
        return ledger

    # --- forecasts ---

    def forecasts_for(self, ledger: SessionLedger, on: date, material_id: str) -> list[ForecastRecord]:
        with self.lock:
            matching = [k for k in self.store.series() if k.material_id == material_id]
            if not matching:
                raise UnknownMaterialError(f"unknown material {material_id}")
            records = [self._get_or_create_forecast(key, on) for key in matching]
            records.sort(key=lambda r: r.series.client_id)
            ledger.mark_displayed(r.forecast_id for r in records)
            return records

    def _get_or_create_forecast(self, series: SeriesKey, on: date) -> ForecastRecord:
        cache_key = (series.material_id, series.client_id, on.isoformat())
        forecast_id = self._forecast_by_key.get(cache_key)
        if forecast_id is not None:
            return self.forecasts[forecast_id]
        model = self.models.get(series)
        if model is None:
            raise NoModelError(f"no trained model for series {series}")
        features = build_features(self.store, series, on, model.spec)
        record = predict(model, features)
        self.graph.assert_entity(forecast_entity(record))
        self.graph.assert_triple(Triple(record.forecast_id, "producedBy", model.model_id))
        self.forecasts[record.forecast_id] = record
        self._forecast_by_key[cache_key] = record.forecast_id
        return record

    def forecast(self, forecast_id: str) -> ForecastRecord:
        record = self.forecasts.get(forecast_id)
        if record is None:
            raise UnknownEntityError(f"unknown forecast {forecast_id}")
        return record

    def current_quantity(self, forecast_id: str) -> float:
        return float(self.graph.entity(forecast_id).attributes["quantity"])

    def effective_forecast(self, forecast_id: str) -> ForecastRecord:
        """The forecast with any user edit applied to its quantity."""
        record = self.forecast(forecast_id)
        return replace(record, quantity=self.current_quantity(forecast_id))

    # --- explanations ---

    def explanation_for(self, forecast_id: str) -> ExplanationRecord:
        with self.lock:
            cached = self.explanations.get(forecast_id)
            if cached is not None:
                return cached
            record = self.forecast(forecast_id)
            model = self.models[record.series]
            features = build_features(self.store, record.series, record.target_date, model.spec)
            explanation = explain(model, features, self.explainer_config, forecast_id)
            self.graph.assert_entity(explanation_entity(explanation))
            self.graph.assert_triple(Triple(explanation.explanation_id, "explains", forecast_id))
            self.explanations[forecast_id] = explanation
            self._explanations_by_id[explanation.explanation_id] = explanation
            return explanation

    def explanation_by_id(self, explanation_id: str) -> ExplanationRecord:
        record = self._explanations_by_id.get(explanation_id)
        if record is None:
            raise UnknownEntityError(f"unknown explanation {explanation_id}")
        return record

    # --- decision flows ---

    def options_for(self, forecast_id: str) -> DecisionSnapshot:
        with self.lock:
            snapshot_id = self._first_snapshot.get(forecast_id)
            if snapshot_id is not None:
                return self.snapshots[snapshot_id]
            snapshot = self.recommender.first_snapshot(self.effective_forecast(forecast_id))
            self.snapshots[snapshot.snapshot_id] = snapshot
            self._first_snapshot[forecast_id] = snapshot.snapshot_id
            return snapshot

    def snapshot(self, snapshot_id: str) -> DecisionSnapshot:
        snapshot = self.snapshots.get(snapshot_id)
        if snapshot is None:
            raise UnknownEntityError(f"unknown snapshot {snapshot_id}")
        return snapshot

    def select_option(self, snapshot_id: str, option_id: str,
                      quantity: float | None = None) -> SelectionResult:
        with self.lock:
            snapshot = self.snapshot(snapshot_id)
            result = self.recommender.apply_selection(snapshot, option_id, quantity=quantity)
            if result.next_snapshot is not None:
                self.snapshots[result.next_snapshot.snapshot_id] = result.next_snapshot
            if result.committed_transport_id is not None:
                state = self.fleet.get(result.committed_transport_id)
                if self.graph.has_entity(state.transport_id):
                    self.graph.set_attribute(state.transport_id, "committed", state.committed)
            return result

    def chain_position(self, snapshot_id: str) -> int:
        return len(self.graph.trace_to_forecast(snapshot_id).path)

    # --- active learning ---

    def al_suggestions(self, k: int) -> list[QueryCandidate]:
        with self.lock:
            if not self.models:
                raise NoModelsError("no trained models loaded")
            variances: dict[str, float] = {}
            forecast_candidates = []
            for series in sorted(self.models):
                target_id = f"{series.material_id}:{series.client_id}:{self.default_date.isoformat()}"
                try:
                    committee = self._committee(series)
                    features = build_features(self.store, series, self.default_date,
                                              self.models[series].spec)
                except (InsufficientDataError, InsufficientHistoryError):
                    continue
                variances[target_id] = forecast_uncertainty(committee, features)
                forecast_candidates.append(
                    QueryCandidate(f"qc-{target_id}", "forecast", target_id))

            def variance_scorer(candidate: QueryCandidate) -> tuple[float, str]:
                value = variances[candidate.target_id]
                return value, (f"committee of {self.committee_config.committee_size} "
                               f"disagrees with variance {value:.4f}")

            snapshot_candidates = [
                QueryCandidate(f"qc-{sid}", "snapshot", sid) for sid in sorted(self.snapshots)
            ]
            ranked = interleave_by_kind(
                rank_queries(forecast_candidates, variance_scorer)
                + rank_queries(snapshot_candidates, snapshot_coverage_scorer(self.graph))
            )
            return select_batch(ranked, k)

    def _committee(self, series: SeriesKey) -> list[LinearModel]:
        committee = self._committees.get(series)
        if committee is None:
            committee = train_committee(self.store, series, self.models[series].spec,
                                        self.committee_config)
            self._committees[series] = committee
        return committee


def build_state(store_dir: str | Path, models_dir: str | Path, *,
                log_graph: bool = True, **kwargs) -> AppState:
    """Assemble state from a store directory and a models directory."""
    from ..forecasting import load_models
    from ..ingestion import load_store

    store_dir = Path(store_dir)
    store, transports = load_store(store_dir)
    models = load_models(models_dir)
    graph = KnowledgeGraph(log_path=store_dir / "kg.log") if log_graph else None
    return AppState(store, transports, models, graph=graph, **kwargs)
