"""Query ranking for knowledge acquisition.

Query-by-committee over bootstrap ensembles of the glass-box forecaster:
the more the committee disagrees on a forecast, the more a user label for
it is worth. Decision snapshots are ranked by how little option feedback
their forecast has collected so far.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import DimensionMismatchError, InsufficientDataError
from .forecasting import FeatureVector, LinearModel, ModelSpec, _fit_ridge, training_rows
from .ingestion import DemandStore, SeriesKey
from .kg import KnowledgeGraph

TARGET_FORECAST = "forecast"
TARGET_SNAPSHOT = "snapshot"


@dataclass(frozen=True)
class QueryCandidate:
    candidate_id: str
    target_kind: str
    target_id: str
    informativeness: float = 0.0
    rationale: str = ""

    def __post_init__(self):
        if self.target_kind not in (TARGET_FORECAST, TARGET_SNAPSHOT):
            raise ValueError(f"unknown target kind {self.target_kind!r}")
        if self.informativeness < 0:
            raise ValueError("informativeness must be >= 0")


@dataclass(frozen=True)
class CommitteeConfig:
    committee_size: int = 5
    resample_fraction: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.committee_size < 2:
            raise ValueError("committee_size must be >= 2")
        if not 0 < self.resample_fraction <= 1:
            raise ValueError("resample_fraction must be in (0, 1]")


def train_committee(
    store: DemandStore,
    series: SeriesKey,
    spec: ModelSpec,
    config: CommitteeConfig,
    *,
    with_replacement: bool = True,
) -> list[LinearModel]:
    """One model per bootstrap resample of the series' training rows.

    with_replacement=False plus resample_fraction=1.0 is a degenerate test
    mode in which every member sees the full data and comes out identical.
    """
    X, y, _ = training_rows(store, series, spec)
    n_rows = len(y)
    if n_rows < spec.feature_dimension + 2:
        raise InsufficientDataError(
            f"series {series}: {n_rows} usable rows < {spec.feature_dimension + 2} required"
        )
    sample_size = max(spec.feature_dimension + 2, int(round(config.resample_fraction * n_rows)))
    sample_size = min(sample_size, n_rows)
    rng = np.random.default_rng(config.seed)
    members = []
    for member in range(config.committee_size):
        # sorted so row order never perturbs the fit; degenerate full-sample
        # draws then yield bitwise-identical members
        idx = np.sort(rng.choice(n_rows, size=sample_size, replace=with_replacement))
        beta, intercept = _fit_ridge(X[idx], y[idx], spec.regularization)
        members.append(LinearModel(
            model_id=f"md-{series.material_id}-{series.client_id}-cm{member}",
            series=series,
            spec=spec,
            seed=config.seed,
            feature_names=spec.feature_names,
            coefficients=beta,
            intercept=intercept,
            feature_means=X[idx].mean(axis=0),
        ))
    return members


def forecast_uncertainty(committee: Sequence[LinearModel], features: FeatureVector) -> float:
    """Sample variance of the members' unclamped predictions."""
    if not committee:
        raise InsufficientDataError("committee is empty")
    d = len(committee[0].coefficients)
    if len(features.values) != d:
        raise DimensionMismatchError(f"committee has {d} features, vector has {len(features.values)}")
    predictions = np.array([m.raw_predict(features.values) for m in committee])
    if len(predictions) < 2:
        return 0.0
    return float(np.var(predictions, ddof=1))


Scorer = Callable[[QueryCandidate], tuple[float, str]]


def rank_queries(candidates: Iterable[QueryCandidate], scorer: Scorer) -> list[QueryCandidate]:
    """Score and order candidates by informativeness desc, target_id asc on ties."""
    scored = []
    for candidate in candidates:
        informativeness, rationale = scorer(candidate)
        scored.append(QueryCandidate(
            candidate_id=candidate.candidate_id,
            target_kind=candidate.target_kind,
            target_id=candidate.target_id,
            informativeness=informativeness,
            rationale=rationale,
        ))
    scored.sort(key=lambda c: (-c.informativeness, c.target_id))
    return scored


def select_batch(ranked: Sequence[QueryCandidate], k: int) -> list[QueryCandidate]:
    """First min(k, n) candidates, preserving rank order."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return list(ranked[:k])


def interleave_by_kind(ranked: Sequence[QueryCandidate]) -> list[QueryCandidate]:
    """Round-robin merge of the two target kinds, forecasts first.

    Variances and coverage scores are incommensurable, so mixed pools are
    alternated rather than compared.
    """
    lanes = [
        [c for c in ranked if c.target_kind == TARGET_FORECAST],
        [c for c in ranked if c.target_kind == TARGET_SNAPSHOT],
    ]
    merged = []
    turn = 0
    while lanes[0] or lanes[1]:
        lane = lanes[turn % 2]
        if lane:
            merged.append(lane.pop(0))
        turn += 1
    return merged


def snapshot_coverage_scorer(graph: KnowledgeGraph) -> Scorer:
    """Score a snapshot by feedback scarcity on its forecast's options.

    1 / (1 + feedback count over all options in the forecast's chain), so
    decision contexts nobody commented on rank first.
    """
    def scorer(candidate: QueryCandidate) -> tuple[float, str]:
        snapshot = graph.entity(candidate.target_id)
        forecast_id = str(snapshot.attributes["forecast_id"])
        count = _option_feedback_count(graph, forecast_id)
        score = 1.0 / (1.0 + count)
        return score, f"{count} feedback record(s) on this forecast's decision options"
    return scorer


def _option_feedback_count(graph: KnowledgeGraph, forecast_id: str) -> int:
    count = 0
    for sa in graph.query(subject=forecast_id, predicate="suggestsActionFor"):
        snapshot_id = sa.object
        while snapshot_id is not None:
            for has in graph.query(subject=snapshot_id, predicate="hasOption"):
                count += len(graph.query(predicate="feedbackOnOption", object=has.object))
            successors = graph.query(subject=snapshot_id, predicate="followedBy")
            snapshot_id = successors[0].object if successors else None
    return count
