from datetime import date, timedelta

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from planassist.active_learning import (
    CommitteeConfig,
    QueryCandidate,
    forecast_uncertainty,
    interleave_by_kind,
    rank_queries,
    select_batch,
    snapshot_coverage_scorer,
    train_committee,
)
from planassist.forecasting import FeatureVector, LinearModel, ModelSpec
from planassist.ingestion import DemandObservation, DemandStore, SeriesKey
from planassist.kg import Entity, KnowledgeGraph, Triple

KEY = SeriesKey("M1", "C1")
START = date(2020, 1, 6)


def make_store(n_days=60, seed=0):
    rng = np.random.default_rng(seed)
    return DemandStore([
        DemandObservation(START + timedelta(days=i), KEY.material_id, KEY.client_id,
                          float(q))
        for i, q in enumerate(rng.uniform(0, 20, size=n_days))
    ])


def intercept_only_model(value):
    spec = ModelSpec(lags=(1,), calendar_features=())
    return LinearModel(
        model_id=f"md-{value}", series=KEY, spec=spec, seed=0,
        feature_names=spec.feature_names,
        coefficients=np.zeros(1), intercept=float(value), feature_means=np.zeros(1),
    )


def vec(values=(1.0,)):
    return FeatureVector(KEY, START, np.array(values), tuple(f"lag_{i+1}" for i in range(len(values))))


class TestTrainCommittee:
    def test_degenerate_mode_identical_members(self):
        store = make_store()
        spec = ModelSpec(lags=(1, 7), calendar_features=())
        config = CommitteeConfig(committee_size=4, resample_fraction=1.0, seed=3)
        members = train_committee(store, KEY, spec, config, with_replacement=False)
        for member in members[1:]:
            np.testing.assert_array_equal(member.coefficients, members[0].coefficients)
            assert member.intercept == members[0].intercept

    def test_deterministic(self):
        store = make_store()
        spec = ModelSpec(lags=(1, 2, 7), calendar_features=())
        config = CommitteeConfig(committee_size=5, resample_fraction=0.8, seed=11)
        a = train_committee(store, KEY, spec, config)
        b = train_committee(store, KEY, spec, config)
        for ma, mb in zip(a, b):
            np.testing.assert_array_equal(ma.coefficients, mb.coefficients)
            assert ma.intercept == mb.intercept

    def test_committee_of_one_rejected(self):
        with pytest.raises(ValueError):
            CommitteeConfig(committee_size=1)

    def test_bootstrap_members_differ(self):
        store = make_store(n_days=80, seed=5)
        spec = ModelSpec(lags=(1, 7), calendar_features=())
        members = train_committee(store, KEY, spec,
                                  CommitteeConfig(committee_size=5, resample_fraction=0.7, seed=0))
        coefficient_sets = {tuple(m.coefficients.tolist()) for m in members}
        assert len(coefficient_sets) > 1


class TestForecastUncertainty:
    def test_identical_members_zero(self):
        committee = [intercept_only_model(7.0) for _ in range(4)]
        assert forecast_uncertainty(committee, vec()) == 0.0

    def test_hand_arithmetic_variance(self):
        # mean 10, sum of squared deviations 50, / (n-1) = 25
        committee = [intercept_only_model(v) for v in (5, 10, 15)]
        assert forecast_uncertainty(committee, vec()) == 25.0

    def test_pairwise_comparison(self):
        flat = [intercept_only_model(10) for _ in range(3)]
        spread = [intercept_only_model(v) for v in (5, 10, 15)]
        assert forecast_uncertainty(spread, vec()) > forecast_uncertainty(flat, vec())

    def test_scale_covariance(self):
        spread = [intercept_only_model(v) for v in (5, 10, 15)]
        scaled = [intercept_only_model(3 * v) for v in (5, 10, 15)]
        base = forecast_uncertainty(spread, vec())
        assert forecast_uncertainty(scaled, vec()) == pytest.approx(9 * base)


def scorer_from(scores):
    return lambda c: (scores[c.target_id], f"score {scores[c.target_id]}")


class TestRankQueries:
    def test_empty(self):
        assert rank_queries([], scorer_from({})) == []

    def test_variance_order(self):
        candidates = [
            QueryCandidate("c1", "forecast", "fa"),
            QueryCandidate("c2", "forecast", "fb"),
        ]
        ranked = rank_queries(candidates, scorer_from({"fa": 25.0, "fb": 0.0}))
        assert [c.target_id for c in ranked] == ["fa", "fb"]
        assert ranked[0].informativeness == 25.0
        assert ranked[0].rationale

    def test_tie_breaks_by_id(self):
        candidates = [
            QueryCandidate("c1", "forecast", "b"),
            QueryCandidate("c2", "forecast", "a"),
        ]
        ranked = rank_queries(candidates, scorer_from({"a": 1.0, "b": 1.0}))
        assert [c.target_id for c in ranked] == ["a", "b"]


class TestSelectBatch:
    def test_saturation(self):
        ranked = rank_queries(
            [QueryCandidate(f"c{i}", "forecast", f"f{i}") for i in range(3)],
            scorer_from({f"f{i}": float(i) for i in range(3)}),
        )
        assert len(select_batch(ranked, 10)) == 3

    def test_top_k_matches_full_sort_oracle(self):
        rng = np.random.default_rng(21)
        scores = {f"f{i:03d}": float(rng.integers(0, 20)) for i in range(100)}
        candidates = [QueryCandidate(f"c{i}", "forecast", fid) for i, fid in enumerate(scores)]
        ranked = rank_queries(candidates, scorer_from(scores))
        top10 = select_batch(ranked, 10)
        oracle = sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))[:10]
        assert [(c.target_id, c.informativeness) for c in top10] == oracle

    def test_single_argmax(self):
        scores = {"x": 3.0, "y": 9.0, "z": 1.0}
        ranked = rank_queries(
            [QueryCandidate(f"c-{t}", "forecast", t) for t in scores], scorer_from(scores))
        assert select_batch(ranked, 1)[0].target_id == "y"

    def test_invalid_k(self):
        with pytest.raises(ValueError):
            select_batch([], 0)


@given(scores=st.dictionaries(
    st.text(alphabet="abcdef", min_size=1, max_size=4),
    st.floats(0, 100, allow_nan=False),
    min_size=1, max_size=20,
))
@settings(max_examples=80, deadline=None)
def test_argmax_equivalence(scores):
    candidates = [QueryCandidate(f"c-{t}", "forecast", t) for t in scores]
    ranked = rank_queries(candidates, scorer_from(scores))
    best = select_batch(ranked, 1)[0]
    # exhaustive scan oracle under (score desc, id asc)
    expected = sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))[0]
    assert (best.target_id, best.informativeness) == expected


def test_ranking_invariant_under_common_scaling():
    scores = {"a": 4.0, "b": 9.0, "c": 1.0}
    candidates = [QueryCandidate(f"c-{t}", "forecast", t) for t in scores]
    base = rank_queries(candidates, scorer_from(scores))
    scaled = rank_queries(candidates, scorer_from({k: 7.5 * v for k, v in scores.items()}))
    assert [c.target_id for c in base] == [c.target_id for c in scaled]


def test_interleave_round_robin_forecast_first():
    ranked = [
        QueryCandidate("c1", "forecast", "f1", 9.0),
        QueryCandidate("c2", "snapshot", "s1", 0.9),
        QueryCandidate("c3", "forecast", "f2", 5.0),
        QueryCandidate("c4", "snapshot", "s2", 0.5),
        QueryCandidate("c5", "forecast", "f3", 1.0),
    ]
    merged = interleave_by_kind(ranked)
    assert [c.target_id for c in merged] == ["f1", "s1", "f2", "s2", "f3"]


def test_snapshot_coverage_scorer_counts_option_feedback():
    graph = KnowledgeGraph()
    graph.assert_entity(Entity("F1", "Forecast"))
    graph.assert_entity(Entity("S1", "DecisionSnapshot", {"forecast_id": "F1"}))
    graph.assert_entity(Entity("S2", "DecisionSnapshot", {"forecast_id": "F1"}))
    graph.assert_entity(Entity("O1", "DecisionOption"))
    graph.assert_entity(Entity("O2", "DecisionOption"))
    graph.assert_triple(Triple("S1", "hasOption", "O1"))
    graph.assert_triple(Triple("S2", "hasOption", "O2"))
    graph.assert_triple(Triple("F1", "suggestsActionFor", "S1"))
    graph.assert_triple(Triple("S1", "followedBy", "S2"))

    scorer = snapshot_coverage_scorer(graph)
    score, rationale = scorer(QueryCandidate("c1", "snapshot", "S1"))
    assert score == 1.0  # no feedback yet
    assert "0 feedback" in rationale

    graph.assert_entity(Entity("FB1", "Feedback", {"mode": "explicit"}))
    graph.assert_triple(Triple("FB1", "feedbackOnOption", "O2"))
    score_after, _ = scorer(QueryCandidate("c1", "snapshot", "S1"))
    assert score_after == 0.5  # 1 / (1 + 1), feedback found across the whole chain
