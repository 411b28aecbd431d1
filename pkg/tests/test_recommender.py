import uuid
from datetime import date, datetime, timedelta, timezone

import pytest
from hypothesis import given, settings, strategies as st

from planassist.errors import (
    AlreadySelectedError,
    CapacityExceededError,
    OptionNotInSnapshotError,
)
from planassist.forecasting import ForecastRecord
from planassist.graphmap import forecast_entity
from planassist.ingestion import SeriesKey, TransportRecord
from planassist.kg import KnowledgeGraph
from planassist.recommender import (
    OPTION_ADJUST,
    OPTION_ASSIGN,
    OPTION_CANCEL,
    OPTION_CONFIRM,
    OPTION_CREATE,
    Recommender,
    TransportFleet,
    feasible_transports,
)

TARGET = date(2020, 2, 1)


def make_forecast(quantity, client="C1", target=TARGET, graph=None):
    record = ForecastRecord(
        forecast_id=f"fc-{uuid.uuid4().hex}",
        series=SeriesKey("M1", client),
        target_date=target,
        quantity=quantity,
        model_id="md-x",
        created_at=datetime.now(timezone.utc),
    )
    if graph is not None:
        graph.assert_entity(forecast_entity(record))
    return record


def transport(tid, client="C1", capacity=100.0, committed=0.0, days_out=3):
    return TransportRecord(tid, TARGET + timedelta(days=days_out), client, capacity, committed)


def setup(transports):
    graph = KnowledgeGraph()
    fleet = TransportFleet(transports)
    return graph, fleet, Recommender(graph, fleet)


class TestFeasibleTransports:
    def test_capacity_filter_excludes_small_transports(self):
        # demand 120 for C1: T1 free 100 excluded, T2 free 150 kept
        graph, fleet, _ = setup([
            transport("T1", capacity=100.0, committed=0.0),
            transport("T2", capacity=200.0, committed=50.0),
        ])
        forecast = make_forecast(120.0, graph=graph)
        feasible = feasible_transports(forecast, fleet.states())
        assert [t.transport_id for t in feasible] == ["T2"]

    def test_zero_quantity_everything_feasible(self):
        graph, fleet, _ = setup([
            transport("T1", capacity=10.0, committed=10.0),
            transport("T2", capacity=5.0),
            transport("T3", client="C2", capacity=50.0),
        ])
        forecast = make_forecast(0.0, graph=graph)
        assert {t.transport_id for t in feasible_transports(forecast, fleet.states())} == {"T1", "T2"}

    def test_nothing_feasible(self):
        graph, fleet, _ = setup([transport("T1", capacity=10.0)])
        forecast = make_forecast(99.0, graph=graph)
        assert feasible_transports(forecast, fleet.states()) == []

    def test_past_departures_excluded(self):
        graph, fleet, _ = setup([transport("T1", days_out=-1), transport("T2", days_out=0)])
        forecast = make_forecast(1.0, graph=graph)
        assert [t.transport_id for t in feasible_transports(forecast, fleet.states())] == ["T2"]

    def test_randomized_fleet_matches_brute_force_oracle(self):
        import random
        rng = random.Random(13)
        records = []
        for i in range(50):
            records.append(TransportRecord(
                f"T{i:02d}",
                TARGET + timedelta(days=rng.randint(-3, 10)),
                rng.choice(["C1", "C2", "C3"]),
                capacity=rng.uniform(5, 200),
                committed=0.0,
            ))
        graph, fleet, _ = setup(records)
        forecast = make_forecast(42.0, graph=graph)

        expected = [
            s for s in fleet.states()
            if s.record.destination_client_id == "C1"
            and s.record.departure_date >= TARGET
            and s.free_capacity >= 42.0
        ]
        expected.sort(key=lambda s: (s.record.departure_date, s.free_capacity - 42.0, s.transport_id))

        actual = feasible_transports(forecast, fleet.states())
        assert [t.transport_id for t in actual] == [t.transport_id for t in expected]


class TestFirstSnapshot:
    def test_undersized_transport_never_offered(self):
        graph, fleet, rec = setup([
            transport("T1", capacity=100.0, committed=0.0),
            transport("T2", capacity=200.0, committed=50.0),
        ])
        forecast = make_forecast(120.0, graph=graph)
        snapshot = rec.first_snapshot(forecast)
        kinds = [(o.kind, o.transport_id) for o in snapshot.options]
        assert kinds == [(OPTION_ASSIGN, "T2"), (OPTION_CREATE, None)]
        # persisted with provenance
        assert graph.query(subject=forecast.forecast_id, predicate="suggestsActionFor")
        assert len(graph.query(subject=snapshot.snapshot_id, predicate="hasOption")) == 2

    def test_fallback_always_present(self):
        graph, fleet, rec = setup([])
        forecast = make_forecast(10.0, graph=graph)
        snapshot = rec.first_snapshot(forecast)
        assert [o.kind for o in snapshot.options] == [OPTION_CREATE]

    def test_ranking_by_departure_then_slack(self):
        graph, fleet, rec = setup([
            transport("T1", capacity=300.0, days_out=5),
            transport("T2", capacity=100.0, days_out=2),
            transport("T3", capacity=150.0, days_out=2),
        ])
        forecast = make_forecast(50.0, graph=graph)
        snapshot = rec.first_snapshot(forecast)
        ranked = [o.transport_id for o in snapshot.options if o.kind == OPTION_ASSIGN]
        # day+2 first; between T2 (slack 50) and T3 (slack 100), T2 wins
        assert ranked == ["T2", "T3", "T1"]
        assert snapshot.options[-1].kind == OPTION_CREATE
        assert [o.rank for o in snapshot.options] == [1, 2, 3, 4]


class TestApplySelection:
    def test_choose_then_confirm_snapshot(self):
        graph, fleet, rec = setup([transport("T2", capacity=200.0, committed=50.0)])
        forecast = make_forecast(120.0, graph=graph)
        s1 = rec.first_snapshot(forecast)
        assign = s1.options[0]
        result = rec.apply_selection(s1, assign.option_id)
        assert not result.terminal
        s2 = result.next_snapshot
        assert [o.kind for o in s2.options] == [OPTION_CONFIRM, OPTION_ADJUST, OPTION_CANCEL]
        # graph oracle: selection and chain edges exist
        assert graph.query(s1.snapshot_id, "selectedOption", assign.option_id)
        assert graph.query(s1.snapshot_id, "followedBy", s2.snapshot_id)

    def test_confirm_commits_quantity(self):
        graph, fleet, rec = setup([transport("T2", capacity=200.0, committed=50.0)])
        forecast = make_forecast(120.0, graph=graph)
        s1 = rec.first_snapshot(forecast)
        s2 = rec.apply_selection(s1, s1.options[0].option_id).next_snapshot
        before = fleet.get("T2").committed
        result = rec.apply_selection(s2, s2.options[0].option_id)
        assert result.terminal
        assert result.committed_transport_id == "T2"
        assert fleet.get("T2").committed == before + 120.0  # hand arithmetic: 50 + 120 = 170

    def test_option_from_other_snapshot_rejected(self):
        graph, fleet, rec = setup([transport("T1"), transport("T2")])
        f1 = make_forecast(10.0, graph=graph)
        f2 = make_forecast(10.0, graph=graph)
        s1 = rec.first_snapshot(f1)
        s2 = rec.first_snapshot(f2)
        with pytest.raises(OptionNotInSnapshotError):
            rec.apply_selection(s1, s2.options[0].option_id)

    def test_second_selection_rejected(self):
        graph, fleet, rec = setup([transport("T1")])
        forecast = make_forecast(5.0, graph=graph)
        s1 = rec.first_snapshot(forecast)
        rec.apply_selection(s1, s1.options[0].option_id)
        with pytest.raises(AlreadySelectedError):
            rec.apply_selection(s1, s1.options[-1].option_id)

    def test_cancel_commits_nothing(self):
        graph, fleet, rec = setup([transport("T1", capacity=50.0)])
        forecast = make_forecast(5.0, graph=graph)
        s1 = rec.first_snapshot(forecast)
        s2 = rec.apply_selection(s1, s1.options[0].option_id).next_snapshot
        result = rec.apply_selection(s2, s2.options[2].option_id)
        assert result.terminal
        assert result.committed_quantity is None
        assert fleet.get("T1").committed == 0.0

    def test_adjust_loops_to_new_confirm_snapshot(self):
        graph, fleet, rec = setup([transport("T1", capacity=50.0)])
        forecast = make_forecast(5.0, graph=graph)
        s1 = rec.first_snapshot(forecast)
        s2 = rec.apply_selection(s1, s1.options[0].option_id).next_snapshot
        result = rec.apply_selection(s2, s2.options[1].option_id, quantity=8.0)
        assert not result.terminal
        s3 = result.next_snapshot
        assert s3.stage == "confirm"
        assert s3.options[0].payload["quantity"] == 8.0
        final = rec.apply_selection(s3, s3.options[0].option_id)
        assert final.terminal
        assert fleet.get("T1").committed == 8.0
        # chain S1 -> S2 -> S3 traceable to the forecast
        trace = graph.trace_to_forecast(s3.snapshot_id)
        assert trace.origin_forecast == forecast.forecast_id
        assert trace.path == (s3.snapshot_id, s2.snapshot_id, s1.snapshot_id)

    def test_adjust_beyond_capacity_fails_on_confirm(self):
        graph, fleet, rec = setup([transport("T1", capacity=50.0)])
        forecast = make_forecast(5.0, graph=graph)
        s1 = rec.first_snapshot(forecast)
        s2 = rec.apply_selection(s1, s1.options[0].option_id).next_snapshot
        s3 = rec.apply_selection(s2, s2.options[1].option_id, quantity=90.0).next_snapshot
        with pytest.raises(CapacityExceededError):
            rec.apply_selection(s3, s3.options[0].option_id)
        # failed confirm leaves no selection on s3 and no commitment
        assert graph.query(subject=s3.snapshot_id, predicate="selectedOption") == []
        assert fleet.get("T1").committed == 0.0

    def test_create_new_transport_path(self):
        graph, fleet, rec = setup([])
        forecast = make_forecast(150.0, graph=graph)
        s1 = rec.first_snapshot(forecast)
        create = s1.options[0]
        assert create.kind == OPTION_CREATE
        s2 = rec.apply_selection(s1, create.option_id).next_snapshot
        result = rec.apply_selection(s2, s2.options[0].option_id)
        assert result.terminal and result.created_transport
        state = fleet.get(result.committed_transport_id)
        assert state.record.capacity == 150.0  # max(quantity, default 100)
        assert state.committed == 150.0
        assert graph.entity(result.committed_transport_id).kind == "Transport"


fleet_strategy = st.lists(
    st.tuples(
        st.sampled_from(["C1", "C2"]),
        st.floats(1.0, 300.0),
        st.floats(0.0, 1.0),
        st.integers(-5, 10),
    ),
    min_size=0,
    max_size=12,
)


@given(fleet_spec=fleet_strategy, quantity=st.floats(0.0, 250.0))
@settings(max_examples=60, deadline=None)
def test_capacity_safety_and_fallback(fleet_spec, quantity):
    records = [
        TransportRecord(f"T{i}", TARGET + timedelta(days=days), client, cap,
                        min(cap, round(frac * cap, 6)))
        for i, (client, cap, frac, days) in enumerate(fleet_spec)
    ]
    graph = KnowledgeGraph()
    fleet = TransportFleet(records)
    rec = Recommender(graph, fleet)
    forecast = make_forecast(quantity, graph=graph)
    snapshot = rec.first_snapshot(forecast)

    assigns = [o for o in snapshot.options if o.kind == OPTION_ASSIGN]
    for option in assigns:
        assert fleet.get(option.transport_id).free_capacity >= quantity
    creates = [o for o in snapshot.options if o.kind == OPTION_CREATE]
    assert len(creates) == 1
    assert snapshot.options[-1].kind == OPTION_CREATE


@given(data=st.data())
@settings(max_examples=40, deadline=None)
def test_conservation_of_committed_quantity(data):
    n_flows = data.draw(st.integers(1, 6))
    graph = KnowledgeGraph()
    fleet = TransportFleet([transport(f"T{i}", capacity=500.0) for i in range(3)])
    rec = Recommender(graph, fleet)
    initial = fleet.total_committed()
    confirmed = 0.0
    for _ in range(n_flows):
        quantity = data.draw(st.floats(0.0, 100.0))
        forecast = make_forecast(quantity, graph=graph)
        snapshot = rec.first_snapshot(forecast)
        option = data.draw(st.sampled_from(list(snapshot.options)))
        result = rec.apply_selection(snapshot, option.option_id)
        while not result.terminal:
            snapshot = result.next_snapshot
            choice = data.draw(st.sampled_from(list(snapshot.options)))
            if choice.kind == OPTION_ADJUST:
                new_q = data.draw(st.floats(0.0, 100.0))
                result = rec.apply_selection(snapshot, choice.option_id, quantity=new_q)
            else:
                result = rec.apply_selection(snapshot, choice.option_id)
        if result.committed_quantity is not None:
            confirmed += result.committed_quantity
    assert fleet.total_committed() - initial == pytest.approx(confirmed)
