"""Heuristic transport-scheduling recommender.

Stage one offers every transport that can absorb the forecast quantity
(earliest departure first, then least capacity slack), always followed by
a create-new-transport fallback. Stage two confirms, adjusts the
quantity, or cancels. Every snapshot, option, and selection is persisted
to the knowledge graph, so the whole flow stays traceable.
"""

from __future__ import annotations

import uuid
from dataclasses import dataclass, field
from datetime import date, datetime, timezone
from typing import Iterable

from .errors import (
    AlreadySelectedError,
    CapacityExceededError,
    OptionNotInSnapshotError,
    UnknownEntityError,
)
from .forecasting import ForecastRecord
from .ingestion import TransportRecord
from .kg import Entity, KnowledgeGraph, Triple

STAGE_CHOOSE = "choose_transport"
STAGE_CONFIRM = "confirm"

OPTION_ASSIGN = "assign_to_transport"
OPTION_CREATE = "create_new_transport"
OPTION_CONFIRM = "confirm_assignment"
OPTION_ADJUST = "adjust_quantity"
OPTION_CANCEL = "cancel"

DEFAULT_NEW_TRANSPORT_CAPACITY = 100.0


@dataclass
class TransportState:
    """Live capacity ledger entry for one transport."""

    record: TransportRecord
    committed: float = field(init=False)

    def __post_init__(self):
        self.committed = self.record.committed

    @property
    def transport_id(self) -> str:
        return self.record.transport_id

    @property
    def free_capacity(self) -> float:
        return self.record.capacity - self.committed

    def commit(self, quantity: float) -> None:
        if quantity > self.free_capacity:
            raise CapacityExceededError(
                f"transport {self.transport_id}: quantity {quantity} exceeds "
                f"free capacity {self.free_capacity}"
            )
        self.committed += quantity


class TransportFleet:
    def __init__(self, records: Iterable[TransportRecord] = ()):
        self._states: dict[str, TransportState] = {}
        for record in records:
            self.add(record)

    def add(self, record: TransportRecord) -> TransportState:
        if record.transport_id in self._states:
            raise ValueError(f"transport {record.transport_id} already in fleet")
        state = TransportState(record)
        self._states[record.transport_id] = state
        return state

    def get(self, transport_id: str) -> TransportState:
        state = self._states.get(transport_id)
        if state is None:
            raise UnknownEntityError(f"unknown transport {transport_id}")
        return state

    def states(self) -> list[TransportState]:
        return sorted(self._states.values(), key=lambda s: s.transport_id)

    def total_committed(self) -> float:
        return sum(s.committed for s in self._states.values())

    def __len__(self) -> int:
        return len(self._states)

    def __contains__(self, transport_id: str) -> bool:
        return transport_id in self._states


@dataclass(frozen=True)
class DecisionOption:
    option_id: str
    kind: str
    rank: int
    transport_id: str | None = None
    payload: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind == OPTION_ASSIGN and not self.transport_id:
            raise ValueError("assign_to_transport options need a transport_id")
        if self.rank < 1:
            raise ValueError("rank must be >= 1")


@dataclass(frozen=True)
class DecisionSnapshot:
    snapshot_id: str
    forecast_id: str
    stage: str
    options: tuple[DecisionOption, ...]
    created_at: datetime

    def __post_init__(self):
        if not self.options:
            raise ValueError("a snapshot must offer at least one option")
        if [o.rank for o in self.options] != list(range(1, len(self.options) + 1)):
            raise ValueError("option ranks must be 1..n in display order")

    def option(self, option_id: str) -> DecisionOption:
        for opt in self.options:
            if opt.option_id == option_id:
                return opt
        raise OptionNotInSnapshotError(
            f"option {option_id} is not part of snapshot {self.snapshot_id}"
        )


@dataclass(frozen=True)
class SelectionResult:
    terminal: bool
    next_snapshot: DecisionSnapshot | None = None
    committed_transport_id: str | None = None
    committed_quantity: float | None = None
    created_transport: bool = False


def feasible_transports(
    forecast: ForecastRecord, transports: Iterable[TransportState]
) -> list[TransportState]:
    """Transports able to carry the forecast: right client, not departed, enough room.

    Ranked by earliest departure, then least leftover capacity, then id.
    """
    matching = [
        t for t in transports
        if t.record.destination_client_id == forecast.series.client_id
        and t.record.departure_date >= forecast.target_date
        and t.free_capacity >= forecast.quantity
    ]
    matching.sort(key=lambda t: (
        t.record.departure_date,
        t.free_capacity - forecast.quantity,
        t.transport_id,
    ))
    return matching


class Recommender:
    """Builds snapshot chains against one fleet and one knowledge graph."""

    def __init__(self, graph: KnowledgeGraph, fleet: TransportFleet,
                 default_capacity: float = DEFAULT_NEW_TRANSPORT_CAPACITY):
        self.graph = graph
        self.fleet = fleet
        self.default_capacity = default_capacity

    def first_snapshot(self, forecast: ForecastRecord) -> DecisionSnapshot:
        if not self.graph.has_entity(forecast.forecast_id):
            raise UnknownEntityError(
                f"forecast {forecast.forecast_id} must be in the graph before recommending"
            )
        options = []
        for rank, state in enumerate(feasible_transports(forecast, self.fleet.states()), start=1):
            options.append(DecisionOption(
                option_id=f"op-{uuid.uuid4().hex}",
                kind=OPTION_ASSIGN,
                rank=rank,
                transport_id=state.transport_id,
                payload={
                    "quantity": forecast.quantity,
                    "departure_date": state.record.departure_date.isoformat(),
                    "free_capacity": state.free_capacity,
                },
            ))
        options.append(DecisionOption(
            option_id=f"op-{uuid.uuid4().hex}",
            kind=OPTION_CREATE,
            rank=len(options) + 1,
            payload={"quantity": forecast.quantity,
                     "default_capacity": max(forecast.quantity, self.default_capacity)},
        ))
        snapshot = DecisionSnapshot(
            snapshot_id=f"sn-{uuid.uuid4().hex}",
            forecast_id=forecast.forecast_id,
            stage=STAGE_CHOOSE,
            options=tuple(options),
            created_at=datetime.now(timezone.utc),
        )
        self._persist_snapshot(snapshot)
        self.graph.assert_triple(Triple(forecast.forecast_id, "suggestsActionFor", snapshot.snapshot_id))
        return snapshot

    def apply_selection(self, snapshot: DecisionSnapshot, option_id: str,
                        quantity: float | None = None) -> SelectionResult:
        """Record the user's pick and advance the flow.

        choose stage -> a confirm snapshot; confirm stage -> commit the
        quantity, loop through another confirm snapshot on adjust, or end
        on cancel. All validation happens before any graph write.
        """
        chosen = snapshot.option(option_id)
        if self.graph.query(subject=snapshot.snapshot_id, predicate="selectedOption"):
            raise AlreadySelectedError(f"snapshot {snapshot.snapshot_id} already has a selection")

        if snapshot.stage == STAGE_CHOOSE:
            self._select(snapshot, chosen)
            return SelectionResult(
                terminal=False,
                next_snapshot=self._confirm_snapshot(snapshot, chosen),
            )

        if chosen.kind == OPTION_CONFIRM:
            committed_quantity = float(chosen.payload["quantity"])
            if chosen.payload.get("create_new"):
                self._select(snapshot, chosen)
                state = self._create_transport(snapshot, committed_quantity)
                return SelectionResult(
                    terminal=True,
                    committed_transport_id=state.transport_id,
                    committed_quantity=committed_quantity,
                    created_transport=True,
                )
            state = self.fleet.get(chosen.transport_id)
            if committed_quantity > state.free_capacity:
                raise CapacityExceededError(
                    f"transport {state.transport_id}: quantity {committed_quantity} "
                    f"exceeds free capacity {state.free_capacity}"
                )
            self._select(snapshot, chosen)
            state.commit(committed_quantity)
            return SelectionResult(
                terminal=True,
                committed_transport_id=state.transport_id,
                committed_quantity=committed_quantity,
            )

        if chosen.kind == OPTION_ADJUST:
            new_quantity = float(chosen.payload["quantity"]) if quantity is None else float(quantity)
            if new_quantity < 0:
                raise ValueError("adjusted quantity must be >= 0")
            self._select(snapshot, chosen)
            return SelectionResult(
                terminal=False,
                next_snapshot=self._confirm_snapshot(snapshot, chosen, quantity=new_quantity),
            )

        # cancel: terminal, nothing committed
        self._select(snapshot, chosen)
        return SelectionResult(terminal=True)

    # --- internals ---

    def _select(self, snapshot: DecisionSnapshot, option: DecisionOption) -> None:
        self.graph.assert_triple(Triple(snapshot.snapshot_id, "selectedOption", option.option_id))

    def _confirm_snapshot(self, previous: DecisionSnapshot, chosen: DecisionOption,
                          quantity: float | None = None) -> DecisionSnapshot:
        if previous.stage == STAGE_CHOOSE:
            create_new = chosen.kind == OPTION_CREATE
            transport_id = chosen.transport_id
        else:  # adjust loop keeps the original transport choice
            create_new = bool(chosen.payload.get("create_new"))
            transport_id = chosen.transport_id
        q = float(chosen.payload["quantity"]) if quantity is None else quantity
        carried = {"quantity": q, "create_new": create_new}
        options = (
            DecisionOption(
                option_id=f"op-{uuid.uuid4().hex}", kind=OPTION_CONFIRM, rank=1,
                transport_id=transport_id, payload=dict(carried),
            ),
            DecisionOption(
                option_id=f"op-{uuid.uuid4().hex}", kind=OPTION_ADJUST, rank=2,
                transport_id=transport_id, payload=dict(carried),
            ),
            DecisionOption(
                option_id=f"op-{uuid.uuid4().hex}", kind=OPTION_CANCEL, rank=3,
                payload={},
            ),
        )
        snapshot = DecisionSnapshot(
            snapshot_id=f"sn-{uuid.uuid4().hex}",
            forecast_id=previous.forecast_id,
            stage=STAGE_CONFIRM,
            options=options,
            created_at=datetime.now(timezone.utc),
        )
        self._persist_snapshot(snapshot)
        self.graph.assert_triple(Triple(previous.snapshot_id, "followedBy", snapshot.snapshot_id))
        return snapshot

    def _persist_snapshot(self, snapshot: DecisionSnapshot) -> None:
        self.graph.assert_entity(Entity(snapshot.snapshot_id, "DecisionSnapshot", {
            "stage": snapshot.stage,
            "forecast_id": snapshot.forecast_id,
            "created_at": snapshot.created_at.isoformat(),
        }))
        for option in snapshot.options:
            attributes = {"kind": option.kind, "rank": option.rank}
            if option.transport_id:
                attributes["transport_id"] = option.transport_id
            if "quantity" in option.payload:
                attributes["quantity"] = float(option.payload["quantity"])
            self.graph.assert_entity(Entity(option.option_id, "DecisionOption", attributes))
            self.graph.assert_triple(Triple(snapshot.snapshot_id, "hasOption", option.option_id))

    def _create_transport(self, snapshot: DecisionSnapshot, quantity: float) -> TransportState:
        forecast = self.graph.entity(snapshot.forecast_id)
        record = TransportRecord(
            transport_id=f"tr-{uuid.uuid4().hex}",
            departure_date=date.fromisoformat(str(forecast.attributes["target_date"])),
            destination_client_id=str(forecast.attributes["client_id"]),
            capacity=max(quantity, self.default_capacity),
            committed=quantity,
        )
        state = self.fleet.add(record)
        self.graph.assert_entity(Entity(record.transport_id, "Transport", {
            "departure_date": record.departure_date.isoformat(),
            "destination_client_id": record.destination_client_id,
            "capacity": record.capacity,
            "committed": record.committed,
        }))
        return state
