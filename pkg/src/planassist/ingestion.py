"""Operational data ingestion: demand history, transports, synthetic demo data.

CSV stands in for ERP/MES extracts. Loaded stores are immutable and safe
to share across threads.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from datetime import date, timedelta
from pathlib import Path
from typing import Iterable, NamedTuple

import numpy as np

from .errors import (
    CommittedExceedsCapacityError,
    DuplicateKeyError,
    InfeasibleParametersError,
    MalformedRowError,
    NegativeQuantityError,
)

DEMAND_HEADER = ["date", "material_id", "client_id", "quantity"]
TRANSPORT_HEADER = ["transport_id", "departure_date", "destination_client_id", "capacity", "committed"]


class SeriesKey(NamedTuple):
    material_id: str
    client_id: str

    def __str__(self) -> str:  # used in reports and filenames
        return f"{self.material_id}:{self.client_id}"


@dataclass(frozen=True)
class DemandObservation:
    date: date
    material_id: str
    client_id: str
    quantity: float

    def __post_init__(self):
        if self.quantity < 0:
            raise NegativeQuantityError(
                f"quantity must be >= 0, got {self.quantity} for "
                f"({self.date}, {self.material_id}, {self.client_id})"
            )
        if not self.material_id or not self.client_id:
            raise MalformedRowError("material_id and client_id must be non-empty")

    @property
    def series(self) -> SeriesKey:
        return SeriesKey(self.material_id, self.client_id)


@dataclass(frozen=True)
class TransportRecord:
    transport_id: str
    departure_date: date
    destination_client_id: str
    capacity: float
    committed: float

    def __post_init__(self):
        if self.capacity <= 0:
            raise MalformedRowError(f"transport {self.transport_id}: capacity must be positive")
        if not 0 <= self.committed <= self.capacity:
            raise CommittedExceedsCapacityError(
                f"transport {self.transport_id}: committed {self.committed} "
                f"outside [0, capacity={self.capacity}]"
            )

    @property
    def free_capacity(self) -> float:
        return self.capacity - self.committed


class DemandStore:
    """Immutable per-series view of demand observations.

    Dates missing inside a series are treated as zero-demand days; lookups
    outside the observed span also return zero.
    """

    def __init__(self, observations: Iterable[DemandObservation]):
        by_series: dict[SeriesKey, dict[date, float]] = {}
        for obs in observations:
            per = by_series.setdefault(obs.series, {})
            if obs.date in per:
                raise DuplicateKeyError(
                    f"duplicate observation for ({obs.date}, {obs.material_id}, {obs.client_id})"
                )
            per[obs.date] = obs.quantity
        self._first: dict[SeriesKey, date] = {}
        self._dense: dict[SeriesKey, np.ndarray] = {}
        self._by_series = by_series
        for key, per in by_series.items():
            first, last = min(per), max(per)
            values = np.zeros((last - first).days + 1)
            for d, q in per.items():
                values[(d - first).days] = q
            self._first[key] = first
            self._dense[key] = values

    def series(self) -> list[SeriesKey]:
        return sorted(self._by_series)

    def __contains__(self, key: SeriesKey) -> bool:
        return key in self._by_series

    def __len__(self) -> int:
        return sum(len(per) for per in self._by_series.values())

    def materials(self) -> list[str]:
        return sorted({k.material_id for k in self._by_series})

    def clients(self) -> list[str]:
        return sorted({k.client_id for k in self._by_series})

    def first_date(self, key: SeriesKey) -> date:
        return self._first[key]

    def last_date(self, key: SeriesKey) -> date:
        return self._first[key] + timedelta(days=len(self._dense[key]) - 1)

    def last_date_overall(self) -> date:
        return max(self.last_date(k) for k in self._by_series)

    def dense(self, key: SeriesKey) -> np.ndarray:
        """Daily quantities from first to last observed date, gaps as 0. Do not mutate."""
        return self._dense[key]

    def quantity(self, key: SeriesKey, on: date) -> float:
        """Demand on a given day; 0.0 for gaps and out-of-span dates."""
        first = self._first.get(key)
        if first is None:
            return 0.0
        idx = (on - first).days
        dense = self._dense[key]
        if 0 <= idx < len(dense):
            return float(dense[idx])
        return 0.0

    def observed_dates(self, key: SeriesKey) -> list[date]:
        return sorted(self._by_series[key])

    def observations(self, key: SeriesKey) -> list[DemandObservation]:
        return [
            DemandObservation(d, key.material_id, key.client_id, q)
            for d, q in sorted(self._by_series[key].items())
        ]


def _parse_date(raw: str, path: str, line: int, field: str) -> date:
    try:
        return date.fromisoformat(raw)
    except ValueError:
        raise MalformedRowError(f"{path}:{line}: field '{field}': invalid date {raw!r}") from None


def _parse_float(raw: str, path: str, line: int, field: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise MalformedRowError(f"{path}:{line}: field '{field}': invalid number {raw!r}") from None


def load_demand_history(path: str | Path) -> list[DemandObservation]:
    """Parse a demand.csv extract, rejecting duplicates and negative quantities.

    Rows come back sorted by (material, client, date).
    """
    path = Path(path)
    observations = []
    seen: set[tuple[date, str, str]] = set()
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != DEMAND_HEADER:
            raise MalformedRowError(f"{path}:1: expected header {','.join(DEMAND_HEADER)}")
        for line, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise MalformedRowError(f"{path}:{line}: expected 4 fields, got {len(row)}")
            when = _parse_date(row[0], str(path), line, "date")
            material, client = row[1], row[2]
            quantity = _parse_float(row[3], str(path), line, "quantity")
            if quantity < 0:
                raise NegativeQuantityError(
                    f"{path}:{line}: negative quantity {quantity} for ({when}, {material}, {client})"
                )
            key = (when, material, client)
            if key in seen:
                raise DuplicateKeyError(
                    f"{path}:{line}: duplicate key (date={when}, material={material}, client={client})"
                )
            seen.add(key)
            if not material or not client:
                raise MalformedRowError(f"{path}:{line}: empty material_id or client_id")
            observations.append(DemandObservation(when, material, client, quantity))
    observations.sort(key=lambda o: (o.material_id, o.client_id, o.date))
    return observations


def load_transports(path: str | Path) -> list[TransportRecord]:
    """Parse a transports.csv extract, validating committed <= capacity."""
    path = Path(path)
    records = []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != TRANSPORT_HEADER:
            raise MalformedRowError(f"{path}:1: expected header {','.join(TRANSPORT_HEADER)}")
        for line, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 5:
                raise MalformedRowError(f"{path}:{line}: expected 5 fields, got {len(row)}")
            departure = _parse_date(row[1], str(path), line, "departure_date")
            capacity = _parse_float(row[3], str(path), line, "capacity")
            committed = _parse_float(row[4], str(path), line, "committed")
            if capacity <= 0:
                raise MalformedRowError(f"{path}:{line}: capacity must be positive, got {capacity}")
            if committed < 0 or committed > capacity:
                raise CommittedExceedsCapacityError(
                    f"{path}:{line}: committed {committed} exceeds capacity {capacity} "
                    f"for transport {row[0]}"
                )
            records.append(TransportRecord(row[0], departure, row[2], capacity, committed))
    return records


def generate_synthetic(
    n_materials: int,
    n_clients: int,
    n_series: int,
    days: int,
    seed: int,
    *,
    base_range: tuple[float, float] = (5.0, 50.0),
    weekly_amplitude: float = 0.4,
    noise_level: float = 0.15,
) -> tuple[list[DemandObservation], list[TransportRecord]]:
    """Deterministic synthetic demand + transport fleet at a requested scale.

    Each series is base level + weekly seasonal profile + bounded uniform
    noise, clamped at zero. Every client gets at least one transport
    departing after the demand history ends.
    """
    if n_materials < 1 or n_clients < 1 or n_series < 1:
        raise InfeasibleParametersError("counts must be positive")
    if n_series > n_materials * n_clients:
        raise InfeasibleParametersError(
            f"cannot place {n_series} series on a {n_materials}x{n_clients} grid"
        )
    if days < 30:
        raise InfeasibleParametersError(f"need at least 30 days of history, got {days}")

    rng = np.random.default_rng(seed)
    width = max(len(str(n_materials)), len(str(n_clients)), 3)
    materials = [f"M{i:0{width}d}" for i in range(1, n_materials + 1)]
    clients = [f"C{i:0{width}d}" for i in range(1, n_clients + 1)]
    start = date(2020, 1, 6)  # a Monday, so weekday patterns align with the calendar

    pair_indices = rng.choice(n_materials * n_clients, size=n_series, replace=False)
    pairs = sorted((materials[i // n_clients], clients[i % n_clients]) for i in pair_indices)

    observations = []
    day_offsets = np.arange(days)
    weekdays = day_offsets % 7  # start is a Monday
    for material, client in pairs:
        base = rng.uniform(*base_range)
        phase = rng.uniform(0, 2 * np.pi)
        seasonal = weekly_amplitude * base * np.sin(2 * np.pi * weekdays / 7 + phase)
        noise = rng.uniform(-noise_level * base, noise_level * base, size=days)
        quantities = np.maximum(0.0, base + seasonal + noise)
        for offset, q in zip(day_offsets, quantities):
            observations.append(
                DemandObservation(start + timedelta(days=int(offset)), material, client, round(float(q), 3))
            )

    last_day = start + timedelta(days=days - 1)
    transports = []
    counter = 1
    for client in clients:
        for _ in range(int(rng.integers(1, 4))):
            capacity = round(float(rng.uniform(40.0, 400.0)), 3)
            committed = round(float(rng.uniform(0.0, 0.5)) * capacity, 3)
            departure = last_day + timedelta(days=int(rng.integers(1, 15)))
            transports.append(
                TransportRecord(f"T{counter:05d}", departure, client, capacity, committed)
            )
            counter += 1
    return observations, transports


def write_demand_csv(observations: Iterable[DemandObservation], path: str | Path) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(DEMAND_HEADER)
        for obs in observations:
            writer.writerow([obs.date.isoformat(), obs.material_id, obs.client_id, repr(obs.quantity)])


def write_transports_csv(records: Iterable[TransportRecord], path: str | Path) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRANSPORT_HEADER)
        for rec in records:
            writer.writerow([
                rec.transport_id,
                rec.departure_date.isoformat(),
                rec.destination_client_id,
                repr(rec.capacity),
                repr(rec.committed),
            ])


def load_store(store_dir: str | Path) -> tuple[DemandStore, list[TransportRecord]]:
    """Load the canonical ``demand.csv`` / ``transports.csv`` pair from a store directory."""
    store_dir = Path(store_dir)
    observations = load_demand_history(store_dir / "demand.csv")
    transports_path = store_dir / "transports.csv"
    transports = load_transports(transports_path) if transports_path.exists() else []
    return DemandStore(observations), transports
