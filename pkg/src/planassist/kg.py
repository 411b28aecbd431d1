"""In-memory provenance knowledge graph.

Typed entities plus schema-validated relation triples. Forecasts,
explanations, decision snapshots, options, and feedback are all mirrored
here, so any decision option can be traced back to the forecast that
originated it. Mutations optionally go through an append-only log that
can be replayed to rebuild the graph; the whole graph exports to
N-Triples.
"""

from __future__ import annotations

import json
import re
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator
from urllib.parse import quote, unquote

from .errors import (
    CardinalityViolationError,
    CycleDetectedError,
    DuplicateEntityError,
    NoBindingError,
    OptionNotInSnapshotError,
    OrphanNodeError,
    SchemaViolationError,
    UnknownEntityError,
)

ENTITY_KINDS = frozenset({
    "AIModel", "Forecast", "ForecastExplanation", "DecisionOption",
    "DecisionSnapshot", "Feedback", "Material", "Client", "Transport",
})

Scalar = str | int | float | bool

BASE_NAMESPACE = "http://example.org/decision-assistant/"
RDF_TYPE = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type"
XSD = "http://www.w3.org/2001/XMLSchema#"


@dataclass
class Entity:
    entity_id: str
    kind: str
    attributes: dict[str, Scalar] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ENTITY_KINDS:
            raise SchemaViolationError(f"unknown entity kind {self.kind!r}")
        if not self.entity_id:
            raise SchemaViolationError("entity_id must be non-empty")


@dataclass(frozen=True)
class Triple:
    subject: str
    predicate: str
    object: str


@dataclass(frozen=True)
class RelationRule:
    subject_kind: str
    object_kind: str
    max_out: int | None = None  # per-subject outgoing limit for this predicate
    max_in: int | None = None   # per-object incoming limit
    acyclic: bool = False
    requires: str | None = None  # (subject, requires, object) must already hold


def default_schema() -> dict[str, RelationRule]:
    return {
        "suggestsActionFor": RelationRule("Forecast", "DecisionSnapshot", max_in=1),
        "followedBy": RelationRule("DecisionSnapshot", "DecisionSnapshot",
                                   max_out=1, max_in=1, acyclic=True),
        "selectedOption": RelationRule("DecisionSnapshot", "DecisionOption",
                                       max_out=1, max_in=1, requires="hasOption"),
        "hasOption": RelationRule("DecisionSnapshot", "DecisionOption", max_in=1),
        "explains": RelationRule("ForecastExplanation", "Forecast", max_out=1),
        "feedbackOnForecast": RelationRule("Feedback", "Forecast", max_out=1),
        "feedbackOnExplanation": RelationRule("Feedback", "ForecastExplanation", max_out=1),
        "feedbackOnOption": RelationRule("Feedback", "DecisionOption", max_out=1),
        "producedBy": RelationRule("Forecast", "AIModel", max_out=1),
    }


@dataclass(frozen=True)
class TraceResult:
    origin_forecast: str
    path: tuple[str, ...]  # snapshots walked, nearest-first


class KnowledgeGraph:
    """Triple store with per-predicate schema rules and single-writer locking."""

    def __init__(self, schema: dict[str, RelationRule] | None = None,
                 log_path: str | Path | None = None):
        self.schema = schema if schema is not None else default_schema()
        self._entities: dict[str, Entity] = {}
        self._triples: set[Triple] = set()
        self._by_subject: dict[str, set[Triple]] = {}
        self._by_predicate: dict[str, set[Triple]] = {}
        self._by_object: dict[str, set[Triple]] = {}
        self._lock = threading.RLock()
        self._log_path = Path(log_path) if log_path else None
        self._logging = False
        if self._log_path and self._log_path.exists():
            self._replay(self._log_path)
        self._logging = self._log_path is not None

    # --- mutations ---

    def assert_entity(self, entity: Entity) -> str:
        with self._lock:
            if entity.entity_id in self._entities:
                raise DuplicateEntityError(f"entity {entity.entity_id} already exists")
            self._entities[entity.entity_id] = entity
            self._log({"op": "entity", "id": entity.entity_id, "kind": entity.kind,
                       "attributes": entity.attributes})
            return entity.entity_id

    def set_attribute(self, entity_id: str, key: str, value: Scalar) -> None:
        with self._lock:
            entity = self._require(entity_id)
            entity.attributes[key] = value
            self._log({"op": "set_attr", "id": entity_id, "key": key, "value": value})

    def assert_triple(self, triple: Triple) -> None:
        with self._lock:
            if triple in self._triples:
                return  # set semantics: re-asserting an existing triple is a no-op
            rule = self.schema.get(triple.predicate)
            if rule is None:
                raise SchemaViolationError(f"unknown predicate {triple.predicate!r}")
            subject = self._require(triple.subject)
            obj = self._require(triple.object)
            if subject.kind != rule.subject_kind:
                raise SchemaViolationError(
                    f"{triple.predicate} expects subject kind {rule.subject_kind}, "
                    f"got {subject.kind} ({triple.subject})"
                )
            if obj.kind != rule.object_kind:
                raise SchemaViolationError(
                    f"{triple.predicate} expects object kind {rule.object_kind}, "
                    f"got {obj.kind} ({triple.object})"
                )
            if rule.max_out is not None:
                existing = sum(1 for t in self._by_subject.get(triple.subject, ())
                               if t.predicate == triple.predicate)
                if existing >= rule.max_out:
                    raise CardinalityViolationError(
                        f"{triple.subject} already has {existing} outgoing "
                        f"{triple.predicate} (max {rule.max_out})"
                    )
            if rule.max_in is not None:
                existing = sum(1 for t in self._by_object.get(triple.object, ())
                               if t.predicate == triple.predicate)
                if existing >= rule.max_in:
                    raise CardinalityViolationError(
                        f"{triple.object} already has {existing} incoming "
                        f"{triple.predicate} (max {rule.max_in})"
                    )
            if rule.requires is not None and not self._has(triple.subject, rule.requires, triple.object):
                if triple.predicate == "selectedOption":
                    raise OptionNotInSnapshotError(
                        f"option {triple.object} is not an option of snapshot {triple.subject}"
                    )
                raise SchemaViolationError(
                    f"{triple.predicate} requires a prior {rule.requires} triple"
                )
            if rule.acyclic and self._would_cycle(triple):
                raise CycleDetectedError(
                    f"{triple.subject} -{triple.predicate}-> {triple.object} would close a cycle"
                )
            self._triples.add(triple)
            self._by_subject.setdefault(triple.subject, set()).add(triple)
            self._by_predicate.setdefault(triple.predicate, set()).add(triple)
            self._by_object.setdefault(triple.object, set()).add(triple)
            self._log({"op": "triple", "s": triple.subject, "p": triple.predicate,
                       "o": triple.object})

    # --- queries ---

    def entity(self, entity_id: str) -> Entity:
        with self._lock:
            return self._require(entity_id)

    def has_entity(self, entity_id: str) -> bool:
        with self._lock:
            return entity_id in self._entities

    def entities(self, kind: str | None = None) -> list[Entity]:
        with self._lock:
            found = self._entities.values()
            if kind is not None:
                found = (e for e in found if e.kind == kind)
            return sorted(found, key=lambda e: e.entity_id)

    def entity_count(self) -> int:
        with self._lock:
            return len(self._entities)

    def triple_count(self) -> int:
        with self._lock:
            return len(self._triples)

    def query(self, subject: str | None = None, predicate: str | None = None,
              object: str | None = None) -> list[Triple]:
        """All triples matching every bound position; at least one must be bound."""
        with self._lock:
            if subject is None and predicate is None and object is None:
                raise NoBindingError("at least one of subject/predicate/object must be bound")
            pools = []
            if subject is not None:
                pools.append(self._by_subject.get(subject, set()))
            if predicate is not None:
                pools.append(self._by_predicate.get(predicate, set()))
            if object is not None:
                pools.append(self._by_object.get(object, set()))
            found = set.intersection(*pools) if len(pools) > 1 else set(pools[0])
            return sorted(found, key=lambda t: (t.subject, t.predicate, t.object))

    def trace_to_forecast(self, node: str) -> TraceResult:
        """Walk an option or snapshot back along its chain to the origin forecast."""
        with self._lock:
            entity = self._require(node)
            if entity.kind == "DecisionOption":
                holders = self.query(predicate="hasOption", object=node)
                if not holders:
                    raise OrphanNodeError(f"option {node} belongs to no snapshot")
                current = holders[0].subject
            elif entity.kind == "DecisionSnapshot":
                current = node
            else:
                raise SchemaViolationError(
                    f"{node} has kind {entity.kind}; only options and snapshots are traceable"
                )
            path = [current]
            while True:
                predecessors = self.query(predicate="followedBy", object=current)
                if not predecessors:
                    break
                current = predecessors[0].subject
                path.append(current)
            origins = self.query(predicate="suggestsActionFor", object=current)
            if not origins:
                raise OrphanNodeError(f"no forecast reaches {node}")
            return TraceResult(origin_forecast=origins[0].subject, path=tuple(path))

    # --- export / import ---

    def export_ntriples(self, path: str | Path) -> None:
        """Deterministic N-Triples dump: kind triples, attribute literals, relations."""
        lines = []
        with self._lock:
            for entity in self._entities.values():
                lines.append(f"{_uri(_entity_uri(entity.entity_id))} {_uri(RDF_TYPE)} "
                             f"{_uri(BASE_NAMESPACE + 'kind/' + entity.kind)} .")
                for key, value in entity.attributes.items():
                    pred = BASE_NAMESPACE + "attribute/" + quote(key, safe="")
                    lines.append(f"{_uri(_entity_uri(entity.entity_id))} {_uri(pred)} "
                                 f"{_literal(value)} .")
            for triple in self._triples:
                pred = BASE_NAMESPACE + "relation/" + triple.predicate
                lines.append(f"{_uri(_entity_uri(triple.subject))} {_uri(pred)} "
                             f"{_uri(_entity_uri(triple.object))} .")
        lines.sort()
        Path(path).write_text("".join(line + "\n" for line in lines))

    def __eq__(self, other) -> bool:
        if not isinstance(other, KnowledgeGraph):
            return NotImplemented
        return (
            {e.entity_id: (e.kind, e.attributes) for e in self._entities.values()}
            == {e.entity_id: (e.kind, e.attributes) for e in other._entities.values()}
            and self._triples == other._triples
        )

    # --- internals ---

    def _require(self, entity_id: str) -> Entity:
        entity = self._entities.get(entity_id)
        if entity is None:
            raise UnknownEntityError(f"unknown entity {entity_id}")
        return entity

    def _has(self, subject: str, predicate: str, object: str) -> bool:
        return Triple(subject, predicate, object) in self._triples

    def _would_cycle(self, candidate: Triple) -> bool:
        # follow existing edges forward from the new object; predicate is out-degree <= 1
        current = candidate.object
        while current is not None:
            if current == candidate.subject:
                return True
            nxt = None
            for t in self._by_subject.get(current, ()):
                if t.predicate == candidate.predicate:
                    nxt = t.object
                    break
            current = nxt
        return False

    def _log(self, record: dict) -> None:
        if not self._logging or self._log_path is None:
            return
        payload = json.dumps(record, sort_keys=True, separators=(",", ":"))
        data = payload.encode()
        with self._log_path.open("ab") as fh:
            fh.write(f"{len(data)}\n".encode())
            fh.write(data)
            fh.write(b"\n")

    def _replay(self, path: Path) -> None:
        for record in _read_log(path):
            if record["op"] == "entity":
                self.assert_entity(Entity(record["id"], record["kind"], dict(record["attributes"])))
            elif record["op"] == "set_attr":
                self.set_attribute(record["id"], record["key"], record["value"])
            elif record["op"] == "triple":
                self.assert_triple(Triple(record["s"], record["p"], record["o"]))
            else:
                raise SchemaViolationError(f"unknown log record op {record['op']!r}")


def _read_log(path: Path) -> Iterator[dict]:
    with path.open("rb") as fh:
        while True:
            header = fh.readline()
            if not header:
                return
            length = int(header.strip())
            payload = fh.read(length)
            fh.read(1)  # trailing newline
            yield json.loads(payload)


def _entity_uri(entity_id: str) -> str:
    return BASE_NAMESPACE + "entity/" + quote(entity_id, safe="")


def _uri(value: str) -> str:
    return f"<{value}>"


def _escape_literal(text: str) -> str:
    return (text.replace("\\", "\\\\").replace('"', '\\"')
            .replace("\n", "\\n").replace("\r", "\\r").replace("\t", "\\t"))


def _unescape_literal(text: str) -> str:
    return (text.replace("\\t", "\t").replace("\\r", "\r").replace("\\n", "\n")
            .replace('\\"', '"').replace("\\\\", "\\"))


def _literal(value: Scalar) -> str:
    if isinstance(value, bool):
        return f'"{str(value).lower()}"^^{_uri(XSD + "boolean")}'
    if isinstance(value, int):
        return f'"{value}"^^{_uri(XSD + "integer")}'
    if isinstance(value, float):
        return f'"{value!r}"^^{_uri(XSD + "double")}'
    return f'"{_escape_literal(value)}"'


_LINE_RE = re.compile(
    r"^<(?P<s>[^>]*)> <(?P<p>[^>]*)> "
    r"(?:<(?P<o>[^>]*)>|\"(?P<lit>(?:[^\"\\]|\\.)*)\"(?:\^\^<(?P<dtype>[^>]*)>)?) \.$"
)


def import_ntriples(path: str | Path, schema: dict[str, RelationRule] | None = None) -> KnowledgeGraph:
    """Rebuild a graph from an export produced by export_ntriples."""
    graph = KnowledgeGraph(schema=schema)
    attributes: list[tuple[str, str, Scalar]] = []
    relations: list[Triple] = []
    for line_no, line in enumerate(Path(path).read_text().splitlines(), start=1):
        if not line.strip():
            continue
        match = _LINE_RE.match(line)
        if not match:
            raise SchemaViolationError(f"{path}:{line_no}: not a valid N-Triples line")
        subject = _strip_entity(match["s"], path, line_no)
        predicate = match["p"]
        if predicate == RDF_TYPE:
            kind = match["o"].removeprefix(BASE_NAMESPACE + "kind/")
            graph.assert_entity(Entity(subject, kind))
        elif predicate.startswith(BASE_NAMESPACE + "attribute/"):
            key = unquote(predicate.removeprefix(BASE_NAMESPACE + "attribute/"))
            attributes.append((subject, key, _parse_literal(match["lit"], match["dtype"])))
        elif predicate.startswith(BASE_NAMESPACE + "relation/"):
            relations.append(Triple(
                subject,
                predicate.removeprefix(BASE_NAMESPACE + "relation/"),
                _strip_entity(match["o"], path, line_no),
            ))
        else:
            raise SchemaViolationError(f"{path}:{line_no}: unknown predicate namespace {predicate}")
    for entity_id, key, value in attributes:
        graph.set_attribute(entity_id, key, value)
    for triple in relations:
        graph.assert_triple(triple)
    return graph


def _strip_entity(uri: str, path, line_no: int) -> str:
    prefix = BASE_NAMESPACE + "entity/"
    if not uri.startswith(prefix):
        raise SchemaViolationError(f"{path}:{line_no}: {uri} is not an entity URI")
    return unquote(uri.removeprefix(prefix))


def _parse_literal(raw: str, dtype: str | None) -> Scalar:
    if dtype == XSD + "boolean":
        return raw == "true"
    if dtype == XSD + "integer":
        return int(raw)
    if dtype == XSD + "double":
        return float(raw)
    return _unescape_literal(raw)
