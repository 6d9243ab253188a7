"""Event log data model: events, cases and logs with their well-formedness checks.

Attribute values are plain Python objects: ``str``, ``int``, ``float``,
``bool``, timezone-aware ``datetime`` (UTC, millisecond precision) and
``None`` for the null value. An absent attribute and an explicit ``None``
are the same thing; ``None`` is never stored in an attribute map.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Sequence

ACTIVITY = "concept:name"
TIMESTAMP = "time:timestamp"
RESOURCE = "org:resource"
CASE_ID = "concept:name"

UTC = dt.timezone.utc

# Ordering of value kinds used wherever a total order over mixed values is
# needed (mode tie-breaks, deterministic draws).
_KIND_RANK = {"null": 0, "boolean": 1, "integer": 2, "real": 3, "text": 4, "timestamp": 5}


def normalize_timestamp(value: dt.datetime) -> dt.datetime:
    """Coerce to UTC and truncate to milliseconds. Naive values are taken as UTC."""
    if value.tzinfo is None:
        value = value.replace(tzinfo=UTC)
    else:
        value = value.astimezone(UTC)
    return value.replace(microsecond=value.microsecond // 1000 * 1000)


def normalize_value(value: Any) -> Any:
    if isinstance(value, dt.datetime):
        return normalize_timestamp(value)
    return value


def value_kind(value: Any) -> str:
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "boolean"
    if isinstance(value, int):
        return "integer"
    if isinstance(value, float):
        return "real"
    if isinstance(value, str):
        return "text"
    if isinstance(value, dt.datetime):
        return "timestamp"
    # opaque XES payloads (lists, containers, id-typed values)
    return "text"


def compare_values(a: Any, b: Any) -> int:
    """Three-way comparison of two values of the same kind.

    Raises ``TypeError`` when the kinds differ; a timestamp is never
    "less than" a string, the comparison is simply undefined.
    """
    ka, kb = value_kind(a), value_kind(b)
    if ka != kb:
        raise TypeError(f"cannot compare {ka} value with {kb} value")
    if ka == "null":
        return 0
    if ka == "text" and not (isinstance(a, str) and isinstance(b, str)):
        a, b = repr(a), repr(b)
    return (a > b) - (a < b)


def total_order_key(value: Any) -> tuple:
    """Sort key over all values: null < boolean < integer < real < text < timestamp."""
    kind = value_kind(value)
    if kind == "null":
        return (0,)
    if kind == "text" and not isinstance(value, str):
        value = repr(value)
    return (_KIND_RANK[kind], value)


def _clean_attributes(attributes: Mapping[str, Any] | None) -> dict[str, Any]:
    if not attributes:
        return {}
    return {k: normalize_value(v) for k, v in attributes.items() if v is not None}


@dataclass(frozen=True)
class Event:
    id: str
    attributes: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "attributes", _clean_attributes(self.attributes))

    def get(self, name: str) -> Any:
        return self.attributes.get(name)

    def with_attribute(self, name: str, value: Any) -> Event:
        attrs = dict(self.attributes)
        attrs[name] = value
        return Event(self.id, attrs)


@dataclass(frozen=True)
class Case:
    id: str
    attributes: dict[str, Any] = field(default_factory=dict)
    trace: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "attributes", _clean_attributes(self.attributes))
        object.__setattr__(self, "trace", tuple(self.trace))

    def get(self, name: str) -> Any:
        return self.attributes.get(name)

    def with_attribute(self, name: str, value: Any) -> Case:
        attrs = dict(self.attributes)
        attrs[name] = value
        return Case(self.id, attrs, self.trace)

    def with_trace(self, trace: Sequence[str]) -> Case:
        return Case(self.id, self.attributes, tuple(trace))


@dataclass(frozen=True)
class EventLog:
    """A log ``(C, E, N, #)``.

    ``cases`` and ``events`` are keyed by id and keep insertion order, which
    is also the order used when the log is written out. The attribute-name
    partition is stored explicitly rather than derived from the data.
    """

    cases: dict[str, Case] = field(default_factory=dict)
    events: dict[str, Event] = field(default_factory=dict)
    event_attribute_names: frozenset[str] = frozenset()
    case_attribute_names: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        object.__setattr__(self, "cases", dict(self.cases))
        object.__setattr__(self, "events", dict(self.events))
        object.__setattr__(self, "event_attribute_names", frozenset(self.event_attribute_names))
        object.__setattr__(self, "case_attribute_names", frozenset(self.case_attribute_names))

    @property
    def attribute_names(self) -> frozenset[str]:
        return self.event_attribute_names | self.case_attribute_names

    def trace_events(self, case_id: str) -> list[Event]:
        return [self.events[e] for e in self.cases[case_id].trace]

    def activities(self) -> set[Any]:
        return {e.get(ACTIVITY) for e in self.events.values() if e.get(ACTIVITY) is not None}

    def __len__(self) -> int:
        return len(self.cases)


def build_log(
    cases: Iterable[tuple[str, Mapping[str, Any], Sequence[tuple[str, Mapping[str, Any]]]]],
    event_attribute_names: Iterable[str] | None = None,
    case_attribute_names: Iterable[str] | None = None,
) -> EventLog:
    """Build a log from ``(case_id, case_attributes, [(event_id, event_attributes), ...])``.

    Attribute names default to the keys actually used.
    """
    case_map: dict[str, Case] = {}
    event_map: dict[str, Event] = {}
    ev_names: set[str] = set()
    case_names: set[str] = set()
    for case_id, case_attrs, events in cases:
        trace = []
        for event_id, attrs in events:
            ev = Event(event_id, dict(attrs))
            event_map[event_id] = ev
            ev_names.update(ev.attributes)
            trace.append(event_id)
        case = Case(case_id, dict(case_attrs), tuple(trace))
        case_names.update(case.attributes)
        case_map[case_id] = case
    return EventLog(
        case_map,
        event_map,
        frozenset(event_attribute_names) if event_attribute_names is not None else frozenset(ev_names),
        frozenset(case_attribute_names) if case_attribute_names is not None else frozenset(case_names),
    )


@dataclass(frozen=True)
class Violation:
    kind: str
    message: str
    case_id: str | None = None
    event_id: str | None = None

    def __str__(self) -> str:
        return f"{self.kind}: {self.message}"


class InvalidLogError(ValueError):
    """Raised when an operation receives a log that fails :func:`validate`."""

    def __init__(self, violations: Sequence[Violation]):
        self.violations = list(violations)
        shown = "; ".join(str(v) for v in self.violations[:5])
        more = f" (+{len(self.violations) - 5} more)" if len(self.violations) > 5 else ""
        super().__init__(f"invalid event log: {shown}{more}")


def validate(log: EventLog) -> list[Violation]:
    """Return every well-formedness violation of ``log``; an empty list means valid.

    Null timestamps are skipped by the ordering check.
    """
    out: list[Violation] = []

    overlap = log.event_attribute_names & log.case_attribute_names
    for name in sorted(overlap):
        out.append(Violation("attribute-partition", f"{name!r} is both an event and a case attribute"))

    for key, ev in log.events.items():
        if ev.id != key:
            out.append(Violation("event-key", f"event stored under {key!r} has id {ev.id!r}", event_id=key))
        undeclared = set(ev.attributes) - log.event_attribute_names
        for name in sorted(undeclared):
            out.append(Violation("undeclared-attribute", f"event {key!r} uses undeclared attribute {name!r}", event_id=key))

    owner: dict[str, str] = {}
    for key, case in log.cases.items():
        if case.id != key:
            out.append(Violation("case-key", f"case stored under {key!r} has id {case.id!r}", case_id=key))
        undeclared = set(case.attributes) - log.case_attribute_names
        for name in sorted(undeclared):
            out.append(Violation("undeclared-attribute", f"case {key!r} uses undeclared attribute {name!r}", case_id=key))

        seen: set[str] = set()
        for eid in case.trace:
            if eid in seen:
                out.append(Violation("duplicate-in-trace", f"event {eid!r} appears twice in trace of case {key!r}", key, eid))
                continue
            seen.add(eid)
            if eid in owner:
                out.append(Violation(
                    "shared-event",
                    f"event {eid!r} appears in traces of cases {owner[eid]!r} and {key!r}",
                    key, eid,
                ))
            else:
                owner[eid] = key
            if eid not in log.events:
                out.append(Violation("unknown-event", f"trace of case {key!r} references unknown event {eid!r}", key, eid))

        out.extend(_ordering_violations(log, case))

    for eid in log.events:
        if eid not in owner:
            out.append(Violation("orphan-event", f"event {eid!r} belongs to no trace", event_id=eid))
    return out


def _ordering_violations(log: EventLog, case: Case) -> list[Violation]:
    out = []
    prev: tuple[str, Any] | None = None
    for eid in case.trace:
        ev = log.events.get(eid)
        ts = ev.get(TIMESTAMP) if ev is not None else None
        if ts is None:
            continue
        if prev is not None:
            try:
                if compare_values(prev[1], ts) > 0:
                    out.append(Violation(
                        "timestamp-order",
                        f"event {eid!r} in case {case.id!r} is earlier than preceding event {prev[0]!r}",
                        case.id, eid,
                    ))
            except TypeError as exc:
                out.append(Violation("timestamp-type", f"case {case.id!r}: {exc}", case.id, eid))
        prev = (eid, ts)
    return out


def ensure_valid(log: EventLog) -> None:
    violations = validate(log)
    if violations:
        raise InvalidLogError(violations)


def project_trace(log: EventLog, case_id: str, keep: Iterable[str]) -> EventLog:
    """Restrict the trace of ``case_id`` to the event ids in ``keep``.

    Dropped events leave the log's event set; every other case is untouched.
    """
    if case_id not in log.cases:
        raise KeyError(f"unknown case id {case_id!r}")
    keep = set(keep)
    case = log.cases[case_id]
    new_trace = tuple(e for e in case.trace if e in keep)
    dropped = set(case.trace) - set(new_trace)
    cases = dict(log.cases)
    cases[case_id] = case.with_trace(new_trace)
    events = {k: v for k, v in log.events.items() if k not in dropped}
    return EventLog(cases, events, log.event_attribute_names, log.case_attribute_names)
