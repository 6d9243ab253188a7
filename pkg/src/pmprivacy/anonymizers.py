"""The anonymization operations and the layered pipeline that applies them.

Every anonymizer takes a valid :class:`EventLog` and returns a new one; the
input is never modified. Metadata is written only by :func:`apply_pipeline`.
"""

from __future__ import annotations

import datetime as dt
import hashlib
import hmac
import random
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Mapping, Sequence

from . import metadata
from .log import (
    ACTIVITY,
    RESOURCE,
    TIMESTAMP,
    Event,
    EventLog,
    ensure_valid,
    normalize_timestamp,
    total_order_key,
)
from .signature import AnonymizerSignature
from .xes import XesDocument

TIME_LEVELS = ("seconds", "minutes", "hours", "days", "months", "years")
GENERALIZATION_SCHEMES = ("full-domain", "subtree", "sibling", "cell")


class ParameterError(ValueError):
    """An anonymizer was given parameters that violate its preconditions."""


class UnsupportedError(ValueError):
    """A recognized but unimplemented feature was requested."""


class SeededRng:
    """Reproducible random draws.

    Backed by the stdlib Mersenne Twister; draws use only ``getrandbits``
    with rejection sampling so the sequence does not depend on how a
    particular Python version implements ``choice``.
    """

    algorithm = "mt19937/getrandbits-rejection/v1"

    def __init__(self, seed: int = 0):
        if not isinstance(seed, int) or isinstance(seed, bool) or not 0 <= seed < 2**64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed!r}")
        self.seed = seed
        self._random = random.Random(seed)

    def below(self, n: int) -> int:
        if n <= 0:
            raise ValueError("cannot draw from an empty range")
        bits = n.bit_length()
        while True:
            r = self._random.getrandbits(bits)
            if r < n:
                return r

    def choice(self, items: Sequence[Any]) -> Any:
        return items[self.below(len(items))]


@dataclass(frozen=True)
class SubstitutionSpec:
    sensitive: frozenset
    substitutes: frozenset

    def __post_init__(self) -> None:
        object.__setattr__(self, "sensitive", frozenset(self.sensitive))
        object.__setattr__(self, "substitutes", frozenset(self.substitutes))
        both = self.sensitive & self.substitutes
        if both:
            raise ParameterError(f"activities both sensitive and substitutes: {sorted(map(str, both))}")

    def check(self, log: EventLog) -> None:
        present = self.substitutes & log.activities()
        if present:
            raise ParameterError(f"substitute activities already occur in the log: {sorted(map(str, present))}")


@dataclass(frozen=True)
class ClusterSpec:
    clusters: tuple[frozenset, ...]

    def __post_init__(self) -> None:
        clusters = tuple(frozenset(c) for c in self.clusters)
        object.__setattr__(self, "clusters", clusters)
        seen: set = set()
        for i, cl in enumerate(clusters):
            if not cl:
                raise ParameterError(f"cluster {i} is empty")
            shared = seen & cl
            if shared:
                raise ParameterError(f"clusters are not disjoint: {sorted(shared)} occur more than once")
            seen |= cl

    def check(self, log: EventLog) -> None:
        for cl in self.clusters:
            unknown = sorted(c for c in cl if c not in log.cases)
            if unknown:
                raise ParameterError(f"cluster references unknown cases: {unknown}")

    def cluster_of(self, case_id: str) -> frozenset | None:
        for cl in self.clusters:
            if case_id in cl:
                return cl
        return None


def _hmac_sha256(value: str, key: bytes) -> str:
    return hmac.new(key, value.encode("utf-8"), hashlib.sha256).hexdigest()


CIPHERS: dict[str, Callable[[str, bytes], str]] = {"hmac-sha256": _hmac_sha256}


@dataclass(frozen=True)
class CipherSpec:
    method: str
    key: bytes

    def __post_init__(self) -> None:
        if isinstance(self.key, str):
            object.__setattr__(self, "key", self.key.encode("utf-8"))
        if self.method not in CIPHERS:
            raise ParameterError(f"unknown cipher {self.method!r}; registered: {', '.join(sorted(CIPHERS))}")
        if not self.key:
            raise ParameterError("cipher key must not be empty")


def _rebuild(log: EventLog, cases=None, events=None, event_names=None) -> EventLog:
    return EventLog(
        log.cases if cases is None else cases,
        log.events if events is None else events,
        log.event_attribute_names if event_names is None else event_names,
        log.case_attribute_names,
    )


# -- suppression -------------------------------------------------------------

def suppress_events_by_activity(log: EventLog, activity: Any) -> EventLog:
    """Remove every event whose activity is ``activity``; cases stay, possibly with empty traces."""
    ensure_valid(log)
    events = {k: e for k, e in log.events.items() if e.get(ACTIVITY) != activity}
    cases = {k: c.with_trace([e for e in c.trace if e in events]) for k, c in log.cases.items()}
    return _rebuild(log, cases, events)


def suppress_cases_by_trace_length(log: EventLog, k: int) -> EventLog:
    """Remove cases whose trace has exactly ``k`` events, together with their events."""
    if isinstance(k, bool) or not isinstance(k, int) or k < 1:
        raise ParameterError(f"trace length must be a positive integer, got {k!r}")
    ensure_valid(log)
    cases = {cid: c for cid, c in log.cases.items() if len(c.trace) != k}
    kept = {e for c in cases.values() for e in c.trace}
    events = {eid: e for eid, e in log.events.items() if eid in kept}
    return _rebuild(log, cases, events)


def suppress_resource_by_activity(log: EventLog, activity: Any) -> EventLog:
    """Set the resource to null on events whose activity is ``activity``."""
    ensure_valid(log)
    events = {
        eid: (e.with_attribute(RESOURCE, None) if e.get(ACTIVITY) == activity else e)
        for eid, e in log.events.items()
    }
    return _rebuild(log, events=events)


# -- addition ----------------------------------------------------------------

def add_trailing_event(log: EventLog, trigger_activity: Any, new_activity: Any, new_resource: Any) -> EventLog:
    """Append a fresh event to every trace whose last activity is ``trigger_activity``.

    The new event is one millisecond after the last one and carries only an
    activity, a resource and a timestamp; other event attributes are null.
    """
    ensure_valid(log)
    events = dict(log.events)
    cases = dict(log.cases)
    counter = 0
    for cid, case in log.cases.items():
        if not case.trace:
            continue
        last = log.events[case.trace[-1]]
        if last.get(ACTIVITY) != trigger_activity:
            continue
        last_time = last.get(TIMESTAMP)
        if not isinstance(last_time, dt.datetime):
            raise ParameterError(f"case {cid!r} ends with {trigger_activity!r} but its last timestamp is null")
        while True:
            counter += 1
            new_id = f"added-{counter}"
            if new_id not in events:
                break
        events[new_id] = Event(new_id, {
            ACTIVITY: new_activity,
            TIMESTAMP: last_time + dt.timedelta(milliseconds=1),
            RESOURCE: new_resource,
        })
        cases[cid] = case.with_trace(case.trace + (new_id,))
    names = log.event_attribute_names | {ACTIVITY, TIMESTAMP, RESOURCE}
    return _rebuild(log, cases, events, names)


# -- substitution ------------------------------------------------------------

def substitute_activities(log: EventLog, spec: SubstitutionSpec, rng: SeededRng) -> EventLog:
    """Replace each sensitive activity with an independently drawn substitute.

    Events are visited in case order, then trace order.
    """
    ensure_valid(log)
    spec.check(log)
    substitutes = sorted(spec.substitutes, key=total_order_key)
    events = dict(log.events)
    for case in log.cases.values():
        for eid in case.trace:
            ev = events[eid]
            if ev.get(ACTIVITY) in spec.sensitive:
                if not substitutes:
                    raise ParameterError("no substitute activities given but sensitive activities occur")
                events[eid] = ev.with_attribute(ACTIVITY, rng.choice(substitutes))
    return _rebuild(log, events=events)


# -- condensation and swapping ----------------------------------------------

def _check_case_attribute(log: EventLog, attr_name: str) -> None:
    if attr_name not in log.case_attribute_names:
        raise ParameterError(f"{attr_name!r} is not a case attribute of the log")


def mode(values: Iterable[Any]) -> Any:
    """Most frequent value; ties go to the smallest under :func:`total_order_key`."""
    counts = Counter(values)
    top = max(counts.values())
    return min((v for v, n in counts.items() if n == top), key=total_order_key)


def condense_case_attribute(log: EventLog, spec: ClusterSpec, attr_name: str) -> EventLog:
    """Replace ``attr_name`` of each case with the mode of its cluster."""
    ensure_valid(log)
    _check_case_attribute(log, attr_name)
    spec.check(log)
    for cid in log.cases:
        if spec.cluster_of(cid) is None:
            raise ParameterError(f"case {cid!r} is not covered by any cluster")
    modes = [mode(log.cases[c].get(attr_name) for c in cl) for cl in spec.clusters]
    cases = {}
    for cid, case in log.cases.items():
        idx = next(i for i, cl in enumerate(spec.clusters) if cid in cl)
        cases[cid] = case.with_attribute(attr_name, modes[idx])
    return _rebuild(log, cases=cases)


def swap_case_attribute(log: EventLog, spec: ClusterSpec, attr_name: str, rng: SeededRng) -> EventLog:
    """Give each clustered case the value of another case in its cluster.

    Draws are independent and read the original values, so the result need
    not be a permutation. Cases outside every cluster keep their value.
    """
    ensure_valid(log)
    _check_case_attribute(log, attr_name)
    spec.check(log)
    for cl in spec.clusters:
        if len(cl) < 2:
            raise ParameterError(f"swapping needs clusters of at least two cases; {sorted(cl)} is a singleton")
    original = {cid: c.get(attr_name) for cid, c in log.cases.items()}
    cases = dict(log.cases)
    for cid, case in log.cases.items():
        cl = spec.cluster_of(cid)
        if cl is None:
            continue
        pool = sorted({original[o] for o in cl if o != cid}, key=total_order_key)
        cases[cid] = case.with_attribute(attr_name, rng.choice(pool))
    return _rebuild(log, cases=cases)


# -- cryptography ------------------------------------------------------------

def encrypt_value(value: Any, cipher: CipherSpec) -> str:
    return CIPHERS[cipher.method]("" if value is None else str(value), cipher.key)


def encrypt_activity(log: EventLog, cipher: CipherSpec) -> EventLog:
    """Encrypt every activity label deterministically under ``cipher``."""
    ensure_valid(log)
    events = {eid: e.with_attribute(ACTIVITY, encrypt_value(e.get(ACTIVITY), cipher)) for eid, e in log.events.items()}
    return _rebuild(log, events=events)


# -- generalization ----------------------------------------------------------

def generalize_timestamp(value: dt.datetime, level: str) -> dt.datetime:
    """Floor ``value`` to ``level``: every field finer than the level is reset."""
    if level not in TIME_LEVELS:
        raise ParameterError(f"time level must be one of {', '.join(TIME_LEVELS)}; got {level!r}")
    value = normalize_timestamp(value)
    value = value.replace(microsecond=0)
    if level == "seconds":
        return value
    value = value.replace(second=0)
    if level == "minutes":
        return value
    value = value.replace(minute=0)
    if level == "hours":
        return value
    value = value.replace(hour=0)
    if level == "days":
        return value
    value = value.replace(day=1)
    if level == "months":
        return value
    return value.replace(month=1)


def generalize_time(log: EventLog, level: str, scheme: str = "full-domain") -> EventLog:
    """Generalize all timestamps to ``level`` (full-domain scheme only)."""
    if scheme not in GENERALIZATION_SCHEMES:
        raise ParameterError(f"unknown generalization scheme {scheme!r}")
    if scheme != "full-domain":
        raise UnsupportedError(f"generalization scheme {scheme!r} is not implemented; only 'full-domain' is")
    if level not in TIME_LEVELS:
        raise ParameterError(f"time level must be one of {', '.join(TIME_LEVELS)}; got {level!r}")
    ensure_valid(log)
    events = {}
    for eid, e in log.events.items():
        ts = e.get(TIMESTAMP)
        if ts is not None:
            if not isinstance(ts, dt.datetime):
                raise ParameterError(f"event {eid!r} has a non-date timestamp {ts!r}")
            e = e.with_attribute(TIMESTAMP, generalize_timestamp(ts, level))
        events[eid] = e
    return _rebuild(log, events=events)


# -- pipeline ----------------------------------------------------------------

def _as_list(value: Any) -> list:
    if isinstance(value, str):
        return [v.strip() for v in value.split(",") if v.strip()]
    return list(value)


def _as_clusters(value: Any) -> ClusterSpec:
    if isinstance(value, ClusterSpec):
        return value
    if isinstance(value, str):
        value = [_as_list(part) for part in value.split(";") if part.strip()]
    return ClusterSpec(tuple(frozenset(str(c) for c in cl) for cl in value))


def _as_int(value: Any, name: str) -> int:
    try:
        return int(value)
    except (TypeError, ValueError):
        raise ParameterError(f"{name} must be an integer, got {value!r}") from None


@dataclass(frozen=True)
class Operation:
    name: str
    params: tuple[str, ...]
    optional_params: tuple[str, ...]
    build: Callable[[Mapping[str, Any]], Callable[[EventLog, SeededRng], EventLog]]
    signature: Callable[[Mapping[str, Any]], AnonymizerSignature]


OPERATIONS: dict[str, Operation] = {
    op.name: op
    for op in [
        Operation(
            "suppress_events_by_activity", ("activity",), (),
            lambda p: lambda log, rng: suppress_events_by_activity(log, p["activity"]),
            lambda p: AnonymizerSignature("sup", "event", "event"),
        ),
        Operation(
            "suppress_cases_by_trace_length", ("k",), (),
            lambda p: (lambda k: lambda log, rng: suppress_cases_by_trace_length(log, k))(_as_int(p["k"], "k")),
            lambda p: AnonymizerSignature("sup", "case", "case"),
        ),
        Operation(
            "suppress_resource_by_activity", ("activity",), (),
            lambda p: lambda log, rng: suppress_resource_by_activity(log, p["activity"]),
            lambda p: AnonymizerSignature("sup", "event", "resource"),
        ),
        Operation(
            "add_trailing_event", ("trigger_activity", "new_activity", "new_resource"), (),
            lambda p: lambda log, rng: add_trailing_event(log, p["trigger_activity"], p["new_activity"], p["new_resource"]),
            lambda p: AnonymizerSignature("add", "case", "trace"),
        ),
        Operation(
            "substitute_activities", ("sensitive", "substitutes"), (),
            lambda p: (lambda spec: lambda log, rng: substitute_activities(log, spec, rng))(
                SubstitutionSpec(frozenset(_as_list(p["sensitive"])), frozenset(_as_list(p["substitutes"])))
            ),
            lambda p: AnonymizerSignature("sub", "event", "activity"),
        ),
        Operation(
            "condense_case_attribute", ("clusters", "attribute"), (),
            lambda p: (lambda spec: lambda log, rng: condense_case_attribute(log, spec, p["attribute"]))(
                _as_clusters(p["clusters"])
            ),
            lambda p: AnonymizerSignature("con", "case", p["attribute"]),
        ),
        Operation(
            "swap_case_attribute", ("clusters", "attribute"), (),
            lambda p: (lambda spec: lambda log, rng: swap_case_attribute(log, spec, p["attribute"], rng))(
                _as_clusters(p["clusters"])
            ),
            lambda p: AnonymizerSignature("swa", "case", p["attribute"]),
        ),
        Operation(
            "encrypt_activity", ("method", "key"), (),
            lambda p: (lambda cipher: lambda log, rng: encrypt_activity(log, cipher))(CipherSpec(p["method"], p["key"])),
            lambda p: AnonymizerSignature("cry", "event", "activity"),
        ),
        Operation(
            "generalize_time", ("level",), ("scheme",),
            lambda p: lambda log, rng: generalize_time(log, p["level"], p.get("scheme", "full-domain")),
            lambda p: AnonymizerSignature("gen", "event", "time"),
        ),
    ]
}


@dataclass(frozen=True)
class PipelineStep:
    """One configured anonymizer: operation name, its parameters, and optional metadata.

    ``optionals`` is passed to :func:`metadata.set_optional_anonymizer` for
    the layer this step creates; operation parameters are never recorded
    unless listed there.
    """

    op: str
    params: Mapping[str, Any] = field(default_factory=dict)
    optionals: Mapping[str, Any] = field(default_factory=dict)


class PipelineError(Exception):
    def __init__(self, index: int, op: str, cause: Exception):
        self.index = index
        self.op = op
        self.cause = cause
        super().__init__(f"step {index} ({op}): {cause}")


def prepare_step(step: PipelineStep, index: int) -> tuple[Callable[[EventLog, SeededRng], EventLog], AnonymizerSignature]:
    """Check a step's operation and parameters; returns the bound anonymizer and its signature."""
    op = OPERATIONS.get(step.op)
    if op is None:
        raise PipelineError(index, step.op, ParameterError(
            f"unknown operation {step.op!r}; known: {', '.join(sorted(OPERATIONS))}"
        ))
    params = dict(step.params)
    missing = [p for p in op.params if p not in params]
    extra = sorted(set(params) - set(op.params) - set(op.optional_params))
    try:
        if missing:
            raise ParameterError(f"missing parameters: {', '.join(missing)}")
        if extra:
            raise ParameterError(f"unexpected parameters: {', '.join(extra)}")
        if op.name == "generalize_time":
            if params["level"] not in TIME_LEVELS:
                raise ParameterError(f"time level must be one of {', '.join(TIME_LEVELS)}; got {params['level']!r}")
            scheme = params.get("scheme", "full-domain")
            if scheme not in GENERALIZATION_SCHEMES:
                raise ParameterError(f"unknown generalization scheme {scheme!r}")
            if scheme != "full-domain":
                raise UnsupportedError(f"generalization scheme {scheme!r} is not implemented; only 'full-domain' is")
        return op.build(params), op.signature(params)
    except (ParameterError, UnsupportedError, ValueError) as exc:
        raise PipelineError(index, step.op, exc) from exc


def apply_pipeline(doc: XesDocument, steps: Sequence[PipelineStep], rng: SeededRng) -> XesDocument:
    """Apply ``steps`` in order, appending one metadata layer per step.

    All steps are checked before any runs. On failure a :class:`PipelineError`
    naming the 1-based step index is raised and ``doc`` is left as it was.
    """
    prepared = [prepare_step(step, i) for i, step in enumerate(steps, start=1)]
    current = doc
    for i, (step, (anonymize, signature)) in enumerate(zip(steps, prepared), start=1):
        try:
            signature.check_target(current.log)
            log = anonymize(current.log, rng)
            ensure_valid(log)
            current, layer = metadata.set_anonymizer(current.with_log(log), signature)
            if step.optionals:
                current = metadata.set_optional_anonymizer(current, layer, step.optionals)
        except (ParameterError, UnsupportedError, ValueError, TypeError) as exc:
            raise PipelineError(i, step.op, exc) from exc
    return current
