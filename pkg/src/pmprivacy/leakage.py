"""Potential original logs for resource suppression.

Given a published log and the signature ``(sup, event, resource)``, any log
that agrees with it everywhere except on the null resources is a potential
original. Two counts are reported for the size of that set:

* ``paper_estimate``: number of null-resource slots times the universe size
* ``exact_count``: universe size raised to the number of slots, i.e. the
  number of distinct fills :func:`enumerate_ol` yields
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Any, Iterable, Iterator, Sequence

from .log import RESOURCE, EventLog, total_order_key
from .signature import AnonymizerSignature

SUPPORTED = ("sup", "event", "resource")
DEFAULT_CAP = 10_000


class UnsupportedSignatureError(ValueError):
    pass


class CapExceededError(ValueError):
    def __init__(self, count: int, cap: int):
        self.count = count
        self.cap = cap
        super().__init__(f"enumeration would yield {count} candidate logs, above the cap of {cap}")


def _signature_tuple(signature: AnonymizerSignature | Sequence[str]) -> tuple[str, ...]:
    if isinstance(signature, AnonymizerSignature):
        return signature.as_tuple()
    return tuple(signature)


@dataclass(frozen=True)
class LeakageQuery:
    """A published log, what its signature discloses, and the size of the fill universe.

    ``signature`` is ``(sup, event, resource)`` or the coarser ``(sup, event)``.
    ``condition`` is an optional ``(attribute, value)`` pair disclosed in
    addition, e.g. ``("concept:name", "r")``.
    """

    anonymized: EventLog
    signature: tuple[str, ...]
    universe_size: int
    condition: tuple[str, Any] | None = None
    allow_null_fill: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "signature", _signature_tuple(self.signature))
        if isinstance(self.universe_size, bool) or not isinstance(self.universe_size, int) or self.universe_size < 1:
            raise ValueError(f"universe size must be a positive integer, got {self.universe_size!r}")


@dataclass(frozen=True)
class OlEstimate:
    slots: int | None
    paper_estimate: int | None
    exact_count: int | None
    note: str = ""

    @property
    def bounded(self) -> bool:
        return self.exact_count is not None


def _matches(event, condition: tuple[str, Any] | None) -> bool:
    if condition is None:
        return True
    name, value = condition
    return event.get(name) == value


def suppressed_slots(log: EventLog, condition: tuple[str, Any] | None = None) -> list[str]:
    """Event ids with a null resource (and satisfying ``condition``), in case/trace order."""
    return [
        eid
        for case in log.cases.values()
        for eid in case.trace
        if log.events[eid].get(RESOURCE) is None and _matches(log.events[eid], condition)
    ]


def _check_supported(signature: tuple[str, ...]) -> None:
    if signature != SUPPORTED:
        raise UnsupportedSignatureError(
            f"potential-original analysis is only defined for (sup,event,resource), got ({','.join(signature)})"
        )


def estimate_ol_cardinality(query: LeakageQuery) -> OlEstimate:
    sig = query.signature
    if sig == ("sup", "event"):
        return OlEstimate(
            slots=None, paper_estimate=None, exact_count=None,
            note="unbounded: without a target the suppressed data could be whole events or any event attribute",
        )
    _check_supported(sig)
    slots = len(suppressed_slots(query.anonymized, query.condition))
    per_slot = query.universe_size + (1 if query.allow_null_fill else 0)
    return OlEstimate(slots=slots, paper_estimate=slots * query.universe_size, exact_count=per_slot**slots)


def po_check(
    candidate: EventLog,
    anonymized: EventLog,
    signature: AnonymizerSignature | Sequence[str],
    universe: Iterable[Any] | None = None,
    condition: tuple[str, Any] | None = None,
    allow_null_fill: bool = False,
) -> bool:
    """Could ``candidate`` be the original of ``anonymized`` under ``signature``?

    Null resources in ``anonymized`` must be filled in ``candidate`` with a
    value from ``universe`` (any non-null value when ``universe`` is None).
    With a ``condition``, only null slots matching it are free; the others
    must stay null.
    """
    _check_supported(_signature_tuple(signature))
    universe_set = None if universe is None else set(universe)

    if set(candidate.cases) != set(anonymized.cases) or set(candidate.events) != set(anonymized.events):
        return False
    # the resource name may only be declared once a fill introduces a value
    if (candidate.event_attribute_names - {RESOURCE} != anonymized.event_attribute_names - {RESOURCE}
            or candidate.case_attribute_names != anonymized.case_attribute_names):
        return False
    for cid, case in anonymized.cases.items():
        other = candidate.cases[cid]
        if other.attributes != case.attributes or other.trace != case.trace:
            return False
    for eid, event in anonymized.events.items():
        cand = candidate.events[eid]
        rest_a = {k: v for k, v in event.attributes.items() if k != RESOURCE}
        rest_c = {k: v for k, v in cand.attributes.items() if k != RESOURCE}
        if rest_a != rest_c:
            return False
        published = event.get(RESOURCE)
        filled = cand.get(RESOURCE)
        if published is not None:
            if filled != published:
                return False
            continue
        if not _matches(event, condition):
            if filled is not None:
                return False
            continue
        if filled is None:
            if not allow_null_fill:
                return False
        elif universe_set is not None and filled not in universe_set:
            return False
    return True


def enumerate_ol(
    query: LeakageQuery,
    universe: Iterable[Any],
    cap: int = DEFAULT_CAP,
) -> Iterator[EventLog]:
    """Yield every potential original log whose fills come from ``universe``.

    Fill assignments are produced in lexicographic order over the sorted
    universe, slots taken in case/trace order. Raises
    :class:`CapExceededError` before yielding anything if the number of
    candidates exceeds ``cap``.
    """
    _check_supported(query.signature)
    values: list[Any] = sorted(set(universe), key=total_order_key)
    if query.allow_null_fill:
        values = [None] + values
    log = query.anonymized
    slots = suppressed_slots(log, query.condition)
    count = len(values) ** len(slots)
    if count > cap:
        raise CapExceededError(count, cap)
    return _generate(log, slots, values)


def _generate(log: EventLog, slots: list[str], values: list[Any]) -> Iterator[EventLog]:
    for fill in itertools.product(values, repeat=len(slots)):
        events = dict(log.events)
        for eid, value in zip(slots, fill):
            events[eid] = events[eid].with_attribute(RESOURCE, value)
        names = log.event_attribute_names
        if any(v is not None for v in fill):
            names = names | {RESOURCE}
        yield EventLog(log.cases, events, names, log.case_attribute_names)


def fill_assignment(candidate: EventLog, anonymized: EventLog, condition: tuple[str, Any] | None = None) -> list[tuple[str, Any]]:
    """The ``(event id, resource)`` pairs a candidate uses for the free slots."""
    return [(eid, candidate.events[eid].get(RESOURCE)) for eid in suppressed_slots(anonymized, condition)]
