"""Reading and writing XES documents.

Traces map to cases (``concept:name`` is the case id), events keep their id
in ``identity:id``. Events without an explicit id get a generated one
(``e1``, ``e2``, ... in document order) which is written back on output,
so a parsed file and its re-serialization parse to the same document.

Nulls have no XES representation: a null attribute is simply not written.
"""

from __future__ import annotations

import datetime as dt
import gzip
import re
import shlex
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field, replace
from typing import Any, Iterable, Sequence

from .log import (
    CASE_ID,
    UTC,
    Case,
    Event,
    EventLog,
    Violation,
    normalize_timestamp,
    validate,
)

EVENT_ID = "identity:id"
IDENTITY_EXTENSION_URI = "http://www.xes-standard.org/identity.xesext"

SCALAR_TYPES = ("string", "date", "int", "float", "boolean", "id")
ATTRIBUTE_TAGS = SCALAR_TYPES + ("list", "container")


class XesParseError(ValueError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(f"{message}{where}")


class XesSerializeError(ValueError):
    def __init__(self, violations: Sequence[Violation]):
        self.violations = list(violations)
        super().__init__("refusing to serialize invalid document: " + "; ".join(str(v) for v in self.violations))


@dataclass(frozen=True)
class Extension:
    name: str
    prefix: str
    uri: str


@dataclass(frozen=True)
class Classifier:
    name: str
    keys: tuple[str, ...]


@dataclass(frozen=True)
class XesAttribute:
    """A typed XES attribute with optional nested attributes.

    For ``list`` and ``container`` the value is ``None`` and ``children``
    holds the elements; for scalars ``children`` are meta-attributes.
    """

    key: str
    type: str
    value: Any = None
    children: tuple[XesAttribute, ...] = ()

    def __post_init__(self) -> None:
        if self.type not in ATTRIBUTE_TAGS:
            raise ValueError(f"unknown XES attribute type {self.type!r}")
        object.__setattr__(self, "children", tuple(self.children))
        if self.type == "date" and isinstance(self.value, dt.datetime):
            object.__setattr__(self, "value", normalize_timestamp(self.value))

    def child(self, key: str) -> XesAttribute | None:
        for c in self.children:
            if c.key == key:
                return c
        return None


@dataclass(frozen=True)
class XesDocument:
    log: EventLog = field(default_factory=EventLog)
    extensions: tuple[Extension, ...] = ()
    globals: dict[str, tuple[XesAttribute, ...]] = field(default_factory=dict)
    classifiers: tuple[Classifier, ...] = ()
    log_attributes: tuple[XesAttribute, ...] = ()
    root_attributes: dict[str, str] = field(default_factory=lambda: {"xes.version": "1.0", "xes.features": "nested-attributes"})
    warnings: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "extensions", tuple(self.extensions))
        object.__setattr__(self, "classifiers", tuple(self.classifiers))
        object.__setattr__(self, "log_attributes", tuple(self.log_attributes))
        object.__setattr__(self, "globals", {k: tuple(v) for k, v in self.globals.items()})

    def extension(self, prefix: str) -> Extension | None:
        for ext in self.extensions:
            if ext.prefix == prefix:
                return ext
        return None

    def log_attribute(self, key: str) -> XesAttribute | None:
        for attr in self.log_attributes:
            if attr.key == key:
                return attr
        return None

    def with_log(self, log: EventLog) -> XesDocument:
        return replace(self, log=log, warnings=())


STANDARD_EXTENSIONS = (
    Extension("Concept", "concept", "http://www.xes-standard.org/concept.xesext"),
    Extension("Time", "time", "http://www.xes-standard.org/time.xesext"),
    Extension("Organizational", "org", "http://www.xes-standard.org/org.xesext"),
    Extension("Identity", "identity", IDENTITY_EXTENSION_URI),
)


def document_violations(doc: XesDocument) -> list[Violation]:
    out = list(validate(doc.log))
    seen: set[str] = set()
    for ext in doc.extensions:
        if ext.prefix in seen:
            out.append(Violation("extension-prefix", f"extension prefix {ext.prefix!r} declared twice"))
        seen.add(ext.prefix)
    for scope, attrs in doc.globals.items():
        for attr in attrs:
            if attr.type in SCALAR_TYPES and attr.value is None:
                out.append(Violation("global-default", f"global {scope} attribute {attr.key!r} has no default value"))
    return out


# -- values ------------------------------------------------------------------

_TS_RE = re.compile(
    r"^(\d{4})-(\d{2})-(\d{2})[T ](\d{2}):(\d{2})(?::(\d{2})(?:[.,](\d+))?)?\s*(Z|[+-]\d{2}(?::?\d{2})?)?$"
)


def parse_timestamp(text: str) -> dt.datetime:
    m = _TS_RE.match(text.strip())
    if not m:
        raise ValueError(f"invalid XES date {text!r}")
    year, month, day, hour, minute = (int(m.group(i)) for i in range(1, 6))
    second = int(m.group(6) or 0)
    frac = m.group(7) or ""
    micro = int((frac + "000000")[:6]) if frac else 0
    tz_text = m.group(8)
    if tz_text is None or tz_text == "Z":
        tz = UTC
    else:
        sign = -1 if tz_text[0] == "-" else 1
        digits = tz_text[1:].replace(":", "")
        hours, minutes = int(digits[:2]), int(digits[2:4] or 0)
        tz = dt.timezone(sign * dt.timedelta(hours=hours, minutes=minutes))
    return normalize_timestamp(dt.datetime(year, month, day, hour, minute, second, micro, tzinfo=tz))


def format_timestamp(value: dt.datetime) -> str:
    value = normalize_timestamp(value)
    return value.strftime("%Y-%m-%dT%H:%M:%S.") + f"{value.microsecond // 1000:03d}+00:00"


def _parse_scalar(tag: str, text: str | None) -> Any:
    if text is None:
        return None
    if tag in ("string", "id"):
        return text
    if tag == "int":
        return int(text)
    if tag == "float":
        return float(text)
    if tag == "boolean":
        lowered = text.strip().lower()
        if lowered not in ("true", "false"):
            raise ValueError(f"invalid XES boolean {text!r}")
        return lowered == "true"
    if tag == "date":
        return parse_timestamp(text)
    raise ValueError(tag)


def _format_scalar(type_: str, value: Any) -> str:
    if type_ == "boolean":
        return "true" if value else "false"
    if type_ == "date":
        return format_timestamp(value)
    if type_ == "float":
        return repr(float(value))
    return str(value)


def type_of(value: Any) -> str:
    if isinstance(value, bool):
        return "boolean"
    if isinstance(value, int):
        return "int"
    if isinstance(value, float):
        return "float"
    if isinstance(value, dt.datetime):
        return "date"
    if isinstance(value, str):
        return "string"
    raise TypeError(f"no XES type for {type(value).__name__}")


def to_model_value(attr: XesAttribute) -> Any:
    """Plain Python value for simple attributes; the attribute itself otherwise."""
    if attr.type in ("string", "int", "float", "boolean", "date") and not attr.children:
        return attr.value
    return attr


def to_xes_attribute(key: str, value: Any) -> XesAttribute:
    if isinstance(value, XesAttribute):
        return value if value.key == key else replace(value, key=key)
    return XesAttribute(key, type_of(value), value)


# -- parsing -----------------------------------------------------------------

def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1] if "}" in tag else tag


def _parse_attribute(el: ET.Element) -> XesAttribute:
    tag = _local(el.tag)
    key = el.get("key")
    if key is None:
        raise XesParseError(f"<{tag}> attribute without key")
    if tag == "list":
        items: list[XesAttribute] = []
        for child in el:
            ctag = _local(child.tag)
            if ctag == "values":
                items.extend(_parse_attribute(c) for c in child if _local(c.tag) in ATTRIBUTE_TAGS)
            elif ctag in ATTRIBUTE_TAGS:
                items.append(_parse_attribute(child))
        return XesAttribute(key, "list", None, tuple(items))
    children = tuple(_parse_attribute(c) for c in el if _local(c.tag) in ATTRIBUTE_TAGS)
    if tag == "container":
        return XesAttribute(key, "container", None, children)
    try:
        value = _parse_scalar(tag, el.get("value"))
    except ValueError as exc:
        raise XesParseError(f"bad value for attribute {key!r}: {exc}") from None
    return XesAttribute(key, tag, value, children)


def parse_xes(data: bytes | str) -> XesDocument:
    """Parse XES from bytes (optionally gzip-compressed) or text."""
    if isinstance(data, str):
        data = data.encode("utf-8")
    if data[:2] == b"\x1f\x8b":
        data = gzip.decompress(data)
    try:
        root = ET.fromstring(data)
    except ET.ParseError as exc:
        line, col = exc.position
        raise XesParseError(f"malformed XML: {exc.msg if hasattr(exc, 'msg') else exc}", line, col) from None
    if _local(root.tag) != "log":
        raise XesParseError(f"root element is <{_local(root.tag)}>, expected <log>")

    extensions: list[Extension] = []
    globals_: dict[str, tuple[XesAttribute, ...]] = {}
    classifiers: list[Classifier] = []
    log_attrs: list[XesAttribute] = []
    raw_traces: list[tuple[list[XesAttribute], list[list[XesAttribute]]]] = []

    for child in root:
        tag = _local(child.tag)
        if tag == "extension":
            extensions.append(Extension(child.get("name", ""), child.get("prefix", ""), child.get("uri", "")))
        elif tag == "global":
            scope = child.get("scope", "event")
            globals_[scope] = tuple(_parse_attribute(c) for c in child if _local(c.tag) in ATTRIBUTE_TAGS)
        elif tag == "classifier":
            classifiers.append(Classifier(child.get("name", ""), tuple(shlex.split(child.get("keys", "")))))
        elif tag in ATTRIBUTE_TAGS:
            log_attrs.append(_parse_attribute(child))
        elif tag == "trace":
            trace_attrs = [_parse_attribute(c) for c in child if _local(c.tag) in ATTRIBUTE_TAGS]
            events = [
                [_parse_attribute(c) for c in ev if _local(c.tag) in ATTRIBUTE_TAGS]
                for ev in child
                if _local(ev.tag) == "event"
            ]
            raw_traces.append((trace_attrs, events))

    warnings: list[str] = []
    log = _build_log(raw_traces, globals_, warnings)

    if log.events and not any(e.prefix == "identity" for e in extensions):
        extensions.append(Extension("Identity", "identity", IDENTITY_EXTENSION_URI))

    doc = XesDocument(
        log=log,
        extensions=tuple(extensions),
        globals=globals_,
        classifiers=tuple(classifiers),
        log_attributes=tuple(log_attrs),
        root_attributes=dict(root.attrib),
    )
    warnings.extend(str(v) for v in document_violations(doc))
    return replace(doc, warnings=tuple(warnings))


def _build_log(raw_traces, globals_, warnings: list[str]) -> EventLog:
    explicit_ids = {
        a.value
        for _, events in raw_traces
        for attrs in events
        for a in attrs
        if a.key == EVENT_ID and a.value is not None
    }
    counter = 0

    def fresh_event_id() -> str:
        nonlocal counter
        while True:
            counter += 1
            candidate = f"e{counter}"
            if candidate not in explicit_ids:
                return candidate

    cases: dict[str, Case] = {}
    events: dict[str, Event] = {}
    event_names: set[str] = {a.key for a in globals_.get("event", ()) if a.key != EVENT_ID}
    case_names: set[str] = {a.key for a in globals_.get("trace", ()) if a.key != CASE_ID}

    for index, (trace_attrs, raw_events) in enumerate(raw_traces, start=1):
        case_id = None
        case_attrs: dict[str, Any] = {}
        for a in trace_attrs:
            if a.key == CASE_ID and a.type == "string" and not a.children and case_id is None:
                case_id = a.value
            else:
                case_attrs[a.key] = to_model_value(a)
        if case_id is None:
            case_id = f"case{index}"
            warnings.append(f"trace {index} has no {CASE_ID}; using {case_id!r}")
        if case_id in cases:
            original, n = case_id, 2
            while f"{original}#{n}" in cases:
                n += 1
            case_id = f"{original}#{n}"
            warnings.append(f"duplicate case id {original!r} renamed to {case_id!r}")
        case_names.update(case_attrs)

        trace: list[str] = []
        for attrs in raw_events:
            event_id = None
            ev_attrs: dict[str, Any] = {}
            for a in attrs:
                if a.key == EVENT_ID and event_id is None and a.type in ("string", "id") and not a.children:
                    event_id = a.value
                else:
                    ev_attrs[a.key] = to_model_value(a)
            if event_id is None:
                event_id = fresh_event_id()
            if event_id in events:
                warnings.append(f"event id {event_id!r} occurs more than once")
            else:
                events[event_id] = Event(event_id, ev_attrs)
            event_names.update(ev_attrs)
            trace.append(event_id)
        cases[case_id] = Case(case_id, case_attrs, tuple(trace))

    return EventLog(cases, events, frozenset(event_names), frozenset(case_names))


# -- serialization -----------------------------------------------------------

def _ordered_keys(keys: Iterable[str], declared: Sequence[XesAttribute], first: str | None = None) -> list[str]:
    keys = set(keys)
    out: list[str] = []
    if first is not None and first in keys:
        out.append(first)
    for g in declared:
        if g.key in keys and g.key not in out:
            out.append(g.key)
    out.extend(sorted(k for k in keys if k not in out))
    return out


def _attribute_element(parent: ET.Element, attr: XesAttribute) -> None:
    if attr.type == "list":
        el = ET.SubElement(parent, "list", {"key": attr.key})
        values = ET.SubElement(el, "values")
        for item in attr.children:
            _attribute_element(values, item)
        return
    el = ET.SubElement(parent, attr.type, {"key": attr.key})
    if attr.type != "container":
        el.set("value", _format_scalar(attr.type, attr.value))
    for child in attr.children:
        _attribute_element(el, child)


def _quote_key(key: str) -> str:
    return f"'{key}'" if any(ch.isspace() for ch in key) else key


def serialize_xes(doc: XesDocument) -> bytes:
    """Write ``doc`` as XES. Output is a deterministic function of the document."""
    violations = document_violations(doc)
    if violations:
        raise XesSerializeError(violations)

    root = ET.Element("log", dict(doc.root_attributes))
    for ext in doc.extensions:
        ET.SubElement(root, "extension", {"name": ext.name, "prefix": ext.prefix, "uri": ext.uri})
    for scope, attrs in doc.globals.items():
        g = ET.SubElement(root, "global", {"scope": scope})
        for attr in attrs:
            _attribute_element(g, attr)
    for clf in doc.classifiers:
        ET.SubElement(root, "classifier", {"name": clf.name, "keys": " ".join(_quote_key(k) for k in clf.keys)})
    for attr in doc.log_attributes:
        _attribute_element(root, attr)

    trace_globals = doc.globals.get("trace", ())
    event_globals = doc.globals.get("event", ())
    log = doc.log
    for case in log.cases.values():
        t = ET.SubElement(root, "trace")
        _attribute_element(t, XesAttribute(CASE_ID, "string", case.id))
        for key in _ordered_keys(case.attributes, trace_globals):
            _attribute_element(t, to_xes_attribute(key, case.attributes[key]))
        for eid in case.trace:
            event = log.events[eid]
            e = ET.SubElement(t, "event")
            _attribute_element(e, XesAttribute(EVENT_ID, "string", event.id))
            for key in _ordered_keys(event.attributes, event_globals):
                _attribute_element(e, to_xes_attribute(key, event.attributes[key]))

    ET.indent(root, space="  ")
    body = ET.tostring(root, encoding="unicode", short_empty_elements=True)
    return ('<?xml version="1.0" encoding="UTF-8"?>\n' + body + "\n").encode("utf-8")
