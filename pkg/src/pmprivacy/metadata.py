"""Privacy metadata stored as a log-level XES extension.

Layout under the ``privacy`` prefix::

    <list key="privacy:anonymizations">
      <values>
        <container key="privacy:anonymizer">
          <string key="privacy:operation_type" value="sub"/>
          <string key="privacy:level" value="event"/>
          <string key="privacy:target" value="activity"/>
          <list key="privacy:operation_parameters">   (optional)
          <list key="privacy:statistics">             (optional)
          <list key="privacy:desired_analyses">       (optional)
        </container>
        ...
      </values>
    </list>

The position in the list is the layer (1-based). Nothing is ever written to
traces or events.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Any, Mapping

from .signature import AnonymizerSignature
from .xes import Extension, XesAttribute, XesDocument

PRIVACY_PREFIX = "privacy"
PRIVACY_EXTENSION = Extension("Privacy", PRIVACY_PREFIX, "http://www.xes-standard.org/privacy.xesext")

ANONYMIZATIONS = "privacy:anonymizations"
ANONYMIZER = "privacy:anonymizer"
OPERATION_TYPE = "privacy:operation_type"
LEVEL = "privacy:level"
TARGET = "privacy:target"
OPERATION_PARAMETERS = "privacy:operation_parameters"
STATISTICS = "privacy:statistics"
DESIRED_ANALYSES = "privacy:desired_analyses"
ANALYSIS = "privacy:analysis"

OPTIONAL_FIELDS = ("operation_parameters", "statistics", "desired_analyses")


class MetadataError(ValueError):
    """The stored anonymizations payload is malformed."""

    def __init__(self, message: str, layer: int | None = None, key: str | None = None):
        self.layer = layer
        self.key = key
        super().__init__(message)


class LayerError(IndexError):
    def __init__(self, layer: int, size: int):
        self.layer = layer
        self.valid_range = (1, size)
        if size:
            msg = f"layer {layer} out of range; valid layers are 1..{size}"
        else:
            msg = f"layer {layer} out of range; the document has no anonymization layers"
        super().__init__(msg)


@dataclass(frozen=True)
class AnonymizationRecord:
    layer: int
    signature: AnonymizerSignature
    operation_parameters: tuple[tuple[str, str], ...] = ()
    statistics: tuple[tuple[str, str], ...] = ()
    desired_analyses: tuple[str, ...] = ()

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "layer": self.layer,
            "operation_type": self.signature.operation_type,
            "level": self.signature.level,
            "target": self.signature.target,
        }
        if self.operation_parameters:
            out["operation_parameters"] = dict(self.operation_parameters)
        if self.statistics:
            out["statistics"] = dict(self.statistics)
        if self.desired_analyses:
            out["desired_analyses"] = list(self.desired_analyses)
        return out


def _pairs(value: Any) -> list[tuple[str, str]]:
    """Accept a mapping, an iterable of pairs, or ``"name=value"`` strings."""
    if value is None:
        return []
    if isinstance(value, str):
        value = [value]
    if isinstance(value, Mapping):
        items = value.items()
    else:
        items = []
        for item in value:
            if isinstance(item, str):
                name, sep, text = item.partition("=")
                if not sep:
                    raise ValueError(f"expected 'name=value', got {item!r}")
                items.append((name.strip(), text.strip()))
            else:
                name, text = item
                items.append((name, text))
    return [(str(k), str(v)) for k, v in items]


def _merge_pairs(old: tuple[tuple[str, str], ...], new: list[tuple[str, str]]) -> tuple[tuple[str, str], ...]:
    merged = dict(old)
    merged.update(new)
    return tuple(merged.items())


def _encode(record: AnonymizationRecord) -> XesAttribute:
    sig = record.signature
    children = [
        XesAttribute(OPERATION_TYPE, "string", sig.operation_type),
        XesAttribute(LEVEL, "string", sig.level),
        XesAttribute(TARGET, "string", sig.target),
    ]
    if record.operation_parameters:
        children.append(XesAttribute(
            OPERATION_PARAMETERS, "list", None,
            tuple(XesAttribute(k, "string", v) for k, v in record.operation_parameters),
        ))
    if record.statistics:
        children.append(XesAttribute(
            STATISTICS, "list", None,
            tuple(XesAttribute(k, "string", v) for k, v in record.statistics),
        ))
    if record.desired_analyses:
        children.append(XesAttribute(
            DESIRED_ANALYSES, "list", None,
            tuple(XesAttribute(ANALYSIS, "string", a) for a in record.desired_analyses),
        ))
    return XesAttribute(ANONYMIZER, "container", None, tuple(children))


def _decode(attr: XesAttribute, layer: int) -> AnonymizationRecord:
    if attr.type != "container":
        raise MetadataError(f"layer {layer}: expected a container, found {attr.type}", layer, attr.key)
    mandatory = {}
    for key in (OPERATION_TYPE, LEVEL, TARGET):
        child = attr.child(key)
        if child is None or child.value is None:
            raise MetadataError(f"layer {layer}: missing mandatory key {key!r}", layer, key)
        mandatory[key] = str(child.value)
    try:
        sig = AnonymizerSignature(mandatory[OPERATION_TYPE], mandatory[LEVEL], mandatory[TARGET])
    except ValueError as exc:
        raise MetadataError(f"layer {layer}: {exc}", layer) from None

    def pairs(key: str) -> tuple[tuple[str, str], ...]:
        child = attr.child(key)
        if child is None:
            return ()
        return tuple((c.key, str(c.value)) for c in child.children)

    analyses = attr.child(DESIRED_ANALYSES)
    return AnonymizationRecord(
        layer=layer,
        signature=sig,
        operation_parameters=pairs(OPERATION_PARAMETERS),
        statistics=pairs(STATISTICS),
        desired_analyses=tuple(str(c.value) for c in analyses.children) if analyses else (),
    )


def _with_records(doc: XesDocument, records: list[AnonymizationRecord]) -> XesDocument:
    payload = XesAttribute(ANONYMIZATIONS, "list", None, tuple(_encode(r) for r in records))
    attrs = list(doc.log_attributes)
    for i, attr in enumerate(attrs):
        if attr.key == ANONYMIZATIONS:
            attrs[i] = payload
            break
    else:
        attrs.append(payload)
    extensions = doc.extensions
    if doc.extension(PRIVACY_PREFIX) is None:
        extensions = extensions + (PRIVACY_EXTENSION,)
    return replace(doc, log_attributes=tuple(attrs), extensions=extensions)


def get_anonymizations(doc: XesDocument) -> list[AnonymizationRecord]:
    """All anonymization layers in stored order; empty when the document has none."""
    payload = doc.log_attribute(ANONYMIZATIONS)
    if payload is None:
        return []
    if payload.type != "list":
        raise MetadataError(f"{ANONYMIZATIONS} must be a list, found {payload.type}", key=ANONYMIZATIONS)
    return [_decode(attr, i) for i, attr in enumerate(payload.children, start=1)]


def get_anonymizer(doc: XesDocument, layer: int) -> AnonymizationRecord:
    records = get_anonymizations(doc)
    if not 1 <= layer <= len(records):
        raise LayerError(layer, len(records))
    return records[layer - 1]


def set_anonymizer(doc: XesDocument, signature: AnonymizerSignature) -> tuple[XesDocument, int]:
    """Append a layer with ``signature``, creating the extension and list if needed.

    Returns the new document and the 1-based layer index of the added record.
    """
    records = get_anonymizations(doc)
    records.append(AnonymizationRecord(len(records) + 1, signature))
    return _with_records(doc, records), len(records)


def set_optional_anonymizer(doc: XesDocument, layer: int, optionals: Mapping[str, Any] | None = None) -> XesDocument:
    """Merge optional attributes into an existing layer.

    ``optionals`` may hold ``operation_parameters`` and ``statistics``
    (mapping, pairs or ``"name=value"`` strings) and ``desired_analyses``
    (labels). Parameters and statistics are merged by name; analyses are
    appended unless already present.
    """
    records = get_anonymizations(doc)
    if not 1 <= layer <= len(records):
        raise LayerError(layer, len(records))
    optionals = dict(optionals or {})
    unknown = set(optionals) - set(OPTIONAL_FIELDS)
    if unknown:
        raise ValueError(f"unknown optional attributes: {', '.join(sorted(unknown))}")
    if not any(optionals.values()):
        return doc

    record = records[layer - 1]
    analyses = optionals.get("desired_analyses") or ()
    if isinstance(analyses, str):
        analyses = [analyses]
    merged_analyses = list(record.desired_analyses)
    merged_analyses.extend(a for a in map(str, analyses) if a not in merged_analyses)
    records[layer - 1] = replace(
        record,
        operation_parameters=_merge_pairs(record.operation_parameters, _pairs(optionals.get("operation_parameters"))),
        statistics=_merge_pairs(record.statistics, _pairs(optionals.get("statistics"))),
        desired_analyses=tuple(merged_analyses),
    )
    return _with_records(doc, records)


def format_record(record: AnonymizationRecord) -> list[str]:
    """Human-readable lines for one layer, as printed by the CLI."""
    sig = record.signature
    lines = [f"layer {record.layer}: type={sig.operation_type} level={sig.level} target={sig.target}"]
    if record.operation_parameters:
        lines.append("  operation_parameters: " + ", ".join(f"{k}={v}" for k, v in record.operation_parameters))
    if record.statistics:
        lines.append("  statistics: " + ", ".join(f"{k}={v}" for k, v in record.statistics))
    if record.desired_analyses:
        lines.append("  desired_analyses: " + ", ".join(record.desired_analyses))
    return lines

