"""Event Log Abstraction (ELA) documents.

An ELA file carries data derived from a log that is no longer a log itself,
with a small privacy header::

    <ela>
      <header>
        <origin>BPI Challenge 2012</origin>
        <method>connector</method>
        <desired_analyses><analysis>process discovery</analysis></desired_analyses>
      </header>
      <data>
        <columns><column>antecedent</column>...</columns>
        <row><cell>a</cell>...</row>
      </data>
    </ela>

All cells are text.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET
from collections import Counter
from dataclasses import dataclass, field

from .log import ACTIVITY, EventLog, ensure_valid

DFG_COLUMNS = ("antecedent", "consequent", "frequency")
DFG_METHOD = "dfg_abstraction"


class ElaError(ValueError):
    pass


@dataclass(frozen=True)
class ElaDocument:
    origin: str
    method: str
    desired_analyses: tuple[str, ...] = ()
    columns: tuple[str, ...] = ()
    rows: tuple[tuple[str, ...], ...] = field(default=())

    def __post_init__(self) -> None:
        object.__setattr__(self, "desired_analyses", tuple(self.desired_analyses))
        object.__setattr__(self, "columns", tuple(self.columns))
        object.__setattr__(self, "rows", tuple(tuple(str(c) for c in r) for r in self.rows))
        if not self.origin:
            raise ElaError("origin must not be empty")
        if not self.method:
            raise ElaError("method must not be empty")
        for i, row in enumerate(self.rows):
            if len(row) != len(self.columns):
                raise ElaError(f"row {i} has {len(row)} cells, expected {len(self.columns)}")


def write_ela(doc: ElaDocument) -> bytes:
    root = ET.Element("ela")
    header = ET.SubElement(root, "header")
    ET.SubElement(header, "origin").text = doc.origin
    ET.SubElement(header, "method").text = doc.method
    analyses = ET.SubElement(header, "desired_analyses")
    for a in doc.desired_analyses:
        ET.SubElement(analyses, "analysis").text = a
    data = ET.SubElement(root, "data")
    columns = ET.SubElement(data, "columns")
    for c in doc.columns:
        ET.SubElement(columns, "column").text = c
    for row in doc.rows:
        r = ET.SubElement(data, "row")
        for cell in row:
            ET.SubElement(r, "cell").text = cell
    ET.indent(root, space="  ")
    body = ET.tostring(root, encoding="unicode")
    return ('<?xml version="1.0" encoding="UTF-8"?>\n' + body + "\n").encode("utf-8")


def _text(el: ET.Element | None) -> str:
    return "" if el is None or el.text is None else el.text


def read_ela(data: bytes | str) -> ElaDocument:
    if isinstance(data, str):
        data = data.encode("utf-8")
    try:
        root = ET.fromstring(data)
    except ET.ParseError as exc:
        line, col = exc.position
        raise ElaError(f"malformed XML at line {line}, column {col}") from None
    if root.tag != "ela":
        raise ElaError(f"root element is <{root.tag}>, expected <ela>")
    header = root.find("header")
    if header is None:
        raise ElaError("missing <header>")
    data_el = root.find("data")
    columns = [_text(c) for c in data_el.iterfind("columns/column")] if data_el is not None else []
    rows = [tuple(_text(c) for c in r.iterfind("cell")) for r in data_el.iterfind("row")] if data_el is not None else []
    return ElaDocument(
        origin=_text(header.find("origin")),
        method=_text(header.find("method")),
        desired_analyses=tuple(_text(a) for a in header.iterfind("desired_analyses/analysis")),
        columns=tuple(columns),
        rows=tuple(rows),
    )


def directly_follows_counts(log: EventLog) -> Counter:
    counts: Counter = Counter()
    for case in log.cases.values():
        acts = [log.events[e].get(ACTIVITY) for e in case.trace]
        counts.update(zip(acts, acts[1:]))
    return counts


def dfg_abstraction(log: EventLog, origin: str) -> ElaDocument:
    """Directly-follows counts of ``log`` as an ELA table, rows sorted."""
    ensure_valid(log)
    counts = directly_follows_counts(log)
    rows = sorted((str(a), str(b), str(n)) for (a, b), n in counts.items())
    return ElaDocument(
        origin=origin,
        method=DFG_METHOD,
        desired_analyses=("process discovery",),
        columns=DFG_COLUMNS,
        rows=tuple(rows),
    )
