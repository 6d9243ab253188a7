"""The hospital example log before and after anonymization, plus a small XES fragment.

Dates in the tables are day.month.year.
"""

from __future__ import annotations

import datetime as dt

from pmprivacy.log import ACTIVITY, RESOURCE, TIMESTAMP, UTC, EventLog, build_log
from pmprivacy.xes import STANDARD_EXTENSIONS, Classifier, XesAttribute, XesDocument

# case, activity, timestamp, resource (None = not recorded), age, disease
TABLE1 = [
    ("1", "a", "01.01.2019-08:30:10", "E1", 22, "Flu"),
    ("1", "b", "01.01.2019-08:45:00", "D1", 22, "Flu"),
    ("2", "a", "01.01.2019-08:46:15", "E1", 30, "Infection"),
    ("3", "a", "01.01.2019-08:50:01", "E1", 32, "Infection"),
    ("4", "a", "01.01.2019-08:55:00", None, 29, "Poisoning"),
    ("1", "e", "01.01.2019-08:58:15", "E2", 22, "Flu"),
    ("4", "b", "01.01.2019-09:10:00", "D2", 29, "Poisoning"),
    ("4", "r", "01.01.2019-09:30:00", "B1", 29, "Poisoning"),
    ("2", "d", "01.01.2019-09:46:00", "E3", 30, "Infection"),
    ("3", "d", "01.01.2019-10:00:25", "E3", 32, "Infection"),
    ("2", "f", "01.01.2019-10:00:05", "N1", 30, "Infection"),
    ("3", "f", "01.01.2019-10:15:22", "N1", 32, "Infection"),
    ("4", "e", "01.01.2019-10:30:35", "E2", 29, "Poisoning"),
    ("2", "f", "01.02.2019-08:00:45", "N1", 30, "Infection"),
    ("2", "b", "01.02.2019-10:00:00", "D2", 30, "Infection"),
    ("3", "b", "01.02.2019-10:15:30", "D1", 32, "Infection"),
    ("2", "e", "01.02.2019-14:00:00", "E2", 30, "Infection"),
    ("3", "e", "01.02.2019-14:15:00", "E2", 32, "Infection"),
]

TABLE2 = [
    ("1", "a", "01.01.2019-08:30:00", "E1", 22, "Flu"),
    ("1", "b", "01.01.2019-08:45:00", "D1", 22, "Flu"),
    ("2", "a", "01.01.2019-08:46:00", "E1", 30, "Infection"),
    ("3", "a", "01.01.2019-08:50:00", "E1", 32, "Infection"),
    ("4", "a", "01.01.2019-08:55:00", None, 29, "Poisoning"),
    ("1", "e", "01.01.2019-08:58:00", "E2", 22, "Flu"),
    ("4", "b", "01.01.2019-09:10:00", "D2", 29, "Poisoning"),
    ("4", "r", "01.01.2019-09:30:00", None, 29, "Poisoning"),
    ("2", "d", "01.01.2019-09:46:00", "E3", 30, "Infection"),
    ("3", "d", "01.01.2019-10:00:00", "E3", 32, "Infection"),
    ("2", "g", "01.01.2019-10:00:00", "N1", 30, "Infection"),
    ("3", "g", "01.01.2019-10:15:00", "N1", 32, "Infection"),
    ("4", "e", "01.01.2019-10:30:00", "E2", 29, "Poisoning"),
    ("2", "k", "01.02.2019-08:00:00", "N1", 30, "Infection"),
    ("2", "b", "01.02.2019-10:00:00", "D2", 30, "Infection"),
    ("3", "b", "01.02.2019-10:15:00", "D1", 32, "Infection"),
    ("2", "e", "01.02.2019-14:00:00", "E2", 30, "Infection"),
    ("3", "e", "01.02.2019-14:15:00", "E2", 32, "Infection"),
]

# rows of TABLE1 whose activity is f (0-based)
F_ROWS = (10, 11, 13)


def ts(text: str) -> dt.datetime:
    return dt.datetime.strptime(text, "%d.%m.%Y-%H:%M:%S").replace(tzinfo=UTC)


def event_id(row: int) -> str:
    return f"e{row + 1}"


def log_from_rows(rows) -> EventLog:
    by_case: dict[str, list] = {}
    case_attrs: dict[str, dict] = {}
    for i, (case, act, when, res, age, disease) in enumerate(rows):
        by_case.setdefault(case, []).append((event_id(i), {ACTIVITY: act, TIMESTAMP: ts(when), RESOURCE: res}))
        case_attrs[case] = {"Age": age, "Disease": disease}
    for events in by_case.values():
        events.sort(key=lambda item: item[1][TIMESTAMP])
    return build_log(
        [(c, case_attrs[c], by_case[c]) for c in sorted(by_case, key=int)],
        event_attribute_names={ACTIVITY, TIMESTAMP, RESOURCE},
        case_attribute_names={"Age", "Disease"},
    )


def table1_log() -> EventLog:
    return log_from_rows(TABLE1)


def table2_log() -> EventLog:
    return log_from_rows(TABLE2)


def document(log: EventLog) -> XesDocument:
    return XesDocument(
        log=log,
        extensions=STANDARD_EXTENSIONS,
        globals={
            "trace": (XesAttribute("concept:name", "string", "__INVALID__"),),
            "event": (
                XesAttribute("concept:name", "string", "__INVALID__"),
                XesAttribute("time:timestamp", "date", ts("01.01.1970-00:00:00")),
            ),
        },
        classifiers=(Classifier("Activity", ("concept:name",)), Classifier("Activity and resource", ("concept:name", "org:resource"))),
        log_attributes=(XesAttribute("concept:name", "string", "hospital"),),
    )


def table1_document() -> XesDocument:
    return document(table1_log())


def table2_document() -> XesDocument:
    return document(table2_log())


# First case of the hospital log as an XES file, with patient data on the
# events, a foreign extension and nested log attributes.
FIG1_XES = """<?xml version="1.0" encoding="UTF-8" ?>
<log xes.version="1.0" xes.features="nested-attributes" openxes.version="1.0RC7">
  <extension name="Lifecycle" prefix="lifecycle" uri="http://www.xes-standard.org/lifecycle.xesext"/>
  <extension name="Organizational" prefix="org" uri="http://www.xes-standard.org/org.xesext"/>
  <extension name="Time" prefix="time" uri="http://www.xes-standard.org/time.xesext"/>
  <extension name="Concept" prefix="concept" uri="http://www.xes-standard.org/concept.xesext"/>
  <extension name="Hospital" prefix="hosp" uri="http://example.org/hospital.xesext"/>
  <global scope="trace">
    <string key="concept:name" value="__INVALID__"/>
  </global>
  <global scope="event">
    <string key="concept:name" value="__INVALID__"/>
    <date key="time:timestamp" value="1970-01-01T00:00:00.000+00:00"/>
    <string key="org:resource" value="UNKNOWN"/>
  </global>
  <classifier name="Activity" keys="concept:name"/>
  <classifier name="Resource and Activity" keys="org:resource concept:name"/>
  <string key="concept:name" value="hospital.xes"/>
  <container key="hosp:source">
    <string key="hosp:system" value="HIS"/>
    <int key="hosp:version" value="3"/>
  </container>
  <list key="hosp:wards">
    <values>
      <string key="ward" value="ER"/>
      <string key="ward" value="ICU"/>
    </values>
  </list>
  <trace>
    <string key="concept:name" value="1"/>
    <event>
      <string key="concept:name" value="a"/>
      <date key="time:timestamp" value="2019-01-01T08:30:10.000+00:00"/>
      <string key="org:resource" value="E1"/>
      <int key="Age" value="22"/>
      <string key="Disease" value="Flu"/>
      <string key="hosp:bed" value="12">
        <boolean key="hosp:isolated" value="false"/>
      </string>
    </event>
    <event>
      <string key="concept:name" value="b"/>
      <date key="time:timestamp" value="2019-01-01T09:45:00.000+01:00"/>
      <string key="org:resource" value="D1"/>
      <int key="Age" value="22"/>
      <string key="Disease" value="Flu"/>
      <float key="hosp:cost" value="12.5"/>
    </event>
    <event>
      <string key="concept:name" value="e"/>
      <date key="time:timestamp" value="2019-01-01T08:58:15Z"/>
      <string key="org:resource" value="E2"/>
      <int key="Age" value="22"/>
      <string key="Disease" value="Flu"/>
    </event>
  </trace>
</log>
"""
