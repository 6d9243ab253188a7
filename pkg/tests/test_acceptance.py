"""Acceptance criteria.

Each test here is one criterion; ``conftest.py`` prints a PASS/FAIL line per
criterion at the end of the run. Run just this file with::

    pytest tests/test_acceptance.py -v
"""

from __future__ import annotations

import datetime as dt
import itertools
import time
from collections import Counter

import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from pmprivacy.anonymizers import (
    CipherSpec,
    ClusterSpec,
    PipelineStep,
    SeededRng,
    SubstitutionSpec,
    add_trailing_event,
    apply_pipeline,
    condense_case_attribute,
    encrypt_activity,
    generalize_time,
    substitute_activities,
    suppress_cases_by_trace_length,
    suppress_events_by_activity,
    suppress_resource_by_activity,
    swap_case_attribute,
    TIME_LEVELS,
)
from pmprivacy.ela import dfg_abstraction
from pmprivacy.leakage import LeakageQuery, enumerate_ol, estimate_ol_cardinality, po_check, suppressed_slots
from pmprivacy.log import ACTIVITY, RESOURCE, TIMESTAMP, validate
from pmprivacy.metadata import get_anonymizations
from pmprivacy.xes import XesDocument, parse_xes, serialize_xes

from fixtures import F_ROWS, FIG1_XES, TABLE1, TABLE2, event_id, table1_document, table2_log, ts
from strategies import event_logs

REFERENCE_SEED = 4
STEPS = [
    PipelineStep("substitute_activities", {"sensitive": "f", "substitutes": "g,k"}),
    PipelineStep("generalize_time", {"level": "minutes"}),
    PipelineStep("suppress_resource_by_activity", {"activity": "r"}),
]
SIG = ("sup", "event", "resource")
PROPERTY_EXAMPLES = 1000
DFG_EXAMPLES = 500


def floor_minute(value: dt.datetime) -> dt.datetime:
    return value.replace(second=0, microsecond=0)


def anonymized_document():
    return apply_pipeline(table1_document(), STEPS, SeededRng(REFERENCE_SEED))


@pytest.mark.acceptance("table-reproduction")
def test_table_reproduction():
    start = time.perf_counter()
    out = parse_xes(serialize_xes(apply_pipeline(parse_xes(serialize_xes(table1_document())), STEPS,
                                                 SeededRng(REFERENCE_SEED))))
    elapsed = time.perf_counter() - start
    log = out.log

    assert len(log.events) == len(TABLE1) == 18
    untouched = 0
    for row, (orig, pub) in enumerate(zip(TABLE1, TABLE2)):
        event = log.events[event_id(row)]
        case_id, act, stamp, res, age, disease = orig
        assert event_id(row) in log.cases[case_id].trace
        assert event.get(TIMESTAMP) == floor_minute(ts(stamp)) == ts(pub[2])
        if row in F_ROWS:
            assert act == "f" and event.get(ACTIVITY) in {"g", "k"}
            continue
        assert event.get(ACTIVITY) == act
        if act == "r":
            assert res == "B1" and event.get(RESOURCE) is None
            continue
        assert event.get(RESOURCE) == (res or None)
        assert log.cases[case_id].attributes == {"Age": age, "Disease": disease}
        untouched += 1
    assert untouched + 1 == 15  # the r event differs only in its resource
    assert log == table2_log()  # exact, with the reference seed
    assert elapsed < 1.0


@pytest.mark.acceptance("metadata-layering")
def test_metadata_layering():
    data = serialize_xes(anonymized_document())
    doc = parse_xes(data)
    records = get_anonymizations(doc)
    assert [r.signature.as_tuple() for r in records] == [
        ("sub", "event", "activity"), ("gen", "event", "time"), ("sup", "event", "resource"),
    ]
    assert [r.layer for r in records] == [1, 2, 3]
    header, _, body = data.decode().partition("<trace>")
    assert header.count('<container key="privacy:anonymizer">') == 3
    assert "privacy:" not in body
    assert serialize_xes(doc) == data


@pytest.mark.acceptance("leakage-agreement")
def test_leakage_agreement():
    anon = table2_log()
    assert len(suppressed_slots(anon)) == 2
    start = time.perf_counter()
    for u in range(1, 6):
        query = LeakageQuery(anon, SIG, u)
        est = estimate_ol_cardinality(query)
        assert est.paper_estimate == 2 * u
        assert est.exact_count == u * u
        universe = [f"P{i}" for i in range(u)]
        candidates = list(enumerate_ol(query, universe))
        assert len(candidates) == est.exact_count
        keys = {tuple(c.events[e].get(RESOURCE) for e in suppressed_slots(anon)) for c in candidates}
        assert keys == set(itertools.product(universe, repeat=2))
        assert all(po_check(c, anon, SIG, universe=universe) for c in candidates)
    assert time.perf_counter() - start < 1.0


def is_subsequence(short, long) -> bool:
    it = iter(long)
    return all(x in it for x in short)


def check_suppression(before, after):
    assert validate(after) == []
    assert set(after.events) <= set(before.events)
    for cid, case in after.cases.items():
        assert is_subsequence(case.trace, before.cases[cid].trace)


def check_preserving(before, after, target):
    assert validate(after) == []
    assert len(after.events) == len(before.events) and len(after.cases) == len(before.cases)
    assert {c: k.trace for c, k in after.cases.items()} == {c: k.trace for c, k in before.cases.items()}
    for eid, event in after.events.items():
        rest = {k: v for k, v in event.attributes.items() if k != target}
        assert rest == {k: v for k, v in before.events[eid].attributes.items() if k != target}
    assert {c: k.attributes for c, k in after.cases.items()} == {c: k.attributes for c, k in before.cases.items()}


def pair_clusters(case_ids):
    ids = sorted(case_ids)
    if len(ids) < 2:
        return None
    groups = [ids[i:i + 2] for i in range(0, len(ids), 2)]
    if len(groups[-1]) == 1:
        last = groups.pop()
        groups[-1] += last
    return ClusterSpec(tuple(groups))


@pytest.mark.acceptance("operation-invariants")
def test_operation_invariants():
    seen = []

    @settings(max_examples=PROPERTY_EXAMPLES, deadline=None, derandomize=True,
              suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large])
    @given(event_logs(max_cases=10, max_events=8), st.integers(0, 2**64 - 1))
    def run(log, seed):
        seen.append(1)
        assert validate(log) == []
        assert len(log.cases) <= 10 and all(len(c.trace) <= 8 for c in log.cases.values())

        check_suppression(log, suppress_events_by_activity(log, "a"))
        check_suppression(log, suppress_cases_by_trace_length(log, 2))
        res = suppress_resource_by_activity(log, "b")
        check_suppression(log, res)
        check_preserving(log, res, RESOURCE)
        assert all(e.get(RESOURCE) is None for e in res.events.values() if e.get(ACTIVITY) == "b")

        added = add_trailing_event(log, "a", "z", "R9")
        assert validate(added) == []
        assert set(log.events) <= set(added.events)

        stamps = {eid: e.get(TIMESTAMP) for eid, e in log.events.items()}
        previous = None
        for level in TIME_LEVELS:
            once = generalize_time(log, level)
            assert validate(once) == []
            assert generalize_time(once, level) == once
            check_preserving(log, once, TIMESTAMP)
            for eid, e in once.events.items():
                assert e.get(TIMESTAMP) <= stamps[eid]
                if previous is not None:
                    assert e.get(TIMESTAMP) <= previous.events[eid].get(TIMESTAMP)
            ordered = sorted(stamps, key=stamps.get)
            floored = [once.events[e].get(TIMESTAMP) for e in ordered]
            assert floored == sorted(floored)
            previous = once

        sub = substitute_activities(log, SubstitutionSpec({"a"}, {"x", "y"}), SeededRng(seed))
        check_preserving(log, sub, ACTIVITY)
        for eid, e in sub.events.items():
            if log.events[eid].get(ACTIVITY) == "a":
                assert e.get(ACTIVITY) in {"x", "y"}
            else:
                assert e.get(ACTIVITY) == log.events[eid].get(ACTIVITY)
        assert sub == substitute_activities(log, SubstitutionSpec({"a"}, {"x", "y"}), SeededRng(seed))

        enc = encrypt_activity(log, CipherSpec("hmac-sha256", "k"))
        check_preserving(log, enc, ACTIVITY)
        assert len({e.get(ACTIVITY) for e in enc.events.values()}) == len(log.activities())

        steps = [
            PipelineStep("substitute_activities", {"sensitive": "a", "substitutes": "x,y"}),
            PipelineStep("generalize_time", {"level": "hours"}),
            PipelineStep("suppress_resource_by_activity", {"activity": "c"}),
        ]
        clusters = pair_clusters(log.cases)
        if clusters is not None:
            assert validate(condense_case_attribute(log, clusters, "Age")) == []
            assert validate(swap_case_attribute(log, clusters, "Disease", SeededRng(seed))) == []
            text = ";".join(",".join(sorted(c)) for c in clusters.clusters)
            steps.append(PipelineStep("swap_case_attribute", {"clusters": text, "attribute": "Disease"}))
        doc = XesDocument(log=log)
        first = serialize_xes(apply_pipeline(doc, steps, SeededRng(seed)))
        second = serialize_xes(apply_pipeline(doc, steps, SeededRng(seed)))
        assert first == second

    run()
    assert len(seen) >= PROPERTY_EXAMPLES


def brute_force_dfg(log) -> Counter:
    counts: Counter = Counter()
    for case in log.cases.values():
        labels = [str(log.events[e].attributes[ACTIVITY]) for e in case.trace]
        counts.update(zip(labels, labels[1:]))
    return counts


@pytest.mark.acceptance("dfg-oracle")
def test_dfg_oracle():
    seen = []

    @settings(max_examples=DFG_EXAMPLES, deadline=None, derandomize=True,
              suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large])
    @given(event_logs())
    def run(log):
        seen.append(1)
        rows = dfg_abstraction(log, "random").rows
        got = Counter({(a, b): int(n) for a, b, n in rows})
        assert len(got) == len(rows)
        assert got == brute_force_dfg(log)
        assert sum(got.values()) == sum(max(len(c.trace) - 1, 0) for c in log.cases.values())

    run()
    assert len(seen) >= DFG_EXAMPLES


@pytest.mark.acceptance("round-trip")
def test_round_trip():
    sources = {
        "fragment": FIG1_XES.encode(),
        "table1": serialize_xes(table1_document()),
        "anonymized": serialize_xes(anonymized_document()),
    }
    for name, data in sources.items():
        once = parse_xes(data)
        twice = parse_xes(serialize_xes(once))
        assert twice == once, name
        assert serialize_xes(twice) == serialize_xes(once), name
    fragment = parse_xes(serialize_xes(parse_xes(FIG1_XES)))
    assert fragment.extension("hosp") is not None
    assert fragment.log_attribute("hosp:wards") == parse_xes(FIG1_XES).log_attribute("hosp:wards")
