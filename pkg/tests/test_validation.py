from __future__ import annotations

from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from domspec.engine import apply
from domspec.operators import Conjunction, DatatypeRef, Operator, PropertyShape, operator_roots, parse_operator
from domspec.rdf import RDF_TYPE, SH, Iri, Literal, parse_file, parse_turtle
from domspec.validation import (ResultKind, ResultSeverity, lexically_valid, report_summary, report_to_graph,
                                select_targets, validate)

S = "http://schema.org/"
XSD = "http://www.w3.org/2001/XMLSchema#"
EX = "http://example.org/data/"
INSTANCES = Path(__file__).parent / "data" / "instances"

PREFIXES = """@prefix ex: <http://example.org/data/> . @prefix s: <http://schema.org/> .
@prefix xsd: <http://www.w3.org/2001/XMLSchema#> .
"""

TRUTH_TABLE = [
    ("conforming", "hotel-rds", True, []),
    ("missing-required", "hotel-rds", False, ["MissingRequired"] * 4),
    ("wrong-datatype", "hotel-rds", False, ["WrongValueType"]),
    ("room-not-product", "hotel-rds", False, ["WrongValueType"]),
    ("extra-property", "hotel-rds", True, ["DisallowedProperty"]),
    ("nested-missing-locality", "hotel-rds", False, ["NestedFailure"]),
    ("or-second-branch", "hotel-rds-or", True, []),
    ("or-no-branch", "hotel-rds-or", False, ["NoDisjunctBranch"]),
]


@pytest.mark.parametrize("instance, pattern, conforms, kinds", TRUTH_TABLE, ids=[t[0] for t in TRUTH_TABLE])
def test_truth_table(hotel_patterns, instance, pattern, conforms, kinds):
    report = validate(parse_file(INSTANCES / f"{instance}.ttl"), hotel_patterns[pattern])
    assert report.conforms is conforms
    assert sorted(r.kind.value for r in report.results) == kinds
    assert report.targets == (Iri(EX + "alpenrose"),)


def test_nested_failure_carries_detail(hotel_patterns):
    report = validate(parse_file(INSTANCES / "nested-missing-locality.ttl"), hotel_patterns["hotel-rds"])
    (top,) = report.results
    (mid,) = top.nested
    assert mid.kind is ResultKind.NESTED_FAILURE and mid.focus == Iri(EX + "site")
    (leaf,) = mid.nested
    assert leaf.kind is ResultKind.MISSING_REQUIRED and leaf.path == S + "addressLocality"


def test_select_targets_follow_subtyping(vocab):
    data = parse_turtle(PREFIXES + "ex:r a s:Resort . ex:h a s:Hotel . ex:m a s:Museum .")

    def pattern_for(target):
        op = Operator(Iri("http://example.org/ds/X"), S + target, (
            PropertyShape(S + "name", False, Conjunction((DatatypeRef(XSD + "string"),))),))
        return apply(op, vocab)

    assert select_targets(data, pattern_for("LodgingBusiness")) == [Iri(EX + "h"), Iri(EX + "r")]
    assert select_targets(data, pattern_for("Hotel")) == [Iri(EX + "h")]


def test_no_targets_conforms(hotel_patterns):
    report = validate(parse_turtle(PREFIXES + 'ex:m a s:Museum ; s:name "x" .'), hotel_patterns["hotel-rds"])
    assert report.conforms and report.results == () and report.targets == ()
    assert report_summary(report).startswith("0 targets checked")


def test_closedness_violation(hotel_patterns):
    data = parse_file(INSTANCES / "extra-property.ttl")
    report = validate(data, hotel_patterns["hotel-rds"], closedness="violation")
    assert not report.conforms
    assert [r.severity for r in report.results] == [ResultSeverity.VIOLATION]


def test_report_graph(hotel_patterns):
    empty = report_to_graph(validate(parse_file(INSTANCES / "conforming.ttl"), hotel_patterns["hotel-rds"]))
    root = empty.subjects(Iri(RDF_TYPE), Iri(SH + "ValidationReport"))[0]
    assert empty.value(root, Iri(SH + "conforms")) == Literal("true", XSD + "boolean")
    assert empty.objects(root, Iri(SH + "result")) == []
    report = validate(parse_file(INSTANCES / "missing-required.ttl"), hotel_patterns["hotel-rds"])
    g = report_to_graph(report)
    root = g.subjects(Iri(RDF_TYPE), Iri(SH + "ValidationReport"))[0]
    assert g.value(root, Iri(SH + "conforms")) == Literal("false", XSD + "boolean")
    results = g.objects(root, Iri(SH + "result"))
    assert len(results) == 4
    comps = {g.value(r, Iri(SH + "sourceConstraintComponent")) for r in results}
    assert comps == {Iri(SH + "MinCountConstraintComponent")}


def test_cyclic_data_terminates(vocab):
    g = parse_turtle("""
        @prefix s: <http://schema.org/> . @prefix sh: <http://www.w3.org/ns/shacl#> .
        <http://example.org/ds/P> a sh:NodeShape ; sh:targetClass s:Place ;
          sh:property [ sh:path s:containedInPlace ; sh:class s:Place ; sh:node [ a sh:NodeShape ;
            sh:property [ sh:path s:containedInPlace ; sh:minCount 1 ; sh:class s:Place ] ] ] .
    """)
    p = apply(parse_operator(g, operator_roots(g)[0], vocab), vocab)
    data = parse_turtle(PREFIXES + "ex:a a s:Place ; s:containedInPlace ex:b . "
                                   "ex:b a s:Place ; s:containedInPlace ex:a .")
    report = validate(data, p)
    assert report.targets == (Iri(EX + "a"), Iri(EX + "b"))
    assert report.conforms and report.results == ()


@pytest.mark.parametrize("lexical, datatype, ok", [
    ("2019-06-01T14:00:00", "dateTime", True),
    ("2019-06-01T14:00:00+02:00", "dateTime", True),
    ("2019-02-30T14:00:00", "dateTime", False),
    ("2019-06-01", "dateTime", False),
    ("2019-06-01", "date", True),
    ("24:00:00", "time", True),
    ("25:00:00", "time", False),
    ("-12", "integer", True),
    ("1.5", "integer", False),
    ("1.5e3", "double", True),
    ("INF", "double", True),
    ("abc", "double", False),
    ("true", "boolean", True),
    ("yes", "boolean", False),
    ("anything", "string", True),
])
def test_lexical_validity(lexical, datatype, ok):
    assert lexically_valid(lexical, XSD + datatype) is ok


def test_lang_string_satisfies_string(hotel_patterns):
    text = (INSTANCES / "conforming.ttl").read_text().replace('"Hotel Alpenrose"', '"Hotel Alpenrose"@de')
    assert validate(parse_turtle(text), hotel_patterns["hotel-rds"]).conforms


# ---------------------------------------------------------------------------
# properties
# ---------------------------------------------------------------------------

HOTEL_BASE = """ex:alpenrose a s:Hotel ; s:location ex:site .
ex:site a s:Place ; s:address ex:addr .
ex:addr a s:PostalAddress ; s:addressCountry "AT" ; s:addressLocality "Innsbruck" .
"""
REQUIRED = {
    "name": 's:name "Alpenrose"',
    "checkinTime": 's:checkinTime "2019-06-01T14:00:00"^^xsd:dateTime',
    "checkoutTime": 's:checkoutTime "2019-06-02T10:00:00"^^xsd:dateTime',
}


@settings(max_examples=40, deadline=None)
@given(st.sets(st.sampled_from(sorted(REQUIRED))))
def test_monotone_repair(hotel_patterns, present):
    def run(props):
        body = "".join(f"ex:alpenrose {REQUIRED[p]} .\n" for p in sorted(props))
        report = validate(parse_turtle(PREFIXES + HOTEL_BASE + body), hotel_patterns["hotel-rds"])
        return {r.path for r in report.results if r.kind is ResultKind.MISSING_REQUIRED}

    before = run(present)
    assert before == {S + p for p in REQUIRED if p not in present}
    for extra in set(REQUIRED) - present:
        assert run(present | {extra}) == before - {S + extra}


ROOM_TYPES = ["HotelRoom", "Product", "Room", "Place", "Suite"]


@settings(max_examples=40, deadline=None)
@given(st.sets(st.sampled_from(ROOM_TYPES)))
def test_conjunction_semantics(hotel_patterns, types):
    typing = f"ex:room a {', '.join('s:' + t for t in sorted(types))} .\n" if types else ""
    body = "".join(f"ex:alpenrose {v} .\n" for v in REQUIRED.values())
    data = parse_turtle(PREFIXES + HOTEL_BASE + body + "ex:alpenrose s:containsPlace ex:room .\n" + typing)
    report = validate(data, hotel_patterns["hotel-rds"])
    room_ok = {"HotelRoom", "Product"} <= types
    assert report.conforms is room_ok


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(["text", "place-ok", "place-bare", "number", "postal"]))
def test_disjunction_soundness(hotel_patterns, variant):
    values = {
        "text": 'ex:alpenrose s:location "Innsbruck" .',
        "place-ok": "ex:alpenrose s:location ex:site .",
        "place-bare": "ex:alpenrose s:location ex:bare . ex:bare a s:Place .",
        "number": "ex:alpenrose s:location 42 .",
        "postal": "ex:alpenrose s:location ex:addr .",
    }
    base = HOTEL_BASE.replace("ex:alpenrose a s:Hotel ; s:location ex:site .", "ex:alpenrose a s:Hotel .")
    body = "".join(f"ex:alpenrose {v} .\n" for v in REQUIRED.values())
    data = parse_turtle(PREFIXES + base + body + values[variant])
    report = validate(data, hotel_patterns["hotel-rds-or"])
    branch_ok = variant in ("text", "place-ok")
    assert report.conforms is branch_ok
    if not branch_ok:
        assert [r.kind for r in report.results] == [ResultKind.NO_DISJUNCT_BRANCH]


EXTRA = ["telephone", "url", "description", "starRating", "address", "name"]


@settings(max_examples=40, deadline=None)
@given(st.sets(st.sampled_from(EXTRA)))
def test_closed_world_oracle(hotel_patterns, props):
    pattern = hotel_patterns["hotel-rds"]
    body = "".join(f"ex:alpenrose {v} .\n" for v in REQUIRED.values())
    body += "".join(f'ex:alpenrose s:{p} "v{i}" .\n' for i, p in enumerate(sorted(props)))
    report = validate(parse_turtle(PREFIXES + HOTEL_BASE + body), pattern)
    disallowed = {r.path for r in report.results if r.kind is ResultKind.DISALLOWED_PROPERTY}
    allowed = {e.path for e in pattern.tree.entries}
    assert disallowed == {S + p for p in props} - allowed
    assert all(r.severity is ResultSeverity.WARNING for r in report.results
               if r.kind is ResultKind.DISALLOWED_PROPERTY)
