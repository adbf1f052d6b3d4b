from __future__ import annotations

import random
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from domspec import fixture_path
from domspec.operators import (ClassRef, Conjunction, DatatypeRef, Kind, Operator, OperatorError, PropertyShape,
                               Restriction, Severity, check_document, check_well_formed, classify_kind, has_errors,
                               operator_roots, parse_operator, serialize_operator)
from domspec.rdf import SH, Iri, isomorphic, parse_file, parse_turtle, serialize_turtle
from generators import random_operator

S = "http://schema.org/"
N = "http://example.org/n/"
XSD = "http://www.w3.org/2001/XMLSchema#"
GRAMMAR = Path(__file__).parent / "data" / "grammar"

MINIMAL = """@prefix s: <http://schema.org/> .
@prefix sh: <http://www.w3.org/ns/shacl#> .
@prefix xsd: <http://www.w3.org/2001/XMLSchema#> .
@prefix ds: <http://example.org/ds/> .
ds:Min a sh:NodeShape ; sh:targetClass s:Hotel ;
    sh:property [ sh:path s:name ; sh:datatype xsd:string ] .
"""


def parse_one(text: str, vocab=None, ext=()):
    g = parse_turtle(text)
    return parse_operator(g, operator_roots(g)[0], vocab, ext)


def errors_of(text: str) -> OperatorError:
    with pytest.raises(OperatorError) as info:
        parse_one(text)
    return info.value


def test_hotel_operator_parses(hotel_ops):
    op = hotel_ops["hotel-rds"]
    assert op.target_type == S + "Hotel"
    assert [s.path for s in op.shapes] and len(op.shapes) == 5
    required = {s.path.rsplit("/", 1)[1] for s in op.shapes if s.required}
    assert required == {"name", "checkinTime", "checkoutTime", "location"}
    contains = next(s for s in op.shapes if s.path == S + "containsPlace")
    assert contains.constraint == Conjunction((ClassRef(S + "HotelRoom"), ClassRef(S + "Product")))
    location = next(s for s in op.shapes if s.path == S + "location")
    assert isinstance(location.constraint, Restriction)
    assert location.constraint.node.id == Iri(N + "Location")


def test_minimal_operator(vocab):
    op = parse_one(MINIMAL, vocab)
    assert op.kind is Kind.SDS
    assert op.shapes == (PropertyShape(S + "name", False, Conjunction((DatatypeRef(XSD + "string"),))),)
    g = serialize_operator(op)
    # shape type, targetClass, property link, property shape type, path, datatype
    assert len(g) == 6
    assert not any(t.predicate.value == SH + "minCount" for t in g)


@pytest.mark.parametrize("text, production, fragment", [
    (MINIMAL.replace("sh:path s:name ;", "sh:path s:name ; sh:minCount 2 ;"), "MinCount", "2"),
    (MINIMAL.replace("sh:path s:name ;", "sh:path s:name ; sh:minCount 0 ;"), "MinCount", "0"),
    (MINIMAL.replace("sh:path s:name ;", "sh:path s:name ; sh:minCount \"1\" ;"), "MinCount", "1"),
    (MINIMAL.replace("sh:targetClass s:Hotel ;", ""), "SDOTargetType", "targetClass"),
    (MINIMAL.replace("sh:targetClass s:Hotel ;", "sh:targetClass s:Hotel, s:Motel ;"), "SDOTargetType", "more"),
    (MINIMAL.replace("sh:path s:name ;", ""), "SDOProperty", "path"),
    (MINIMAL.replace("sh:datatype xsd:string", "sh:maxCount 1 ; sh:datatype xsd:string"), "SDSPropertyShape",
     "sh:maxCount"),
    (MINIMAL.replace("sh:datatype xsd:string", "sh:pattern \"x\" ; sh:datatype xsd:string"), "SDSPropertyShape",
     "sh:pattern"),
    (MINIMAL.replace("sh:datatype xsd:string", "sh:class s:Place ; sh:datatype xsd:string"), "ValueTypeConstraint",
     "conjoined"),
    (MINIMAL.replace("sh:datatype xsd:string", "sh:datatype xsd:string, xsd:date"), "ValueTypeConstraint",
     "datatype"),
    (MINIMAL.replace("sh:datatype xsd:string", "sh:or ( [ sh:datatype xsd:string ] )"), "DisjunctiveConstraint",
     "two"),
    (MINIMAL.replace("sh:datatype xsd:string",
                     "sh:or ( [ sh:datatype xsd:string ] [ sh:datatype xsd:string ] )"), "DisjunctiveConstraint",
     "distinct"),
    (MINIMAL.replace("sh:datatype xsd:string", "sh:class s:Place ; sh:or ( [ sh:class s:Place ] "
                     "[ sh:datatype xsd:string ] )"), "DisjunctiveConstraint", "combined"),
    (MINIMAL.replace("sh:datatype xsd:string", "sh:class s:Place ; sh:node [ sh:property [ sh:path s:name ; "
                     "sh:datatype xsd:string ] ]"), "NodeConstraint", "sh:NodeShape"),
    (MINIMAL.replace("sh:datatype xsd:string", "sh:datatype xsd:string ; sh:node [ a sh:NodeShape ; sh:property "
                     "[ sh:path s:name ; sh:datatype xsd:string ] ]"), "RangeConstraint", "datatype"),
    (MINIMAL.replace("sh:datatype xsd:string", "sh:class s:Place, s:Thing ; sh:node [ a sh:NodeShape ; "
                     "sh:property [ sh:path s:name ; sh:datatype xsd:string ] ]"), "RangeConstraint", "exactly one"),
])
def test_parse_errors_name_productions(text, production, fragment):
    err = errors_of(text)
    assert err.diagnostics[0].production == production
    assert fragment in err.diagnostics[0].message
    assert err.diagnostics[0].severity is Severity.ERROR


def test_shared_nested_shape_rejected():
    text = MINIMAL.replace(
        "sh:property [ sh:path s:name ; sh:datatype xsd:string ] .",
        "sh:property [ sh:path s:location ; sh:class s:Place ; sh:node ds:Shared ] ,"
        " [ sh:path s:containsPlace ; sh:class s:Place ; sh:node ds:Shared ] .\n"
        "ds:Shared a sh:NodeShape ; sh:property [ sh:path s:name ; sh:datatype xsd:string ] .")
    err = errors_of(text)
    assert err.diagnostics[0].production == "NodeConstraint"
    assert "shared" in err.diagnostics[0].message


def test_annotations_and_foreign_predicates_are_ignored():
    text = MINIMAL.replace("sh:targetClass s:Hotel ;",
                           'sh:targetClass s:Hotel ; sh:name "Hotel" ; <http://example.org/note> "x" ;')
    assert parse_one(text).target_type == S + "Hotel"


def test_check_well_formed_examples(vocab, ext, hotel_ops):
    for name, op in hotel_ops.items():
        assert check_well_formed(op, vocab, [ext]) == [], name
    named = hotel_ops["hotel-rds-named"]
    diags = check_well_formed(named, vocab, [], Kind.SDS)
    assert {(d.node, d.production) for d in diags} == {(N + "HotelRoomProduct", "ExtClassConstraint"),
                                                       (N + "Location", "ExtClassConstraint")}
    bad = parse_one(MINIMAL.replace("s:name", "s:nonExistentProp"))
    diags = check_well_formed(bad, vocab)
    assert [(d.production, d.severity) for d in diags] == [("SDOProperty", Severity.ERROR)]


def test_check_well_formed_other_productions(vocab, ext):
    cls_text = parse_one(MINIMAL.replace("sh:datatype xsd:string", "sh:class s:Text"))
    assert [d.production for d in check_well_formed(cls_text, vocab)] == ["SimpleClassConstraint"]
    unmapped = parse_one(MINIMAL.replace("xsd:string", "xsd:gYear"))
    assert [d.production for d in check_well_formed(unmapped, vocab)] == ["DatatypeConstraint"]
    dt_target = parse_one(MINIMAL.replace("sh:targetClass s:Hotel", "sh:targetClass s:Text"))
    assert "SDOTargetType" in [d.production for d in check_well_formed(dt_target, vocab)]
    ext_target = parse_one(MINIMAL.replace("sh:targetClass s:Hotel", f"sh:targetClass <{N}Nothing>"))
    assert "ExtTargetType" in [d.production for d in check_well_formed(ext_target, vocab, [ext])]
    ext_path = parse_one(MINIMAL.replace("sh:path s:name", f"sh:path <{N}totalNumberOfBeds>"))
    assert [d.production for d in check_well_formed(ext_path, vocab, [ext], Kind.RDS)] == ["ExtProperty"]


def test_domain_and_range_mismatches_are_warnings(vocab):
    op = parse_one(MINIMAL.replace("s:name", "s:addressLocality"))
    diags = check_well_formed(op, vocab)
    assert [(d.production, d.severity) for d in diags] == [("SDOProperty", Severity.WARNING)]
    op = parse_one(MINIMAL.replace("xsd:string", "xsd:date"))
    diags = check_well_formed(op, vocab)
    assert [(d.production, d.severity) for d in diags] == [("ValueTypeConstraint", Severity.WARNING)]
    assert not has_errors(diags)


def test_classify_kind(vocab, ext, hotel_ops):
    assert parse_one(MINIMAL, vocab).kind is Kind.SDS
    assert hotel_ops["hotel-sds"].kind is Kind.SDS
    assert hotel_ops["hotel-rds"].kind is Kind.RDS
    assert hotel_ops["hotel-rds-named"].kind is Kind.RDS
    assert hotel_ops["hotel-eds"].kind is Kind.EDS
    # an external class outside every declared range adds a range member
    odd = parse_one(MINIMAL.replace("sh:datatype xsd:string", f"sh:class <{N}Location>"), vocab, [ext])
    assert odd.kind is Kind.EDS
    # without a vocabulary an external class is taken as a replacement
    assert classify_kind(hotel_ops["hotel-rds-named"]) is Kind.RDS


def test_kind_monotonicity(vocab, ext, hotel_ops):
    for op in hotel_ops.values():
        extended = Operator(op.id, op.target_type, op.shapes + (
            PropertyShape(N + "totalNumberOfBeds", False, Conjunction((DatatypeRef(XSD + "double"),))),))
        assert classify_kind(extended, vocab, [ext]) is Kind.EDS


def test_conjunction_order_does_not_matter():
    a = parse_one(MINIMAL.replace("sh:datatype xsd:string", "sh:class s:HotelRoom, s:Product"))
    b = parse_one(MINIMAL.replace("sh:datatype xsd:string", "sh:class s:Product, s:HotelRoom"))
    assert a == b


def test_shape_order_does_not_matter():
    two = MINIMAL.replace("sh:property [ sh:path s:name ; sh:datatype xsd:string ] .",
                          "sh:property [ sh:path s:name ; sh:datatype xsd:string ] , "
                          "[ sh:path s:url ; sh:datatype xsd:anyURI ] .")
    swapped = MINIMAL.replace("sh:property [ sh:path s:name ; sh:datatype xsd:string ] .",
                              "sh:property [ sh:path s:url ; sh:datatype xsd:anyURI ] , "
                              "[ sh:path s:name ; sh:datatype xsd:string ] .")
    assert parse_one(two) == parse_one(swapped)


@pytest.mark.parametrize("name", ["hotel-sds", "hotel-rds", "hotel-eds", "hotel-rds-or", "hotel-rds-named"])
def test_serialize_matches_fixture(name, hotel_ops, vocab, ext):
    op = hotel_ops[name]
    fixture = parse_file(fixture_path(name + ".ttl"))
    g = serialize_operator(op)
    assert isomorphic(g, fixture)
    assert parse_operator(g, operator_roots(g)[0], vocab, [ext]) == op


def test_grammar_soundness_on_corpus(vocab, ext):
    for path in sorted((GRAMMAR / "valid").glob("*.ttl")):
        g = parse_file(path)
        assert check_document(g, vocab, [ext]) == [], path.name
        for root in operator_roots(g):
            again = serialize_operator(parse_operator(g, root, vocab, [ext]))
            assert check_document(again, vocab, [ext]) == [], path.name


def test_every_rejected_document_names_a_production(vocab, ext):
    productions = {"SDS", "NodeShape", "SDOTargetType", "SDSPropertyShape", "SDOProperty", "ValueTypeConstraint",
                   "SimpleClassConstraint", "DatatypeConstraint", "CardinalityConstraint", "MinCount",
                   "SimpleDisjunctiveConstraint", "RDS", "RDSPropertyShape", "RangeConstraint", "NodeConstraint",
                   "DisjunctiveConstraint", "EDS", "ExtTargetType", "EDSPropertyShape", "ExtProperty",
                   "ExtValueTypeConstraint", "ExtClassConstraint", "ExtRangeConstraint", "ExtNodeConstraint",
                   "ExtDisjunctiveConstraint"}
    for path in sorted((GRAMMAR / "invalid").glob("*.ttl")):
        diags = check_document(parse_file(path), vocab, [ext])
        assert has_errors(diags), path.name
        assert all(d.production in productions for d in diags), path.name


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_random_operators_round_trip(excerpt, seed):
    op = random_operator(random.Random(seed), excerpt)
    text = serialize_turtle(serialize_operator(op))
    g = parse_turtle(text)
    again = parse_operator(g, operator_roots(g)[0])
    assert again == op
    assert serialize_turtle(serialize_operator(again)) == text
