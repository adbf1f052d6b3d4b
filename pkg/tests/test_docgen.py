from __future__ import annotations

import json
import re

from domspec.docgen import build_pages, render_json, render_markdown, render_shacl, term_link
from domspec.engine import flat_sets
from domspec.rdf import isomorphic, parse_file
from domspec import fixture_path

S = "http://schema.org/"


def test_hotel_markdown_tables(hotel_patterns):
    md = render_markdown(hotel_patterns["hotel-rds"])
    mandatory, recommended = md.split("## Recommended", 1)
    for prop in ["name", "checkinTime", "checkoutTime", "location"]:
        assert f"[{prop}](https://schema.org/{prop})" in mandatory
    assert "[containsPlace](https://schema.org/containsPlace)" in recommended.split("<a id=")[0]
    assert "[Location](#Hotel.location)" in md
    assert '<a id="Hotel.location"></a>' in md
    assert "(as [HotelRoomProduct](http://example.org/n/HotelRoomProduct))" in md


def test_pages_cover_local_properties(hotel_patterns):
    for name, p in hotel_patterns.items():
        rows = {(r.type, r.property) for page in build_pages(p).walk() for r in page.rows}
        assert rows == set(p.local_properties), name


def test_links_resolve(hotel_patterns):
    for name, p in hotel_patterns.items():
        md = render_markdown(p)
        anchors = set(re.findall(r'<a id="([^"]+)"></a>', md))
        for target in re.findall(r"\]\(#([^)]+)\)", md):
            assert target in anchors, (name, target)
        titles = [page.anchor for page in build_pages(p).walk()]
        assert len(titles) == len(set(titles))


def test_rendering_is_deterministic(hotel_patterns):
    p = hotel_patterns["hotel-rds"]
    assert render_markdown(p) == render_markdown(p)
    assert render_json(p) == render_json(p)


def test_json_document(hotel_patterns):
    p = hotel_patterns["hotel-rds"]
    doc = json.loads(render_json(p))
    assert list(doc) == ["kind", "target", "operator", "types", "properties", "local_properties",
                         "local_ranges", "tree", "nested", "notes", "metadata"]
    assert doc["kind"] == "RDSP"
    types, props, pairs, ranges = flat_sets(p)
    assert doc["types"] == list(types)
    assert [tuple(x) for x in doc["local_properties"]] == list(pairs)
    assert [x["title"] for x in doc["nested"]] == ["Hotel.location", "Hotel.location.address"]
    sds = json.loads(render_json(hotel_patterns["hotel-sds"]))
    assert sds["kind"] == "SDSP" and sds["nested"] == []


def test_shacl_export_matches_source(hotel_patterns):
    for name, p in hotel_patterns.items():
        exported = render_shacl(p)
        assert isomorphic(exported, parse_file(fixture_path(name + ".ttl"))), name


def test_term_link():
    assert term_link(S + "Hotel") == "https://schema.org/Hotel"
    assert term_link("http://example.org/n/Location") == "http://example.org/n/Location"
