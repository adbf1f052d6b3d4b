"""Cut the desk-scale schema.org excerpt used by the fast tests.

    python tools/make_excerpt.py > src/domspec/data/schemaorg-3.5-excerpt.ttl

Keeps the seed types below, all of their supertypes and the datatypes, plus
every property in PROPERTIES; domainIncludes/rangeIncludes links pointing
outside the kept types are dropped.
"""

from pathlib import Path

from domspec.rdf import RDF_TYPE, Graph, Iri, parse_file, serialize_turtle
from domspec.vocab import RDFS_SUBCLASS_OF, SCHEMA, load_vocabulary

DATA = Path(__file__).resolve().parents[1] / "src" / "domspec" / "data"

SEED_TYPES = """
Hotel Resort Motel Hostel BedAndBreakfast Campground HotelRoom Suite Product Offer
PostalAddress Country AdministrativeArea City GeoCoordinates Person Event Action
LodgingReservation Reservation Brand Rating AggregateRating Review
LocationFeatureSpecification QuantitativeValue BedDetails ImageObject
""".split()

PROPERTIES = """
name description url image address location containsPlace containedInPlace
checkinTime checkoutTime addressCountry addressLocality postalCode streetAddress
telephone email offers price priceCurrency starRating amenityFeature numberOfRooms
petsAllowed bed occupancy floorSize review aggregateRating brand geo latitude
longitude sameAs alternateName priceRange
""".split()


def main() -> None:
    full = parse_file(DATA / "schemaorg-3.5.ttl")
    vocab = load_vocabulary(full)
    keep: set[str] = set()
    for name in SEED_TYPES:
        keep |= vocab.ancestors(SCHEMA + name)
    keep |= set(vocab.subtype_closure(SCHEMA + "DataType"))
    props = {SCHEMA + p for p in PROPERTIES}
    links = {SCHEMA + "domainIncludes", SCHEMA + "rangeIncludes", RDFS_SUBCLASS_OF}
    kept = []
    for t in full:
        s = t.subject.value if isinstance(t.subject, Iri) else None
        if s not in keep and s not in props:
            continue
        if t.predicate.value in links and isinstance(t.object, Iri):
            o = t.object.value
            if o.startswith(SCHEMA) and o not in keep:
                continue
        if t.predicate.value == RDF_TYPE or t.predicate.value.startswith("http://www.w3.org/2000/01/rdf-schema#") \
                or t.predicate.value in links:
            kept.append(t)
    prefixes = {"schema": SCHEMA, "rdf": "http://www.w3.org/1999/02/22-rdf-syntax-ns#",
                "rdfs": "http://www.w3.org/2000/01/rdf-schema#"}
    print("# Desk-scale excerpt of the schema.org v3.5 core release (CC BY-SA 3.0).")
    print("# Generated by tools/make_excerpt.py; do not edit by hand.")
    print(serialize_turtle(Graph(kept, prefixes)), end="")


if __name__ == "__main__":
    main()
