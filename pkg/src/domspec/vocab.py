"""schema.org-style vocabularies: types, properties, hierarchy, domains and ranges.

A vocabulary is the pair (T, P). Types carry their direct sub- and
supertypes and are classified as regular types (below ``Thing``) or
datatypes (below ``DataType``). Domain and range membership is closed under
subtyping: ``domain_contains(p, t)`` holds when some declared domain type of
``p`` is a supertype of ``t``.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, replace
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

from .rdf import RDF_TYPE, RDFS, Graph, Iri

log = logging.getLogger(__name__)

SCHEMA = "http://schema.org/"
THING = SCHEMA + "Thing"
DATATYPE = SCHEMA + "DataType"

RDFS_CLASS = RDFS + "Class"
RDFS_SUBCLASS_OF = RDFS + "subClassOf"
RDF_PROPERTY = "http://www.w3.org/1999/02/22-rdf-syntax-ns#Property"

_DOMAIN_PREDICATES = (SCHEMA + "domainIncludes", RDFS + "domain")
_RANGE_PREDICATES = (SCHEMA + "rangeIncludes", RDFS + "range")


class VocabularyError(Exception):
    pass


class UndeclaredTermError(VocabularyError, KeyError):
    def __init__(self, iri: str, what: str = "type"):
        self.iri = iri
        super().__init__(f"undeclared {what}: {iri}")

    def __str__(self) -> str:
        return self.args[0]


class TypeKind(str, enum.Enum):
    REGULAR = "Regular"
    DATATYPE = "Datatype"


@dataclass(frozen=True)
class TypeDef:
    uri: str
    direct_subtypes: frozenset[str] = frozenset()
    direct_supertypes: frozenset[str] = frozenset()
    kind: TypeKind = TypeKind.REGULAR
    orphan: bool = False
    opaque: bool = False


@dataclass(frozen=True)
class PropertyDef:
    uri: str
    domain: frozenset[str] = frozenset()
    range: frozenset[str] = frozenset()


def local_name(iri: str) -> str:
    for sep in ("#", "/", ":"):
        if sep in iri:
            tail = iri.rsplit(sep, 1)[1]
            if tail:
                return tail
    return iri


class _Hierarchy:
    """Read-only type/property store with memoized subtype queries."""

    def __init__(self, types: Mapping[str, TypeDef], properties: Mapping[str, PropertyDef]):
        self.types = MappingProxyType(dict(types))
        self.properties = MappingProxyType(dict(properties))
        self._ancestors: dict[str, frozenset[str]] = {}
        self._closures: dict[str, frozenset[str]] = {}

    def _require_type(self, iri: str) -> TypeDef:
        try:
            return self.types[iri]
        except KeyError:
            raise UndeclaredTermError(iri, "type") from None

    def _require_property(self, iri: str) -> PropertyDef:
        try:
            return self.properties[iri]
        except KeyError:
            raise UndeclaredTermError(iri, "property") from None

    def has_type(self, iri: str) -> bool:
        return iri in self.types

    def has_property(self, iri: str) -> bool:
        return iri in self.properties

    def is_regular(self, iri: str) -> bool:
        t = self.types.get(iri)
        return t is not None and t.kind is TypeKind.REGULAR

    def is_datatype(self, iri: str) -> bool:
        t = self.types.get(iri)
        return t is not None and t.kind is TypeKind.DATATYPE

    def ancestors(self, iri: str) -> frozenset[str]:
        """``iri`` and every transitive supertype."""
        cached = self._ancestors.get(iri)
        if cached is not None:
            return cached
        self._require_type(iri)
        seen = {iri}
        stack = [iri]
        while stack:
            for sup in self.types[stack.pop()].direct_supertypes:
                if sup not in seen and sup in self.types:
                    seen.add(sup)
                    stack.append(sup)
        result = frozenset(seen)
        self._ancestors[iri] = result
        return result

    def is_subtype_of(self, t1: str, t2: str) -> bool:
        self._require_type(t2)
        return t2 in self.ancestors(t1)

    def subtype_closure(self, iri: str) -> frozenset[str]:
        cached = self._closures.get(iri)
        if cached is not None:
            return cached
        self._require_type(iri)
        seen = {iri}
        stack = [iri]
        while stack:
            for sub in self.types[stack.pop()].direct_subtypes:
                if sub not in seen and sub in self.types:
                    seen.add(sub)
                    stack.append(sub)
        result = frozenset(seen)
        self._closures[iri] = result
        return result

    def domain_contains(self, prop: str, type_: str) -> bool:
        p = self._require_property(prop)
        anc = self.ancestors(type_)
        return not anc.isdisjoint(p.domain)

    def range_contains(self, prop: str, type_: str) -> bool:
        p = self._require_property(prop)
        anc = self.ancestors(type_)
        return not anc.isdisjoint(p.range)

    def regular_types(self) -> list[str]:
        return sorted(u for u, t in self.types.items()
                      if t.kind is TypeKind.REGULAR and not t.orphan and not t.opaque)

    def datatypes(self) -> list[str]:
        return sorted(u for u, t in self.types.items() if t.kind is TypeKind.DATATYPE)

    def orphans(self) -> list[str]:
        return sorted(u for u, t in self.types.items() if t.orphan)

    def opaque_types(self) -> list[str]:
        return sorted(u for u, t in self.types.items() if t.opaque)


class Vocabulary(_Hierarchy):
    """The pair (T, P) for one namespace."""

    def __init__(self, namespace: str, types: Mapping[str, TypeDef],
                 properties: Mapping[str, PropertyDef], warnings: Sequence[str] = ()):
        super().__init__(types, properties)
        self.namespace = namespace
        self.warnings = tuple(warnings)
        overlap = set(self.types) & set(self.properties)
        if overlap:
            raise VocabularyError(f"IRIs declared as both type and property: {sorted(overlap)}")
        for key, t in self.types.items():
            if key != t.uri:
                raise VocabularyError(f"type key {key} does not match its uri {t.uri}")
        for key, p in self.properties.items():
            if key != p.uri:
                raise VocabularyError(f"property key {key} does not match its uri {p.uri}")

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.namespace} types={len(self.types)} properties={len(self.properties)}>"

    def in_namespace(self, iri: str) -> bool:
        return iri.startswith(self.namespace)


class ExternalVocabulary(Vocabulary):
    """(T_ext, P_ext) under its own namespace, aligned to schema.org by subClassOf."""

    def __init__(self, namespace: str, types: Mapping[str, TypeDef],
                 properties: Mapping[str, PropertyDef], alignments: Iterable[tuple[str, str]] = (),
                 warnings: Sequence[str] = ()):
        if namespace == SCHEMA:
            raise VocabularyError("an external vocabulary needs its own namespace")
        super().__init__(namespace, types, properties, warnings)
        self.alignments = frozenset(alignments)

    def own_types(self) -> list[str]:
        return sorted(u for u in self.types if self.in_namespace(u))

    def own_properties(self) -> list[str]:
        return sorted(self.properties)


def _find_cycle(supers: Mapping[str, set[str]]) -> list[str] | None:
    WHITE, GREY, BLACK = 0, 1, 2
    color = dict.fromkeys(supers, WHITE)
    for root in sorted(supers):
        if color[root] != WHITE:
            continue
        path = [root]
        iters = [iter(sorted(supers[root]))]
        color[root] = GREY
        while iters:
            nxt = next(iters[-1], None)
            if nxt is None:
                color[path.pop()] = BLACK
                iters.pop()
                continue
            if nxt not in color:
                continue
            if color[nxt] == GREY:
                return path[path.index(nxt):]
            if color[nxt] == WHITE:
                color[nxt] = GREY
                path.append(nxt)
                iters.append(iter(sorted(supers[nxt])))
    return None


def _load(graph: Graph, namespace: str, base: _Hierarchy | None, external: bool):
    rdf_type = Iri(RDF_TYPE)
    in_ns = lambda iri: isinstance(iri, Iri) and iri.value.startswith(namespace)  # noqa: E731
    warnings: list[str] = []

    classes = {s.value for s in graph.subjects(rdf_type, Iri(RDFS_CLASS)) if in_ns(s)}
    declared_datatypes = {s.value for s in graph.subjects(rdf_type, Iri(DATATYPE)) if in_ns(s)}
    classes |= declared_datatypes
    props = {s.value for s in graph.subjects(rdf_type, Iri(RDF_PROPERTY)) if in_ns(s)}

    both = classes & props
    if both:
        raise VocabularyError(
            "IRIs declared as both class and property (T and P must be disjoint): "
            + ", ".join(sorted(both)))

    def known(iri: str) -> bool:
        return iri in classes or (base is not None and base.has_type(iri))

    supers: dict[str, set[str]] = {c: set() for c in classes}
    alignments: set[tuple[str, str]] = set()
    for c in classes:
        for o in graph.objects(Iri(c), Iri(RDFS_SUBCLASS_OF)):
            if not isinstance(o, Iri):
                continue
            sup = o.value
            if sup in classes:
                supers[c].add(sup)
            elif external and not sup.startswith(namespace):
                # cross-namespace alignment, e.g. n:HotelRoomProduct < s:HotelRoom
                if base is not None and not base.has_type(sup):
                    warnings.append(f"{c}: subClassOf target {sup} is not declared in the base vocabulary")
                    continue
                supers[c].add(sup)
                alignments.add((c, sup))
            elif sup.startswith(namespace):
                warnings.append(f"{c}: subClassOf target {sup} is not declared")
    if DATATYPE in classes:
        for c in declared_datatypes - {DATATYPE}:
            supers[c].add(DATATYPE)

    cycle = _find_cycle({c: {s for s in sups if s in classes} for c, sups in supers.items()})
    if cycle:
        raise VocabularyError("subClassOf cycle among: " + ", ".join(cycle))

    properties: dict[str, PropertyDef] = {}
    opaque: set[str] = set()
    for p in props:
        domain: set[str] = set()
        range_: set[str] = set()
        for preds, target in ((_DOMAIN_PREDICATES, domain), (_RANGE_PREDICATES, range_)):
            for pred in preds:
                for o in graph.objects(Iri(p), Iri(pred)):
                    if isinstance(o, Iri):
                        target.add(o.value)
        for t in sorted(domain | range_):
            if not known(t) and t not in opaque:
                warnings.append(f"{p}: domain/range target {t} is not declared; kept as an opaque regular type")
                opaque.add(t)
        properties[p] = PropertyDef(p, frozenset(domain), frozenset(range_))

    subs: dict[str, set[str]] = {c: set() for c in classes}
    for c, sups in supers.items():
        for s in sups:
            if s in subs:
                subs[s].add(c)

    types = {c: TypeDef(c, frozenset(subs[c]), frozenset(supers[c])) for c in classes}
    for t in opaque:
        types[t] = TypeDef(t, opaque=True)

    # classify on the (possibly combined) hierarchy
    probe = _Hierarchy({**(dict(base.types) if base is not None else {}), **types}, {})
    for c in classes:
        anc = probe.ancestors(c)
        regular, datatype = THING in anc, DATATYPE in anc
        if regular and datatype:
            raise VocabularyError(f"{c} is below both Thing and DataType")
        if datatype:
            types[c] = replace(types[c], kind=TypeKind.DATATYPE)
        elif not regular:
            types[c] = replace(types[c], orphan=True)

    for w in warnings:
        log.debug(w)
    if warnings:
        log.info("%s: %d unresolved references (see Vocabulary.warnings)", namespace, len(warnings))
    return types, properties, alignments, warnings


def load_vocabulary(graph: Graph, namespace: str = SCHEMA) -> Vocabulary:
    """Build the (T, P) pair from a vocabulary graph.

    Entities outside ``namespace`` are ignored. Types that are neither below
    ``Thing`` nor ``DataType`` are kept, flagged ``orphan`` and treated as
    regular. Instances of ``schema:DataType`` (``Text``, ``Number``, ...)
    are placed directly below ``DataType``.
    """
    types, properties, _, warnings = _load(graph, namespace, None, external=False)
    return Vocabulary(namespace, types, properties, warnings)


def load_external(graph: Graph, namespace: str, base: Vocabulary | None = None) -> ExternalVocabulary:
    """Load an external vocabulary; subClassOf links into other namespaces become alignments.

    With ``base`` given, kinds are computed on the combined hierarchy and
    alignment targets must exist in ``base``.
    """
    types, properties, alignments, warnings = _load(graph, namespace, base, external=True)
    if base is not None:
        types = {u: t for u, t in types.items() if not (t.opaque and base.has_type(u))}
    return ExternalVocabulary(namespace, types, properties, alignments, warnings)


class Universe(_Hierarchy):
    """schema.org plus any external vocabularies, viewed as one hierarchy.

    ``extra_types`` maps pattern-local type IRIs to their supertypes; the
    engine uses it for aliases and anonymous restricted types.
    """

    def __init__(self, vocab: Vocabulary, externals: Sequence[ExternalVocabulary] = (),
                 extra_types: Mapping[str, Iterable[str]] | None = None):
        self.vocab = vocab
        self.externals = tuple(externals)
        types: dict[str, TypeDef] = dict(vocab.types)
        properties: dict[str, PropertyDef] = dict(vocab.properties)
        ext_types: set[str] = set()
        ext_props: set[str] = set()
        added: dict[str, TypeDef] = {}
        for ext in self.externals:
            for u, t in ext.types.items():
                if t.opaque and u in types:
                    continue
                if u in types and not types[u].opaque:
                    prev = types[u]
                    t = replace(prev, direct_supertypes=prev.direct_supertypes | t.direct_supertypes,
                                direct_subtypes=prev.direct_subtypes | t.direct_subtypes)
                types[u] = t
                if ext.in_namespace(u):
                    ext_types.add(u)
                    added[u] = t
            for u, p in ext.properties.items():
                if u in properties:
                    prev = properties[u]
                    p = PropertyDef(u, prev.domain | p.domain, prev.range | p.range)
                properties[u] = p
                ext_props.add(u)
        for u, sups in (extra_types or {}).items():
            types[u] = TypeDef(u, direct_supertypes=frozenset(sups))
            added[u] = types[u]
        # hook new types under their supertypes
        for u, t in added.items():
            for sup in t.direct_supertypes:
                if sup in types:
                    types[sup] = replace(types[sup], direct_subtypes=types[sup].direct_subtypes | {u})
        super().__init__(types, properties)
        # kinds of added types follow their ancestors
        for u in added:
            if u not in self.types:
                continue
            anc = self.ancestors(u)
            kind = TypeKind.DATATYPE if DATATYPE in anc else TypeKind.REGULAR
            orphan = THING not in anc and DATATYPE not in anc
            if kind is not self.types[u].kind or orphan != self.types[u].orphan:
                fixed = dict(self.types)
                fixed[u] = replace(self.types[u], kind=kind, orphan=orphan)
                self.types = MappingProxyType(fixed)
        self.ext_types = frozenset(ext_types)
        self.ext_properties = frozenset(ext_props)
        self.extra_types = frozenset((extra_types or {}).keys())

    @property
    def namespace(self) -> str:
        return self.vocab.namespace

    def in_schema(self, iri: str) -> bool:
        return iri.startswith(self.vocab.namespace)

    def is_schema_type(self, iri: str) -> bool:
        return self.vocab.has_type(iri)

    def is_schema_property(self, iri: str) -> bool:
        return self.vocab.has_property(iri)

    def with_types(self, extra_types: Mapping[str, Iterable[str]]) -> "Universe":
        merged = {u: self.types[u].direct_supertypes for u in self.extra_types}
        merged.update(extra_types)
        return Universe(self.vocab, self.externals, merged)


# module-level forms of the vocabulary predicates


def is_subtype_of(vocab: _Hierarchy, t1: str, t2: str) -> bool:
    return vocab.is_subtype_of(t1, t2)


def subtype_closure(vocab: _Hierarchy, t: str) -> frozenset[str]:
    return vocab.subtype_closure(t)


def domain_contains(vocab: _Hierarchy, prop: str, t: str) -> bool:
    return vocab.domain_contains(prop, t)


def range_contains(vocab: _Hierarchy, prop: str, t: str) -> bool:
    return vocab.range_contains(prop, t)
