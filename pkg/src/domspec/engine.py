"""Applying an operator to the vocabulary: the domain specification process.

``apply`` turns an operator into a :class:`Pattern` holding the four sets
of a domain-specific pattern (included types, included properties, local
properties and local ranges) plus the restriction tree used by validation
and documentation.

Nested node shapes get a focus type of their own. If the nested shape's IRI
is a type declared in an external vocabulary and sits below the restricted
class, that type is used as an alias (``n:Location``). Otherwise a
pattern-local type ``urn:domspec:pattern:<Target>.<property>[.<property>...]``
is minted below the restricted class, named after its path from the target.
Minted types never enter the included-type set.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence, Union

from .operators import (ClassRef, Conjunction, DatatypeRef, Diagnostic, Disjunction, Kind, NodeConstraint,
                        Operator, PropertyShape, Restriction, Severity, classify_kind, schema_datatype_for)
from .rdf import Iri, Term
from .vocab import ExternalVocabulary, Universe, Vocabulary, local_name

MINT_PREFIX = "urn:domspec:pattern:"


class EngineError(Exception):
    """The operator cannot be applied (it is not well formed for the vocabulary)."""


class DownwardCompatibilityError(EngineError):
    def __init__(self, ext_type: str, prop: str, declared: Iterable[str]):
        self.ext_type = ext_type
        self.prop = prop
        self.declared = sorted(declared)
        names = ", ".join(local_name(d) for d in self.declared) or "nothing"
        super().__init__(f"{ext_type} replaces a range member of {local_name(prop)} "
                         f"but is not a subtype of any of: {names}")


class PatternKind(str, enum.Enum):
    SDSP = "SDSP"
    RDSP = "RDSP"
    EDSP = "EDSP"


_PATTERN_KIND = {Kind.SDS: PatternKind.SDSP, Kind.RDS: PatternKind.RDSP, Kind.EDS: PatternKind.EDSP}


# ---------------------------------------------------------------------------
# range specifications and the pattern tree
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SimpleRange:
    type: str
    datatype: str | None = None


@dataclass(frozen=True)
class ConjunctionRange:
    members: frozenset[str]
    alias: str | None = None

    def __post_init__(self):
        if len(self.members) < 2:
            raise ValueError("a conjunction range needs at least two members")


@dataclass(frozen=True)
class RestrictedRange:
    type: str
    fragment: "PatternNode"
    alias: str | None = None


@dataclass(frozen=True)
class AlternativesRange:
    branches: tuple["RangeSpec", ...]

    def __post_init__(self):
        if len(self.branches) < 2:
            raise ValueError("alternatives need at least two branches")


RangeSpec = Union[SimpleRange, ConjunctionRange, RestrictedRange, AlternativesRange]


@dataclass(frozen=True)
class Entry:
    path: str
    required: bool
    range: RangeSpec


@dataclass(frozen=True)
class PatternNode:
    """One node of the restriction tree: a focus type and its local properties."""

    type: str
    entries: tuple[Entry, ...]
    id: Term | None = None
    minted: bool = False

    @property
    def title(self) -> str:
        return local_name(self.type)


def range_types(spec: RangeSpec) -> frozenset[str]:
    """Type IRIs a range collapses to in the flat local-range set."""
    if isinstance(spec, SimpleRange):
        return frozenset({spec.type})
    if isinstance(spec, ConjunctionRange):
        return frozenset({spec.alias}) if spec.alias else spec.members
    if isinstance(spec, RestrictedRange):
        return frozenset({spec.alias or spec.type})
    out: set[str] = set()
    for b in spec.branches:
        out |= range_types(b)
    return frozenset(out)


def named_types(spec: RangeSpec) -> frozenset[str]:
    """Every non-minted type a range mentions, aliases included."""
    if isinstance(spec, SimpleRange):
        return frozenset({spec.type})
    if isinstance(spec, ConjunctionRange):
        return spec.members | ({spec.alias} if spec.alias else set())
    if isinstance(spec, RestrictedRange):
        return frozenset({spec.type} | ({spec.alias} if spec.alias else set()))
    out: set[str] = set()
    for b in spec.branches:
        out |= named_types(b)
    return frozenset(out)


def walk_nodes(node: PatternNode):
    """The node and all nested fragment nodes, depth first."""
    yield node
    for e in node.entries:
        for frag in fragments_of(e.range):
            yield from walk_nodes(frag)


def fragments_of(spec: RangeSpec) -> list[PatternNode]:
    if isinstance(spec, RestrictedRange):
        return [spec.fragment]
    if isinstance(spec, AlternativesRange):
        return [f for b in spec.branches for f in fragments_of(b)]
    return []


@dataclass(frozen=True, eq=False)
class Pattern:
    kind: PatternKind
    target: str
    included_types: frozenset[str]
    included_properties: frozenset[str]
    local_properties: frozenset[tuple[str, str]]
    local_ranges: Mapping[tuple[str, str], RangeSpec]
    required: frozenset[tuple[str, str]]
    tree: PatternNode
    universe: Universe = field(repr=False)
    operator: Operator = field(repr=False)
    notes: tuple[Diagnostic, ...] = ()
    metadata: Mapping[str, object] = field(default_factory=dict)

    @property
    def name(self) -> str:
        return local_name(self.target)

    def __eq__(self, other):
        return isinstance(other, Pattern) and self.kind == other.kind and flat_sets(self) == flat_sets(other)

    def __hash__(self):
        return hash((self.kind, flat_sets(self)))


# ---------------------------------------------------------------------------
# apply
# ---------------------------------------------------------------------------


def check_downward_compatibility(ext_type: str, replaced: str, vocab: Vocabulary,
                                 ext: Sequence[ExternalVocabulary] = (), universe: Universe | None = None) -> bool:
    """True iff ``ext_type`` sits (transitively, via alignments) below ``replaced``."""
    u = universe or Universe(vocab, ext)
    return u.has_type(ext_type) and u.has_type(replaced) and u.is_subtype_of(ext_type, replaced)


def _conjunction_alias(members: frozenset[str], u: Universe) -> str | None:
    found = sorted(x for x in u.ext_types if u.types[x].direct_supertypes == members)
    return found[0] if found else None


class _Builder:
    def __init__(self, op: Operator, vocab: Vocabulary, ext: Sequence[ExternalVocabulary]):
        self.op = op
        self.vocab = vocab
        self.base = Universe(vocab, ext)
        self.kind = classify_kind(op, vocab, ext)
        self.notes: list[Diagnostic] = []
        self.minted: dict[str, frozenset[str]] = {}
        self.fragment_types: dict[int, tuple[str, bool]] = {}
        self.u = self.base

    def note(self, node: str, code: str, msg: str, severity: Severity = Severity.INFO) -> None:
        self.notes.append(Diagnostic(severity, node, code, msg))

    # pass 1: decide the focus type of every nested node shape

    def plan(self, title: str, shapes: Sequence[PropertyShape]) -> None:
        for s in shapes:
            c = s.constraint
            branches = c.branches if isinstance(c, Disjunction) else (c,)
            restrictions = [b for b in branches if isinstance(b, Restriction)]
            for i, r in enumerate(restrictions):
                if isinstance(r.value, DatatypeRef):
                    raise EngineError(f"nested shape on datatype-valued property {local_name(s.path)}")
                nid = r.node.id
                cls = r.value.iri
                child = f"{title}.{local_name(s.path)}" + (f"~{i + 1}" if i else "")
                if (isinstance(nid, Iri) and self.base.has_type(nid.value) and self.base.has_type(cls)
                        and self.base.is_subtype_of(nid.value, cls)):
                    ftype, minted = nid.value, False
                else:
                    ftype, minted = MINT_PREFIX + child, True
                    if ftype in self.minted:
                        raise EngineError(f"property {local_name(s.path)} constrained twice on {title}")
                    self.minted[ftype] = frozenset({cls})
                self.fragment_types[id(r.node)] = (ftype, minted)
                self.plan(child, r.node.shapes)

    # pass 2: build the tree

    def node(self, focus: str, ident: Term | None, shapes: Sequence[PropertyShape], minted: bool) -> PatternNode:
        entries: list[Entry] = []
        seen: set[str] = set()
        for s in shapes:
            p = s.path
            if p in seen:
                raise EngineError(f"property {local_name(p)} constrained twice on {local_name(focus)}")
            seen.add(p)
            if not self.u.has_property(p):
                raise EngineError(f"unknown property {p}")
            if not self.u.domain_contains(p, focus):
                self.note(p, "LocalProperty", f"dropped: {local_name(p)} is not in the domain of {local_name(focus)}",
                          Severity.WARNING)
                continue
            spec = self.range(focus, p, s.constraint)
            if spec is None:
                self.note(p, "LocalRange", f"dropped: no constrained type of {local_name(p)} is in its range",
                          Severity.WARNING)
                continue
            entries.append(Entry(p, s.required, spec))
        return PatternNode(focus, tuple(entries), ident, minted)

    def in_range(self, p: str, t: str) -> bool:
        if self.u.range_contains(p, t):
            return True
        # an external type may add a new range member in an EDSP
        return self.kind is Kind.EDS and t in self.u.ext_types

    def check_replacement(self, p: str, t: str) -> None:
        if self.kind is not Kind.RDS or t not in self.u.ext_types:
            return
        declared = self.vocab.properties[p].range if self.vocab.has_property(p) else frozenset()
        if not any(check_downward_compatibility(t, r, self.vocab, universe=self.base) for r in declared):
            raise DownwardCompatibilityError(t, p, declared)

    def type_of(self, vt: Union[ClassRef, DatatypeRef]) -> str:
        if isinstance(vt, DatatypeRef):
            t = schema_datatype_for(vt.iri)
            if t is None:
                raise EngineError(f"unmapped datatype {vt.iri}")
            return t
        if not self.u.has_type(vt.iri):
            raise EngineError(f"unknown class {vt.iri}")
        return vt.iri

    def range(self, focus: str, p: str, c) -> RangeSpec | None:
        if isinstance(c, Disjunction):
            branches = [b for b in (self.range(focus, p, x) for x in c.branches) if b is not None]
            unique = list(dict.fromkeys(branches))
            if not unique:
                return None
            return unique[0] if len(unique) == 1 else AlternativesRange(tuple(unique))
        if isinstance(c, Restriction):
            cls = self.type_of(c.value)
            ftype, minted = self.fragment_types[id(c.node)]
            alias = None if minted else ftype
            if not self.in_range(p, cls):
                return None
            self.check_replacement(p, cls)
            if alias:
                self.check_replacement(p, alias)
            fragment = self.node(ftype, c.node.id, c.node.shapes, minted)
            return RestrictedRange(cls, fragment, alias)
        assert isinstance(c, Conjunction)
        if len(c.members) == 1:
            m = c.members[0]
            t = self.type_of(m)
            if not self.in_range(p, t):
                return None
            self.check_replacement(p, t)
            return SimpleRange(t, m.iri if isinstance(m, DatatypeRef) else None)
        types = [self.type_of(m) for m in c.members]
        kept = frozenset(t for t in types
                         if not any(o != t and self.u.is_subtype_of(o, t) for o in types))
        for t in sorted(set(types) - kept):
            self.note(t, "RedundantConjunct",
                      f"{local_name(t)} in the range of {local_name(p)} on {local_name(focus)} "
                      "is implied by a more specific member")
        if not any(self.in_range(p, t) for t in kept):
            return None
        for t in sorted(kept):
            self.check_replacement(p, t)
        if len(kept) == 1:
            return SimpleRange(next(iter(kept)))
        return ConjunctionRange(kept, _conjunction_alias(kept, self.u))


def apply(op: Operator, vocab: Vocabulary, ext: Sequence[ExternalVocabulary] = ()) -> Pattern:
    """Apply ``op`` to ``vocab`` (plus external vocabularies) and return its pattern."""
    b = _Builder(op, vocab, ext)
    if not b.base.has_type(op.target_type):
        raise EngineError(f"unknown target type {op.target_type}")
    b.plan(local_name(op.target_type), op.shapes)
    if b.minted:
        b.u = b.base.with_types(b.minted)
    tree = b.node(op.target_type, op.id, op.shapes, minted=False)

    types: set[str] = set(b.base.subtype_closure(op.target_type))
    props: set[str] = set()
    pairs: set[tuple[str, str]] = set()
    ranges: dict[tuple[str, str], RangeSpec] = {}
    required: set[tuple[str, str]] = set()
    external_only: list[str] = []
    for node in walk_nodes(tree):
        if not node.minted:
            types |= b.base.subtype_closure(node.type)
        for e in node.entries:
            key = (node.type, e.path)
            props.add(e.path)
            pairs.add(key)
            ranges[key] = e.range
            if e.required:
                required.add(key)
            for t in named_types(e.range):
                types |= b.base.subtype_closure(t)
            if all(t in b.u.ext_types for t in named_types(e.range)):
                external_only.append(f"{local_name(node.type)}.{local_name(e.path)}")
    metadata = {"fully_external_ranges": sorted(external_only)}
    return Pattern(_PATTERN_KIND[b.kind], op.target_type, frozenset(types), frozenset(props), frozenset(pairs),
                   ranges, frozenset(required), tree, b.u, op, tuple(b.notes), metadata)


# ---------------------------------------------------------------------------
# flat views and the brute-force oracle
# ---------------------------------------------------------------------------


FlatSets = tuple[tuple[str, ...], tuple[str, ...], tuple[tuple[str, str], ...], tuple[tuple[tuple[str, str], str], ...]]


def flat_sets(pattern: Pattern) -> FlatSets:
    """(types, properties, local properties, local ranges), each sorted."""
    flat_ranges = {(key, t) for key, spec in pattern.local_ranges.items() for t in range_types(spec)}
    return (tuple(sorted(pattern.included_types)), tuple(sorted(pattern.included_properties)),
            tuple(sorted(pattern.local_properties)), tuple(sorted(flat_ranges)))


@dataclass(frozen=True)
class OracleSets:
    types: frozenset[str]
    properties: frozenset[str]
    local_properties: frozenset[tuple[str, str]]
    local_ranges: frozenset[tuple[tuple[str, str], str]]

    def as_flat(self) -> FlatSets:
        return (tuple(sorted(self.types)), tuple(sorted(self.properties)),
                tuple(sorted(self.local_properties)), tuple(sorted(self.local_ranges)))


def brute_force_oracle(op: Operator, vocab: Vocabulary) -> OracleSets:
    """Evaluate the pattern sets of an SDS operator by exhaustive set comprehension.

    Shares nothing with ``apply`` beyond the raw vocabulary tables: ancestry
    is recomputed from direct supertype links, and local properties and
    ranges are tested over every candidate pair. Meant for desk-scale
    vocabularies only.
    """
    all_types = sorted(vocab.types)
    all_props = sorted(vocab.properties)

    def ancestors(t: str) -> set[str]:
        out, frontier = {t}, [t]
        while frontier:
            nxt = []
            for x in frontier:
                for s in vocab.types[x].direct_supertypes:
                    if s in vocab.types and s not in out:
                        out.add(s)
                        nxt.append(s)
            frontier = nxt
        return out

    anc = {t: ancestors(t) for t in all_types}

    def branch_types(c) -> list[list[str]]:
        if isinstance(c, Disjunction):
            return [bt for b in c.branches for bt in branch_types(b)]
        members = c.members if isinstance(c, Conjunction) else (c.value,)
        return [[m.iri if isinstance(m, ClassRef) else schema_datatype_for(m.iri) for m in members]]

    constraint = {s.path: s.constraint for s in op.shapes}
    target = op.target_type
    tp = {(t, p) for t in all_types for p in all_props
          if t == target and p in constraint and anc[t] & vocab.properties[p].domain}
    tr = set()
    for (t, p) in tp:
        rng = vocab.properties[p].range
        for members in branch_types(constraint[p]):
            if not any(anc[m] & rng for m in members):
                continue
            for r in all_types:
                if r in members and not any(o != r and r in anc[o] for o in members):
                    tr.add(((t, p), r))
    tp = {key for key in tp if any(k == key for k, _ in tr)}
    named = {target} | {r for _, r in tr}
    t_cap = {t for t in all_types if anc[t] & named}
    p_cap = {p for p in all_props if any(q == p for _, q in tp)}
    return OracleSets(frozenset(t_cap), frozenset(p_cap), frozenset(tp), frozenset(tr))


def pattern_operator(pattern: Pattern) -> Operator:
    """The operator equivalent to the pattern's tree (dropped entries left out)."""

    def constraint(spec: RangeSpec):
        if isinstance(spec, SimpleRange):
            vt = DatatypeRef(spec.datatype) if spec.datatype else ClassRef(spec.type)
            return Conjunction((vt,))
        if isinstance(spec, ConjunctionRange):
            return Conjunction(tuple(ClassRef(m) for m in spec.members))
        if isinstance(spec, RestrictedRange):
            return Restriction(ClassRef(spec.type), NodeConstraint(shapes(spec.fragment), spec.fragment.id))
        return Disjunction(tuple(constraint(b) for b in spec.branches))

    def shapes(node: PatternNode) -> tuple[PropertyShape, ...]:
        return tuple(PropertyShape(e.path, e.required, constraint(e.range)) for e in node.entries)

    op = pattern.operator
    return Operator(op.id, pattern.target, shapes(pattern.tree), op.kind, op.prefixes)
