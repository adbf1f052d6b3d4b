"""Domain specification operators: AST, SHACL reader/writer, grammar checks.

An operator is a SHACL node shape with one ``sh:targetClass`` and one or
more property shapes. Only the adopted SHACL-Core subset is accepted:
``sh:NodeShape``, ``sh:PropertyShape``, ``sh:targetClass``, ``sh:path``,
``sh:minCount 1``, ``sh:class``, ``sh:datatype``, ``sh:node``,
``sh:property`` and ``sh:or``. Any other ``sh:`` parameter is rejected.

Diagnostics name the grammar production that was violated (for example
``SDOProperty`` or ``MinCount``).
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import Iterable, Sequence, Union

from .rdf import (RDF_FIRST, RDF_NIL, RDF_REST, RDF_TYPE, SH, XSD, BlankNode, Graph, Iri, ListStructureError,
                  Literal, Term, Triple, XSD_INTEGER, read_list)
from .vocab import SCHEMA, ExternalVocabulary, Universe, Vocabulary, local_name


class Kind(str, enum.Enum):
    SDS = "SDS"
    RDS = "RDS"
    EDS = "EDS"


class Severity(str, enum.Enum):
    ERROR = "error"
    WARNING = "warning"
    INFO = "info"


@dataclass(frozen=True)
class Diagnostic:
    severity: Severity
    node: str
    production: str
    message: str

    def __str__(self) -> str:
        return f"{self.severity.value}: [{self.production}] {self.node}: {self.message}"


class OperatorError(Exception):
    """The shape graph does not follow the operator grammar."""

    def __init__(self, diagnostics: Sequence[Diagnostic]):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(str(d) for d in self.diagnostics))


# ---------------------------------------------------------------------------
# datatype table
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def datatype_table() -> tuple[tuple[str, str], ...]:
    """(schema.org datatype IRI, XSD IRI) pairs from the bundled mapping file."""
    raw = json.loads(resources.files("domspec").joinpath("data/datatypes.json").read_text("utf-8"))
    ns = raw["namespace"]
    return tuple((ns + name, xsd) for name, xsd in raw["mapping"])


def xsd_for(schema_type: str) -> str | None:
    for sdo, xsd in datatype_table():
        if sdo == schema_type:
            return xsd
    return None


def schema_datatype_for(xsd: str) -> str | None:
    for sdo, x in datatype_table():
        if x == xsd:
            return sdo
    return None


def mapped_xsd_datatypes() -> frozenset[str]:
    return frozenset(x for _, x in datatype_table())


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ClassRef:
    iri: str

    def key(self) -> tuple:
        return ("class", self.iri)


@dataclass(frozen=True)
class DatatypeRef:
    iri: str

    def key(self) -> tuple:
        return ("datatype", self.iri)


ValueType = Union[ClassRef, DatatypeRef]


@dataclass(frozen=True)
class Conjunction:
    """One or more value types that must all hold (a multi-typed range)."""

    members: tuple[ValueType, ...]

    def __post_init__(self):
        if not self.members:
            raise ValueError("a conjunction needs at least one value type")
        object.__setattr__(self, "members", tuple(sorted(set(self.members), key=lambda m: m.key())))

    def key(self) -> tuple:
        return ("and",) + tuple(m.key() for m in self.members)


@dataclass(frozen=True, eq=False)
class NodeConstraint:
    shapes: tuple["PropertyShape", ...]
    id: Term | None = None

    def key(self) -> tuple:
        ident = self.id.value if isinstance(self.id, Iri) else ""
        return ("node", ident, tuple(sorted(s.key() for s in self.shapes)))

    def __eq__(self, other):
        return isinstance(other, NodeConstraint) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())


@dataclass(frozen=True)
class Restriction:
    value: ValueType
    node: NodeConstraint

    def key(self) -> tuple:
        return ("restrict", self.value.key(), self.node.key())


@dataclass(frozen=True, eq=False)
class Disjunction:
    branches: tuple[Union[Conjunction, Restriction], ...]

    def key(self) -> tuple:
        return ("or",) + tuple(sorted(b.key() for b in self.branches))

    def __eq__(self, other):
        return isinstance(other, Disjunction) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())


Constraint = Union[Conjunction, Restriction, Disjunction]


@dataclass(frozen=True, eq=False)
class PropertyShape:
    path: str
    required: bool
    constraint: Constraint

    def key(self) -> tuple:
        return (self.path, self.required, self.constraint.key())

    def __eq__(self, other):
        return isinstance(other, PropertyShape) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())


@dataclass(frozen=True, eq=False)
class Operator:
    """A parsed operator. Equality ignores shape order and blank-node ids."""

    id: Term
    target_type: str
    shapes: tuple[PropertyShape, ...]
    kind: Kind = Kind.SDS
    prefixes: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self.shapes:
            raise ValueError("an operator needs at least one property shape")

    def key(self) -> tuple:
        ident = self.id.value if isinstance(self.id, Iri) else ""
        return (ident, self.target_type, tuple(sorted(s.key() for s in self.shapes)))

    def __eq__(self, other):
        return isinstance(other, Operator) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    @property
    def name(self) -> str:
        return local_name(self.id.value) if isinstance(self.id, Iri) else local_name(self.target_type)


def iter_shapes(shapes: Iterable[PropertyShape]):
    """Depth-first walk over property shapes, nested ones included."""
    for s in shapes:
        yield s
        for r in restrictions_of(s.constraint):
            yield from iter_shapes(r.node.shapes)


def restrictions_of(c: Constraint) -> list[Restriction]:
    if isinstance(c, Restriction):
        return [c]
    if isinstance(c, Disjunction):
        return [b for b in c.branches if isinstance(b, Restriction)]
    return []


def value_types_of(c: Constraint) -> list[ValueType]:
    if isinstance(c, Conjunction):
        return list(c.members)
    if isinstance(c, Restriction):
        return [c.value]
    out: list[ValueType] = []
    for b in c.branches:
        out.extend(value_types_of(b))
    return out


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------

_T = RDF_TYPE
_NODE_SHAPE = SH + "NodeShape"
_PROPERTY_SHAPE = SH + "PropertyShape"
_ANNOTATIONS = {SH + "name", SH + "description", SH + "order", SH + "group", SH + "message"}
_ROOT_PARAMS = {SH + "targetClass", SH + "property"} | _ANNOTATIONS
_NESTED_PARAMS = {SH + "property"} | _ANNOTATIONS
_SHAPE_PARAMS = {SH + "path", SH + "minCount", SH + "class", SH + "datatype", SH + "node", SH + "or"} | _ANNOTATIONS
_BRANCH_PARAMS = {SH + "class", SH + "datatype", SH + "node"} | _ANNOTATIONS


def _label(term: Term) -> str:
    if isinstance(term, Iri):
        return term.value
    return str(term)


class _OperatorReader:
    def __init__(self, graph: Graph):
        self.g = graph
        self.used_nodes: set[Term] = set()

    def fail(self, node: Term, production: str, message: str):
        raise OperatorError([Diagnostic(Severity.ERROR, _label(node), production, message)])

    def check_params(self, node: Term, allowed: set[str], production: str) -> None:
        for p in self.g.predicates(node):
            if p.value == _T or not p.value.startswith(SH):
                continue
            if p.value not in allowed:
                self.fail(node, production,
                          f"unsupported SHACL parameter sh:{p.value[len(SH):]} (outside the adopted subset)")

    def iris(self, node: Term, param: str, production: str) -> list[str]:
        out = []
        for o in self.g.objects(node, Iri(SH + param)):
            if not isinstance(o, Iri):
                self.fail(node, production, f"sh:{param} must be an IRI, got {o}")
            out.append(o.value)
        return out

    def root(self, root: Term) -> tuple[Term, str, tuple[PropertyShape, ...]]:
        if Iri(_NODE_SHAPE) not in self.g.objects(root, Iri(_T)):
            self.fail(root, "NodeShape", "operator root is not typed sh:NodeShape")
        self.check_params(root, _ROOT_PARAMS, "SDS")
        targets = self.iris(root, "targetClass", "SDOTargetType")
        if len(targets) != 1:
            what = "missing sh:targetClass" if not targets else "more than one sh:targetClass"
            self.fail(root, "SDOTargetType", what)
        shapes = self.property_shapes(root, "SDSPropertyShape")
        return root, targets[0], shapes

    def property_shapes(self, node: Term, production: str) -> tuple[PropertyShape, ...]:
        links = self.g.objects(node, Iri(SH + "property"))
        if not links:
            self.fail(node, production, "node shape has no property shapes")
        return tuple(self.property_shape(p) for p in links)

    def property_shape(self, node: Term) -> PropertyShape:
        self.check_params(node, _SHAPE_PARAMS, "SDSPropertyShape")
        types = set(self.g.objects(node, Iri(_T)))
        if types - {Iri(_PROPERTY_SHAPE)}:
            self.fail(node, "SDSPropertyShape", "property shapes may only be typed sh:PropertyShape")
        paths = self.g.objects(node, Iri(SH + "path"))
        if len(paths) != 1 or not isinstance(paths[0], Iri):
            self.fail(node, "SDOProperty", "property shape needs exactly one sh:path IRI")
        required = False
        counts = self.g.objects(node, Iri(SH + "minCount"))
        if counts:
            if len(counts) > 1 or not (isinstance(counts[0], Literal) and counts[0].datatype == XSD_INTEGER
                                       and counts[0].lexical.lstrip("+") == "1"):
                shown = ", ".join(c.lexical if isinstance(c, Literal) else str(c) for c in counts)
                self.fail(node, "MinCount", f"sh:minCount takes only the integer 1, got {shown}")
            required = True
        ors = self.g.objects(node, Iri(SH + "or"))
        if ors:
            if len(ors) > 1:
                self.fail(node, "DisjunctiveConstraint", "more than one sh:or on a property shape")
            if any(self.g.objects(node, Iri(SH + p)) for p in ("class", "datatype", "node")):
                self.fail(node, "DisjunctiveConstraint",
                          "sh:or cannot be combined with sh:class/sh:datatype/sh:node on the same shape")
            constraint: Constraint = self.disjunction(node, ors[0])
        else:
            constraint = self.value_constraint(node)
        return PropertyShape(paths[0].value, required, constraint)

    def disjunction(self, owner: Term, head: Term) -> Disjunction:
        try:
            members = read_list(self.g, head)
        except ListStructureError as exc:
            self.fail(owner, "DisjunctiveConstraint", f"malformed sh:or list ({exc})")
        if len(members) < 2:
            self.fail(owner, "DisjunctiveConstraint", "sh:or needs at least two alternatives")
        branches = []
        for m in members:
            if isinstance(m, Literal):
                self.fail(owner, "DisjunctiveConstraint", "sh:or members must be shapes")
            self.check_params(m, _BRANCH_PARAMS, "DisjunctiveConstraint")
            branches.append(self.value_constraint(m))
        keys = [b.key() for b in branches]
        if len(set(keys)) != len(keys):
            self.fail(owner, "DisjunctiveConstraint", "sh:or alternatives must be pairwise distinct")
        return Disjunction(tuple(branches))

    def value_constraint(self, node: Term) -> Union[Conjunction, Restriction]:
        classes = self.iris(node, "class", "SimpleClassConstraint")
        datatypes = self.iris(node, "datatype", "DatatypeConstraint")
        nested = self.g.objects(node, Iri(SH + "node"))
        if classes and datatypes:
            self.fail(node, "ValueTypeConstraint",
                      "sh:class and sh:datatype cannot be conjoined (a value is either a node or a literal)")
        if len(datatypes) > 1:
            self.fail(node, "ValueTypeConstraint", "more than one sh:datatype in a conjunction")
        if not classes and not datatypes:
            self.fail(node, "ValueTypeConstraint", "no sh:class or sh:datatype given")
        if nested:
            if len(nested) > 1:
                self.fail(node, "RangeConstraint", "more than one sh:node")
            if datatypes:
                self.fail(node, "RangeConstraint", "a nested node shape cannot restrict a datatype-valued property")
            if len(classes) != 1:
                self.fail(node, "RangeConstraint", "a range restriction takes exactly one sh:class")
            return Restriction(ClassRef(classes[0]), self.node_constraint(nested[0]))
        members = [ClassRef(c) for c in classes] + [DatatypeRef(d) for d in datatypes]
        return Conjunction(tuple(members))

    def node_constraint(self, node: Term) -> NodeConstraint:
        if isinstance(node, Literal):
            self.fail(node, "NodeConstraint", "sh:node must point to a node shape")
        if node in self.used_nodes:
            self.fail(node, "NodeConstraint", "nested node shape is shared by more than one property shape")
        self.used_nodes.add(node)
        if Iri(_NODE_SHAPE) not in self.g.objects(node, Iri(_T)):
            self.fail(node, "NodeConstraint", "nested shape is not typed sh:NodeShape")
        self.check_params(node, _NESTED_PARAMS, "NodeConstraint")
        return NodeConstraint(self.property_shapes(node, "NodeConstraint"), node)


def parse_operator(graph: Graph, root: Term, vocab: Vocabulary | None = None,
                   ext: Sequence[ExternalVocabulary] = ()) -> Operator:
    """Read the operator rooted at ``root``; raises OperatorError on grammar violations."""
    ident, target, shapes = _OperatorReader(graph).root(root)
    op = Operator(ident, target, shapes, prefixes=graph.prefixes)
    object.__setattr__(op, "kind", classify_kind(op, vocab, ext))
    return op


def operator_roots(graph: Graph) -> list[Term]:
    """Node shapes carrying sh:targetClass, i.e. the operators in a document."""
    roots = set(graph.subjects(Iri(SH + "targetClass")))
    roots |= {s for s in graph.subjects(Iri(_T), Iri(_NODE_SHAPE))
              if not graph.subjects(Iri(SH + "node"), s)}
    return sorted(roots, key=lambda t: (isinstance(t, BlankNode), _label(t)))


# ---------------------------------------------------------------------------
# classification
# ---------------------------------------------------------------------------


def classify_kind(op: Operator, vocab: Vocabulary | None = None,
                  ext: Sequence[ExternalVocabulary] = ()) -> Kind:
    """EDS if the operator adds external types/properties/range members,
    RDS if it restricts or replaces ranges, SDS otherwise.

    An external ``sh:class`` counts as a replacement (RDS) when it is
    downward compatible with a declared range of its property, and as a new
    range member (EDS) otherwise. Without a vocabulary, external classes are
    taken as replacements.
    """
    ns = vocab.namespace if vocab is not None else SCHEMA
    universe = Universe(vocab, ext) if vocab is not None else None
    external = lambda iri: not iri.startswith(ns)  # noqa: E731
    if external(op.target_type):
        return Kind.EDS
    restricted = False
    for shape in iter_shapes(op.shapes):
        if external(shape.path):
            return Kind.EDS
        if restrictions_of(shape.constraint):
            restricted = True
        for vt in value_types_of(shape.constraint):
            if isinstance(vt, ClassRef) and external(vt.iri):
                if universe is not None and universe.has_type(vt.iri) and universe.has_property(shape.path):
                    ranges = vocab.properties[shape.path].range if vocab.has_property(shape.path) else ()
                    if not any(universe.has_type(r) and universe.is_subtype_of(vt.iri, r) for r in ranges):
                        return Kind.EDS
                restricted = True
    return Kind.RDS if restricted else Kind.SDS


# ---------------------------------------------------------------------------
# well-formedness
# ---------------------------------------------------------------------------


def check_well_formed(op: Operator, vocab: Vocabulary, ext: Sequence[ExternalVocabulary] = (),
                      kind: Kind | None = None) -> list[Diagnostic]:
    """Grammar diagnostics for ``op``; empty iff it conforms for its kind.

    ``kind`` forces checking against one grammar (e.g. SDS) instead of the
    derived one. Local-property (domain) and local-range (range) mismatches
    are reported as warnings: they do not break the grammar, but the engine
    drops such entries from the pattern.
    """
    kind = kind or classify_kind(op, vocab, ext)
    u = Universe(vocab, ext)
    diags: list[Diagnostic] = []
    allow_ext_types = kind in (Kind.RDS, Kind.EDS)
    allow_ext_props = kind is Kind.EDS
    allow_restrict = kind in (Kind.RDS, Kind.EDS)
    mapped = mapped_xsd_datatypes()

    def err(node: str, production: str, msg: str, severity: Severity = Severity.ERROR):
        diags.append(Diagnostic(severity, node, production, msg))

    t = op.target_type
    if vocab.is_regular(t):
        pass
    elif kind is Kind.EDS and t in u.ext_types and u.is_regular(t):
        pass
    elif kind is Kind.EDS:
        err(t, "ExtTargetType", "target is not a regular type of schema.org or the external vocabularies")
    elif vocab.has_type(t):
        err(t, "SDOTargetType", "target is a datatype, not a regular type")
    else:
        err(t, "SDOTargetType", "target is not a regular type in schema.org")

    def check_class(iri: str):
        if vocab.has_type(iri):
            if not vocab.is_regular(iri):
                err(iri, "SimpleClassConstraint", "sh:class names a datatype; use sh:datatype")
            return
        if iri in u.ext_types:
            if not allow_ext_types:
                err(iri, "ExtClassConstraint", f"external class not allowed in an {kind.value} operator")
            elif not u.is_regular(iri):
                err(iri, "ExtClassConstraint", "external class is not a regular type")
            return
        if iri.startswith(vocab.namespace):
            err(iri, "SimpleClassConstraint", "sh:class is not a type in schema.org")
        else:
            err(iri, "ExtClassConstraint", "sh:class is not a type of any supplied vocabulary")

    def range_types(vt: ValueType) -> str | None:
        if isinstance(vt, ClassRef):
            return vt.iri if u.has_type(vt.iri) else None
        return schema_datatype_for(vt.iri)

    def check_branch(path: str, known_path: bool, branch: Union[Conjunction, Restriction], focus: str | None):
        members = branch.members if isinstance(branch, Conjunction) else (branch.value,)
        for m in members:
            if isinstance(m, ClassRef):
                check_class(m.iri)
            elif m.iri not in mapped:
                err(m.iri, "DatatypeConstraint", "sh:datatype is not a mapped XSD datatype of a schema.org datatype")
        if known_path:
            resolved = [range_types(m) for m in members]
            if all(resolved) and not any(u.range_contains(path, r) for r in resolved):
                names = ", ".join(local_name(r) for r in resolved)
                err(path, "ValueTypeConstraint", f"{names} is not in the range of {local_name(path)}",
                    Severity.WARNING)
        if isinstance(branch, Restriction):
            if not allow_restrict:
                err(path, "RangeConstraint", f"range restrictions are not part of {kind.value} operators")
            nested_focus = None
            node_id = branch.node.id
            if isinstance(node_id, Iri) and u.has_type(node_id.value):
                nested_focus = node_id.value
            elif u.has_type(branch.value.iri):
                nested_focus = branch.value.iri
            walk(branch.node.shapes, nested_focus)

    def walk(shapes: Sequence[PropertyShape], focus: str | None):
        for s in shapes:
            p = s.path
            if vocab.has_property(p):
                known = True
            elif p in u.ext_properties:
                known = allow_ext_props
                if not allow_ext_props:
                    err(p, "ExtProperty", f"external property not allowed in an {kind.value} operator")
            else:
                known = False
                err(p, "ExtProperty" if kind is Kind.EDS else "SDOProperty",
                    "property is not declared in schema.org" + (" or the external vocabularies" if ext else ""))
            if known and focus is not None and u.has_type(focus) and not u.domain_contains(p, focus):
                err(p, "SDOProperty", f"{local_name(p)} is not in the domain of {local_name(focus)}",
                    Severity.WARNING)
            c = s.constraint
            branches = c.branches if isinstance(c, Disjunction) else (c,)
            for b in branches:
                check_branch(p, known, b, focus)

    walk(op.shapes, t if u.has_type(t) else None)
    return diags


def check_document(graph: Graph, vocab: Vocabulary, ext: Sequence[ExternalVocabulary] = (),
                   kind: Kind | None = None) -> list[Diagnostic]:
    """Parse every operator in ``graph`` and collect grammar diagnostics."""
    roots = operator_roots(graph)
    if not roots:
        return [Diagnostic(Severity.ERROR, "<document>", "SDS", "no node shape found")]
    diags: list[Diagnostic] = []
    for r in roots:
        try:
            op = parse_operator(graph, r, vocab, ext)
        except OperatorError as exc:
            diags.extend(exc.diagnostics)
            continue
        diags.extend(check_well_formed(op, vocab, ext, kind))
    return diags


def has_errors(diags: Iterable[Diagnostic]) -> bool:
    return any(d.severity is Severity.ERROR for d in diags)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

DEFAULT_PREFIXES = {"s": SCHEMA, "sh": SH, "xsd": XSD}


class _OperatorWriter:
    def __init__(self):
        self.triples: list[Triple] = []
        self.counter = 0

    def fresh(self) -> BlankNode:
        node = BlankNode(f"b{self.counter}")
        self.counter += 1
        return node

    def add(self, s: Term, p: str, o: Term) -> None:
        self.triples.append(Triple(s, Iri(p), o))

    def node_id(self, ident: Term | None) -> Term:
        return ident if isinstance(ident, Iri) else self.fresh()

    def shapes(self, owner: Term, shapes: Sequence[PropertyShape]) -> None:
        for s in shapes:
            node = self.fresh()
            self.add(owner, SH + "property", node)
            self.add(node, _T, Iri(_PROPERTY_SHAPE))
            self.add(node, SH + "path", Iri(s.path))
            if s.required:
                self.add(node, SH + "minCount", Literal("1", XSD_INTEGER))
            c = s.constraint
            if isinstance(c, Disjunction):
                items = []
                for b in c.branches:
                    bn = self.fresh()
                    self.value_constraint(bn, b)
                    items.append(bn)
                self.add(node, SH + "or", self.rdf_list(items))
            else:
                self.value_constraint(node, c)

    def value_constraint(self, node: Term, c: Union[Conjunction, Restriction]) -> None:
        members = c.members if isinstance(c, Conjunction) else (c.value,)
        for m in members:
            param = "class" if isinstance(m, ClassRef) else "datatype"
            self.add(node, SH + param, Iri(m.iri))
        if isinstance(c, Restriction):
            nested = self.node_id(c.node.id)
            self.add(node, SH + "node", nested)
            self.add(nested, _T, Iri(_NODE_SHAPE))
            self.shapes(nested, c.node.shapes)

    def rdf_list(self, items: list[Term]) -> Term:
        head: Term = Iri(RDF_NIL)
        for item in reversed(items):
            node = BlankNode(f"l{self.counter}")
            self.counter += 1
            self.add(node, RDF_FIRST, item)
            self.add(node, RDF_REST, head)
            head = node
        return head


def serialize_operator(op: Operator, prefixes: dict | None = None) -> Graph:
    """SHACL graph for ``op``; ``parse_operator`` on the result gives back ``op``."""
    w = _OperatorWriter()
    root = w.node_id(op.id)
    w.add(root, _T, Iri(_NODE_SHAPE))
    w.add(root, SH + "targetClass", Iri(op.target_type))
    w.shapes(root, op.shapes)
    merged = dict(DEFAULT_PREFIXES)
    for label, ns in (prefixes if prefixes is not None else op.prefixes).items():
        if ns not in merged.values():
            merged.setdefault(label, ns)
    used = {t for tr in w.triples for t in (tr.subject, tr.predicate, tr.object) if isinstance(t, Iri)}
    keep = {label: ns for label, ns in merged.items() if any(i.value.startswith(ns) for i in used)}
    return Graph(w.triples, keep)
