"""Checking instance data against a pattern.

Validation is closed: properties a pattern does not define for a focus
node are reported as ``DisallowedProperty``, by default with Warning
severity. No RDFS inference is performed, so a value only satisfies a class
constraint through its asserted ``rdf:type`` values (or their supertypes).
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from datetime import date, time
from typing import Sequence

from .engine import (AlternativesRange, ConjunctionRange, Pattern, PatternNode, RangeSpec, RestrictedRange,
                     SimpleRange)
from .rdf import RDF_TYPE, SH, XSD, BlankNode, Graph, Iri, Literal, RDF_LANGSTRING, Term, Triple, XSD_STRING
from .vocab import local_name


class ResultKind(str, enum.Enum):
    MISSING_REQUIRED = "MissingRequired"
    WRONG_VALUE_TYPE = "WrongValueType"
    DISALLOWED_PROPERTY = "DisallowedProperty"
    NO_DISJUNCT_BRANCH = "NoDisjunctBranch"
    NESTED_FAILURE = "NestedFailure"


class ResultSeverity(str, enum.Enum):
    VIOLATION = "Violation"
    WARNING = "Warning"
    INFO = "Info"

    @property
    def rank(self) -> int:
        return {"Violation": 2, "Warning": 1, "Info": 0}[self.value]


_COMPONENT = {
    ResultKind.MISSING_REQUIRED: "MinCountConstraintComponent",
    ResultKind.DISALLOWED_PROPERTY: "ClosedConstraintComponent",
    ResultKind.NO_DISJUNCT_BRANCH: "OrConstraintComponent",
    ResultKind.NESTED_FAILURE: "NodeConstraintComponent",
}


@dataclass(frozen=True)
class ValidationResult:
    focus: Term
    path: str | None
    kind: ResultKind
    severity: ResultSeverity
    message: str
    nested: tuple["ValidationResult", ...] = ()
    value: Term | None = None
    component: str | None = None

    def __post_init__(self):
        if self.kind in (ResultKind.MISSING_REQUIRED, ResultKind.WRONG_VALUE_TYPE) and self.path is None:
            raise ValueError(f"{self.kind.value} needs a path")

    @property
    def source_component(self) -> str:
        return SH + (self.component or _COMPONENT[self.kind])


@dataclass(frozen=True)
class ValidationReport:
    results: tuple[ValidationResult, ...]
    targets: tuple[Term, ...] = ()

    @property
    def conforms(self) -> bool:
        return not any(r.severity is ResultSeverity.VIOLATION for r in self.results)

    def count(self, severity: ResultSeverity) -> int:
        return sum(1 for r in self.results if r.severity is severity)


# ---------------------------------------------------------------------------
# lexical forms
# ---------------------------------------------------------------------------

_TZ = r"(?:Z|[+-](?:(?:0\d|1[0-3]):[0-5]\d|14:00))?"
_DATE_RE = re.compile(r"^(-?\d{4,})-(\d\d)-(\d\d)" + _TZ + "$")
_TIME_RE = re.compile(r"^(\d\d):(\d\d):(\d\d)(?:\.\d+)?" + _TZ + "$")
_DATETIME_RE = re.compile(r"^(-?\d{4,})-(\d\d)-(\d\d)T(\d\d):(\d\d):(\d\d)(?:\.\d+)?" + _TZ + "$")
_INTEGER_RE = re.compile(r"^[+-]?\d+$")
_DOUBLE_RE = re.compile(r"^(?:[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?|[+-]?INF|NaN)$")


def _valid_date(y: str, m: str, d: str) -> bool:
    try:
        date(max(1, min(int(y), 9999)), int(m), int(d))
    except ValueError:
        return False
    return True


def _valid_time(h: str, mi: str, s: str) -> bool:
    if (h, mi, s) == ("24", "00", "00"):
        return True
    try:
        time(int(h), int(mi), int(s))
    except ValueError:
        return False
    return True


def lexically_valid(lexical: str, datatype: str) -> bool:
    """Whether ``lexical`` is a legal form of the XSD ``datatype``."""
    local = datatype[len(XSD):] if datatype.startswith(XSD) else None
    if local == "string":
        return True
    if local == "anyURI":
        return not re.search(r"\s", lexical)
    if local == "integer":
        return bool(_INTEGER_RE.match(lexical))
    if local == "double":
        return bool(_DOUBLE_RE.match(lexical))
    if local == "boolean":
        return lexical in ("true", "false", "1", "0")
    if local == "date":
        m = _DATE_RE.match(lexical)
        return bool(m) and _valid_date(*m.groups())
    if local == "time":
        m = _TIME_RE.match(lexical)
        return bool(m) and _valid_time(*m.groups())
    if local == "dateTime":
        m = _DATETIME_RE.match(lexical)
        return bool(m) and _valid_date(*m.groups()[:3]) and _valid_time(*m.groups()[3:])
    return True


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------


def select_targets(data: Graph, pattern: Pattern) -> list[Term]:
    """Nodes typed with the pattern's target type or one of its subtypes."""
    u = pattern.universe
    wanted = u.subtype_closure(pattern.target)
    found: set[Term] = set()
    for t in wanted:
        found |= set(data.subjects(Iri(RDF_TYPE), Iri(t)))
    return sorted(found, key=lambda n: (isinstance(n, BlankNode), str(n)))


def _worst(results: Sequence[ValidationResult]) -> ResultSeverity | None:
    if not results:
        return None
    return max((r.severity for r in results), key=lambda s: s.rank)


class _Validator:
    def __init__(self, data: Graph, pattern: Pattern, closed_severity: ResultSeverity):
        self.data = data
        self.u = pattern.universe
        self.closed = closed_severity
        self.memo: dict[tuple[Term, int], tuple[ValidationResult, ...]] = {}
        self.active: set[tuple[Term, int]] = set()

    def has_class(self, node: Term, cls: str) -> bool:
        if isinstance(node, Literal):
            return False
        for t in self.data.objects(node, Iri(RDF_TYPE)):
            if isinstance(t, Iri) and self.u.has_type(t.value) and self.u.is_subtype_of(t.value, cls):
                return True
        return False

    def node(self, focus: Term, pnode: PatternNode) -> tuple[ValidationResult, ...]:
        key = (focus, id(pnode))
        if key in self.memo:
            return self.memo[key]
        if key in self.active:
            return ()
        self.active.add(key)
        results: list[ValidationResult] = []
        allowed = {RDF_TYPE}
        for e in pnode.entries:
            allowed.add(e.path)
            values = self.data.objects(focus, Iri(e.path))
            if e.required and not values:
                results.append(ValidationResult(
                    focus, e.path, ResultKind.MISSING_REQUIRED, ResultSeverity.VIOLATION,
                    f"{local_name(e.path)} is required on {local_name(pnode.type)}"))
            for v in values:
                results.extend(self.value(focus, e.path, v, e.range))
        for p in self.data.predicates(focus):
            if p.value not in allowed:
                for v in self.data.objects(focus, p):
                    results.append(ValidationResult(
                        focus, p.value, ResultKind.DISALLOWED_PROPERTY, self.closed,
                        f"{local_name(p.value)} is not defined for {local_name(pnode.type)} in this pattern",
                        value=v))
        self.active.discard(key)
        out = tuple(results)
        self.memo[key] = out
        return out

    def value(self, focus: Term, path: str, v: Term, spec: RangeSpec) -> list[ValidationResult]:
        def wrong(msg: str, component: str) -> list[ValidationResult]:
            return [ValidationResult(focus, path, ResultKind.WRONG_VALUE_TYPE, ResultSeverity.VIOLATION,
                                     msg, value=v, component=component)]

        if isinstance(spec, SimpleRange):
            if spec.datatype is not None:
                if not self.literal_ok(v, spec.datatype):
                    return wrong(f"{local_name(path)} needs a valid {local_name(spec.datatype)} literal, got {v}",
                                 "DatatypeConstraintComponent")
                return []
            if not self.has_class(v, spec.type):
                return wrong(f"{local_name(path)} value {v} is not typed {local_name(spec.type)}",
                             "ClassConstraintComponent")
            return []
        if isinstance(spec, ConjunctionRange):
            missing = sorted(m for m in spec.members if not self.has_class(v, m))
            if missing:
                names = " and ".join(local_name(m) for m in missing)
                return wrong(f"{local_name(path)} value {v} is not typed {names}", "ClassConstraintComponent")
            return []
        if isinstance(spec, RestrictedRange):
            if not self.has_class(v, spec.type):
                return wrong(f"{local_name(path)} value {v} is not typed {local_name(spec.type)}",
                             "ClassConstraintComponent")
            nested = self.node(v, spec.fragment)
            if not nested:
                return []
            sev = _worst(nested)
            return [ValidationResult(focus, path, ResultKind.NESTED_FAILURE, sev,
                                     f"{local_name(path)} value {v} does not satisfy its nested shape",
                                     nested=nested, value=v)]
        assert isinstance(spec, AlternativesRange)
        per_branch = [self.value(focus, path, v, b) for b in spec.branches]
        for res in per_branch:
            if _worst(res) is not ResultSeverity.VIOLATION:
                return res
        flat = tuple(r for res in per_branch for r in res)
        return [ValidationResult(focus, path, ResultKind.NO_DISJUNCT_BRANCH, ResultSeverity.VIOLATION,
                                 f"{local_name(path)} value {v} matches none of {len(spec.branches)} alternatives",
                                 nested=flat, value=v)]

    @staticmethod
    def literal_ok(v: Term, datatype: str) -> bool:
        if not isinstance(v, Literal):
            return False
        if v.datatype == RDF_LANGSTRING and datatype == XSD_STRING:
            return True
        return v.datatype == datatype and lexically_valid(v.lexical, datatype)


def validate(data: Graph, pattern: Pattern, closedness: str | ResultSeverity = "warning") -> ValidationReport:
    """Validate every target node of ``data`` against ``pattern``.

    ``closedness`` sets the severity of DisallowedProperty results
    (``"warning"`` or ``"violation"``).
    """
    sev = closedness if isinstance(closedness, ResultSeverity) else ResultSeverity(str(closedness).capitalize())
    v = _Validator(data, pattern, sev)
    targets = select_targets(data, pattern)
    results: list[ValidationResult] = []
    for node in targets:
        results.extend(v.node(node, pattern.tree))
    return ValidationReport(tuple(results), tuple(targets))


# ---------------------------------------------------------------------------
# SHACL report graph
# ---------------------------------------------------------------------------


def report_to_graph(report: ValidationReport) -> Graph:
    """The report in the SHACL validation-report vocabulary."""
    triples: list[Triple] = []
    counter = iter(range(1 << 30))

    def add(s: Term, p: str, o: Term) -> None:
        triples.append(Triple(s, Iri(p), o))

    def result_node(r: ValidationResult) -> BlankNode:
        node = BlankNode(f"r{next(counter)}")
        add(node, RDF_TYPE, Iri(SH + "ValidationResult"))
        add(node, SH + "focusNode", r.focus)
        if r.path is not None:
            add(node, SH + "resultPath", Iri(r.path))
        add(node, SH + "resultSeverity", Iri(SH + r.severity.value))
        add(node, SH + "resultMessage", Literal(r.message))
        add(node, SH + "sourceConstraintComponent", Iri(r.source_component))
        if r.value is not None:
            add(node, SH + "value", r.value)
        for n in r.nested:
            add(node, SH + "detail", result_node(n))
        return node

    root = BlankNode("report")
    add(root, RDF_TYPE, Iri(SH + "ValidationReport"))
    add(root, SH + "conforms", Literal("true" if report.conforms else "false", XSD + "boolean"))
    for r in report.results:
        add(root, SH + "result", result_node(r))
    return Graph(triples, {"sh": SH, "xsd": XSD, "s": "http://schema.org/"})


def report_summary(report: ValidationReport) -> str:
    """Plain-text, one line per top-level result."""
    lines = [f"{len(report.targets)} targets checked, "
             f"{report.count(ResultSeverity.VIOLATION)} violations, "
             f"{report.count(ResultSeverity.WARNING)} warnings, conforms: {str(report.conforms).lower()}"]
    for r in report.results:
        path = local_name(r.path) if r.path else "-"
        lines.append(f"{r.severity.value.upper()} {r.kind.value} {r.focus} {path}: {r.message}")
    return "\n".join(lines) + "\n"
