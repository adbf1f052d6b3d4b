"""Minimal RDF model with a Turtle-subset reader and a deterministic writer.

The supported Turtle subset covers what schema.org release files, SHACL
shape documents and annotation instance data need: ``@prefix``, IRIs,
prefixed names, ``a``, predicate/object lists, blank-node labels and
property lists, collections, short and long strings with language tags or
datatypes, and plain integers. ``@base``, relative IRIs, decimals, doubles
and boolean shorthand are rejected with a syntax error.
"""

from __future__ import annotations

import bisect
import re
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Union

RDF = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
RDFS = "http://www.w3.org/2000/01/rdf-schema#"
XSD = "http://www.w3.org/2001/XMLSchema#"
SH = "http://www.w3.org/ns/shacl#"

RDF_TYPE = RDF + "type"
RDF_FIRST = RDF + "first"
RDF_REST = RDF + "rest"
RDF_NIL = RDF + "nil"
RDF_LANGSTRING = RDF + "langString"
XSD_STRING = XSD + "string"
XSD_INTEGER = XSD + "integer"

_ABSOLUTE_IRI = re.compile(r"^[A-Za-z][A-Za-z0-9+.\-]*:")


class RDFError(Exception):
    """Base class for errors raised by the RDF layer."""


class TurtleSyntaxError(RDFError):
    def __init__(self, message: str, line: int, column: int, token: str | None = None):
        self.line = line
        self.column = column
        self.token = token
        where = f"line {line}, column {column}"
        if token is not None:
            where += f", near {token!r}"
        super().__init__(f"{message} ({where})")


class ListStructureError(RDFError):
    """An RDF collection is missing links, branches, or loops."""

    def __init__(self, message: str, node: "Term"):
        self.node = node
        super().__init__(f"{message}: {node}")


# ---------------------------------------------------------------------------
# Terms
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class Iri:
    value: str

    def __post_init__(self):
        if not _ABSOLUTE_IRI.match(self.value):
            raise ValueError(f"IRI is not absolute: {self.value!r}")

    def __str__(self) -> str:
        return f"<{self.value}>"


@dataclass(frozen=True, slots=True)
class BlankNode:
    label: str

    def __str__(self) -> str:
        return f"_:{self.label}"


@dataclass(frozen=True, slots=True)
class Literal:
    lexical: str
    datatype: str = XSD_STRING
    language: str | None = None

    def __post_init__(self):
        if self.language is not None:
            if self.datatype not in (XSD_STRING, RDF_LANGSTRING):
                raise ValueError("a literal cannot carry both a datatype and a language tag")
            object.__setattr__(self, "language", self.language.lower())
            object.__setattr__(self, "datatype", RDF_LANGSTRING)

    def __str__(self) -> str:
        text = '"' + _escape_string(self.lexical) + '"'
        if self.language:
            return f"{text}@{self.language}"
        if self.datatype != XSD_STRING:
            return f"{text}^^<{self.datatype}>"
        return text


Term = Union[Iri, BlankNode, Literal]


def term_key(term: Term) -> tuple:
    """Total order over terms: IRIs, then blank nodes, then literals."""
    if isinstance(term, Iri):
        return (0, term.value, "", "")
    if isinstance(term, BlankNode):
        return (1, term.label, "", "")
    return (2, term.lexical, term.datatype, term.language or "")


@dataclass(frozen=True, slots=True)
class Triple:
    subject: Term
    predicate: Iri
    object: Term

    def __post_init__(self):
        if not isinstance(self.predicate, Iri):
            raise TypeError(f"predicate must be an IRI, got {self.predicate!r}")
        if isinstance(self.subject, Literal):
            raise TypeError("subject cannot be a literal")

    def __iter__(self):
        return iter((self.subject, self.predicate, self.object))

    def sort_key(self) -> tuple:
        return (term_key(self.subject), term_key(self.predicate), term_key(self.object))


# ---------------------------------------------------------------------------
# Graph
# ---------------------------------------------------------------------------


class Graph:
    """An immutable set of triples plus a prefix map.

    Indexed by subject, (subject, predicate) and (predicate, object).
    """

    __slots__ = ("_triples", "_prefixes", "_spo", "_pos")

    def __init__(self, triples: Iterable[Triple] = (), prefixes: Mapping[str, str] | None = None):
        self._triples = frozenset(triples)
        self._prefixes = dict(prefixes or {})
        spo: dict[Term, dict[Iri, set[Term]]] = {}
        pos: dict[Iri, dict[Term, set[Term]]] = {}
        for t in self._triples:
            spo.setdefault(t.subject, {}).setdefault(t.predicate, set()).add(t.object)
            pos.setdefault(t.predicate, {}).setdefault(t.object, set()).add(t.subject)
        self._spo = spo
        self._pos = pos

    @property
    def prefixes(self) -> dict[str, str]:
        return dict(self._prefixes)

    def __len__(self) -> int:
        return len(self._triples)

    def __iter__(self) -> Iterator[Triple]:
        return iter(sorted(self._triples, key=Triple.sort_key))

    def __contains__(self, triple: object) -> bool:
        return triple in self._triples

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self._triples == other._triples

    def __hash__(self) -> int:
        return hash(self._triples)

    def __repr__(self) -> str:
        return f"<Graph {len(self)} triples>"

    @property
    def triple_set(self) -> frozenset[Triple]:
        return self._triples

    def triples(self, subject: Term | None = None, predicate: Iri | None = None,
                obj: Term | None = None) -> list[Triple]:
        """Matching triples in term order; ``None`` is a wildcard."""
        if subject is not None:
            by_pred = self._spo.get(subject, {})
            preds = [predicate] if predicate is not None else list(by_pred)
            found = [Triple(subject, p, o) for p in preds for o in by_pred.get(p, ())
                     if obj is None or o == obj]
        elif predicate is not None:
            by_obj = self._pos.get(predicate, {})
            objs = [obj] if obj is not None else list(by_obj)
            found = [Triple(s, predicate, o) for o in objs for s in by_obj.get(o, ())]
        else:
            found = [t for t in self._triples if obj is None or t.object == obj]
        return sorted(found, key=Triple.sort_key)

    def objects(self, subject: Term, predicate: Iri) -> list[Term]:
        return sorted(self._spo.get(subject, {}).get(predicate, ()), key=term_key)

    def subjects(self, predicate: Iri, obj: Term | None = None) -> list[Term]:
        by_obj = self._pos.get(predicate, {})
        if obj is None:
            found = {s for subs in by_obj.values() for s in subs}
        else:
            found = by_obj.get(obj, set())
        return sorted(found, key=term_key)

    def predicates(self, subject: Term) -> list[Iri]:
        return sorted(self._spo.get(subject, {}), key=term_key)

    def all_subjects(self) -> list[Term]:
        return sorted(self._spo, key=term_key)

    def value(self, subject: Term, predicate: Iri) -> Term | None:
        objs = self._spo.get(subject, {}).get(predicate)
        if not objs:
            return None
        return min(objs, key=term_key)

    def union(self, other: "Graph") -> "Graph":
        prefixes = dict(self._prefixes)
        for k, v in other._prefixes.items():
            prefixes.setdefault(k, v)
        return Graph(self._triples | other._triples, prefixes)

    def with_triples(self, triples: Iterable[Triple]) -> "Graph":
        return Graph(self._triples | frozenset(triples), self._prefixes)

    def without(self, triples: Iterable[Triple]) -> "Graph":
        return Graph(self._triples - frozenset(triples), self._prefixes)


def objects(graph: Graph, subject: Term, predicate: Iri) -> list[Term]:
    return graph.objects(subject, predicate)


def read_list(graph: Graph, head: Term) -> list[Term]:
    """Members of the RDF collection starting at ``head``, in order."""
    items: list[Term] = []
    seen: set[Term] = set()
    node = head
    nil = Iri(RDF_NIL)
    first, rest = Iri(RDF_FIRST), Iri(RDF_REST)
    while node != nil:
        if node in seen:
            raise ListStructureError("cycle in RDF list", node)
        seen.add(node)
        firsts = graph.objects(node, first)
        rests = graph.objects(node, rest)
        if len(firsts) != 1:
            raise ListStructureError(f"list node has {len(firsts)} rdf:first values", node)
        if len(rests) != 1:
            raise ListStructureError(f"list node has {len(rests)} rdf:rest values", node)
        items.append(firsts[0])
        node = rests[0]
    return items


# ---------------------------------------------------------------------------
# Turtle tokenizer and parser
# ---------------------------------------------------------------------------

_PN_CHARS_BASE = "A-Za-z\u00c0-\u00d6\u00d8-\u00f6\u00f8-\u02ff\u0370-\u037d\u037f-\u1fff\u200c-\u200d\u2070-\u218f\u2c00-\u2fef\u3001-\ud7ff\uf900-\ufdcf\ufdf0-\ufffd"
_PN_CHARS = _PN_CHARS_BASE + "_0-9\\-\u00b7\u0300-\u036f\u203f-\u2040"
_PN_PREFIX = f"[{_PN_CHARS_BASE}](?:[{_PN_CHARS}.]*[{_PN_CHARS}])?"
_PN_LOCAL = f"[{_PN_CHARS}:%](?:[{_PN_CHARS}.:%]*[{_PN_CHARS}:%])?"

_TOKEN_SPEC = [
    ("WS", r"[ \t\r\n]+"),
    ("COMMENT", r"#[^\r\n]*"),
    ("IRIREF", r"<[^<>\"{}|^`\\\x00-\x20]*>"),
    ("STRING_LONG", r'"""(?:[^"\\]|\\.|"(?!""))*"""' + r"|'''(?:[^'\\]|\\.|'(?!''))*'''"),
    ("STRING", r'"(?:[^"\\\n\r]|\\.)*"' + r"|'(?:[^'\\\n\r]|\\.)*'"),
    ("DIRECTIVE", r"@(?:prefix|base)\b"),
    ("LANGTAG", r"@[A-Za-z]+(?:-[A-Za-z0-9]+)*"),
    ("DTMARK", r"\^\^"),
    ("BNODE", r"_:[" + _PN_CHARS_BASE + r"_0-9](?:[" + _PN_CHARS + r".]*[" + _PN_CHARS + r"])?"),
    ("PNAME", f"(?:{_PN_PREFIX})?:(?:{_PN_LOCAL})?"),
    ("NUMBER", r"[+-]?(?:\d*\.\d+|\d+)(?:[eE][+-]?\d+)?"),
    ("WORD", r"[A-Za-z_][A-Za-z0-9_]*"),
    ("PUNCT", r"[.;,\[\]()]"),
    ("ANON_WS", r"."),
]
_TOKEN_RE = re.compile("|".join(f"(?P<{name}>{pattern})" for name, pattern in _TOKEN_SPEC), re.S)

_ESCAPES = {"t": "\t", "b": "\b", "n": "\n", "r": "\r", "f": "\f", '"': '"', "'": "'", "\\": "\\"}
_ESCAPE_RE = re.compile(r"\\(u[0-9A-Fa-f]{4}|U[0-9A-Fa-f]{8}|.)", re.S)


def _unescape(text: str) -> str:
    def repl(m: re.Match) -> str:
        code = m.group(1)
        if code[0] in "uU" and len(code) > 1:
            return chr(int(code[1:], 16))
        if code in _ESCAPES:
            return _ESCAPES[code]
        raise ValueError(f"invalid escape \\{code}")

    return _ESCAPE_RE.sub(repl, text)


@dataclass(slots=True)
class _Token:
    kind: str
    text: str
    pos: int


class _TurtleParser:
    def __init__(self, text: str):
        self.text = text
        self.line_starts = [0] + [m.end() for m in re.finditer(r"\n", text)]
        self.tokens = self._tokenize(text)
        self.i = 0
        self.prefixes: dict[str, str] = {}
        self.triples: list[Triple] = []
        self.bnode_labels: dict[str, BlankNode] = {}
        self.counter = 0

    # -- helpers ----------------------------------------------------------

    def _where(self, pos: int) -> tuple[int, int]:
        line = bisect.bisect_right(self.line_starts, pos)
        return line, pos - self.line_starts[line - 1] + 1

    def error(self, message: str, token: _Token | None = None) -> TurtleSyntaxError:
        if token is None:
            token = self.peek()
        if token is None:
            line, col = self._where(len(self.text))
            return TurtleSyntaxError(message, line, col, "<end of input>")
        line, col = self._where(token.pos)
        return TurtleSyntaxError(message, line, col, token.text)

    def _tokenize(self, text: str) -> list[_Token]:
        tokens = []
        for m in _TOKEN_RE.finditer(text):
            kind = m.lastgroup
            if kind in ("WS", "COMMENT"):
                continue
            tok = _Token(kind, m.group(), m.start())
            if kind == "ANON_WS":
                self.tokens = tokens
                raise self.error("unexpected character", tok)
            tokens.append(tok)
        return tokens

    def peek(self) -> _Token | None:
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def next(self) -> _Token:
        tok = self.peek()
        if tok is None:
            raise self.error("unexpected end of input")
        self.i += 1
        return tok

    def expect(self, text: str) -> _Token:
        tok = self.next()
        if tok.text != text:
            raise self.error(f"expected {text!r}", tok)
        return tok

    def at(self, text: str) -> bool:
        tok = self.peek()
        return tok is not None and tok.kind == "PUNCT" and tok.text == text

    def fresh(self) -> BlankNode:
        node = BlankNode(f"g{self.counter}")
        self.counter += 1
        return node

    def emit(self, s: Term, p: Iri, o: Term) -> None:
        self.triples.append(Triple(s, p, o))

    # -- grammar ----------------------------------------------------------

    def parse(self) -> Graph:
        while self.peek() is not None:
            self.statement()
        return Graph(self.triples, self.prefixes)

    def statement(self) -> None:
        tok = self.peek()
        if tok.kind == "DIRECTIVE":
            self.directive()
            return
        if tok.kind == "WORD" and tok.text.upper() in ("PREFIX", "BASE"):
            raise self.error("SPARQL-style directives are not supported", tok)
        if self.at("["):
            subject = self.blank_node_property_list()
            if not self.at("."):
                self.predicate_object_list(subject)
        else:
            subject = self.subject()
            self.predicate_object_list(subject)
        self.expect(".")

    def directive(self) -> None:
        tok = self.next()
        if tok.text == "@base":
            raise self.error("@base is not supported", tok)
        name = self.next()
        if name.kind != "PNAME" or not name.text.endswith(":") or name.text.count(":") != 1:
            raise self.error("expected a prefix label ending in ':'", name)
        iri = self.next()
        if iri.kind != "IRIREF":
            raise self.error("expected an IRI for the prefix", iri)
        value = self._iri_value(iri)
        self.prefixes[name.text[:-1]] = value
        self.expect(".")

    def _iri_value(self, tok: _Token) -> str:
        value = _unescape(tok.text[1:-1])
        if not _ABSOLUTE_IRI.match(value):
            raise self.error("relative IRIs are not supported", tok)
        return value

    def iri(self, tok: _Token) -> Iri:
        if tok.kind == "IRIREF":
            return Iri(self._iri_value(tok))
        if tok.kind == "PNAME":
            prefix, _, local = tok.text.partition(":")
            if prefix not in self.prefixes:
                raise self.error(f"unknown prefix {prefix!r}", tok)
            if "\\" in local:
                raise self.error("escaped local names are not supported", tok)
            return Iri(self.prefixes[prefix] + local)
        if tok.kind == "WORD" and tok.text == "a":
            return Iri(RDF_TYPE)
        raise self.error("expected an IRI", tok)

    def bnode(self, tok: _Token) -> BlankNode:
        label = tok.text[2:]
        if label not in self.bnode_labels:
            self.bnode_labels[label] = self.fresh()
        return self.bnode_labels[label]

    def subject(self) -> Term:
        tok = self.peek()
        if tok is not None and tok.kind == "PUNCT" and tok.text == "(":
            return self.collection()
        tok = self.next()
        if tok.kind == "BNODE":
            return self.bnode(tok)
        if tok.kind in ("IRIREF", "PNAME"):
            return self.iri(tok)
        raise self.error("expected a subject", tok)

    def predicate_object_list(self, subject: Term) -> None:
        while True:
            tok = self.next()
            if tok.kind not in ("IRIREF", "PNAME") and not (tok.kind == "WORD" and tok.text == "a"):
                raise self.error("expected a predicate", tok)
            predicate = self.iri(tok)
            self.object_list(subject, predicate)
            if not self.at(";"):
                return
            while self.at(";"):
                self.next()
            tok = self.peek()
            if tok is None or (tok.kind == "PUNCT" and tok.text in ".]"):
                return

    def object_list(self, subject: Term, predicate: Iri) -> None:
        self.emit(subject, predicate, self.object())
        while self.at(","):
            self.next()
            self.emit(subject, predicate, self.object())

    def object(self) -> Term:
        tok = self.peek()
        if tok is None:
            raise self.error("expected an object")
        if tok.kind == "PUNCT":
            if tok.text == "[":
                return self.blank_node_property_list()
            if tok.text == "(":
                return self.collection()
            raise self.error("expected an object", tok)
        tok = self.next()
        if tok.kind in ("IRIREF", "PNAME"):
            return self.iri(tok)
        if tok.kind == "BNODE":
            return self.bnode(tok)
        if tok.kind in ("STRING", "STRING_LONG"):
            return self.literal(tok)
        if tok.kind == "NUMBER":
            if not re.fullmatch(r"[+-]?\d+", tok.text):
                raise self.error("only integer numeric literals are supported", tok)
            return Literal(tok.text, XSD_INTEGER)
        if tok.kind == "WORD" and tok.text in ("true", "false"):
            raise self.error("boolean shorthand literals are not supported", tok)
        raise self.error("expected an object", tok)

    def literal(self, tok: _Token) -> Literal:
        quote = 3 if tok.kind == "STRING_LONG" else 1
        try:
            lexical = _unescape(tok.text[quote:-quote])
        except ValueError as exc:
            raise self.error(str(exc), tok) from None
        nxt = self.peek()
        if nxt is not None and nxt.kind == "LANGTAG":
            self.next()
            after = self.peek()
            if after is not None and after.kind == "DTMARK":
                raise self.error("a literal cannot carry both a language tag and a datatype", after)
            return Literal(lexical, RDF_LANGSTRING, nxt.text[1:])
        if nxt is not None and nxt.kind == "DTMARK":
            self.next()
            dt_tok = self.next()
            datatype = self.iri(dt_tok)
            after = self.peek()
            if after is not None and after.kind == "LANGTAG":
                raise self.error("a literal cannot carry both a datatype and a language tag", after)
            return Literal(lexical, datatype.value)
        return Literal(lexical)

    def blank_node_property_list(self) -> BlankNode:
        self.expect("[")
        node = self.fresh()
        if self.at("]"):
            self.next()
            return node
        self.predicate_object_list(node)
        self.expect("]")
        return node

    def collection(self) -> Term:
        self.expect("(")
        items = []
        while not self.at(")"):
            if self.peek() is None:
                raise self.error("unterminated collection")
            items.append(self.object())
        self.next()
        if not items:
            return Iri(RDF_NIL)
        nodes = [self.fresh() for _ in items]
        for k, (node, item) in enumerate(zip(nodes, items)):
            self.emit(node, Iri(RDF_FIRST), item)
            self.emit(node, Iri(RDF_REST), nodes[k + 1] if k + 1 < len(nodes) else Iri(RDF_NIL))
        return nodes[0]


def parse_turtle(text: str) -> Graph:
    """Parse a Turtle-subset (or N-Triples) document into a Graph.

    Blank nodes are relabelled ``g0, g1, ...`` in order of first appearance.
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    return _TurtleParser(text).parse()


def parse_file(path) -> Graph:
    with open(path, encoding="utf-8") as fh:
        return parse_turtle(fh.read())


# ---------------------------------------------------------------------------
# Serializer
# ---------------------------------------------------------------------------

_SIMPLE_LOCAL = re.compile(r"^[A-Za-z_][A-Za-z0-9_\-]*$")
_INTEGER_LEX = re.compile(r"^[+-]?\d+$")
_INDENT = "    "


def _escape_string(text: str) -> str:
    return (text.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n")
            .replace("\r", "\\r").replace("\t", "\\t"))


class _Writer:
    def __init__(self, graph: Graph):
        self.g = graph
        # longest namespace first; ties broken by label
        self.ns = sorted(graph.prefixes.items(), key=lambda kv: (-len(kv[1]), kv[0]))
        self.refcount: Counter = Counter(t.object for t in graph.triple_set
                                         if isinstance(t.object, BlankNode))
        self.cyclic = self._cyclic_bnodes()

    def _cyclic_bnodes(self) -> set[BlankNode]:
        cyclic: set[BlankNode] = set()
        for start in {t.subject for t in self.g.triple_set if isinstance(t.subject, BlankNode)}:
            stack = [o for o in self._bnode_children(start)]
            seen = set()
            while stack:
                node = stack.pop()
                if node == start:
                    cyclic.add(start)
                    break
                if node in seen:
                    continue
                seen.add(node)
                stack.extend(self._bnode_children(node))
        return cyclic

    def _bnode_children(self, node: Term) -> list[BlankNode]:
        return [t.object for t in self.g.triples(node) if isinstance(t.object, BlankNode)]

    def inlinable(self, node: Term) -> bool:
        return (isinstance(node, BlankNode) and self.refcount[node] == 1
                and node not in self.cyclic)

    def list_members(self, node: BlankNode) -> list[Term] | None:
        """Members if ``node`` heads a well-formed, inlinable collection."""
        members = []
        first, rest, nil = Iri(RDF_FIRST), Iri(RDF_REST), Iri(RDF_NIL)
        cur: Term = node
        while cur != nil:
            if not self.inlinable(cur):
                return None
            if set(self.g.predicates(cur)) != {first, rest}:
                return None
            f, r = self.g.objects(cur, first), self.g.objects(cur, rest)
            if len(f) != 1 or len(r) != 1:
                return None
            members.append(f[0])
            cur = r[0]
        return members

    def iri(self, value: str) -> str:
        if value == RDF_TYPE:
            return "a"
        return self.name(value)

    def name(self, value: str) -> str:
        for label, ns in self.ns:
            if value.startswith(ns) and _SIMPLE_LOCAL.match(value[len(ns):]):
                return f"{label}:{value[len(ns):]}"
        return f"<{value}>"

    def literal(self, lit: Literal) -> str:
        text = '"' + _escape_string(lit.lexical) + '"'
        if lit.language:
            return f"{text}@{lit.language}"
        if lit.datatype == XSD_INTEGER and _INTEGER_LEX.match(lit.lexical):
            return lit.lexical
        if lit.datatype != XSD_STRING:
            return f"{text}^^{self.name(lit.datatype)}"
        return text

    def term(self, term: Term, depth: int, compact: bool = False) -> str:
        if isinstance(term, Iri):
            return self.name(term.value)
        if isinstance(term, Literal):
            return self.literal(term)
        if self.inlinable(term):
            members = self.list_members(term)
            if members is not None:
                return "( " + " ".join(self.term(m, depth + 1, compact=True) for m in members) + " )"
            preds = self.predicate_lines(term, depth + 1)
            if not preds:
                return "[]"
            one_line = "[ " + " ; ".join(preds) + " ]"
            if compact and "\n" not in one_line and len(one_line) <= 72:
                return one_line
            pad = _INDENT * (depth + 1)
            return "[\n" + pad + (" ;\n" + pad).join(preds) + "\n" + _INDENT * depth + "]"
        return f"_:{term.label}"

    def predicate_lines(self, subject: Term, depth: int) -> list[str]:
        preds = self.g.predicates(subject)
        preds.sort(key=lambda p: (p.value != RDF_TYPE, p.value))
        lines = []
        for p in preds:
            # inline blank nodes are ordered by content, so output does not depend on labels
            rendered = []
            for o in self.g.objects(subject, p):
                text = self.term(o, depth)
                key = (1, "", text, "") if self.inlinable(o) else term_key(o)
                rendered.append((key, text))
            rendered.sort()
            lines.append(f"{self.iri(p.value)} {', '.join(text for _, text in rendered)}")
        return lines

    def write(self) -> str:
        out = [f"@prefix {label}: <{ns}> ." for label, ns in sorted(self.g.prefixes.items())]
        subjects = [s for s in self.g.all_subjects() if not self.inlinable(s)]
        blocks = []
        for s in subjects:
            head = self.term(s, 0) if not isinstance(s, BlankNode) else f"_:{s.label}"
            lines = self.predicate_lines(s, 1)
            blocks.append(head + " " + (" ;\n" + _INDENT).join(lines) + " .")
        parts = []
        if out:
            parts.append("\n".join(out) + "\n")
        if blocks:
            parts.append("\n\n".join(blocks) + "\n")
        return "\n".join(parts)


def serialize_turtle(graph: Graph) -> str:
    """Deterministic Turtle for ``graph``.

    Blank nodes referenced exactly once (and not on a blank-node cycle) are
    written inline; well-formed ``rdf:first``/``rdf:rest`` chains become
    collections. Everything else keeps its label.
    """
    return _Writer(graph).write()


# ---------------------------------------------------------------------------
# Isomorphism for tree-shaped blank-node structures
# ---------------------------------------------------------------------------


def _signatures(graph: Graph) -> dict[BlankNode, tuple]:
    sigs: dict[BlankNode, tuple] = {}
    active: set[BlankNode] = set()

    def sig(node: BlankNode) -> tuple:
        if node in sigs:
            return sigs[node]
        if node in active:
            raise RDFError(f"blank node {node} lies on a cycle; isomorphism check needs trees")
        active.add(node)
        parts = []
        for t in graph.triples(node):
            o = t.object
            parts.append((t.predicate.value, ("B", sig(o)) if isinstance(o, BlankNode) else term_key(o)))
        active.discard(node)
        sigs[node] = tuple(sorted(parts))
        return sigs[node]

    for t in graph.triple_set:
        for n in (t.subject, t.object):
            if isinstance(n, BlankNode):
                sig(n)
    return sigs


def canonical_triples(graph: Graph) -> Counter:
    """Multiset of triples with each blank node replaced by its subtree signature."""
    sigs = _signatures(graph)

    def canon(term: Term):
        return ("B", sigs[term]) if isinstance(term, BlankNode) else term_key(term)

    return Counter((canon(t.subject), t.predicate.value, canon(t.object)) for t in graph.triple_set)


def isomorphic(a: Graph, b: Graph) -> bool:
    """Graph isomorphism, valid when blank nodes form trees."""
    if len(a) != len(b):
        return False
    return canonical_triples(a) == canonical_triples(b)
