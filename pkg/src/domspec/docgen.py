"""Documentation for patterns: Markdown pages, JSON and SHACL.

Each node of the restriction tree becomes one page. Nested pages are titled
``<Parent>.<property>``; restricted range types link to them, and all other
types link to their schema.org description (or their IRI when external).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .engine import (AlternativesRange, ConjunctionRange, Pattern, PatternNode, RangeSpec, RestrictedRange,
                     SimpleRange, flat_sets, pattern_operator)
from .operators import serialize_operator
from .rdf import Graph, Iri
from .vocab import SCHEMA, local_name

SCHEMA_SITE = "https://schema.org/"


@dataclass(frozen=True)
class Row:
    type: str
    property: str
    required: bool
    range: str
    links: tuple[str, ...]


@dataclass(frozen=True)
class DocPage:
    title: str
    type: str
    description: str
    rows: tuple[Row, ...]
    nested_pages: tuple["DocPage", ...]

    @property
    def anchor(self) -> str:
        return self.title

    def walk(self):
        yield self
        for p in self.nested_pages:
            yield from p.walk()


def term_link(iri: str) -> str:
    if iri.startswith(SCHEMA):
        return SCHEMA_SITE + iri[len(SCHEMA):]
    return iri


def _md_link(iri: str) -> str:
    return f"[{local_name(iri)}]({term_link(iri)})"


class _PageBuilder:
    def build(self, node: PatternNode, title: str, description: str) -> DocPage:
        rows: list[Row] = []
        nested: list[DocPage] = []
        for e in node.entries:
            counter = [0]
            text, links = self.range_text(e.range, title, e.path, nested, counter)
            rows.append(Row(node.type, e.path, e.required, text, tuple(links)))
        return DocPage(title, node.type, description, tuple(rows), tuple(nested))

    def range_text(self, spec: RangeSpec, title: str, path: str, nested: list[DocPage],
                   counter: list[int]) -> tuple[str, list[str]]:
        if isinstance(spec, SimpleRange):
            return _md_link(spec.type), [term_link(spec.type)]
        if isinstance(spec, ConjunctionRange):
            members = sorted(spec.members, key=local_name)
            text = " + ".join(_md_link(m) for m in members)
            links = [term_link(m) for m in members]
            if spec.alias:
                text += f" (as {_md_link(spec.alias)})"
                links.append(term_link(spec.alias))
            return text, links
        if isinstance(spec, RestrictedRange):
            counter[0] += 1
            child_title = f"{title}.{local_name(path)}" + (f"~{counter[0]}" if counter[0] > 1 else "")
            desc = f"Values of {local_name(path)} on {title}: a {_md_link(spec.type)} restricted to the properties below."
            if spec.alias:
                desc += f" Named {_md_link(spec.alias)} in its external vocabulary."
            nested.append(self.build(spec.fragment, child_title, desc))
            label = local_name(spec.alias or spec.type)
            return f"[{label}](#{child_title})", ["#" + child_title]
        assert isinstance(spec, AlternativesRange)
        parts, links = [], []
        for b in spec.branches:
            t, ls = self.range_text(b, title, path, nested, counter)
            parts.append(t)
            links.extend(ls)
        return " or ".join(parts), links


def build_pages(pattern: Pattern) -> DocPage:
    title = local_name(pattern.target)
    op = pattern.operator
    source = f" defined by `{op.id.value}`" if isinstance(op.id, Iri) else ""
    desc = f"{pattern.kind.value} for {_md_link(pattern.target)}{source}."
    return _PageBuilder().build(pattern.tree, title, desc)


def _render_page(page: DocPage, level: int) -> list[str]:
    out = [f'<a id="{page.anchor}"></a>', "", "#" * level + f" {page.title}", "", page.description, ""]
    for heading, flag in (("Mandatory", True), ("Recommended", False)):
        rows = [r for r in page.rows if r.required is flag]
        if not rows:
            continue
        out += ["#" * (level + 1) + f" {heading}", "", "| Property | Range |", "| --- | --- |"]
        out += [f"| {_md_link(r.property)} | {r.range} |" for r in rows]
        out.append("")
    for child in page.nested_pages:
        out += _render_page(child, level + 1)
    return out


def render_markdown(pattern: Pattern) -> str:
    """Deterministic Markdown documentation for ``pattern``."""
    lines = _render_page(build_pages(pattern), 1)
    while lines and lines[-1] == "":
        lines.pop()
    return "\n".join(lines) + "\n"


def _range_json(spec: RangeSpec, titles: dict[int, str]) -> dict:
    if isinstance(spec, SimpleRange):
        return {"kind": "simple", "type": spec.type, "datatype": spec.datatype}
    if isinstance(spec, ConjunctionRange):
        return {"kind": "conjunction", "members": sorted(spec.members), "alias": spec.alias}
    if isinstance(spec, RestrictedRange):
        return {"kind": "restricted", "type": spec.type, "alias": spec.alias,
                "fragment": titles[id(spec.fragment)]}
    return {"kind": "alternatives", "branches": [_range_json(b, titles) for b in spec.branches]}


def _node_titles(pattern: Pattern) -> dict[int, str]:
    titles: dict[int, str] = {}

    def visit(node: PatternNode, title: str) -> None:
        titles[id(node)] = title
        for e in node.entries:
            count = 0
            stack = [e.range]
            frags = []
            while stack:
                spec = stack.pop(0)
                if isinstance(spec, RestrictedRange):
                    frags.append(spec.fragment)
                elif isinstance(spec, AlternativesRange):
                    stack = list(spec.branches) + stack
            for frag in frags:
                count += 1
                visit(frag, f"{title}.{local_name(e.path)}" + (f"~{count}" if count > 1 else ""))

    visit(pattern.tree, local_name(pattern.target))
    return titles


def render_json(pattern: Pattern) -> str:
    """Machine-readable pattern.

    Top-level fields, in order: kind, target, operator, types, properties,
    local_properties, local_ranges, tree, nested, notes, metadata. ``tree``
    is the root node; ``nested`` lists every nested node in depth-first
    order. A node is ``{"title", "type", "minted", "properties"}`` and each
    property is ``{"path", "required", "range"}``.
    """
    titles = _node_titles(pattern)
    types, props, pairs, ranges = flat_sets(pattern)

    def node_json(node: PatternNode) -> dict:
        return {"title": titles[id(node)], "type": node.type, "minted": node.minted,
                "properties": [{"path": e.path, "required": e.required, "range": _range_json(e.range, titles)}
                               for e in node.entries]}

    nested = []

    def collect(node: PatternNode) -> None:
        for e in node.entries:
            stack = [e.range]
            while stack:
                spec = stack.pop(0)
                if isinstance(spec, RestrictedRange):
                    nested.append(node_json(spec.fragment))
                    collect(spec.fragment)
                elif isinstance(spec, AlternativesRange):
                    stack = list(spec.branches) + stack

    collect(pattern.tree)
    op = pattern.operator
    doc = {
        "kind": pattern.kind.value,
        "target": pattern.target,
        "operator": op.id.value if isinstance(op.id, Iri) else None,
        "types": list(types),
        "properties": list(props),
        "local_properties": [list(p) for p in pairs],
        "local_ranges": [[t, p, r] for (t, p), r in ranges],
        "tree": node_json(pattern.tree),
        "nested": nested,
        "notes": [{"severity": n.severity.value, "node": n.node, "code": n.production, "message": n.message}
                  for n in pattern.notes],
        "metadata": dict(sorted(pattern.metadata.items())),
    }
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def render_shacl(pattern: Pattern) -> Graph:
    """The SHACL shape graph equivalent to the pattern."""
    return serialize_operator(pattern_operator(pattern))
