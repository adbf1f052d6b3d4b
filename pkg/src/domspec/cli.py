"""Command-line interface.

    domspec vocab-info --vocab bundled
    domspec check     --vocab bundled --ext ext.ttl operator.ttl
    domspec apply     --vocab bundled --ext ext.ttl --out build/ --format md operator.ttl
    domspec validate  --vocab bundled --ext ext.ttl operator.ttl data.ttl --report report.ttl
    domspec docgen    --vocab bundled --ext ext.ttl --out docs/ operator.ttl

Exit status: 0 on success, 1 when diagnostics or violations were found,
2 on unreadable input, Turtle syntax errors or bad configuration.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from . import EXCERPT_FILE, RELEASE_FILE, data_path
from .docgen import render_json, render_markdown, render_shacl
from .engine import EngineError, Pattern, apply, flat_sets
from .operators import Kind, OperatorError, check_document, has_errors, operator_roots, parse_operator
from .rdf import RDF_TYPE, RDFError, Graph, Iri, parse_file, serialize_turtle
from .validation import ResultSeverity, report_summary, report_to_graph, validate
from .vocab import (RDF_PROPERTY, RDFS_CLASS, SCHEMA, ExternalVocabulary, Vocabulary, VocabularyError,
                    load_external, load_vocabulary, local_name)

log = logging.getLogger("domspec")

FORMATS = ("md", "json", "ttl")
EXIT_OK, EXIT_FINDINGS, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    """Unreadable or malformed input; maps to exit status 2."""


@dataclass
class Config:
    vocab_path: Path | None = None
    ext_paths: list[Path] = field(default_factory=list)
    closedness_severity: str = "warning"
    output_dir: Path | None = None
    formats: list[str] = field(default_factory=list)
    report_path: Path | None = None

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "Config":
        cfg = cls()
        if args.config:
            try:
                raw = json.loads(Path(args.config).read_text(encoding="utf-8"))
            except (OSError, ValueError) as exc:
                raise InputError(f"cannot read config {args.config}: {exc}") from exc
            unknown = set(raw) - {"vocab", "ext", "closedness", "out", "format", "report"}
            if unknown:
                raise InputError(f"unknown config keys: {', '.join(sorted(unknown))}")
            base = Path(args.config).parent
            cfg.vocab_path = _config_path(base, raw.get("vocab"))
            cfg.ext_paths = [_config_path(base, p) for p in raw.get("ext", [])]
            cfg.closedness_severity = raw.get("closedness", cfg.closedness_severity)
            cfg.output_dir = _config_path(base, raw.get("out"))
            cfg.formats = list(raw.get("format", []))
            cfg.report_path = _config_path(base, raw.get("report"))
        if args.vocab:
            cfg.vocab_path = Path(args.vocab)
        if args.ext:
            cfg.ext_paths = [Path(p) for p in args.ext]
        if args.closedness:
            cfg.closedness_severity = args.closedness
        if args.out:
            cfg.output_dir = Path(args.out)
        if args.format:
            cfg.formats = list(args.format)
        if args.report:
            cfg.report_path = Path(args.report)
        cfg.check()
        return cfg

    def check(self) -> None:
        if self.vocab_path is None:
            raise InputError("--vocab is required (a path, or 'bundled' / 'bundled-excerpt')")
        self.vocab_path = _resolve_vocab(self.vocab_path)
        for p in [self.vocab_path, *self.ext_paths]:
            if not p.is_file():
                raise InputError(f"cannot read {p}: no such file")
        if self.closedness_severity not in ("warning", "violation"):
            raise InputError(f"closedness must be 'warning' or 'violation', not {self.closedness_severity!r}")
        bad = [f for f in self.formats if f not in FORMATS]
        if bad:
            raise InputError(f"unknown format(s): {', '.join(bad)}")


def _config_path(base: Path, value: str | None) -> Path | None:
    if value is None:
        return None
    if value in ("bundled", "bundled-excerpt"):
        return Path(value)
    p = Path(value)
    return p if p.is_absolute() else base / p


def _resolve_vocab(p: Path) -> Path:
    if str(p) == "bundled":
        return data_path(RELEASE_FILE)
    if str(p) == "bundled-excerpt":
        return data_path(EXCERPT_FILE)
    return p


def _read_graph(path: Path) -> Graph:
    try:
        return parse_file(path)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from exc
    except RDFError as exc:
        raise InputError(f"{path}: {exc}") from exc


def infer_namespace(graph: Graph) -> str:
    """Most common namespace of the classes and properties declared in ``graph`` (schema.org excluded)."""
    counts: Counter[str] = Counter()
    for cls in (RDFS_CLASS, RDF_PROPERTY):
        for s in graph.subjects(Iri(RDF_TYPE), Iri(cls)):
            if isinstance(s, Iri) and not s.value.startswith(SCHEMA):
                iri = s.value
                cut = max(iri.rfind("#"), iri.rfind("/"))
                counts[iri[:cut + 1]] += 1
    if not counts:
        raise InputError("external vocabulary declares no classes or properties")
    return sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[0][0]


def _load_vocab(cfg: Config) -> tuple[Vocabulary, list[ExternalVocabulary]]:
    try:
        vocab = load_vocabulary(_read_graph(cfg.vocab_path))
        exts = []
        for p in cfg.ext_paths:
            g = _read_graph(p)
            exts.append(load_external(g, infer_namespace(g), vocab))
    except VocabularyError as exc:
        raise InputError(str(exc)) from exc
    return vocab, exts


def _patterns(cfg: Config, operator_path: Path, vocab: Vocabulary,
              exts: list[ExternalVocabulary]) -> list[Pattern] | None:
    graph = _read_graph(operator_path)
    diags = check_document(graph, vocab, exts)
    for d in diags:
        print(d, file=sys.stderr)
    if has_errors(diags):
        return None
    try:
        return [apply(parse_operator(graph, r, vocab, exts), vocab, exts) for r in operator_roots(graph)]
    except (OperatorError, EngineError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return None


def _file_stems(patterns: Sequence[Pattern]) -> list[str]:
    stems = [p.name for p in patterns]
    dupes = {s for s in stems if stems.count(s) > 1}
    return [f"{p.name}-{p.operator.name}" if p.name in dupes else p.name for p in patterns]


def _write_outputs(cfg: Config, patterns: Sequence[Pattern], default_formats: Sequence[str]) -> list[Path]:
    out = cfg.output_dir or Path(".")
    formats = cfg.formats or list(default_formats)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for pattern, stem in zip(patterns, _file_stems(patterns)):
        for fmt in FORMATS:
            if fmt not in formats:
                continue
            if fmt == "md":
                text = render_markdown(pattern)
            elif fmt == "json":
                text = render_json(pattern)
            else:
                text = serialize_turtle(render_shacl(pattern))
            path = out / f"{stem}.{fmt}"
            path.write_text(text, encoding="utf-8")
            written.append(path)
    return written


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_vocab_info(cfg: Config, args: argparse.Namespace) -> int:
    vocab, exts = _load_vocab(cfg)
    print(f"vocabulary: {cfg.vocab_path}")
    print(f"types: {len(vocab.regular_types())}")
    print(f"datatypes: {len(vocab.datatypes())}")
    print(f"properties: {len(vocab.properties)}")
    print(f"orphans: {len(vocab.orphans())}")
    print(f"undeclared: {len(vocab.opaque_types())}")
    print("counting convention: types are the declared classes of the core file that sit below "
          "schema:Thing; datatypes (below schema:DataType) are counted separately; orphans (neither "
          "below Thing nor DataType) and undeclared types (used in domains or ranges only) are listed "
          "separately and excluded from the type count; properties are all declared rdf:Property terms.")
    for o in vocab.orphans():
        print(f"  orphan: {o}")
    for o in vocab.opaque_types():
        print(f"  undeclared: {o}")
    for ext in exts:
        print(f"external {ext.namespace}: {len(ext.own_types())} types, {len(ext.own_properties())} properties")
    return EXIT_OK


def cmd_check(cfg: Config, args: argparse.Namespace) -> int:
    vocab, exts = _load_vocab(cfg)
    graph = _read_graph(Path(args.operator))
    kind = Kind(args.kind.upper()) if args.kind else None
    diags = check_document(graph, vocab, exts, kind)
    for d in diags:
        print(d)
    if has_errors(diags):
        return EXIT_FINDINGS
    kinds = []
    for r in operator_roots(graph):
        op = parse_operator(graph, r, vocab, exts)
        kinds.append(f"{op.name}: {op.kind.value}")
    print("ok (" + ", ".join(kinds) + ")")
    return EXIT_OK


def cmd_apply(cfg: Config, args: argparse.Namespace) -> int:
    vocab, exts = _load_vocab(cfg)
    patterns = _patterns(cfg, Path(args.operator), vocab, exts)
    if patterns is None:
        return EXIT_FINDINGS
    for p in patterns:
        types, props, pairs, ranges = flat_sets(p)
        print(f"{p.name}: {p.kind.value}, {len(types)} types, {len(props)} properties, "
              f"{len(pairs)} local properties, {len(ranges)} local ranges")
        for (t, prop), r in ranges:
            print(f"  ({local_name(t)}, {local_name(prop)}) -> {local_name(r)}")
        for n in p.notes:
            print(f"  {n}")
    for path in _write_outputs(cfg, patterns, FORMATS):
        print(f"wrote {path}")
    return EXIT_OK


def cmd_docgen(cfg: Config, args: argparse.Namespace) -> int:
    vocab, exts = _load_vocab(cfg)
    patterns = _patterns(cfg, Path(args.operator), vocab, exts)
    if patterns is None:
        return EXIT_FINDINGS
    for path in _write_outputs(cfg, patterns, ("md",)):
        print(f"wrote {path}")
    return EXIT_OK


def cmd_validate(cfg: Config, args: argparse.Namespace) -> int:
    vocab, exts = _load_vocab(cfg)
    patterns = _patterns(cfg, Path(args.operator), vocab, exts)
    if patterns is None:
        return EXIT_FINDINGS
    data = _read_graph(Path(args.data))
    severity = ResultSeverity(cfg.closedness_severity.capitalize())
    conforms = True
    for pattern, stem in zip(patterns, _file_stems(patterns)):
        report = validate(data, pattern, severity)
        conforms &= report.conforms
        print(f"{pattern.name}: " + report_summary(report), end="")
        report_path = cfg.report_path
        if report_path is not None and len(patterns) > 1:
            report_path = report_path.with_name(f"{report_path.stem}-{stem}{report_path.suffix}")
        elif report_path is None and cfg.output_dir is not None:
            report_path = cfg.output_dir / f"{stem}-report.ttl"
        if report_path is not None:
            report_path.parent.mkdir(parents=True, exist_ok=True)
            report_path.write_text(serialize_turtle(report_to_graph(report)), encoding="utf-8")
            print(f"wrote {report_path}")
    return EXIT_OK if conforms else EXIT_FINDINGS


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file; flags override its values")
    common.add_argument("--vocab", help="schema.org release file, or 'bundled' / 'bundled-excerpt'")
    common.add_argument("--ext", action="append", help="external vocabulary file (repeatable)")
    common.add_argument("--out", help="output directory")
    common.add_argument("--format", action="append", choices=FORMATS, help="output format (repeatable)")
    common.add_argument("--closedness", choices=("warning", "violation"),
                        help="severity of properties the pattern does not define (default: warning)")
    common.add_argument("--report", help="where to write the Turtle validation report")
    common.add_argument("-v", "--verbose", action="store_true", help="log vocabulary loading details")

    parser = argparse.ArgumentParser(prog="domspec", description="Domain specifications for schema.org.")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("vocab-info", parents=[common], help="count types and properties of a vocabulary")
    p.set_defaults(func=cmd_vocab_info)
    p = sub.add_parser("check", parents=[common], help="check an operator document against the grammar")
    p.add_argument("operator")
    p.add_argument("--kind", choices=("sds", "rds", "eds"), help="check against this grammar instead")
    p.set_defaults(func=cmd_check)
    p = sub.add_parser("apply", parents=[common], help="apply an operator and write its pattern")
    p.add_argument("operator")
    p.set_defaults(func=cmd_apply)
    p = sub.add_parser("validate", parents=[common], help="validate instance data against a pattern")
    p.add_argument("operator")
    p.add_argument("data")
    p.set_defaults(func=cmd_validate)
    p = sub.add_parser("docgen", parents=[common], help="write pattern documentation")
    p.add_argument("operator")
    p.set_defaults(func=cmd_docgen)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        cfg = Config.from_args(args)
        return args.func(cfg, args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
