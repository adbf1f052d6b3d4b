"""Domain specification for schema.org: operators, patterns, validation and docs."""

from __future__ import annotations

from functools import lru_cache
from importlib import resources
from pathlib import Path

from .engine import Pattern, apply, brute_force_oracle, check_downward_compatibility, flat_sets
from .operators import (Diagnostic, Kind, Operator, OperatorError, check_document, check_well_formed,
                        classify_kind, operator_roots, parse_operator, serialize_operator)
from .rdf import Graph, isomorphic, parse_file, parse_turtle, serialize_turtle
from .validation import ValidationReport, report_to_graph, validate
from .vocab import ExternalVocabulary, Universe, Vocabulary, load_external, load_vocabulary

__version__ = "0.1.0"

RELEASE_FILE = "schemaorg-3.5.ttl"
EXCERPT_FILE = "schemaorg-3.5-excerpt.ttl"
EXT_NAMESPACE = "http://example.org/n/"


def data_path(*parts: str) -> Path:
    """Path of a file shipped in the package's data directory."""
    return Path(str(resources.files("domspec").joinpath("data", *parts)))


def fixture_path(name: str) -> Path:
    return data_path("fixtures", name)


@lru_cache(maxsize=None)
def bundled_vocabulary(excerpt: bool = False) -> Vocabulary:
    """The bundled schema.org v3.5 release (or its desk-scale excerpt)."""
    return load_vocabulary(parse_file(data_path(EXCERPT_FILE if excerpt else RELEASE_FILE)))


@lru_cache(maxsize=None)
def fixture_extension() -> ExternalVocabulary:
    """The small n: extension used by the Hotel fixtures."""
    return load_external(parse_file(fixture_path("ext-n.ttl")), EXT_NAMESPACE)


__all__ = [
    "Diagnostic", "ExternalVocabulary", "Graph", "Kind", "Operator", "OperatorError", "Pattern", "Universe",
    "ValidationReport", "Vocabulary", "apply", "brute_force_oracle", "bundled_vocabulary",
    "check_document", "check_downward_compatibility", "check_well_formed", "classify_kind", "data_path",
    "fixture_extension", "fixture_path", "flat_sets", "isomorphic", "load_external", "load_vocabulary",
    "operator_roots", "parse_file", "parse_operator", "parse_turtle", "report_to_graph",
    "serialize_operator", "serialize_turtle", "validate",
]
