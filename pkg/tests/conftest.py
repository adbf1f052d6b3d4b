from __future__ import annotations

import pytest

from domspec import bundled_vocabulary, fixture_extension, fixture_path
from domspec.engine import apply
from domspec.operators import operator_roots, parse_operator
from domspec.rdf import parse_file


@pytest.fixture(scope="session")
def vocab():
    return bundled_vocabulary()


@pytest.fixture(scope="session")
def excerpt():
    return bundled_vocabulary(excerpt=True)


@pytest.fixture(scope="session")
def ext():
    return fixture_extension()


def load_operator(name: str, vocab, exts=()):
    g = parse_file(fixture_path(name))
    return parse_operator(g, operator_roots(g)[0], vocab, exts)


@pytest.fixture(scope="session")
def hotel_ops(vocab, ext):
    names = ["hotel-sds", "hotel-rds", "hotel-eds", "hotel-rds-or", "hotel-rds-named"]
    return {n: load_operator(n + ".ttl", vocab, [ext]) for n in names}


@pytest.fixture(scope="session")
def hotel_patterns(vocab, ext, hotel_ops):
    return {n: apply(op, vocab, [ext]) for n, op in hotel_ops.items()}


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import ACCEPTANCE_LINES  # noqa: PLC0415

    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
