import sys

import pytest

from plumb.cli import corpus, load_corpus_graph
from plumb.graph import parse_graph

RATIONAL = ["a1", "a2", "a5", "d4", "e8"]


@pytest.fixture(scope="session")
def graphs():
    return {name[:-6]: load_corpus_graph(name) for name in corpus()}


@pytest.fixture(scope="session")
def a1(graphs):
    return graphs["a1"]


@pytest.fixture(scope="session")
def a2(graphs):
    return graphs["a2"]


@pytest.fixture(scope="session")
def g237(graphs):
    return graphs["g237"]


@pytest.fixture(scope="session")
def path3():
    return parse_graph("vertex 1 -2\nvertex 2 -2\nvertex 3 -2\nedge 1 2\nedge 2 3", "P3")


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.line(n))
