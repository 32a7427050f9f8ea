import functools

import pytest

from cayleylab.analysis import prepare
from cayleylab.groups import GroupSpec, build_group
from cayleylab.metric import build_cayley
from cayleylab.zoo import zoo_names, zoo_spec


@functools.lru_cache(maxsize=None)
def zoo_context(name):
    return prepare(GroupSpec.from_dict(zoo_spec(name)))


def make(kind, params, gens, name=""):
    G, S = build_group(GroupSpec.from_dict({"kind": kind, "params": params, "generators": gens, "name": name}))
    return G, S, build_cayley(G, S)


@pytest.fixture
def c12():
    return make("cyclic", {"n": 12}, [1])


@pytest.fixture
def prism():
    return make("product_of_cyclics", {"moduli": [6, 2]}, [[1, 0], [0, 1]])


@pytest.fixture(params=zoo_names())
def zoo(request):
    return zoo_context(request.param)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    lines = getattr(mod, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
