import json
import pathlib
import sys

import pytest

sys.path.insert(0, str(pathlib.Path(__file__).parent))

from stagetree import Dag, StagedTree, StateSpace, build_tree  # noqa: E402

DATA = pathlib.Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def data_dir():
    return DATA


@pytest.fixture(scope="session")
def g1():
    return Dag.from_edges(4, [(1, 3), (2, 3), (3, 4), (2, 4)])


@pytest.fixture(scope="session")
def g2():
    return Dag.from_edges(4, [(1, 2), (2, 3), (2, 4), (3, 4)])


@pytest.fixture(scope="session")
def binary4():
    return StateSpace.binary(4)


@pytest.fixture(scope="session")
def t_g1(g1, binary4):
    return build_tree(g1, (1, 2, 3, 4), binary4)


@pytest.fixture(scope="session")
def t_g2(g2, binary4):
    return build_tree(g2, (1, 2, 3, 4), binary4)


@pytest.fixture(scope="session")
def figure2_t1():
    return StagedTree.from_json(json.loads((DATA / "figure2_t1.json").read_text()))


@pytest.fixture(scope="session")
def figure2_t2():
    return StagedTree.from_json(json.loads((DATA / "figure2_t2.json").read_text()))
