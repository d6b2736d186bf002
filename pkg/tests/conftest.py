# tests/conftest.py
from __future__ import annotations

import os

import numpy as np
import pytest
from pysat.formula import CNF

from lib.graphs import Graph, crown_graph, cycle_graph
from lib.reductions import random_cnf


def env_count(key: str, default: int) -> int:
    """Repeat count for seeded loops; raise LHOM_TEST_SEEDS / LHOM_TEST_CNFS for full-size runs."""
    return int(os.getenv(key, str(default)))


SEEDS = env_count("LHOM_TEST_SEEDS", 60)
CNFS = env_count("LHOM_TEST_CNFS", 8)

# full-size counts for the tests marked slow
FULL_SEEDS = 1000
FULL_CNFS = 100


@pytest.fixture
def c6() -> Graph:
    return cycle_graph(6)


@pytest.fixture
def c8() -> Graph:
    return cycle_graph(8)


@pytest.fixture
def crown3() -> Graph:
    return crown_graph(3)


def w(h: Graph, *labels: str):
    """Label-to-index shorthand: w(c6, "w1", "w5") -> [0, 4]."""
    return [h.index(lab) for lab in labels]


def sized_cnf(seed: int, n_max: int = 10, m_max: int = 15, width: int = 3) -> CNF:
    """Random formula whose variable and clause counts are themselves drawn from the seed."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, n_max + 1))
    m = int(rng.integers(1, m_max + 1))
    return random_cnf(n, m, width, seed)
