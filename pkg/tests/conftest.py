from pathlib import Path

import pytest

from confsel.graph import Dag
from confsel.sem import LinearSem

GRAPHS = Path(__file__).resolve().parent.parent / "graphs"

GA_EDGES = [("U1", "A"), ("U1", "L"), ("U2", "L"), ("U2", "Y"), ("A", "Y")]
GB_EDGES = [("X1", "A"), ("X1", "X2"), ("X2", "Y"), ("A", "Y")]
GC_EDGES = [
    ("A", "Y"), ("S1", "A"), ("S1", "Y"), ("S2", "A"), ("S2", "Y"), ("Z1", "S1"),
    ("Z1", "S2"), ("Z2", "A"), ("Z3", "Z1"), ("Z3", "Z4"), ("Z4", "S1"),
]

GB_COEF = {("X1", "A"): 0.8, ("X1", "X2"): 0.7, ("X2", "Y"): 0.6, ("A", "Y"): 1.5}
GA_COEF = {e: 1.0 for e in GA_EDGES}


def make_ga():
    return Dag(["A", "Y", "U1", "U2", "L"], GA_EDGES, "A", "Y", latent=["U1", "U2"])


def make_gb():
    return Dag(["A", "Y", "X1", "X2"], GB_EDGES, "A", "Y")


def make_gc():
    return Dag(["A", "Y", "S1", "S2", "Z1", "Z2", "Z3", "Z4"], GC_EDGES, "A", "Y")


def unit_noise(g):
    return {v: 1.0 for v in g.vertices}


@pytest.fixture
def ga():
    return make_ga()


@pytest.fixture
def gb():
    return make_gb()


@pytest.fixture
def gc():
    return make_gc()


@pytest.fixture
def chain():
    """X -> A -> Y with unit coefficients and unit noise."""
    g = Dag(["X", "A", "Y"], [("X", "A"), ("A", "Y")], "A", "Y")
    return LinearSem(g, {("X", "A"): 1.0, ("A", "Y"): 1.0}, unit_noise(g))


@pytest.fixture
def gb_sem(gb):
    return LinearSem(gb, GB_COEF, unit_noise(gb))


@pytest.fixture
def ga_sem(ga):
    return LinearSem(ga, GA_COEF, unit_noise(ga))


@pytest.fixture
def ga_sem_binary(ga):
    return LinearSem(ga, GA_COEF, unit_noise(ga), treatment_mechanism="threshold")
