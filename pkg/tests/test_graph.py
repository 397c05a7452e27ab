import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from confsel.graph import (
    CycleError,
    Dag,
    GraphError,
    UnknownVertexError,
    ancestors,
    causal_closure,
    descendants,
    is_causally_closed,
    make_swig,
    mutilate_backdoor,
    nondescendants,
    nontrivial_common_ancestors,
    relevant_pretreatment,
)
from confsel.testkit import RandomDagSpec, random_dag


@st.composite
def dags(draw, max_vertices=7, latent=0.0):
    spec = RandomDagSpec(
        draw(st.integers(2, max_vertices)),
        draw(st.sampled_from([0.2, 0.4, 0.6])),
        latent,
        seed=draw(st.integers(0, 10**6)),
    )
    return random_dag(spec)


def test_ancestors_examples(ga, gc):
    assert ancestors(gc, {"S1"}) == {"S1", "Z1", "Z4", "Z3"}
    assert ancestors(ga, {"Y"}) == {"Y", "A", "U1", "U2"}
    assert ancestors(ga, set()) == frozenset()


def test_descendants_examples(ga, gb):
    assert descendants(ga, {"U1"}) == {"U1", "A", "L", "Y"}
    assert descendants(gb, {"Y"}) == {"Y"}
    assert nondescendants(ga, {"U1"}) == {"U2"}


def test_unknown_vertex(ga):
    with pytest.raises(UnknownVertexError):
        ancestors(ga, {"Q"})


@pytest.mark.parametrize(
    "kwargs, err",
    [
        (dict(vertices=["A", "Y"], edges=[("A", "Y"), ("Y", "A")], treatment="A", outcome="Y"), CycleError),
        (dict(vertices=["A", "Y"], edges=[("A", "A")], treatment="A", outcome="Y"), GraphError),
        (dict(vertices=["A", "Y"], edges=[], treatment="A", outcome="A"), GraphError),
        (dict(vertices=["A", "Y"], edges=[("Y", "A")], treatment="A", outcome="Y"), GraphError),
        (dict(vertices=["A", "Y", "U"], edges=[], treatment="A", outcome="Y", latent=["A"]), GraphError),
        (dict(vertices=["A", "Y", "1x"], edges=[], treatment="A", outcome="Y"), GraphError),
        (dict(vertices=["A", "Y"], edges=[("A", "Q")], treatment="A", outcome="Y"), UnknownVertexError),
    ],
)
def test_dag_invariants(kwargs, err):
    with pytest.raises(err):
        Dag(**kwargs)


def test_mutilate_backdoor(ga, gb):
    assert mutilate_backdoor(ga).edges == ga.edges - {("A", "Y")}
    assert mutilate_backdoor(gb).edges == gb.edges - {("A", "Y")}
    g = Dag(["A", "Y", "X"], [("X", "A"), ("X", "Y")], "A", "Y")
    assert mutilate_backdoor(g) == g
    assert mutilate_backdoor(ga).latent == ga.latent


def test_swig(ga, gb):
    sw = make_swig(ga)
    assert sw.random_part == "A" and sw.fixed_part == "a"
    assert sw.relabeled == {"Y": "Y(a)"}
    assert ("U1", "A") in sw.edges and ("a", "Y(a)") in sw.edges
    assert not any(src == "A" for src, _ in sw.edges)
    assert not any(dst == "a" for _, dst in sw.edges)
    assert len(sw.edges) == len(ga.edges)
    assert make_swig(gb).relabeled == {"Y": "Y(a)"}

    minimal = make_swig(Dag(["A", "Y"], [("A", "Y")], "A", "Y"))
    assert minimal.edges == {("a", "Y(a)")}
    assert "A" in minimal.vertices


def test_swig_name_collision():
    g = Dag(["A", "a", "Y"], [("A", "Y"), ("a", "A")], "A", "Y")
    sw = make_swig(g)
    assert sw.fixed_part not in g.vertices
    assert sw.as_dag().outcome == "Y__" + sw.fixed_part


def test_nontrivial_common_ancestors(gc):
    assert nontrivial_common_ancestors(gc, "S1", "S2") == {"Z1", "Z3"}
    chain = Dag(["Z", "X", "Y", "A"], [("Z", "X"), ("X", "Y")], "A", "Y")
    assert nontrivial_common_ancestors(chain, "X", "Y") == frozenset()
    ay = nontrivial_common_ancestors(gc, "A", "Y")
    assert "Z2" not in ay
    assert ay == {"S1", "S2"}
    with pytest.raises(GraphError):
        nontrivial_common_ancestors(gc, "A", "A")


def test_causal_closure(gc):
    target = {"Z1", "Z3", "S1", "S2", "A", "Y"}
    assert causal_closure(gc, {"S1", "S2", "A", "Y"}) == target
    assert is_causally_closed(gc, target)
    assert not is_causally_closed(gc, {"S1", "S2", "A", "Y"})
    assert is_causally_closed(gc, gc.vertices)
    assert causal_closure(gc, gc.vertices) == gc.vertices
    chain = Dag(["Z", "X", "Y", "A"], [("Z", "X"), ("X", "Y")], "A", "Y")
    assert causal_closure(chain, {"X", "Y"}) == {"X", "Y"}


def test_relevant_pretreatment(gb, gc):
    assert relevant_pretreatment(gc, {"S1", "S2"}) == {"Z1", "Z3", "S1", "S2"}
    assert relevant_pretreatment(gb, {"X1", "X2"}) == {"X1", "X2"}
    g = Dag(["A", "Y", "X"], [("A", "Y"), ("X", "Y")], "A", "Y")
    assert relevant_pretreatment(g, set()) == frozenset()


@settings(max_examples=60, deadline=None)
@given(dags(), st.data())
def test_ancestral_relations_monotone_idempotent(g, data):
    names = sorted(g.vertices)
    small = frozenset(data.draw(st.sets(st.sampled_from(names))))
    big = small | frozenset(data.draw(st.sets(st.sampled_from(names))))
    for rel in (ancestors, descendants):
        assert rel(g, small) <= rel(g, big)
        assert rel(g, rel(g, small)) == rel(g, small)
        assert small <= rel(g, small) <= g.vertices


@settings(max_examples=60, deadline=None)
@given(dags(), st.data())
def test_closure_extensive_idempotent_monotone(g, data):
    names = sorted(g.vertices)
    h = frozenset(data.draw(st.sets(st.sampled_from(names))))
    h2 = h | frozenset(data.draw(st.sets(st.sampled_from(names))))
    c = causal_closure(g, h)
    assert h <= c
    assert causal_closure(g, c) == c
    assert is_causally_closed(g, c)
    assert c <= causal_closure(g, h2)


@settings(max_examples=60, deadline=None)
@given(dags(max_vertices=8, latent=0.3), st.data())
def test_relevant_pretreatment_never_post_treatment(g, data):
    pre = sorted(g.observed_covariates - g.descendants_of([g.treatment]))
    s = frozenset(data.draw(st.sets(st.sampled_from(pre)))) if pre else frozenset()
    z = relevant_pretreatment(g, s)
    assert not z & (g.descendants_of([g.treatment]) - {g.treatment})
