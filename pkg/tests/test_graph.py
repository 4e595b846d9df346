import random

import networkx as nx
import pytest
from hypothesis import given, strategies as st

from ovsg.corpus import DS_FIGURE, RUNNING
from ovsg.gadgets import build_online_instance
from ovsg.graph import (Kind, LabeledGraph, VertexRole, are_isomorphic, automorphisms,
                        canonical_code, complete_graph, cycle_graph, degree, from_networkx,
                        path_graph, star_graph)
from ovsg.serialize import dumps_instance, graph_differences, loads_instance, to_dot


def relabel(g: LabeledGraph, perm: dict) -> LabeledGraph:
    h = LabeledGraph()
    order = list(g)
    random.Random(len(order)).shuffle(order)
    for v in order:
        h.add_vertex(perm[v], g.role(v))
    for u, v in g.edges():
        h.add_edge(perm[u], perm[v])
    return h


def test_degree_examples():
    g = LabeledGraph(["x"])
    assert degree(g, "x") == 0
    assert degree(star_graph(17), 0) == 17


def test_true_literal_degree_in_running_vc_graph():
    g = build_online_instance(RUNNING, "vc").graph
    assert degree(g, "L+1") == 7 == degree(g, "L-1")


def test_graph_basic_errors():
    g = path_graph(3)
    with pytest.raises(ValueError):
        g.add_edge(0, 1)
    with pytest.raises(ValueError):
        g.add_edge(0, 0)
    with pytest.raises(KeyError):
        g.add_edge(0, 9)
    with pytest.raises(ValueError):
        g.add_vertex(0)


def test_canonical_code_examples():
    c4 = cycle_graph(4)
    other = relabel(c4, {0: "a", 1: "c", 2: "b", 3: "d"})
    assert canonical_code(c4) == canonical_code(other)
    assert canonical_code(path_graph(3)) != canonical_code(complete_graph(3))


def test_forall_literal_revelations_look_the_same():
    # the closed neighborhoods of the two ∀ literal vertices, before anything else is revealed
    g = build_online_instance(RUNNING, "vc").graph
    codes = []
    for v in ("L+1", "L-1"):
        obs = LabeledGraph()
        obs.add_vertex(v)
        for w in g.neighbors(v):
            obs.add_vertex(w)
            obs.add_edge(v, w)
        codes.append(canonical_code(obs, visible={v: "revealed"}))
    assert codes[0] == codes[1]


def test_roles_hidden_unless_visible():
    a = path_graph(2)
    b = path_graph(2)
    b.set_role(0, VertexRole(Kind.LITERAL, 1, True))
    assert canonical_code(a) == canonical_code(b)
    assert canonical_code(a, visible=True) != canonical_code(b, visible=True)


def test_are_isomorphic_examples():
    assert are_isomorphic(complete_graph(3), complete_graph(3))
    assert not are_isomorphic(complete_graph(3), path_graph(3))
    h = nx.gnp_random_graph(8, 0.4, seed=3)
    g = from_networkx(h)
    perm = list(range(8))
    random.Random(1).shuffle(perm)
    assert are_isomorphic(g, relabel(g, dict(enumerate(perm))))


@pytest.mark.parametrize("g,count", [
    (cycle_graph(4), 8), (complete_graph(3), 6), (path_graph(3), 2), (star_graph(3), 6),
    (cycle_graph(5), 10),
])
def test_automorphism_counts(g, count):
    auts = automorphisms(g)
    assert len(auts) == count
    masks = g.adjacency_masks()
    for sigma in auts:
        for u in range(len(g)):
            for v in range(len(g)):
                assert (masks[u] >> v & 1) == (masks[sigma[u]] >> sigma[v] & 1)


def test_automorphism_cap():
    assert automorphisms(complete_graph(7), cap=100) is None


graphs = st.integers(1, 8).flatmap(
    lambda n: st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=2 * n)
    .map(lambda es: (n, es)))


def make(spec) -> LabeledGraph:
    n, es = spec
    g = LabeledGraph(range(n))
    for u, v in es:
        if u != v and not g.has_edge(u, v):
            g.add_edge(u, v)
    return g


@given(graphs, st.randoms(use_true_random=False))
def test_canonical_code_relabel_invariant(spec, rnd):
    g = make(spec)
    perm = list(range(len(g)))
    rnd.shuffle(perm)
    assert canonical_code(g) == canonical_code(relabel(g, dict(enumerate(perm))))


@given(graphs, graphs)
def test_code_equality_matches_isomorphism(a, b):
    g, h = make(a), make(b)
    expected = nx.is_isomorphic(g.to_networkx(), h.to_networkx())
    assert are_isomorphic(g, h) == expected
    assert (canonical_code(g) == canonical_code(h)) == expected


def test_code_equality_exhaustive_small_atlas():
    atlas = [from_networkx(h) for h in nx.graph_atlas_g()[1:53]]  # all graphs on 1..5 vertices
    codes = [canonical_code(g) for g in atlas]
    assert len(set(codes)) == len(codes)


# serialization ----------------------------------------------------------------------

def test_instance_round_trip():
    inst = build_online_instance(DS_FIGURE, "ds")
    loaded = loads_instance(dumps_instance(inst))
    assert loaded.graph == inst.graph
    assert loaded.graph.connecting == inst.graph.connecting
    assert loaded.k == 9 and loaded.formula == DS_FIGURE
    assert graph_differences(inst.graph, loaded.graph) == []


def test_edge_list_and_dot():
    f = loads_instance("# c4\n0 1\n1 2\n2 3\n3 0\n")
    assert len(f.graph) == 4 and f.graph.n_edges == 4
    g = build_online_instance(RUNNING, "vc").graph
    dot = to_dot(g)
    assert dot.count("style=dashed") == len(g.connecting) > 0
    assert dot.count(" -- ") == g.n_edges
