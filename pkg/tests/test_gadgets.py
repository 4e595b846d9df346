import dataclasses
import random

import pytest

from ovsg.corpus import DS_FIGURE, FALSE_WITNESS, RUNNING
from ovsg.formula import QbfInstance
from ovsg.gadgets import (ExtensionGadget, GadgetError, base_binom, build_dependency_reveal,
                          build_fake_clause, build_id_gadget, build_online_instance,
                          check_self_contained, clause_id_count, compute_budget, dr_targets, extend,
                          literal_id_count, verify_standalone)
from ovsg.graph import Kind, LabeledGraph, VertexRole, canonical_code, path_graph
from ovsg.offline import Problem, reduce_3sat, solve_offline_exact


def pendant_gadget():
    return ExtensionGadget("pend", "test", Problem.VC, [("p", VertexRole())], [], [(1, "p")], 0, frozenset())


def test_extend_k2_with_pendant_is_p3():
    g = extend(path_graph(2), pendant_gadget())
    assert len(g) == 3 and g.n_edges == 2
    assert sorted(len(g.neighbors(v)) for v in g) == [1, 1, 2]
    assert frozenset((1, "p")) in g.connecting


def test_extend_errors():
    host = path_graph(2)
    bad = dataclasses.replace(pendant_gadget(), connecting=[(7, "p")])
    with pytest.raises(GadgetError):
        extend(host, bad)
    clash = dataclasses.replace(pendant_gadget(), vertices=[(0, VertexRole())], connecting=[])
    with pytest.raises(GadgetError):
        extend(host, clash)


def test_fake_clause_counts():
    base = reduce_3sat("vc", RUNNING).graph
    gadget = build_fake_clause("vc", (1, 2, -2), 2)
    g = extend(base, gadget)
    assert len(g) - len(base) == 9
    assert len(gadget.edges) == 9 and len(gadget.connecting) == 3
    assert g.n_edges - base.n_edges == 12


@pytest.mark.parametrize("p,opt", [("vc", 3), ("is", 6), ("ds", 1)])
def test_fake_clause_optima(p, opt):
    for key in [(1, -1, 2), (1, 2, -2), (-1, 2, -2)]:
        gadget = build_fake_clause(p, key, 2)
        assert gadget.standalone_optimum == opt
        assert verify_standalone(gadget)


def test_ds_fake_center_degree():
    g = extend(reduce_3sat("ds", DS_FIGURE).graph, build_fake_clause("ds", (1, -1, 2), 2))
    assert len(g.neighbors("F(+1,-1,+2)")) == 5


def test_fake_clause_rejects_real_or_degenerate():
    with pytest.raises(GadgetError):
        build_fake_clause("vc", (1, -1, 2), 2, real=[(1, -1, 2)])
    with pytest.raises(GadgetError):
        build_fake_clause("vc", (1, 1, 2), 2)


def test_dr_star_running_instance():
    gadget = build_dependency_reveal("vc", 1, RUNNING)
    targets = dr_targets("vc", 1, RUNNING)
    # literal targets L-1, L+2, L-2 and the three real clause members
    assert sorted(targets) == sorted(["L-1", "L+2", "L-2", "C1.+1", "C1.-1", "C1.+2"])
    inst = build_online_instance(RUNNING, "vc")
    assert len(inst.graph.neighbors("D1")) == 17
    assert len(gadget.vertices) - 1 == 17 - len(targets)
    assert gadget.standalone_optimum == 1
    ds = build_online_instance(DS_FIGURE, "ds")
    assert len(ds.graph.neighbors("D1")) == 5
    with pytest.raises(GadgetError):
        build_dependency_reveal("vc", 2, RUNNING)


def test_id_counts_running_instance():
    q = RUNNING
    assert [literal_id_count("vc", q, l) for l in (1, -1, 2, -2)] == [3, 2, 6, 7]
    assert [clause_id_count("vc", q, l) for l in (1, -1, 2)] == [5, 6, 9]
    gadget = build_id_gadget("ds", "L+1", VertexRole(Kind.LITERAL, 1, True), q)
    leaves = [v for v, r in gadget.vertices if r.kind is Kind.ID_LEAF]
    assert len(leaves) == base_binom(2) + 4 * 3 == 15
    with pytest.raises(GadgetError):
        build_id_gadget("vc", "D1", VertexRole(Kind.DR_CENTER, 1), q)


def test_running_instance_sizes_and_budgets():
    vc = build_online_instance(RUNNING, "vc")
    assert (len(vc.graph), vc.k) == (160, 52)
    assert len(vc.gadgets_of("fake-clause")) == 3
    is_ = build_online_instance(RUNNING, "is")
    assert (len(is_.graph), is_.k) == (160, 108)
    ds = build_online_instance(RUNNING, "ds")
    assert (len(ds.graph), ds.k) == (83, 10)
    fig = build_online_instance(DS_FIGURE, "ds")
    assert (len(fig.graph), fig.k) == (81, 9)


def test_budget_components_running_vc():
    inst = build_online_instance(RUNNING, "vc")
    parts = {}
    for g in inst.gadgets:
        parts[g.kind] = parts.get(g.kind, 0) + g.standalone_optimum
    assert inst.base.k == 4
    assert parts == {"fake-clause": 9, "dr": 1, "literal-id": 18, "clause-id": 20}
    assert compute_budget(inst) == 52


def test_budget_components_ds_figure():
    inst = build_online_instance(DS_FIGURE, "ds")
    parts = {}
    for g in inst.gadgets:
        parts[g.kind] = parts.get(g.kind, 0) + g.standalone_optimum
    assert (inst.base.k, parts) == (2, {"fake-clause": 2, "dr": 1, "literal-id": 4})


@pytest.mark.parametrize("q", [RUNNING, DS_FIGURE])
@pytest.mark.parametrize("p", list(Problem))
def test_budget_equals_offline_optimum(q, p):
    inst = build_online_instance(q, p)
    assert solve_offline_exact(p, inst.graph, witness=False).size == inst.k


def test_budget_drops_by_gadget_optimum():
    for p in Problem:
        inst = build_online_instance(RUNNING, p)
        for gadget in inst.gadgets:
            smaller = inst.without(gadget.name)
            assert inst.k - smaller.k == gadget.standalone_optimum
            assert solve_offline_exact(p, smaller.graph, witness=False).size == smaller.k


def test_requires_normalized_formula():
    with pytest.raises(Exception):
        build_online_instance(QbfInstance.build("AA", [(1, 2, -2)]), "vc")


# self-containment --------------------------------------------------------------------

def test_vc_fake_clause_all_forcings():
    r = check_self_contained("vc", build_fake_clause("vc", (1, -1, 2), 2))
    assert r.ok and r.assignments == 8 and r.standalone_optimum == 3


def test_ds_dr_star_never_forces_boundary():
    gadget = build_dependency_reveal("ds", 1, DS_FIGURE)
    r = check_self_contained("ds", gadget)
    assert r.ok
    full = gadget.with_boundary()
    for t in gadget.boundary():
        res = solve_offline_exact("ds", full, forced_out=[t], need_dominated=gadget.vertex_names)
        assert res.witness == frozenset(["D1"])


def test_broken_fake_clause_is_not_self_contained():
    gadget = build_fake_clause("vc", (1, -1, 2), 2)
    member = "F(+1,-1,+2).+1"
    drop = {f"{member}/p1", f"{member}/p2"}
    verts = [(v, r) for v, r in gadget.vertices if v not in drop]
    edges = [e for e in gadget.edges if not drop & set(e)]
    broken = dataclasses.replace(gadget, vertices=verts, edges=edges, standalone_optimum=2)
    assert solve_offline_exact("vc", broken.graph()).size == 2
    r = check_self_contained("vc", broken)
    assert not r.ok
    assert all(forcing["L+1"] is False for forcing, _ in r.violations)


def _figure_gadget(center_star: bool) -> ExtensionGadget:
    # host vertices h1..h4; the gadget joins to them as in the framework illustration
    con = [("h4", "e3"), ("h2", "e3"), ("h4", "e2"), ("h1", "e2"), ("h3", "e1")]
    if center_star:
        verts = [(v, VertexRole()) for v in ("e1", "e2", "e3", "c", "e5")]
        edges = [("c", "e1"), ("c", "e2"), ("c", "e3"), ("c", "e5")]
        return ExtensionGadget("star", "test", Problem.DS, verts, edges, con, 1, frozenset({"c"}))
    verts = [(v, VertexRole()) for v in ("e1", "e2", "e3")]
    edges = [("e1", "e2"), ("e2", "e3")]
    con = [("h4", "e3"), ("h2", "e3"), ("h4", "e2"), ("h1", "e2"), ("h3", "e1")]
    return ExtensionGadget("p3", "test", Problem.DS, verts, edges, con, 1, frozenset({"e2"}))


def test_ds_illustration_star_is_self_contained():
    assert check_self_contained("ds", _figure_gadget(True)).ok


def test_ds_illustration_path_is_not():
    r = check_self_contained("ds", _figure_gadget(False))
    assert not r.ok
    # choosing h3 and h4 on the host already dominates the whole path
    assert any(f["h3"] and f["h4"] and part == 0 for f, part in r.violations)


# degree uniqueness and pipeline order ------------------------------------------------------

@pytest.mark.parametrize("q", [RUNNING, FALSE_WITNESS])
@pytest.mark.parametrize("p", ["vc", "is"])
def test_dependent_degrees_unique(q, p):
    inst = build_online_instance(q, p)
    g = inst.graph
    by_degree = {}
    for v in g:
        by_degree.setdefault(len(g.neighbors(v)), []).append(v)
    for v in inst.base.graph:
        role = g.role(v)
        peers = by_degree[len(g.neighbors(v))]
        if role.kind is Kind.LITERAL and q.is_forall(role.variable):
            assert sorted(peers) == sorted([f"L+{role.variable}", f"L-{role.variable}"])
        else:
            # members of the same literal in different clauses share one row
            assert {(g.role(w).kind, g.role(w).literal) for w in peers} == {(role.kind, role.literal)}


def test_fake_clause_order_irrelevant():
    q = RUNNING
    base = reduce_3sat("vc", q).graph
    keys = [(1, -1, -2), (1, 2, -2), (-1, 2, -2)]
    codes = set()
    for seed in range(3):
        order = keys[:]
        random.Random(seed).shuffle(order)
        g = base.copy()
        for key in order:
            g = extend(g, build_fake_clause("vc", key, 2))
        codes.add(canonical_code(g))
    assert len(codes) == 1
